#pragma once

// Text exports shared by the library and the command-line tool. Numbers are
// written in their shortest round-trip form.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "symchaos/complexity.hpp"
#include "symchaos/events.hpp"
#include "symchaos/lyapunov.hpp"
#include "symchaos/models.hpp"

namespace symchaos {

/// Shortest text that reads back to the same double; NaN is written as
/// "nan", infinities as "inf" / "-inf".
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);

/// Writes atomically enough for our purposes: parent directories are created
/// and the whole content is written in one go. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj);
void write_events_csv(std::ostream& out, std::span<const CriticalEvent> events);

/// '0'/'1' characters followed by a newline.
std::string format_sequence(std::span<const std::uint8_t> bits);

void write_entropy_profile_csv(std::ostream& out, const BlockEntropyProfile& profile);
void write_complexity_csv(std::ostream& out, const ComplexityReport& report);
void write_lyapunov_csv(std::ostream& out, double param, const LyapunovResult& result);

}  // namespace symchaos
