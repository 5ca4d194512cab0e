#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "symchaos/events.hpp"
#include "symchaos/models.hpp"

namespace symchaos {

enum class PartitionVariant { LorenzFlipFlop, RosslerZThreshold, RosslerMinMax };
enum class ThresholdMode { Fixed, Relative };

struct PartitionSpec {
  PartitionVariant variant = PartitionVariant::LorenzFlipFlop;
  ThresholdMode threshold_mode = ThresholdMode::Fixed;
  double z_threshold = 1.0;  // used in Fixed mode
};

const char* to_string(PartitionVariant variant);

/// z_th for a Rossler partition: the fixed value, or 0.1 (c - ab) / a.
double resolve_threshold(const PartitionSpec& spec, const RosslerParams<double>& params);

/// Event channel a partition reads from (x for Lorenz, z for Rossler).
Channel partition_channel(const PartitionSpec& spec);

struct SymbolSequence {
  std::vector<std::uint8_t> bits;
  std::string source_meta;
  std::size_t dropped_boundary = 0;  // events exactly on the partition boundary

  std::size_t size() const { return bits.size(); }
  bool empty() const { return bits.empty(); }
};

/// Stateless per-event symbol rule, usable on streams.
class SymbolEncoder {
public:
  SymbolEncoder(const PartitionSpec& spec, const RosslerParams<double>& rossler = {});

  /// Symbol for one event, or nothing when the rule emits none (boundary
  /// events, minima in the threshold variant, sub-threshold maxima in the
  /// min/max variant).
  std::optional<std::uint8_t> operator()(const CriticalEvent& event) const;

  double threshold() const { return threshold_; }

private:
  PartitionVariant variant_;
  double threshold_ = 0.0;
};

/// Outer x turning points: a maximum with x > 0 gives 1, a minimum with
/// x < 0 gives 0. Inner turning points emit nothing; x == 0 is dropped.
SymbolSequence encode_lorenz(std::span<const CriticalEvent> events, const PartitionSpec& spec);

SymbolSequence encode_rossler_threshold(std::span<const CriticalEvent> events, const PartitionSpec& spec,
                                        const RosslerParams<double>& params);

enum class EventDetection {
  DerivativeZero,  // sign changes of the first difference, noise-free signals
  SmoothedPeaks,   // moving-average smoothing, then prominence/distance peaks
};

/// Everything needed to turn a sampled trajectory into symbols.
struct SymbolPipeline {
  PartitionSpec partition{};
  EventDetection detection = EventDetection::DerivativeZero;
  SmoothingConfig smoothing{};
  PeakConfig peaks{};
  bool raw_values = true;  // SmoothedPeaks: read event values from the raw signal
};

/// Search radius for reading a smoothed peak back from the raw signal: the
/// half support of the repeated moving average.
Eigen::Index smoothing_radius(const SmoothingConfig& cfg);

/// Extrema of one channel signal, in time order, found with the pipeline's
/// detection method (maxima and minima both).
std::vector<CriticalEvent> detect_events(const Eigen::Ref<const Eigen::VectorXd>& signal, double t0, double dt,
                                         Channel channel, const SymbolPipeline& pipeline);

SymbolSequence encode_events(std::span<const CriticalEvent> events, const PartitionSpec& spec,
                             const RosslerParams<double>& params = {});

SymbolSequence extract_symbols(const Trajectory<double>& traj, const SymbolPipeline& pipeline);

std::string to_string(std::span<const std::uint8_t> bits);

/// Parses a '0'/'1' text (a single trailing newline is allowed). Throws
/// DomainError naming the byte offset of the first malformed character.
std::vector<std::uint8_t> parse_bits(std::string_view text);

}  // namespace symchaos
