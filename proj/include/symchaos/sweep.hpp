#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symchaos/complexity.hpp"
#include "symchaos/lyapunov.hpp"
#include "symchaos/models.hpp"
#include "symchaos/symbolic.hpp"

namespace symchaos {

struct SweepSpec {
  Model<double> base = Model<double>::make_lorenz();
  std::string param_name = "r";  // "r" for Lorenz, "a" for Rossler
  double lo = 28.0;
  double hi = 100.0;
  double step = 0.25;
  std::size_t symbols_target = 10000;
  double max_time = 1e5;  // integration cap while collecting symbols
  State3<double> s0 = State3<double>::Ones();
  IntegratorConfig integrator{};  // dt, method, tolerances and t_transient are used
  PartitionSpec partition{};
  LyapunovConfig lyapunov{};
  ComplexityOptions complexity{};
  std::uint64_t seed = 0;
  unsigned threads = 0;

  void validate() const;
  std::vector<double> grid() const;
  Model<double> model_at(double value) const;
};

/// Defaults used for the two standard sweeps.
SweepSpec lorenz_sweep_defaults();
SweepSpec rossler_sweep_defaults();

enum SweepFlag : unsigned {
  kFlagShort = 1u << 0,          // fewer than 90% of the requested symbols
  kFlagBlowUp = 1u << 1,         // integration failed
  kFlagLyapunovFailed = 1u << 2,
  kFlagNotConverged = 1u << 3,   // Lyapunov estimate still drifting
  kFlagNoSymbols = 1u << 4,
};

std::string format_flags(unsigned flags);

struct SweepRecord {
  double param = 0.0;
  double lambda_tau = 0.0;
  double Lambda = 0.0;
  double tau = 0.0;
  double h6 = 0.0;
  double lz = 0.0;
  double p11 = 0.0, p01 = 0.0, p00 = 0.0, p10 = 0.0;
  std::optional<int> detected_period;
  std::string code;
  std::size_t n_symbols = 0;
  unsigned flags = 0;
};

struct StabilityWindow {
  double param_lo = 0.0;
  double param_hi = 0.0;
  int period = 0;
  std::string code;
  bool symmetric = false;
  std::size_t n_points = 0;
};

struct WindowCriteria {
  double eps_h = 0.02;
  double eps_lz = 0.02;
  double eps_le = 0.02;
  double symmetry_tol = 0.05;  // |p11 - p00| for the symmetric flag
};

/// Collects symbols by streaming integration until `target` symbols exist or
/// `max_time` is reached.
SymbolSequence collect_symbols(const Model<double>& model, const State3<double>& s0, const IntegratorConfig& cfg,
                               const PartitionSpec& partition, std::size_t target, double max_time);

SweepRecord sweep_point(const SweepSpec& spec, std::size_t index);

using SweepProgress = std::function<void(std::size_t done, std::size_t total, const SweepRecord& record)>;

/// One record per grid value, in grid order. Point failures are flagged in
/// the record; the sweep continues.
std::vector<SweepRecord> run_sweep(const SweepSpec& spec, const SweepProgress& progress = {});

bool is_window_point(const SweepRecord& record, const WindowCriteria& criteria);

/// Maximal runs of window points (records sorted by param). A run is split
/// where the periodic code changes.
std::vector<StabilityWindow> detect_stability_windows(std::span<const SweepRecord> records,
                                                      const WindowCriteria& criteria = {});

void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records);
void write_windows_csv(std::ostream& out, std::span<const StabilityWindow> windows);

}  // namespace symchaos
