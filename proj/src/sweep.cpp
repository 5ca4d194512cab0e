#include "symchaos/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>

#include "symchaos/errors.hpp"
#include "symchaos/io.hpp"
#include "symchaos/parallel.hpp"

namespace symchaos {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double* param_slot(Model<double>& model, const std::string& name) {
  if (model.kind == ModelKind::Lorenz) {
    if (name == "r") return &model.lorenz.r;
    if (name == "sigma") return &model.lorenz.sigma;
    if (name == "b") return &model.lorenz.b;
  } else {
    if (name == "a") return &model.rossler.a;
    if (name == "b") return &model.rossler.b;
    if (name == "c") return &model.rossler.c;
  }
  return nullptr;
}

}  // namespace

void SweepSpec::validate() const {
  base.validate();
  Model<double> probe = base;
  if (!param_slot(probe, param_name))
    throw ConfigError("sweep: unknown parameter '" + param_name + "' for model " + to_string(base.kind));
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw ConfigError("sweep: range requires lo < hi");
  if (!(step > 0)) throw ConfigError("sweep: step must be > 0");
  if (symbols_target < 1000) throw ConfigError("sweep: symbols_target must be >= 1000");
  if (!(max_time > integrator.t_transient)) throw ConfigError("sweep: max_time must exceed t_transient");
  IntegratorConfig probe_cfg = integrator;
  probe_cfg.t_total = max_time;
  probe_cfg.validate();
  const bool lorenz_partition = partition.variant == PartitionVariant::LorenzFlipFlop;
  if (lorenz_partition != (base.kind == ModelKind::Lorenz))
    throw ConfigError("sweep: partition does not match the model");
}

std::vector<double> SweepSpec::grid() const {
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) values[k] = lo + double(k) * step;
  return values;
}

Model<double> SweepSpec::model_at(double value) const {
  Model<double> m = base;
  double* slot = param_slot(m, param_name);
  if (!slot) throw ConfigError("sweep: unknown parameter '" + param_name + "'");
  *slot = value;
  return m;
}

SweepSpec lorenz_sweep_defaults() {
  SweepSpec s;
  s.base = Model<double>::make_lorenz();
  s.param_name = "r";
  s.lo = 28.0;
  s.hi = 100.0;
  s.step = 0.25;
  s.integrator.method = Method::Rk4;
  s.integrator.dt = 0.005;
  s.integrator.t_transient = 200.0;
  s.partition.variant = PartitionVariant::LorenzFlipFlop;
  s.lyapunov.dt = 0.005;
  s.lyapunov.t_transient = 200.0;
  s.lyapunov.t_total = 2000.0;
  s.lyapunov.events = EventSelection::Outer;
  return s;
}

SweepSpec rossler_sweep_defaults() {
  SweepSpec s;
  s.base = Model<double>::make_rossler();
  s.param_name = "a";
  s.lo = 0.25;
  s.hi = 0.45;
  s.step = 0.005;
  s.integrator.method = Method::Rk4;
  s.integrator.dt = 0.01;
  s.integrator.t_transient = 500.0;
  s.partition.variant = PartitionVariant::RosslerZThreshold;
  s.partition.threshold_mode = ThresholdMode::Fixed;
  s.partition.z_threshold = 12.0;
  s.lyapunov.dt = 0.01;
  s.lyapunov.t_transient = 500.0;
  s.lyapunov.t_total = 5000.0;
  s.lyapunov.events = EventSelection::Maxima;
  return s;
}

std::string format_flags(unsigned flags) {
  static const std::pair<unsigned, const char*> names[] = {
      {kFlagShort, "short"},
      {kFlagBlowUp, "blowup"},
      {kFlagLyapunovFailed, "lyapunov_failed"},
      {kFlagNotConverged, "not_converged"},
      {kFlagNoSymbols, "no_symbols"},
  };
  std::string out;
  for (const auto& [bit, name] : names) {
    if (!(flags & bit)) continue;
    if (!out.empty()) out += ';';
    out += name;
  }
  return out;
}

SymbolSequence collect_symbols(const Model<double>& model, const State3<double>& s0, const IntegratorConfig& cfg,
                               const PartitionSpec& partition, std::size_t target, double max_time) {
  model.validate();
  const Channel channel = partition_channel(partition);
  const SymbolEncoder encoder(partition, model.rossler);
  GridStepper<double, Model<double>> stepper(model, s0, cfg);
  const Eigen::Index first = grid_index(cfg.t_transient, cfg.dt);
  const Eigen::Index last = grid_index(max_time, cfg.dt);
  while (Eigen::Index(stepper.index()) < first) stepper.advance();

  SymbolSequence seq;
  seq.source_meta = std::string("partition=") + to_string(partition.variant);
  seq.bits.reserve(target);
  ExtremumDetector detector(double(first) * cfg.dt, cfg.dt, channel);
  detector.push(stepper.state()[int(channel)]);
  while (seq.bits.size() < target && Eigen::Index(stepper.index()) < last) {
    const auto event = detector.push(stepper.advance()[int(channel)]);
    if (!event) continue;
    if (auto bit = encoder(*event)) {
      seq.bits.push_back(*bit);
    } else if (event->value == encoder.threshold()) {
      ++seq.dropped_boundary;
    }
  }
  return seq;
}

SweepRecord sweep_point(const SweepSpec& spec, std::size_t index) {
  const auto values = spec.grid();
  if (index >= values.size()) throw DomainError("sweep_point: index out of range");
  SweepRecord rec;
  rec.param = values[index];
  const Model<double> model = spec.model_at(rec.param);
  const std::uint64_t seed = derive_seed(spec.seed, index);

  rec.h6 = rec.lz = rec.p11 = rec.p01 = rec.p00 = rec.p10 = kNaN;
  try {
    const SymbolSequence seq =
        collect_symbols(model, spec.s0, spec.integrator, spec.partition, spec.symbols_target, spec.max_time);
    rec.n_symbols = seq.size();
    if (double(rec.n_symbols) < 0.9 * double(spec.symbols_target)) rec.flags |= kFlagShort;
    const int needed = std::max(spec.complexity.entropy.m_max + 1, 4);
    if (rec.n_symbols < std::size_t(needed)) {
      rec.flags |= kFlagNoSymbols;
    } else {
      const ComplexityReport report = analyze(seq.bits, spec.complexity);
      rec.h6 = report.source_entropy;
      rec.lz = report.lz.lz;
      rec.p11 = report.markov.p11;
      rec.p01 = report.markov.p01;
      rec.p00 = report.markov.p00;
      rec.p10 = report.markov.p10;
      rec.detected_period = report.detected_period;
      rec.code = report.code;
    }
  } catch (const NumericError&) {
    rec.flags |= kFlagBlowUp;
  }

  rec.lambda_tau = rec.Lambda = rec.tau = kNaN;
  try {
    LyapunovConfig lc = spec.lyapunov;
    lc.seed = seed;
    const LyapunovResult le = largest_le(model, spec.s0, lc);
    rec.Lambda = le.Lambda;
    rec.tau = le.tau;
    rec.lambda_tau = le.lambda_dimensionless;
    if (!le.converged) rec.flags |= kFlagNotConverged;
  } catch (const Error&) {
    rec.flags |= kFlagLyapunovFailed;
  }
  return rec;
}

std::vector<SweepRecord> run_sweep(const SweepSpec& spec, const SweepProgress& progress) {
  spec.validate();
  const std::size_t n = spec.grid().size();
  std::vector<SweepRecord> records(n);
  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(n, spec.threads, [&](std::size_t i) {
    records[i] = sweep_point(spec, i);
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(++done, n, records[i]);
    }
  });
  return records;
}

bool is_window_point(const SweepRecord& r, const WindowCriteria& c) {
  return r.detected_period.has_value() && r.h6 <= c.eps_h && r.lz <= c.eps_lz && r.lambda_tau <= c.eps_le;
}

std::vector<StabilityWindow> detect_stability_windows(std::span<const SweepRecord> records,
                                                      const WindowCriteria& criteria) {
  std::vector<StabilityWindow> windows;
  std::size_t i = 0;
  while (i < records.size()) {
    if (!is_window_point(records[i], criteria)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < records.size() && is_window_point(records[j], criteria) && records[j].code == records[i].code) ++j;

    StabilityWindow w;
    w.param_lo = records[i].param;
    w.param_hi = records[j - 1].param;
    w.period = *records[i].detected_period;
    w.code = records[i].code;
    w.n_points = j - i;
    double asym = 0.0;
    for (std::size_t k = i; k < j; ++k) asym += std::abs(records[k].p11 - records[k].p00);
    asym /= double(j - i);
    w.symmetric = asym <= criteria.symmetry_tol;  // false when either entry is NaN
    windows.push_back(w);
    i = j;
  }
  return windows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records) {
  out << "param,lambda_tau,h6,lz,p11,p01,p00,p10,period,n_symbols,flags\n";
  for (const auto& r : records) {
    out << format_double(r.param) << ',' << format_double(r.lambda_tau) << ',' << format_double(r.h6) << ','
        << format_double(r.lz) << ',' << format_double(r.p11) << ',' << format_double(r.p01) << ','
        << format_double(r.p00) << ',' << format_double(r.p10) << ',';
    if (r.detected_period) out << *r.detected_period;
    out << ',' << r.n_symbols << ',' << format_flags(r.flags) << '\n';
  }
}

void write_windows_csv(std::ostream& out, std::span<const StabilityWindow> windows) {
  out << "param_lo,param_hi,period,code,symmetric,n_points\n";
  for (const auto& w : windows) {
    out << format_double(w.param_lo) << ',' << format_double(w.param_hi) << ',' << w.period << ',' << w.code << ','
        << (w.symmetric ? 1 : 0) << ',' << w.n_points << '\n';
  }
}

}  // namespace symchaos
