#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>
#include <utility>

#include "symchaos/errors.hpp"
#include "symchaos/io.hpp"

namespace symchaos::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("cannot parse '" + text + "' as a number");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("cannot parse '" + text + "' as a boolean");
}

struct Field {
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

using FieldTable = std::vector<std::pair<std::string, Field>>;

Field real(double& v) {
  return {[&v] { return format_double(v); }, [&v](const std::string& s) { v = parse_number<double>(s); }};
}

template <typename Int>
Field integer(Int& v) {
  return {[&v] { return std::to_string(v); }, [&v](const std::string& s) { v = parse_number<Int>(s); }};
}

Field flag(bool& v) {
  return {[&v] { return std::string(v ? "true" : "false"); }, [&v](const std::string& s) { v = parse_bool(s); }};
}

Field text(std::string& v) {
  return {[&v] { return v; }, [&v](const std::string& s) { v = s; }};
}

template <typename E>
Field choice(E& v, std::vector<std::pair<std::string, E>> names) {
  return {[&v, names] {
            for (const auto& [name, value] : names)
              if (value == v) return name;
            return std::string("?");
          },
          [&v, names](const std::string& s) {
            std::string allowed;
            for (const auto& [name, value] : names) {
              if (name == s) {
                v = value;
                return;
              }
              allowed += (allowed.empty() ? "" : ", ") + name;
            }
            throw ConfigError("'" + s + "' is not one of: " + allowed);
          }};
}

FieldTable fields(RunConfig& c) {
  FieldTable t;
  auto add = [&t](std::string key, Field f) { t.emplace_back(std::move(key), std::move(f)); };

  add("model.kind", choice(c.kind, {{"lorenz", ModelKind::Lorenz}, {"rossler", ModelKind::Rossler}}));
  add("lorenz.sigma", real(c.lorenz.sigma));
  add("lorenz.r", real(c.lorenz.r));
  add("lorenz.b", real(c.lorenz.b));
  add("rossler.a", real(c.rossler.a));
  add("rossler.b", real(c.rossler.b));
  add("rossler.c", real(c.rossler.c));

  add("integrator.method", choice(c.integrator.method, {{"rk4", Method::Rk4}, {"bs3", Method::BogackiShampine}}));
  add("integrator.dt", real(c.integrator.dt));
  add("integrator.abs_tol", real(c.integrator.abs_tol));
  add("integrator.rel_tol", real(c.integrator.rel_tol));
  add("integrator.t_transient", real(c.integrator.t_transient));
  add("integrator.t_total", real(c.integrator.t_total));
  add("integrator.noise_std", real(c.integrator.noise_std));
  add("integrator.noise_seed", integer(c.integrator.rng_seed));
  add("integrator.x0", real(c.s0.x()));
  add("integrator.y0", real(c.s0.y()));
  add("integrator.z0", real(c.s0.z()));

  add("partition.variant", choice(c.pipeline.partition.variant, {{"lorenz", PartitionVariant::LorenzFlipFlop},
                                                                 {"rossler_threshold", PartitionVariant::RosslerZThreshold},
                                                                 {"rossler_minmax", PartitionVariant::RosslerMinMax}}));
  add("partition.threshold_mode",
      choice(c.pipeline.partition.threshold_mode, {{"fixed", ThresholdMode::Fixed}, {"relative", ThresholdMode::Relative}}));
  add("partition.z_threshold", real(c.pipeline.partition.z_threshold));
  add("partition.detection", choice(c.pipeline.detection, {{"derivative", EventDetection::DerivativeZero},
                                                           {"smoothed", EventDetection::SmoothedPeaks}}));
  add("partition.smooth_window", integer(c.pipeline.smoothing.window));
  add("partition.smooth_passes", integer(c.pipeline.smoothing.passes));
  add("partition.min_prominence", real(c.pipeline.peaks.min_prominence));
  add("partition.min_distance", integer(c.pipeline.peaks.min_distance));
  add("partition.raw_values", flag(c.pipeline.raw_values));

  add("measure.m_max", integer(c.measure.entropy.m_max));
  add("measure.base", choice(c.measure.entropy.base, {{"bits", LogBase::Bits}, {"nats", LogBase::Nats}}));
  add("measure.correction", flag(c.measure.entropy.correction));
  add("measure.counting",
      choice(c.measure.entropy.counting, {{"overlapping", WordCounting::Overlapping}, {"cyclic", WordCounting::Cyclic}}));
  add("measure.m_star", integer(c.measure.m_star));
  add("measure.max_period", integer(c.measure.max_period));
  add("measure.lyapunov", flag(c.measure_lyapunov));

  add("lyapunov.dt", real(c.lyapunov.dt));
  add("lyapunov.t_transient", real(c.lyapunov.t_transient));
  add("lyapunov.t_total", real(c.lyapunov.t_total));
  add("lyapunov.renorm_interval", real(c.lyapunov.renorm_interval));
  add("lyapunov.d0", real(c.lyapunov.d0));
  add("lyapunov.events", choice(c.lyapunov.events, {{"all", EventSelection::All},
                                                    {"maxima", EventSelection::Maxima},
                                                    {"minima", EventSelection::Minima},
                                                    {"outer", EventSelection::Outer}}));

  add("sweep.param", text(c.sweep_param));
  add("sweep.lo", real(c.sweep_lo));
  add("sweep.hi", real(c.sweep_hi));
  add("sweep.step", real(c.sweep_step));
  add("sweep.symbols_target", integer(c.symbols_target));
  add("sweep.max_time", real(c.max_time));
  add("sweep.eps_h", real(c.windows.eps_h));
  add("sweep.eps_lz", real(c.windows.eps_lz));
  add("sweep.eps_le", real(c.windows.eps_le));
  add("sweep.symmetry_tol", real(c.windows.symmetry_tol));

  add("esn.n_res", integer(c.esn.n_res));
  add("esn.leak", real(c.esn.leak_alpha));
  add("esn.rho", real(c.esn.spectral_radius));
  add("esn.input_scaling", real(c.esn.input_scaling));
  add("esn.density", real(c.esn.density));
  add("esn.beta", real(c.esn.ridge_beta));
  add("esn.washout", integer(c.esn.washout));
  add("esn.train_len", integer(c.esn.train_len));
  add("esn.readout_bias", flag(c.esn.readout_bias));
  add("esn.input_noise_std", real(c.input_noise_std));
  add("esn.noise_seed", integer(c.noise_seed));
  add("esn.noisy_targets", flag(c.search.noisy_targets));
  add("esn.horizon", integer(c.horizon));
  add("esn.file", text(c.esn_file));
  add("esn.write_trajectory", flag(c.write_trajectory));

  add("search.trials", integer(c.search.trials));
  add("search.leak_lo", real(c.search.leak.lo));
  add("search.leak_hi", real(c.search.leak.hi));
  add("search.rho_lo", real(c.search.spectral_radius.lo));
  add("search.rho_hi", real(c.search.spectral_radius.hi));
  add("search.input_scaling_lo", real(c.search.input_scaling.lo));
  add("search.input_scaling_hi", real(c.search.input_scaling.hi));
  add("search.density_lo", real(c.search.density.lo));
  add("search.density_hi", real(c.search.density.hi));
  add("search.beta_lo", real(c.search.ridge_beta.lo));
  add("search.beta_hi", real(c.search.ridge_beta.hi));
  add("search.test_len", integer(c.search.test_len));
  add("search.keep_top", integer(c.search.keep_top));
  add("search.transient_steps", integer(c.search.scoring.transient_steps));
  add("search.entropy_m_lo", integer(c.search.scoring.entropy_m_lo));
  add("search.entropy_m_hi", integer(c.search.scoring.entropy_m_hi));
  add("search.symmetry_z", real(c.search.scoring.symmetry_z));
  add("search.refine_candidates", integer(c.refine_candidates));
  add("search.refine_horizon", integer(c.refine_horizon));
  add("search.report_horizon", integer(c.report_horizon));
  add("search.report_m_max", integer(c.report_m_max));
  add("search.map_bins", integer(c.map_bins));

  add("run.seed", integer(c.seed));
  add("run.threads", integer(c.threads));
  add("run.output_dir", text(c.output_dir));
  return t;
}

}  // namespace

Model<double> RunConfig::model() const {
  return kind == ModelKind::Lorenz ? Model<double>::make_lorenz(lorenz) : Model<double>::make_rossler(rossler);
}

SweepSpec RunConfig::sweep_spec() const {
  SweepSpec s;
  s.base = model();
  s.param_name = sweep_param;
  s.lo = sweep_lo;
  s.hi = sweep_hi;
  s.step = sweep_step;
  s.symbols_target = symbols_target;
  s.max_time = max_time;
  s.s0 = s0;
  s.integrator = integrator;
  s.partition = pipeline.partition;
  s.lyapunov = lyapunov;
  s.complexity = measure;
  s.seed = seed;
  s.threads = threads;
  return s;
}

SurrogateSetup RunConfig::surrogate_setup() const {
  SurrogateSetup u;
  u.model = model();
  u.s0 = s0;
  u.integrator = integrator;
  u.input_noise_std = input_noise_std;
  u.noise_seed = noise_seed;
  u.search = search;
  u.search.base = esn;
  u.search.n_res = {double(esn.n_res), double(esn.n_res)};
  u.search.seed = seed;
  u.search.threads = threads;
  u.search.scoring.pipeline = pipeline;
  u.report.truth_pipeline = u.report.surrogate_pipeline = pipeline;
  u.report.m_max = report_m_max;
  u.report.n_bins = map_bins;
  u.refine_candidates = refine_candidates;
  u.refine_horizon = refine_horizon;
  u.report_horizon = report_horizon;
  return u;
}

RunConfig default_config(CommandGroup group, ModelKind kind) {
  RunConfig c;
  c.kind = kind;
  const SweepSpec s = kind == ModelKind::Lorenz ? lorenz_sweep_defaults() : rossler_sweep_defaults();
  c.integrator = s.integrator;
  c.integrator.t_total = c.integrator.t_transient + (kind == ModelKind::Lorenz ? 1000.0 : 5000.0);
  c.s0 = s.s0;
  c.pipeline.partition = s.partition;
  c.measure = s.complexity;
  c.lyapunov = s.lyapunov;
  c.sweep_param = s.param_name;
  c.sweep_lo = s.lo;
  c.sweep_hi = s.hi;
  c.sweep_step = s.step;
  c.symbols_target = s.symbols_target;
  c.max_time = s.max_time;

  const SurrogateSetup u = kind == ModelKind::Lorenz ? lorenz_surrogate_defaults() : rossler_surrogate_defaults();
  c.esn = u.search.base;
  c.search = u.search;
  c.input_noise_std = u.input_noise_std;
  c.noise_seed = u.noise_seed;
  c.refine_candidates = u.refine_candidates;
  c.refine_horizon = u.refine_horizon;
  c.report_horizon = u.report_horizon;
  c.report_m_max = u.report.m_max;
  c.map_bins = u.report.n_bins;
  c.seed = u.search.seed;
  if (group == CommandGroup::Esn) {
    c.integrator = u.integrator;
    c.integrator.t_total = c.integrator.t_transient + 1000.0;
    c.s0 = u.s0;
    c.pipeline = u.search.scoring.pipeline;
  }
  return c;
}

ConfigEntries parse_config_text(const std::string& text, const std::string& source) {
  ConfigEntries entries;
  std::istringstream in(text);
  std::string line, section;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string where = source + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) throw ConfigError(where + ": malformed section header '" + body + "'");
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value, got '" + body + "'");
    if (section.empty()) throw ConfigError(where + ": key outside of a [section]");
    const std::string name = trim(body.substr(0, eq));
    if (name.empty()) throw ConfigError(where + ": empty key");
    const std::string key = section + "." + name;
    if (entries.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    entries[key] = {trim(body.substr(eq + 1)), where};
  }
  return entries;
}

void add_override(ConfigEntries& entries, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const std::string key = trim(assignment.substr(0, std::min(eq, assignment.size())));
  if (eq == std::string::npos || key.find('.') == std::string::npos)
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  entries[key] = {trim(assignment.substr(eq + 1)), "--set"};
}

RunConfig resolve_config(CommandGroup group, const ConfigEntries& entries) {
  ModelKind kind = ModelKind::Lorenz;
  if (const auto it = entries.find("model.kind"); it != entries.end()) {
    RunConfig probe;
    try {
      fields(probe).front().second.set(it->second.value);
    } catch (const ConfigError& e) {
      throw ConfigError(it->second.origin + ": model.kind: " + e.what());
    }
    kind = probe.kind;
  }
  RunConfig c = default_config(group, kind);
  const FieldTable table = fields(c);
  for (const auto& [key, entry] : entries) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == key; });
    if (it == table.end()) throw ConfigError(entry.origin + ": unknown key '" + key + "'");
    try {
      it->second.set(entry.value);
    } catch (const ConfigError& e) {
      throw ConfigError(entry.origin + ": " + key + ": " + e.what());
    }
  }
  return c;
}

std::string dump_config(const RunConfig& config, const std::string& header) {
  RunConfig copy = config;
  std::ostringstream out;
  if (!header.empty()) out << "# " << header << '\n';
  std::string section;
  for (const auto& [key, field] : fields(copy)) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << field.get() << '\n';
  }
  return out.str();
}

}  // namespace symchaos::cli
