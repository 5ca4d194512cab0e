#include "symchaos/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "symchaos/errors.hpp"
#include "symchaos/io.hpp"
#include "symchaos/parallel.hpp"

namespace symchaos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double abs_diff(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return 0.0;
  return std::abs(a - b);
}

}  // namespace

ScoreBreakdown ScoreBreakdown::failure_of(std::string reason) {
  ScoreBreakdown s;
  s.lz_term = s.transient_term = s.entropy_term = kInf;
  s.total = kInf;
  s.failure = std::move(reason);
  return s;
}

Trajectory<double> as_trajectory(const Eigen::Ref<const Eigen::MatrixXd>& samples, double dt, double t0,
                                 const Model<double>& model) {
  if (samples.cols() != 3) throw DomainError("as_trajectory: samples must have 3 columns");
  Trajectory<double> traj;
  traj.dt = dt;
  traj.t0 = t0;
  traj.model = model;
  traj.samples = samples;
  return traj;
}

ScoreBreakdown score(const Trajectory<double>& truth, const Trajectory<double>& pred, const ScoreOptions& options) {
  if (truth.size() < options.transient_steps || pred.size() < options.transient_steps)
    return ScoreBreakdown::failure_of("trajectory shorter than the transient window");

  ScoreBreakdown s;
  s.symmetry_penalty = pred.samples.col(2).minCoeff() < options.symmetry_z ? options.symmetry_penalty : 0.0;
  s.transient_term = (truth.samples.topRows(options.transient_steps) - pred.samples.topRows(options.transient_steps))
                         .rowwise()
                         .squaredNorm()
                         .sum();

  SymbolSequence seq_true, seq_pred;
  try {
    seq_true = extract_symbols(truth, options.pipeline);
    seq_pred = extract_symbols(pred, options.pipeline);
  } catch (const Error& e) {
    return ScoreBreakdown::failure_of(std::string("symbol extraction failed: ") + e.what());
  }
  s.n_true = seq_true.size();
  s.n_pred = seq_pred.size();
  const std::size_t needed = std::size_t(options.entropy_m_hi);
  if (s.n_true < needed || s.n_pred < needed) {
    ScoreBreakdown f = ScoreBreakdown::failure_of("too few symbols for block entropies");
    f.n_true = s.n_true;
    f.n_pred = s.n_pred;
    return f;
  }
  s.lz_term = std::abs(lz76(seq_true.bits).lz - lz76(seq_pred.bits).lz);

  EntropyOptions eo;
  eo.m_max = options.entropy_m_hi - 1;
  eo.correction = options.entropy_correction;
  const auto h_true = block_entropies(seq_true.bits, eo);
  const auto h_pred = block_entropies(seq_pred.bits, eo);
  for (int m = options.entropy_m_lo; m <= options.entropy_m_hi; ++m) s.entropy_term += std::abs(h_true.H[m] - h_pred.H[m]);

  s.total = s.lz_term * s.transient_term * s.entropy_term + s.symmetry_penalty;
  return s;
}

TrainingData make_training_data(const Model<double>& model, const State3<double>& s0, const IntegratorConfig& cfg,
                                double input_noise_std, std::uint64_t noise_seed) {
  if (!(input_noise_std >= 0)) throw ConfigError("training data: noise std must be >= 0");
  IntegratorConfig clean_cfg = cfg;
  clean_cfg.noise_std = 0.0;
  TrainingData data;
  data.clean = integrate(model, s0, clean_cfg);
  data.inputs = data.clean.samples;
  if (input_noise_std > 0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> noise(0.0, input_noise_std);
    for (Eigen::Index k = 0; k < data.inputs.rows(); ++k)
      for (int c = 0; c < 3; ++c) data.inputs(k, c) += noise(rng);
  }
  return data;
}

void SearchSpec::validate() const {
  if (trials < 1) throw ConfigError("search: trials must be >= 1");
  auto check = [](const Range& r, const char* name, bool positive) {
    if (!(r.lo <= r.hi) || (positive && !(r.lo > 0)))
      throw ConfigError(std::string("search: invalid range for ") + name);
  };
  check(n_res, "n_res", true);
  check(leak, "leak", true);
  check(spectral_radius, "spectral_radius", true);
  check(input_scaling, "input_scaling", true);
  check(density, "density", true);
  check(ridge_beta, "ridge_beta", true);
  if (leak.hi > 1 || density.hi > 1) throw ConfigError("search: leak and density must not exceed 1");
  if (test_len < scoring.transient_steps) throw ConfigError("search: test_len shorter than the transient window");
  if (keep_top < 1) throw ConfigError("search: keep_top must be >= 1");
}

EsnHyperParams draw_hyper(const SearchSpec& spec, std::size_t trial) {
  std::mt19937_64 rng(derive_seed(spec.seed, trial));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](const Range& r) { return r.lo + (r.hi - r.lo) * unit(rng); };
  auto log_uniform = [&](const Range& r) { return std::exp(std::log(r.lo) + (std::log(r.hi) - std::log(r.lo)) * unit(rng)); };
  EsnHyperParams h = spec.base;
  h.n_res = int(std::lround(uniform(spec.n_res)));
  h.leak_alpha = uniform(spec.leak);
  h.spectral_radius = log_uniform(spec.spectral_radius);
  h.input_scaling = uniform(spec.input_scaling);
  h.density = uniform(spec.density);
  h.ridge_beta = log_uniform(spec.ridge_beta);
  h.seed = rng();
  return h;
}

TrialResult run_trial(const SearchSpec& spec, const TrainingData& data, std::size_t trial) {
  TrialResult result;
  result.trial = trial;
  result.hyper = draw_hyper(spec, trial);
  const Eigen::Index train_end = result.hyper.washout + result.hyper.train_len;
  if (data.clean.size() < train_end + spec.test_len)
    throw DomainError("search: training data shorter than washout + train_len + test_len");
  using ConstRef = Eigen::Ref<const Eigen::MatrixXd>;
  const ConstRef targets = spec.noisy_targets ? ConstRef(data.inputs) : ConstRef(data.targets());
  try {
    auto esn = std::make_shared<TrainedEsn>(train_esn(result.hyper, data.inputs, targets));
    const EsnRunResult run = free_run(*esn, esn->state, spec.test_len);
    const Trajectory<double> truth =
        as_trajectory(data.targets().middleRows(train_end, spec.test_len), data.clean.dt,
                      data.clean.time(train_end), data.clean.model);
    const Trajectory<double> pred = as_trajectory(run.outputs, truth.dt, truth.t0, truth.model);
    result.score = score(truth, pred, spec.scoring);
    result.esn = std::move(esn);
  } catch (const NumericError& e) {
    result.score = ScoreBreakdown::failure_of(e.what());
  }
  return result;
}

std::vector<TrialResult> random_search(const SearchSpec& spec, const TrainingData& data) {
  spec.validate();
  std::vector<TrialResult> results(std::size_t(spec.trials));
  parallel_for(results.size(), spec.threads, [&](std::size_t i) { results[i] = run_trial(spec, data, i); });
  std::stable_sort(results.begin(), results.end(),
                   [](const TrialResult& a, const TrialResult& b) { return a.score.total < b.score.total; });
  for (std::size_t k = spec.keep_top; k < results.size(); ++k) results[k].esn.reset();
  return results;
}

FidelityReport compare_trajectories(const Trajectory<double>& truth, const Trajectory<double>& pred,
                                    const ReportOptions& options) {
  FidelityReport rep;
  rep.horizon = pred.size();
  const SymbolSequence st = extract_symbols(truth, options.truth_pipeline);
  const SymbolSequence sp = extract_symbols(pred, options.surrogate_pipeline);
  rep.n_true = st.size();
  rep.n_pred = sp.size();
  rep.truth_symbols = st.bits;
  rep.surrogate_symbols = sp.bits;
  if (std::size_t(options.m_max + 1) > std::min(rep.n_true, rep.n_pred))
    throw DomainError("fidelity report: too few symbols for the entropy table");

  EntropyOptions eo;
  eo.m_max = options.m_max;
  const auto et = block_entropies(st.bits, eo);
  const auto ep = block_entropies(sp.bits, eo);
  for (int m = 0; m <= options.m_max; ++m) {
    EntropyRow row;
    row.m = m;
    row.H_true = et.H[m];
    row.H_pred = ep.H[m];
    row.h_true = et.h[m];
    row.h_pred = ep.h[m];
    row.delta = std::abs(row.h_true - row.h_pred);
    rep.max_entropy_delta = std::max(rep.max_entropy_delta, row.delta);
    rep.entropy_table.push_back(row);
  }
  rep.lz_true = lz76(st.bits).lz;
  rep.lz_pred = lz76(sp.bits).lz;
  rep.lz_delta = std::abs(rep.lz_true - rep.lz_pred);
  const auto mt = markov_matrix(st.bits), mp = markov_matrix(sp.bits);
  rep.markov_delta = std::max({abs_diff(mt.p11, mp.p11), abs_diff(mt.p10, mp.p10), abs_diff(mt.p01, mp.p01),
                               abs_diff(mt.p00, mp.p00)});

  try {
    rep.truth_map = build_zmax_map(truth, options.truth_pipeline.detection, options.truth_pipeline.smoothing,
                                   options.truth_pipeline.peaks);
    rep.surrogate_map = build_zmax_map(pred, options.surrogate_pipeline.detection,
                                       options.surrogate_pipeline.smoothing, options.surrogate_pipeline.peaks);
    rep.map_comparison = compare_maps(rep.truth_map, rep.surrogate_map, options.n_bins);
  } catch (const DomainError& e) {
    rep.note = std::string("return maps unavailable: ") + e.what();
  }
  return rep;
}

FidelityReport fidelity_report(const TrainedEsn& esn, const Trajectory<double>& truth, const ReportOptions& options) {
  EsnRunResult run;
  std::optional<std::size_t> diverged;
  try {
    run = free_run(esn, esn.state, truth.size());
  } catch (const DivergenceError& e) {
    diverged = e.step();
    run = free_run(esn, esn.state, Eigen::Index(e.step()));
  }
  const Eigen::Index n = run.outputs.rows();
  if (n < 3) throw DomainError("fidelity report: surrogate diverged immediately");
  Trajectory<double> head = truth;
  head.samples.conservativeResize(n, 3);
  const Trajectory<double> pred = as_trajectory(run.outputs, truth.dt, truth.t0, truth.model);
  FidelityReport rep = compare_trajectories(head, pred, options);
  rep.divergence_step = diverged;
  return rep;
}

std::size_t select_winner(std::span<const TrialResult> ranked, const Trajectory<double>& truth,
                          const ReportOptions& options, std::size_t candidates, double symmetry_z, unsigned threads) {
  const std::size_t n = std::min(candidates, ranked.size());
  std::vector<double> worst(n, kInf);
  parallel_for(n, threads, [&](std::size_t k) {
    const auto& c = ranked[k];
    if (!c.esn || c.score.failed()) return;
    try {
      const EsnRunResult run = free_run(*c.esn, c.esn->state, truth.size());
      if (!run.outputs.allFinite() || run.outputs.col(2).minCoeff() < symmetry_z) return;
      const Trajectory<double> pred = as_trajectory(run.outputs, truth.dt, truth.t0, truth.model);
      const FidelityReport rep = compare_trajectories(truth, pred, options);
      if (!rep.map_comparison || rep.n_true == 0) return;
      const double rate = std::abs(double(rep.n_pred) - double(rep.n_true)) / double(rep.n_true);
      worst[k] = rep.max_entropy_delta + rep.map_comparison->rms_fraction() + rate;
    } catch (const Error&) {
    }
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (worst[k] < worst[best]) best = k;
  return best;
}

Eigen::Index SurrogateSetup::rows_needed() const {
  return train_rows() + std::max({search.test_len, refine_horizon, report_horizon});
}

TrainingData SurrogateSetup::make_data() const {
  IntegratorConfig cfg = integrator;
  cfg.t_total = cfg.t_transient + double(rows_needed() + 1) * cfg.dt;
  return make_training_data(model, s0, cfg, input_noise_std, noise_seed);
}

Trajectory<double> SurrogateSetup::continuation(const TrainingData& data, Eigen::Index horizon) const {
  const Eigen::Index start = train_rows();
  if (data.clean.size() < start + horizon) throw DomainError("surrogate: teacher data shorter than the requested horizon");
  return as_trajectory(data.targets().middleRows(start, horizon), data.clean.dt, data.clean.time(start),
                       data.clean.model);
}

SurrogateSetup lorenz_surrogate_defaults() {
  SurrogateSetup s;
  s.model = Model<double>::make_lorenz();
  s.integrator.method = Method::Rk4;
  s.integrator.dt = 0.005;
  s.integrator.t_transient = 200.0;
  s.search.base.n_res = 200;
  s.search.n_res = {200, 200};
  s.search.seed = 1;
  s.search.scoring.pipeline.partition.variant = PartitionVariant::LorenzFlipFlop;
  s.report.truth_pipeline = s.report.surrogate_pipeline = s.search.scoring.pipeline;
  s.refine_candidates = 20;
  s.refine_horizon = 200000;
  s.report_horizon = 1600000;
  return s;
}

SurrogateSetup rossler_surrogate_defaults() {
  SurrogateSetup s;
  s.model = Model<double>::make_rossler();
  s.integrator.method = Method::BogackiShampine;
  s.integrator.dt = 0.02;
  s.integrator.t_transient = 500.0;
  s.input_noise_std = std::sqrt(0.3);
  s.noise_seed = 7;
  s.search.seed = 1;
  s.search.leak = {0.08, 0.3};
  s.search.spectral_radius = {0.8, 1.5};
  s.search.input_scaling = {0.03, 0.1};
  SymbolPipeline& p = s.search.scoring.pipeline;
  p.partition.variant = PartitionVariant::RosslerMinMax;
  p.partition.z_threshold = 1.0;
  p.detection = EventDetection::SmoothedPeaks;
  p.smoothing = {20, 3};
  p.peaks = {0.1, 150};
  s.report.truth_pipeline = s.report.surrogate_pipeline = p;
  return s;
}

SurrogateOutcome run_surrogate(const SurrogateSetup& setup, const TrainingData& data) {
  SurrogateOutcome out;
  out.ranked = random_search(setup.search, data);
  if (setup.refine_candidates > 0) {
    out.winner = select_winner(out.ranked, setup.continuation(data, setup.refine_horizon), setup.report,
                               setup.refine_candidates, setup.search.scoring.symmetry_z, setup.search.threads);
  }
  const TrialResult& best = out.ranked[out.winner];
  if (!best.esn) throw NumericError("surrogate: no trained candidate survived the search");
  out.report = fidelity_report(*best.esn, setup.continuation(data, setup.report_horizon), setup.report);
  return out;
}

void write_search_csv(std::ostream& out, std::span<const TrialResult> results) {
  out << "trial,seed,n_res,leak,rho,input_scale,density,beta,lz_term,transient_term,entropy_term,symmetry,total\n";
  for (const auto& r : results) {
    const auto& h = r.hyper;
    out << r.trial << ',' << h.seed << ',' << h.n_res << ',' << format_double(h.leak_alpha) << ','
        << format_double(h.spectral_radius) << ',' << format_double(h.input_scaling) << ','
        << format_double(h.density) << ',' << format_double(h.ridge_beta) << ',' << format_double(r.score.lz_term)
        << ',' << format_double(r.score.transient_term) << ',' << format_double(r.score.entropy_term) << ','
        << format_double(r.score.symmetry_penalty) << ',' << format_double(r.score.total) << '\n';
  }
}

void write_entropy_table_csv(std::ostream& out, const FidelityReport& report) {
  out << "m,H_true,H_pred,h_true,h_pred,delta_h\n";
  for (const auto& row : report.entropy_table) {
    out << row.m << ',' << format_double(row.H_true) << ',' << format_double(row.H_pred) << ','
        << format_double(row.h_true) << ',' << format_double(row.h_pred) << ',' << format_double(row.delta) << '\n';
  }
}

void write_report_summary_csv(std::ostream& out, const FidelityReport& r) {
  out << "horizon,n_true,n_pred,max_delta_h,lz_true,lz_pred,lz_delta,markov_delta,map_rms,map_overlap,map_rms_fraction,"
         "divergence_step\n";
  out << r.horizon << ',' << r.n_true << ',' << r.n_pred << ',' << format_double(r.max_entropy_delta) << ','
      << format_double(r.lz_true) << ',' << format_double(r.lz_pred) << ',' << format_double(r.lz_delta) << ','
      << format_double(r.markov_delta) << ',';
  if (r.map_comparison) {
    out << format_double(r.map_comparison->binned_rms) << ',' << format_double(r.map_comparison->overlap_fraction)
        << ',' << format_double(r.map_comparison->rms_fraction());
  } else {
    out << "nan,nan,nan";
  }
  out << ',';
  if (r.divergence_step) out << *r.divergence_step;
  out << '\n';
}

}  // namespace symchaos
