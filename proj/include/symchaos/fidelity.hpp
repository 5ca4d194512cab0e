#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symchaos/complexity.hpp"
#include "symchaos/esn.hpp"
#include "symchaos/models.hpp"
#include "symchaos/returnmap.hpp"
#include "symchaos/symbolic.hpp"

namespace symchaos {

struct ScoreOptions {
  SymbolPipeline pipeline{};
  Eigen::Index transient_steps = 1000;
  int entropy_m_lo = 2;
  int entropy_m_hi = 10;
  bool entropy_correction = true;
  double symmetry_z = -1.0;
  double symmetry_penalty = 1e9;
};

/// total = lz_term * transient_term * entropy_term + symmetry_penalty.
/// A failed score (no usable symbols, divergence) has total = +inf.
struct ScoreBreakdown {
  double lz_term = 0.0;
  double transient_term = 0.0;
  double entropy_term = 0.0;
  double symmetry_penalty = 0.0;
  double total = 0.0;
  std::size_t n_true = 0;
  std::size_t n_pred = 0;
  std::string failure;

  bool failed() const { return !failure.empty(); }
  static ScoreBreakdown failure_of(std::string reason);
};

/// Wraps predicted samples (rows) as a trajectory on the truth's time grid.
Trajectory<double> as_trajectory(const Eigen::Ref<const Eigen::MatrixXd>& samples, double dt, double t0,
                                 const Model<double>& model);

ScoreBreakdown score(const Trajectory<double>& truth, const Trajectory<double>& pred, const ScoreOptions& options);

/// Teacher data for training: clean samples (targets) and the same samples
/// with i.i.d. Gaussian noise (inputs).
struct TrainingData {
  Trajectory<double> clean;
  Eigen::MatrixXd inputs;

  const Eigen::Matrix<double, Eigen::Dynamic, 3>& targets() const { return clean.samples; }
};

TrainingData make_training_data(const Model<double>& model, const State3<double>& s0, const IntegratorConfig& cfg,
                                double input_noise_std, std::uint64_t noise_seed);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SearchSpec {
  int trials = 200;
  EsnHyperParams base{};  // n_res, washout, train_len and readout_bias are taken from here
  Range n_res{80, 80};
  Range leak{0.1, 1.0};
  Range spectral_radius{0.05, 2.0};  // log-uniform
  Range input_scaling{0.01, 1.0};
  Range density{0.02, 0.5};
  Range ridge_beta{1e-9, 1e-1};  // log-uniform
  Eigen::Index test_len = 30000;
  std::size_t keep_top = 50;
  bool noisy_targets = false;  // regress onto the noisy inputs instead of the clean samples
  std::uint64_t seed = 0;
  unsigned threads = 0;
  ScoreOptions scoring{};

  void validate() const;
};

EsnHyperParams draw_hyper(const SearchSpec& spec, std::size_t trial);

struct TrialResult {
  std::size_t trial = 0;
  EsnHyperParams hyper{};
  ScoreBreakdown score{};
  std::shared_ptr<const TrainedEsn> esn;  // kept for the top keep_top trials
};

/// Trains one surrogate on rows [0, washout + train_len] and scores its free
/// run against the following test_len rows of the clean data.
TrialResult run_trial(const SearchSpec& spec, const TrainingData& data, std::size_t trial);

/// All trials ranked by total score (ties by trial index).
std::vector<TrialResult> random_search(const SearchSpec& spec, const TrainingData& data);

struct EntropyRow {
  int m = 0;
  double H_true = 0.0, H_pred = 0.0;
  double h_true = 0.0, h_pred = 0.0;
  double delta = 0.0;  // |h_true - h_pred|
};

struct ReportOptions {
  SymbolPipeline truth_pipeline{};
  SymbolPipeline surrogate_pipeline{};
  int m_max = 6;
  int n_bins = 50;
};

struct FidelityReport {
  std::vector<EntropyRow> entropy_table;
  double max_entropy_delta = 0.0;
  double lz_true = 0.0, lz_pred = 0.0, lz_delta = 0.0;
  double markov_delta = 0.0;
  std::optional<MapComparison> map_comparison;
  std::size_t n_true = 0, n_pred = 0;
  Eigen::Index horizon = 0;
  std::optional<std::size_t> divergence_step;
  std::string note;
  ReturnMap truth_map, surrogate_map;
  std::vector<std::uint8_t> truth_symbols, surrogate_symbols;
};

/// Compares symbol statistics and z-maxima maps of two trajectories.
FidelityReport compare_trajectories(const Trajectory<double>& truth, const Trajectory<double>& pred,
                                    const ReportOptions& options);

/// Free-runs the surrogate from its post-training state for truth.size() steps
/// and compares against `truth`, which must continue the training data.
FidelityReport fidelity_report(const TrainedEsn& esn, const Trajectory<double>& truth, const ReportOptions& options);

/// Index into `ranked` of the candidate, among the first `candidates`, whose
/// free run against `truth` minimizes the sum of max |delta h_m|, the
/// return-map RMS as a fraction of the z-range and the relative difference in
/// symbol counts. Runs that diverge, dip below symmetry_z or
/// yield no map are skipped; ranking order breaks ties. Returns 0 if no
/// candidate qualifies.
std::size_t select_winner(std::span<const TrialResult> ranked, const Trajectory<double>& truth,
                          const ReportOptions& options, std::size_t candidates, double symmetry_z, unsigned threads);

/// A complete surrogate experiment: teacher data, search, refinement of the
/// best-ranked candidates on a longer run and the final report horizon.
struct SurrogateSetup {
  Model<double> model{};
  State3<double> s0{1.0, 1.0, 1.0};
  IntegratorConfig integrator{};  // t_total is derived from the horizons
  double input_noise_std = 0.0;
  std::uint64_t noise_seed = 0;
  SearchSpec search{};
  ReportOptions report{};
  std::size_t refine_candidates = 50;
  Eigen::Index refine_horizon = 168000;
  Eigen::Index report_horizon = 1000000;

  Eigen::Index train_rows() const { return search.base.washout + search.base.train_len; }
  Eigen::Index rows_needed() const;
  TrainingData make_data() const;
  /// Clean continuation of the teacher data after the training rows.
  Trajectory<double> continuation(const TrainingData& data, Eigen::Index horizon) const;
};

SurrogateSetup lorenz_surrogate_defaults();
SurrogateSetup rossler_surrogate_defaults();

struct SurrogateOutcome {
  std::vector<TrialResult> ranked;
  std::size_t winner = 0;  // index into ranked
  FidelityReport report;
};

SurrogateOutcome run_surrogate(const SurrogateSetup& setup, const TrainingData& data);

void write_search_csv(std::ostream& out, std::span<const TrialResult> results);
void write_entropy_table_csv(std::ostream& out, const FidelityReport& report);
void write_report_summary_csv(std::ostream& out, const FidelityReport& report);

}  // namespace symchaos
