#pragma once

// Echo state network: sparse random reservoir, leaky tanh update, ridge
// readout from [1; R] and closed-loop free running.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <string>

namespace symchaos {

struct EsnHyperParams {
  int n_res = 80;
  double leak_alpha = 1.0;
  double spectral_radius = 0.9;
  double input_scaling = 0.1;
  double density = 0.1;
  double ridge_beta = 1e-6;
  Eigen::Index washout = 2000;
  Eigen::Index train_len = 30000;
  std::uint64_t seed = 0;
  bool readout_bias = true;

  void validate() const;
};

using SparseMatrixXd = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct PowerIterationOptions {
  int max_iterations = 1000;
  double tol = 1e-9;
  int restarts = 3;
  int krylov_dim = 40;  // subspace size used by restarts
};

struct SpectralRadiusEstimate {
  double radius = 0.0;
  int iterations = 0;
  bool complex_pair = false;
};

/// Largest eigenvalue modulus by power iteration. A dominant complex pair
/// (or a +/- real pair) is resolved by fitting x_{k+2} = c1 x_{k+1} + c0 x_k
/// and taking the larger root of z^2 - c1 z - c0. If the plain iteration
/// stalls, restarts extract the dominant Ritz value from a small Krylov
/// space built on the current iterate. Throws NumericError if none converges.
SpectralRadiusEstimate spectral_radius(const SparseMatrixXd& W, std::uint64_t seed,
                                       const PowerIterationOptions& options = {});

struct EsnMatrices {
  SparseMatrixXd W_R;
  Eigen::MatrixXd W_in;  // n_res x 3
};

EsnMatrices init_esn(const EsnHyperParams& hyper, const PowerIterationOptions& options = {});

/// R_{n+1} = (1 - alpha) R_n + alpha tanh(W_R R_n + W_in y_n), in place.
void esn_update(const EsnMatrices& m, double alpha, Eigen::Ref<Eigen::VectorXd> state,
                const Eigen::Ref<const Eigen::Vector3d>& input, Eigen::VectorXd& scratch);

struct EsnRunResult {
  Eigen::MatrixXd states;   // n_res x steps (empty unless recorded)
  Eigen::MatrixXd outputs;  // steps x 3
  Eigen::VectorXd final_state;
};

/// Drives the reservoir from R_0 = 0 with teacher rows; column j of `states`
/// is the state after consuming teacher row washout + j.
EsnRunResult teacher_run(const EsnMatrices& m, const EsnHyperParams& hyper,
                         const Eigen::Ref<const Eigen::MatrixXd>& teacher);

/// argmin_W sum |t_n - W s_n|^2 + beta |W|_F^2 over columns s_n of `regressors`
/// and rows t_n of `targets`; solved through the regularized normal
/// equations. Returns d x p.
Eigen::MatrixXd fit_readout(const Eigen::Ref<const Eigen::MatrixXd>& regressors,
                            const Eigen::Ref<const Eigen::MatrixXd>& targets, double beta);

/// Solves (G + beta I) W^T = C for the readout, given the accumulated Gram
/// matrix G = S S^T and cross term C = S T^T.
Eigen::MatrixXd solve_ridge(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross, double beta);

struct TrainedEsn {
  EsnMatrices matrices;
  Eigen::MatrixXd W_out;  // 3 x (1 + n_res) with a bias column, else 3 x n_res
  EsnHyperParams hyper;
  Eigen::VectorXd state;  // reservoir state after the last training input

  Eigen::Vector3d readout(const Eigen::Ref<const Eigen::VectorXd>& r) const;
};

/// Teacher-forced training: reservoir driven by `inputs` (rows), readout
/// fitted to map the state after input n onto targets row n + 1. Uses the
/// first washout + train_len + 1 rows. Inputs and targets may differ (noisy
/// inputs, clean targets).
TrainedEsn train_esn(const EsnHyperParams& hyper, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                     const Eigen::Ref<const Eigen::MatrixXd>& targets, const PowerIterationOptions& options = {});

/// Closed loop from `r_init`: y_n = W_out [1; R_n], then R is updated with y_n.
/// Throws DivergenceError with the step index on a non-finite output.
EsnRunResult free_run(const TrainedEsn& esn, const Eigen::Ref<const Eigen::VectorXd>& r_init, Eigen::Index horizon,
                      bool record_states = false);

void save_esn(std::ostream& out, const TrainedEsn& esn);
TrainedEsn load_esn(std::istream& in);

}  // namespace symchaos
