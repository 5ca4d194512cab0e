#include "symchaos/esn.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <complex>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "symchaos/errors.hpp"
#include "symchaos/parallel.hpp"

namespace symchaos {

void EsnHyperParams::validate() const {
  if (n_res < 1) throw ConfigError("esn: n_res must be >= 1");
  if (!(leak_alpha > 0 && leak_alpha <= 1)) throw ConfigError("esn: leak_alpha must lie in (0, 1]");
  if (!(spectral_radius > 0)) throw ConfigError("esn: spectral_radius must be > 0");
  if (!(input_scaling > 0)) throw ConfigError("esn: input_scaling must be > 0");
  if (!(density > 0 && density <= 1)) throw ConfigError("esn: density must lie in (0, 1]");
  if (!(ridge_beta >= 0)) throw ConfigError("esn: ridge_beta must be >= 0");
  if (washout < 0) throw ConfigError("esn: washout must be >= 0");
  if (train_len < 1) throw ConfigError("esn: train_len must be >= 1");
}

namespace {

// Modulus estimate from three successive iterates, or a negative value if the
// iterates are not yet explained by one real eigenvalue or one pair.
double fit_dominant(const Eigen::VectorXd& x0, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, double tol,
                    bool& complex_pair) {
  const double n2 = x2.norm();
  if (n2 == 0.0) return 0.0;
  const double mu = x1.dot(x2) / x1.squaredNorm();
  if ((x2 - mu * x1).norm() <= tol * n2) {
    complex_pair = false;
    return std::abs(mu);
  }
  // Nearly parallel iterates make the pair fit meaningless: a real dominant
  // eigenvalue that has not converged yet.
  const double cos2 = x0.dot(x1) * x0.dot(x1) / (x0.squaredNorm() * x1.squaredNorm());
  if (1.0 - cos2 < 1e-6) return -1.0;
  Eigen::Matrix2d g;
  g << x1.squaredNorm(), x1.dot(x0), x0.dot(x1), x0.squaredNorm();
  const Eigen::Vector2d rhs(x1.dot(x2), x0.dot(x2));
  const Eigen::Vector2d c = g.ldlt().solve(rhs);  // x2 ~ c0 x1 + c1 x0
  if (!c.allFinite() || (x2 - c[0] * x1 - c[1] * x0).norm() > tol * n2) return -1.0;
  complex_pair = true;
  const double disc = c[0] * c[0] + 4.0 * c[1];
  if (disc < 0) return std::sqrt(-c[1]);
  const double s = std::sqrt(disc);
  return std::max(std::abs(c[0] + s), std::abs(c[0] - s)) / 2.0;
}

// One Arnoldi cycle of dimension m from v. Returns the largest-modulus Ritz
// value's modulus and residual, and replaces v by a real restart vector.
struct RitzStep {
  double modulus = 0.0;
  double residual = 0.0;
  bool complex_pair = false;
};

RitzStep arnoldi_cycle(const SparseMatrixXd& W, Eigen::VectorXd& v, int m) {
  const Eigen::Index n = W.rows();
  m = int(std::min<Eigen::Index>(m, n));
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  V.col(0) = v.normalized();
  int k = 0;
  for (; k < m; ++k) {
    Eigen::VectorXd w = W * V.col(k);
    for (int pass = 0; pass < 2; ++pass) {  // Gram-Schmidt, repeated once
      const Eigen::VectorXd coeffs = V.leftCols(k + 1).transpose() * w;
      w.noalias() -= V.leftCols(k + 1) * coeffs;
      H.col(k).head(k + 1) += coeffs;
    }
    H(k + 1, k) = w.norm();
    if (H(k + 1, k) <= 1e-14 * H.col(k).head(k + 1).norm()) {
      ++k;  // invariant subspace
      break;
    }
    V.col(k + 1) = w / H(k + 1, k);
  }
  const Eigen::MatrixXd Hk = H.topLeftCorner(k, k);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Hk);
  const Eigen::VectorXd moduli = es.eigenvalues().cwiseAbs();
  Eigen::Index best = 0;
  moduli.maxCoeff(&best);
  const std::complex<double> theta = es.eigenvalues()[best];
  RitzStep step;
  step.modulus = std::abs(theta);
  step.residual = std::abs(H(k, k - 1) * es.eigenvectors().col(best).normalized()[k - 1]);
  step.complex_pair = theta.imag() != 0.0;

  // Restart from the leading Ritz vectors together, so an eigenvalue of
  // nearly the same modulus is not dropped before it separates.
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(k);
  for (Eigen::Index j = 0; j < k; ++j)
    if (moduli[j] >= 0.9 * step.modulus) y += es.eigenvectors().col(j).normalized();
  const Eigen::VectorXcd u = V.leftCols(k).cast<std::complex<double>>() * y;
  v = u.real() + u.imag();
  if (v.norm() == 0.0) v = V.col(0);
  v.normalize();
  return step;
}

}  // namespace

SpectralRadiusEstimate spectral_radius(const SparseMatrixXd& W, std::uint64_t seed,
                                       const PowerIterationOptions& options) {
  if (W.rows() != W.cols()) throw DomainError("spectral_radius: matrix is not square");
  SpectralRadiusEstimate est;
  if (W.nonZeros() == 0) return est;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index n = W.rows();

  Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(n, [&] { return normal(rng); });
  v.normalize();
  Eigen::VectorXd x1(n), x2(n);
  for (int it = 1; it <= options.max_iterations; ++it) {
    x1.noalias() = W * v;
    const double norm = x1.norm();
    if (norm == 0.0) {
      v = Eigen::VectorXd::NullaryExpr(n, [&] { return normal(rng); }).normalized();
      continue;
    }
    x2.noalias() = W * x1;
    bool pair = false;
    const double r = fit_dominant(v, x1, x2, options.tol, pair);
    if (r >= 0.0) {
      est.radius = r;
      est.iterations = it;
      est.complex_pair = pair;
      return est;
    }
    v = x1 / norm;
  }

  // Restarts: Krylov extraction seeded with the current iterate, which
  // separates eigenvalues of nearly equal modulus that stall the plain
  // iteration.
  const int cycles = std::max(1, options.max_iterations / std::max(1, options.krylov_dim));
  for (int restart = 0; restart < options.restarts; ++restart) {
    for (int c = 0; c < cycles; ++c) {
      const RitzStep step = arnoldi_cycle(W, v, options.krylov_dim);
      if (step.residual <= options.tol * std::max(step.modulus, 1e-300)) {
        est.radius = step.modulus;
        est.iterations = options.max_iterations + (restart * cycles + c + 1) * options.krylov_dim;
        est.complex_pair = step.complex_pair;
        return est;
      }
    }
  }
  throw NumericError("spectral_radius: power iteration did not converge");
}

EsnMatrices init_esn(const EsnHyperParams& hyper, const PowerIterationOptions& options) {
  hyper.validate();
  std::mt19937_64 rng(hyper.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = hyper.n_res;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(std::size_t(double(n) * n * hyper.density * 1.2) + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (unit(rng) < hyper.density) entries.emplace_back(i, j, unit(rng) - 0.5);

  EsnMatrices m;
  m.W_R.resize(n, n);
  m.W_R.setFromTriplets(entries.begin(), entries.end());
  m.W_R.makeCompressed();
  const double rho = spectral_radius(m.W_R, derive_seed(hyper.seed, 1), options).radius;
  if (!(rho > 0)) throw NumericError("init_esn: reservoir matrix is nilpotent; increase density");
  m.W_R *= hyper.spectral_radius / rho;

  m.W_in.resize(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) m.W_in(i, j) = hyper.input_scaling * (2.0 * unit(rng) - 1.0);
  return m;
}

void esn_update(const EsnMatrices& m, double alpha, Eigen::Ref<Eigen::VectorXd> state,
                const Eigen::Ref<const Eigen::Vector3d>& input, Eigen::VectorXd& scratch) {
  scratch.noalias() = m.W_R * state;
  scratch.noalias() += m.W_in * input;
  state = (1.0 - alpha) * state + alpha * scratch.array().tanh().matrix();
}

EsnRunResult teacher_run(const EsnMatrices& m, const EsnHyperParams& hyper,
                         const Eigen::Ref<const Eigen::MatrixXd>& teacher) {
  if (teacher.cols() != 3) throw DomainError("teacher_run: teacher must have 3 columns");
  if (teacher.rows() <= hyper.washout) throw DomainError("teacher_run: teacher not longer than the washout");
  if (!(hyper.leak_alpha >= 0 && hyper.leak_alpha <= 1)) throw ConfigError("teacher_run: leak_alpha outside [0, 1]");
  const Eigen::Index n_res = m.W_R.rows();
  EsnRunResult out;
  out.states.resize(n_res, teacher.rows() - hyper.washout);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_res), scratch(n_res);
  for (Eigen::Index n = 0; n < teacher.rows(); ++n) {
    esn_update(m, hyper.leak_alpha, r, teacher.row(n).transpose(), scratch);
    if (!r.allFinite()) throw DivergenceError("teacher_run: non-finite reservoir state", std::size_t(n));
    if (n >= hyper.washout) out.states.col(n - hyper.washout) = r;
  }
  out.final_state = r;
  return out;
}

Eigen::MatrixXd solve_ridge(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross, double beta) {
  if (!(beta >= 0)) throw ConfigError("ridge: beta must be >= 0");
  Eigen::MatrixXd a = gram;
  a.diagonal().array() += beta;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-15) return llt.solve(cross);
  if (beta == 0.0) throw NumericError("ridge: normal equations are singular; use ridge_beta > 0");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw NumericError("ridge: normal equations could not be factorized");
  return ldlt.solve(cross);
}

Eigen::MatrixXd fit_readout(const Eigen::Ref<const Eigen::MatrixXd>& regressors,
                            const Eigen::Ref<const Eigen::MatrixXd>& targets, double beta) {
  if (regressors.cols() != targets.rows()) throw DomainError("fit_readout: regressors and targets misaligned");
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(regressors.rows(), regressors.rows());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(regressors);
  gram = gram.selfadjointView<Eigen::Lower>();
  const Eigen::MatrixXd cross = regressors * targets;
  return solve_ridge(gram, cross, beta).transpose();
}

Eigen::Vector3d TrainedEsn::readout(const Eigen::Ref<const Eigen::VectorXd>& r) const {
  if (hyper.readout_bias) return W_out.col(0) + W_out.rightCols(W_out.cols() - 1) * r;
  return W_out * r;
}

TrainedEsn train_esn(const EsnHyperParams& hyper, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                     const Eigen::Ref<const Eigen::MatrixXd>& targets, const PowerIterationOptions& options) {
  hyper.validate();
  const Eigen::Index needed = hyper.washout + hyper.train_len + 1;
  if (inputs.cols() != 3 || targets.cols() != 3) throw DomainError("train_esn: data must have 3 columns");
  if (inputs.rows() < needed || targets.rows() < needed)
    throw DomainError("train_esn: need washout + train_len + 1 samples");

  TrainedEsn esn;
  esn.hyper = hyper;
  esn.matrices = init_esn(hyper, options);
  const Eigen::Index n_res = hyper.n_res;
  const Eigen::Index p = n_res + (hyper.readout_bias ? 1 : 0);
  const Eigen::Index offset = hyper.readout_bias ? 1 : 0;

  // Normal equations accumulated in blocks so states need not be stored.
  constexpr Eigen::Index kBlock = 1024;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p), cross = Eigen::MatrixXd::Zero(p, 3);
  Eigen::MatrixXd block(p, kBlock), block_targets(kBlock, 3);
  Eigen::Index filled = 0;
  auto flush = [&] {
    if (filled == 0) return;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(block.leftCols(filled));
    cross.noalias() += block.leftCols(filled) * block_targets.topRows(filled);
    filled = 0;
  };

  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_res), scratch(n_res);
  for (Eigen::Index n = 0; n < hyper.washout + hyper.train_len; ++n) {
    esn_update(esn.matrices, hyper.leak_alpha, r, inputs.row(n).transpose(), scratch);
    if (!r.allFinite()) throw DivergenceError("train_esn: non-finite reservoir state", std::size_t(n));
    if (n < hyper.washout) continue;
    if (hyper.readout_bias) block(0, filled) = 1.0;
    block.col(filled).segment(offset, n_res) = r;
    block_targets.row(filled) = targets.row(n + 1);
    if (++filled == kBlock) flush();
  }
  flush();
  gram = gram.selfadjointView<Eigen::Lower>();
  esn.W_out = solve_ridge(gram, cross, hyper.ridge_beta).transpose();
  if (!esn.W_out.allFinite()) throw NumericError("train_esn: readout is not finite");
  esn.state = r;
  return esn;
}

EsnRunResult free_run(const TrainedEsn& esn, const Eigen::Ref<const Eigen::VectorXd>& r_init, Eigen::Index horizon,
                      bool record_states) {
  if (horizon < 0) throw ConfigError("free_run: horizon must be >= 0");
  const Eigen::Index n_res = esn.matrices.W_R.rows();
  if (r_init.size() != n_res) throw DomainError("free_run: initial state has the wrong size");
  EsnRunResult out;
  out.outputs.resize(horizon, 3);
  if (record_states) out.states.resize(n_res, horizon);
  Eigen::VectorXd r = r_init, scratch(n_res);
  for (Eigen::Index n = 0; n < horizon; ++n) {
    const Eigen::Vector3d y = esn.readout(r);
    if (!y.allFinite()) throw DivergenceError("free_run: non-finite output at step " + std::to_string(n), std::size_t(n));
    out.outputs.row(n) = y.transpose();
    if (record_states) out.states.col(n) = r;
    esn_update(esn.matrices, esn.hyper.leak_alpha, r, y, scratch);
  }
  out.final_state = r;
  return out;
}

namespace {

constexpr const char* kMagic = "symchaos-esn";
constexpr int kVersion = 1;

std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_dense(std::ostream& out, const char* name, const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << exact(m(i, j));
    out << '\n';
  }
}

class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw IoError("esn file: unexpected end of input");
    return w;
  }
  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) throw IoError("esn file: expected '" + w + "', found '" + got + "'");
  }
  double real() {
    const std::string w = word();
    double v = 0.0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size()) throw IoError("esn file: bad number '" + w + "'");
    return v;
  }
  long long integer() {
    const std::string w = word();
    long long v = 0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size()) throw IoError("esn file: bad integer '" + w + "'");
    return v;
  }
  std::uint64_t unsigned_integer() {
    const std::string w = word();
    std::uint64_t v = 0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size()) throw IoError("esn file: bad integer '" + w + "'");
    return v;
  }
  Eigen::MatrixXd dense(const std::string& name) {
    expect(name);
    const auto rows = integer(), cols = integer();
    if (rows < 0 || cols < 0) throw IoError("esn file: negative matrix size");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = real();
    return m;
  }

private:
  std::istream& in_;
};

}  // namespace

void save_esn(std::ostream& out, const TrainedEsn& esn) {
  const auto& h = esn.hyper;
  out << kMagic << ' ' << kVersion << '\n';
  out << "n_res " << h.n_res << '\n'
      << "leak_alpha " << exact(h.leak_alpha) << '\n'
      << "spectral_radius " << exact(h.spectral_radius) << '\n'
      << "input_scaling " << exact(h.input_scaling) << '\n'
      << "density " << exact(h.density) << '\n'
      << "ridge_beta " << exact(h.ridge_beta) << '\n'
      << "washout " << h.washout << '\n'
      << "train_len " << h.train_len << '\n'
      << "seed " << h.seed << '\n'
      << "readout_bias " << (h.readout_bias ? 1 : 0) << '\n';
  const auto& w = esn.matrices.W_R;
  out << "W_R " << w.rows() << ' ' << w.cols() << ' ' << w.nonZeros() << '\n';
  for (Eigen::Index i = 0; i < w.outerSize(); ++i)
    for (SparseMatrixXd::InnerIterator it(w, i); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << exact(it.value()) << '\n';
  write_dense(out, "W_in", esn.matrices.W_in);
  write_dense(out, "W_out", esn.W_out);
  write_dense(out, "state", esn.state);
  out << "end\n";
  if (!out) throw IoError("esn file: write failed");
}

TrainedEsn load_esn(std::istream& in) {
  Reader rd(in);
  rd.expect(kMagic);
  if (rd.integer() != kVersion) throw IoError("esn file: unsupported version");
  TrainedEsn esn;
  auto& h = esn.hyper;
  rd.expect("n_res");
  h.n_res = int(rd.integer());
  rd.expect("leak_alpha");
  h.leak_alpha = rd.real();
  rd.expect("spectral_radius");
  h.spectral_radius = rd.real();
  rd.expect("input_scaling");
  h.input_scaling = rd.real();
  rd.expect("density");
  h.density = rd.real();
  rd.expect("ridge_beta");
  h.ridge_beta = rd.real();
  rd.expect("washout");
  h.washout = rd.integer();
  rd.expect("train_len");
  h.train_len = rd.integer();
  rd.expect("seed");
  h.seed = rd.unsigned_integer();
  rd.expect("readout_bias");
  h.readout_bias = rd.integer() != 0;
  h.validate();

  rd.expect("W_R");
  const auto rows = rd.integer(), cols = rd.integer(), nnz = rd.integer();
  if (rows != h.n_res || cols != h.n_res || nnz < 0) throw IoError("esn file: W_R shape mismatch");
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(std::size_t(nnz));
  for (long long k = 0; k < nnz; ++k) {
    const auto i = rd.integer(), j = rd.integer();
    const double v = rd.real();
    if (i < 0 || i >= rows || j < 0 || j >= cols) throw IoError("esn file: W_R index out of range");
    entries.emplace_back(Eigen::Index(i), Eigen::Index(j), v);
  }
  esn.matrices.W_R.resize(rows, cols);
  esn.matrices.W_R.setFromTriplets(entries.begin(), entries.end());
  esn.matrices.W_R.makeCompressed();
  esn.matrices.W_in = rd.dense("W_in");
  esn.W_out = rd.dense("W_out");
  const Eigen::MatrixXd state = rd.dense("state");
  if (state.cols() != 1) throw IoError("esn file: state must be a column");
  esn.state = state.col(0);
  rd.expect("end");
  const Eigen::Index p = h.n_res + (h.readout_bias ? 1 : 0);
  if (esn.matrices.W_in.rows() != h.n_res || esn.matrices.W_in.cols() != 3 || esn.W_out.rows() != 3 ||
      esn.W_out.cols() != p || esn.state.size() != h.n_res)
    throw IoError("esn file: matrix shapes do not match the hyperparameters");
  return esn;
}

}  // namespace symchaos
