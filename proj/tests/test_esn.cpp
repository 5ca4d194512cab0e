#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <limits>
#include <random>
#include <sstream>

#include "symchaos/errors.hpp"
#include "symchaos/esn.hpp"
#include "symchaos/models.hpp"

using namespace symchaos;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double dense_radius(const SparseMatrixXd& W) {
  Eigen::EigenSolver<MatrixXd> es{MatrixXd(W), false};
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SparseMatrixXd random_sparse(int n, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (u(rng) < density) t.emplace_back(i, j, u(rng) - 0.5);
  SparseMatrixXd W(n, n);
  W.setFromTriplets(t.begin(), t.end());
  return W;
}

EsnHyperParams small_hyper() {
  EsnHyperParams h;
  h.n_res = 60;
  h.leak_alpha = 0.5;
  h.spectral_radius = 0.9;
  h.input_scaling = 0.05;
  h.density = 0.1;
  h.ridge_beta = 1e-6;
  h.washout = 200;
  h.train_len = 3000;
  h.seed = 5;
  return h;
}

MatrixXd lorenz_rows(Eigen::Index rows) {
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.t_transient = 20.0;
  cfg.t_total = 20.0 + double(rows) * cfg.dt;
  return integrate(Model<double>::make_lorenz(), State3<double>(1, 1, 1), cfg).samples;
}

}  // namespace

TEST_CASE("spectral radius agrees with a dense eigensolver") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 30 + int(seed) * 10;
    const SparseMatrixXd W = random_sparse(n, 0.1, seed);
    const double ref = dense_radius(W);
    const auto est = spectral_radius(W, seed + 100);
    CHECK(est.radius == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("spectral radius of structured matrices") {
  SUBCASE("rotation: a dominant complex pair") {
    SparseMatrixXd R(2, 2);
    R.insert(0, 1) = -2.0;
    R.insert(1, 0) = 2.0;
    const auto est = spectral_radius(R, 1);
    CHECK(est.radius == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("a +/- real pair") {
    SparseMatrixXd D(3, 3);
    D.insert(0, 0) = 3.0;
    D.insert(1, 1) = -3.0;
    D.insert(2, 2) = 1.0;
    CHECK(spectral_radius(D, 2).radius == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("diagonal") {
    SparseMatrixXd D(4, 4);
    for (int i = 0; i < 4; ++i) D.insert(i, i) = double(i + 1) * 0.5;
    CHECK(spectral_radius(D, 3).radius == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("reservoir initialisation") {
  const auto h = small_hyper();
  const auto m = init_esn(h);
  CHECK(m.W_R.rows() == h.n_res);
  CHECK(m.W_in.rows() == h.n_res);
  CHECK(m.W_in.cols() == 3);
  CHECK(dense_radius(m.W_R) == doctest::Approx(h.spectral_radius).epsilon(1e-6));
  CHECK(m.W_in.cwiseAbs().maxCoeff() <= h.input_scaling);
  const double fill = double(m.W_R.nonZeros()) / double(h.n_res * h.n_res);
  CHECK(fill == doctest::Approx(h.density).epsilon(0.3));

  const auto again = init_esn(h);
  CHECK(MatrixXd(again.W_R) == MatrixXd(m.W_R));
  CHECK(again.W_in == m.W_in);
  auto other = h;
  other.seed = 6;
  CHECK(init_esn(other).W_in != m.W_in);
}

TEST_CASE("hyperparameters are validated") {
  auto bad = [](auto mutate) {
    auto h = small_hyper();
    mutate(h);
    CHECK_THROWS_AS(h.validate(), ConfigError);
  };
  bad([](EsnHyperParams& h) { h.n_res = 0; });
  bad([](EsnHyperParams& h) { h.leak_alpha = 0.0; });
  bad([](EsnHyperParams& h) { h.leak_alpha = 1.5; });
  bad([](EsnHyperParams& h) { h.spectral_radius = -1.0; });
  bad([](EsnHyperParams& h) { h.density = 0.0; });
  bad([](EsnHyperParams& h) { h.ridge_beta = -1.0; });
  bad([](EsnHyperParams& h) { h.train_len = 0; });
}

TEST_CASE("zero leak freezes the reservoir") {
  const auto m = init_esn(small_hyper());
  VectorXd r = VectorXd::LinSpaced(60, -0.5, 0.5), scratch(60);
  const VectorXd before = r;
  esn_update(m, 0.0, r, Eigen::Vector3d(1, 2, 3), scratch);
  CHECK(r == before);
  esn_update(m, 1.0, r, Eigen::Vector3d(1, 2, 3), scratch);
  const VectorXd expected = (MatrixXd(m.W_R) * before + m.W_in * Eigen::Vector3d(1, 2, 3)).array().tanh().matrix();
  CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("reservoir forgets its initial state") {
  const auto m = init_esn(small_hyper());
  const MatrixXd drive = lorenz_rows(1000);
  VectorXd a = VectorXd::Constant(60, 0.8), b = VectorXd::Constant(60, -0.8), scratch(60);
  const double start = (a - b).norm();
  double previous = start;
  for (Eigen::Index n = 0; n < drive.rows(); ++n) {
    esn_update(m, 0.5, a, drive.row(n).transpose(), scratch);
    esn_update(m, 0.5, b, drive.row(n).transpose(), scratch);
    if ((n + 1) % 100 == 0) {
      const double gap = (a - b).norm();
      CHECK((gap < previous || gap == 0.0));
      previous = gap;
    }
  }
  CHECK(previous < 1e-8 * start);
}

TEST_CASE("ridge readout") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  MatrixXd S(12, 400), T(400, 3);
  for (Eigen::Index i = 0; i < S.size(); ++i) S.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < T.size(); ++i) T.data()[i] = g(rng);

  SUBCASE("small beta approaches least squares") {
    const MatrixXd W = fit_readout(S, T, 1e-12);
    const MatrixXd ls = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(S.transpose()).solve(T).transpose();
    CHECK((W - ls).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("normal equations hold") {
    const double beta = 0.7;
    const MatrixXd W = fit_readout(S, T, beta);
    const MatrixXd residual = (S * S.transpose() + beta * MatrixXd::Identity(12, 12)) * W.transpose() - S * T;
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("singular without regularisation") {
    MatrixXd dup = S;
    dup.row(1) = dup.row(0);
    CHECK_THROWS_AS(fit_readout(dup, T, 0.0), NumericError);
    CHECK_NOTHROW(fit_readout(dup, T, 1e-3));
  }
  CHECK_THROWS_AS(fit_readout(S, T.topRows(10), 1e-3), DomainError);
}

TEST_CASE("training, prediction and serialisation") {
  const auto h = small_hyper();
  const MatrixXd data = lorenz_rows(h.washout + h.train_len + 200);
  const auto esn = train_esn(h, data, data);
  CHECK(esn.W_out.rows() == 3);
  CHECK(esn.W_out.cols() == h.n_res + 1);

  // One-step predictions over the training span are accurate.
  const auto teacher = teacher_run(esn.matrices, h, data.topRows(h.washout + h.train_len));
  double worst = 0.0;
  for (Eigen::Index j = 0; j + 1 < teacher.states.cols(); ++j) {
    const Eigen::Vector3d y = esn.readout(teacher.states.col(j));
    worst = std::max(worst, (y - data.row(h.washout + j + 1).transpose()).norm());
  }
  CHECK(worst < 1.0);
  CHECK((teacher.final_state - esn.state).norm() == 0.0);

  const auto run1 = free_run(esn, esn.state, 300, true);
  const auto run2 = free_run(esn, esn.state, 300);
  CHECK(run1.outputs == run2.outputs);
  CHECK(run1.states.cols() == 300);
  CHECK((run1.outputs.row(0) - data.row(h.washout + h.train_len)).norm() < 1.0);

  std::stringstream buffer;
  save_esn(buffer, esn);
  const std::string text = buffer.str();
  const auto loaded = load_esn(buffer);
  CHECK(loaded.W_out == esn.W_out);
  CHECK(loaded.matrices.W_in == esn.matrices.W_in);
  CHECK(MatrixXd(loaded.matrices.W_R) == MatrixXd(esn.matrices.W_R));
  CHECK(loaded.state == esn.state);
  CHECK(loaded.hyper.leak_alpha == esn.hyper.leak_alpha);
  std::stringstream again;
  save_esn(again, loaded);
  CHECK(again.str() == text);
  CHECK(free_run(loaded, loaded.state, 300).outputs == run1.outputs);

  const auto retrained = train_esn(h, data, data);
  CHECK(retrained.W_out == esn.W_out);
}

TEST_CASE("malformed model files are rejected") {
  std::istringstream empty("");
  CHECK_THROWS_AS(load_esn(empty), IoError);
  std::istringstream wrong("not-an-esn 1\n");
  CHECK_THROWS_AS(load_esn(wrong), IoError);
}

TEST_CASE("non-finite readout diverges at the first step") {
  const auto h = small_hyper();
  const MatrixXd data = lorenz_rows(h.washout + h.train_len + 1);
  auto esn = train_esn(h, data, data);
  esn.W_out(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    free_run(esn, esn.state, 10);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() == 0);
  }
  CHECK_THROWS_AS(train_esn(h, data.topRows(100), data.topRows(100)), DomainError);
}
