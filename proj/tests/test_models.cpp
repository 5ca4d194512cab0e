#include <doctest.h>

#include <cmath>
#include <random>

#include "symchaos/errors.hpp"
#include "symchaos/models.hpp"

using namespace symchaos;
using V3 = State3<double>;

namespace {

IntegratorConfig fixed_step(double dt, double t_transient, double t_total) {
  IntegratorConfig c;
  c.method = Method::Rk4;
  c.dt = dt;
  c.t_transient = t_transient;
  c.t_total = t_total;
  return c;
}

}  // namespace

TEST_CASE("lorenz rhs hand values") {
  const LorenzParams<double> p;
  CHECK(lorenz_rhs(V3::Zero().eval(), p).isZero());
  const V3 d = lorenz_rhs(V3(1, 2, 3), p);
  CHECK(d.x() == doctest::Approx(10.0));
  CHECK(d.y() == doctest::Approx(23.0));
  CHECK(d.z() == doctest::Approx(-6.0));
}

TEST_CASE("lorenz rhs commutes with the (x,y,z) -> (-x,-y,z) symmetry") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-30, 30);
  const LorenzParams<double> p{10.0, 45.0, 8.0 / 3.0};
  for (int k = 0; k < 100; ++k) {
    const V3 s(u(rng), u(rng), u(rng));
    const V3 mirrored(-s.x(), -s.y(), s.z());
    const V3 d = lorenz_rhs(s, p);
    const V3 dm = lorenz_rhs(mirrored, p);
    CHECK(dm.x() == -d.x());
    CHECK(dm.y() == -d.y());
    CHECK(dm.z() == d.z());
  }
}

TEST_CASE("rossler rhs hand values and equilibria") {
  const RosslerParams<double> p;
  CHECK(rossler_rhs(V3::Zero().eval(), p).isZero());
  const V3 d = rossler_rhs(V3(1, 1, 1), p);
  CHECK(d.x() == doctest::Approx(-2.0));
  CHECK(d.y() == doctest::Approx(1.341));
  CHECK(d.z() == doctest::Approx(-3.5));

  const auto [o1, o2] = rossler_equilibria(p);
  CHECK(o1.isZero());
  CHECK(o2.x() == doctest::Approx(4.6977).epsilon(1e-4));
  CHECK(o2.y() == doctest::Approx(-13.7760).epsilon(1e-4));
  CHECK(o2.z() == doctest::Approx(13.7760).epsilon(1e-4));
  CHECK(rossler_rhs(o2, p).norm() < 1e-12);

  const RosslerParams<double> q{1.0, 1.0, 2.0};
  const auto [q1, q2] = rossler_equilibria(q);
  CHECK(rossler_rhs(q1, q).isZero());
  CHECK((q2 - V3(1, -1, 1)).norm() < 1e-15);
  CHECK(rossler_rhs(q2, q).norm() < 1e-12);

  CHECK_THROWS_AS(rossler_equilibria(RosslerParams<double>{0.0, 0.3, 4.8}), DomainError);
}

TEST_CASE("model parameters must be positive") {
  CHECK_THROWS_AS(Model<double>::make_lorenz({-1.0, 28.0, 8.0 / 3.0}).validate(), ConfigError);
  CHECK_THROWS_AS(Model<double>::make_rossler({0.3, 0.0, 4.8}).validate(), ConfigError);
}

TEST_CASE("integrator configuration is validated") {
  IntegratorConfig c = fixed_step(0.0, 0.0, 1.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = fixed_step(0.01, 2.0, 1.0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = fixed_step(0.01, 0.0, 1.0);
  c.noise_std = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("sampling grid and transient discard") {
  const auto traj = integrate(Model<double>::make_lorenz(), V3(1, 1, 1), fixed_step(0.005, 0.0, 100.0));
  CHECK(traj.size() == 20000);
  CHECK(traj.samples.row(0).transpose() == V3(1, 1, 1));

  const auto late = integrate(Model<double>::make_lorenz(), V3(1, 1, 1), fixed_step(0.005, 10.0, 20.0));
  CHECK(late.t0 == doctest::Approx(10.0));
  CHECK(late.size() == 2000);
  // The first stored sample is the state at t_transient of the same run.
  CHECK((late.samples.row(0) - traj.samples.row(2000)).norm() == 0.0);
}

TEST_CASE("lorenz trajectory stays inside its envelope") {
  const auto traj = integrate(Model<double>::make_lorenz(), V3(1, 1, 1), fixed_step(0.005, 0.0, 50.0));
  CHECK(traj.samples.col(2).cwiseAbs().maxCoeff() < 60.0);
  CHECK(traj.samples.allFinite());
}

TEST_CASE("integration is deterministic and noise is added to stored samples only") {
  IntegratorConfig c = fixed_step(0.01, 5.0, 30.0);
  const auto model = Model<double>::make_lorenz();
  const auto a = integrate(model, V3(1, 1, 1), c);
  const auto b = integrate(model, V3(1, 1, 1), c);
  CHECK(a.samples == b.samples);

  c.noise_std = 0.5;
  c.rng_seed = 11;
  const auto n1 = integrate(model, V3(1, 1, 1), c);
  const auto n2 = integrate(model, V3(1, 1, 1), c);
  CHECK(n1.samples == n2.samples);
  const Eigen::MatrixXd noise = n1.samples - a.samples;
  const double mean = noise.mean();
  const double std = std::sqrt((noise.array() - mean).square().mean());
  CHECK(std::abs(mean) < 0.02);
  CHECK(std == doctest::Approx(0.5).epsilon(0.03));

  c.rng_seed = 12;
  CHECK(integrate(model, V3(1, 1, 1), c).samples != n1.samples);
}

TEST_CASE("adaptive and fixed-step solutions agree on a periodic rossler orbit") {
  const auto model = Model<double>::make_rossler({0.3, 0.3, 4.8});
  IntegratorConfig adaptive = fixed_step(0.01, 0.0, 100.0);
  adaptive.method = Method::BogackiShampine;
  adaptive.abs_tol = adaptive.rel_tol = 1e-9;
  const auto a = integrate(model, V3(1, 1, 1), adaptive);
  const auto f = integrate(model, V3(1, 1, 1), fixed_step(0.01, 0.0, 100.0));
  REQUIRE(a.size() == f.size());
  CHECK((a.samples - f.samples).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("lorenz integration is equivariant under the mirror symmetry") {
  const auto model = Model<double>::make_lorenz();
  const auto c = fixed_step(0.005, 0.0, 10.0);
  const auto a = integrate(model, V3(1, 2, 3), c);
  const auto b = integrate(model, V3(-1, -2, 3), c);
  CHECK((a.samples.col(0) + b.samples.col(0)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.samples.col(1) + b.samples.col(1)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.samples.col(2) - b.samples.col(2)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fixed-step method converges at fourth order") {
  const auto model = Model<double>::make_rossler({0.3, 0.3, 4.8});
  IntegratorConfig ref_cfg = fixed_step(0.04, 0.0, 4.0);
  ref_cfg.method = Method::BogackiShampine;
  ref_cfg.abs_tol = ref_cfg.rel_tol = 1e-13;
  const auto ref = integrate(model, V3(1, 1, 1), ref_cfg);
  const V3 end_ref = ref.samples.bottomRows(1).transpose();

  auto error_at = [&](double dt) {
    const auto t = integrate(model, V3(1, 1, 1), fixed_step(dt, 0.0, 4.0));
    const Eigen::Index row = grid_index(3.96, dt);
    return (t.samples.row(row).transpose() - end_ref).norm();
  };
  const double ratio = error_at(0.04) / error_at(0.02);
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("blow-up is reported with the failure time") {
  IntegratorConfig c = fixed_step(0.01, 0.0, 10.0);
  c.method = Method::BogackiShampine;
  try {
    integrate(Model<double>::make_lorenz({10.0, 1e9, 8.0 / 3.0}), V3(1, 1, 1), c);
    FAIL("expected a blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.time() >= 0.0);
    CHECK(e.time() < 10.0);
  }
}
