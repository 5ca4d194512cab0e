#pragma once

// Lorenz and Rossler vector fields plus the fixed-step / adaptive integrators
// that sample them on a uniform output grid.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "symchaos/errors.hpp"

namespace symchaos {

template <typename Scalar>
using State3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
struct LorenzParams {
  Scalar sigma = Scalar(10);
  Scalar r = Scalar(28);
  Scalar b = Scalar(8) / Scalar(3);
};

template <typename Scalar>
struct RosslerParams {
  Scalar a = Scalar(0.341);
  Scalar b = Scalar(0.3);
  Scalar c = Scalar(4.8);
};

/// Classical Lorenz field (sigma(y-x), x(r-z)-y, xy-bz).
template <typename Scalar>
State3<Scalar> lorenz_rhs(const State3<Scalar>& s, const LorenzParams<Scalar>& p) {
  return State3<Scalar>(p.sigma * (s.y() - s.x()),
                        s.x() * (p.r - s.z()) - s.y(),
                        s.x() * s.y() - p.b * s.z());
}

/// Rossler field in the form with one equilibrium pinned at the origin:
/// (-y-z, x+ay, bx+z(x-c)).
template <typename Scalar>
State3<Scalar> rossler_rhs(const State3<Scalar>& s, const RosslerParams<Scalar>& p) {
  return State3<Scalar>(-s.y() - s.z(),
                        s.x() + p.a * s.y(),
                        p.b * s.x() + s.z() * (s.x() - p.c));
}

/// Returns (O1, O2); O1 is the origin, O2 = (c-ab, b-c/a, -(b-c/a)).
template <typename Scalar>
std::pair<State3<Scalar>, State3<Scalar>> rossler_equilibria(const RosslerParams<Scalar>& p) {
  if (p.a == Scalar(0)) {
    throw DomainError("rossler_equilibria: a = 0 is a degenerate parameter");
  }
  const Scalar q = p.b - p.c / p.a;
  return {State3<Scalar>::Zero(), State3<Scalar>(p.c - p.a * p.b, q, -q)};
}

enum class ModelKind { Lorenz, Rossler };

inline const char* to_string(ModelKind kind) {
  return kind == ModelKind::Lorenz ? "lorenz" : "rossler";
}

/// A runtime-selected model: kind plus the parameters of both families.
template <typename Scalar>
struct Model {
  ModelKind kind = ModelKind::Lorenz;
  LorenzParams<Scalar> lorenz{};
  RosslerParams<Scalar> rossler{};

  static Model make_lorenz(const LorenzParams<Scalar>& p = {}) {
    Model m;
    m.kind = ModelKind::Lorenz;
    m.lorenz = p;
    return m;
  }
  static Model make_rossler(const RosslerParams<Scalar>& p = {}) {
    Model m;
    m.kind = ModelKind::Rossler;
    m.rossler = p;
    return m;
  }

  State3<Scalar> operator()(const State3<Scalar>& s) const {
    return kind == ModelKind::Lorenz ? lorenz_rhs(s, lorenz) : rossler_rhs(s, rossler);
  }

  void validate() const {
    if (kind == ModelKind::Lorenz) {
      if (!(lorenz.sigma > 0 && lorenz.r > 0 && lorenz.b > 0))
        throw ConfigError("lorenz parameters sigma, r, b must be positive");
    } else {
      if (!(rossler.a > 0 && rossler.b > 0 && rossler.c > 0))
        throw ConfigError("rossler parameters a, b, c must be positive");
    }
  }
};

enum class Method { Rk4, BogackiShampine };

struct IntegratorConfig {
  Method method = Method::Rk4;
  double dt = 0.005;  // output sample spacing
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double t_transient = 0.0;
  double t_total = 100.0;
  double noise_std = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(dt > 0)) throw ConfigError("integrator: dt must be > 0");
    if (method == Method::BogackiShampine && !(abs_tol > 0 && rel_tol > 0))
      throw ConfigError("integrator: abs_tol and rel_tol must be > 0");
    if (!(t_transient >= 0)) throw ConfigError("integrator: t_transient must be >= 0");
    if (!(t_total > t_transient)) throw ConfigError("integrator: t_total must exceed t_transient");
    if (!(noise_std >= 0)) throw ConfigError("integrator: noise_std must be >= 0");
  }
};

inline constexpr double kBlowUpBound = 1e6;

template <typename Scalar>
bool is_blown_up(const State3<Scalar>& s) {
  using std::abs;
  using std::isfinite;
  for (int i = 0; i < 3; ++i) {
    if (!isfinite(s[i]) || abs(s[i]) > Scalar(kBlowUpBound)) return true;
  }
  return false;
}

template <typename Scalar, typename Field>
State3<Scalar> rk4_step(const Field& f, const State3<Scalar>& s, Scalar h) {
  const State3<Scalar> k1 = f(s);
  const State3<Scalar> k2 = f(State3<Scalar>(s + (h / 2) * k1));
  const State3<Scalar> k3 = f(State3<Scalar>(s + (h / 2) * k2));
  const State3<Scalar> k4 = f(State3<Scalar>(s + h * k3));
  return s + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Advances an autonomous field from grid point to grid point (spacing dt).
/// The adaptive method steps freely and interpolates onto the grid with the
/// cubic Hermite dense output of the Bogacki-Shampine pair.
template <typename Scalar, typename Field>
class GridStepper {
public:
  GridStepper(Field field, const State3<Scalar>& s0, const IntegratorConfig& cfg)
      : field_(std::move(field)),
        method_(cfg.method),
        dt_(Scalar(cfg.dt)),
        abs_tol_(Scalar(cfg.abs_tol)),
        rel_tol_(Scalar(cfg.rel_tol)),
        state_(s0) {
    if (is_blown_up(s0)) throw BlowUpError("initial state is not finite", 0.0);
    if (method_ == Method::BogackiShampine) {
      t0_ = t1_ = Scalar(0);
      y0_ = y1_ = s0;
      f0_ = f1_ = field_(s0);
      h_ = dt_;
    }
  }

  const State3<Scalar>& state() const { return state_; }
  std::uint64_t index() const { return index_; }
  Scalar time() const { return Scalar(index_) * dt_; }

  /// Moves to the next grid point and returns the state there.
  const State3<Scalar>& advance() {
    ++index_;
    const Scalar t = time();
    if (method_ == Method::Rk4) {
      state_ = rk4_step<Scalar>(field_, state_, dt_);
    } else {
      while (t1_ < t) adaptive_step();
      state_ = hermite(t);
    }
    if (is_blown_up(state_)) {
      throw BlowUpError("integration blew up at t=" + std::to_string(double(t)), double(t));
    }
    return state_;
  }

  /// Replaces the state at the current grid point (used by renormalizing callers).
  void reset_state(const State3<Scalar>& s) {
    state_ = s;
    if (method_ == Method::BogackiShampine) {
      t0_ = t1_ = time();
      y0_ = y1_ = s;
      f0_ = f1_ = field_(s);
    }
  }

private:
  void adaptive_step() {
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    for (int attempt = 0; attempt < 200; ++attempt) {
      const Scalar h = h_;
      const State3<Scalar>& k1 = f1_;
      const State3<Scalar> k2 = field_(State3<Scalar>(y1_ + (h / 2) * k1));
      const State3<Scalar> k3 = field_(State3<Scalar>(y1_ + (Scalar(3) * h / 4) * k2));
      const State3<Scalar> y_new =
          y1_ + h * (Scalar(2) / 9 * k1 + Scalar(1) / 3 * k2 + Scalar(4) / 9 * k3);
      const State3<Scalar> k4 = field_(y_new);
      const State3<Scalar> err =
          h * (Scalar(-5) / 72 * k1 + Scalar(1) / 12 * k2 + Scalar(1) / 9 * k3 - Scalar(1) / 8 * k4);
      Scalar norm = 0;
      for (int i = 0; i < 3; ++i) {
        const Scalar sc = abs_tol_ + rel_tol_ * max(abs(y1_[i]), abs(y_new[i]));
        norm = max(norm, abs(err[i]) / sc);
      }
      if (!(norm == norm)) norm = Scalar(1e10);
      const Scalar factor =
          norm == 0 ? Scalar(5) : min(Scalar(5), max(Scalar(0.2), Scalar(0.9) * pow(norm, Scalar(-1) / 3)));
      if (norm <= 1) {
        t0_ = t1_;
        y0_ = y1_;
        f0_ = f1_;
        t1_ = t0_ + h;
        y1_ = y_new;
        f1_ = k4;
        h_ = h * factor;
        if (is_blown_up(y1_)) {
          throw BlowUpError("integration blew up at t=" + std::to_string(double(t1_)), double(t1_));
        }
        return;
      }
      h_ = h * factor;
    }
    throw NumericError("adaptive integrator failed to satisfy tolerances");
  }

  State3<Scalar> hermite(Scalar t) const {
    const Scalar h = t1_ - t0_;
    if (h == 0) return y1_;
    const Scalar s = (t - t0_) / h;
    const Scalar s2 = s * s;
    const Scalar s3 = s2 * s;
    const Scalar h00 = 2 * s3 - 3 * s2 + 1;
    const Scalar h10 = s3 - 2 * s2 + s;
    const Scalar h01 = -2 * s3 + 3 * s2;
    const Scalar h11 = s3 - s2;
    return h00 * y0_ + (h10 * h) * f0_ + h01 * y1_ + (h11 * h) * f1_;
  }

  Field field_;
  Method method_;
  Scalar dt_;
  Scalar abs_tol_;
  Scalar rel_tol_;
  State3<Scalar> state_;
  std::uint64_t index_ = 0;

  // Adaptive bookkeeping: last accepted interval [t0_, t1_].
  Scalar t0_{}, t1_{}, h_{};
  State3<Scalar> y0_, y1_, f0_, f1_;
};

template <typename Scalar>
struct Trajectory {
  double dt = 0.0;
  double t0 = 0.0;  // time of the first stored sample
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> samples;
  Model<Scalar> model{};
  std::uint64_t seed = 0;

  Eigen::Index size() const { return samples.rows(); }
  double time(Eigen::Index k) const { return t0 + double(k) * dt; }
  State3<Scalar> at(Eigen::Index k) const { return samples.row(k).transpose(); }
};

inline Eigen::Index grid_index(double t, double dt) {
  return static_cast<Eigen::Index>(std::llround(t / dt));
}

/// Integrates `model` from s0 at t=0, storing samples at t_transient + k*dt
/// for t in [t_transient, t_total). Optional i.i.d. Gaussian noise is added to
/// the stored samples only.
template <typename Scalar>
Trajectory<Scalar> integrate(const Model<Scalar>& model, const State3<Scalar>& s0,
                             const IntegratorConfig& cfg) {
  cfg.validate();
  model.validate();
  const Eigen::Index first = grid_index(cfg.t_transient, cfg.dt);
  const Eigen::Index last = grid_index(cfg.t_total, cfg.dt);
  const Eigen::Index n = last - first;
  if (n < 2) throw ConfigError("integrator: fewer than 2 output samples requested");

  Trajectory<Scalar> traj;
  traj.dt = cfg.dt;
  traj.t0 = double(first) * cfg.dt;
  traj.model = model;
  traj.seed = cfg.rng_seed;
  traj.samples.resize(n, 3);

  GridStepper<Scalar, Model<Scalar>> stepper(model, s0, cfg);
  while (Eigen::Index(stepper.index()) < first) stepper.advance();
  traj.samples.row(0) = stepper.state().transpose();
  for (Eigen::Index k = 1; k < n; ++k) traj.samples.row(k) = stepper.advance().transpose();

  if (cfg.noise_std > 0) {
    std::mt19937_64 rng(cfg.rng_seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_std);
    for (Eigen::Index k = 0; k < n; ++k)
      for (int c = 0; c < 3; ++c) traj.samples(k, c) += Scalar(noise(rng));
  }
  return traj;
}

}  // namespace symchaos
