#include "symchaos/lyapunov.hpp"

#include <cmath>
#include <random>

namespace symchaos {

Channel tau_channel(ModelKind kind) { return kind == ModelKind::Lorenz ? Channel::X : Channel::Z; }

EventSelection default_tau_events(ModelKind kind) {
  return kind == ModelKind::Lorenz ? EventSelection::Outer : EventSelection::Maxima;
}

LyapunovResult largest_le(const Model<double>& model, const State3<double>& s0,
                          const LyapunovConfig& cfg) {
  model.validate();
  if (!(cfg.dt > 0)) throw ConfigError("lyapunov: dt must be > 0");
  if (!(cfg.d0 >= 1e-9 * (1 - 1e-12) && cfg.d0 <= 1e-6 * (1 + 1e-12)))
    throw ConfigError("lyapunov: d0 must lie in [1e-9, 1e-6]");
  if (!(cfg.renorm_interval >= cfg.dt)) throw ConfigError("lyapunov: renorm_interval must be >= dt");
  if (!(cfg.t_total >= 4 * cfg.renorm_interval))
    throw ConfigError("lyapunov: t_total must be much larger than renorm_interval");
  if (!(cfg.t_transient >= 0)) throw ConfigError("lyapunov: t_transient must be >= 0");

  IntegratorConfig icfg;
  icfg.method = Method::Rk4;
  icfg.dt = cfg.dt;
  const auto transient_steps = grid_index(cfg.t_transient, cfg.dt);
  const auto renorm_steps = std::max<Eigen::Index>(1, grid_index(cfg.renorm_interval, cfg.dt));
  const auto n_renorm = std::max<Eigen::Index>(4, grid_index(cfg.t_total, cfg.dt) / renorm_steps);

  GridStepper<double, Model<double>> fiducial(model, s0, icfg);
  for (Eigen::Index k = 0; k < transient_steps; ++k) fiducial.advance();

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  State3<double> direction(normal(rng), normal(rng), normal(rng));
  direction.normalize();
  GridStepper<double, Model<double>> perturbed(model, State3<double>(fiducial.state() + cfg.d0 * direction),
                                               icfg);

  const Channel channel = tau_channel(model.kind);
  const double t_start = double(transient_steps) * cfg.dt;
  ExtremumDetector detector(t_start, cfg.dt, channel);
  std::size_t n_events = 0;
  double first_event = 0.0, last_event = 0.0;
  auto observe = [&](double v) {
    if (auto e = detector.push(v)) {
      if (!is_selected(*e, cfg.events)) return;
      if (n_events == 0) first_event = e->time;
      last_event = e->time;
      ++n_events;
    }
  };
  observe(fiducial.state()[int(channel)]);

  double log_sum = 0.0;
  double running_at_three_quarters = 0.0;
  const Eigen::Index three_quarters = (3 * n_renorm) / 4;
  const double interval = double(renorm_steps) * cfg.dt;
  for (Eigen::Index k = 0; k < n_renorm; ++k) {
    for (Eigen::Index s = 0; s < renorm_steps; ++s) {
      observe(fiducial.advance()[int(channel)]);
      perturbed.advance();
    }
    const State3<double> delta = perturbed.state() - fiducial.state();
    const double d = delta.norm();
    if (!(d > 0) || !std::isfinite(d)) throw NumericError("lyapunov: separation collapsed or is not finite");
    log_sum += std::log(d / cfg.d0);
    perturbed.reset_state(fiducial.state() + (cfg.d0 / d) * delta);
    if (k + 1 == three_quarters) running_at_three_quarters = log_sum / (double(k + 1) * interval);
  }

  LyapunovResult r;
  r.t_span = double(n_renorm) * interval;
  r.Lambda = log_sum / r.t_span;
  r.renorm_interval = interval;
  r.d0 = cfg.d0;
  r.n_events = n_events;
  if (n_events < 2) throw DomainError("lyapunov: fewer than 2 events for the characteristic time");
  r.tau = (last_event - first_event) / double(n_events - 1);
  r.lambda_dimensionless = r.Lambda * r.tau;
  r.lambda_bits = r.lambda_dimensionless / std::log(2.0);
  const double drift = std::abs(r.Lambda - running_at_three_quarters);
  r.converged = drift <= 0.05 * std::abs(r.Lambda) || drift <= 1e-3;
  return r;
}

}  // namespace symchaos
