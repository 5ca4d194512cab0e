#pragma once

#include <cstdint>

#include "symchaos/events.hpp"
#include "symchaos/models.hpp"

namespace symchaos {

struct LyapunovConfig {
  double dt = 0.005;  // fixed RK4 step shared by both trajectories
  double t_transient = 200.0;
  double t_total = 2000.0;  // accumulation time after the transient
  double renorm_interval = 0.5;
  double d0 = 1e-8;
  std::uint64_t seed = 0;  // picks the initial perturbation direction
  EventSelection events = EventSelection::Outer;  // events that define tau
};

struct LyapunovResult {
  double Lambda = 0.0;  // per unit time, natural log
  double tau = 0.0;     // mean inter-event time
  double lambda_dimensionless = 0.0;  // Lambda * tau (nats per event)
  double lambda_bits = 0.0;           // lambda_dimensionless / ln 2
  double t_span = 0.0;
  double renorm_interval = 0.0;
  double d0 = 0.0;
  bool converged = false;
  std::size_t n_events = 0;
};

/// Event channel used for tau: x for Lorenz, z for Rossler.
Channel tau_channel(ModelKind kind);

/// Events matching the default partitions: outer x turning points for
/// Lorenz, z-maxima for Rossler.
EventSelection default_tau_events(ModelKind kind);

/// Two-trajectory Benettin estimate of the largest Lyapunov exponent. The
/// separation is rescaled to d0 every renorm_interval and the log growth
/// accumulated; tau comes from the fiducial trajectory's event stream.
LyapunovResult largest_le(const Model<double>& model, const State3<double>& s0,
                          const LyapunovConfig& cfg);

}  // namespace symchaos
