#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

#include "symchaos/models.hpp"

namespace symchaos {

enum class Channel { X = 0, Y = 1, Z = 2 };
enum class ExtremumKind { Max, Min };

const char* to_string(Channel channel);
const char* to_string(ExtremumKind kind);

struct CriticalEvent {
  Eigen::Index index = 0;  // sample index of the bracketing extremum
  double time = 0.0;
  double value = 0.0;
  ExtremumKind kind = ExtremumKind::Max;
  Channel channel = Channel::X;
};

/// Which extrema an event stream keeps. `Outer` keeps the turning points
/// farthest from zero: maxima with a positive value and minima with a
/// negative one (one per revolution around a Lorenz eye).
enum class EventSelection { All, Maxima, Minima, Outer };

const char* to_string(EventSelection selection);
bool is_selected(const CriticalEvent& event, EventSelection selection);

struct PeakConfig {
  double min_prominence = 0.0;
  Eigen::Index min_distance = 1;
};

struct SmoothingConfig {
  Eigen::Index window = 1;
  int passes = 0;
};

/// Incremental detector of sign changes in the first difference of a sampled
/// signal. Feed samples in order; each completed extremum is returned once,
/// refined by a parabola through the three bracketing samples.
class ExtremumDetector {
public:
  ExtremumDetector(double t0, double dt, Channel channel)
      : t0_(t0), dt_(dt), channel_(channel) {}

  std::optional<CriticalEvent> push(double value);

private:
  double t0_;
  double dt_;
  Channel channel_;
  Eigen::Index count_ = 0;
  double prev_ = 0.0;
  double prev2_ = 0.0;
  int last_sign_ = 0;               // sign of the last nonzero difference
  Eigen::Index flat_start_ = -1;    // first index of a run of equal samples
};

std::vector<CriticalEvent> derivative_zero_events(const Eigen::Ref<const Eigen::VectorXd>& signal,
                                                  double t0, double dt, Channel channel);

template <typename Scalar>
std::vector<CriticalEvent> derivative_zero_events(const Trajectory<Scalar>& traj, Channel channel) {
  if (traj.size() < 3) throw DomainError("derivative_zero_events: trajectory shorter than 3 samples");
  const Eigen::VectorXd column = traj.samples.col(int(channel)).template cast<double>();
  return derivative_zero_events(column, traj.t0, traj.dt, channel);
}

/// `passes` centered moving averages; windows are truncated at the edges so the
/// output has the input length.
Eigen::VectorXd smooth(const Eigen::Ref<const Eigen::VectorXd>& signal, const SmoothingConfig& cfg);

/// Local extrema filtered by topographic prominence, then greedily by distance
/// (higher peaks first). Flat extrema count once, at the plateau midpoint.
std::vector<CriticalEvent> find_peaks(const Eigen::Ref<const Eigen::VectorXd>& signal,
                                      const PeakConfig& cfg, ExtremumKind kind = ExtremumKind::Max,
                                      double t0 = 0.0, double dt = 1.0, Channel channel = Channel::Z);

/// Prominence of every strict local maximum (plateaus collapsed), in index order.
std::vector<std::pair<Eigen::Index, double>> peak_prominences(
    const Eigen::Ref<const Eigen::VectorXd>& signal);

/// Moves each event to the extreme raw sample within `radius` of its index
/// and refines time and value with a parabola through the raw neighbours.
/// Used to read peak heights back from a signal after smoothing.
std::vector<CriticalEvent> snap_to_raw(const Eigen::Ref<const Eigen::VectorXd>& raw,
                                       std::span<const CriticalEvent> events, Eigen::Index radius, double t0,
                                       double dt);

double mean_inter_event_time(std::span<const CriticalEvent> events);

/// Keeps events of one kind, preserving order.
std::vector<CriticalEvent> filter_kind(std::span<const CriticalEvent> events, ExtremumKind kind);

std::vector<CriticalEvent> select_events(std::span<const CriticalEvent> events, EventSelection selection);

}  // namespace symchaos
