#include "symchaos/events.hpp"

#include <algorithm>
#include <numeric>

namespace symchaos {

const char* to_string(Channel channel) {
  switch (channel) {
    case Channel::X: return "x";
    case Channel::Y: return "y";
    case Channel::Z: return "z";
  }
  return "?";
}

const char* to_string(ExtremumKind kind) { return kind == ExtremumKind::Max ? "max" : "min"; }

const char* to_string(EventSelection selection) {
  switch (selection) {
    case EventSelection::All: return "all";
    case EventSelection::Maxima: return "maxima";
    case EventSelection::Minima: return "minima";
    case EventSelection::Outer: return "outer";
  }
  return "?";
}

bool is_selected(const CriticalEvent& e, EventSelection selection) {
  switch (selection) {
    case EventSelection::All: return true;
    case EventSelection::Maxima: return e.kind == ExtremumKind::Max;
    case EventSelection::Minima: return e.kind == ExtremumKind::Min;
    case EventSelection::Outer:
      return (e.kind == ExtremumKind::Max && e.value > 0) || (e.kind == ExtremumKind::Min && e.value < 0);
  }
  return false;
}

std::optional<CriticalEvent> ExtremumDetector::push(double value) {
  const Eigen::Index i = count_++;
  if (i == 0) {
    prev_ = value;
    return std::nullopt;
  }
  const double diff = value - prev_;
  const int sign = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
  std::optional<CriticalEvent> event;

  if (sign == 0) {
    if (flat_start_ < 0) flat_start_ = i - 1;
  } else {
    if (last_sign_ != 0 && sign != last_sign_) {
      CriticalEvent e;
      e.kind = last_sign_ > 0 ? ExtremumKind::Max : ExtremumKind::Min;
      e.channel = channel_;
      if (flat_start_ >= 0) {
        // Plateau from flat_start_ to i-1: report its midpoint.
        e.index = (flat_start_ + i - 1) / 2;
        e.time = t0_ + double(e.index) * dt_;
        if ((flat_start_ + i - 1) % 2 != 0) e.time += 0.5 * dt_;
        e.value = prev_;
      } else {
        // Extremum at sample i-1, bracketed by prev2_, prev_, value.
        e.index = i - 1;
        const double curvature = prev2_ - 2.0 * prev_ + value;
        double offset = 0.0;
        if (curvature != 0.0) offset = 0.5 * (prev2_ - value) / curvature;
        offset = std::clamp(offset, -0.5, 0.5);
        e.time = t0_ + (double(i - 1) + offset) * dt_;
        e.value = prev_ - 0.25 * (prev2_ - value) * offset;
      }
      event = e;
    }
    last_sign_ = sign;
    flat_start_ = -1;
  }
  prev2_ = prev_;
  prev_ = value;
  return event;
}

std::vector<CriticalEvent> derivative_zero_events(const Eigen::Ref<const Eigen::VectorXd>& signal,
                                                  double t0, double dt, Channel channel) {
  if (signal.size() < 3) throw DomainError("derivative_zero_events: signal shorter than 3 samples");
  ExtremumDetector detector(t0, dt, channel);
  std::vector<CriticalEvent> events;
  for (Eigen::Index k = 0; k < signal.size(); ++k) {
    if (auto e = detector.push(signal[k])) events.push_back(*e);
  }
  return events;
}

Eigen::VectorXd smooth(const Eigen::Ref<const Eigen::VectorXd>& signal, const SmoothingConfig& cfg) {
  const Eigen::Index n = signal.size();
  if (cfg.window < 1) throw ConfigError("smooth: window must be >= 1");
  if (cfg.passes < 0) throw ConfigError("smooth: passes must be >= 0");
  if (cfg.passes > 0 && cfg.window > n) throw DomainError("smooth: window longer than signal");

  Eigen::VectorXd out = signal;
  const Eigen::Index left = (cfg.window - 1) / 2;
  const Eigen::Index right = cfg.window - 1 - left;
  Eigen::VectorXd prefix(n + 1);
  for (int pass = 0; pass < cfg.passes; ++pass) {
    prefix[0] = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + out[k];
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, k - left);
      const Eigen::Index hi = std::min<Eigen::Index>(n - 1, k + right);
      out[k] = (prefix[hi + 1] - prefix[lo]) / double(hi - lo + 1);
    }
  }
  return out;
}

namespace {

// Strict local maxima; a flat top is reported at its (lower) midpoint.
std::vector<Eigen::Index> local_maxima(const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::vector<Eigen::Index> peaks;
  const Eigen::Index n = x.size();
  Eigen::Index i = 1;
  while (i < n - 1) {
    if (x[i - 1] < x[i]) {
      Eigen::Index ahead = i + 1;
      while (ahead < n - 1 && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }
  return peaks;
}

double prominence_at(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index peak) {
  const double height = x[peak];
  double left_min = height;
  for (Eigen::Index j = peak; j >= 0; --j) {
    if (x[j] > height) break;
    left_min = std::min(left_min, x[j]);
  }
  double right_min = height;
  for (Eigen::Index j = peak; j < x.size(); ++j) {
    if (x[j] > height) break;
    right_min = std::min(right_min, x[j]);
  }
  return height - std::max(left_min, right_min);
}

}  // namespace

std::vector<std::pair<Eigen::Index, double>> peak_prominences(
    const Eigen::Ref<const Eigen::VectorXd>& signal) {
  std::vector<std::pair<Eigen::Index, double>> out;
  if (signal.size() < 3) return out;
  for (Eigen::Index p : local_maxima(signal)) out.emplace_back(p, prominence_at(signal, p));
  return out;
}

std::vector<CriticalEvent> find_peaks(const Eigen::Ref<const Eigen::VectorXd>& signal,
                                      const PeakConfig& cfg, ExtremumKind kind, double t0,
                                      double dt, Channel channel) {
  if (cfg.min_prominence < 0) throw ConfigError("find_peaks: min_prominence must be >= 0");
  if (cfg.min_distance < 1) throw ConfigError("find_peaks: min_distance must be >= 1");
  std::vector<CriticalEvent> events;
  if (signal.size() < 3) return events;

  const Eigen::VectorXd x = kind == ExtremumKind::Max ? Eigen::VectorXd(signal) : Eigen::VectorXd(-signal);

  std::vector<Eigen::Index> candidates;
  for (auto [p, prom] : peak_prominences(x)) {
    if (prom >= cfg.min_prominence) candidates.push_back(p);
  }

  if (cfg.min_distance > 1 && candidates.size() > 1) {
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x[candidates[a]] > x[candidates[b]];
    });
    std::vector<bool> keep(candidates.size(), true);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const std::size_t j = order[rank];
      if (!keep[j]) continue;
      for (std::size_t k = j; k-- > 0 && candidates[j] - candidates[k] < cfg.min_distance;) keep[k] = false;
      for (std::size_t k = j + 1;
           k < candidates.size() && candidates[k] - candidates[j] < cfg.min_distance; ++k)
        keep[k] = false;
    }
    std::vector<Eigen::Index> kept;
    for (std::size_t j = 0; j < candidates.size(); ++j)
      if (keep[j]) kept.push_back(candidates[j]);
    candidates = std::move(kept);
  }

  events.reserve(candidates.size());
  for (Eigen::Index p : candidates) {
    events.push_back({p, t0 + double(p) * dt, signal[p], kind, channel});
  }
  return events;
}

std::vector<CriticalEvent> snap_to_raw(const Eigen::Ref<const Eigen::VectorXd>& raw,
                                       std::span<const CriticalEvent> events, Eigen::Index radius, double t0,
                                       double dt) {
  const Eigen::Index n = raw.size();
  std::vector<CriticalEvent> out;
  out.reserve(events.size());
  for (CriticalEvent e : events) {
    const double sign = e.kind == ExtremumKind::Max ? 1.0 : -1.0;
    const Eigen::Index lo = std::max<Eigen::Index>(0, e.index - radius);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, e.index + radius);
    Eigen::Index best = lo;
    for (Eigen::Index k = lo + 1; k <= hi; ++k)
      if (sign * raw[k] > sign * raw[best]) best = k;
    e.index = best;
    e.value = raw[best];
    e.time = t0 + double(best) * dt;
    if (best > 0 && best < n - 1) {
      const double a = raw[best - 1], b = raw[best], c = raw[best + 1];
      const double curvature = a - 2.0 * b + c;
      if (curvature != 0.0) {
        const double offset = std::clamp(0.5 * (a - c) / curvature, -0.5, 0.5);
        e.time += offset * dt;
        e.value = b - 0.25 * (a - c) * offset;
      }
    }
    out.push_back(e);
  }
  return out;
}

double mean_inter_event_time(std::span<const CriticalEvent> events) {
  if (events.size() < 2) throw DomainError("mean_inter_event_time: fewer than 2 events");
  return (events.back().time - events.front().time) / double(events.size() - 1);
}

std::vector<CriticalEvent> filter_kind(std::span<const CriticalEvent> events, ExtremumKind kind) {
  std::vector<CriticalEvent> out;
  for (const auto& e : events)
    if (e.kind == kind) out.push_back(e);
  return out;
}

std::vector<CriticalEvent> select_events(std::span<const CriticalEvent> events, EventSelection selection) {
  std::vector<CriticalEvent> out;
  for (const auto& e : events)
    if (is_selected(e, selection)) out.push_back(e);
  return out;
}

}  // namespace symchaos
