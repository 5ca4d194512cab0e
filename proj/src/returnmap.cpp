#include "symchaos/returnmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "symchaos/errors.hpp"
#include "symchaos/io.hpp"

namespace symchaos {

ReturnMap return_map_from_maxima(std::span<const double> maxima, std::string meta) {
  if (maxima.size() < 3) throw DomainError("return map: fewer than 3 maxima");
  ReturnMap map;
  map.source_meta = std::move(meta);
  map.points.resize(Eigen::Index(maxima.size() - 1), 2);
  for (std::size_t k = 0; k + 1 < maxima.size(); ++k) {
    map.points(Eigen::Index(k), 0) = maxima[k];
    map.points(Eigen::Index(k), 1) = maxima[k + 1];
  }
  return map;
}

ReturnMap build_zmax_map(const Trajectory<double>& traj, EventDetection detection, const SmoothingConfig& smoothing,
                         const PeakConfig& peaks) {
  if (traj.size() < 3) throw DomainError("return map: trajectory shorter than 3 samples");
  const Eigen::VectorXd z = traj.samples.col(2);
  std::vector<CriticalEvent> maxima;
  std::string meta;
  if (detection == EventDetection::DerivativeZero) {
    maxima = filter_kind(derivative_zero_events(z, traj.t0, traj.dt, Channel::Z), ExtremumKind::Max);
    meta = "zmax=derivative";
  } else {
    const auto found = find_peaks(smooth(z, smoothing), peaks, ExtremumKind::Max, traj.t0, traj.dt, Channel::Z);
    maxima = snap_to_raw(z, found, smoothing_radius(smoothing), traj.t0, traj.dt);
    meta = "zmax=smoothed_peaks";
  }
  std::vector<double> values;
  values.reserve(maxima.size());
  for (const auto& e : maxima) values.push_back(e.value);
  return return_map_from_maxima(values, meta);
}

BinnedCurve bin_map(const ReturnMap& map, double lo, double hi, int n_bins) {
  if (n_bins < 1) throw ConfigError("return map: n_bins must be >= 1");
  BinnedCurve curve;
  curve.lo = lo;
  curve.width = hi > lo ? (hi - lo) / n_bins : 1.0;
  curve.mean = Eigen::VectorXd::Zero(n_bins);
  curve.count = Eigen::VectorXi::Zero(n_bins);
  for (Eigen::Index k = 0; k < map.size(); ++k) {
    const auto bin = std::clamp<Eigen::Index>(Eigen::Index((map.points(k, 0) - lo) / curve.width), 0, n_bins - 1);
    curve.mean[bin] += map.points(k, 1);
    ++curve.count[bin];
  }
  for (int b = 0; b < n_bins; ++b)
    if (curve.count[b] > 0) curve.mean[b] /= curve.count[b];
  return curve;
}

MapComparison compare_maps(const ReturnMap& a, const ReturnMap& b, int n_bins) {
  if (a.size() == 0 || b.size() == 0) throw DomainError("compare_maps: empty map");
  const double lo = std::min(a.points.col(0).minCoeff(), b.points.col(0).minCoeff());
  const double hi = std::max(a.points.col(0).maxCoeff(), b.points.col(0).maxCoeff());
  const BinnedCurve ca = bin_map(a, lo, hi, n_bins);
  const BinnedCurve cb = bin_map(b, lo, hi, n_bins);

  MapComparison cmp;
  cmp.n_bins = n_bins;
  std::size_t either = 0;
  double sum_sq = 0.0;
  for (int k = 0; k < n_bins; ++k) {
    const bool in_a = ca.count[k] > 0, in_b = cb.count[k] > 0;
    if (in_a || in_b) ++either;
    if (in_a && in_b) {
      ++cmp.common_bins;
      const double d = ca.mean[k] - cb.mean[k];
      sum_sq += d * d;
    }
  }
  if (cmp.common_bins == 0) throw DomainError("compare_maps: the maps share no populated bin");
  cmp.binned_rms = std::sqrt(sum_sq / double(cmp.common_bins));
  cmp.overlap_fraction = double(cmp.common_bins) / double(either);
  cmp.z_range = std::max(a.points.maxCoeff(), b.points.maxCoeff()) - std::min(a.points.minCoeff(), b.points.minCoeff());
  return cmp;
}

MapSlopes binned_slopes(const ReturnMap& map, int n_bins, int min_count) {
  if (map.size() == 0) throw DomainError("binned_slopes: empty map");
  const BinnedCurve curve = bin_map(map, map.points.col(0).minCoeff(), map.points.col(0).maxCoeff(), n_bins);
  MapSlopes out;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_bins; ++k) {
    if (curve.count[k] >= min_count && curve.mean[k] > best) {
      best = curve.mean[k];
      out.tip_bin = k;
    }
  }
  if (out.tip_bin >= 0) out.tip_x = curve.center(out.tip_bin);
  Eigen::Index prev = -1;
  for (int k = 0; k < n_bins; ++k) {
    if (curve.count[k] < min_count) continue;
    if (prev >= 0 && prev != out.tip_bin && k != out.tip_bin) {
      out.x.push_back(0.5 * (curve.center(prev) + curve.center(k)));
      out.slope.push_back((curve.mean[k] - curve.mean[prev]) / (curve.center(k) - curve.center(prev)));
    }
    prev = k;
  }
  return out;
}

double expanding_fraction(const MapSlopes& slopes) {
  if (slopes.slope.empty()) return 0.0;
  const auto steep = std::count_if(slopes.slope.begin(), slopes.slope.end(), [](double s) { return std::abs(s) > 1.0; });
  return double(steep) / double(slopes.slope.size());
}

bool has_fold(const MapSlopes& slopes, double min_abs_slope) {
  if (slopes.tip_bin < 0) return false;
  bool seen_pos = false, seen_neg = false;
  for (std::size_t k = 0; k < slopes.slope.size(); ++k) {
    if (slopes.x[k] <= slopes.tip_x || std::abs(slopes.slope[k]) < min_abs_slope) continue;
    seen_pos = seen_pos || slopes.slope[k] > 0;
    seen_neg = seen_neg || slopes.slope[k] < 0;
  }
  return seen_pos && seen_neg;
}

void write_return_map_csv(std::ostream& out, const ReturnMap& map) {
  out << "z_n,z_np1\n";
  for (Eigen::Index k = 0; k < map.size(); ++k)
    out << format_double(map.points(k, 0)) << ',' << format_double(map.points(k, 1)) << '\n';
}

void write_map_comparison_csv(std::ostream& out, const MapComparison& cmp) {
  out << "n_bins,binned_rms,overlap_fraction,common_bins,z_range,rms_fraction\n";
  out << cmp.n_bins << ',' << format_double(cmp.binned_rms) << ',' << format_double(cmp.overlap_fraction) << ','
      << cmp.common_bins << ',' << format_double(cmp.z_range) << ',' << format_double(cmp.rms_fraction()) << '\n';
}

}  // namespace symchaos
