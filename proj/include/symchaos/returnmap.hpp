#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "symchaos/events.hpp"
#include "symchaos/models.hpp"
#include "symchaos/symbolic.hpp"

namespace symchaos {

/// Pairs (z_n, z_{n+1}) of successive z maxima, one per row.
struct ReturnMap {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  std::string source_meta;

  Eigen::Index size() const { return points.rows(); }
};

ReturnMap return_map_from_maxima(std::span<const double> maxima, std::string meta = {});

/// z-maxima map of a trajectory. With DerivativeZero detection the maxima are
/// the refined derivative zeros; with SmoothedPeaks they come from the
/// pipeline's smoothed peak finder (values read back from the raw signal).
ReturnMap build_zmax_map(const Trajectory<double>& traj,
                         EventDetection detection = EventDetection::DerivativeZero,
                         const SmoothingConfig& smoothing = {}, const PeakConfig& peaks = {});

struct MapComparison {
  int n_bins = 0;
  double binned_rms = 0.0;
  double overlap_fraction = 0.0;
  std::size_t common_bins = 0;
  double z_range = 0.0;  // extent of all values in both maps

  double rms_fraction() const { return z_range > 0 ? binned_rms / z_range : 0.0; }
};

/// Bins the union z_n domain, averages z_{n+1} per bin and compares the
/// per-bin means over bins both maps populate. Symmetric in its arguments.
MapComparison compare_maps(const ReturnMap& a, const ReturnMap& b, int n_bins = 50);

/// Per-bin mean image over [lo, hi]; `count` is zero for empty bins.
struct BinnedCurve {
  double lo = 0.0;
  double width = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXi count;

  double center(Eigen::Index k) const { return lo + (double(k) + 0.5) * width; }
};

BinnedCurve bin_map(const ReturnMap& map, double lo, double hi, int n_bins);

/// Finite-difference slopes between neighbouring populated bins, skipping
/// any pair that touches the bin with the highest mean (the cusp tip).
struct MapSlopes {
  std::vector<double> x;      // midpoint of each bin pair
  std::vector<double> slope;
  Eigen::Index tip_bin = -1;
  double tip_x = 0.0;
};

MapSlopes binned_slopes(const ReturnMap& map, int n_bins = 50, int min_count = 1);

/// Fraction of binned slopes with magnitude above 1.
double expanding_fraction(const MapSlopes& slopes);

/// True if the slope changes sign among bins to the right of the tip.
bool has_fold(const MapSlopes& slopes, double min_abs_slope = 0.0);

void write_return_map_csv(std::ostream& out, const ReturnMap& map);
void write_map_comparison_csv(std::ostream& out, const MapComparison& cmp);

}  // namespace symchaos
