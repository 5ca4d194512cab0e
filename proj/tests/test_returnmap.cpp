#include <doctest.h>

#include <random>
#include <sstream>

#include "symchaos/errors.hpp"
#include "symchaos/returnmap.hpp"

using namespace symchaos;

namespace {

template <typename F>
ReturnMap sampled_map(F f, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ReturnMap m;
  m.points.resize(n, 2);
  for (int k = 0; k < n; ++k) {
    const double x = u(rng);
    m.points(k, 0) = x;
    m.points(k, 1) = f(x);
  }
  return m;
}

double tent(double x) { return x < 0.5 ? 2.0 * x : 2.0 * (1.0 - x); }

}  // namespace

TEST_CASE("successive maxima become pairs") {
  const std::vector<double> maxima = {1.0, 2.0, 3.0, 4.0};
  const auto m = return_map_from_maxima(maxima, "test");
  REQUIRE(m.size() == 3);
  CHECK(m.points(0, 0) == 1.0);
  CHECK(m.points(0, 1) == 2.0);
  CHECK(m.points(2, 0) == 3.0);
  CHECK(m.points(2, 1) == 4.0);
  CHECK(m.source_meta == "test");
  CHECK_THROWS_AS(return_map_from_maxima(std::vector<double>{1.0, 2.0}), DomainError);

  std::ostringstream out;
  write_return_map_csv(out, m);
  CHECK(out.str() == "z_n,z_np1\n1,2\n2,3\n3,4\n");
}

TEST_CASE("map comparison") {
  const auto a = sampled_map(tent, 5000, 1);
  const auto same = compare_maps(a, a);
  CHECK(same.binned_rms == 0.0);
  CHECK(same.overlap_fraction == 1.0);
  CHECK(same.common_bins == 50);

  const auto b = sampled_map(tent, 5000, 2);
  const auto ab = compare_maps(a, b), ba = compare_maps(b, a);
  CHECK(ab.binned_rms == ba.binned_rms);
  CHECK(ab.overlap_fraction == ba.overlap_fraction);
  CHECK(ab.z_range == ba.z_range);

  ReturnMap shifted = a;
  shifted.points.col(1).array() += 0.5;
  const auto cmp = compare_maps(a, shifted);
  CHECK(cmp.binned_rms == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cmp.z_range == doctest::Approx(a.points.col(1).maxCoeff() + 0.5 - a.points.minCoeff()));
  CHECK(cmp.rms_fraction() == doctest::Approx(cmp.binned_rms / cmp.z_range));

  ReturnMap far = a;
  far.points.col(0).array() += 10.0;
  CHECK_THROWS_AS(compare_maps(a, far, 10), DomainError);
}

TEST_CASE("binning") {
  ReturnMap m;
  m.points.resize(4, 2);
  m.points << 0.1, 1.0, 0.2, 3.0, 0.9, 5.0, 1.0, 7.0;
  const auto c = bin_map(m, 0.0, 1.0, 2);
  CHECK(c.count[0] == 2);
  CHECK(c.count[1] == 2);
  CHECK(c.mean[0] == 2.0);
  CHECK(c.mean[1] == 6.0);
  CHECK(c.center(1) == 0.75);
}

TEST_CASE("tent map slopes") {
  const auto s = binned_slopes(sampled_map(tent, 20000, 3), 50, 5);
  CHECK(s.tip_x == doctest::Approx(0.5).epsilon(0.05));
  REQUIRE(s.slope.size() > 40);
  for (std::size_t k = 0; k < s.slope.size(); ++k)
    CHECK(std::abs(s.slope[k]) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(expanding_fraction(s) == 1.0);
  CHECK_FALSE(has_fold(s));
}

TEST_CASE("a second turning point right of the tip is a fold") {
  auto folded = [](double x) {
    if (x < 0.3) return x / 0.3;
    if (x < 0.7) return 1.0 - 2.0 * (x - 0.3);
    return 0.2 + 0.5 * (x - 0.7);
  };
  const auto s = binned_slopes(sampled_map(folded, 20000, 4), 50, 5);
  CHECK(has_fold(s));
  CHECK(has_fold(s, 0.1));
  CHECK_FALSE(has_fold(s, 1.0));
  CHECK(expanding_fraction(s) < 0.9);
}

TEST_CASE("lorenz z maxima map is expanding") {
  IntegratorConfig cfg;
  cfg.t_transient = 50.0;
  cfg.t_total = 1050.0;
  const auto traj = integrate(Model<double>::make_lorenz(), State3<double>(1, 1, 1), cfg);
  const auto map = build_zmax_map(traj);
  CHECK(map.size() > 1000);
  CHECK(map.source_meta == "zmax=derivative");
  CHECK(expanding_fraction(binned_slopes(map, 50, 5)) >= 0.9);
}
