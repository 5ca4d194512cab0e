#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "symchaos/errors.hpp"
#include "symchaos/events.hpp"

using namespace symchaos;
using Eigen::Index;
using Eigen::VectorXd;

namespace {

// Height above the higher of the two lowest saddles that separate a peak from
// higher terrain (or from the signal edge when nothing higher exists).
double brute_prominence(const VectorXd& s, Index i) {
  const double h = s[i];
  double left_min = h;
  for (Index j = i - 1; j >= 0 && s[j] <= h; --j) left_min = std::min(left_min, s[j]);
  double right_min = h;
  for (Index j = i + 1; j < s.size() && s[j] <= h; ++j) right_min = std::min(right_min, s[j]);
  return h - std::max(left_min, right_min);
}

std::vector<Index> strict_maxima(const VectorXd& s) {
  std::vector<Index> out;
  for (Index i = 1; i + 1 < s.size(); ++i)
    if (s[i] > s[i - 1] && s[i] > s[i + 1]) out.push_back(i);
  return out;
}

VectorXd two_scale_signal(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.01);
  VectorXd s(3000);
  for (Index i = 0; i < s.size(); ++i) {
    const double t = double(i);
    s[i] = 2.0 * std::sin(t * 2.0 * std::numbers::pi / 400.0) + 0.03 * std::sin(t * 2.0 * std::numbers::pi / 7.0) +
           jitter(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("sine extrema land on the analytic times") {
  const double dt = 0.01;
  VectorXd s(2000);
  for (Index i = 0; i < s.size(); ++i) s[i] = std::sin(double(i) * dt);
  const auto events = derivative_zero_events(s, 0.0, dt, Channel::X);
  REQUIRE(events.size() == 6);
  for (std::size_t k = 0; k < events.size(); ++k) {
    const double expected = std::numbers::pi / 2 + double(k) * std::numbers::pi;
    CHECK(events[k].time == doctest::Approx(expected).epsilon(1e-5));
    CHECK(std::abs(events[k].value) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(events[k].kind == (k % 2 == 0 ? ExtremumKind::Max : ExtremumKind::Min));
  }
}

TEST_CASE("constant signal has no events") {
  CHECK(derivative_zero_events(VectorXd::Constant(100, 2.5), 0.0, 1.0, Channel::Z).empty());
}

TEST_CASE("streaming detector matches the batch detector") {
  const auto s = two_scale_signal(4);
  const auto batch = derivative_zero_events(s, 1.0, 0.5, Channel::Y);
  ExtremumDetector det(1.0, 0.5, Channel::Y);
  std::vector<CriticalEvent> streamed;
  for (Index i = 0; i < s.size(); ++i)
    if (auto e = det.push(s[i])) streamed.push_back(*e);
  REQUIRE(streamed.size() == batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    CHECK(streamed[k].index == batch[k].index);
    CHECK(streamed[k].time == batch[k].time);
  }
}

TEST_CASE("smoothing") {
  const VectorXd s = two_scale_signal(1);
  CHECK(smooth(s, {5, 0}) == s);
  CHECK(smooth(VectorXd::Constant(50, 3.0), {20, 3}).isApprox(VectorXd::Constant(50, 3.0)));

  VectorXd impulse = VectorXd::Zero(11);
  impulse[5] = 1.0;
  const VectorXd out = smooth(impulse, {3, 1});
  VectorXd expected = VectorXd::Zero(11);
  expected.segment(4, 3).setConstant(1.0 / 3.0);
  CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-15);

  const VectorXd a = two_scale_signal(2), b = two_scale_signal(3);
  const VectorXd lhs = smooth(2.0 * a - 0.5 * b, {20, 3});
  const VectorXd rhs = 2.0 * smooth(a, {20, 3}) - 0.5 * smooth(b, {20, 3});
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(smooth(VectorXd::Zero(10), {11, 1}), DomainError);
}

TEST_CASE("peak prominences agree with the brute-force definition") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const VectorXd s = two_scale_signal(seed);
    const auto prom = peak_prominences(s);
    const auto maxima = strict_maxima(s);
    REQUIRE(prom.size() == maxima.size());
    for (std::size_t k = 0; k < maxima.size(); ++k) {
      CHECK(prom[k].first == maxima[k]);
      CHECK(prom[k].second == doctest::Approx(brute_prominence(s, maxima[k])).epsilon(1e-12));
    }
  }
}

TEST_CASE("find_peaks filters by prominence and distance") {
  SUBCASE("only the tall peaks of a two-scale signal survive") {
    const VectorXd s = two_scale_signal(7);
    const auto peaks = find_peaks(s, {0.5, 1});
    std::vector<Index> expected;
    for (Index i : strict_maxima(s))
      if (brute_prominence(s, i) >= 0.5) expected.push_back(i);
    REQUIRE(peaks.size() == expected.size());
    CHECK(peaks.size() == 8);
    for (std::size_t k = 0; k < peaks.size(); ++k) CHECK(peaks[k].index == expected[k]);
  }
  SUBCASE("zero thresholds return every strict local maximum") {
    const VectorXd s = two_scale_signal(8);
    const auto peaks = find_peaks(s, {0.0, 1});
    const auto maxima = strict_maxima(s);
    REQUIRE(peaks.size() == maxima.size());
    for (std::size_t k = 0; k < peaks.size(); ++k) CHECK(peaks[k].index == maxima[k]);
  }
  SUBCASE("distance rule keeps the taller of two close peaks") {
    VectorXd s = VectorXd::Zero(400);
    s[100] = 1.0;
    s[200] = 2.0;
    const auto peaks = find_peaks(s, {0.0, 150});
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].index == 200);
  }
  SUBCASE("prominence rule") {
    VectorXd s = VectorXd::Zero(100);
    s[30] = 0.05;
    s[60] = 1.0;
    const auto peaks = find_peaks(s, {0.1, 1});
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].index == 60);
  }
  SUBCASE("minima come from the negated signal") {
    VectorXd s = VectorXd::Zero(100);
    s[40] = -3.0;
    const auto troughs = find_peaks(s, {0.1, 1}, ExtremumKind::Min);
    REQUIRE(troughs.size() == 1);
    CHECK(troughs[0].index == 40);
    CHECK(troughs[0].value == -3.0);
    CHECK(troughs[0].kind == ExtremumKind::Min);
  }
  SUBCASE("a plateau counts once at its midpoint") {
    VectorXd s = VectorXd::Zero(20);
    s.segment(8, 5).setConstant(1.0);
    const auto peaks = find_peaks(s, {0.0, 1});
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].index == 10);
  }
}

TEST_CASE("peaks read back from the raw signal after smoothing") {
  const VectorXd s = two_scale_signal(9);
  const VectorXd sm = smooth(s, {20, 3});
  const auto peaks = find_peaks(sm, {0.1, 150}, ExtremumKind::Max, 0.0, 1.0);
  const auto snapped = snap_to_raw(s, peaks, 30, 0.0, 1.0);
  REQUIRE(snapped.size() == peaks.size());
  for (std::size_t k = 0; k < snapped.size(); ++k) {
    const Index lo = std::max<Index>(0, peaks[k].index - 30);
    const Index hi = std::min<Index>(s.size() - 1, peaks[k].index + 30);
    Index arg = lo;
    for (Index i = lo; i <= hi; ++i)
      if (s[i] > s[arg]) arg = i;
    CHECK(snapped[k].index == arg);
    CHECK(snapped[k].value >= s[arg]);
    CHECK(snapped[k].value > peaks[k].value);
  }
}

TEST_CASE("mean inter-event time") {
  auto at = [](std::initializer_list<double> times) {
    std::vector<CriticalEvent> ev;
    for (double t : times) ev.push_back({0, t, 0.0, ExtremumKind::Max, Channel::X});
    return ev;
  };
  CHECK(mean_inter_event_time(at({0, 1, 2, 3})) == doctest::Approx(1.0));
  CHECK(mean_inter_event_time(at({0, 2})) == doctest::Approx(2.0));
  CHECK_THROWS_AS(mean_inter_event_time(at({1})), DomainError);
}

TEST_CASE("event selection") {
  const std::vector<CriticalEvent> ev = {{0, 0, 3.0, ExtremumKind::Max, Channel::X},
                                         {1, 1, 1.0, ExtremumKind::Min, Channel::X},
                                         {2, 2, -2.0, ExtremumKind::Max, Channel::X},
                                         {3, 3, -4.0, ExtremumKind::Min, Channel::X}};
  CHECK(select_events(ev, EventSelection::All).size() == 4);
  CHECK(select_events(ev, EventSelection::Maxima).size() == 2);
  CHECK(select_events(ev, EventSelection::Minima).size() == 2);
  const auto outer = select_events(ev, EventSelection::Outer);
  REQUIRE(outer.size() == 2);
  CHECK(outer[0].value == 3.0);
  CHECK(outer[1].value == -4.0);
}

TEST_CASE("lorenz turning points") {
  IntegratorConfig cfg;
  cfg.dt = 0.005;
  cfg.t_transient = 50.0;
  cfg.t_total = 550.0;
  const auto traj = integrate(Model<double>::make_lorenz(), State3<double>(1, 1, 1), cfg);
  const auto events = derivative_zero_events(traj, Channel::X);
  const auto outer = select_events(events, EventSelection::Outer);
  const double tau = mean_inter_event_time(outer);
  CHECK(tau > 0.65);
  CHECK(tau < 0.80);
  for (std::size_t k = 1; k < events.size(); ++k) CHECK(events[k].time > events[k - 1].time);
}

TEST_CASE("event detection is stable under dt halving") {
  IntegratorConfig cfg;
  cfg.dt = 0.005;
  cfg.t_total = 20.0;
  const auto model = Model<double>::make_lorenz();
  const auto coarse = derivative_zero_events(integrate(model, State3<double>(1, 1, 1), cfg), Channel::X);
  cfg.dt = 0.0025;
  const auto fine = derivative_zero_events(integrate(model, State3<double>(1, 1, 1), cfg), Channel::X);
  REQUIRE(coarse.size() == fine.size());
  for (std::size_t k = 0; k < coarse.size(); ++k) CHECK(std::abs(coarse[k].time - fine[k].time) < 0.005);
}
