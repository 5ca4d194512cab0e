#include <doctest.h>

#include <cmath>
#include <sstream>

#include "symchaos/errors.hpp"
#include "symchaos/sweep.hpp"

using namespace symchaos;

namespace {

SweepRecord periodic_record(double param, const std::string& code, double p11, double p00) {
  SweepRecord r;
  r.param = param;
  r.detected_period = int(code.size());
  r.code = code;
  r.p11 = p11;
  r.p00 = p00;
  return r;
}

SweepRecord chaotic_record(double param) {
  SweepRecord r;
  r.param = param;
  r.h6 = 0.6;
  r.lz = 0.5;
  r.lambda_tau = 0.7;
  return r;
}

SweepSpec quick_lorenz(double lo, double hi, double step) {
  SweepSpec s = lorenz_sweep_defaults();
  s.lo = lo;
  s.hi = hi;
  s.step = step;
  s.symbols_target = 1000;
  s.integrator.t_transient = 50.0;
  s.lyapunov.t_transient = 50.0;
  s.lyapunov.t_total = 300.0;
  return s;
}

}  // namespace

TEST_CASE("parameter grid") {
  SweepSpec s;
  s.lo = 28.0;
  s.hi = 29.0;
  s.step = 0.25;
  const auto g = s.grid();
  REQUIRE(g.size() == 5);
  CHECK(g.front() == 28.0);
  CHECK(g.back() == 29.0);

  s.lo = 30.0;
  s.hi = 31.0;
  s.step = 5.0;
  CHECK(s.grid() == std::vector<double>{30.0});

  s.lo = 69.0;
  s.hi = 70.0;
  s.step = 0.01;
  CHECK(s.grid().size() == 101);

  CHECK(s.model_at(42.0).lorenz.r == 42.0);
}

TEST_CASE("sweep specification is validated") {
  auto bad = [](auto mutate) {
    SweepSpec s = lorenz_sweep_defaults();
    mutate(s);
    CHECK_THROWS_AS(s.validate(), ConfigError);
  };
  bad([](SweepSpec& s) { s.hi = s.lo; });
  bad([](SweepSpec& s) { s.step = 0.0; });
  bad([](SweepSpec& s) { s.symbols_target = 999; });
  bad([](SweepSpec& s) { s.param_name = "q"; });
  bad([](SweepSpec& s) { s.partition.variant = PartitionVariant::RosslerZThreshold; });
  bad([](SweepSpec& s) { s.max_time = s.integrator.t_transient; });
  CHECK_NOTHROW(lorenz_sweep_defaults().validate());
  CHECK_NOTHROW(rossler_sweep_defaults().validate());
}

TEST_CASE("window detection on synthetic records") {
  const std::vector<SweepRecord> records = {
      chaotic_record(1.0),
      periodic_record(2.0, "000111", 2.0 / 3.0, 2.0 / 3.0),
      periodic_record(3.0, "000111", 2.0 / 3.0, 2.0 / 3.0),
      periodic_record(4.0, "001", 0.0, 0.5),
      chaotic_record(5.0),
      periodic_record(6.0, "01", 0.0, 0.0),
  };
  const auto w = detect_stability_windows(records);
  REQUIRE(w.size() == 3);
  CHECK(w[0].param_lo == 2.0);
  CHECK(w[0].param_hi == 3.0);
  CHECK(w[0].n_points == 2);
  CHECK(w[0].period == 6);
  CHECK(w[0].code == "000111");
  CHECK(w[0].symmetric);
  CHECK(w[1].code == "001");
  CHECK_FALSE(w[1].symmetric);
  CHECK(w[2].param_lo == 6.0);
  CHECK(w[2].symmetric);

  SweepRecord noisy = periodic_record(7.0, "01", 0.0, 0.0);
  noisy.lz = 0.05;
  CHECK_FALSE(is_window_point(noisy, {}));
  CHECK(is_window_point(noisy, WindowCriteria{0.02, 0.1, 0.02, 0.05}));
  CHECK(detect_stability_windows(std::vector<SweepRecord>{}).empty());
}

TEST_CASE("flags format") {
  CHECK(format_flags(0).empty());
  CHECK(format_flags(kFlagShort | kFlagNotConverged) == "short;not_converged");
}

TEST_CASE("symbol collection stops at the target") {
  IntegratorConfig cfg;
  cfg.t_transient = 20.0;
  const auto seq = collect_symbols(Model<double>::make_lorenz(), State3<double>::Ones(), cfg, PartitionSpec{}, 500, 1e4);
  CHECK(seq.size() == 500);
  const auto capped =
      collect_symbols(Model<double>::make_lorenz(), State3<double>::Ones(), cfg, PartitionSpec{}, 100000, 100.0);
  CHECK(capped.size() < 200);
  CHECK(capped.size() > 50);
}

TEST_CASE("lorenz sweep points") {
  const auto s = quick_lorenz(28.0, 92.5, 64.5);
  const auto rec = run_sweep(s);
  REQUIRE(rec.size() == 2);
  CHECK(rec[0].lambda_tau > 0.3);
  CHECK(rec[0].h6 > 0.3);
  CHECK(rec[0].n_symbols == 1000);
  CHECK_FALSE(rec[0].detected_period.has_value());
  REQUIRE(rec[1].detected_period.has_value());
  CHECK(*rec[1].detected_period == 6);
  CHECK(rec[1].code == "000111");
}

TEST_CASE("serial and threaded sweeps agree exactly") {
  auto s = quick_lorenz(40.0, 41.0, 0.5);
  s.threads = 1;
  const auto serial = run_sweep(s);
  s.threads = 2;
  std::size_t calls = 0;
  const auto threaded = run_sweep(s, [&](std::size_t done, std::size_t total, const SweepRecord&) {
    ++calls;
    CHECK(done <= total);
  });
  CHECK(calls == 3);
  std::ostringstream a, b;
  write_sweep_csv(a, serial);
  write_sweep_csv(b, threaded);
  CHECK(a.str() == b.str());
}

TEST_CASE("rossler below the first threshold crossing never leaves symbol 0") {
  SweepSpec s = rossler_sweep_defaults();
  s.lo = 0.30;
  s.hi = 0.31;
  s.step = 0.05;
  s.symbols_target = 1000;
  s.integrator.t_transient = 200.0;
  s.lyapunov.t_transient = 200.0;
  s.lyapunov.t_total = 1000.0;
  const auto rec = run_sweep(s);
  REQUIRE(rec.size() == 1);
  CHECK(rec[0].p00 == 1.0);
  CHECK(rec[0].code == "0");
}

TEST_CASE("csv layout") {
  std::ostringstream out;
  write_windows_csv(out, std::vector<StabilityWindow>{{2.0, 3.0, 6, "000111", true, 2}});
  CHECK(out.str() == "param_lo,param_hi,period,code,symmetric,n_points\n2,3,6,000111,1,2\n");
}
