#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include <nlohmann/json.hpp>

#include "torusperc/errors.hpp"
#include "torusperc/events.hpp"
#include "torusperc/experiments.hpp"
#include "torusperc/rng.hpp"
#include "torusperc/sampler.hpp"
#include "torusperc/threshold.hpp"

using namespace torusperc;

namespace {

// small torus, fast kernel, enough samples to clear the floor
MCConfig small_config() {
  MCConfig cfg;
  cfg.side_factor = 6.4;
  cfg.n_samples = 100;
  cfg.master_seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("union root maps") {
  CHECK(phi_n(0.0, 7) == 0.0);
  CHECK(phi_n(1.0, 7) == 1.0);
  CHECK(phi_n(0.5, 1) == doctest::Approx(0.5).epsilon(1e-15));
  // halving the union size raises the per-event lower bound
  CHECK(phi_n(0.5, 2) > phi_n(0.5, 4));
  CHECK(psi_l(0.3, 1) == phi_n(0.3, 16));
  CHECK(psi_l(0.3, 2) == phi_n(0.3, 64));
  CHECK_THROWS_AS(phi_n(-0.1, 4), Error);
  CHECK_THROWS_AS(phi_n(1.1, 4), Error);
  CHECK_THROWS_AS(phi_n(0.5, 0), Error);
}

TEST_CASE("grid resolution rule") {
  MCConfig cfg;
  CHECK(resolve_grid_n(cfg, 10.0) == 64);
  CHECK(resolve_grid_n(cfg, 6.4) == 32);
  CHECK(resolve_grid_n(cfg, 16.0) == 64);
  CHECK(resolve_grid_n(cfg, 16.1) == 128);
  cfg.n = 256;
  CHECK(resolve_grid_n(cfg, 10.0) == 256);
}

TEST_CASE("config echo is canonical") {
  MCConfig cfg = small_config();
  const std::string echo = mc_config_echo(cfg);
  CHECK(echo == mc_config_echo(cfg));
  CHECK(echo.find("seed=5") != std::string::npos);
  CHECK(echo.find("kernel.family=") != std::string::npos);
  MCConfig other = cfg;
  other.master_seed = 6;
  CHECK(echo != mc_config_echo(other));
}

TEST_CASE("quarter bound on a small torus") {
  const MCConfig cfg = small_config();
  const MCResult res = quarter_bound_test(cfg);
  CHECK(res.experiment == "quarter_bound");
  REQUIRE(res.estimates.size() == 4);
  REQUIRE(res.checks.size() == 4);
  CHECK(res.all_pass());

  // complementarity is exact: t is never exactly zero for continuous fields
  double p_le = 0.0, p_ge = 0.0;
  for (const auto& e : res.estimates) {
    if (e.name == "p_le_zero") p_le = e.value;
    if (e.name == "p_ge_zero") p_ge = e.value;
  }
  CHECK(p_le + p_ge == doctest::Approx(1.0).epsilon(1e-15));

  // rerun gives the same bytes and digest
  const MCResult again = quarter_bound_test(cfg);
  CHECK(again.csv == res.csv);
  CHECK(again.artifacts_digest == res.artifacts_digest);
  CHECK(again.config_echo == res.config_echo);

  // a different seed moves the digest
  MCConfig reseeded = cfg;
  reseeded.master_seed = 99;
  CHECK(quarter_bound_test(reseeded).artifacts_digest != res.artifacts_digest);
}

TEST_CASE("job count never changes results") {
  MCConfig cfg = small_config();
  cfg.jobs = 1;
  const MCResult serial = quarter_bound_test(cfg);
  cfg.jobs = 3;
  const MCResult threaded = quarter_bound_test(cfg);
  CHECK(serial.artifacts_digest == threaded.artifacts_digest);
  CHECK(serial.csv == threaded.csv);
  REQUIRE(serial.estimates.size() == threaded.estimates.size());
  for (std::size_t i = 0; i < serial.estimates.size(); ++i) {
    CHECK(serial.estimates[i].value == threaded.estimates[i].value);
    CHECK(serial.estimates[i].se == threaded.estimates[i].se);
  }
}

TEST_CASE("harness samples match direct library draws") {
  const MCConfig cfg = small_config();
  const MCResult res = quarter_bound_test(cfg);

  const double side = cfg.side_factor * cfg.R;
  const TorusGrid grid(2, resolve_grid_n(cfg, side), side);
  const Kernel kernel = make_kernel(cfg.kernel_spec, grid);
  std::vector<double> t(cfg.n_samples);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const FieldSample f = draw_field(kernel, rng::derive_seed(cfg.master_seed, i));
    t[i] = threshold_sweep(f, loop_event(0)).t_value;
  }
  const MeanSe mean = mean_with_se(t);
  bool found = false;
  for (const auto& e : res.estimates) {
    if (e.name == "mean_t") {
      CHECK(e.value == mean.value);
      CHECK(e.se == mean.se);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("result json carries the full summary") {
  const MCResult res = quarter_bound_test(small_config());
  const auto j = nlohmann::json::parse(mc_result_json(res));
  CHECK(j["experiment"] == "quarter_bound");
  CHECK(j["all_pass"] == true);
  CHECK(j["estimates"].size() == 4);
  CHECK(j["checks"].size() == 4);
  CHECK(j["loop_to_cross_violations"] == 0);
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("lhs"));
    CHECK(c.contains("rhs"));
    CHECK(c.contains("slack"));
    CHECK(c.contains("pass"));
  }
  CHECK(j["artifacts_digest"].is_string());
  CHECK_FALSE(j.contains("wall_clock_seconds"));
}

TEST_CASE("variance scan structure and determinism") {
  MCConfig cfg = small_config();
  cfg.sides = {6.4, 12.8};
  const MCResult res = variance_scan(cfg);
  CHECK(res.experiment == "variance_scan");
  // per side: mean_t, var, product
  CHECK(res.estimates.size() == 6);
  // consecutive pair: product non-growth plus strict variance decrease
  CHECK(res.checks.size() == 2);
  CHECK(res.csv.find("side,volume,n") != std::string::npos);
  CHECK(variance_scan(cfg).artifacts_digest == res.artifacts_digest);
}

TEST_CASE("variance scan rejects bad configurations") {
  MCConfig cfg = small_config();
  cfg.sides = {12.8, 6.4};
  CHECK_THROWS_AS(variance_scan(cfg), Error);
  cfg.sides = {};
  CHECK_THROWS_AS(variance_scan(cfg), Error);
  cfg.sides = {6.4, 12.8};
  cfg.n = 64;
  CHECK_THROWS_AS(variance_scan(cfg), Error);
  cfg.n = 0;
  cfg.kernel_spec.normalize_sigma = false;
  CHECK_THROWS_AS(variance_scan(cfg), Error);
}

TEST_CASE("sample floor and dimension guards") {
  MCConfig cfg = small_config();
  cfg.n_samples = 50;
  CHECK_THROWS_AS(quarter_bound_test(cfg), Error);
  cfg.n_samples = 100;
  cfg.d = 3;
  CHECK_THROWS_AS(quarter_bound_test(cfg), Error);
}

TEST_CASE("asymmetric kernels are rejected where symmetry is assumed") {
  MCConfig cfg = small_config();
  cfg.kernel_spec = kernel_preset("odd_gaussian");
  try {
    quarter_bound_test(cfg);
    FAIL("expected kernel-invalid");
  } catch (const Error& e) {
    CHECK(e.code() == "kernel-invalid");
  }
}

TEST_CASE("crossing curve couples levels within one sample") {
  MCConfig cfg = small_config();
  cfg.R_list = {2.0, 3.0};
  cfg.levels = {-0.2, 0.0, 0.2};
  const MCResult res = crossing_curve(cfg);
  CHECK(res.experiment == "crossing_curve");
  CHECK(res.coupling_violations == 0);
  // one estimate per (R, level)
  CHECK(res.estimates.size() == 6);
  CHECK(crossing_curve(cfg).artifacts_digest == res.artifacts_digest);

  MCConfig bad = cfg;
  bad.levels = {0.2, -0.2};
  CHECK_THROWS_AS(crossing_curve(bad), Error);
}

TEST_CASE("fkg of an event with itself is its bernoulli variance") {
  MCConfig cfg = small_config();
  const EventSpec a = dagger_event(1.0, {0.0, 1.0, 0.0});
  const MCResult res = fkg_test(cfg, a, a);
  CHECK(res.experiment == "fkg");
  CHECK(res.all_pass());
  double cov = 0.0, p = 0.0;
  for (const auto& e : res.estimates) {
    if (e.name == "cov") cov = e.value;
    if (e.name == "p_a") p = e.value;
  }
  CHECK(cov == doctest::Approx(p * (1.0 - p)).epsilon(1e-12));
}

TEST_CASE("fkg guards") {
  MCConfig cfg = small_config();
  const EventSpec a = dagger_event(1.0);
  CHECK_THROWS_AS(fkg_test(cfg, a, a, true, false), Error);
  cfg.kernel_spec = kernel_preset("odd_gaussian");
  try {
    fkg_test(cfg, a, a);
    FAIL("expected kernel-invalid");
  } catch (const Error& e) {
    CHECK(e.code() == "kernel-invalid");
  }
}

TEST_CASE("circuit scan guards") {
  MCConfig cfg = small_config();
  cfg.L_list = {1, 2};
  CHECK_THROWS_AS(circuit_scan(cfg), Error);
  cfg.L_list = {2, 4};
  cfg.r_list = {1.0};
  // outer radius 4 exceeds half the 6.4 torus
  try {
    circuit_scan(cfg);
    FAIL("expected geometry-out-of-bounds");
  } catch (const Error& e) {
    CHECK(e.code() == "geometry-out-of-bounds");
  }
}

TEST_CASE("circuit scan is monotone-coupled in the outer radius") {
  MCConfig cfg = small_config();
  cfg.side_factor = 16.0;
  cfg.r_list = {1.0};
  cfg.L_list = {2, 4};
  cfg.levels = {0.3};
  const MCResult res = circuit_scan(cfg);
  CHECK(res.experiment == "circuit_scan");
  CHECK(res.estimates.size() == 2);
  CHECK(res.checks.size() == 1);
  CHECK(circuit_scan(cfg).artifacts_digest == res.artifacts_digest);
}

TEST_CASE("audit counts zero violations honestly and fails loudly when seeded") {
  MCConfig cfg = small_config();
  cfg.side_factor = 5.0;
  cfg.gluing_L = 2;
  const MCResult clean = implication_audit(cfg);
  CHECK(clean.experiment == "audit");
  CHECK(clean.loop_to_cross_violations == 0);
  CHECK(clean.gluing_violations == 0);
  CHECK(implication_audit(cfg).artifacts_digest == clean.artifacts_digest);

  setenv("TORUSPERC_AUDIT_FAULT", "1", 1);
  const MCResult faulty = implication_audit(cfg);
  unsetenv("TORUSPERC_AUDIT_FAULT");
  CHECK(faulty.loop_to_cross_violations + faulty.gluing_violations > 0);
  CHECK_FALSE(faulty.all_pass());

  MCConfig bad = cfg;
  bad.side_factor = 4.0;
  CHECK_THROWS_AS(implication_audit(bad), Error);
  bad.side_factor = 5.5;
  CHECK_THROWS_AS(implication_audit(bad), Error);
  bad = cfg;
  bad.gluing_L = 1;
  CHECK_THROWS_AS(implication_audit(bad), Error);
}
