#include "doctest.h"
#include "helpers.hpp"

#include "ddgda/bench.hpp"
#include "ddgda/errors.hpp"
#include "ddgda/solvers.hpp"

#include <cmath>
#include <memory>

using namespace ddgda;
using testing::scalar;

namespace {

SmoothnessProfile profile(double ell, double mu, ConcavityClass c) {
  SmoothnessProfile p;
  p.ell = ell;
  p.mu = mu;
  p.concavity_class = c;
  return p;
}

RunConfig fixed(Algorithm a, std::uint64_t T, double ex, double ey) {
  RunConfig cfg;
  cfg.algo = a;
  cfg.T = T;
  cfg.eta_x = ex;
  cfg.eta_y = ey;
  cfg.metrics = false;
  return cfg;
}

} // namespace

TEST_CASE("strongly concave stepsizes") {
  const auto [ex, ey] = stepsizes_nc_sc(profile(12, 3, ConcavityClass::StronglyConcave));
  CHECK(ex == 1.0 / 12000.0);
  CHECK(ey == 1.0 / 30.0);
  const auto [ux, uy] = stepsizes_nc_sc(profile(1, 1, ConcavityClass::StronglyConcave));
  CHECK(ux == 1.0 / 160.0);
  CHECK(uy == 1.0 / 4.0);
  double prev = INFINITY;
  for (double ell : {1.0, 2.0, 4.0, 8.0, 64.0}) {
    const double e = stepsizes_nc_sc(profile(ell, 1, ConcavityClass::StronglyConcave)).first;
    CHECK(e < prev);
    prev = e;
  }
  CHECK_THROWS_AS(stepsizes_nc_sc(profile(12, 0, ConcavityClass::Concave)), InvalidClass);
  CHECK_THROWS_AS(stepsizes_nc_sc(profile(12, 3, ConcavityClass::PL)), InvalidClass);
}

TEST_CASE("concave stepsizes") {
  auto [a, b] = stepsizes_nc_c(255);
  CHECK(a == 1.0 / 64.0);
  CHECK(b == 0.25);
  std::tie(a, b) = stepsizes_nc_c(0);
  CHECK(a == 1.0);
  CHECK(b == 1.0);
  std::tie(a, b) = stepsizes_nc_c(9999);
  CHECK(a == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(b == doctest::Approx(1e-1).epsilon(1e-14));
}

TEST_CASE("PL stepsizes") {
  const auto [ex, ey] = stepsizes_nc_pl(profile(32, 8, ConcavityClass::PL), 100000);
  CHECK(ex == 1.0 / 90112.0);
  CHECK(ey == 1.0 / 32.0);
  const auto [ux, uy] = stepsizes_nc_pl(profile(1, 1, ConcavityClass::PL), 1);
  CHECK(ux == 1.0 / 176.0);
  CHECK(uy == 1.0);
  const double T = 1e12;
  const auto [lx, ly] = stepsizes_nc_pl(profile(1, 1, ConcavityClass::PL), std::uint64_t(T));
  CHECK(lx == doctest::Approx(1.0 / (16.0 * std::sqrt(T))));
  CHECK(ly == doctest::Approx(11.0 / std::sqrt(T)));
  CHECK_THROWS_AS(stepsizes_nc_pl(profile(1, 0, ConcavityClass::Concave), 10), InvalidClass);
}

TEST_CASE("dynamic SPD schedule starts at 1/a") {
  RunConfig cfg;
  cfg.schedule = Schedule::SPD_Dynamic;
  cfg.schedule_a = 8e4;
  const auto [ex, ey] = resolve_stepsizes(cfg, make_quadratic_sc().profile);
  CHECK(ex == 1.25e-5);
  CHECK(ey == 1.25e-5);
}

TEST_CASE("ASGDA single step with the exact map") {
  const auto p = make_quadratic_sc(0.0);
  auto cfg = fixed(Algorithm::ASGDA, 1, 1.0 / 12000.0, 1.0 / 30.0);
  cfg.learn_map = false;
  const auto tr = asgda_run(p, p.truth, MapEstimate::seeded(p.truth), cfg);
  REQUIRE(tr.records.size() == 2);
  CHECK(tr.records[1].x[0] == doctest::Approx(5.00125).epsilon(1e-14));
  CHECK(tr.records[1].y[0] == doctest::Approx(5.0 + 10.0 / 30.0).epsilon(1e-14));
}

TEST_CASE("zero stepsizes keep the iterates and still learn") {
  const auto p = make_quadratic_sc();
  const auto tr = run(p, fixed(Algorithm::ASGDA, 20, 0.0, 0.0));
  for (const auto &r : tr.records) {
    CHECK(r.x == p.init.x);
    CHECK(r.y == p.init.y);
  }
  CHECK(tr.estimator_updates == 20);
  CHECK(tr.last().est_err_x < tr.records.front().est_err_x);
}

TEST_CASE("AASGDA single step on the sine benchmark") {
  const auto p = make_pl_sine(0.0);
  const double eta_x = 1.10973e-5;
  auto cfg = fixed(Algorithm::AASGDA, 1, eta_x, 0.03125);
  cfg.learn_map = false;
  const auto tr = aasgda_run(p, p.truth, MapEstimate::seeded(p.truth), cfg);
  const double x = 10.0, y = 10.0;
  const double gx = 2.0 * (1.0 + std::cos(x)) * (x + 2.0 * y) + 2.0 * (x + std::sin(x));
  CHECK(tr.records[1].x[0] == doctest::Approx(x - eta_x * gx).epsilon(1e-14));
  // y moves at the updated x.
  const double x1 = x - eta_x * gx;
  const double gy = 4.0 * (x1 + std::sin(x1)) - 8.0 * y - 12.0 * std::sin(2.0 * y);
  CHECK(tr.records[1].y[0] == doctest::Approx(y + 0.03125 * gy).epsilon(1e-14));
}

TEST_CASE("AASGDA stays at the solution without noise") {
  const auto p = make_pl_sine(0.0);
  auto cfg = fixed(Algorithm::AASGDA, 50, 1e-3, 1e-2);
  cfg.init = DecisionPair{scalar(0.0), scalar(0.0)};
  const auto tr = aasgda_run(p, p.truth, MapEstimate::seeded(p.truth), cfg);
  for (const auto &r : tr.records) {
    CHECK(r.x[0] == 0.0);
    CHECK(r.y[0] == 0.0);
  }
}

TEST_CASE("AASGDA draws two samples per iteration") {
  const auto p = make_pl_sine();
  const auto tr = run(p, fixed(Algorithm::AASGDA, 1, 1e-3, 1e-2));
  CHECK(tr.samples_drawn == 2);
  CHECK(tr.estimator_updates == 1);
}

TEST_CASE("SPD single step uses naive partials") {
  const auto p = make_quadratic_sc(0.0);
  auto cfg = fixed(Algorithm::SPD, 1, 1e-5, 1e-5);
  cfg.init = DecisionPair{scalar(1.0), scalar(0.0)};
  const auto tr = spd_run(p, p.truth, cfg);
  CHECK(tr.records[1].x[0] == doctest::Approx(1.00004).epsilon(1e-14));
  CHECK(std::isnan(tr.records[1].est_err_x));
}

TEST_CASE("SPD with zero stepsize is constant") {
  const auto p = make_quadratic_sc();
  const auto tr = spd_run(p, p.truth, fixed(Algorithm::SPD, 10, 0.0, 0.0));
  for (const auto &r : tr.records)
    CHECK(r.x == p.init.x);
}

TEST_CASE("trace structure") {
  const auto p = make_quadratic_sc();
  auto cfg = fixed(Algorithm::ASGDA, 250, 1e-3, 1e-2);
  cfg.metrics = true;
  cfg.stride = 100;
  const auto tr = run(p, cfg);
  REQUIRE(tr.records.size() == 251);
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto &r = tr.records[i];
    CHECK(r.t == i);
    CHECK(r.has_metrics() == (i % 100 == 0 || i == 250));
  }
  CHECK(tr.random_iterate_index >= 1);
  CHECK(tr.random_iterate_index <= 250);
  CHECK(tr.random_iterate().t == tr.random_iterate_index);
  CHECK(tr.samples_drawn == 250);
}

TEST_CASE("divergence stops the run and sets the flag") {
  const auto p = make_quadratic_sc();
  auto cfg = fixed(Algorithm::SPD, 100000, 0.3, 0.3);
  cfg.divergence_guard = 1e6;
  const auto tr = spd_run(p, p.truth, cfg);
  CHECK(tr.diverged);
  CHECK(tr.last().diverged);
  CHECK(tr.last().t < 100000);
}

TEST_CASE("identical configurations give identical traces") {
  const auto p = make_election();
  auto cfg = fixed(Algorithm::ASGDA, 40, 1e-3, 1e-2);
  cfg.M = 3;
  cfg.dither = 0.1;
  const auto a = run(p, cfg), b = run(p, cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].x == b.records[i].x);
    CHECK(a.records[i].y == b.records[i].y);
  }
  cfg.seed = 2;
  CHECK(run(p, cfg).last().x != a.last().x);
}

TEST_CASE("configuration validation") {
  const auto p = make_quadratic_sc();
  CHECK_THROWS_AS(run(p, fixed(Algorithm::ASGDA, 0, 1e-3, 1e-3)), InvalidArgument);
  CHECK_THROWS_AS(run(p, fixed(Algorithm::ASGDA, 5, -1e-3, 1e-3)), InvalidArgument);
  auto cfg = fixed(Algorithm::ASGDA, 5, 1e-3, 1e-3);
  cfg.M = 0;
  CHECK_THROWS_AS(run(p, cfg), InvalidArgument);
  cfg.M = 1;
  cfg.stride = 0;
  CHECK_THROWS_AS(run(p, cfg), InvalidArgument);
}

TEST_CASE("failures inside the loop carry the iteration index") {
  auto p = make_quadratic_sc();
  auto calls = std::make_shared<int>(0);
  const auto inner = p.loss.partials;
  p.loss.partials = [inner, calls](const Vec &x, const Vec &y, const Sample &s, Partials &out) {
    if (++*calls > 3)
      throw NumericError("injected");
    inner(x, y, s, out);
  };
  try {
    run(p, fixed(Algorithm::ASGDA, 10, 1e-3, 1e-3));
    FAIL("expected an IterationError");
  } catch (const IterationError &e) {
    CHECK(e.iteration() == 3);
  }
}

TEST_CASE("algorithm and schedule names round trip") {
  for (auto a : {Algorithm::ASGDA, Algorithm::AASGDA, Algorithm::SPD})
    CHECK(parse_algorithm(to_string(a)) == a);
  for (auto s : {Schedule::Fixed, Schedule::NC_SC, Schedule::NC_C, Schedule::NC_PL,
                 Schedule::SPD_Dynamic})
    CHECK(parse_schedule(to_string(s)) == s);
  CHECK_THROWS_AS(parse_algorithm("sgd"), InvalidArgument);
}
