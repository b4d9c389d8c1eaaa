#include "doctest.h"
#include "helpers.hpp"

#include "ddgda/bench.hpp"
#include "ddgda/errors.hpp"
#include "ddgda/metrics.hpp"

#include <cmath>

using namespace ddgda;
using testing::scalar;

TEST_CASE("inner maximization on the quadratic benchmark") {
  const auto p = make_quadratic_sc();
  auto r = inner_max(p, scalar(3.0));
  CHECK(r.y_star[0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(r.value == doctest::Approx(1.5).epsilon(1e-12));
  r = inner_max(p, scalar(7.0));
  CHECK(r.y_star[0] == 10.0);
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-12));
  r = inner_max(p, scalar(0.0));
  CHECK(std::abs(r.y_star[0]) <= 1e-9);
  CHECK(std::abs(r.value) <= 1e-12);
}

TEST_CASE("primal gradient") {
  const auto q = make_quadratic_sc();
  CHECK(primal_grad(q, scalar(3.0))[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(primal_grad(q, scalar(0.0))[0]) <= 1e-8);
  CHECK(std::abs(primal_grad(make_pl_sine(), scalar(0.0))[0]) <= 1e-8);
}

TEST_CASE("Moreau gradient") {
  const auto p = make_quadratic_sc();
  CHECK(moreau_grad(p, scalar(3.0), 12.0) == doctest::Approx(72.0 / 73.0).epsilon(1e-6));
  CHECK(moreau_grad(p, scalar(0.0), 12.0) <= 1e-6);
  // Phi is even on the quadratic benchmark.
  for (double x : {1.0, 4.5, 7.0})
    CHECK(moreau_grad(p, scalar(x), 12.0) ==
          doctest::Approx(moreau_grad(p, scalar(-x), 12.0)).epsilon(1e-6));
}

TEST_CASE("Moreau gradient argument checks") {
  const auto p = make_quadratic_sc();
  CHECK_THROWS_AS(moreau_grad(p, scalar(0.0), 0.0), InvalidArgument);
  CHECK_THROWS_AS(moreau_grad(make_election(), Vec::Zero(10), 12.0), InvalidArgument);
}

TEST_CASE("finite-difference check") {
  const auto p = make_quadratic_sc();
  const auto f = [&](const Vec &x) { return inner_max(p, x).value; };
  const auto g = [&](const Vec &x) { return primal_grad(p, x); };
  CHECK(fd_check(f, g, scalar(2.0), 1e-5) <= 1e-6);

  const auto lin = [](const Vec &x) { return 3.0 * x[0] - 2.0 * x[1]; };
  const auto lin_g = [](const Vec &) { return testing::vec({3.0, -2.0}); };
  CHECK(fd_check(lin, lin_g, testing::vec({0.7, -1.2}), 1e-4) <= 1e-10);

  const auto zero = [](const Vec &x) { return Vec::Zero(x.size()).eval(); };
  CHECK(fd_check(f, zero, scalar(2.0), 1e-5) > 0.5);
}

TEST_CASE("performatively stable residual") {
  const auto p = make_quadratic_sc();
  CHECK(spd_residual(p, scalar(0.0), scalar(0.0)) == 0.0);
  CHECK(spd_residual(p, scalar(1.0), scalar(0.0)) == doctest::Approx(std::sqrt(32.0)));
}

TEST_CASE("primal gradient needs a differentiable primal function") {
  auto p = make_quadratic_sc();
  p.profile.concavity_class = ConcavityClass::Concave;
  p.profile.mu = 0.0;
  CHECK_THROWS_AS(primal_grad(p, scalar(1.0)), InvalidClass);
  // The concave stationarity measure falls back to the Moreau gradient.
  CHECK(stationarity(p, scalar(3.0)) ==
        doctest::Approx(moreau_grad(p, scalar(3.0), p.profile.ell)).epsilon(1e-9));
}

TEST_CASE("stationarity is the primal gradient norm for strongly concave problems") {
  const auto p = make_quadratic_sc();
  CHECK(stationarity(p, scalar(3.0)) == doctest::Approx(1.0).epsilon(1e-8));
}
