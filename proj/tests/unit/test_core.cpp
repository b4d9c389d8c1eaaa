#include "doctest.h"
#include "helpers.hpp"

#include "ddgda/core.hpp"
#include "ddgda/errors.hpp"

#include <cmath>
#include <limits>

using namespace ddgda;
using testing::scalar;
using testing::vec;

TEST_CASE("box projection clamps") {
  const auto box = ConstraintSet::box(1, -10.0, 10.0);
  CHECK(project(box, scalar(12.0))[0] == 10.0);
  CHECK(project(box, scalar(-12.0))[0] == -10.0);
  CHECK(project(box, scalar(3.5))[0] == 3.5);
}

TEST_CASE("unconstrained projection is the identity") {
  const Vec v = vec({3.0, -1.0});
  CHECK(project(ConstraintSet::unconstrained(), v) == v);
}

TEST_CASE("simplex projection matches the KKT oracle") {
  // Threshold tau solves sum(max(v - tau, 0)) = 1: all three active gives
  // tau = (1.4 - 1)/3 = 2/15.
  const Vec p = project(ConstraintSet::simplex(3), vec({0.5, 0.7, 0.2}));
  const double tau = 2.0 / 15.0;
  CHECK(p[0] == doctest::Approx(0.5 - tau).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.7 - tau).epsilon(1e-14));
  CHECK(p[2] == doctest::Approx(0.2 - tau).epsilon(1e-14));
  CHECK(std::round(p[0] * 1e4) / 1e4 == 0.3667);
  CHECK(std::round(p[1] * 1e4) / 1e4 == 0.5667);
  CHECK(std::round(p[2] * 1e4) / 1e4 == 0.0667);
  CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
}

TEST_CASE("simplex projection drops entries below the threshold") {
  const Vec p = project(ConstraintSet::simplex(3), vec({2.0, 0.0, -1.0}));
  CHECK(p == vec({1.0, 0.0, 0.0}));
}

TEST_CASE("ball projection scales onto the sphere") {
  const auto ball = ConstraintSet::ball(vec({1.0, 0.0}), 2.0);
  const Vec p = project(ball, vec({5.0, 0.0}));
  CHECK(p[0] == doctest::Approx(3.0));
  CHECK(p[1] == 0.0);
  CHECK(project(ball, vec({1.5, 0.5})) == vec({1.5, 0.5}));
}

TEST_CASE("projection errors") {
  CHECK_THROWS_AS(project(ConstraintSet::box(1, -1.0, 1.0), vec({1.0, 2.0})), InvalidArgument);
  CHECK_THROWS_AS(project(ConstraintSet::simplex(2), vec({1.0, NAN})), NumericError);
  CHECK_THROWS_AS(project(ConstraintSet::unconstrained(),
                          scalar(std::numeric_limits<double>::infinity())),
                  NumericError);
}

TEST_CASE("constraint set construction validates") {
  CHECK_THROWS_AS(ConstraintSet::box(1, 1.0, -1.0), InvalidArgument);
  CHECK_THROWS_AS(ConstraintSet::simplex(0), InvalidArgument);
  CHECK_THROWS_AS(ConstraintSet::ball(vec({0.0}), 0.0), InvalidArgument);
}

TEST_CASE("diameters") {
  CHECK(ConstraintSet::box(1, -10.0, 10.0).diameter() == 20.0);
  CHECK(ConstraintSet::simplex(3).diameter() == doctest::Approx(std::sqrt(2.0)));
  CHECK(ConstraintSet::ball(vec({0.0, 0.0}), 1.5).diameter() == 3.0);
  CHECK(std::isinf(ConstraintSet::unconstrained().diameter()));
}

TEST_CASE("condition number") {
  SmoothnessProfile p;
  p.ell = 12;
  p.mu = 3;
  CHECK(condition_number(p) == 4.0);
  p.ell = 32;
  p.mu = 8;
  CHECK(condition_number(p) == 4.0);
  p.ell = 5;
  p.mu = 5;
  CHECK(condition_number(p) == 1.0);
  p.mu = 0;
  CHECK_THROWS_AS(condition_number(p), UndefinedConditionNumber);
}

TEST_CASE("profile invariants") {
  SmoothnessProfile p;
  p.ell = 1;
  p.mu = 2;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p.mu = 0;
  p.concavity_class = ConcavityClass::PL;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p.concavity_class = ConcavityClass::Concave;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("all_finite") {
  CHECK(all_finite(DecisionPair{vec({1.0}), vec({2.0})}));
  CHECK_FALSE(all_finite(DecisionPair{vec({1.0}), vec({NAN})}));
}
