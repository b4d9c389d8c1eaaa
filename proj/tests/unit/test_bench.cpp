#include "doctest.h"
#include "helpers.hpp"

#include "ddgda/bench.hpp"
#include "ddgda/errors.hpp"
#include "ddgda/gradients.hpp"
#include "ddgda/metrics.hpp"

#include <Eigen/LU>

#include <cmath>

using namespace ddgda;
using testing::scalar;

TEST_CASE("quadratic benchmark constants") {
  const auto p = make_quadratic_sc();
  CHECK(p.profile.ell == 12.0);
  CHECK(p.profile.mu == 3.0);
  CHECK(condition_number(p.profile) == 4.0);
  CHECK(p.profile.concavity_class == ConcavityClass::StronglyConcave);
  CHECK(p.y_set.diameter() == 20.0);
}

TEST_CASE("quadratic benchmark primal function is continuous at the breakpoint") {
  const auto p = make_quadratic_sc();
  const double inner = 6.0 * 6.0 / 6.0;
  const double outer = -4.0 * 36.0 + 50.0 * 6.0 - 150.0;
  CHECK(inner == 6.0);
  CHECK(outer == 6.0);
  CHECK(p.closed.phi(scalar(6.0)) == doctest::Approx(6.0));
  CHECK(p.closed.phi(scalar(-6.0)) == doctest::Approx(6.0));
  CHECK(std::abs(primal_grad(p, scalar(0.0))[0]) <= 1e-10);
}

TEST_CASE("sine benchmark constants") {
  const auto p = make_pl_sine();
  CHECK(p.profile.ell == 32.0);
  CHECK(p.profile.mu == 8.0);
  CHECK(condition_number(p.profile) == 4.0);
  CHECK(p.profile.concavity_class == ConcavityClass::PL);
  CHECK(p.y_set.is_unconstrained());
  CHECK(p.closed.objective(scalar(0.0), scalar(0.0)) == 0.0);
  const auto g = true_grad(p, scalar(0.0), scalar(0.0));
  CHECK(g.gx[0] == 0.0);
  CHECK(g.gy[0] == 0.0);
}

TEST_CASE("election dimensions") {
  const auto p = make_election();
  CHECK(p.n == 10);
  CHECK(p.m == 10);
  CHECK(p.d == 20);
  Rng rng(1);
  const auto batch = sample(p.truth, p.init.x, p.init.y, 1, rng);
  REQUIRE(batch.front().theta.has_value());
  CHECK(batch.front().theta.value().size() == 100);
}

TEST_CASE("election without decision dependence has the linear-solve saddle") {
  ElectionOptions o;
  o.sparsity = 0.0;
  const auto p = make_election(o);
  CHECK(p.truth.A.isZero());
  CHECK(p.truth.B.isZero());

  // Stationarity of L = s/2 ||1 - x||^2 - s/2 ||1 - y||^2 + ||x||^2/2 - ||y||^2/2
  // (s = d * theta_var) is the block-diagonal system (1 + s) I v = s 1.
  const double s = o.d * o.theta_var;
  const Eigen::Index n = o.n;
  const Mat H = (1.0 + s) * Mat::Identity(2 * n, 2 * n);
  const Vec saddle = H.fullPivLu().solve(Vec::Constant(2 * n, s));
  const Vec xs = saddle.head(n), ys = saddle.tail(n);

  const auto g = true_grad(p, xs, ys);
  CHECK(g.gx.norm() <= 1e-12);
  CHECK(g.gy.norm() <= 1e-12);
  CHECK((inner_max(p, xs).y_star - ys).norm() <= 1e-10);
  CHECK(primal_grad(p, xs).norm() <= 1e-10);
}

TEST_CASE("election matrices are reproducible from the seed") {
  const auto a = make_election(), b = make_election();
  CHECK(a.truth.A == b.truth.A);
  CHECK(a.truth.B == b.truth.B);
  ElectionOptions o;
  o.seed = 2;
  CHECK(make_election(o).truth.A != a.truth.A);
}

TEST_CASE("strategic classification constants") {
  for (int N : {10, 40}) {
    StrategicOptions o;
    o.N = N;
    const auto p = make_strategic_classification(o);
    CHECK(p.profile.mu == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(p.m == N);
    CHECK(p.profile.concavity_class == ConcavityClass::StronglyConcave);
  }
  StrategicOptions bad;
  bad.N = 1;
  CHECK_THROWS_AS(make_strategic_classification(bad), InvalidArgument);
}

TEST_CASE("strategic features do not move at x = 0") {
  const auto p = make_strategic_classification();
  Rng a(3), b(3);
  const auto at_zero = sample(p.truth, Vec::Zero(p.n), p.init.y, 20, a);
  const auto at_one = sample(p.truth, Vec::Ones(p.n), p.init.y, 20, b);
  const Vec shift = p.truth.A * Vec::Ones(p.n);
  for (std::size_t i = 0; i < at_zero.size(); ++i)
    CHECK((at_one[i].z - at_zero[i].z - shift).norm() <= 1e-12);
  CHECK(p.truth.A.topRows(2).isZero());
}

TEST_CASE("strategic regularizer vanishes to first order at the origin") {
  StrategicOptions with, without;
  without.lambda1 = 0.0;
  const auto p = make_strategic_classification(with);
  const auto q = make_strategic_classification(without);
  const Vec x = Vec::Zero(p.n), y = p.init.y;
  CHECK(p.closed.objective(x, y) == q.closed.objective(x, y));
  CHECK(true_grad(p, x, y).gx == true_grad(q, x, y).gx);
  const Vec x1 = Vec::Constant(p.n, 0.5);
  CHECK(p.closed.objective(x1, y) > q.closed.objective(x1, y));
}

TEST_CASE("problems by name") {
  for (const auto &name : problem_names()) {
    const auto p = make_problem(name);
    CHECK(p.name == name);
    CHECK_NOTHROW(p.validate());
  }
  KeyValueDoc params;
  params.set("noise_std", 0.5);
  CHECK(make_problem("quadratic_sc", params).truth.noise_std[0] == 0.5);
  CHECK_THROWS_AS(make_problem("nope"), InvalidArgument);
}
