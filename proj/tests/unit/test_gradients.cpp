#include "doctest.h"
#include "helpers.hpp"

#include "ddgda/bench.hpp"
#include "ddgda/errors.hpp"
#include "ddgda/gradients.hpp"

#include <cmath>

using namespace ddgda;
using testing::scalar;

namespace {

Sample at(double z) { return Sample{scalar(z), std::nullopt}; }
Mat m1(double a) { return Mat::Constant(1, 1, a); }

} // namespace

TEST_CASE("x plug-in gradient on the quadratic benchmark") {
  const auto p = make_quadratic_sc();
  // z at its mean 4x - y reproduces the true gradient -8x + 5y.
  CHECK(g_x_plugin(p.loss, m1(4.0), scalar(1.0), scalar(0.0), at(4.0))[0] == -8.0);
  CHECK(g_x_plugin(p.loss, m1(4.0), scalar(0.0), scalar(0.0), at(0.0))[0] == 0.0);
  // Zero Jacobian estimate: bias 4 = |0 - 4| * |grad_z l|.
  CHECK(g_x_plugin(p.loss, m1(0.0), scalar(1.0), scalar(0.0), at(4.0))[0] == -4.0);
}

TEST_CASE("y plug-in gradient on the quadratic benchmark") {
  const auto p = make_quadratic_sc();
  CHECK(g_y_plugin(p.loss, m1(-1.0), scalar(1.0), scalar(0.0), at(4.0))[0] == 5.0);
  CHECK(g_y_plugin(p.loss, m1(-1.0), scalar(0.0), scalar(0.0), at(0.0))[0] == 0.0);
  CHECK(g_y_plugin(p.loss, m1(-1.0), scalar(0.0), scalar(1.0), at(-1.0))[0] == -3.0);
}

TEST_CASE("plug-in gradient rejects a mis-sized Jacobian") {
  const auto p = make_quadratic_sc();
  CHECK_THROWS_AS(g_x_plugin(p.loss, Mat::Zero(2, 1), scalar(1.0), scalar(0.0), at(4.0)),
                  InvalidArgument);
}

TEST_CASE("minibatch averaging") {
  const std::vector<Sample> one{at(2.5)};
  const SampleGradient ident = [](const Sample &s) { return s.z; };
  CHECK(minibatch(ident, one)[0] == 2.5);
  const std::vector<Sample> pair{at(3.0), at(-3.0)};
  CHECK(minibatch(ident, pair)[0] == 0.0);
  CHECK_THROWS_AS(minibatch(ident, std::vector<Sample>{}), InvalidArgument);
}

TEST_CASE("fused minibatch equals the separate means bitwise") {
  const auto p = make_election();
  Rng rng(3);
  const auto batch = sample(p.truth, p.init.x, p.init.y, 37, rng);
  const auto J = jacobians(p.truth);
  Partials work;
  const auto fused = minibatch_plugin(p.loss, J, p.init.x, p.init.y, batch, work);
  const auto gx = minibatch(
      [&](const Sample &s) { return g_x_plugin(p.loss, J.Jx, p.init.x, p.init.y, s); }, batch);
  const auto gy = minibatch(
      [&](const Sample &s) { return g_y_plugin(p.loss, J.Jy, p.init.x, p.init.y, s); }, batch);
  CHECK(fused.gx == gx);
  CHECK(fused.gy == gy);
}

TEST_CASE("minibatch mean under the true map") {
  const auto p = make_quadratic_sc();
  const auto J = jacobians(p.truth);
  Rng rng(4);
  const std::size_t M = 10000;
  const auto batch = sample(p.truth, scalar(1.0), scalar(0.0), M, rng);
  const Vec g = minibatch(
      [&](const Sample &s) { return g_x_plugin(p.loss, J.Jx, scalar(1.0), scalar(0.0), s); },
      batch);
  const double bound = std::sqrt(1.0 + 16.0) * 1.0;
  CHECK(std::abs(g[0] + 8.0) <= 5.0 * bound / std::sqrt(double(M)));
}

TEST_CASE("true gradient") {
  const auto q = make_quadratic_sc();
  const auto g = true_grad(q, scalar(1.0), scalar(0.0));
  CHECK(g.gx[0] == doctest::Approx(-8.0));
  CHECK(g.gy[0] == doctest::Approx(5.0));
  CHECK(g.closed_form);
  const auto o = true_grad(q, scalar(0.0), scalar(0.0));
  CHECK(o.gx[0] == 0.0);
  CHECK(o.gy[0] == 0.0);
  const auto s = true_grad(make_pl_sine(), scalar(0.0), scalar(0.0));
  CHECK(s.gx[0] == 0.0);
  CHECK(s.gy[0] == 0.0);
}

TEST_CASE("true gradient of the sine benchmark at (10, 10)") {
  // L = 2(x + sin x)(x + 2y) - 4y^2 - 12 sin^2 y, so
  // grad_x L = 2(1 + cos x)(x + 2y) + 2(x + sin x).
  const double x = 10.0, y = 10.0;
  const double gx = 2.0 * (1.0 + std::cos(x)) * (x + 2.0 * y) + 2.0 * (x + std::sin(x));
  const double gy = 4.0 * (x + std::sin(x)) - 8.0 * y - 12.0 * std::sin(2.0 * y);
  const auto g = true_grad(make_pl_sine(), scalar(x), scalar(y));
  CHECK(g.gx[0] == doctest::Approx(gx).epsilon(1e-13));
  CHECK(g.gy[0] == doctest::Approx(gy).epsilon(1e-13));
}

TEST_CASE("naive expectation on the quadratic benchmark") {
  const auto n = expected_naive(make_quadratic_sc(), scalar(1.0), scalar(0.0));
  CHECK(n.gx[0] == doctest::Approx(-4.0));
  CHECK(n.gy[0] == doctest::Approx(4.0));
}
