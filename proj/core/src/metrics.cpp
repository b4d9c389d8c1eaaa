#include "ddgda/metrics.hpp"

#include "ddgda/errors.hpp"
#include "ddgda/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddgda {

namespace {

double objective(const ProblemInstance &problem, const Vec &x, const Vec &y) {
  if (!problem.closed.objective)
    throw InvalidArgument("problem '" + problem.name + "' has no exact objective");
  return problem.closed.objective(x, y);
}

Vec grad_y(const ProblemInstance &problem, const Vec &x, const Vec &y) {
  return true_grad(problem, x, y).gy;
}

double inner_ell(const ProblemInstance &problem) {
  return problem.inner_ell > 0.0 ? problem.inner_ell : problem.profile.ell;
}

// Norm of the projected-gradient mapping ell * (y - proj(y + g / ell)).
double mapping_residual(const ProblemInstance &problem, const Vec &y, const Vec &g) {
  const double ell = inner_ell(problem);
  return ell * (y - project(problem.y_set, y + g / ell)).norm();
}

InnerSolveReport projected_ascent(const ProblemInstance &problem, const Vec &x, Vec y,
                                  const InnerOptions &opts) {
  const double step = 1.0 / inner_ell(problem);
  InnerSolveReport rep;
  for (int it = 0; it <= opts.max_iter; ++it) {
    const Vec g = grad_y(problem, x, y);
    const Vec next = project(problem.y_set, y + step * g);
    rep.residual = (next - y).norm() / step;
    rep.iterations = it;
    if (rep.residual <= opts.tol) {
      rep.y_star = std::move(y);
      rep.value = objective(problem, x, rep.y_star);
      return rep;
    }
    y = next;
  }
  rep.y_star = std::move(y);
  rep.value = objective(problem, x, rep.y_star);
  throw SolverFailure("inner maximization did not reach tolerance", rep.iterations,
                      rep.residual);
}

// Global scan of a 1-D objective followed by safeguarded Newton steps on
// the derivative. The scan widens while the best point sits on its edge.
InnerSolveReport scan_and_refine(const ProblemInstance &problem, const Vec &x,
                                 const InnerOptions &opts) {
  const int points = std::max(opts.scan_points, 3);
  double radius = problem.pl_scan_radius;
  Vec y(1);
  double best_y = 0.0;
  for (int widen = 0; widen < 20; ++widen) {
    double best = -std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (int k = 0; k < points; ++k) {
      y[0] = -radius + 2.0 * radius * k / (points - 1);
      const double v = objective(problem, x, y);
      if (v > best) {
        best = v;
        best_k = k;
      }
    }
    best_y = -radius + 2.0 * radius * best_k / (points - 1);
    if (best_k != 0 && best_k != points - 1)
      break;
    radius *= 2.0;
  }

  const double spacing = 2.0 * radius / (points - 1);
  const double lo = best_y - spacing, hi = best_y + spacing;
  y[0] = best_y;
  InnerSolveReport rep;
  double g = grad_y(problem, x, y)[0];
  for (int it = 0; it < opts.newton_steps && std::abs(g) > opts.tol; ++it) {
    const double h = 1e-5 * std::max(1.0, std::abs(y[0]));
    Vec yp = y, ym = y;
    yp[0] += h;
    ym[0] -= h;
    const double curv = (grad_y(problem, x, yp)[0] - grad_y(problem, x, ym)[0]) / (2.0 * h);
    double next = curv < 0.0 ? y[0] - g / curv : y[0] + g / inner_ell(problem);
    // Stay inside the scan cell containing the global maximum.
    next = std::clamp(next, lo, hi);
    y[0] = next;
    g = grad_y(problem, x, y)[0];
    rep.iterations = it + 1;
  }
  rep.residual = std::abs(g);
  rep.y_star = y;
  rep.value = objective(problem, x, y);
  if (rep.residual > opts.tol)
    throw SolverFailure("PL inner refinement did not reach tolerance", rep.iterations,
                        rep.residual);
  return rep;
}

} // namespace

InnerSolveReport inner_max(const ProblemInstance &problem, const Vec &x,
                           const InnerOptions &opts) {
  if (x.size() != problem.n)
    throw InvalidArgument("inner_max: x has the wrong length");
  if (problem.closed.y_star) {
    InnerSolveReport rep;
    rep.y_star = problem.closed.y_star(x);
    rep.value = objective(problem, x, rep.y_star);
    rep.residual = mapping_residual(problem, rep.y_star, grad_y(problem, x, rep.y_star));
    return rep;
  }
  if (problem.profile.concavity_class == ConcavityClass::PL) {
    if (problem.m == 1 && problem.y_set.is_unconstrained())
      return scan_and_refine(problem, x, opts);
    return projected_ascent(problem, x, Vec::Zero(problem.m), opts);
  }
  return projected_ascent(problem, x, project(problem.y_set, Vec::Zero(problem.m)), opts);
}

Vec primal_grad(const ProblemInstance &problem, const Vec &x, const InnerOptions &opts) {
  if (problem.profile.concavity_class == ConcavityClass::Concave)
    throw InvalidClass("primal_grad: Phi need not be differentiable for a merely concave problem");
  const auto rep = inner_max(problem, x, opts);
  return true_grad(problem, x, rep.y_star).gx;
}

namespace {

bool phi_differentiable(const ProblemInstance &problem) {
  return problem.profile.concavity_class != ConcavityClass::Concave;
}

// 1-D prox: bracket by doubling, then bisection on the derivative when Phi
// is differentiable, golden-section search on values otherwise.
double prox_1d(const ProblemInstance &problem, double x, double ell, const ProxOptions &opts) {
  auto phi = [&](double w) { return inner_max(problem, Vec::Constant(1, w), opts.inner).value; };
  auto F = [&](double w) { return phi(w) + ell * (w - x) * (w - x); };

  const double fx = F(x);
  double h = 1e-3 * std::max(1.0, std::abs(x));
  int guard = 0;
  while ((F(x - h) < fx || F(x + h) < fx) && guard++ < 200)
    h *= 2.0;
  double lo = x - h, hi = x + h;

  if (phi_differentiable(problem)) {
    auto dF = [&](double w) {
      return primal_grad(problem, Vec::Constant(1, w), opts.inner)[0] + 2.0 * ell * (w - x);
    };
    double flo = dF(lo);
    for (int it = 0; it < opts.max_iter && hi - lo > 1e-14 * std::max(1.0, std::abs(x)); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = dF(mid);
      if (fm == 0.0)
        return mid;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
  double fa = F(a), fb = F(b);
  for (int it = 0; it < opts.max_iter && hi - lo > 1e-12 * std::max(1.0, std::abs(x)); ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = F(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = F(b);
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace

double moreau_grad(const ProblemInstance &problem, const Vec &x, double ell,
                   const ProxOptions &opts) {
  if (x.size() != problem.n)
    throw InvalidArgument("moreau_grad: x has the wrong length");
  if (x.size() > 4)
    throw InvalidArgument("moreau_grad: supported for n <= 4 only");
  if (!(ell > 0.0))
    throw InvalidArgument("moreau_grad: ell must be positive");

  if (x.size() == 1)
    return 2.0 * ell * std::abs(x[0] - prox_1d(problem, x[0], ell, opts));

  if (!phi_differentiable(problem))
    throw InvalidClass("moreau_grad: n > 1 needs a differentiable primal function");
  // Gradient descent on Phi(w) + ell ||w - x||^2, which is ell-strongly convex.
  const double step = 1.0 / (4.0 * ell);
  Vec w = x;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Vec g = primal_grad(problem, w, opts.inner) + 2.0 * ell * (w - x);
    if (g.norm() <= opts.tol * 2.0 * ell)
      return 2.0 * ell * (x - w).norm();
    w -= step * g;
  }
  throw SolverFailure("Moreau prox did not converge", opts.max_iter, 0.0);
}

double fd_check(const std::function<double(const Vec &)> &f,
                const std::function<Vec(const Vec &)> &g, const Vec &x, double h) {
  if (!(h > 0.0))
    throw InvalidArgument("fd_check: step must be positive");
  const Vec gx = g(x);
  double worst = 0.0;
  Vec xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double fd = (f(xp) - f(xm)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - gx[i]));
    xp[i] = xm[i] = x[i];
  }
  return worst / (1.0 + gx.norm());
}

double spd_residual(const ProblemInstance &problem, const Vec &x, const Vec &y) {
  const auto naive = expected_naive(problem, x, y);
  return std::sqrt(naive.gx.squaredNorm() + naive.gy.squaredNorm());
}

double stationarity(const ProblemInstance &problem, const Vec &x, const InnerOptions &opts) {
  if (problem.profile.concavity_class == ConcavityClass::Concave) {
    ProxOptions prox;
    prox.inner = opts;
    return moreau_grad(problem, x, problem.profile.ell, prox);
  }
  return primal_grad(problem, x, opts).norm();
}

} // namespace ddgda
