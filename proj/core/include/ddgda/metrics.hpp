#pragma once

#include "ddgda/core.hpp"
#include "ddgda/problem.hpp"

#include <functional>

namespace ddgda {

struct InnerSolveReport {
  Vec y_star;
  double value = 0.0; // Phi(x)
  int iterations = 0;
  double residual = 0.0;
};

struct InnerOptions {
  double tol = 1e-8;
  int max_iter = 200000;
  /// Global scan used by the 1-D PL solver over [-R, R], R taken from the
  /// problem and doubled while the maximizer sits on the scan boundary.
  int scan_points = 4001;
  int newton_steps = 50;
};

/// Phi(x) = max_y L(x, y) and its maximizer.
///
/// Uses the problem's exact y*(x) when provided. Otherwise: projected
/// gradient ascent with step 1/ell for (strongly) concave problems; a global
/// grid scan plus Newton refinement for 1-D PL problems; plain gradient
/// ascent for multi-dimensional PL problems. The residual is the norm of
/// the projected-gradient mapping.
InnerSolveReport inner_max(const ProblemInstance &problem, const Vec &x,
                           const InnerOptions &opts = {});

/// grad Phi(x) = grad_x L(x, y*(x)).
/// Requires a strongly concave or PL problem (InvalidClass otherwise).
Vec primal_grad(const ProblemInstance &problem, const Vec &x, const InnerOptions &opts = {});

struct ProxOptions {
  double tol = 1e-6;
  int max_iter = 10000;
  InnerOptions inner;
};

/// ||grad Phi_{1/2 ell}(x)|| = 2 ell ||x - prox(x)|| where
/// prox(x) = argmin_w Phi(w) + ell ||w - x||^2. Restricted to n <= 4.
double moreau_grad(const ProblemInstance &problem, const Vec &x, double ell,
                   const ProxOptions &opts = {});

/// Max over coordinates of |central difference of f - g(x)| / (1 + ||g(x)||).
double fd_check(const std::function<double(const Vec &)> &f,
                const std::function<Vec(const Vec &)> &g, const Vec &x, double h);

/// Norm of the stacked expected naive partials (E grad_x l, E grad_y l)
/// under D(x, y): the residual of a performatively stable point. Uses the
/// closed form when present, otherwise `mc_budget` samples.
double spd_residual(const ProblemInstance &problem, const Vec &x, const Vec &y);

/// Stationarity measure reported in traces: ||grad Phi|| for strongly
/// concave and PL problems, the Moreau-envelope gradient for concave ones.
double stationarity(const ProblemInstance &problem, const Vec &x, const InnerOptions &opts = {});

} // namespace ddgda
