#pragma once

#include "ddgda/core.hpp"
#include "ddgda/distmap.hpp"

#include <functional>
#include <string>

namespace ddgda {

/// Partial gradients of the integrand l(x, y, z) at one sample.
struct Partials {
  Vec gx; // n
  Vec gy; // m
  Vec gz; // d
};

/// Integrand l and its partial gradients. `partials` writes into a caller
/// owned workspace so hot loops do not allocate.
struct LossOracle {
  std::function<double(const Vec &x, const Vec &y, const Sample &s)> eval;
  std::function<void(const Vec &x, const Vec &y, const Sample &s, Partials &out)> partials;

  Vec grad_x(const Vec &x, const Vec &y, const Sample &s) const;
  Vec grad_y(const Vec &x, const Vec &y, const Sample &s) const;
  Vec grad_z(const Vec &x, const Vec &y, const Sample &s) const;
};

/// Expected partials E[grad_x l], E[grad_y l], E[grad_z l] under D(x, y).
using MeanPartialsFn =
    std::function<Partials(const LocationScaleMap &map, const Vec &x, const Vec &y)>;

/// Closed forms a benchmark can provide. Every member is optional.
struct ClosedForms {
  /// Exact expected objective L(x, y).
  std::function<double(const Vec &x, const Vec &y)> objective;
  /// Exact expected partials, evaluated under the map passed in.
  MeanPartialsFn mean_partials;
  /// Reference primal function, used to cross-check the inner solver.
  std::function<double(const Vec &x)> phi;
  /// Exact inner maximizer y*(x).
  std::function<Vec(const Vec &x)> y_star;
};

struct ProblemInstance {
  std::string name;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index d = 0;
  LossOracle loss;
  LocationScaleMap truth;
  ConstraintSet y_set;
  SmoothnessProfile profile;
  ClosedForms closed;

  /// Samples used when an expectation has no closed form.
  std::size_t mc_budget = 20000;
  /// Smoothness of L(x, .) alone, used for inner ascent steps; 0 falls
  /// back to profile.ell.
  double inner_ell = 0.0;
  /// Half-width of the global scan used by the 1-D PL inner solver.
  double pl_scan_radius = 20.0;

  /// Default starting point for this benchmark.
  DecisionPair init;

  void validate() const;
};

} // namespace ddgda
