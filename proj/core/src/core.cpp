#include "ddgda/core.hpp"

#include "ddgda/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace ddgda {

bool all_finite(const DecisionPair &p) { return p.x.allFinite() && p.y.allFinite(); }

ConstraintSet ConstraintSet::unconstrained(Eigen::Index dim) {
  if (dim < 0)
    throw InvalidArgument("unconstrained: negative dimension");
  return ConstraintSet(Unconstrained{dim});
}

ConstraintSet ConstraintSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw InvalidArgument("box: lo and hi must be nonempty and of equal length");
  if (!lo.allFinite() || !hi.allFinite())
    throw InvalidArgument("box: bounds must be finite");
  if ((lo.array() > hi.array()).any())
    throw InvalidArgument("box: lo must not exceed hi");
  return ConstraintSet(Box{std::move(lo), std::move(hi)});
}

ConstraintSet ConstraintSet::box(Eigen::Index dim, double lo, double hi) {
  return box(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
}

ConstraintSet ConstraintSet::simplex(Eigen::Index dim) {
  if (dim < 1)
    throw InvalidArgument("simplex: dimension must be at least 1");
  return ConstraintSet(Simplex{dim});
}

ConstraintSet ConstraintSet::ball(Vec center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidArgument("ball: radius must be positive and finite");
  if (center.size() == 0 || !center.allFinite())
    throw InvalidArgument("ball: center must be nonempty and finite");
  return ConstraintSet(Ball{std::move(center), radius});
}

Eigen::Index ConstraintSet::dim() const noexcept {
  return std::visit(
      [](const auto &k) -> Eigen::Index {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Unconstrained>)
          return k.dim;
        else if constexpr (std::is_same_v<K, Box>)
          return k.lo.size();
        else if constexpr (std::is_same_v<K, Simplex>)
          return k.dim;
        else
          return k.center.size();
      },
      kind_);
}

double ConstraintSet::diameter() const {
  return std::visit(
      [](const auto &k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Unconstrained>)
          return std::numeric_limits<double>::infinity();
        else if constexpr (std::is_same_v<K, Box>)
          return (k.hi - k.lo).norm();
        else if constexpr (std::is_same_v<K, Simplex>)
          return k.dim == 1 ? 0.0 : std::sqrt(2.0);
        else
          return 2.0 * k.radius;
      },
      kind_);
}

bool ConstraintSet::contains(const Eigen::Ref<const Vec> &v, double tol) const {
  const auto d = dim();
  if (d != 0 && v.size() != d)
    return false;
  return std::visit(
      [&](const auto &k) -> bool {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Unconstrained>)
          return true;
        else if constexpr (std::is_same_v<K, Box>)
          return ((v.array() >= k.lo.array() - tol) && (v.array() <= k.hi.array() + tol)).all();
        else if constexpr (std::is_same_v<K, Simplex>)
          return (v.array() >= -tol).all() && std::abs(v.sum() - 1.0) <= tol * v.size();
        else
          return (v - k.center).norm() <= k.radius * (1.0 + tol);
      },
      kind_);
}

std::string_view ConstraintSet::name() const noexcept {
  switch (kind_.index()) {
  case 0:
    return "unconstrained";
  case 1:
    return "box";
  case 2:
    return "simplex";
  default:
    return "ball";
  }
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Vec project_simplex(const Eigen::Ref<const Vec> &v) {
  const auto m = v.size();
  // Points feasible up to summation rounding are returned unchanged, which
  // makes the projection exactly idempotent.
  if ((v.array() >= 0.0).all() &&
      std::abs(v.sum() - 1.0) <= 4.0 * static_cast<double>(m) * kEps)
    return v;
  std::vector<double> sorted(v.data(), v.data() + m);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  // Largest k with sorted[k-1] - (sum_{i<k} sorted[i] - 1)/k > 0. Ties at the
  // threshold satisfy the test with equality only when they sit exactly on
  // it, and are kept in the support.
  double running = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    running += sorted[static_cast<std::size_t>(k)];
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate >= 0.0)
      tau = candidate;
    else
      break;
  }
  return (v.array() - tau).cwiseMax(0.0).matrix();
}

} // namespace

Vec project(const ConstraintSet &set, const Eigen::Ref<const Vec> &v) {
  const auto d = set.dim();
  if (d != 0 && v.size() != d)
    throw InvalidArgument("project: vector length " + std::to_string(v.size()) +
                          " does not match set dimension " + std::to_string(d));
  if (!v.allFinite())
    throw NumericError("project: non-finite input");

  return std::visit(
      [&](const auto &k) -> Vec {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Unconstrained>)
          return v;
        else if constexpr (std::is_same_v<K, Box>)
          return v.cwiseMax(k.lo).cwiseMin(k.hi);
        else if constexpr (std::is_same_v<K, Simplex>)
          return project_simplex(v);
        else {
          const Vec offset = v - k.center;
          const double r = offset.norm();
          if (r <= k.radius * (1.0 + 8.0 * kEps))
            return v;
          return k.center + offset * (k.radius / r);
        }
      },
      set.kind());
}

std::string_view to_string(ConcavityClass c) noexcept {
  switch (c) {
  case ConcavityClass::StronglyConcave:
    return "strongly_concave";
  case ConcavityClass::Concave:
    return "concave";
  case ConcavityClass::PL:
    return "pl";
  }
  return "unknown";
}

void SmoothnessProfile::validate() const {
  if (!(ell > 0.0))
    throw InvalidArgument("profile: ell must be positive");
  if (mu < 0.0 || lip_L < 0.0 || lip_L0 < 0.0 || lip_L1 < 0.0 || sigma < 0.0)
    throw InvalidArgument("profile: constants must be nonnegative");
  if (mu > 0.0 && mu > ell)
    throw InvalidArgument("profile: mu must not exceed ell");
  if (concavity_class != ConcavityClass::Concave && !(mu > 0.0))
    throw InvalidArgument("profile: strongly concave and PL classes require mu > 0");
}

double condition_number(const SmoothnessProfile &profile) {
  if (!(profile.mu > 0.0))
    throw UndefinedConditionNumber("condition number undefined for mu = 0");
  return profile.ell / profile.mu;
}

} // namespace ddgda
