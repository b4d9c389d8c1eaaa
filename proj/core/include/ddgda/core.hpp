#pragma once

#include <Eigen/Core>

#include <string_view>
#include <variant>

namespace ddgda {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Minimization variable x (length n) and maximization variable y (length m).
struct DecisionPair {
  Vec x;
  Vec y;
};

bool all_finite(const DecisionPair &p);

// ---------------------------------------------------------------------------
// Constraint sets for the maximization variable.

struct Unconstrained {
  Eigen::Index dim = 0; // 0 accepts any length
};

struct Box {
  Vec lo;
  Vec hi;
};

/// Probability simplex {y >= 0, 1'y = 1}.
struct Simplex {
  Eigen::Index dim = 1;
};

struct Ball {
  Vec center;
  double radius = 1.0;
};

class ConstraintSet {
public:
  using Kind = std::variant<Unconstrained, Box, Simplex, Ball>;

  ConstraintSet() = default;

  static ConstraintSet unconstrained(Eigen::Index dim = 0);
  static ConstraintSet box(Vec lo, Vec hi);
  /// Same scalar interval in every coordinate.
  static ConstraintSet box(Eigen::Index dim, double lo, double hi);
  static ConstraintSet simplex(Eigen::Index dim);
  static ConstraintSet ball(Vec center, double radius);

  const Kind &kind() const noexcept { return kind_; }
  bool is_unconstrained() const noexcept {
    return std::holds_alternative<Unconstrained>(kind_);
  }

  /// Required vector length, or 0 when any length is accepted.
  Eigen::Index dim() const noexcept;

  /// Euclidean diameter; +infinity for Unconstrained.
  double diameter() const;

  bool contains(const Eigen::Ref<const Vec> &v, double tol = 1e-12) const;

  std::string_view name() const noexcept;

private:
  explicit ConstraintSet(Kind k) : kind_(std::move(k)) {}
  Kind kind_{Unconstrained{}};
};

/// Euclidean projection onto `set`.
///
/// Throws InvalidArgument on a length mismatch and NumericError on
/// non-finite input. The simplex case uses sort-and-threshold; entries tied
/// at the threshold are kept in the support.
Vec project(const ConstraintSet &set, const Eigen::Ref<const Vec> &v);

// ---------------------------------------------------------------------------

enum class ConcavityClass { StronglyConcave, Concave, PL };

std::string_view to_string(ConcavityClass c) noexcept;

/// Regularity constants of a problem.
///
/// `ell` is the smoothness of the expected objective, `mu` the strong
/// concavity (or PL) modulus in y. The Lipschitz/moment/variance constants
/// are informational and may be restricted to a stated evaluation box.
struct SmoothnessProfile {
  double ell = 1.0;
  double mu = 0.0;
  double lip_L = 0.0;
  double lip_L0 = 0.0;
  double lip_L1 = 0.0;
  double sigma = 0.0;
  ConcavityClass concavity_class = ConcavityClass::Concave;

  /// Throws InvalidArgument when the invariants do not hold.
  void validate() const;
};

/// kappa_y = ell / mu. Throws UndefinedConditionNumber when mu = 0.
double condition_number(const SmoothnessProfile &profile);

} // namespace ddgda
