#pragma once

#include "ddgda/core.hpp"
#include "ddgda/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ddgda {

/// One decision-independent draw: features carried to the loss and an
/// additive shift applied to the outcome.
struct ExoDraw {
  Vec theta;
  Vec offset;
};

using ExoSampler = std::function<ExoDraw(Rng &)>;

/// Ground-truth location-scale distribution map
///   z = A x + B y + offset(theta) + xi,   xi ~ N(noise_mean, diag(noise_std^2)).
///
/// `exo_offset_mean` is the expectation of `offset(theta)` and must be
/// supplied together with `exo_sampler`; it only enters `mean_outcome`.
struct LocationScaleMap {
  Mat A;
  Mat B;
  Vec noise_mean;
  Vec noise_std;
  ExoSampler exo_sampler;
  Vec exo_offset_mean;

  static LocationScaleMap make(Mat A, Mat B, Vec noise_mean, Vec noise_std);

  Eigen::Index d() const noexcept { return A.rows(); }
  Eigen::Index n() const noexcept { return A.cols(); }
  Eigen::Index m() const noexcept { return B.cols(); }
  bool has_exo() const noexcept { return static_cast<bool>(exo_sampler); }

  void validate() const;

  /// E[z] under D(x, y).
  Vec mean_outcome(const Eigen::Ref<const Vec> &x, const Eigen::Ref<const Vec> &y) const;
};

struct Sample {
  Vec z;
  std::optional<Vec> theta;
};

/// Draw `count` i.i.d. outcomes from D(x, y).
///
/// Per sample, in order: one exo draw (when the map has a sampler), then
/// exactly d normals from `rng`, including coordinates with zero std.
std::vector<Sample> sample(const LocationScaleMap &map, const Eigen::Ref<const Vec> &x,
                           const Eigen::Ref<const Vec> &y, std::size_t count, Rng &rng);

/// Same draws as `sample`, written into `out` (resized to `count`) so a
/// solver loop can reuse storage.
void sample_into(const LocationScaleMap &map, const Eigen::Ref<const Vec> &x,
                 const Eigen::Ref<const Vec> &y, std::size_t count, Rng &rng,
                 std::vector<Sample> &out);

/// Running ridge least-squares estimate of [A B c] from regressors
/// u = (x; y; 1) and outcomes z.
///
/// Coefficients W = [A_hat B_hat c_hat] always solve
///   W (S + lambda I) = R + lambda W0,   lambda = ridge * (1 + trace(S) / p),
/// where W0 is the prior center (zero unless seeded from a known map).
class MapEstimate {
public:
  static MapEstimate zero(Eigen::Index d, Eigen::Index n, Eigen::Index m, double ridge = 1e-6);
  /// Estimate centred on `truth`, with no samples absorbed.
  static MapEstimate seeded(const LocationScaleMap &truth, double ridge = 1e-6);

  Eigen::Index d() const noexcept { return A_hat_.rows(); }
  Eigen::Index n() const noexcept { return A_hat_.cols(); }
  Eigen::Index m() const noexcept { return B_hat_.cols(); }
  Eigen::Index p() const noexcept { return S_.rows(); }

  const Mat &A_hat() const noexcept { return A_hat_; }
  const Mat &B_hat() const noexcept { return B_hat_; }
  const Vec &c_hat() const noexcept { return c_hat_; }
  const Mat &S() const noexcept { return S_; }
  const Mat &R() const noexcept { return R_; }
  const Mat &prior() const noexcept { return W0_; }
  double ridge() const noexcept { return ridge_; }
  std::uint64_t count() const noexcept { return count_; }

  /// Ridge weight used by the most recent solve.
  double effective_ridge() const;

  /// Add one observation to (S, R) without re-solving.
  void absorb(const Eigen::Ref<const Vec> &x, const Eigen::Ref<const Vec> &y,
              const Eigen::Ref<const Vec> &z);

  /// Add `times` observations sharing one regressor; `z_sum` is the sum of
  /// their outcomes.
  void absorb_repeated(const Eigen::Ref<const Vec> &x, const Eigen::Ref<const Vec> &y,
                       const Eigen::Ref<const Vec> &z_sum, std::uint64_t times);

  /// Re-solve the normal equations from the stored statistics.
  void resolve();

  /// Coefficients solved from (S, R) from scratch, as [A_hat B_hat c_hat].
  Mat solve_coefficients() const;

private:
  MapEstimate(Eigen::Index d, Eigen::Index n, Eigen::Index m, double ridge);
  void unpack(const Mat &W);

  Mat A_hat_, B_hat_;
  Vec c_hat_;
  Mat S_, R_, W0_;
  double ridge_;
  std::uint64_t count_ = 0;
};

/// Absorb every sample of `batch` at regressor (x, y) and re-solve.
MapEstimate ols_update(MapEstimate est, const Eigen::Ref<const Vec> &x,
                       const Eigen::Ref<const Vec> &y, const std::vector<Sample> &batch);

/// In-place variant used by solver loops.
void ols_update_inplace(MapEstimate &est, const Eigen::Ref<const Vec> &x,
                        const Eigen::Ref<const Vec> &y, const std::vector<Sample> &batch);

struct Jacobians {
  Mat Jx; // d x n
  Mat Jy; // d x m
};

Jacobians jacobians(const LocationScaleMap &map);
Jacobians jacobians(const MapEstimate &est);

struct EstimationError {
  double ex = 0.0; // ||A_hat - A||_F
  double ey = 0.0; // ||B_hat - B||_F
};

EstimationError estimation_error(const MapEstimate &est, const LocationScaleMap &truth);

/// Key-value form with fields d, n, m, A and B (row-major), noise_mean,
/// noise_std. The exogenous sampler is not serialized.
std::string to_key_value(const LocationScaleMap &map);
LocationScaleMap map_from_key_value(std::string_view text);

} // namespace ddgda
