#pragma once

#include "ddgda/core.hpp"
#include "ddgda/distmap.hpp"
#include "ddgda/problem.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ddgda {

enum class Algorithm { ASGDA, AASGDA, SPD };

/// How (eta_x, eta_y) are chosen for a run.
///   Fixed        the configured eta_x, eta_y
///   NC_SC        1/(40 (kappa+1)^2 ell), 1/(2 (ell+mu))
///   NC_C         (T+1)^(-3/4), (T+1)^(-1/4)
///   NC_PL        min{1/(16 sqrt T), 1/(176 ell kappa^2)}, min{11 kappa^2/sqrt T, 1/ell}
///   SPD_Dynamic  eta_t = 1/(a + t) for both variables
enum class Schedule { Fixed, NC_SC, NC_C, NC_PL, SPD_Dynamic };

std::string_view to_string(Algorithm a) noexcept;
std::string_view to_string(Schedule s) noexcept;
Algorithm parse_algorithm(std::string_view text);
Schedule parse_schedule(std::string_view text);

struct TraceRecord;

struct RunConfig {
  Algorithm algo = Algorithm::ASGDA;
  std::uint64_t T = 1000;
  /// Batch size for ASGDA and SPD. AASGDA always draws single samples.
  std::size_t M = 1;
  double eta_x = 0.0;
  double eta_y = 0.0;
  Schedule schedule = Schedule::Fixed;
  /// Offset a of the SPD_Dynamic schedule.
  double schedule_a = 1.0;
  std::uint64_t seed = 1;
  /// Starting point; the problem's default when empty.
  std::optional<DecisionPair> init;
  /// Std of the Gaussian probe added to the estimator's regressor. When
  /// positive, the estimator is fed a separate batch drawn at the dithered
  /// point from its own stream; the iterates never see the probe.
  double dither = 0.0;
  double divergence_guard = 1e8;
  /// Metric evaluation stride. Metrics are also evaluated at t = T.
  std::uint64_t stride = 100;
  /// Compute phi and grad_metric at strided points.
  bool metrics = true;
  /// Also record the performatively-stable residual at strided points.
  bool record_spd_residual = false;
  /// Update the distribution-map estimate. Off keeps est0 fixed.
  bool learn_map = true;
  /// AASGDA: draw a third sample for the estimator instead of reusing z_y.
  bool literal_three_draw = false;
  /// Called with each record as it is appended, before the next iteration
  /// starts; lets a caller persist a partial trace if the run fails.
  std::function<void(const TraceRecord &)> on_record;

  /// Throws InvalidArgument when T = 0, M = 0, a stepsize is negative or
  /// non-finite, or the stride is zero.
  void validate() const;
};

/// Stepsizes resolved from `cfg.schedule` for a given problem; for
/// SPD_Dynamic this is eta_0.
std::pair<double, double> resolve_stepsizes(const RunConfig &cfg, const SmoothnessProfile &p);

/// Nonconvex-strongly-concave prescription. Requires mu > 0 and the
/// StronglyConcave class (InvalidClass otherwise).
std::pair<double, double> stepsizes_nc_sc(const SmoothnessProfile &profile);

/// Nonconvex-concave prescription (T+1)^(-3/4), (T+1)^(-1/4).
std::pair<double, double> stepsizes_nc_c(std::uint64_t T);

/// Nonconvex-PL prescription. Requires mu > 0 and the PL class.
std::pair<double, double> stepsizes_nc_pl(const SmoothnessProfile &profile, std::uint64_t T);

struct TraceRecord {
  std::uint64_t t = 0;
  Vec x;
  Vec y;
  /// NaN on iterations where metrics were not evaluated.
  double phi = 0.0;
  double grad_metric = 0.0;
  double spd_residual = 0.0;
  /// NaN when no estimator is maintained (SPD).
  double est_err_x = 0.0;
  double est_err_y = 0.0;
  double objective = 0.0;
  bool diverged = false;

  bool has_metrics() const noexcept;
};

struct Trace {
  std::vector<TraceRecord> records;
  bool diverged = false;
  /// Index t of the uniformly drawn output iterate, in [1, T'] where T' is
  /// the last completed iteration.
  std::uint64_t random_iterate_index = 0;
  std::uint64_t samples_drawn = 0;
  std::uint64_t estimator_samples = 0;
  std::uint64_t estimator_updates = 0;
  double eta_x = 0.0;
  double eta_y = 0.0;

  const TraceRecord &last() const { return records.back(); }
  const TraceRecord &random_iterate() const;
};

/// Simultaneous plug-in minibatch step, y projected, then the map update
/// with the batch drawn at (x_t, y_t). The step uses the estimate from
/// before the update.
Trace asgda_run(const ProblemInstance &problem, const LocationScaleMap &truth,
                const MapEstimate &est0, const RunConfig &cfg);

/// Alternating single-sample updates: x first, then y at (x_{t+1}, y_t).
/// The map update reuses the y sample unless `literal_three_draw` is set.
Trace aasgda_run(const ProblemInstance &problem, const LocationScaleMap &truth,
                 const MapEstimate &est0, const RunConfig &cfg);

/// Stochastic primal-dual baseline: naive partials, simultaneous update,
/// no map learning.
Trace spd_run(const ProblemInstance &problem, const LocationScaleMap &truth,
              const RunConfig &cfg);

/// Dispatch on cfg.algo; the estimate starts at zero.
Trace run(const ProblemInstance &problem, const RunConfig &cfg);

} // namespace ddgda
