#include "ddgda/solvers.hpp"

#include "ddgda/errors.hpp"
#include "ddgda/gradients.hpp"
#include "ddgda/metrics.hpp"
#include "ddgda/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

namespace ddgda {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
  case Algorithm::ASGDA:
    return "asgda";
  case Algorithm::AASGDA:
    return "aasgda";
  case Algorithm::SPD:
    return "spd";
  }
  return "?";
}

std::string_view to_string(Schedule s) noexcept {
  switch (s) {
  case Schedule::Fixed:
    return "fixed";
  case Schedule::NC_SC:
    return "nc_sc";
  case Schedule::NC_C:
    return "nc_c";
  case Schedule::NC_PL:
    return "nc_pl";
  case Schedule::SPD_Dynamic:
    return "spd_dynamic";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  for (auto a : {Algorithm::ASGDA, Algorithm::AASGDA, Algorithm::SPD})
    if (text == to_string(a))
      return a;
  throw InvalidArgument("unknown algorithm '" + std::string(text) +
                        "'; valid names: asgda, aasgda, spd");
}

Schedule parse_schedule(std::string_view text) {
  for (auto s : {Schedule::Fixed, Schedule::NC_SC, Schedule::NC_C, Schedule::NC_PL,
                 Schedule::SPD_Dynamic})
    if (text == to_string(s))
      return s;
  throw InvalidArgument("unknown schedule '" + std::string(text) +
                        "'; valid names: fixed, nc_sc, nc_c, nc_pl, spd_dynamic");
}

void RunConfig::validate() const {
  if (T < 1)
    throw InvalidArgument("run config: T must be at least 1");
  if (M < 1)
    throw InvalidArgument("run config: M must be at least 1");
  if (stride < 1)
    throw InvalidArgument("run config: stride must be at least 1");
  if (!(eta_x >= 0.0) || !(eta_y >= 0.0) || !std::isfinite(eta_x) || !std::isfinite(eta_y))
    throw InvalidArgument("run config: stepsizes must be finite and nonnegative");
  if (!(dither >= 0.0) || !std::isfinite(dither))
    throw InvalidArgument("run config: dither must be finite and nonnegative");
  if (!(divergence_guard > 0.0))
    throw InvalidArgument("run config: divergence guard must be positive");
  if (schedule == Schedule::SPD_Dynamic && !(schedule_a > 0.0))
    throw InvalidArgument("run config: spd_dynamic offset must be positive");
  if (init && !all_finite(*init))
    throw InvalidArgument("run config: init must be finite");
}

std::pair<double, double> stepsizes_nc_sc(const SmoothnessProfile &profile) {
  if (profile.concavity_class != ConcavityClass::StronglyConcave || !(profile.mu > 0.0))
    throw InvalidClass("stepsizes_nc_sc: needs a strongly concave profile with mu > 0");
  const double kappa = profile.ell / profile.mu;
  return {1.0 / (40.0 * (kappa + 1.0) * (kappa + 1.0) * profile.ell),
          1.0 / (2.0 * (profile.ell + profile.mu))};
}

std::pair<double, double> stepsizes_nc_c(std::uint64_t T) {
  const double base = static_cast<double>(T) + 1.0;
  return {std::pow(base, -0.75), std::pow(base, -0.25)};
}

std::pair<double, double> stepsizes_nc_pl(const SmoothnessProfile &profile, std::uint64_t T) {
  if (profile.concavity_class != ConcavityClass::PL || !(profile.mu > 0.0))
    throw InvalidClass("stepsizes_nc_pl: needs a PL profile with mu > 0");
  if (T < 1)
    throw InvalidArgument("stepsizes_nc_pl: T must be at least 1");
  const double kappa = profile.ell / profile.mu;
  const double root = std::sqrt(static_cast<double>(T));
  return {std::min(1.0 / (16.0 * root), 1.0 / (176.0 * profile.ell * kappa * kappa)),
          std::min(11.0 * kappa * kappa / root, 1.0 / profile.ell)};
}

std::pair<double, double> resolve_stepsizes(const RunConfig &cfg, const SmoothnessProfile &p) {
  switch (cfg.schedule) {
  case Schedule::Fixed:
    return {cfg.eta_x, cfg.eta_y};
  case Schedule::NC_SC:
    return stepsizes_nc_sc(p);
  case Schedule::NC_C:
    return stepsizes_nc_c(cfg.T);
  case Schedule::NC_PL:
    return stepsizes_nc_pl(p, cfg.T);
  case Schedule::SPD_Dynamic:
    return {1.0 / cfg.schedule_a, 1.0 / cfg.schedule_a};
  }
  return {cfg.eta_x, cfg.eta_y};
}

bool TraceRecord::has_metrics() const noexcept { return !std::isnan(grad_metric); }

const TraceRecord &Trace::random_iterate() const {
  for (const auto &r : records)
    if (r.t == random_iterate_index)
      return r;
  return records.back();
}

namespace {

// Shared bookkeeping for the three drivers.
class Runner {
public:
  Runner(const ProblemInstance &problem, const LocationScaleMap &truth, const RunConfig &cfg)
      : problem_(problem), truth_(truth), cfg_(cfg) {
    cfg.validate();
    truth.validate();
    if (truth.n() != problem.n || truth.m() != problem.m || truth.d() != problem.d)
      throw InvalidArgument("run: map dimensions disagree with the problem");
    const DecisionPair &start = cfg.init ? *cfg.init : problem.init;
    if (start.x.size() != problem.n || start.y.size() != problem.m)
      throw InvalidArgument("run: init has the wrong dimensions for problem '" + problem.name +
                            "'");
    x = start.x;
    y = start.y;
    std::tie(trace.eta_x, trace.eta_y) = resolve_stepsizes(cfg, problem.profile);
    trace.records.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(cfg.T, 1u << 22)) +
                          1);
  }

  std::pair<double, double> stepsizes(std::uint64_t t) const {
    if (cfg_.schedule == Schedule::SPD_Dynamic) {
      const double eta = 1.0 / (cfg_.schedule_a + static_cast<double>(t));
      return {eta, eta};
    }
    return {trace.eta_x, trace.eta_y};
  }

  /// Append the record for iterate t; returns false once the guard trips.
  bool record(std::uint64_t t, const MapEstimate *est) {
    TraceRecord r;
    r.t = t;
    r.x = x;
    r.y = y;
    r.objective = problem_.closed.objective ? problem_.closed.objective(x, y) : kNaN;
    if (est) {
      const auto err = estimation_error(*est, truth_);
      r.est_err_x = err.ex;
      r.est_err_y = err.ey;
    } else {
      r.est_err_x = r.est_err_y = kNaN;
    }
    r.diverged = !x.allFinite() || !y.allFinite() || x.norm() > cfg_.divergence_guard ||
                 std::abs(r.objective) > cfg_.divergence_guard;
    r.phi = r.grad_metric = r.spd_residual = kNaN;
    if (!r.diverged && cfg_.metrics && (t % cfg_.stride == 0 || t == cfg_.T)) {
      try {
        const auto inner = inner_max(problem_, x);
        r.phi = inner.value;
        r.grad_metric = stationarity(problem_, x);
      } catch (const SolverFailure &) {
        // Left as NaN: the metric is undefined here, not the run.
      }
      if (cfg_.record_spd_residual)
        r.spd_residual = spd_residual(problem_, x, y);
    }
    if (r.diverged)
      trace.diverged = true;
    trace.records.push_back(std::move(r));
    if (cfg_.on_record)
      cfg_.on_record(trace.records.back());
    return !trace.diverged;
  }

  void finish(std::uint64_t seed) {
    const std::uint64_t last = trace.records.back().t;
    if (last >= 1) {
      Rng pick(derive_seed(seed, 2));
      trace.random_iterate_index = 1 + pick.index(last);
    }
  }

  template <typename Step> Trace drive(const MapEstimate *est, Step step) {
    if (!record(0, est)) {
      finish(cfg_.seed);
      return std::move(trace);
    }
    for (std::uint64_t t = 0; t < cfg_.T; ++t) {
      try {
        step(t);
      } catch (const IterationError &) {
        throw;
      } catch (const std::exception &e) {
        throw IterationError(e.what(), t);
      }
      if (!record(t + 1, est))
        break;
    }
    finish(cfg_.seed);
    return std::move(trace);
  }

  // Estimator feed with optional dither: a separate batch drawn at the
  // perturbed regressor, so the regression stays consistent.
  void update_estimate(MapEstimate &est, const Vec &xr, const Vec &yr,
                       const std::vector<Sample> &batch, Rng &dither_rng) {
    if (cfg_.dither > 0.0) {
      Vec xd = xr, yd = yr;
      for (Eigen::Index i = 0; i < xd.size(); ++i)
        xd[i] += cfg_.dither * dither_rng.normal();
      for (Eigen::Index i = 0; i < yd.size(); ++i)
        yd[i] += cfg_.dither * dither_rng.normal();
      sample_into(truth_, xd, yd, batch.size(), dither_rng, dither_batch_);
      ols_update_inplace(est, xd, yd, dither_batch_);
      trace.estimator_samples += dither_batch_.size();
    } else {
      ols_update_inplace(est, xr, yr, batch);
      trace.estimator_samples += batch.size();
    }
    ++trace.estimator_updates;
  }

  const ProblemInstance &problem_;
  const LocationScaleMap &truth_;
  const RunConfig &cfg_;
  Vec x, y;
  Trace trace;
  std::vector<Sample> dither_batch_;
};

} // namespace

Trace asgda_run(const ProblemInstance &problem, const LocationScaleMap &truth,
                const MapEstimate &est0, const RunConfig &cfg) {
  if (cfg.algo != Algorithm::ASGDA)
    throw InvalidArgument("asgda_run: config selects " + std::string(to_string(cfg.algo)));
  if (est0.d() != problem.d || est0.n() != problem.n || est0.m() != problem.m)
    throw InvalidArgument("asgda_run: estimate dimensions disagree with the problem");
  Runner run(problem, truth, cfg);
  MapEstimate est = est0;
  Rng rng(cfg.seed);
  Rng dither_rng(derive_seed(cfg.seed, 1));
  std::vector<Sample> batch;
  Partials work;
  Jacobians J = jacobians(est);
  Vec x_next, y_next;

  return run.drive(&est, [&](std::uint64_t t) {
    const auto [ex, ey] = run.stepsizes(t);
    sample_into(truth, run.x, run.y, cfg.M, rng, batch);
    run.trace.samples_drawn += batch.size();
    const auto g = minibatch_plugin(problem.loss, J, run.x, run.y, batch, work);
    x_next = run.x - ex * g.gx;
    y_next = project(problem.y_set, run.y + ey * g.gy);
    if (cfg.learn_map) {
      run.update_estimate(est, run.x, run.y, batch, dither_rng);
      J = jacobians(est);
    }
    run.x.swap(x_next);
    run.y.swap(y_next);
  });
}

Trace aasgda_run(const ProblemInstance &problem, const LocationScaleMap &truth,
                 const MapEstimate &est0, const RunConfig &cfg) {
  if (cfg.algo != Algorithm::AASGDA)
    throw InvalidArgument("aasgda_run: config selects " + std::string(to_string(cfg.algo)));
  if (est0.d() != problem.d || est0.n() != problem.n || est0.m() != problem.m)
    throw InvalidArgument("aasgda_run: estimate dimensions disagree with the problem");
  Runner run(problem, truth, cfg);
  MapEstimate est = est0;
  Rng rng(cfg.seed);
  Rng dither_rng(derive_seed(cfg.seed, 1));
  std::vector<Sample> zx, zy, zest;
  Partials work;
  Jacobians J = jacobians(est);
  Vec g;

  return run.drive(&est, [&](std::uint64_t t) {
    const auto [ex, ey] = run.stepsizes(t);
    sample_into(truth, run.x, run.y, 1, rng, zx);
    problem.loss.partials(run.x, run.y, zx[0], work);
    g = work.gx;
    g.noalias() += J.Jx.transpose() * work.gz;
    if (!g.allFinite())
      throw NumericError("g_x_plugin: non-finite value");
    run.x -= ex * g;

    sample_into(truth, run.x, run.y, 1, rng, zy);
    problem.loss.partials(run.x, run.y, zy[0], work);
    g = work.gy;
    g.noalias() += J.Jy.transpose() * work.gz;
    if (!g.allFinite())
      throw NumericError("g_y_plugin: non-finite value");
    Vec y_next = run.y + ey * g;
    run.trace.samples_drawn += 2;

    if (cfg.learn_map) {
      if (cfg.literal_three_draw) {
        sample_into(truth, run.x, run.y, 1, rng, zest);
        run.trace.samples_drawn += 1;
        run.update_estimate(est, run.x, run.y, zest, dither_rng);
      } else {
        run.update_estimate(est, run.x, run.y, zy, dither_rng);
      }
      J = jacobians(est);
    }
    // Identity for the unconstrained sets this method targets.
    run.y = project(problem.y_set, y_next);
  });
}

Trace spd_run(const ProblemInstance &problem, const LocationScaleMap &truth,
              const RunConfig &cfg) {
  if (cfg.algo != Algorithm::SPD)
    throw InvalidArgument("spd_run: config selects " + std::string(to_string(cfg.algo)));
  Runner run(problem, truth, cfg);
  Rng rng(cfg.seed);
  std::vector<Sample> batch;
  Partials work;
  Vec x_next, y_next;

  return run.drive(nullptr, [&](std::uint64_t t) {
    const auto [ex, ey] = run.stepsizes(t);
    sample_into(truth, run.x, run.y, cfg.M, rng, batch);
    run.trace.samples_drawn += batch.size();
    const auto g = minibatch_naive(problem.loss, run.x, run.y, batch, work);
    x_next = run.x - ex * g.gx;
    y_next = project(problem.y_set, run.y + ey * g.gy);
    run.x.swap(x_next);
    run.y.swap(y_next);
  });
}

Trace run(const ProblemInstance &problem, const RunConfig &cfg) {
  switch (cfg.algo) {
  case Algorithm::ASGDA:
    return asgda_run(problem, problem.truth, MapEstimate::zero(problem.d, problem.n, problem.m),
                     cfg);
  case Algorithm::AASGDA:
    return aasgda_run(problem, problem.truth,
                      MapEstimate::zero(problem.d, problem.n, problem.m), cfg);
  case Algorithm::SPD:
    return spd_run(problem, problem.truth, cfg);
  }
  throw InvalidArgument("run: unknown algorithm");
}

} // namespace ddgda
