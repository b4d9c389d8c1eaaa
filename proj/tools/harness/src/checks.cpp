#include "ddgda/harness/checks.hpp"

#include "ddgda/bench.hpp"
#include "ddgda/errors.hpp"
#include "ddgda/gradients.hpp"
#include "ddgda/harness/output.hpp"
#include "ddgda/metrics.hpp"
#include "ddgda/random.hpp"
#include "ddgda/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace ddgda::harness {

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Context {
  bool flip_jacobian = false;

  ProblemInstance quadratic(double noise_std = 1.0) const {
    auto p = make_quadratic_sc(noise_std);
    if (flip_jacobian)
      p.truth.A = -p.truth.A;
    return p;
  }
};

struct Check {
  const char *module;
  const char *name;
  std::function<Outcome(const Context &)> run;
  /// Documented disagreement between a stated constant and the benchmark.
  bool expected_fail = false;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Vec random_vec(Rng &rng, Eigen::Index n, double scale) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = scale * rng.normal();
  return v;
}

double uniform(Rng &rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::vector<ConstraintSet> sample_sets() {
  Vec lo(3), hi(3), c(3);
  lo << -1.0, 0.0, -2.0;
  hi << 2.0, 0.5, -1.0;
  c << 1.0, 2.0, 3.0;
  return {ConstraintSet::unconstrained(3), ConstraintSet::box(lo, hi),
          ConstraintSet::simplex(3), ConstraintSet::ball(c, 2.0)};
}

// ---------------------------------------------------------------------------
// core

Outcome core_idempotent(const Context &) {
  Rng rng(11);
  for (const auto &set : sample_sets())
    for (int k = 0; k < 200; ++k) {
      const Vec p = project(set, random_vec(rng, 3, 5.0));
      const Vec pp = project(set, p);
      if (pp != p)
        return {false, std::string(set.name()) + ": second projection moved the point"};
    }
  return {true, "4 sets x 200 vectors, bitwise"};
}

Outcome core_nonexpansive(const Context &) {
  Rng rng(12);
  double worst = 0.0;
  for (const auto &set : sample_sets())
    for (int k = 0; k < 200; ++k) {
      const Vec u = random_vec(rng, 3, 5.0), v = random_vec(rng, 3, 5.0);
      const double ratio = (project(set, u) - project(set, v)).norm() / (u - v).norm();
      worst = std::max(worst, ratio);
    }
  return {worst <= 1.0 + 1e-12, "max ratio " + fmt(worst)};
}

Outcome core_simplex_outputs(const Context &) {
  Rng rng(13);
  double worst_sum = 0.0, min_entry = 0.0;
  for (int dim : {1, 2, 5, 40})
    for (int k = 0; k < 200; ++k) {
      const Vec p = project(ConstraintSet::simplex(dim), random_vec(rng, dim, 3.0));
      worst_sum = std::max(worst_sum, std::abs(p.sum() - 1.0));
      min_entry = std::min(min_entry, p.minCoeff());
    }
  return {worst_sum <= 1e-12 && min_entry >= 0.0,
          "max |sum - 1| " + fmt(worst_sum) + ", min entry " + fmt(min_entry)};
}

Outcome core_box_diameter(const Context &) {
  const double D = ConstraintSet::box(1, -10.0, 10.0).diameter();
  return {D == 20.0, "D = " + fmt(D)};
}

// ---------------------------------------------------------------------------
// distmap

Outcome distmap_determinism(const Context &) {
  ElectionOptions o;
  const auto p = make_election(o);
  Rng a(5), b(5);
  const auto s1 = sample(p.truth, p.init.x, p.init.y, 500, a);
  const auto s2 = sample(p.truth, p.init.x, p.init.y, 500, b);
  for (std::size_t i = 0; i < s1.size(); ++i)
    if (s1[i].z != s2[i].z || *s1[i].theta != *s2[i].theta)
      return {false, "sample " + std::to_string(i) + " differs"};
  return {a.draws() == b.draws(), "500 election samples, " + std::to_string(a.draws()) +
                                      " engine draws each"};
}

Outcome distmap_first_moment(const Context &ctx) {
  const auto p = ctx.quadratic();
  const std::size_t M = 100000;
  Rng rng(21);
  double worst = 0.0;
  for (auto [x, y] : {std::pair{1.0, 1.0}, {-3.0, 2.0}, {0.5, -4.0}}) {
    const Vec xv = Vec::Constant(1, x), yv = Vec::Constant(1, y);
    const auto batch = sample(p.truth, xv, yv, M, rng);
    double sum = 0.0;
    for (const auto &s : batch)
      sum += s.z[0];
    const double err = std::abs(sum / M - p.truth.mean_outcome(xv, yv)[0]);
    worst = std::max(worst, err / (p.truth.noise_std[0] / std::sqrt(double(M))));
  }
  return {worst <= 5.0, "max deviation " + fmt(worst) + " standard errors"};
}

Outcome distmap_exact_recovery(const Context &) {
  Rng rng(31);
  Mat A = Mat::Zero(2, 2), B = Mat::Zero(2, 1);
  for (Eigen::Index i = 0; i < A.size(); ++i)
    A.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < B.size(); ++i)
    B.data()[i] = rng.normal();
  Vec mean(2);
  mean << 0.3, -0.7;
  const auto truth = LocationScaleMap::make(A, B, mean, Vec::Zero(2));
  auto est = MapEstimate::zero(2, 2, 1, 1e-9);
  // p = n + m + 1 = 4 affinely independent probes.
  const double probes[4][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (const auto &q : probes) {
    const Vec x = Vec{{q[0], q[1]}}, y = Vec{{q[2]}};
    ols_update_inplace(est, x, y, sample(truth, x, y, 1, rng));
  }
  const auto err = estimation_error(est, truth);
  const double c_err = (est.c_hat() - mean).norm();
  return {err.ex <= 1e-6 && err.ey <= 1e-6 && c_err <= 1e-6,
          "ex " + fmt(err.ex) + ", ey " + fmt(err.ey) + ", c " + fmt(c_err)};
}

Outcome distmap_error_decay(const Context &ctx) {
  // The decay bound holds in expectation; a single path wanders, so the
  // checkpoints are averaged over independent replications first.
  const auto p = ctx.quadratic();
  const int reps = 100;
  std::vector<double> checkpoints(100, 0.0);
  for (int r = 0; r < reps; ++r) {
    auto est = MapEstimate::zero(1, 1, 1);
    Rng rng(derive_seed(41, 2 * r)), probe(derive_seed(41, 2 * r + 1));
    // Iterate-like probes: an AR(1) path hovering near the origin.
    Vec x = Vec::Constant(1, 5.0), y = Vec::Constant(1, 5.0);
    for (int t = 1; t <= 10000; ++t) {
      ols_update_inplace(est, x, y, sample(p.truth, x, y, 1, rng));
      x[0] = 0.95 * x[0] + 0.3 * probe.normal();
      y[0] = 0.95 * y[0] + 0.3 * probe.normal();
      if (t % 100 == 0) {
        const auto e = estimation_error(est, p.truth);
        checkpoints[t / 100 - 1] += (e.ex + e.ey) / reps;
      }
    }
  }
  std::vector<double> windows;
  for (std::size_t w = 0; w + 10 <= checkpoints.size(); w += 10) {
    double s = 0.0;
    for (std::size_t k = w; k < w + 10; ++k)
      s += checkpoints[k];
    windows.push_back(s / 10.0);
  }
  for (std::size_t k = 1; k < windows.size(); ++k)
    if (windows[k] > windows[k - 1])
      return {false, "window " + std::to_string(k) + " rose from " + fmt(windows[k - 1]) +
                         " to " + fmt(windows[k])};
  return {true, "window means " + fmt(windows.front()) + " -> " + fmt(windows.back())};
}

Outcome distmap_sufficient_statistics(const Context &) {
  Rng rng(51);
  Mat A(3, 2), B(3, 2);
  for (Eigen::Index i = 0; i < A.size(); ++i) {
    A.data()[i] = rng.normal();
    B.data()[i] = rng.normal();
  }
  const auto truth = LocationScaleMap::make(A, B, Vec::Zero(3), Vec::Ones(3));
  auto est = MapEstimate::zero(3, 2, 2);
  for (int k = 0; k < 300; ++k) {
    const Vec x = random_vec(rng, 2, 2.0), y = random_vec(rng, 2, 2.0);
    ols_update_inplace(est, x, y, sample(truth, x, y, 3, rng));
  }
  // Independent solve of W (S + lambda I) = R + lambda W0 with full-pivot LU.
  Mat G = est.S();
  G.diagonal().array() += est.effective_ridge();
  const Mat W =
      Eigen::FullPivLU<Mat>(G.transpose()).solve((est.R() + est.effective_ridge() * est.prior()).transpose()).transpose();
  Mat stored(3, 5);
  stored << est.A_hat(), est.B_hat(), est.c_hat();
  const double diff = (W - stored).cwiseAbs().maxCoeff();
  return {diff <= 1e-10, "max |difference| " + fmt(diff)};
}

// ---------------------------------------------------------------------------
// gradients

Outcome gradients_unbiased(const Context &ctx) {
  const auto p = ctx.quadratic();
  const auto J = jacobians(p.truth);
  Rng rng(61);
  double worst = 0.0;
  for (auto [x0, y0] : {std::pair{1.0, 0.0}, {2.0, -1.0}, {-3.0, 4.0}}) {
    const Vec x = Vec::Constant(1, x0), y = Vec::Constant(1, y0);
    const auto batch = sample(p.truth, x, y, 100000, rng);
    double sx = 0, sy = 0, qx = 0, qy = 0;
    for (const auto &s : batch) {
      const double gx = g_x_plugin(p.loss, J.Jx, x, y, s)[0];
      const double gy = g_y_plugin(p.loss, J.Jy, x, y, s)[0];
      sx += gx;
      sy += gy;
      qx += gx * gx;
      qy += gy * gy;
    }
    const double n = double(batch.size());
    const double mx = sx / n, my = sy / n;
    const double sex = std::sqrt((qx / n - mx * mx) / n), sey = std::sqrt((qy / n - my * my) / n);
    const auto truth = true_grad(p, x, y);
    worst = std::max({worst, std::abs(mx - truth.gx[0]) / sex, std::abs(my - truth.gy[0]) / sey});
  }
  return {worst <= 5.0, "max deviation " + fmt(worst) + " standard errors"};
}

// Gradient of the exact expected objective by central differences.
std::pair<double, double> fd_grad(const ProblemInstance &p, double x, double y) {
  const double h = 1e-6;
  auto L = [&](double a, double b) {
    return p.closed.objective(Vec::Constant(1, a), Vec::Constant(1, b));
  };
  return {(L(x + h, y) - L(x - h, y)) / (2 * h), (L(x, y + h) - L(x, y - h)) / (2 * h)};
}

// sup over the box of E||grad_z l||, on a 41 x 41 grid of exact means.
double measured_L1(const ProblemInstance &p) {
  double sup = 0.0;
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) {
      const Vec x = Vec::Constant(1, -10.0 + 0.5 * i), y = Vec::Constant(1, -10.0 + 0.5 * j);
      sup = std::max(sup, p.closed.mean_partials(p.truth, x, y).gz.norm());
    }
  return sup;
}

Outcome gradients_bias_bound(const Context &ctx) {
  const auto p = ctx.quadratic();
  const double L1 = measured_L1(p);
  const auto J = jacobians(p.truth);
  Rng rng(71);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double x0 = uniform(rng, -10, 10), y0 = uniform(rng, -10, 10);
    const Vec x = Vec::Constant(1, x0), y = Vec::Constant(1, y0);
    const double dx = uniform(rng, -2, 2), dy = uniform(rng, -2, 2);
    // E[G] under the plug-in Jacobian, from the exact expected partials.
    const auto mean = p.closed.mean_partials(p.truth, x, y);
    const double Gx = mean.gx[0] + (J.Jx(0, 0) + dx) * mean.gz[0];
    const double Gy = mean.gy[0] + (J.Jy(0, 0) + dy) * mean.gz[0];
    const auto [fx, fy] = fd_grad(p, x0, y0);
    const double slack = 1e-6 * (1.0 + std::abs(fx) + std::abs(fy));
    worst = std::max({worst, std::abs(Gx - fx) - L1 * std::abs(dx) - slack,
                      std::abs(Gy - fy) - L1 * std::abs(dy) - slack});
  }
  return {worst <= 0.0, "L1 = " + fmt(L1) + ", max excess over the bound " + fmt(worst)};
}

Outcome gradients_variance_bound(const Context &ctx) {
  const auto p = ctx.quadratic();
  const double sigma = p.profile.sigma;
  Rng rng(81);
  const Vec x = Vec::Constant(1, 2.0), y = Vec::Constant(1, 1.0);
  std::string detail;
  bool ok = true;
  for (std::size_t M : {std::size_t{1}, std::size_t{10}, std::size_t{100}}) {
    Jacobians J = jacobians(p.truth);
    J.Jx(0, 0) += 0.5;
    J.Jy(0, 0) -= 0.3;
    const int reps = 1000;
    std::vector<double> gx(reps), gy(reps);
    Partials work;
    std::vector<Sample> batch;
    for (int r = 0; r < reps; ++r) {
      sample_into(p.truth, x, y, M, rng, batch);
      const auto g = minibatch_plugin(p.loss, J, x, y, batch, work);
      gx[r] = g.gx[0];
      gy[r] = g.gy[0];
    }
    auto var = [](const std::vector<double> &v) {
      double m = 0, q = 0;
      for (double a : v)
        m += a;
      m /= double(v.size());
      for (double a : v)
        q += (a - m) * (a - m);
      return q / double(v.size() - 1);
    };
    const double bx = 1.1 * (1.0 + J.Jx.squaredNorm()) * sigma * sigma / double(M);
    const double by = 1.1 * (1.0 + J.Jy.squaredNorm()) * sigma * sigma / double(M);
    const double vx = var(gx), vy = var(gy);
    ok = ok && vx <= bx && vy <= by;
    detail += "M=" + std::to_string(M) + ": " + fmt(vx) + "<=" + fmt(bx) + ", " + fmt(vy) +
              "<=" + fmt(by) + "; ";
  }
  return {ok, detail};
}

Outcome gradients_fd_consistency(const Context &) {
  const std::vector<std::string> names = problem_names();
  double worst = 0.0;
  std::string where;
  for (const auto &name : names) {
    const auto p = make_problem(name);
    Rng rng(91);
    for (int k = 0; k < 20; ++k) {
      const Vec x = random_vec(rng, p.n, 1.5);
      Vec y = random_vec(rng, p.m, 1.5);
      if (!p.y_set.is_unconstrained())
        y = project(p.y_set, y.cwiseAbs());
      Sample s = sample(p.truth, x, y, 1, rng).front();
      Partials g;
      p.loss.partials(x, y, s, g);
      const double h = 1e-6;
      auto rel = [](double fd, double an) { return std::abs(fd - an) / std::max(1.0, std::abs(an)); };
      for (Eigen::Index i = 0; i < p.n; ++i) {
        Vec a = x, b = x;
        a[i] += h;
        b[i] -= h;
        const double fd = (p.loss.eval(a, y, s) - p.loss.eval(b, y, s)) / (2 * h);
        if (rel(fd, g.gx[i]) > worst) {
          worst = rel(fd, g.gx[i]);
          where = name + " grad_x";
        }
      }
      for (Eigen::Index i = 0; i < p.m; ++i) {
        Vec a = y, b = y;
        a[i] += h;
        b[i] -= h;
        const double fd = (p.loss.eval(x, a, s) - p.loss.eval(x, b, s)) / (2 * h);
        if (rel(fd, g.gy[i]) > worst) {
          worst = rel(fd, g.gy[i]);
          where = name + " grad_y";
        }
      }
      for (Eigen::Index i = 0; i < p.d; ++i) {
        Sample a = s, b = s;
        a.z[i] += h;
        b.z[i] -= h;
        const double fd = (p.loss.eval(x, y, a) - p.loss.eval(x, y, b)) / (2 * h);
        if (rel(fd, g.gz[i]) > worst) {
          worst = rel(fd, g.gz[i]);
          where = name + " grad_z";
        }
      }
    }
  }
  return {worst <= 1e-6, "max relative error " + fmt(worst) + (where.empty() ? "" : " (" + where + ")")};
}

// ---------------------------------------------------------------------------
// solvers

Outcome solvers_sample_budget(const Context &) {
  const auto p = make_quadratic_sc();
  RunConfig cfg;
  cfg.T = 50;
  cfg.M = 7;
  cfg.eta_x = 1e-3;
  cfg.eta_y = 1e-2;
  cfg.metrics = false;
  const auto a = run(p, cfg);
  cfg.algo = Algorithm::AASGDA;
  const auto b = run(p, cfg);
  cfg.literal_three_draw = true;
  const auto c = run(p, cfg);
  const bool ok = a.samples_drawn == 350 && a.estimator_updates == 50 &&
                  b.samples_drawn == 100 && b.estimator_updates == 50 &&
                  b.estimator_samples == 50 && c.samples_drawn == 150;
  return {ok, "asgda " + std::to_string(a.samples_drawn) + ", aasgda " +
                  std::to_string(b.samples_drawn) + ", aasgda literal " +
                  std::to_string(c.samples_drawn)};
}

Outcome solvers_estimator_lag(const Context &) {
  // Noiseless, so every sample equals the mean outcome.
  const auto p = make_quadratic_sc(0.0);
  RunConfig cfg;
  cfg.T = 2;
  cfg.M = 4;
  cfg.eta_x = 0.1;
  cfg.eta_y = 0.1;
  cfg.init = DecisionPair{Vec::Constant(1, 1.0), Vec::Constant(1, 0.0)};
  cfg.metrics = false;
  const auto est0 = MapEstimate::zero(1, 1, 1);
  const auto tr = asgda_run(p, p.truth, est0, cfg);

  // Step 0 with the zero estimate: G_x = -z = -4.
  const double x1 = 1.0 + 0.1 * 4.0;
  const double y1 = std::clamp(0.0 + 0.1 * (4.0 - 0.0), -10.0, 10.0);
  // Step 1 with the estimate built from the step-0 batch only.
  std::vector<Sample> batch(4, Sample{Vec::Constant(1, 4.0), std::nullopt});
  const auto est1 = ols_update(est0, Vec::Constant(1, 1.0), Vec::Constant(1, 0.0), batch);
  const double z1 = 4.0 * x1 - y1;
  const double gz = -x1 + y1;
  const double x2 = x1 - 0.1 * (-z1 + est1.A_hat()(0, 0) * gz);
  const double e1 = std::abs(tr.records[1].x[0] - x1);
  const double e2 = std::abs(tr.records[2].x[0] - x2);
  return {e1 <= 1e-12 && e2 <= 1e-12, "step errors " + fmt(e1) + ", " + fmt(e2)};
}

Outcome solvers_feasibility(const Context &) {
  std::size_t checked = 0;
  {
    const auto p = make_quadratic_sc();
    RunConfig cfg;
    cfg.T = 2000;
    cfg.M = 5;
    cfg.eta_x = 1e-3;
    cfg.eta_y = 1.0;
    cfg.metrics = false;
    for (const auto &r : run(p, cfg).records) {
      if (!p.y_set.contains(r.y))
        return {false, "quadratic_sc: y left the box at t = " + std::to_string(r.t)};
      ++checked;
    }
  }
  {
    const auto p = make_strategic_classification();
    RunConfig cfg;
    cfg.T = 200;
    cfg.M = 5;
    cfg.eta_x = 1e-3;
    cfg.eta_y = 0.1;
    cfg.metrics = false;
    for (const auto &r : run(p, cfg).records) {
      if (!p.y_set.contains(r.y))
        return {false, "strategic: y left the simplex at t = " + std::to_string(r.t)};
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " iterates inside the set"};
}

Outcome solvers_contraction(const Context &) {
  // Maximize -(1/2)(y - c)' H (y - c) over [-1, 1]^2 with H = diag(mu, ell);
  // the solution is the clamp of c.
  const double mu = 3.0, ell = 12.0;
  const double eta = 1.0 / (2.0 * (mu + ell));
  Vec c(2);
  c << 2.0, 0.3;
  const auto set = ConstraintSet::box(2, -1.0, 1.0);
  const Vec ystar = project(set, c);
  const Vec h = Vec{{mu, ell}};
  const double rho = 1.0 - mu / (2.0 * (mu + ell));
  const double cb = 1.0 / (2.0 * (mu + ell) * (mu + ell)) + 1.0 / (2.0 * mu * ell);
  const double db = 1.0 / (4.0 * (mu + ell) * (mu + ell));

  Rng rng(101);
  double worst = -1e300;
  int tested = 0;
  for (auto [C, D] : {std::pair{0.0, 1.0}, {0.5, 0.0}, {1.0, 4.0}, {3.0, 9.0}}) {
    Vec bias(2);
    bias << C / std::sqrt(2.0), -C / std::sqrt(2.0);
    const double sd = std::sqrt(D / 2.0); // total variance D over two coordinates
    const int reps = 1000, steps = 30;
    std::vector<Vec> y(reps, Vec{{-1.0, -1.0}});
    for (int t = 0; t < steps; ++t) {
      double before = 0.0;
      for (const auto &v : y)
        before += (v - ystar).squaredNorm();
      before /= reps;
      std::vector<double> after(reps);
      for (int r = 0; r < reps; ++r) {
        Vec g = -(h.array() * (y[r] - c).array()).matrix() + bias;
        g[0] += sd * rng.normal();
        g[1] += sd * rng.normal();
        y[r] = project(set, y[r] + eta * g);
        after[r] = (y[r] - ystar).squaredNorm();
      }
      double m = 0.0, q = 0.0;
      for (double a : after)
        m += a;
      m /= reps;
      for (double a : after)
        q += (a - m) * (a - m);
      const double se = std::sqrt(q / (reps - 1) / reps);
      const double bound = rho * before + cb * C * C + db * D;
      worst = std::max(worst, (m - bound) / std::max(se, 1e-300));
      ++tested;
    }
  }
  return {worst <= 3.0, std::to_string(tested) + " steps, max excess " + fmt(worst) +
                            " standard errors (negative = slack)"};
}

Outcome solvers_determinism(const Context &) {
  const auto p = make_election();
  RunConfig cfg;
  cfg.algo = Algorithm::AASGDA;
  cfg.T = 300;
  cfg.eta_x = 1e-3;
  cfg.eta_y = 1e-2;
  cfg.stride = 50;
  cfg.seed = 99;
  const auto a = trace_csv(run(p, cfg), p.n, p.m, cfg.stride, cfg.T);
  const auto b = trace_csv(run(p, cfg), p.n, p.m, cfg.stride, cfg.T);
  return {a == b, std::to_string(a.size()) + " bytes compared"};
}

// Noiseless ASGDA with the true map on the quadratic benchmark; returns
// the first t > after at which Phi rose, or 0.
std::uint64_t first_phi_rise(const DecisionPair &init, std::uint64_t after, std::string &detail) {
  const auto p = make_quadratic_sc(0.0);
  RunConfig cfg;
  cfg.T = 3000;
  cfg.M = 1;
  cfg.schedule = Schedule::NC_SC;
  cfg.stride = 1;
  cfg.learn_map = false;
  cfg.init = init;
  const auto tr = asgda_run(p, p.truth, MapEstimate::seeded(p.truth), cfg);
  for (std::size_t t = after + 1; t < tr.records.size(); ++t)
    if (tr.records[t].phi > tr.records[t - 1].phi) {
      detail = "Phi rose at t = " + std::to_string(t) + " (" + fmt(tr.records[t - 1].phi) +
               " -> " + fmt(tr.records[t].phi) + ")";
      return t;
    }
  detail = "Phi " + fmt(tr.records[after].phi) + " -> " + fmt(tr.last().phi);
  return 0;
}

Outcome solvers_exact_oracle_monotone(const Context &) {
  // From the default start (5, 5), y needs about 22 contractions of rate
  // 1 - mu eta_y = 0.9 before grad_x L changes sign; Phi rises until then.
  std::string detail;
  const auto p = make_quadratic_sc(0.0);
  const bool ok = first_phi_rise(p.init, 10, detail) == 0;
  return {ok, "default start, transient 10: " + detail};
}

Outcome solvers_exact_oracle_monotone_tracked(const Context &) {
  // Starting on the inner maximizer removes the y transient.
  std::string detail;
  const DecisionPair init{Vec::Constant(1, 5.0), Vec::Constant(1, 25.0 / 3.0)};
  const bool ok = first_phi_rise(init, 0, detail) == 0;
  return {ok, "start (5, y*(5)), no transient: " + detail};
}

// ---------------------------------------------------------------------------
// metrics

double danskin_on(const ProblemInstance &p, double lo, double hi, std::uint64_t seed) {
  double worst = 0.0;
  Rng rng(seed);
  auto f = [&](const Vec &x) { return inner_max(p, x).value; };
  auto g = [&](const Vec &x) { return primal_grad(p, x); };
  for (int k = 0; k < 10; ++k) {
    const Vec x = Vec::Constant(1, uniform(rng, lo, hi));
    worst = std::max(worst, fd_check(f, g, x, 1e-5));
  }
  return worst;
}

Outcome metrics_danskin(const Context &ctx) {
  double w1 = 0.0, w2 = 0.0;
  try {
    w1 = danskin_on(ctx.quadratic(), -6.0, 6.0, 111);
    w2 = danskin_on(make_pl_sine(), -3.0, 3.0, 112);
  } catch (const std::exception &e) {
    return {false, std::string("inner solve failed: ") + e.what()};
  }
  return {w1 <= 1e-4 && w2 <= 1e-4,
          "quadratic_sc " + fmt(w1) + ", pl_sine " + fmt(w2) + " (relative)"};
}

Outcome metrics_phi_closed_form(const Context &ctx) {
  const auto p = ctx.quadratic();
  double worst = 0.0;
  try {
    for (int k = 0; k < 100; ++k) {
      const Vec x = Vec::Constant(1, -8.0 + 16.0 * k / 99.0);
      worst = std::max(worst, std::abs(inner_max(p, x).value - p.closed.phi(x)));
    }
  } catch (const std::exception &e) {
    return {false, std::string("inner solve failed: ") + e.what()};
  }
  return {worst <= 1e-8, "max |error| " + fmt(worst) + " over 100 points"};
}

Outcome metrics_moreau_zero(const Context &ctx) {
  const auto p = ctx.quadratic();
  const double v = moreau_grad(p, Vec::Zero(1), p.profile.ell);
  return {v <= 1e-6, "value " + fmt(v)};
}

Outcome metrics_moreau_value(const Context &ctx) {
  // On [-6, 6] Phi = x^2/6, so prox(3) = 3 * 72/73 and the gradient is 72/73.
  const auto p = ctx.quadratic();
  const double v = moreau_grad(p, Vec::Constant(1, 3.0), 12.0);
  const double err = std::abs(v - 72.0 / 73.0);
  return {err <= 1e-6, "value " + fmt(v) + ", error " + fmt(err)};
}

Outcome metrics_moreau_offset(const Context &ctx) {
  const auto p = ctx.quadratic();
  auto q = p;
  const double c = 7.25;
  auto eval = p.loss.eval;
  q.loss.eval = [eval, c](const Vec &x, const Vec &y, const Sample &s) { return eval(x, y, s) + c; };
  auto obj = p.closed.objective;
  q.closed.objective = [obj, c](const Vec &x, const Vec &y) { return obj(x, y) + c; };
  double worst = 0.0;
  for (double x0 : {-7.0, -2.0, 0.5, 3.0, 6.5}) {
    const Vec x = Vec::Constant(1, x0);
    worst = std::max(worst, std::abs(moreau_grad(p, x, 12.0) - moreau_grad(q, x, 12.0)));
  }
  return {worst <= 1e-6, "max difference " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// bench

Outcome bench_closed_form_mc(const Context &) {
  double worst = 0.0;
  std::string where;
  for (const auto &name : problem_names()) {
    const auto p = make_problem(name);
    Rng rng(121), pts(122);
    for (int k = 0; k < 10; ++k) {
      const Vec x = random_vec(pts, p.n, 1.0);
      Vec y = random_vec(pts, p.m, 1.0);
      if (!p.y_set.is_unconstrained())
        y = project(p.y_set, y.cwiseAbs());
      const auto batch = sample(p.truth, x, y, 100000, rng);
      double s = 0, q = 0;
      for (const auto &b : batch) {
        const double v = p.loss.eval(x, y, b);
        s += v;
        q += v * v;
      }
      const double n = double(batch.size());
      const double mean = s / n;
      const double se = std::sqrt(std::max(q / n - mean * mean, 0.0) / n);
      const double dev = std::abs(mean - p.closed.objective(x, y)) / std::max(se, 1e-12);
      if (dev > worst) {
        worst = dev;
        where = name;
      }
    }
  }
  return {worst <= 5.0, "max deviation " + fmt(worst) + " standard errors (" + where + ")"};
}

double max_hessian_norm(const ProblemInstance &p, double radius, int points) {
  const double h = 1e-4;
  auto L = [&](double x, double y) {
    return p.closed.objective(Vec::Constant(1, x), Vec::Constant(1, y));
  };
  double worst = 0.0;
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      const double x = -radius + 2.0 * radius * i / (points - 1);
      const double y = -radius + 2.0 * radius * j / (points - 1);
      Eigen::Matrix2d H;
      H(0, 0) = (L(x + h, y) - 2 * L(x, y) + L(x - h, y)) / (h * h);
      H(1, 1) = (L(x, y + h) - 2 * L(x, y) + L(x, y - h)) / (h * h);
      H(0, 1) = H(1, 0) =
          (L(x + h, y + h) - L(x + h, y - h) - L(x - h, y + h) + L(x - h, y - h)) / (4 * h * h);
      worst = std::max(worst, Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H)
                                  .eigenvalues()
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  return worst;
}

Outcome bench_smoothness_quadratic(const Context &) {
  const auto p = make_quadratic_sc();
  const double v = max_hessian_norm(p, 10.0, 41);
  return {v <= p.profile.ell, "max ||H|| " + fmt(v) + " vs ell " + fmt(p.profile.ell)};
}

Outcome bench_smoothness_pl_sine(const Context &) {
  const auto p = make_pl_sine();
  const double v = max_hessian_norm(p, 3.0, 101);
  return {v <= p.profile.ell, "max ||H|| over [-3,3]^2 " + fmt(v) + " vs ell " + fmt(p.profile.ell)};
}

Outcome bench_pl_condition(const Context &) {
  const auto p = make_pl_sine();
  const double mu = p.profile.mu;
  int violations = 0;
  double worst_ratio = INFINITY;
  for (int i = 0; i <= 100; ++i) {
    const Vec x = Vec::Constant(1, -3.0 + 0.06 * i);
    const double phi = inner_max(p, x).value;
    for (int j = 0; j <= 100; ++j) {
      const Vec y = Vec::Constant(1, -3.0 + 0.06 * j);
      const double g = true_grad(p, x, y).gy.squaredNorm();
      const double gap = phi - p.closed.objective(x, y);
      if (g < 2.0 * mu * gap - 1e-9)
        ++violations;
      if (gap > 1e-9)
        worst_ratio = std::min(worst_ratio, g / (2.0 * gap));
    }
  }
  return {violations == 0, std::to_string(violations) + " of 10201 grid points violate mu = " +
                               fmt(mu) + "; smallest observed modulus " + fmt(worst_ratio)};
}

const std::vector<Check> &registry() {
  static const std::vector<Check> checks{
      {"core", "project_idempotent", core_idempotent},
      {"core", "project_nonexpansive", core_nonexpansive},
      {"core", "simplex_outputs", core_simplex_outputs},
      {"core", "box_diameter", core_box_diameter},
      {"distmap", "sampler_determinism", distmap_determinism},
      {"distmap", "sampler_first_moment", distmap_first_moment},
      {"distmap", "exact_recovery", distmap_exact_recovery},
      {"distmap", "error_decay_trend", distmap_error_decay},
      {"distmap", "sufficient_statistics", distmap_sufficient_statistics},
      {"gradients", "plugin_unbiased", gradients_unbiased},
      {"gradients", "bias_bound", gradients_bias_bound},
      {"gradients", "variance_bound", gradients_variance_bound},
      {"gradients", "integrand_fd", gradients_fd_consistency},
      {"solvers", "sample_budget", solvers_sample_budget},
      {"solvers", "estimator_lag", solvers_estimator_lag},
      {"solvers", "feasibility", solvers_feasibility},
      {"solvers", "contraction", solvers_contraction},
      {"solvers", "determinism", solvers_determinism},
      {"solvers", "exact_oracle_monotone", solvers_exact_oracle_monotone, true},
      {"solvers", "exact_oracle_monotone_tracked", solvers_exact_oracle_monotone_tracked},
      {"metrics", "danskin", metrics_danskin},
      {"metrics", "phi_closed_form", metrics_phi_closed_form},
      {"metrics", "moreau_zero", metrics_moreau_zero},
      {"metrics", "moreau_value", metrics_moreau_value},
      {"metrics", "moreau_offset", metrics_moreau_offset},
      {"bench", "closed_form_mc", bench_closed_form_mc},
      {"bench", "smoothness_quadratic_sc", bench_smoothness_quadratic},
      {"bench", "smoothness_pl_sine", bench_smoothness_pl_sine, true},
      {"bench", "pl_condition_pl_sine", bench_pl_condition, true},
  };
  return checks;
}

} // namespace

const std::vector<std::string> &check_modules() {
  static const std::vector<std::string> m{"core", "distmap", "gradients", "solvers", "metrics",
                                          "bench"};
  return m;
}

const std::vector<std::string> &known_faults() {
  static const std::vector<std::string> f{"jacobian-sign"};
  return f;
}

std::string_view to_string(CheckStatus s) noexcept {
  switch (s) {
  case CheckStatus::Pass:
    return "pass";
  case CheckStatus::Fail:
    return "FAIL";
  case CheckStatus::ExpectedFail:
    return "xfail";
  case CheckStatus::UnexpectedPass:
    return "XPASS";
  }
  return "?";
}

std::vector<CheckResult> run_checks(const CheckOptions &opts) {
  const auto &mods = check_modules();
  if (!opts.only.empty() && std::find(mods.begin(), mods.end(), opts.only) == mods.end())
    throw InvalidArgument("unknown module '" + opts.only +
                          "'; valid: core, distmap, gradients, solvers, metrics, bench");
  Context ctx;
  if (!opts.inject_fault.empty()) {
    if (opts.inject_fault != "jacobian-sign")
      throw InvalidArgument("unknown fault '" + opts.inject_fault + "'; valid: jacobian-sign");
    ctx.flip_jacobian = true;
  }

  std::vector<CheckResult> results;
  for (const auto &c : registry()) {
    if (!opts.only.empty() && opts.only != c.module)
      continue;
    CheckResult r{c.module, c.name, CheckStatus::Fail, "", 0.0};
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run(ctx);
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.detail = o.detail;
    if (c.expected_fail)
      r.status = o.pass ? CheckStatus::UnexpectedPass : CheckStatus::ExpectedFail;
    else
      r.status = o.pass ? CheckStatus::Pass : CheckStatus::Fail;
    results.push_back(std::move(r));
  }
  return results;
}

bool all_ok(const std::vector<CheckResult> &results) {
  return std::none_of(results.begin(), results.end(), [](const CheckResult &r) {
    return r.status == CheckStatus::Fail || r.status == CheckStatus::UnexpectedPass;
  });
}

} // namespace ddgda::harness
