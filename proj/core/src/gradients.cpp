#include "ddgda/gradients.hpp"

#include "ddgda/errors.hpp"

#include <cmath>
#include <string>

namespace ddgda {

Vec LossOracle::grad_x(const Vec &x, const Vec &y, const Sample &s) const {
  Partials p;
  partials(x, y, s, p);
  return p.gx;
}

Vec LossOracle::grad_y(const Vec &x, const Vec &y, const Sample &s) const {
  Partials p;
  partials(x, y, s, p);
  return p.gy;
}

Vec LossOracle::grad_z(const Vec &x, const Vec &y, const Sample &s) const {
  Partials p;
  partials(x, y, s, p);
  return p.gz;
}

void ProblemInstance::validate() const {
  truth.validate();
  if (truth.n() != n || truth.m() != m || truth.d() != d)
    throw InvalidArgument("problem '" + name + "': map dimensions disagree with (n, m, d)");
  if (y_set.dim() != 0 && y_set.dim() != m)
    throw InvalidArgument("problem '" + name + "': constraint set has the wrong dimension");
  if (!loss.eval || !loss.partials)
    throw InvalidArgument("problem '" + name + "': loss oracle is incomplete");
  profile.validate();
  if (profile.concavity_class != ConcavityClass::PL && y_set.is_unconstrained())
    throw InvalidArgument("problem '" + name +
                          "': (strongly) concave problems need a bounded constraint set");
}

namespace {

void check_plugin_dims(const Partials &p, const Mat &J, Eigen::Index out_len) {
  if (J.rows() != p.gz.size() || J.cols() != out_len)
    throw InvalidArgument("plug-in gradient: Jacobian is " + std::to_string(J.rows()) + "x" +
                          std::to_string(J.cols()) + ", expected " +
                          std::to_string(p.gz.size()) + "x" + std::to_string(out_len));
}

void require_finite(const Vec &v, const char *what) {
  if (!v.allFinite())
    throw NumericError(std::string(what) + ": non-finite value");
}

} // namespace

Vec g_x_plugin(const LossOracle &loss, const Mat &est_Jx, const Vec &x, const Vec &y,
               const Sample &s) {
  Partials p;
  loss.partials(x, y, s, p);
  check_plugin_dims(p, est_Jx, p.gx.size());
  Vec g = p.gx;
  g.noalias() += est_Jx.transpose() * p.gz;
  require_finite(g, "g_x_plugin");
  return g;
}

Vec g_y_plugin(const LossOracle &loss, const Mat &est_Jy, const Vec &x, const Vec &y,
               const Sample &s) {
  Partials p;
  loss.partials(x, y, s, p);
  check_plugin_dims(p, est_Jy, p.gy.size());
  Vec g = p.gy;
  g.noalias() += est_Jy.transpose() * p.gz;
  require_finite(g, "g_y_plugin");
  return g;
}

Vec minibatch(const SampleGradient &gfn, std::span<const Sample> batch) {
  if (batch.empty())
    throw InvalidArgument("minibatch: empty batch");
  Vec sum = gfn(batch.front());
  for (std::size_t i = 1; i < batch.size(); ++i)
    sum += gfn(batch[i]);
  return sum / static_cast<double>(batch.size());
}

PluginMeans minibatch_plugin(const LossOracle &loss, const Jacobians &est, const Vec &x,
                             const Vec &y, std::span<const Sample> batch, Partials &work) {
  if (batch.empty())
    throw InvalidArgument("minibatch: empty batch");
  PluginMeans out;
  Vec gx, gy;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    loss.partials(x, y, batch[i], work);
    if (i == 0) {
      check_plugin_dims(work, est.Jx, work.gx.size());
      check_plugin_dims(work, est.Jy, work.gy.size());
    }
    gx = work.gx;
    gx.noalias() += est.Jx.transpose() * work.gz;
    gy = work.gy;
    gy.noalias() += est.Jy.transpose() * work.gz;
    if (i == 0) {
      out.gx = gx;
      out.gy = gy;
    } else {
      out.gx += gx;
      out.gy += gy;
    }
  }
  out.gx /= static_cast<double>(batch.size());
  out.gy /= static_cast<double>(batch.size());
  require_finite(out.gx, "minibatch g_x");
  require_finite(out.gy, "minibatch g_y");
  return out;
}

PluginMeans minibatch_naive(const LossOracle &loss, const Vec &x, const Vec &y,
                            std::span<const Sample> batch, Partials &work) {
  if (batch.empty())
    throw InvalidArgument("minibatch: empty batch");
  PluginMeans out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    loss.partials(x, y, batch[i], work);
    if (i == 0) {
      out.gx = work.gx;
      out.gy = work.gy;
    } else {
      out.gx += work.gx;
      out.gy += work.gy;
    }
  }
  out.gx /= static_cast<double>(batch.size());
  out.gy /= static_cast<double>(batch.size());
  require_finite(out.gx, "minibatch naive g_x");
  require_finite(out.gy, "minibatch naive g_y");
  return out;
}

namespace {

struct MonteCarloMoments {
  Vec mean_x, mean_y, se_x, se_y;
};

// Welford accumulation of per-sample gradients built by `make`.
template <typename Make>
MonteCarloMoments monte_carlo(const ProblemInstance &problem, const Vec &x, const Vec &y,
                              std::uint64_t seed, Make make) {
  const std::size_t budget = problem.mc_budget == 0 ? 1 : problem.mc_budget;
  Rng rng(seed);
  std::vector<Sample> batch;
  sample_into(problem.truth, x, y, budget, rng, batch);
  Partials work;
  Vec mx = Vec::Zero(problem.n), my = Vec::Zero(problem.m);
  Vec sx = Vec::Zero(problem.n), sy = Vec::Zero(problem.m);
  Vec gx, gy;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    problem.loss.partials(x, y, batch[i], work);
    make(work, gx, gy);
    const double k = static_cast<double>(i + 1);
    const Vec dx = gx - mx;
    mx += dx / k;
    sx += dx.cwiseProduct(gx - mx);
    const Vec dy = gy - my;
    my += dy / k;
    sy += dy.cwiseProduct(gy - my);
  }
  const double nb = static_cast<double>(batch.size());
  const double denom = nb > 1 ? nb * (nb - 1) : 1.0;
  return {mx, my, (sx / denom).cwiseSqrt(), (sy / denom).cwiseSqrt()};
}

} // namespace

TrueGradient true_grad(const ProblemInstance &problem, const Vec &x, const Vec &y,
                       std::uint64_t mc_seed) {
  const auto J = jacobians(problem.truth);
  if (problem.closed.mean_partials) {
    const Partials p = problem.closed.mean_partials(problem.truth, x, y);
    TrueGradient out;
    out.gx = p.gx;
    out.gx.noalias() += J.Jx.transpose() * p.gz;
    out.gy = p.gy;
    out.gy.noalias() += J.Jy.transpose() * p.gz;
    out.se_x = Vec::Zero(out.gx.size());
    out.se_y = Vec::Zero(out.gy.size());
    out.closed_form = true;
    return out;
  }
  auto mc = monte_carlo(problem, x, y, mc_seed, [&](const Partials &w, Vec &gx, Vec &gy) {
    gx = w.gx;
    gx.noalias() += J.Jx.transpose() * w.gz;
    gy = w.gy;
    gy.noalias() += J.Jy.transpose() * w.gz;
  });
  return {mc.mean_x, mc.mean_y, mc.se_x, mc.se_y, false};
}

PluginMeans expected_naive(const ProblemInstance &problem, const Vec &x, const Vec &y,
                           std::uint64_t mc_seed) {
  if (problem.closed.mean_partials) {
    const Partials p = problem.closed.mean_partials(problem.truth, x, y);
    return {p.gx, p.gy};
  }
  auto mc = monte_carlo(problem, x, y, mc_seed, [](const Partials &w, Vec &gx, Vec &gy) {
    gx = w.gx;
    gy = w.gy;
  });
  return {mc.mean_x, mc.mean_y};
}

} // namespace ddgda
