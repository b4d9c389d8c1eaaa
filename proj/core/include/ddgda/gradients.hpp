#pragma once

#include "ddgda/core.hpp"
#include "ddgda/distmap.hpp"
#include "ddgda/problem.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ddgda {

/// grad_x l + Jx_est' grad_z l at one sample.
Vec g_x_plugin(const LossOracle &loss, const Mat &est_Jx, const Vec &x, const Vec &y,
               const Sample &s);

/// grad_y l + Jy_est' grad_z l at one sample.
Vec g_y_plugin(const LossOracle &loss, const Mat &est_Jy, const Vec &x, const Vec &y,
               const Sample &s);

using SampleGradient = std::function<Vec(const Sample &)>;

/// Mean of per-sample gradients, summed left to right.
Vec minibatch(const SampleGradient &gfn, std::span<const Sample> batch);

struct PluginMeans {
  Vec gx;
  Vec gy;
};

/// Both plug-in minibatch means in one pass over the batch.
///
/// Bitwise identical to `minibatch(g_x_plugin...)` and
/// `minibatch(g_y_plugin...)`: each per-sample gradient is formed in full
/// and then added to the running sum in batch order.
PluginMeans minibatch_plugin(const LossOracle &loss, const Jacobians &est, const Vec &x,
                             const Vec &y, std::span<const Sample> batch, Partials &work);

/// Mean of the naive partials (grad_x l, grad_y l), without the map term.
PluginMeans minibatch_naive(const LossOracle &loss, const Vec &x, const Vec &y,
                            std::span<const Sample> batch, Partials &work);

struct TrueGradient {
  Vec gx;
  Vec gy;
  /// Per-coordinate standard errors; zero when computed in closed form.
  Vec se_x;
  Vec se_y;
  bool closed_form = true;
};

/// Gradient of the expected objective under the true map,
///   E[grad l] + J' E[grad_z l].
/// Uses the problem's closed-form expected partials when present and a
/// Monte-Carlo average of `mc_budget` samples otherwise.
TrueGradient true_grad(const ProblemInstance &problem, const Vec &x, const Vec &y,
                       std::uint64_t mc_seed = 0x5eed);

/// Expected naive partials (E grad_x l, E grad_y l) under D(x, y).
PluginMeans expected_naive(const ProblemInstance &problem, const Vec &x, const Vec &y,
                           std::uint64_t mc_seed = 0x5eed);

} // namespace ddgda
