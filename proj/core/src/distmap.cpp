#include "ddgda/distmap.hpp"

#include "ddgda/errors.hpp"
#include "ddgda/keyvalue.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace ddgda {

namespace {

void check_dims(const LocationScaleMap &map, Eigen::Index nx, Eigen::Index ny) {
  if (nx != map.n() || ny != map.m())
    throw InvalidArgument("distribution map expects x of length " + std::to_string(map.n()) +
                          " and y of length " + std::to_string(map.m()) + ", got " +
                          std::to_string(nx) + " and " + std::to_string(ny));
}

void draw_one(const LocationScaleMap &map, const Vec &base, Rng &rng, Sample &s) {
  s.z = base;
  if (map.has_exo()) {
    ExoDraw draw = map.exo_sampler(rng);
    if (draw.offset.size() != map.d())
      throw InvalidArgument("exogenous sampler returned an offset of the wrong length");
    s.z += draw.offset;
    s.theta = std::move(draw.theta);
  } else {
    s.theta.reset();
  }
  for (Eigen::Index k = 0; k < map.d(); ++k)
    s.z[k] += map.noise_std[k] * rng.normal();
}

} // namespace

LocationScaleMap LocationScaleMap::make(Mat A, Mat B, Vec noise_mean, Vec noise_std) {
  LocationScaleMap map;
  map.A = std::move(A);
  map.B = std::move(B);
  map.noise_mean = std::move(noise_mean);
  map.noise_std = std::move(noise_std);
  map.validate();
  return map;
}

void LocationScaleMap::validate() const {
  const auto rows = A.rows();
  if (B.rows() != rows || noise_mean.size() != rows || noise_std.size() != rows)
    throw InvalidArgument("distribution map: A, B, noise_mean and noise_std need matching rows");
  if (!A.allFinite() || !B.allFinite() || !noise_mean.allFinite() || !noise_std.allFinite())
    throw InvalidArgument("distribution map: entries must be finite");
  if ((noise_std.array() < 0.0).any())
    throw InvalidArgument("distribution map: noise_std must be nonnegative");
  if (exo_offset_mean.size() != 0 && exo_offset_mean.size() != rows)
    throw InvalidArgument("distribution map: exo_offset_mean has the wrong length");
}

Vec LocationScaleMap::mean_outcome(const Eigen::Ref<const Vec> &x,
                                   const Eigen::Ref<const Vec> &y) const {
  check_dims(*this, x.size(), y.size());
  Vec mean = A * x + B * y + noise_mean;
  if (exo_offset_mean.size() == d())
    mean += exo_offset_mean;
  return mean;
}

std::vector<Sample> sample(const LocationScaleMap &map, const Eigen::Ref<const Vec> &x,
                           const Eigen::Ref<const Vec> &y, std::size_t count, Rng &rng) {
  std::vector<Sample> out;
  sample_into(map, x, y, count, rng, out);
  return out;
}

void sample_into(const LocationScaleMap &map, const Eigen::Ref<const Vec> &x,
                 const Eigen::Ref<const Vec> &y, std::size_t count, Rng &rng,
                 std::vector<Sample> &out) {
  check_dims(map, x.size(), y.size());
  if (count == 0)
    throw InvalidArgument("sample: count must be at least 1");
  const Vec base = map.A * x + map.B * y + map.noise_mean;
  out.resize(count);
  for (auto &s : out)
    draw_one(map, base, rng, s);
}

// ---------------------------------------------------------------------------

MapEstimate::MapEstimate(Eigen::Index d, Eigen::Index n, Eigen::Index m, double ridge)
    : A_hat_(Mat::Zero(d, n)), B_hat_(Mat::Zero(d, m)), c_hat_(Vec::Zero(d)),
      S_(Mat::Zero(n + m + 1, n + m + 1)), R_(Mat::Zero(d, n + m + 1)),
      W0_(Mat::Zero(d, n + m + 1)), ridge_(ridge) {
  if (d < 1 || n < 1 || m < 1)
    throw InvalidArgument("map estimate: dimensions must be positive");
  if (!(ridge > 0.0) || !std::isfinite(ridge))
    throw InvalidArgument("map estimate: ridge must be positive");
}

MapEstimate MapEstimate::zero(Eigen::Index d, Eigen::Index n, Eigen::Index m, double ridge) {
  return MapEstimate(d, n, m, ridge);
}

MapEstimate MapEstimate::seeded(const LocationScaleMap &truth, double ridge) {
  truth.validate();
  MapEstimate est(truth.d(), truth.n(), truth.m(), ridge);
  est.W0_ << truth.A, truth.B, truth.noise_mean;
  est.resolve();
  return est;
}

double MapEstimate::effective_ridge() const {
  return ridge_ * (1.0 + S_.trace() / static_cast<double>(p()));
}

void MapEstimate::absorb(const Eigen::Ref<const Vec> &x, const Eigen::Ref<const Vec> &y,
                         const Eigen::Ref<const Vec> &z) {
  if (x.size() != n() || y.size() != m() || z.size() != d())
    throw InvalidArgument("map estimate: observation has the wrong dimensions");
  if (!x.allFinite() || !y.allFinite() || !z.allFinite())
    throw NumericError("map estimate: non-finite observation");
  Vec u(p());
  u << x, y, 1.0;
  S_.noalias() += u * u.transpose();
  R_.noalias() += z * u.transpose();
  ++count_;
}

void MapEstimate::absorb_repeated(const Eigen::Ref<const Vec> &x,
                                  const Eigen::Ref<const Vec> &y,
                                  const Eigen::Ref<const Vec> &z_sum, std::uint64_t times) {
  if (x.size() != n() || y.size() != m() || z_sum.size() != d())
    throw InvalidArgument("map estimate: observation has the wrong dimensions");
  if (!x.allFinite() || !y.allFinite() || !z_sum.allFinite())
    throw NumericError("map estimate: non-finite observation");
  Vec u(p());
  u << x, y, 1.0;
  S_.noalias() += static_cast<double>(times) * (u * u.transpose());
  R_.noalias() += z_sum * u.transpose();
  count_ += times;
}

Mat MapEstimate::solve_coefficients() const {
  const double lambda = effective_ridge();
  Mat G = S_;
  G.diagonal().array() += lambda;
  Eigen::LDLT<Mat> ldlt(G);
  const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
  if (ldlt.info() != Eigen::Success || !(rcond > 1e-15) || !ldlt.isPositive())
    throw SingularityError("map estimate: normal equations are singular despite the ridge term",
                           rcond > 0.0 ? 1.0 / rcond : INFINITY);
  const Mat rhs = (R_ + lambda * W0_).transpose();
  Mat W = ldlt.solve(rhs).transpose();
  if (!W.allFinite())
    throw NumericError("map estimate: non-finite coefficients");
  return W;
}

void MapEstimate::resolve() { unpack(solve_coefficients()); }

void MapEstimate::unpack(const Mat &W) {
  A_hat_ = W.leftCols(n());
  B_hat_ = W.middleCols(n(), m());
  c_hat_ = W.col(n() + m());
}

void ols_update_inplace(MapEstimate &est, const Eigen::Ref<const Vec> &x,
                        const Eigen::Ref<const Vec> &y, const std::vector<Sample> &batch) {
  if (batch.empty())
    throw InvalidArgument("ols_update: empty batch");
  // All samples share the regressor, so the batch enters S as a scaled
  // outer product and R through the summed outcomes.
  Vec zsum = Vec::Zero(est.d());
  for (const auto &s : batch) {
    if (s.z.size() != est.d())
      throw InvalidArgument("ols_update: sample has the wrong dimension");
    if (!s.z.allFinite())
      throw NumericError("ols_update: non-finite sample");
    zsum += s.z;
  }
  est.absorb_repeated(x, y, zsum, batch.size());
  est.resolve();
}

MapEstimate ols_update(MapEstimate est, const Eigen::Ref<const Vec> &x,
                       const Eigen::Ref<const Vec> &y, const std::vector<Sample> &batch) {
  ols_update_inplace(est, x, y, batch);
  return est;
}

Jacobians jacobians(const LocationScaleMap &map) { return {map.A, map.B}; }

Jacobians jacobians(const MapEstimate &est) { return {est.A_hat(), est.B_hat()}; }

EstimationError estimation_error(const MapEstimate &est, const LocationScaleMap &truth) {
  if (est.d() != truth.d() || est.n() != truth.n() || est.m() != truth.m())
    throw InvalidArgument("estimation_error: estimate and map dimensions differ");
  return {(est.A_hat() - truth.A).norm(), (est.B_hat() - truth.B).norm()};
}

// ---------------------------------------------------------------------------

namespace {

Vec row_major(const Mat &a) {
  Vec out(a.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out[k++] = a(i, j);
  return out;
}

Mat from_row_major(const Vec &v, Eigen::Index rows, Eigen::Index cols, const char *key) {
  if (v.size() != rows * cols)
    throw InvalidArgument(std::string("map document: '") + key + "' needs " +
                          std::to_string(rows * cols) + " entries, got " +
                          std::to_string(v.size()));
  Mat a(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      a(i, j) = v[k++];
  return a;
}

} // namespace

std::string to_key_value(const LocationScaleMap &map) {
  map.validate();
  KeyValueDoc doc;
  doc.set("d", static_cast<std::int64_t>(map.d()));
  doc.set("n", static_cast<std::int64_t>(map.n()));
  doc.set("m", static_cast<std::int64_t>(map.m()));
  doc.set("A", row_major(map.A));
  doc.set("B", row_major(map.B));
  doc.set("noise_mean", map.noise_mean);
  doc.set("noise_std", map.noise_std);
  return "# location-scale map: z = A x + B y + xi, matrices row-major\n" + doc.str();
}

LocationScaleMap map_from_key_value(std::string_view text) {
  const auto doc = KeyValueDoc::parse(text);
  const auto d = doc.get_int("d");
  const auto n = doc.get_int("n");
  const auto m = doc.get_int("m");
  if (d < 1 || n < 1 || m < 1)
    throw InvalidArgument("map document: d, n, m must be positive");
  auto A = from_row_major(doc.get_vector("A"), d, n, "A");
  auto B = from_row_major(doc.get_vector("B"), d, m, "B");
  auto mean = doc.get_vector("noise_mean");
  auto std = doc.get_vector("noise_std");
  return LocationScaleMap::make(std::move(A), std::move(B), std::move(mean), std::move(std));
}

} // namespace ddgda
