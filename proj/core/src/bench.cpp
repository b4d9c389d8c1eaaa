#include "ddgda/bench.hpp"

#include "ddgda/errors.hpp"
#include "ddgda/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <memory>

namespace ddgda {

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

} // namespace

// ---------------------------------------------------------------------------
// Strongly concave quadratic

ProblemInstance make_quadratic_sc(double noise_std) {
  ProblemInstance p;
  p.name = "quadratic_sc";
  p.n = p.m = p.d = 1;
  p.truth = LocationScaleMap::make(Mat::Constant(1, 1, 4.0), Mat::Constant(1, 1, -1.0),
                                   Vec::Zero(1), Vec::Constant(1, noise_std));
  p.y_set = ConstraintSet::box(1, -10.0, 10.0);

  p.loss.eval = [](const Vec &x, const Vec &y, const Sample &s) {
    return -x[0] * s.z[0] + y[0] * s.z[0] - 0.5 * y[0] * y[0];
  };
  p.loss.partials = [](const Vec &x, const Vec &y, const Sample &s, Partials &out) {
    out.gx.resize(1);
    out.gy.resize(1);
    out.gz.resize(1);
    out.gx[0] = -s.z[0];
    out.gy[0] = s.z[0] - y[0];
    out.gz[0] = -x[0] + y[0];
  };

  // Sup over [-10,10]^2 for the moment and Lipschitz constants.
  p.profile = {.ell = 12.0,
               .mu = 3.0,
               .lip_L = 130.0,
               .lip_L0 = std::sqrt(17.0),
               .lip_L1 = 50.0,
               .sigma = noise_std,
               .concavity_class = ConcavityClass::StronglyConcave};

  p.closed.objective = [](const Vec &x, const Vec &y) {
    return -4.0 * x[0] * x[0] + 5.0 * x[0] * y[0] - 1.5 * y[0] * y[0];
  };
  p.closed.mean_partials = [](const LocationScaleMap &map, const Vec &x, const Vec &y) {
    const double zbar = map.mean_outcome(x, y)[0];
    return Partials{scalar(-zbar), scalar(zbar - y[0]), scalar(-x[0] + y[0])};
  };
  p.closed.phi = [](const Vec &xv) {
    const double x = xv[0];
    if (x < -6.0)
      return -4.0 * x * x - 50.0 * x - 150.0;
    if (x > 6.0)
      return -4.0 * x * x + 50.0 * x - 150.0;
    return x * x / 6.0;
  };
  p.init = {scalar(5.0), scalar(5.0)};
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Nonconvex-PL sine problem

ProblemInstance make_pl_sine(double noise_std) {
  ProblemInstance p;
  p.name = "pl_sine";
  p.n = p.m = p.d = 1;
  p.truth = LocationScaleMap::make(Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 2.0),
                                   Vec::Zero(1), Vec::Constant(1, noise_std));
  p.y_set = ConstraintSet::unconstrained(1);

  p.loss.eval = [](const Vec &x, const Vec &y, const Sample &s) {
    const double sy = std::sin(y[0]);
    return 2.0 * (x[0] + std::sin(x[0])) * s.z[0] - 4.0 * (y[0] * y[0] + 3.0 * sy * sy);
  };
  p.loss.partials = [](const Vec &x, const Vec &y, const Sample &s, Partials &out) {
    out.gx.resize(1);
    out.gy.resize(1);
    out.gz.resize(1);
    out.gx[0] = 2.0 * (1.0 + std::cos(x[0])) * s.z[0];
    out.gy[0] = -8.0 * y[0] - 12.0 * std::sin(2.0 * y[0]);
    out.gz[0] = 2.0 * (x[0] + std::sin(x[0]));
  };

  // Moment and Lipschitz constants are sups over [-10,10]^2.
  p.profile = {.ell = 32.0,
               .mu = 8.0,
               .lip_L = 142.0,
               .lip_L0 = std::sqrt(5.0),
               .lip_L1 = 124.0,
               .sigma = 4.0 * noise_std,
               .concavity_class = ConcavityClass::PL};

  p.closed.objective = [](const Vec &x, const Vec &y) {
    const double sy = std::sin(y[0]);
    return 2.0 * (x[0] + std::sin(x[0])) * (x[0] + 2.0 * y[0]) - 4.0 * y[0] * y[0] -
           12.0 * sy * sy;
  };
  p.closed.mean_partials = [](const LocationScaleMap &map, const Vec &x, const Vec &y) {
    const double zbar = map.mean_outcome(x, y)[0];
    return Partials{scalar(2.0 * (1.0 + std::cos(x[0])) * zbar),
                    scalar(-8.0 * y[0] - 12.0 * std::sin(2.0 * y[0])),
                    scalar(2.0 * (x[0] + std::sin(x[0])))};
  };
  p.init = {scalar(10.0), scalar(10.0)};
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Election prediction

namespace {

Mat sparse_matrix(Rng &rng, int rows, int cols, double sparsity, double scale) {
  Mat a = Mat::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double keep = rng.uniform();
      const double value = scale * rng.normal();
      if (keep < sparsity)
        a(i, j) = value;
    }
  return a;
}

} // namespace

ProblemInstance make_election(const ElectionOptions &o) {
  if (o.n < 1 || o.d < 1)
    throw InvalidArgument("election: n and d must be at least 1");
  if (o.sparsity < 0.0 || o.sparsity > 1.0)
    throw InvalidArgument("election: sparsity must lie in [0, 1]");
  if (o.theta_var < 0.0 || o.omega_var < 0.0)
    throw InvalidArgument("election: variances must be nonnegative");

  const int n = o.n, d = o.d;
  Rng rng(o.seed);
  const Mat A1 = sparse_matrix(rng, d, n, o.sparsity, o.entry_scale);
  const Mat A2 = sparse_matrix(rng, d, n, o.sparsity, o.entry_scale);
  const Mat B1 = sparse_matrix(rng, d, n, o.sparsity, o.entry_scale);
  const Mat B2 = sparse_matrix(rng, d, n, o.sparsity, o.entry_scale);

  ProblemInstance p;
  p.name = "election";
  p.n = p.m = n;
  p.d = 2 * d;

  Mat A(2 * d, n), B(2 * d, n);
  A << A1, A2;
  B << B1, B2;
  p.truth = LocationScaleMap::make(A, B, Vec::Zero(2 * d), Vec::Constant(2 * d, std::sqrt(o.omega_var)));
  const double theta_std = std::sqrt(o.theta_var);
  p.truth.exo_sampler = [n, d, theta_std](Rng &r) {
    ExoDraw draw;
    draw.theta.resize(n * d); // column-major n x d
    for (Eigen::Index k = 0; k < draw.theta.size(); ++k)
      draw.theta[k] = theta_std * r.normal();
    const Eigen::Map<const Mat> theta(draw.theta.data(), n, d);
    const Vec shift = theta.transpose() * Vec::Ones(n);
    draw.offset.resize(2 * d);
    draw.offset << shift, shift;
    return draw;
  };
  p.truth.exo_offset_mean = Vec::Zero(2 * d);
  p.y_set = ConstraintSet::unconstrained(n);

  const double g1 = o.gamma1, g2 = o.gamma2;
  p.loss.eval = [n, d, g1, g2](const Vec &x, const Vec &y, const Sample &s) {
    const Eigen::Map<const Mat> theta(s.theta->data(), n, d);
    const Vec r1 = s.z.head(d) - theta.transpose() * x;
    const Vec r2 = s.z.tail(d) - theta.transpose() * y;
    return 0.5 * (r1.squaredNorm() - r2.squaredNorm()) + 0.5 * g1 * x.squaredNorm() -
           0.5 * g2 * y.squaredNorm();
  };
  p.loss.partials = [n, d, g1, g2](const Vec &x, const Vec &y, const Sample &s, Partials &out) {
    const Eigen::Map<const Mat> theta(s.theta->data(), n, d);
    const Vec r1 = s.z.head(d) - theta.transpose() * x;
    const Vec r2 = s.z.tail(d) - theta.transpose() * y;
    out.gx = -(theta * r1) + g1 * x;
    out.gy = theta * r2 - g2 * y;
    out.gz.resize(2 * d);
    out.gz << r1, -r2;
  };

  // E[theta theta'] = d * theta_var * I.
  const double s = d * o.theta_var;
  const Vec ones = Vec::Ones(n);
  p.closed.mean_partials = [d, s, g1, g2, ones](const LocationScaleMap &map, const Vec &x,
                                                 const Vec &y) {
    const Vec mean = map.mean_outcome(x, y);
    Partials out;
    out.gx = -s * (ones - x) + g1 * x;
    out.gy = s * (ones - y) - g2 * y;
    out.gz.resize(2 * d);
    out.gz << mean.head(d), -mean.tail(d);
    return out;
  };
  p.closed.objective = [A1, A2, B1, B2, s, g1, g2, ones](const Vec &x, const Vec &y) {
    const Vec m1 = A1 * x + B1 * y;
    const Vec m2 = A2 * x + B2 * y;
    return 0.5 * (m1.squaredNorm() + s * (ones - x).squaredNorm()) -
           0.5 * (m2.squaredNorm() + s * (ones - y).squaredNorm()) + 0.5 * g1 * x.squaredNorm() -
           0.5 * g2 * y.squaredNorm();
  };

  const Mat Hxx = A1.transpose() * A1 - A2.transpose() * A2 + (s + g1) * Mat::Identity(n, n);
  const Mat Hyy = B1.transpose() * B1 - B2.transpose() * B2 - (s + g2) * Mat::Identity(n, n);
  const Mat Hyx = B1.transpose() * A1 - B2.transpose() * A2;

  Eigen::SelfAdjointEigenSolver<Mat> eig_yy(-Hyy);
  const double mu = eig_yy.eigenvalues().minCoeff();
  if (!(mu > 0.0))
    throw InvalidArgument("election: drawn matrices make L(x, .) non-concave; try another seed "
                          "or a smaller entry_scale");
  const Eigen::PartialPivLU<Mat> lu(Hyy);
  const Mat schur = Hxx - Hyx.transpose() * lu.solve(Hyx);
  Eigen::SelfAdjointEigenSolver<Mat> eig_phi(0.5 * (schur + schur.transpose()));
  if (!(eig_phi.eigenvalues().minCoeff() > 0.0))
    throw InvalidArgument("election: drawn matrices leave Phi unbounded below; try another seed "
                          "or a smaller entry_scale");

  // Stationarity of L(x, .): Hyy y + Hyx x + s 1 = 0.
  p.closed.y_star = [lu, Hyx, s, ones](const Vec &x) -> Vec {
    return lu.solve(-(Hyx * x + s * ones));
  };

  Mat H(2 * n, 2 * n);
  H << Hxx, Hyx.transpose(), Hyx, Hyy;
  Eigen::SelfAdjointEigenSolver<Mat> eig_full(H, Eigen::EigenvaluesOnly);
  const double ell = eig_full.eigenvalues().cwiseAbs().maxCoeff();
  Mat AB(2 * d, 2 * n);
  AB << A, B;

  p.profile = {.ell = std::max(ell, mu),
               .mu = mu,
               .lip_L = 0.0,
               .lip_L0 = Eigen::JacobiSVD<Mat>(AB).singularValues()(0),
               .lip_L1 = 0.0,
               .sigma = 0.0,
               .concavity_class = ConcavityClass::PL};
  p.inner_ell = eig_yy.eigenvalues().maxCoeff();
  p.init = {Vec::Ones(n), Vec::Ones(n)};
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Strategic classification

namespace {

// log(1 + exp(-s)) without overflow.
double softplus_neg(double s) { return s > 0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s)); }

// 1 / (1 + exp(s)).
double sigmoid_neg(double s) {
  if (s >= 0) {
    const double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

struct CreditData {
  Mat a0; // n x N, column i = a_i^0
  Vec b;  // N labels in {-1, +1}
};

} // namespace

ProblemInstance make_strategic_classification(const StrategicOptions &o) {
  if (o.N < 2)
    throw InvalidArgument("strategic: N must be at least 2");
  if (o.n < 2)
    throw InvalidArgument("strategic: n must be at least 2");
  if (o.non_strategic < 0 || o.non_strategic > o.n)
    throw InvalidArgument("strategic: non_strategic must lie in [0, n]");
  if (o.positive_fraction < 0.0 || o.positive_fraction > 1.0)
    throw InvalidArgument("strategic: positive_fraction must lie in [0, 1]");

  const int N = o.N, n = o.n;
  const double lambda1 = o.lambda1;
  const double lambda2 = o.lambda2 < 0.0 ? 10.0 / (static_cast<double>(N) * N) : o.lambda2;
  const double alpha = o.alpha;

  // Two Gaussian clusters centred at +-(separation / 2) / sqrt(n) per
  // coordinate; the first round(positive_fraction * N) points are positive.
  auto data = std::make_shared<CreditData>();
  data->a0.resize(n, N);
  data->b.resize(N);
  Rng rng(o.seed);
  const int positives = static_cast<int>(std::lround(o.positive_fraction * N));
  const double offset = 0.5 * o.separation / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < N; ++i) {
    data->b[i] = i < positives ? 1.0 : -1.0;
    for (int k = 0; k < n; ++k)
      data->a0(k, i) = data->b[i] * offset + rng.normal();
  }

  ProblemInstance p;
  p.name = "strategic";
  p.n = n;
  p.m = N;
  p.d = n;

  Mat A = Mat::Constant(n, n, o.shift);
  A.topRows(o.non_strategic).setZero();
  p.truth = LocationScaleMap::make(A, Mat::Zero(n, N), Vec::Zero(n), Vec::Zero(n));
  p.truth.exo_sampler = [data, N](Rng &r) {
    const auto i = static_cast<Eigen::Index>(r.index(static_cast<std::uint64_t>(N)));
    ExoDraw draw;
    draw.theta.resize(2);
    draw.theta << static_cast<double>(i), data->b[i];
    draw.offset = data->a0.col(i);
    return draw;
  };
  p.truth.exo_offset_mean = data->a0.rowwise().mean();
  p.y_set = ConstraintSet::simplex(N);

  auto f = [lambda1, alpha](const Vec &x) {
    return lambda1 * (alpha * x.array().square() / (1.0 + alpha * x.array().square())).sum();
  };
  auto grad_f = [lambda1, alpha](const Vec &x) -> Vec {
    const auto q = (1.0 + alpha * x.array().square());
    return (lambda1 * 2.0 * alpha * x.array() / q.square()).matrix();
  };
  const double Nd = static_cast<double>(N);
  auto g = [lambda2, Nd](const Vec &y) {
    return 0.5 * lambda2 * (Nd * y.array() - 1.0).matrix().squaredNorm();
  };
  auto grad_g = [lambda2, Nd](const Vec &y) -> Vec {
    return (lambda2 * Nd * (Nd * y.array() - 1.0)).matrix();
  };

  p.loss.eval = [f, g](const Vec &x, const Vec &y, const Sample &s) {
    const auto i = static_cast<Eigen::Index>((*s.theta)[0]);
    const double b = (*s.theta)[1];
    return y[i] * softplus_neg(b * s.z.dot(x)) + f(x) - g(y);
  };
  p.loss.partials = [grad_f, grad_g](const Vec &x, const Vec &y, const Sample &s,
                                     Partials &out) {
    const auto i = static_cast<Eigen::Index>((*s.theta)[0]);
    const double b = (*s.theta)[1];
    const double margin = b * s.z.dot(x);
    const double weight = -b * y[i] * sigmoid_neg(margin);
    out.gx = weight * s.z + grad_f(x);
    out.gz = weight * x;
    out.gy = -grad_g(y);
    out.gy[i] += softplus_neg(margin);
  };

  // Expectations over the uniform index are exact finite averages.
  p.closed.mean_partials = [data, N, Nd, grad_f, grad_g](const LocationScaleMap &map,
                                                         const Vec &x, const Vec &y) {
    const Vec shift = map.A * x + map.B * y + map.noise_mean;
    Partials out;
    out.gx = Vec::Zero(x.size());
    out.gz = Vec::Zero(x.size());
    out.gy = -grad_g(y);
    for (int i = 0; i < N; ++i) {
      const Vec a = data->a0.col(i) + shift;
      const double b = data->b[i];
      const double margin = b * a.dot(x);
      const double weight = -b * y[i] * sigmoid_neg(margin);
      out.gx += weight * a;
      out.gz += weight * x;
      out.gy[i] += softplus_neg(margin) / Nd;
    }
    out.gx = out.gx / Nd + grad_f(x);
    out.gz /= Nd;
    return out;
  };
  p.closed.objective = [data, A, N, Nd, f, g](const Vec &x, const Vec &y) {
    const Vec shift = A * x;
    double total = 0.0;
    for (int i = 0; i < N; ++i)
      total += y[i] * softplus_neg(data->b[i] * (data->a0.col(i) + shift).dot(x));
    return total / Nd + f(x) - g(y);
  };

  // L(x, .) is linear minus g, so its curvature in y is exactly lambda2 N^2.
  const double mu = lambda2 * Nd * Nd;
  p.inner_ell = mu;

  // Local curvature estimate in x at the origin by central differences of
  // the exact gradient; used only to fill the profile.
  const Vec y_uniform = Vec::Constant(N, 1.0 / Nd);
  double ell_x = 0.0;
  {
    const double h = 1e-4;
    Mat H(n, n);
    for (int k = 0; k < n; ++k) {
      Vec xp = Vec::Zero(n), xm = Vec::Zero(n);
      xp[k] = h;
      xm[k] = -h;
      const auto gp = p.closed.mean_partials(p.truth, xp, y_uniform);
      const auto gm = p.closed.mean_partials(p.truth, xm, y_uniform);
      H.col(k) = ((gp.gx + A.transpose() * gp.gz) - (gm.gx + A.transpose() * gm.gz)) / (2 * h);
    }
    H = 0.5 * (H + H.transpose()).eval();
    ell_x = Eigen::SelfAdjointEigenSolver<Mat>(H, Eigen::EigenvaluesOnly)
                .eigenvalues()
                .cwiseAbs()
                .maxCoeff();
  }

  p.profile = {.ell = std::max(mu, ell_x),
               .mu = mu,
               .lip_L = 0.0,
               .lip_L0 = A.norm(),
               .lip_L1 = 0.0,
               .sigma = 0.0,
               .concavity_class = ConcavityClass::StronglyConcave};
  p.init = {Vec::Zero(n), y_uniform};
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------

const std::vector<std::string> &problem_names() {
  static const std::vector<std::string> names{"quadratic_sc", "pl_sine", "election",
                                              "strategic"};
  return names;
}

namespace {

double param_double(const KeyValueDoc &doc, const char *key, double fallback) {
  return doc.has(key) ? doc.get_double(key) : fallback;
}

int param_int(const KeyValueDoc &doc, const char *key, int fallback) {
  return doc.has(key) ? static_cast<int>(doc.get_int(key)) : fallback;
}

std::uint64_t param_seed(const KeyValueDoc &doc, const char *key, std::uint64_t fallback) {
  return doc.has(key) ? static_cast<std::uint64_t>(doc.get_int(key)) : fallback;
}

} // namespace

ProblemInstance make_problem(const std::string &name, const KeyValueDoc &params) {
  if (name == "quadratic_sc")
    return make_quadratic_sc(param_double(params, "noise_std", 1.0));
  if (name == "pl_sine")
    return make_pl_sine(param_double(params, "noise_std", 1.0));
  if (name == "election") {
    ElectionOptions o;
    o.n = param_int(params, "n", o.n);
    o.d = param_int(params, "d", o.d);
    o.seed = param_seed(params, "problem_seed", o.seed);
    o.sparsity = param_double(params, "sparsity", o.sparsity);
    o.entry_scale = param_double(params, "entry_scale", o.entry_scale);
    o.theta_var = param_double(params, "theta_var", o.theta_var);
    o.omega_var = param_double(params, "omega_var", o.omega_var);
    o.gamma1 = param_double(params, "gamma1", o.gamma1);
    o.gamma2 = param_double(params, "gamma2", o.gamma2);
    return make_election(o);
  }
  if (name == "strategic") {
    StrategicOptions o;
    o.N = param_int(params, "N", o.N);
    o.n = param_int(params, "n", o.n);
    o.seed = param_seed(params, "problem_seed", o.seed);
    o.separation = param_double(params, "separation", o.separation);
    o.positive_fraction = param_double(params, "positive_fraction", o.positive_fraction);
    o.non_strategic = param_int(params, "non_strategic", o.non_strategic);
    o.shift = param_double(params, "shift", o.shift);
    o.lambda1 = param_double(params, "lambda1", o.lambda1);
    o.lambda2 = param_double(params, "lambda2", o.lambda2);
    o.alpha = param_double(params, "alpha", o.alpha);
    return make_strategic_classification(o);
  }
  std::string valid;
  for (const auto &n : problem_names())
    valid += (valid.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown problem '" + name + "'; valid names: " + valid);
}

} // namespace ddgda
