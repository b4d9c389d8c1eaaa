#pragma once

#include "ddgda/keyvalue.hpp"
#include "ddgda/problem.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ddgda {

/// min_x max_{y in [-10,10]} E[-x z + y z - y^2/2],  z = 4x - y + xi.
/// Closed forms: L = -4x^2 + 5xy - 1.5y^2 and a three-piece Phi.
ProblemInstance make_quadratic_sc(double noise_std = 1.0);

/// min_x max_y E[2(x + sin x) z - 4(y^2 + 3 sin^2 y)],  z = x + 2y + xi.
ProblemInstance make_pl_sine(double noise_std = 1.0);

struct ElectionOptions {
  int n = 10;             // decision length (both platforms)
  int d = 10;             // outcome length per platform
  std::uint64_t seed = 1; // parameter matrices
  double sparsity = 0.2;  // fraction of nonzero entries in A_i, B_i
  double entry_scale = 0.3;
  double theta_var = 0.01;
  double omega_var = 0.01;
  double gamma1 = 1.0;
  double gamma2 = 1.0;
};

/// Two competing election-forecast platforms. Outcomes
///   z_i | theta = theta' 1 + A_i x + B_i y + omega_i,   i = 1, 2,
/// with theta carried as the sample's exogenous feature.
/// Throws InvalidArgument when the drawn matrices make L(x, .) non-concave
/// or Phi unbounded below.
ProblemInstance make_election(const ElectionOptions &opts = {});

struct StrategicOptions {
  int N = 40;             // training points; y lives on the N-simplex
  int n = 6;              // features
  std::uint64_t seed = 7; // synthetic data
  double separation = 2.0;
  double positive_fraction = 0.3;
  int non_strategic = 2;  // leading feature rows that do not respond to x
  double shift = 10.0;    // entries of the strategic rows of A
  double lambda1 = 1.0;
  double lambda2 = -1.0;  // negative selects 10 / N^2
  double alpha = 1.0;
};

/// Distributionally robust logistic regression on a synthetic credit-style
/// dataset whose features respond to the classifier: a_i = a_i^0 + A x.
/// A sample draws a training index uniformly; theta = (index, label).
ProblemInstance make_strategic_classification(const StrategicOptions &opts = {});

/// Names accepted by `make_problem`.
const std::vector<std::string> &problem_names();

/// Build a benchmark by name, reading factory parameters from `params`
/// (keys such as noise_std, n, d, N, sparsity, problem_seed).
ProblemInstance make_problem(const std::string &name, const KeyValueDoc &params = {});

} // namespace ddgda
