#pragma once

#include "ddgda/keyvalue.hpp"
#include "ddgda/problem.hpp"
#include "ddgda/solvers.hpp"

#include <functional>
#include <optional>
#include <string>

namespace ddgda::harness {

/// Starting distribution-map estimate.
///   zero    all coefficients zero, learned online (default)
///   exact   centred on the true map, learned online
///   frozen  the true map, never updated
enum class EstimatorStart { Zero, Exact, Frozen };

/// One experiment: problem, factory parameters, run configuration and
/// output location. Read from a key-value spec file; see
/// tools/harness/example.spec for the accepted keys.
struct ExperimentSpec {
  std::string problem;
  KeyValueDoc params; // factory parameters, stored without the "param." prefix
  RunConfig cfg;
  EstimatorStart estimator = EstimatorStart::Zero;
  double ridge = 1e-6;
  std::string label;
  std::string out;

  /// Parse `doc`, rejecting unknown keys.
  static ExperimentSpec from_doc(const KeyValueDoc &doc);
  static ExperimentSpec load(const std::string &path);

  /// Apply one `key = value` setting (the same keys as the file format).
  void set(const std::string &key, const std::string &value);

  /// Fully resolved configuration, suitable for an exact re-run.
  KeyValueDoc to_doc() const;
};

/// Build the problem, resolve init and run. The problem is built once per
/// call so concurrent runs share nothing.
struct RunOutcome {
  ProblemInstance problem;
  Trace trace;
  double wall_seconds = 0.0;
};

/// `sink`, when set, sees every record as it is produced.
RunOutcome execute(const ExperimentSpec &spec,
                   const std::function<void(const TraceRecord &)> &sink = {});

std::string_view to_string(EstimatorStart e) noexcept;

} // namespace ddgda::harness
