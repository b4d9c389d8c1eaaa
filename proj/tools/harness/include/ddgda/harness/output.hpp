#pragma once

#include "ddgda/harness/spec.hpp"
#include "ddgda/solvers.hpp"

#include "json.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ddgda::harness {

/// Long-format trace CSV:
///   t,x1..xn,y1..ym,phi,grad_metric,est_err_x,est_err_y,objective,diverged
/// Rows are written for t divisible by the stride, for t = T and for a
/// diverged record. Numbers use 17 significant digits.
class TraceCsvWriter {
public:
  TraceCsvWriter(std::ostream &os, Eigen::Index n, Eigen::Index m, std::uint64_t stride,
                 std::uint64_t T);

  static std::string header(Eigen::Index n, Eigen::Index m);
  bool wanted(const TraceRecord &r) const;
  void write(const TraceRecord &r);

private:
  std::ostream &os_;
  std::uint64_t stride_, T_;
};

/// Whole trace through TraceCsvWriter.
std::string trace_csv(const Trace &trace, Eigen::Index n, Eigen::Index m, std::uint64_t stride,
                      std::uint64_t T);

struct TraceSummary {
  double final_phi;
  double final_grad_metric;
  double min_grad_metric;
  bool diverged;
  std::uint64_t last_t;
};

TraceSummary summarize(const Trace &trace);

/// Summary document: metrics, wall time, seed and the resolved config.
nlohmann::json summary_json(const ExperimentSpec &spec, const RunOutcome &outcome);

/// Comparison table keyed by t. One column group per run:
///   <label>.phi, <label>.grad_metric, <label>.spd_residual, <label>.objective,
///   <label>.diverged
/// Cells for a t a run did not record are left empty.
std::string joined_csv(const std::vector<std::string> &labels,
                       const std::vector<const Trace *> &traces, std::uint64_t stride_hint);

} // namespace ddgda::harness
