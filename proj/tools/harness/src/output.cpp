#include "ddgda/harness/output.hpp"

#include "ddgda/keyvalue.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace ddgda::harness {

namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v))
    return nullptr;
  return v;
}

std::vector<double> to_std(const Vec &v) { return {v.data(), v.data() + v.size()}; }

} // namespace

TraceCsvWriter::TraceCsvWriter(std::ostream &os, Eigen::Index n, Eigen::Index m,
                               std::uint64_t stride, std::uint64_t T)
    : os_(os), stride_(stride == 0 ? 1 : stride), T_(T) {
  os_ << header(n, m) << '\n';
}

std::string TraceCsvWriter::header(Eigen::Index n, Eigen::Index m) {
  std::string h = "t";
  for (Eigen::Index i = 1; i <= n; ++i)
    h += ",x" + std::to_string(i);
  for (Eigen::Index i = 1; i <= m; ++i)
    h += ",y" + std::to_string(i);
  h += ",phi,grad_metric,est_err_x,est_err_y,objective,diverged";
  return h;
}

bool TraceCsvWriter::wanted(const TraceRecord &r) const {
  return r.t % stride_ == 0 || r.t == T_ || r.diverged;
}

void TraceCsvWriter::write(const TraceRecord &r) {
  if (!wanted(r))
    return;
  std::string line = std::to_string(r.t);
  for (Eigen::Index i = 0; i < r.x.size(); ++i)
    line += ',' + format_double(r.x[i]);
  for (Eigen::Index i = 0; i < r.y.size(); ++i)
    line += ',' + format_double(r.y[i]);
  for (double v : {r.phi, r.grad_metric, r.est_err_x, r.est_err_y, r.objective})
    line += ',' + format_double(v);
  line += r.diverged ? ",true" : ",false";
  os_ << line << '\n';
}

std::string trace_csv(const Trace &trace, Eigen::Index n, Eigen::Index m, std::uint64_t stride,
                      std::uint64_t T) {
  std::ostringstream os;
  TraceCsvWriter w(os, n, m, stride, T);
  for (const auto &r : trace.records)
    w.write(r);
  return os.str();
}

TraceSummary summarize(const Trace &trace) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  TraceSummary s{nan, nan, nan, trace.diverged, trace.records.empty() ? 0 : trace.last().t};
  for (const auto &r : trace.records) {
    if (!r.has_metrics())
      continue;
    s.final_phi = r.phi;
    s.final_grad_metric = r.grad_metric;
    if (std::isnan(s.min_grad_metric) || r.grad_metric < s.min_grad_metric)
      s.min_grad_metric = r.grad_metric;
  }
  return s;
}

nlohmann::json summary_json(const ExperimentSpec &spec, const RunOutcome &outcome) {
  const auto &trace = outcome.trace;
  const auto s = summarize(trace);
  nlohmann::json j;
  j["problem"] = spec.problem;
  if (!spec.label.empty())
    j["label"] = spec.label;
  j["seed"] = spec.cfg.seed;
  j["final_phi"] = number(s.final_phi);
  j["final_grad_metric"] = number(s.final_grad_metric);
  j["min_grad_metric"] = number(s.min_grad_metric);
  j["diverged"] = s.diverged;
  j["last_t"] = s.last_t;
  j["wall_time_s"] = outcome.wall_seconds;
  j["eta_x"] = trace.eta_x;
  j["eta_y"] = trace.eta_y;
  j["samples_drawn"] = trace.samples_drawn;
  j["estimator_updates"] = trace.estimator_updates;
  if (!trace.records.empty()) {
    const auto &last = trace.last();
    j["last_iterate"] = {{"t", last.t}, {"x", to_std(last.x)}, {"y", to_std(last.y)}};
    const auto &pick = trace.random_iterate();
    j["random_iterate"] = {{"t", pick.t}, {"x", to_std(pick.x)}, {"y", to_std(pick.y)}};
    j["final_objective"] = number(last.objective);
  }
  const KeyValueDoc doc = spec.to_doc();
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto &[k, v] : doc.entries())
    cfg[k] = v;
  j["config"] = cfg;
  j["config_text"] = doc.str();
  return j;
}

std::string joined_csv(const std::vector<std::string> &labels,
                       const std::vector<const Trace *> &traces, std::uint64_t stride_hint) {
  struct Row {
    std::vector<const TraceRecord *> cells;
  };
  std::map<std::uint64_t, Row> rows;
  for (std::size_t k = 0; k < traces.size(); ++k)
    for (const auto &r : traces[k]->records) {
      if (!r.has_metrics() && !r.diverged && (stride_hint == 0 || r.t % stride_hint != 0))
        continue;
      auto &row = rows[r.t];
      row.cells.resize(traces.size(), nullptr);
      row.cells[k] = &r;
    }

  std::ostringstream os;
  os << 't';
  for (const auto &l : labels)
    os << ',' << l << ".phi," << l << ".grad_metric," << l << ".spd_residual," << l
       << ".objective," << l << ".diverged";
  os << '\n';
  for (const auto &[t, row] : rows) {
    os << t;
    for (const auto *r : row.cells) {
      if (!r) {
        os << ",,,,,";
        continue;
      }
      os << ',' << format_double(r->phi) << ',' << format_double(r->grad_metric) << ','
         << format_double(r->spd_residual) << ',' << format_double(r->objective) << ','
         << (r->diverged ? "true" : "false");
    }
    os << '\n';
  }
  return os.str();
}

} // namespace ddgda::harness
