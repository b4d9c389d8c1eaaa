#include "ddgda/harness/spec.hpp"

#include "ddgda/bench.hpp"
#include "ddgda/errors.hpp"

#include <chrono>

namespace ddgda::harness {

namespace {

bool parse_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw InvalidArgument("spec: '" + key + "' expects true or false, got '" + v + "'");
}

std::uint64_t parse_count(const std::string &key, const std::string &v) {
  KeyValueDoc tmp;
  tmp.set(key, v);
  const auto n = tmp.get_int(key);
  if (n < 0)
    throw InvalidArgument("spec: '" + key + "' must be nonnegative");
  return static_cast<std::uint64_t>(n);
}

EstimatorStart parse_estimator(const std::string &v) {
  if (v == "zero")
    return EstimatorStart::Zero;
  if (v == "exact")
    return EstimatorStart::Exact;
  if (v == "frozen")
    return EstimatorStart::Frozen;
  throw InvalidArgument("spec: estimator must be zero, exact or frozen, got '" + v + "'");
}

constexpr std::string_view kParamPrefix = "param.";

} // namespace

std::string_view to_string(EstimatorStart e) noexcept {
  switch (e) {
  case EstimatorStart::Zero:
    return "zero";
  case EstimatorStart::Exact:
    return "exact";
  case EstimatorStart::Frozen:
    return "frozen";
  }
  return "?";
}

void ExperimentSpec::set(const std::string &key, const std::string &value) {
  if (key.rfind(kParamPrefix, 0) == 0) {
    params.set(key.substr(kParamPrefix.size()), value);
  } else if (key == "problem") {
    problem = value;
  } else if (key == "label") {
    label = value;
  } else if (key == "out") {
    out = value;
  } else if (key == "algo") {
    cfg.algo = parse_algorithm(value);
  } else if (key == "T") {
    cfg.T = parse_count(key, value);
  } else if (key == "M") {
    cfg.M = parse_count(key, value);
  } else if (key == "eta_x") {
    cfg.eta_x = parse_double(value);
  } else if (key == "eta_y") {
    cfg.eta_y = parse_double(value);
  } else if (key == "schedule") {
    cfg.schedule = parse_schedule(value);
  } else if (key == "spd_a") {
    cfg.schedule_a = parse_double(value);
  } else if (key == "seed") {
    cfg.seed = parse_count(key, value);
  } else if (key == "stride") {
    cfg.stride = parse_count(key, value);
  } else if (key == "dither") {
    cfg.dither = parse_double(value);
  } else if (key == "guard") {
    cfg.divergence_guard = parse_double(value);
  } else if (key == "init_x" || key == "init_y") {
    if (!cfg.init)
      cfg.init = DecisionPair{};
    (key == "init_x" ? cfg.init->x : cfg.init->y) = parse_vector(value);
  } else if (key == "estimator") {
    estimator = parse_estimator(value);
  } else if (key == "ridge") {
    ridge = parse_double(value);
  } else if (key == "metrics") {
    cfg.metrics = parse_bool(key, value);
  } else if (key == "record_spd_residual") {
    cfg.record_spd_residual = parse_bool(key, value);
  } else if (key == "literal_three_draw") {
    cfg.literal_three_draw = parse_bool(key, value);
  } else {
    throw InvalidArgument("spec: unknown key '" + key + "'");
  }
}

ExperimentSpec ExperimentSpec::from_doc(const KeyValueDoc &doc) {
  ExperimentSpec spec;
  for (const auto &[k, v] : doc.entries())
    spec.set(k, v);
  return spec;
}

ExperimentSpec ExperimentSpec::load(const std::string &path) {
  return from_doc(KeyValueDoc::load(path));
}

KeyValueDoc ExperimentSpec::to_doc() const {
  KeyValueDoc doc;
  doc.set("problem", problem);
  if (!label.empty())
    doc.set("label", label);
  doc.set("algo", std::string(to_string(cfg.algo)));
  doc.set("T", static_cast<std::int64_t>(cfg.T));
  doc.set("M", static_cast<std::int64_t>(cfg.M));
  doc.set("schedule", std::string(to_string(cfg.schedule)));
  doc.set("eta_x", cfg.eta_x);
  doc.set("eta_y", cfg.eta_y);
  doc.set("spd_a", cfg.schedule_a);
  doc.set("seed", static_cast<std::int64_t>(cfg.seed));
  doc.set("stride", static_cast<std::int64_t>(cfg.stride));
  doc.set("dither", cfg.dither);
  doc.set("guard", cfg.divergence_guard);
  if (cfg.init) {
    doc.set("init_x", cfg.init->x);
    doc.set("init_y", cfg.init->y);
  }
  doc.set("estimator", std::string(to_string(estimator)));
  doc.set("ridge", ridge);
  doc.set("metrics", std::string(cfg.metrics ? "true" : "false"));
  doc.set("record_spd_residual", std::string(cfg.record_spd_residual ? "true" : "false"));
  doc.set("literal_three_draw", std::string(cfg.literal_three_draw ? "true" : "false"));
  for (const auto &[k, v] : params.entries())
    doc.set(std::string(kParamPrefix) + k, v);
  return doc;
}

RunOutcome execute(const ExperimentSpec &spec, const std::function<void(const TraceRecord &)> &sink) {
  RunOutcome out{make_problem(spec.problem, spec.params), {}, 0.0};
  const auto &p = out.problem;
  RunConfig cfg = spec.cfg;
  if (cfg.init && (cfg.init->x.size() == 0 || cfg.init->y.size() == 0)) {
    if (cfg.init->x.size() == 0)
      cfg.init->x = p.init.x;
    if (cfg.init->y.size() == 0)
      cfg.init->y = p.init.y;
  }
  cfg.learn_map = spec.estimator != EstimatorStart::Frozen;
  cfg.on_record = sink;

  const auto start = std::chrono::steady_clock::now();
  if (cfg.algo == Algorithm::SPD) {
    out.trace = spd_run(p, p.truth, cfg);
  } else {
    const MapEstimate est0 = spec.estimator == EstimatorStart::Zero
                                 ? MapEstimate::zero(p.d, p.n, p.m, spec.ridge)
                                 : MapEstimate::seeded(p.truth, spec.ridge);
    out.trace = cfg.algo == Algorithm::ASGDA ? asgda_run(p, p.truth, est0, cfg)
                                             : aasgda_run(p, p.truth, est0, cfg);
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

} // namespace ddgda::harness
