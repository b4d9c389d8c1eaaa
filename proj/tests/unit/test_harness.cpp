#include "doctest.h"

#include "ddgda/errors.hpp"
#include "ddgda/harness/checks.hpp"
#include "ddgda/harness/output.hpp"
#include "ddgda/harness/spec.hpp"

#include <sstream>

using namespace ddgda;
using namespace ddgda::harness;

namespace {

ExperimentSpec small_spec() {
  return ExperimentSpec::from_doc(KeyValueDoc::parse("problem = quadratic_sc\n"
                                                     "algo = asgda\n"
                                                     "T = 1\n"
                                                     "M = 4\n"
                                                     "eta_x = 1e-3\n"
                                                     "eta_y = 1e-2\n"
                                                     "stride = 1\n"
                                                     "seed = 9\n"));
}

std::vector<std::string> lines(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);)
    out.push_back(l);
  return out;
}

} // namespace

TEST_CASE("trace CSV header") {
  CHECK(TraceCsvWriter::header(1, 1) ==
        "t,x1,y1,phi,grad_metric,est_err_x,est_err_y,objective,diverged");
  CHECK(TraceCsvWriter::header(2, 3) ==
        "t,x1,x2,y1,y2,y3,phi,grad_metric,est_err_x,est_err_y,objective,diverged");
}

TEST_CASE("one iteration gives exactly the t = 0 and t = 1 rows") {
  const auto spec = small_spec();
  const auto out = execute(spec);
  const auto rows = lines(trace_csv(out.trace, 1, 1, 1, 1));
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].rfind("0,", 0) == 0);
  CHECK(rows[2].rfind("1,", 0) == 0);
}

TEST_CASE("identical specs give byte-identical CSVs") {
  auto spec = small_spec();
  spec.cfg.T = 200;
  spec.cfg.stride = 10;
  const auto a = execute(spec), b = execute(spec);
  CHECK(trace_csv(a.trace, 1, 1, 10, 200) == trace_csv(b.trace, 1, 1, 10, 200));
}

TEST_CASE("summary echoes a configuration that reproduces the run") {
  auto spec = small_spec();
  spec.cfg.T = 50;
  spec.params.set("noise_std", 0.5);
  const auto first = execute(spec);
  const auto j = summary_json(spec, first);
  CHECK(j.contains("wall_time_s"));
  CHECK(j["seed"] == 9);
  const auto again = ExperimentSpec::from_doc(KeyValueDoc::parse(j["config_text"].get<std::string>()));
  CHECK(again.to_doc().str() == spec.to_doc().str());
  const auto second = execute(again);
  CHECK(trace_csv(first.trace, 1, 1, 1, 50) == trace_csv(second.trace, 1, 1, 1, 50));
}

TEST_CASE("spec parsing") {
  CHECK_THROWS_AS(ExperimentSpec::from_doc(KeyValueDoc::parse("bogus = 1\n")), InvalidArgument);
  CHECK_THROWS_AS(ExperimentSpec::from_doc(KeyValueDoc::parse("estimator = learned\n")),
                  InvalidArgument);
  CHECK_THROWS_AS(ExperimentSpec::from_doc(KeyValueDoc::parse("metrics = maybe\n")),
                  InvalidArgument);
  const auto s = ExperimentSpec::from_doc(
      KeyValueDoc::parse("algo = spd\nschedule = spd_dynamic\nspd_a = 80000\ninit_x = 1\n"));
  CHECK(s.cfg.algo == Algorithm::SPD);
  CHECK(s.cfg.schedule == Schedule::SPD_Dynamic);
  CHECK(s.cfg.schedule_a == 8e4);
  REQUIRE(s.cfg.init.has_value());
  CHECK(s.cfg.init->x[0] == 1.0);
}

TEST_CASE("unknown problem is reported with the valid names") {
  ExperimentSpec s = small_spec();
  s.problem = "nope";
  try {
    execute(s);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument &e) {
    CHECK(std::string(e.what()).find("quadratic_sc") != std::string::npos);
  }
}

TEST_CASE("frozen estimator never learns") {
  auto spec = small_spec();
  spec.cfg.T = 20;
  spec.estimator = EstimatorStart::Frozen;
  const auto out = execute(spec);
  for (const auto &r : out.trace.records)
    CHECK(r.est_err_x == 0.0);
}

TEST_CASE("joined CSV leaves missing cells empty") {
  auto a = small_spec();
  a.cfg.T = 4;
  a.cfg.stride = 2;
  auto b = a;
  b.cfg.T = 3;
  const auto ra = execute(a), rb = execute(b);
  const auto rows = lines(joined_csv({"a", "b"}, {&ra.trace, &rb.trace}, 2));
  CHECK(rows[0] ==
        "t,a.phi,a.grad_metric,a.spd_residual,a.objective,a.diverged,b.phi,b.grad_metric,"
        "b.spd_residual,b.objective,b.diverged");
  CHECK(rows.back().rfind("4,", 0) == 0);
  CHECK(rows.back().substr(rows.back().size() - 5) == ",,,,,");
}

TEST_CASE("check suite filtering and faults") {
  const auto core = run_checks({"core", ""});
  CHECK(core.size() == 4);
  for (const auto &r : core)
    CHECK(r.module == "core");
  CHECK(all_ok(core));
  CHECK_THROWS_AS(run_checks({"nope", ""}), InvalidArgument);
  CHECK_THROWS_AS(run_checks({"", "nope"}), InvalidArgument);
}

TEST_CASE("a wrong Jacobian sign trips the Danskin and bias checks") {
  auto failed = [](const std::vector<CheckResult> &rs, const std::string &name) {
    for (const auto &r : rs)
      if (r.name == name)
        return r.status == CheckStatus::Fail;
    return false;
  };
  const auto metrics = run_checks({"metrics", "jacobian-sign"});
  const auto grads = run_checks({"gradients", "jacobian-sign"});
  CHECK(failed(metrics, "danskin"));
  CHECK(failed(grads, "bias_bound"));
  CHECK_FALSE(all_ok(metrics));
}
