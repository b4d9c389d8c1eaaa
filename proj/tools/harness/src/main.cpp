#include "ddgda/bench.hpp"
#include "ddgda/errors.hpp"
#include "ddgda/harness/checks.hpp"
#include "ddgda/harness/output.hpp"
#include "ddgda/harness/spec.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace ddgda;
using namespace ddgda::harness;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kUsage = 2;

/// Thrown for problems with the command line or spec contents.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flags that override spec-file keys. Only flags given on the command
/// line are applied.
struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;

  void add_to(CLI::App &app) {
    static const std::vector<std::pair<std::string, std::string>> flags{
        {"--problem", "problem"}, {"--algo", "algo"},       {"--T", "T"},
        {"--M", "M"},             {"--eta-x", "eta_x"},     {"--eta-y", "eta_y"},
        {"--schedule", "schedule"}, {"--seed", "seed"},     {"--stride", "stride"},
        {"--dither", "dither"},   {"--out", "out"},         {"--guard", "guard"}};
    for (const auto &[flag, key] : flags)
      app.add_option(flag, values[key], "Override spec key '" + key + "'");
    app.add_option("--set", sets, "Override any spec key, as key=value (repeatable)");
  }

  void apply(ExperimentSpec &spec, CLI::App &app) const {
    for (const auto &[key, value] : values) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (app.count(flag) > 0)
        spec.set(key, value);
    }
    for (const auto &kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw UsageError("--set expects key=value, got '" + kv + "'");
      spec.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
};

void check_problem(const std::string &name) {
  const auto &names = problem_names();
  if (name.empty() || std::find(names.begin(), names.end(), name) == names.end()) {
    std::string list;
    for (const auto &n : names)
      list += (list.empty() ? "" : ", ") + n;
    throw UsageError((name.empty() ? std::string("no problem given")
                                   : "unknown problem '" + name + "'") +
                     "; valid: " + list);
  }
}

ExperimentSpec load_spec(const std::optional<std::string> &path) {
  if (!path)
    return {};
  if (!fs::exists(*path))
    throw UsageError("spec file not found: " + *path);
  return ExperimentSpec::load(*path);
}

void write_file(const fs::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot write " + path.string());
  os << text;
}

fs::path prepare_dir(const std::string &dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

/// Streams trace rows to disk as they are produced, so a failed run still
/// leaves every row recorded before the failure.
class StreamingTrace {
public:
  StreamingTrace(const fs::path &path, std::uint64_t stride, std::uint64_t T)
      : os_(path, std::ios::binary), stride_(stride), T_(T) {
    if (!os_)
      throw std::runtime_error("cannot write " + path.string());
  }

  void operator()(const TraceRecord &r) {
    if (!writer_)
      writer_ = std::make_unique<TraceCsvWriter>(os_, r.x.size(), r.y.size(), stride_, T_);
    if (writer_->wanted(r))
      writer_->write(r);
  }

  void close() { os_.flush(); }

private:
  std::ofstream os_;
  std::uint64_t stride_, T_;
  std::unique_ptr<TraceCsvWriter> writer_;
};

/// Run one spec, streaming its trace to `csv` and writing `json` on
/// success. Exceptions propagate after the partial trace is flushed.
RunOutcome run_to_files(const ExperimentSpec &spec, const fs::path &csv, const fs::path &json) {
  auto stream = std::make_shared<StreamingTrace>(csv, spec.cfg.stride, spec.cfg.T);
  RunOutcome outcome;
  try {
    outcome = execute(spec, [stream](const TraceRecord &r) { (*stream)(r); });
  } catch (...) {
    stream->close();
    throw;
  }
  stream->close();
  write_file(json, summary_json(spec, outcome).dump(2) + "\n");
  return outcome;
}

/// Run `count` independent jobs on up to `jobs` threads. Results are
/// returned in index order regardless of completion order.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t count, unsigned jobs, Fn fn) {
  std::vector<Result> results(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++)
      results[i] = fn(i);
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(count, jobs == 0 ? hw : jobs));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  return results;
}

std::string json_number(double v) {
  return std::isfinite(v) ? format_double(v) : std::string("nan");
}

// ---------------------------------------------------------------------------

int cmd_run(const std::optional<std::string> &spec_path, const Overrides &ov, CLI::App &app) {
  ExperimentSpec spec = load_spec(spec_path);
  ov.apply(spec, app);
  check_problem(spec.problem);
  spec.cfg.validate();
  const fs::path dir = prepare_dir(spec.out.empty() ? "out/" + spec.problem : spec.out);
  try {
    const auto outcome = run_to_files(spec, dir / "trace.csv", dir / "summary.json");
    const auto s = summarize(outcome.trace);
    std::cout << spec.problem << " " << to_string(spec.cfg.algo) << ": t = " << s.last_t
              << ", phi = " << json_number(s.final_phi)
              << ", grad_metric = " << json_number(s.final_grad_metric)
              << (s.diverged ? ", diverged" : "") << "\nwrote " << (dir / "trace.csv").string()
              << " and " << (dir / "summary.json").string() << "\n";
  } catch (const InvalidArgument &) {
    throw;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\npartial trace in " << (dir / "trace.csv").string()
              << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

int cmd_compare(const std::vector<std::string> &spec_paths, const Overrides &ov, CLI::App &app,
                unsigned jobs) {
  if (spec_paths.size() < 2)
    throw UsageError("compare needs at least two --spec files");
  std::vector<ExperimentSpec> specs;
  for (const auto &path : spec_paths) {
    specs.push_back(load_spec(path));
    ov.apply(specs.back(), app);
    check_problem(specs.back().problem);
    specs.back().cfg.validate();
  }
  for (const auto &s : specs)
    if (s.problem != specs.front().problem)
      throw UsageError("compare specs must share a problem ('" + specs.front().problem +
                       "' vs '" + s.problem + "')");

  // Labels name the per-run files and the joined CSV's column groups.
  std::vector<std::string> labels;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    std::string label = specs[i].label.empty()
                            ? std::string(to_string(specs[i].cfg.algo)) + "_" + std::to_string(i)
                            : specs[i].label;
    if (!seen.insert(label).second)
      label += "_" + std::to_string(i);
    seen.insert(label);
    labels.push_back(label);
  }
  const std::string out = app.count("--out") > 0 ? ov.values.at("out")
                          : specs.front().out.empty() ? "out/compare"
                                                      : specs.front().out;
  const fs::path dir = prepare_dir(out);

  struct Cell {
    std::optional<RunOutcome> outcome;
    std::string error;
  };
  auto cells = parallel_map<Cell>(specs.size(), jobs, [&](std::size_t i) {
    Cell c;
    try {
      c.outcome = run_to_files(specs[i], dir / (labels[i] + ".csv"), dir / (labels[i] + ".json"));
    } catch (const std::exception &e) {
      c.error = e.what();
    }
    return c;
  });

  std::vector<std::string> ok_labels;
  std::vector<const Trace *> traces;
  std::uint64_t stride = 0;
  bool failed = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].outcome) {
      std::cerr << labels[i] << ": error: " << cells[i].error << "\n";
      failed = true;
      continue;
    }
    const auto s = summarize(cells[i].outcome->trace);
    std::cout << std::left << std::setw(16) << labels[i] << " t = " << s.last_t
              << ", phi = " << json_number(s.final_phi)
              << ", grad_metric = " << json_number(s.final_grad_metric)
              << (s.diverged ? ", diverged" : "") << "\n";
    ok_labels.push_back(labels[i]);
    traces.push_back(&cells[i].outcome->trace);
    stride = stride == 0 ? specs[i].cfg.stride : std::min(stride, specs[i].cfg.stride);
  }
  write_file(dir / "compare.csv", joined_csv(ok_labels, traces, stride));
  std::cout << "wrote " << (dir / "compare.csv").string() << "\n";
  return failed ? kRuntimeFailure : kOk;
}

std::vector<std::string> split_values(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty())
      out.push_back(item);
  return out;
}

int cmd_sweep(const std::optional<std::string> &spec_path, const std::vector<std::string> &grid_args,
              const Overrides &ov, CLI::App &app, unsigned jobs) {
  // Grid axes come from `grid.<key> = v1, v2` lines in the spec and from
  // --grid key=v1,v2 flags; a flag replaces a spec axis of the same key.
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  auto add_axis = [&](const std::string &key, const std::string &values) {
    auto vals = split_values(values);
    if (vals.empty())
      throw UsageError("grid axis '" + key + "' has no values");
    auto it = std::find_if(axes.begin(), axes.end(), [&](const auto &a) { return a.first == key; });
    if (it != axes.end())
      it->second = std::move(vals);
    else
      axes.emplace_back(key, std::move(vals));
  };

  KeyValueDoc base_doc;
  if (spec_path) {
    if (!fs::exists(*spec_path))
      throw UsageError("spec file not found: " + *spec_path);
    const KeyValueDoc file = KeyValueDoc::load(*spec_path);
    for (const auto &[k, v] : file.entries()) {
      if (k.rfind("grid.", 0) == 0)
        add_axis(k.substr(5), v);
      else
        base_doc.set(k, v);
    }
  }
  for (const auto &g : grid_args) {
    const auto eq = g.find('=');
    if (eq == std::string::npos)
      throw UsageError("--grid expects key=v1,v2,..., got '" + g + "'");
    add_axis(g.substr(0, eq), g.substr(eq + 1));
  }
  if (axes.empty())
    throw UsageError("sweep needs a nonempty grid (--grid key=v1,v2 or grid.<key> in the spec)");

  ExperimentSpec base = ExperimentSpec::from_doc(base_doc);
  ov.apply(base, app);
  check_problem(base.problem);

  // Cartesian product, first axis slowest.
  std::size_t count = 1;
  for (const auto &a : axes)
    count *= a.second.size();
  std::vector<ExperimentSpec> specs;
  std::vector<std::vector<std::string>> coords;
  for (std::size_t c = 0; c < count; ++c) {
    ExperimentSpec s = base;
    std::vector<std::string> row;
    std::size_t rem = c;
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      idx[k] = rem % axes[k].second.size();
      rem /= axes[k].second.size();
    }
    for (std::size_t k = 0; k < axes.size(); ++k) {
      s.set(axes[k].first, axes[k].second[idx[k]]);
      row.push_back(axes[k].second[idx[k]]);
    }
    s.cfg.validate();
    check_problem(s.problem);
    specs.push_back(std::move(s));
    coords.push_back(std::move(row));
  }

  const fs::path dir = prepare_dir(base.out.empty() ? "out/sweep" : base.out);

  struct Cell {
    std::optional<TraceSummary> summary;
    double eta_x = 0.0, eta_y = 0.0;
    std::string error;
  };
  auto cells = parallel_map<Cell>(count, jobs, [&](std::size_t i) {
    Cell c;
    const std::string stem = "cell_" + std::to_string(i);
    try {
      const auto outcome = run_to_files(specs[i], dir / (stem + ".csv"), dir / (stem + ".json"));
      c.summary = summarize(outcome.trace);
      c.eta_x = outcome.trace.eta_x;
      c.eta_y = outcome.trace.eta_y;
    } catch (const std::exception &e) {
      c.error = e.what();
    }
    return c;
  });

  std::ostringstream csv;
  csv << "cell";
  for (const auto &a : axes)
    csv << "," << a.first;
  csv << ",eta_x_used,eta_y_used,final_phi,final_grad_metric,min_grad_metric,diverged,last_t,flag,"
         "message\n";
  bool failed = false;
  for (std::size_t i = 0; i < count; ++i) {
    const auto &c = cells[i];
    csv << i;
    for (const auto &v : coords[i])
      csv << "," << v;
    if (!c.summary) {
      failed = true;
      std::string msg = c.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      csv << ",,,,,,,,error," << msg << "\n";
      std::cerr << "cell " << i << ": error: " << c.error << "\n";
      continue;
    }
    const auto &s = *c.summary;
    const char *flag = (c.eta_x == 0.0 || c.eta_y == 0.0) ? "zero_stepsize"
                       : s.diverged                       ? "diverged"
                                                          : "ok";
    csv << "," << format_double(c.eta_x) << "," << format_double(c.eta_y) << ","
        << format_double(s.final_phi) << "," << format_double(s.final_grad_metric) << ","
        << format_double(s.min_grad_metric) << "," << (s.diverged ? "true" : "false") << ","
        << s.last_t << "," << flag << ",\n";
  }
  write_file(dir / "sweep.csv", csv.str());
  std::cout << count << " cells; wrote " << (dir / "sweep.csv").string() << "\n";
  return failed ? kRuntimeFailure : kOk;
}

int cmd_check(const std::string &only, const std::string &fault) {
  CheckOptions opts{only, fault};
  std::vector<CheckResult> results;
  try {
    results = run_checks(opts);
  } catch (const InvalidArgument &e) {
    throw UsageError(e.what());
  }
  std::size_t pass = 0, fail = 0, xfail = 0, xpass = 0;
  for (const auto &r : results) {
    std::cout << std::left << std::setw(10) << r.module << std::setw(32) << r.name << std::setw(6)
              << to_string(r.status) << std::right << std::setw(8) << std::fixed
              << std::setprecision(2) << r.seconds << "s  " << r.detail << "\n";
    switch (r.status) {
    case CheckStatus::Pass:
      ++pass;
      break;
    case CheckStatus::Fail:
      ++fail;
      break;
    case CheckStatus::ExpectedFail:
      ++xfail;
      break;
    case CheckStatus::UnexpectedPass:
      ++xpass;
      break;
    }
  }
  std::cout << pass << " passed, " << fail << " failed, " << xfail << " expected failures, "
            << xpass << " unexpected passes\n";
  return all_ok(results) ? kOk : kRuntimeFailure;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Stochastic minimax solvers with decision-dependent distributions"};
  app.require_subcommand(1);

  std::optional<std::string> spec_path;
  std::vector<std::string> spec_paths, grid;
  std::string only, fault;
  unsigned jobs = 0;

  Overrides run_ov, cmp_ov, sweep_ov;
  auto *run = app.add_subcommand("run", "Run one experiment");
  run->add_option("spec,--spec", spec_path, "Spec file");
  run_ov.add_to(*run);

  auto *cmp = app.add_subcommand("compare", "Run several specs on one problem and join the traces");
  cmp->add_option("--spec", spec_paths, "Spec file (repeat, at least two)")->required();
  cmp->add_option("-j,--jobs", jobs, "Parallel runs (0 = hardware threads)");
  cmp_ov.add_to(*cmp);

  auto *sweep = app.add_subcommand("sweep", "Cartesian grid over spec keys");
  sweep->add_option("spec,--spec", spec_path, "Base spec file");
  sweep->add_option("--grid", grid, "Axis as key=v1,v2,... (repeatable)");
  sweep->add_option("-j,--jobs", jobs, "Parallel cells (0 = hardware threads)");
  sweep_ov.add_to(*sweep);

  auto *check = app.add_subcommand("check", "Run the invariant check suite");
  check->add_option("--only", only, "Restrict to one module");
  check->add_option("--inject-fault", fault, "Negative control (jacobian-sign)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run)
      return cmd_run(spec_path, run_ov, *run);
    if (*cmp)
      return cmd_compare(spec_paths, cmp_ov, *cmp, jobs);
    if (*sweep)
      return cmd_sweep(spec_path, grid, sweep_ov, *sweep, jobs);
    return cmd_check(only, fault);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
}
