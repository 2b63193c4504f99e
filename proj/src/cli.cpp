#include "cavsched/cli.hpp"

#include "cavsched/errors.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <thread>
#include <tuple>

namespace cavsched {

ResultRow make_row(const SimConfig& cfg, const Metrics& m)
{
  return {std::string(to_string(cfg.algorithm)), cfg.seed, cfg.n_vehicles, cfg.lambda,
          std::string(to_string(cfg.mode)), m.t_evc, m.t_attd, m.d_all};
}

std::string csv_field(const std::string& value)
{
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

std::string fmt(const char* pattern, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

} // namespace

std::string format_csv(const std::vector<ResultRow>& rows)
{
  std::string out = "algorithm,seed,n,lambda,mode,t_evc,t_attd,d_all\n";
  for (const auto& r : rows) {
    out += csv_field(r.algorithm) + ',' + std::to_string(r.seed) + ',' + std::to_string(r.n) + ',' +
           fmt("%g", r.lambda) + ',' + csv_field(r.mode) + ',' + fmt("%.4f", r.t_evc) + ',' +
           fmt("%.4f", r.t_attd) + ',' + std::to_string(r.d_all) + '\n';
  }
  return out;
}

std::string format_json(const std::vector<ResultRow>& rows)
{
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["algorithm"] = r.algorithm;
    o["seed"] = r.seed;
    o["n"] = r.n;
    o["lambda"] = r.lambda;
    o["mode"] = r.mode;
    o["t_evc"] = r.t_evc;
    o["t_attd"] = r.t_attd;
    o["d_all"] = r.d_all;
    doc.push_back(std::move(o));
  }
  return doc.dump(2) + "\n";
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec, int jobs)
{
  if (spec.repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (spec.algorithms.empty()) throw ConfigError("no algorithms selected");
  struct Task
  {
    int n;
    double lambda;
    int rep;
  };
  std::vector<Task> tasks;
  for (int n : spec.vehicle_counts)
    for (double lambda : spec.lambdas)
      for (int rep = 0; rep < spec.repetitions; ++rep) tasks.push_back({n, lambda, rep});

  std::vector<std::vector<ResultRow>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t k = cursor++; k < tasks.size(); k = cursor++) {
      try {
        SimConfig cfg;
        cfg.scenario = spec.scenario;
        cfg.n_vehicles = tasks[k].n;
        cfg.lambda = tasks[k].lambda;
        cfg.seed = spec.base_seed + static_cast<std::uint64_t>(tasks[k].rep);
        cfg.mode = spec.mode;
        cfg.leader_start = spec.leader_start;
        const auto arrivals = sample_arrivals(cfg);
        for (Algorithm a : spec.algorithms) {
          cfg.algorithm = a;
          results[k].push_back(make_row(cfg, run_with_arrivals(cfg, arrivals).metrics));
        }
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<ResultRow> rows;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    rows.insert(rows.end(), results[k].begin(), results[k].end());
  }
  return rows;
}

Quartiles describe(std::vector<double> values)
{
  if (values.empty()) throw ContractViolation("statistics of an empty sample");
  std::sort(values.begin(), values.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  Quartiles q;
  for (double v : values) q.mean += v;
  q.mean /= static_cast<double>(values.size());
  q.median = at(0.5);
  q.q1 = at(0.25);
  q.q3 = at(0.75);
  return q;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows)
{
  using Key = std::tuple<std::string, int, double, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    Key key{r.algorithm, r.n, r.lambda, r.mode};
    auto& g = groups[key];
    if (g.empty()) order.push_back(key);
    g.push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    std::vector<double> evc, delay, depth;
    for (const ResultRow* r : g) {
      evc.push_back(r->t_evc);
      delay.push_back(r->t_attd);
      depth.push_back(r->d_all);
    }
    SummaryRow s;
    std::tie(s.algorithm, s.n, s.lambda, s.mode) = key;
    s.count = static_cast<int>(g.size());
    s.t_evc = describe(evc);
    s.t_attd = describe(delay);
    s.d_all = describe(depth);
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_summary_csv(const std::vector<SummaryRow>& rows)
{
  std::string out = "algorithm,n,lambda,mode,count";
  for (const char* metric : {"t_evc", "t_attd", "d_all"})
    for (const char* stat : {"mean", "median", "q1", "q3"}) out += std::string(",") + metric + "_" + stat;
  out += '\n';
  for (const auto& s : rows) {
    out += csv_field(s.algorithm) + ',' + std::to_string(s.n) + ',' + fmt("%g", s.lambda) + ',' +
           csv_field(s.mode) + ',' + std::to_string(s.count);
    for (const Quartiles* q : {&s.t_evc, &s.t_attd, &s.d_all})
      out += ',' + fmt("%.4f", q->mean) + ',' + fmt("%.4f", q->median) + ',' + fmt("%.4f", q->q1) + ',' +
             fmt("%.4f", q->q3);
    out += '\n';
  }
  return out;
}

namespace {

struct Usage : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

Algorithm algorithm_arg(const std::string& flag, const std::string& value)
{
  auto a = parse_algorithm(value);
  if (!a) throw Usage(flag + ": unknown algorithm '" + value + "' (dfst, idfst, mcc-greedy, mcc-brute)");
  return *a;
}

Mode mode_arg(const std::string& value)
{
  auto m = parse_mode(value);
  if (!m) throw Usage("--mode: expected batch or online, got '" + value + "'");
  return *m;
}

void write_output(const std::string& path, const std::string& text, std::ostream& out)
{
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

IntersectionConfig scenario_arg(const std::string& path)
{
  return path.empty() ? default_intersection() : load_scenario_file(path);
}

std::string schedule_document(const ConflictDirectedGraph& cdg, Algorithm algorithm)
{
  nlohmann::ordered_json doc;
  doc["algorithm"] = std::string(to_string(algorithm));
  SpanningTree tree;
  if (algorithm == Algorithm::MccGreedy || algorithm == Algorithm::MccBrute) {
    const CoexistenceGraph cug = build_cug(cdg);
    const CliqueCover cover = algorithm == Algorithm::MccGreedy ? mcc_greedy(cug) : mcc_bruteforce(cug);
    const LayerPlan plan = arrange_cover(cover, cdg);
    doc["cover"] = nlohmann::json::parse(cover_to_json(cover));
    doc["swaps"] = plan.swaps;
    tree = layers_to_tree(plan.layers);
  } else {
    tree = schedule(cdg, algorithm);
  }
  doc["tree"] = nlohmann::json::parse(tree_to_json(tree));
  doc["feasible"] = verify_feasible(tree, cdg).feasible;
  return doc.dump(2) + "\n";
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Conflict-aware scheduling and platoon control for an unsignalised intersection"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, format = "csv", trace_path, schedule_path, summary_path, arrivals_path;
  std::string algorithm = "idfst", mode = "online";
  std::vector<std::string> algorithms{"dfst", "idfst", "mcc-greedy"};
  int vehicles = 30, reps = 1, jobs = 1;
  std::vector<int> vehicle_list{30};
  double lambda = 3.0;
  std::vector<double> lambda_list{3.0};
  std::uint64_t seed = 1;
  std::optional<double> leader_start;

  auto* run_cmd = app.add_subcommand("run", "Simulate one configuration and print its metrics row");
  run_cmd->add_option("--scenario", scenario_path, "Scenario JSON (default: built-in intersection)");
  run_cmd->add_option("--algorithm", algorithm, "dfst | idfst | mcc-greedy | mcc-brute");
  run_cmd->add_option("--vehicles", vehicles, "Number of vehicles")->check(CLI::Range(1, 100000));
  run_cmd->add_option("--lambda", lambda, "Mean arrival gap per lane, s")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "Random seed");
  run_cmd->add_option("--mode", mode, "batch | online");
  run_cmd->add_option("--leader-start", leader_start, "Leader remaining distance at t = 0, m");
  run_cmd->add_option("--out", out_path, "Output file (default: stdout)");
  run_cmd->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--dump-schedule", schedule_path, "Write the final schedule as JSON to this file");
  run_cmd->add_option("--trace", trace_path, "Write the per-step trace CSV to this file");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of configurations with matched arrivals");
  sweep_cmd->add_option("--scenario", scenario_path, "Scenario JSON (default: built-in intersection)");
  sweep_cmd->add_option("--algorithms", algorithms, "Comma-separated algorithm list")->delimiter(',');
  sweep_cmd->add_option("--vehicles", vehicle_list, "Comma-separated vehicle counts")
    ->delimiter(',')
    ->check(CLI::Range(1, 100000));
  sweep_cmd->add_option("--lambda", lambda_list, "Comma-separated mean gaps, s")
    ->delimiter(',')
    ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--reps", reps, "Repetitions per cell")->check(CLI::Range(1, 1000000));
  sweep_cmd->add_option("--seed", seed, "Base seed; repetition r uses seed + r");
  sweep_cmd->add_option("--mode", mode, "batch | online");
  sweep_cmd->add_option("--leader-start", leader_start, "Leader remaining distance at t = 0, m");
  sweep_cmd->add_option("--jobs", jobs, "Parallel workers")->check(CLI::Range(1, 1024));
  sweep_cmd->add_option("--out", out_path, "Output file (default: stdout)");
  sweep_cmd->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--summary", summary_path, "Write per-cell mean/median/quartiles CSV here");

  auto* schedule_cmd = app.add_subcommand("schedule", "Compute a schedule for an arrival file");
  schedule_cmd->add_option("--scenario", scenario_path, "Scenario JSON (default: built-in intersection)");
  schedule_cmd->add_option("--arrivals", arrivals_path, "Rows of id,lane,t_in")->required();
  schedule_cmd->add_option("--algorithm", algorithm, "dfst | idfst | mcc-greedy | mcc-brute");
  schedule_cmd->add_option("--out", out_path, "Output file (default: stdout)");

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file");
  validate_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();

  try {
    std::vector<std::string> args;
    for (int k = argc - 1; k > 0; --k) args.emplace_back(argv[k]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*validate_cmd) {
      const IntersectionConfig cfg = load_scenario_file(scenario_path);
      const ConflictCounts c = count_conflicts(cfg);
      out << "ok: " << cfg.movements.size() << " movements, " << c.crossing << " crossing, " << c.converging
          << " converging, " << c.diverging_lanes << " approach lanes\n";
      return 0;
    }

    const IntersectionConfig scenario = scenario_arg(scenario_path);

    if (*schedule_cmd) {
      const Algorithm a = algorithm_arg("--algorithm", algorithm);
      const auto arrivals = load_arrivals_file(arrivals_path, scenario);
      write_output(out_path, schedule_document(batch_cdg(arrivals, scenario), a), out);
      return 0;
    }

    if (*run_cmd) {
      SimConfig cfg;
      cfg.scenario = scenario;
      cfg.algorithm = algorithm_arg("--algorithm", algorithm);
      cfg.n_vehicles = vehicles;
      cfg.lambda = lambda;
      cfg.seed = seed;
      cfg.mode = mode_arg(mode);
      cfg.leader_start = leader_start;
      cfg.record_trace = !trace_path.empty();
      const RunResult r = run(cfg);
      const std::vector<ResultRow> rows{make_row(cfg, r.metrics)};
      write_output(out_path, format == "json" ? format_json(rows) : format_csv(rows), out);
      if (!trace_path.empty()) write_output(trace_path, trace_to_csv(r.trace), out);
      if (!schedule_path.empty()) write_output(schedule_path, tree_to_json(r.tree), out);
      return 0;
    }

    SweepSpec spec;
    spec.scenario = scenario;
    spec.algorithms.clear();
    for (const auto& name : algorithms) spec.algorithms.push_back(algorithm_arg("--algorithms", name));
    spec.vehicle_counts = vehicle_list;
    spec.lambdas = lambda_list;
    spec.repetitions = reps;
    spec.base_seed = seed;
    spec.mode = mode_arg(mode);
    spec.leader_start = leader_start;
    const auto rows = run_sweep(spec, jobs);
    write_output(out_path, format == "json" ? format_json(rows) : format_csv(rows), out);
    if (!summary_path.empty()) write_output(summary_path, format_summary_csv(summarize(rows)), out);
    return 0;
  } catch (const Usage& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

} // namespace cavsched
