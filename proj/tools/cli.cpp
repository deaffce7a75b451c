#include "cli.hpp"

#include "usec/assignment.hpp"
#include "usec/errors.hpp"
#include "usec/experiments.hpp"
#include "usec/optimizer.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace usec::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw ValidationError("empty entry in list '" + text + "'");
    out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

std::vector<Rational> parse_speeds(const std::string& text) {
  std::vector<Rational> out;
  for (const auto& item : split_list(text)) out.push_back(parse_rational(item));
  return out;
}

std::vector<std::size_t> parse_machines(const std::string& text, std::size_t machines) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    unsigned long n = 0;
    try {
      n = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || n == 0 || n > machines) {
      throw ValidationError("machine '" + item + "' is not in 1.." + std::to_string(machines));
    }
    out.push_back(n - 1);
  }
  return out;
}

std::string one_based(const std::vector<std::size_t>& values) {
  std::string out = "{";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i] + 1);
  return out + "}";
}

std::string decimal(const Rational& r) { return format_double(to_double(r)); }

std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path path(dir);
  std::filesystem::create_directories(path);
  return path;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
}

/// Options shared by solve and assign.
struct ProblemArgs {
  std::string placement = "cyclic";
  std::size_t machines = 6;
  std::size_t submatrices = 0;
  std::size_t replication = 3;
  std::string file;
  std::string speeds;
  std::size_t stragglers = 0;
  std::string available;
  std::size_t reference = 0;

  void add(CLI::App& app) {
    app.add_option("--placement", placement, "repetition | cyclic | man | file")
        ->check(CLI::IsMember({"repetition", "cyclic", "man", "file"}));
    app.add_option("--n", machines, "number of machines N");
    app.add_option("--g", submatrices, "number of sub-matrices G (repetition only; default N)");
    app.add_option("--j", replication, "copies per sub-matrix J");
    app.add_option("--file", file, "placement file (with --placement file)");
    app.add_option("--speeds", speeds, "comma-separated speeds, e.g. 1,2,4 or 1/3,0.5")->required();
    app.add_option("--s", stragglers, "straggler tolerance S");
    app.add_option("--available", available, "comma-separated 1-based available machines (default: all)");
    app.add_option("--reference-g", reference,
                   "sub-matrix count the speeds refer to; speeds are scaled by G/reference (default: N)");
  }

  StoragePlacement build_placement() const {
    if (placement == "file") {
      if (file.empty()) throw ValidationError("--placement file needs --file");
      return load_placement_file(file);
    }
    if (placement == "repetition") return repetition_placement(machines, submatrices ? submatrices : machines, replication);
    return named_placement(placement, machines, replication);
  }

  AssignmentProblem build(std::ostream& out) const {
    StoragePlacement p = build_placement();
    const std::size_t n = p.machines();
    std::vector<Rational> s = parse_speeds(speeds);
    if (s.size() != n) {
      throw ValidationError("--speeds lists " + std::to_string(s.size()) + " values for " + std::to_string(n) +
                            " machines");
    }
    const std::size_t ref = reference ? reference : n;
    if (ref != p.submatrices()) {
      const Rational factor(p.submatrices(), ref);
      for (auto& v : s) v *= factor;
      out << "note: speeds scaled by G/reference = " << to_string(factor) << "\n";
    }
    AvailableSet avail = available.empty() ? AvailableSet::all(n) : AvailableSet(n, parse_machines(available, n));
    return {std::move(p), SpeedVector(std::move(s)), std::move(avail), stragglers};
  }
};

void print_matrix(std::ostream& out, const LoadMatrix& m) {
  out << "load matrix (rows: sub-matrices, columns: machines)\n";
  out << std::setw(6) << "";
  for (std::size_t n = 0; n < m.machines(); ++n) out << std::setw(12) << ("m" + std::to_string(n + 1));
  out << "\n";
  for (std::size_t g = 0; g < m.submatrices(); ++g) {
    out << std::setw(6) << ("g" + std::to_string(g + 1));
    for (std::size_t n = 0; n < m.machines(); ++n) out << std::setw(12) << to_string(m(g, n));
    out << "\n";
  }
}

int cmd_solve(const ProblemArgs& args, bool assign, std::size_t rows, double tol, bool balanced, std::ostream& out) {
  const AssignmentProblem problem = args.build(out);
  SolveOptions options;
  options.tolerance = tol;
  options.balanced = balanced;
  const Optimum opt = solve(problem, options);

  out << "placement: " << args.placement << " N=" << problem.placement.machines()
      << " G=" << problem.placement.submatrices() << " J=" << problem.placement.replication()
      << " S=" << problem.stragglers << "\n";
  out << "c* = " << to_string(opt.c_star) << " (" << decimal(opt.c_star) << ")" << (opt.exact ? "" : " [within tolerance]")
      << "\n";
  const auto& cert = opt.certificate;
  out << "bottleneck: sub-matrices " << one_based(cert.submatrices) << " machines " << one_based(cert.machines)
      << " cut_edges=" << cert.cut_edges;
  if (cert.bound) out << " bound=" << to_string(*cert.bound);
  out << "\n";
  print_matrix(out, opt.loads);
  const LoadVector mu = load_vector(opt.loads);
  out << "machine loads:";
  for (const auto& v : mu) out << ' ' << to_string(v);
  out << "\n";
  if (assign) {
    out << "\n";
    write_assignment_csv(out, assign_heterogeneous(opt.loads, problem.stragglers, rows));
  }
  return kExitOk;
}

int cmd_assign(const ProblemArgs& args, const std::string& mode, std::size_t rows, const std::string& out_path,
               std::ostream& out) {
  std::ostringstream note;
  const AssignmentProblem problem = args.build(note);
  ComputationAssignment a;
  if (mode == "homogeneous") {
    check_structural_feasibility(problem);
    a = assign_homogeneous(problem.placement, problem.available, problem.stragglers, rows);
  } else {
    SolveOptions options;
    options.balanced = true;
    a = assign_heterogeneous(solve(problem, options).loads, problem.stragglers, rows);
  }
  std::ostringstream csv;
  write_assignment_csv(csv, a);
  if (out_path.empty()) {
    out << csv.str();
  } else {
    write_file(out_path, csv.str());
    out << note.str() << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

int cmd_verify(const std::string& path, std::size_t stragglers, const std::string& available,
               const std::string& placement_file, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const ComputationAssignment a = parse_assignment_csv(buffer.str());
  const AvailableSet avail =
      available.empty() ? AvailableSet::all(a.machines) : AvailableSet(a.machines, parse_machines(available, a.machines));

  std::vector<std::string> problems;
  if (!placement_file.empty()) {
    problems = validate_assignment(a, load_placement_file(placement_file), avail, stragglers);
  } else {
    for (const auto& sub : a.subs) {
      std::size_t next = 0;
      for (const auto& task : sub.tasks) {
        if (task.rows.begin != next) problems.push_back("sub-matrix " + std::to_string(sub.submatrix + 1) +
                                                        ": row sets are not consecutive");
        next = task.rows.end;
      }
      if (next != a.rows_per_submatrix) {
        problems.push_back("sub-matrix " + std::to_string(sub.submatrix + 1) + ": rows not fully covered");
      }
    }
  }
  for (const auto& p : problems) out << "invalid: " << p << "\n";
  if (!problems.empty()) return kExitInfeasible;

  if (auto bad = verify_straggler_tolerance(a, stragglers, avail)) {
    const auto& task = a.subs[bad->submatrix].tasks[bad->task];
    out << "counterexample: stragglers " << one_based(bad->stragglers) << " leave rows " << task.rows.begin + 1 << ".."
        << task.rows.end << " of sub-matrix " << bad->submatrix + 1 << " uncovered\n";
    return kExitInfeasible;
  }
  out << "ok: every row survives any " << stragglers << " stragglers among " << avail.size() << " machines\n";
  return kExitOk;
}

int cmd_trials(const TrialOptions& options, const std::string& out_dir, std::ostream& out) {
  const TrialReport report = run_trials(options);
  out << "trials=" << options.trials << " seed=" << options.seed << " distribution=" << options.distribution.to_string()
      << " N=" << options.machines << " J=" << options.replication << "\n";
  out << std::left << std::setw(12) << "placement" << std::setw(24) << "mean" << std::setw(24) << "variance" << "\n";
  for (const auto& s : report.summaries) {
    out << std::setw(12) << s.placement << std::setw(24) << format_double(s.mean) << std::setw(24)
        << format_double(s.variance) << "\n";
  }
  out << std::right;
  for (const auto& p : report.pairwise) {
    out << p.a << " worse than " << p.b << ": " << p.a_worse << "/" << options.trials << " (better " << p.a_better
        << ", ties " << p.ties << ")\n";
  }
  if (!out_dir.empty()) {
    const auto dir = ensure_dir(out_dir);
    std::ostringstream trials, summary, hist;
    write_trials_csv(trials, report);
    write_summary_csv(summary, report);
    write_histogram_csv(hist, report);
    write_file(dir / "trials.csv", trials.str());
    write_file(dir / "summary.csv", summary.str());
    write_file(dir / "histogram.csv", hist.str());
    out << "wrote " << (dir / "trials.csv").string() << ", summary.csv, histogram.csv\n";
  }
  return kExitOk;
}

int cmd_simulate(const std::string& scenario, const std::string& out_dir, std::ostream& out) {
  const SimulationSetup setup = load_scenario(scenario);
  const SimulationReport report = run_simulation(setup);
  out << "steps=" << setup.scenario.steps << " S=" << setup.scenario.stragglers << " matrix=" << setup.matrix.rows()
      << "x" << setup.matrix.cols() << "\n";
  out << "total time heterogeneous: " << format_double(report.total_time_heterogeneous) << "\n";
  out << "total time homogeneous:   " << format_double(report.total_time_homogeneous) << "\n";
  out << "speedup: " << format_double(report.speedup()) << "\n";
  out << "final nmse heterogeneous: " << format_double(report.heterogeneous.nmse.back())
      << ", homogeneous: " << format_double(report.homogeneous.nmse.back()) << "\n";
  if (!out_dir.empty()) {
    const auto dir = ensure_dir(out_dir);
    std::ostringstream sim, steps;
    write_simulation_csv(sim, report);
    write_steps_csv(steps, report);
    write_file(dir / "simulate.csv", sim.str());
    write_file(dir / "steps.csv", steps.str());
    out << "wrote " << (dir / "simulate.csv").string() << ", steps.csv\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous uncoded-storage elastic computing: load optimizer, assignment and simulator", "usec"};
  app.require_subcommand(1);

  ProblemArgs solve_args;
  bool assign = false, balanced = false;
  std::size_t solve_rows = 60;
  double tol = 1e-9;
  auto* solve_cmd = app.add_subcommand("solve", "optimal loads and computation time");
  solve_args.add(*solve_cmd);
  solve_cmd->add_flag("--assign", assign, "also print the row-set/machine-set dump");
  solve_cmd->add_option("--rows", solve_rows, "rows per sub-matrix for --assign");
  solve_cmd->add_option("--tol", tol, "bisection tolerance");
  solve_cmd->add_flag("--balanced", balanced, "balance the non-bottleneck machines");

  ProblemArgs assign_args;
  std::string mode = "heterogeneous", assign_out;
  std::size_t assign_rows = 60;
  auto* assign_cmd = app.add_subcommand("assign", "write the task assignment dump");
  assign_args.add(*assign_cmd);
  assign_cmd->add_option("--mode", mode, "heterogeneous | homogeneous")
      ->check(CLI::IsMember({"heterogeneous", "homogeneous"}));
  assign_cmd->add_option("--rows", assign_rows, "rows per sub-matrix");
  assign_cmd->add_option("--out", assign_out, "output file (default: stdout)");

  std::string verify_path, verify_available, verify_placement;
  std::size_t verify_s = 0;
  auto* verify_cmd = app.add_subcommand("verify", "check an assignment dump against S stragglers");
  verify_cmd->add_option("--assignment", verify_path, "assignment dump")->required();
  verify_cmd->add_option("--s", verify_s, "straggler tolerance S");
  verify_cmd->add_option("--available", verify_available, "comma-separated 1-based available machines");
  verify_cmd->add_option("--placement-file", verify_placement, "also check machine sets against a placement");

  TrialOptions trial_options;
  std::string dist = "exponential:1", placements = "repetition,cyclic,man", trials_out;
  auto* trials_cmd = app.add_subcommand("trials", "random-speed comparison of placements");
  trials_cmd->add_option("--trials", trial_options.trials, "number of speed draws");
  trials_cmd->add_option("--seed", trial_options.seed, "base seed");
  trials_cmd->add_option("--dist", dist, "exponential[:rate] | uniform:low:high | constant:value");
  trials_cmd->add_option("--n", trial_options.machines, "machines N");
  trials_cmd->add_option("--j", trial_options.replication, "copies per sub-matrix J");
  trials_cmd->add_option("--placements", placements, "comma-separated placement names");
  trials_cmd->add_option("--reference-g", trial_options.reference_submatrices, "G the speeds refer to (default N)");
  trials_cmd->add_option("--bins", trial_options.bins, "histogram bins");
  trials_cmd->add_option("--out", trials_out, "directory for trials.csv, summary.csv, histogram.csv");

  std::string scenario, simulate_out;
  auto* simulate_cmd = app.add_subcommand("simulate", "power iteration in both assignment modes");
  simulate_cmd->add_option("scenario", scenario, "scenario JSON file")->required();
  simulate_cmd->add_option("--out", simulate_out, "directory for simulate.csv and steps.csv");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_args, assign, solve_rows, tol, balanced, out);
    if (*assign_cmd) return cmd_assign(assign_args, mode, assign_rows, assign_out, out);
    if (*verify_cmd) return cmd_verify(verify_path, verify_s, verify_available, verify_placement, out);
    if (*trials_cmd) {
      trial_options.distribution = SpeedDistribution::parse(dist);
      trial_options.placements = split_list(placements);
      return cmd_trials(trial_options, trials_out, out);
    }
    if (*simulate_cmd) return cmd_simulate(scenario, simulate_out, out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace usec::cli
