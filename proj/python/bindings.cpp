#include "usec/assignment.hpp"
#include "usec/errors.hpp"
#include "usec/experiments.hpp"
#include "usec/optimizer.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace usec;

namespace {

Rational to_rational(const py::handle& value) {
  if (py::isinstance<py::bool_>(value)) throw ValidationError("expected a number, got bool");
  if (py::isinstance<py::int_>(value)) return Rational(py::str(value).cast<std::string>());
  if (py::isinstance<py::float_>(value)) return from_double(value.cast<double>());
  if (py::isinstance<py::str>(value)) return parse_rational(value.cast<std::string>());
  if (py::hasattr(value, "numerator") && py::hasattr(value, "denominator")) {
    return Rational(py::str(value.attr("numerator")).cast<std::string>()) /
           Rational(py::str(value.attr("denominator")).cast<std::string>());
  }
  throw ValidationError("cannot convert " + py::repr(value).cast<std::string>() + " to a rational");
}

py::object to_fraction(const Rational& r) {
  static py::object fraction = py::module_::import("fractions").attr("Fraction");
  return fraction(to_string(r));
}

std::vector<Rational> rationals(const py::iterable& values) {
  std::vector<Rational> out;
  for (const auto& v : values) out.push_back(to_rational(v));
  return out;
}

AvailableSet available_set(std::size_t machines, const std::optional<std::vector<std::size_t>>& available) {
  if (!available) return AvailableSet::all(machines);
  std::vector<std::size_t> members;
  for (std::size_t n : *available) {
    if (n == 0) throw ValidationError("machine indices are 1-based");
    members.push_back(n - 1);
  }
  return {machines, members};
}

py::list one_based(const std::vector<std::size_t>& values) {
  py::list out;
  for (std::size_t v : values) out.append(v + 1);
  return out;
}

py::list matrix(const LoadMatrix& m) {
  py::list rows;
  for (std::size_t g = 0; g < m.submatrices(); ++g) {
    py::list row;
    for (std::size_t n = 0; n < m.machines(); ++n) row.append(to_fraction(m(g, n)));
    rows.append(row);
  }
  return rows;
}

py::dict solve_py(const StoragePlacement& placement, const py::iterable& speeds,
                  const std::optional<std::vector<std::size_t>>& available, std::size_t stragglers, bool balanced) {
  const AssignmentProblem problem{placement, SpeedVector(rationals(speeds)),
                                  available_set(placement.machines(), available), stragglers};
  SolveOptions options;
  options.balanced = balanced;
  const Optimum opt = solve(problem, options);
  py::dict cert;
  cert["submatrices"] = one_based(opt.certificate.submatrices);
  cert["machines"] = one_based(opt.certificate.machines);
  cert["cut_edges"] = opt.certificate.cut_edges;
  cert["bound"] = opt.certificate.bound ? to_fraction(*opt.certificate.bound) : py::none();
  py::dict out;
  out["c_star"] = to_fraction(opt.c_star);
  out["exact"] = opt.exact;
  out["loads"] = matrix(opt.loads);
  out["certificate"] = cert;
  return out;
}

py::dict sub_assignment(const SubAssignment& sub) {
  py::list alphas, sets, tasks;
  for (const auto& a : sub.alphas) alphas.append(to_fraction(a));
  for (const auto& s : sub.fill_sets) sets.append(one_based(s));
  for (const auto& t : sub.tasks) tasks.append(py::make_tuple(t.rows.begin + 1, t.rows.end, one_based(t.machines)));
  py::dict out;
  out["alphas"] = alphas;
  out["fill_sets"] = sets;
  out["tasks"] = tasks;
  return out;
}

std::string assign_py(const StoragePlacement& placement, const py::iterable& speeds, const std::string& mode,
                      std::size_t rows, const std::optional<std::vector<std::size_t>>& available,
                      std::size_t stragglers) {
  const AssignmentProblem problem{placement, SpeedVector(rationals(speeds)),
                                  available_set(placement.machines(), available), stragglers};
  ComputationAssignment a;
  if (mode == "homogeneous") {
    check_structural_feasibility(problem);
    a = assign_homogeneous(placement, problem.available, stragglers, rows);
  } else if (mode == "heterogeneous") {
    SolveOptions options;
    options.balanced = true;
    a = assign_heterogeneous(solve(problem, options).loads, stragglers, rows);
  } else {
    throw ValidationError("mode must be 'heterogeneous' or 'homogeneous'");
  }
  std::ostringstream out;
  write_assignment_csv(out, a);
  return out.str();
}

py::object verify_py(const std::string& csv, std::size_t stragglers,
                     const std::optional<std::vector<std::size_t>>& available) {
  const ComputationAssignment a = parse_assignment_csv(csv);
  const auto bad = verify_straggler_tolerance(a, stragglers, available_set(a.machines, available));
  if (!bad) return py::none();
  py::dict out;
  out["stragglers"] = one_based(bad->stragglers);
  out["submatrix"] = bad->submatrix + 1;
  out["task"] = bad->task + 1;
  return std::move(out);
}

py::dict trials_py(std::size_t trials, std::uint64_t seed, const std::string& dist, std::size_t machines,
                   std::size_t replication, const std::vector<std::string>& placements) {
  TrialOptions options;
  options.trials = trials;
  options.seed = seed;
  options.distribution = SpeedDistribution::parse(dist);
  options.machines = machines;
  options.replication = replication;
  options.placements = placements;
  TrialReport report;
  {
    py::gil_scoped_release release;
    report = run_trials(options);
  }
  py::dict summaries;
  for (const auto& s : report.summaries) {
    py::dict d;
    d["mean"] = s.mean;
    d["variance"] = s.variance;
    d["min"] = s.min;
    d["max"] = s.max;
    summaries[py::str(s.placement)] = d;
  }
  py::list pairwise;
  for (const auto& p : report.pairwise) pairwise.append(py::make_tuple(p.a, p.b, p.a_worse, p.a_better, p.ties));
  py::list records;
  for (const auto& r : report.records) records.append(py::make_tuple(r.trial, r.seed, r.placement, r.c));
  py::dict out;
  out["summaries"] = summaries;
  out["pairwise"] = pairwise;
  out["records"] = records;
  return out;
}

py::dict simulate_py(const std::string& path) {
  const SimulationSetup setup = load_scenario(path);
  SimulationReport report;
  {
    py::gil_scoped_release release;
    report = run_simulation(setup);
  }
  auto mode = [](const PowerIterationResult& r) {
    py::dict d;
    std::vector<double> times, c_est, c_real;
    for (const auto& s : r.steps) {
      times.push_back(s.completion_time);
      c_est.push_back(to_double(s.c_estimated));
      c_real.push_back(s.c_realized);
    }
    d["completion_time"] = times;
    d["c_est"] = c_est;
    d["c_real"] = c_real;
    d["nmse"] = r.nmse;
    d["eigenvector"] = r.eigenvector;
    d["eigenvalue"] = r.eigenvalue;
    return d;
  };
  py::dict out;
  out["heterogeneous"] = mode(report.heterogeneous);
  out["homogeneous"] = mode(report.homogeneous);
  out["total_time_heterogeneous"] = report.total_time_heterogeneous;
  out["total_time_homogeneous"] = report.total_time_homogeneous;
  out["speedup"] = report.speedup();
  return out;
}

}  // namespace

PYBIND11_MODULE(_usec, m) {
  m.doc() = "Min-max load optimizer, task assignment and elastic simulator for uncoded storage";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SizeCapError>(m, "SizeCapError", base.ptr());

  py::class_<StoragePlacement>(m, "StoragePlacement")
      .def_property_readonly("machines", &StoragePlacement::machines)
      .def_property_readonly("submatrices", &StoragePlacement::submatrices)
      .def_property_readonly("replication", &StoragePlacement::replication)
      .def("stored_by", [](const StoragePlacement& p, std::size_t n) { return one_based(p.stored_by(n - 1)); },
           py::arg("machine"), "1-based sub-matrices stored by a 1-based machine")
      .def("holders", [](const StoragePlacement& p, std::size_t g) { return one_based(p.holders(g - 1)); },
           py::arg("submatrix"))
      .def("to_text", &StoragePlacement::to_text)
      .def("__eq__", [](const StoragePlacement& a, const StoragePlacement& b) { return a == b; })
      .def("__repr__", [](const StoragePlacement& p) {
        return "<StoragePlacement N=" + std::to_string(p.machines()) + " G=" + std::to_string(p.submatrices()) +
               " J=" + std::to_string(p.replication()) + ">";
      });

  m.def("repetition_placement", &repetition_placement, py::arg("machines"), py::arg("submatrices"),
        py::arg("replication"));
  m.def("cyclic_placement", &cyclic_placement, py::arg("machines"), py::arg("replication"));
  m.def("man_placement", &man_placement, py::arg("machines"), py::arg("replication"),
        py::arg("max_submatrices") = kDefaultManSubmatrixCap);
  m.def("parse_placement", [](const std::string& text) { return parse_placement(text); }, py::arg("text"));

  m.def("solve", &solve_py, py::arg("placement"), py::arg("speeds"), py::arg("available") = py::none(),
        py::arg("stragglers") = 0, py::arg("balanced") = false,
        "Optimal computation time c* (as a Fraction), load matrix and bottleneck cut. Indices are 1-based.");
  m.def(
      "fill_submatrix",
      [](const py::iterable& loads, std::size_t redundancy, std::size_t rows) {
        return sub_assignment(fill_submatrix(rationals(loads), redundancy, rows));
      },
      py::arg("loads"), py::arg("redundancy"), py::arg("rows"));
  m.def(
      "homogeneous_cyclic",
      [](std::size_t holders, std::size_t stragglers, std::size_t rows) {
        return sub_assignment(homogeneous_cyclic(holders, stragglers, rows));
      },
      py::arg("holders"), py::arg("stragglers"), py::arg("rows"));
  m.def("assign", &assign_py, py::arg("placement"), py::arg("speeds"), py::arg("mode") = "heterogeneous",
        py::arg("rows") = 60, py::arg("available") = py::none(), py::arg("stragglers") = 0,
        "Assignment dump (CSV text) for the given problem.");
  m.def("verify_straggler_tolerance", &verify_py, py::arg("assignment_csv"), py::arg("stragglers"),
        py::arg("available") = py::none(), "None if every row survives any S stragglers, else a counterexample.");
  m.def("run_trials", &trials_py, py::arg("trials") = 5000, py::arg("seed") = 1, py::arg("distribution") = "exponential:1",
        py::arg("machines") = 6, py::arg("replication") = 3,
        py::arg("placements") = std::vector<std::string>{"repetition", "cyclic", "man"});
  m.def("simulate", &simulate_py, py::arg("scenario_path"));
}
