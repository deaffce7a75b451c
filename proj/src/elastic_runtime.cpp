#include "usec/elastic_runtime.hpp"

#include "usec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace usec {

namespace {

std::mt19937_64 step_rng(std::uint64_t seed, std::size_t step) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step)};
  return std::mt19937_64(seq);
}

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<std::size_t> pick_stragglers(const ElasticScenario& scenario, const AvailableSet& available,
                                         std::size_t step) {
  const auto& policy = scenario.straggler_policy;
  std::vector<std::size_t> pool = available.members();
  const std::size_t count = std::min(policy.count, pool.size());
  std::vector<std::size_t> out;
  switch (policy.kind) {
    case StragglerPolicy::Kind::None:
      break;
    case StragglerPolicy::Kind::Random: {
      auto rng = step_rng(policy.seed, step);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
      }
      break;
    }
    case StragglerPolicy::Kind::Adversarial: {
      std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
        return scenario.true_speeds[a] > scenario.true_speeds[b];
      });
      out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

AvailableSet ElasticScenario::available_at(std::size_t t) const {
  if (timeline.empty()) return AvailableSet::all(machines());
  if (t == 0 || t > timeline.size()) throw ValidationError("step " + std::to_string(t) + " outside the timeline");
  return timeline[t - 1];
}

void ElasticScenario::validate() const {
  const std::size_t n = machines();
  if (true_speeds.size() != n) throw ValidationError("true_speeds must list one speed per machine");
  for (double s : true_speeds) {
    if (!(s > 0) || !std::isfinite(s)) throw ValidationError("true speeds must be positive and finite");
  }
  if (initial_estimate) {
    if (initial_estimate->size() != n) throw ValidationError("initial_estimate must list one speed per machine");
    for (double s : *initial_estimate) {
      if (!(s > 0) || !std::isfinite(s)) throw ValidationError("initial estimate must be positive and finite");
    }
  }
  if (steps == 0) throw ValidationError("steps must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
  if (noise.amplitude < 0.0 || noise.amplitude >= 1.0) throw ValidationError("noise amplitude must lie in [0, 1)");
  if (!timeline.empty() && timeline.size() != steps) {
    throw ValidationError("timeline has " + std::to_string(timeline.size()) + " entries for " + std::to_string(steps) +
                          " steps");
  }
  const std::size_t distinct_steps = timeline.empty() ? 1 : steps;
  for (std::size_t t = 1; t <= distinct_steps; ++t) {
    const AvailableSet available = available_at(t);
    if (available.universe() != n) throw ValidationError("step " + std::to_string(t) + " available set has wrong N");
    for (std::size_t g = 0; g < placement.submatrices(); ++g) {
      std::size_t have = 0;
      for (std::size_t m : placement.holders(g)) have += available.contains(m) ? 1 : 0;
      if (have < stragglers + 1) {
        throw InfeasibleError("step " + std::to_string(t) + ": sub-matrix " + std::to_string(g + 1) + " has " +
                                  std::to_string(have) + " available holders, needs " + std::to_string(stragglers + 1),
                              g);
      }
    }
  }
}

MasterState MasterState::initial(const ElasticScenario& scenario, std::vector<double> work) {
  MasterState state;
  state.speed_estimate = scenario.initial_estimate.value_or(std::vector<double>(scenario.machines(), 1.0));
  state.measured.assign(state.speed_estimate.begin(), state.speed_estimate.end());
  state.work = std::move(work);
  return state;
}

std::vector<double> ewma_update(std::span<const double> estimate, std::span<const std::optional<double>> measured,
                                double gamma) {
  std::vector<double> out(estimate.begin(), estimate.end());
  for (std::size_t n = 0; n < out.size() && n < measured.size(); ++n) {
    if (measured[n]) out[n] = gamma * *measured[n] + (1.0 - gamma) * out[n];
  }
  return out;
}

ComputationAssignment plan_step(const ElasticScenario& scenario, const AvailableSet& available,
                                std::span<const double> estimate, std::size_t rows_per_submatrix,
                                Rational* c_estimated) {
  const SpeedVector speeds = SpeedVector::from_doubles(estimate);
  if (scenario.mode == AssignmentMode::Homogeneous) {
    ComputationAssignment a = assign_homogeneous(scenario.placement, available, scenario.stragglers, rows_per_submatrix);
    if (c_estimated) *c_estimated = computation_time(assignment_to_load_matrix(a), speeds, available);
    return a;
  }
  const AssignmentProblem problem{scenario.placement, speeds, available, scenario.stragglers};
  SolveOptions options;
  options.balanced = true;
  const Optimum optimum = solve(problem, options);
  if (c_estimated) *c_estimated = optimum.c_star;
  return assign_heterogeneous(optimum.loads, scenario.stragglers, rows_per_submatrix);
}

StepResult run_time_step(MasterState& master, const ElasticScenario& scenario, const DenseMatrix& x, std::size_t t) {
  const std::size_t machines = scenario.machines();
  const std::size_t submatrices = scenario.placement.submatrices();
  if (x.rows() % submatrices != 0) throw ValidationError("matrix rows are not divisible by G");
  if (master.work.size() != x.cols()) throw ValidationError("work vector length does not match matrix columns");
  const std::size_t rows_per_sub = x.rows() / submatrices;
  const AvailableSet available = scenario.available_at(t);

  master.speed_estimate = ewma_update(master.speed_estimate, master.measured, scenario.gamma);

  StepResult result;
  StepMetrics& metrics = result.metrics;
  metrics.step = t;
  metrics.mode = scenario.mode;
  metrics.available = available.members();
  metrics.speed_estimate = master.speed_estimate;
  const ComputationAssignment plan =
      plan_step(scenario, available, master.speed_estimate, rows_per_sub, &metrics.c_estimated);

  const std::vector<std::size_t> straggling = pick_stragglers(scenario, available, t);
  metrics.stragglers = straggling;

  std::vector<double> epsilon(machines, 0.0);
  if (scenario.noise.amplitude > 0.0) {
    auto rng = step_rng(scenario.noise.seed, t);
    for (auto& e : epsilon) e = scenario.noise.amplitude * (2.0 * unit_uniform(rng) - 1.0);
  }

  const std::vector<std::size_t> rows = rows_per_machine(plan);
  metrics.machine_loads.assign(machines, 0.0);
  std::vector<std::optional<double>> measured(machines);
  for (std::size_t n : available) {
    metrics.machine_loads[n] = static_cast<double>(rows[n]) / static_cast<double>(rows_per_sub);
    if (rows[n] == 0 || std::binary_search(straggling.begin(), straggling.end(), n)) continue;

    WorkerReport report;
    report.machine = n;
    report.load = metrics.machine_loads[n];
    for (const auto& sub : plan.subs) {
      for (const auto& task : sub.tasks) {
        if (!std::binary_search(task.machines.begin(), task.machines.end(), n)) continue;
        for (std::size_t r = task.rows.begin; r < task.rows.end; ++r) {
          const std::size_t global = sub.submatrix * rows_per_sub + r;
          report.partials.emplace_back(global, row_dot(x, global, master.work));
        }
      }
    }
    report.duration = report.load / scenario.true_speeds[n] * (1.0 + epsilon[n]);
    report.measured_speed = report.load / report.duration;
    measured[n] = report.measured_speed;
    metrics.c_realized = std::max(metrics.c_realized, report.load / scenario.true_speeds[n]);
    result.reports.push_back(std::move(report));
  }

  std::stable_sort(result.reports.begin(), result.reports.end(),
                   [](const WorkerReport& a, const WorkerReport& b) { return a.duration < b.duration; });

  result.y.assign(x.rows(), 0.0);
  std::vector<bool> have(x.rows(), false);
  std::size_t covered = 0;
  for (const auto& report : result.reports) {
    if (covered == x.rows()) break;
    for (const auto& [row, value] : report.partials) {
      if (!have[row]) {
        have[row] = true;
        result.y[row] = value;
        ++covered;
      } else if (result.y[row] != value) {
        throw Error("redundant results for row " + std::to_string(row + 1) + " disagree");
      }
    }
    metrics.completion_time = report.duration;
  }
  if (covered != x.rows()) {
    const auto missing = static_cast<std::size_t>(std::find(have.begin(), have.end(), false) - have.begin());
    throw InfeasibleError("step " + std::to_string(t) + " is unrecoverable: " + std::to_string(straggling.size()) +
                              " stragglers left row " + std::to_string(missing + 1) + " uncomputed",
                          missing / rows_per_sub);
  }
  master.measured = std::move(measured);
  return result;
}

std::vector<double> reference_eigenvector(const DenseMatrix& x, std::span<const double> start, double tolerance,
                                          std::size_t max_iterations) {
  const double start_norm = euclidean_norm(start);
  if (start_norm == 0.0) throw ValidationError("start vector is zero");
  std::vector<double> b(start.begin(), start.end());
  for (double& v : b) v /= start_norm;

  double best_change = INFINITY;
  std::size_t since_improvement = 0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::vector<double> y = multiply(x, b);
    const double norm = euclidean_norm(y);
    if (norm == 0.0) throw Error("power iteration hit the null space");
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] /= norm;
      plus += (y[i] - b[i]) * (y[i] - b[i]);
      minus += (y[i] + b[i]) * (y[i] + b[i]);
    }
    const double change = std::sqrt(std::min(plus, minus));
    b = std::move(y);
    if (change < tolerance) break;
    if (change < best_change) {
      best_change = change;
      since_improvement = 0;
    } else if (++since_improvement > 50) {
      break;
    }
  }
  const auto peak = std::max_element(b.begin(), b.end(), [](double a, double c) { return std::abs(a) < std::abs(c); });
  if (*peak < 0) {
    for (double& v : b) v = -v;
  }
  return b;
}

double nmse(std::span<const double> estimate, std::span<const double> reference) {
  double plus = 0.0, minus = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    plus += (estimate[i] - reference[i]) * (estimate[i] - reference[i]);
    minus += (estimate[i] + reference[i]) * (estimate[i] + reference[i]);
    scale += reference[i] * reference[i];
  }
  return std::min(plus, minus) / scale;
}

PowerIterationResult power_iteration(const DenseMatrix& x, const ElasticScenario& scenario,
                                     std::span<const double> start) {
  if (x.rows() != x.cols() || !x.is_symmetric()) throw ValidationError("power iteration needs a symmetric matrix");
  if (start.size() != x.cols()) throw ValidationError("start vector length does not match the matrix");
  scenario.validate();

  PowerIterationResult out;
  out.reference = reference_eigenvector(x, start);
  MasterState master = MasterState::initial(scenario, std::vector<double>(start.begin(), start.end()));
  for (std::size_t t = 1; t <= scenario.steps; ++t) {
    StepResult step = run_time_step(master, scenario, x, t);
    const double norm = euclidean_norm(step.y);
    if (norm == 0.0) throw Error("step " + std::to_string(t) + ": X b is zero");
    for (double& v : step.y) v /= norm;
    master.work = std::move(step.y);
    out.nmse.push_back(nmse(master.work, out.reference));
    out.steps.push_back(std::move(step.metrics));
  }
  out.eigenvector = master.work;
  const std::vector<double> xb = multiply(x, out.eigenvector);
  out.eigenvalue = std::inner_product(xb.begin(), xb.end(), out.eigenvector.begin(), 0.0);
  return out;
}

}  // namespace usec
