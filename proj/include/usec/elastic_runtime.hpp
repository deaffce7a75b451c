#pragma once

#include "usec/assignment.hpp"
#include "usec/core_model.hpp"
#include "usec/dense_matrix.hpp"
#include "usec/optimizer.hpp"
#include "usec/placement.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace usec {

enum class AssignmentMode { Heterogeneous, Homogeneous };

struct StragglerPolicy {
  enum class Kind { None, Random, Adversarial };
  Kind kind = Kind::None;
  /// Machines that return nothing each step.
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

/// Worker durations are load / true_speed * (1 + eps), eps uniform in
/// [-amplitude, amplitude].
struct NoiseModel {
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

struct ElasticScenario {
  StoragePlacement placement;
  std::vector<double> true_speeds;
  /// One available set per step; empty means every machine, every step.
  std::vector<AvailableSet> timeline;
  std::size_t steps = 1;
  std::size_t stragglers = 0;
  double gamma = 0.5;
  StragglerPolicy straggler_policy;
  NoiseModel noise;
  /// Starting speed estimate; all ones when unset.
  std::optional<std::vector<double>> initial_estimate;
  AssignmentMode mode = AssignmentMode::Heterogeneous;

  std::size_t machines() const { return placement.machines(); }
  /// Step t is 1-based.
  AvailableSet available_at(std::size_t t) const;
  /// Throws ValidationError / InfeasibleError.
  void validate() const;
};

/// Master-side state carried across steps.
struct MasterState {
  std::vector<double> speed_estimate;
  /// Speeds measured in the previous step; nullopt for machines that did
  /// not report.
  std::vector<std::optional<double>> measured;
  std::vector<double> work;

  static MasterState initial(const ElasticScenario& scenario, std::vector<double> work);
};

struct WorkerReport {
  std::size_t machine = 0;
  /// (global row index, value) pairs.
  std::vector<std::pair<std::size_t, double>> partials;
  double load = 0.0;
  double duration = 0.0;
  double measured_speed = 0.0;
};

struct StepMetrics {
  std::size_t step = 0;
  AssignmentMode mode = AssignmentMode::Heterogeneous;
  std::vector<std::size_t> available;
  /// Estimate the assignment was computed from.
  std::vector<double> speed_estimate;
  /// Optimal (heterogeneous) or achieved (homogeneous) c under the estimate.
  Rational c_estimated;
  /// max over responding machines of dispatched load / true speed.
  double c_realized = 0.0;
  /// Simulated time at which the master held every row.
  double completion_time = 0.0;
  std::vector<double> machine_loads;
  std::vector<std::size_t> stragglers;
};

struct StepResult {
  std::vector<double> y;
  StepMetrics metrics;
  std::vector<WorkerReport> reports;
};

/// s' = gamma * nu + (1 - gamma) * s where nu is present; unchanged otherwise.
std::vector<double> ewma_update(std::span<const double> estimate,
                                std::span<const std::optional<double>> measured, double gamma);

/// Loads dispatched at one step for the given estimate.
ComputationAssignment plan_step(const ElasticScenario& scenario, const AvailableSet& available,
                                std::span<const double> estimate, std::size_t rows_per_submatrix,
                                Rational* c_estimated = nullptr);

/// One step: update the estimate, plan, simulate workers and stragglers,
/// and combine. Computes y = X * master.work; the caller sets the next work
/// vector.
StepResult run_time_step(MasterState& master, const ElasticScenario& scenario, const DenseMatrix& x,
                         std::size_t t);

struct PowerIterationResult {
  std::vector<double> eigenvector;
  double eigenvalue = 0.0;
  std::vector<double> reference;
  std::vector<double> nmse;
  std::vector<StepMetrics> steps;
};

/// Dominant eigenvector by plain power iteration until the update falls
/// below `tolerance` (sign fixed so the largest-magnitude entry is positive).
std::vector<double> reference_eigenvector(const DenseMatrix& x, std::span<const double> start,
                                          double tolerance = 1e-14, std::size_t max_iterations = 100000);

/// min over sign of ||b - v||^2 / ||v||^2.
double nmse(std::span<const double> estimate, std::span<const double> reference);

/// b_{k+1} = X b_k / ||X b_k|| with each product computed by run_time_step.
PowerIterationResult power_iteration(const DenseMatrix& x, const ElasticScenario& scenario,
                                     std::span<const double> start);

}  // namespace usec
