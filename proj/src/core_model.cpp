#include "usec/core_model.hpp"

#include "usec/errors.hpp"

#include <algorithm>
#include <cmath>

namespace usec {

void ProblemDims::validate() const {
  if (machines == 0) throw ValidationError("N must be positive");
  if (submatrices == 0) throw ValidationError("G must be positive");
  if (replication == 0 || replication > machines) throw ValidationError("J must satisfy 1 <= J <= N");
  if (rows % submatrices != 0) {
    throw ValidationError("q=" + std::to_string(rows) + " is not divisible by G=" + std::to_string(submatrices));
  }
}

SpeedVector::SpeedVector(std::vector<Rational> speeds) : speeds_(std::move(speeds)) {
  for (std::size_t n = 0; n < speeds_.size(); ++n) {
    if (speeds_[n] <= 0) throw ValidationError("speed of machine " + std::to_string(n + 1) + " must be positive");
  }
}

SpeedVector::SpeedVector(std::initializer_list<double> speeds)
    : SpeedVector(from_doubles(std::span<const double>(speeds.begin(), speeds.size()))) {}

SpeedVector SpeedVector::from_doubles(std::span<const double> speeds) {
  std::vector<Rational> exact;
  exact.reserve(speeds.size());
  for (std::size_t n = 0; n < speeds.size(); ++n) {
    if (!(speeds[n] > 0) || !std::isfinite(speeds[n])) {
      throw ValidationError("speed of machine " + std::to_string(n + 1) + " must be positive and finite");
    }
    exact.push_back(from_double(speeds[n]));
  }
  return SpeedVector(std::move(exact));
}

std::vector<double> SpeedVector::to_doubles() const {
  std::vector<double> out;
  out.reserve(speeds_.size());
  for (const auto& s : speeds_) out.push_back(to_double(s));
  return out;
}

AvailableSet::AvailableSet(std::size_t universe, std::vector<std::size_t> members)
    : universe_(universe), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  if (members_.empty()) throw ValidationError("available set is empty");
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw ValidationError("available set lists a machine twice");
  }
  if (members_.back() >= universe_) {
    throw ValidationError("available machine " + std::to_string(members_.back() + 1) + " outside 1.." +
                          std::to_string(universe_));
  }
}

AvailableSet AvailableSet::all(std::size_t universe) {
  std::vector<std::size_t> members(universe);
  for (std::size_t n = 0; n < universe; ++n) members[n] = n;
  return {universe, std::move(members)};
}

bool AvailableSet::contains(std::size_t n) const { return std::binary_search(members_.begin(), members_.end(), n); }

LoadMatrix::LoadMatrix(std::size_t submatrices, std::size_t machines)
    : submatrices_(submatrices), machines_(machines), entries_(submatrices * machines) {}

Rational LoadMatrix::row_sum(std::size_t g) const {
  Rational sum = 0;
  for (std::size_t n = 0; n < machines_; ++n) sum += (*this)(g, n);
  return sum;
}

std::vector<double> LoadMatrix::to_doubles() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(to_double(e));
  return out;
}

LoadVector load_vector(const LoadMatrix& loads) {
  LoadVector totals(loads.machines());
  for (std::size_t g = 0; g < loads.submatrices(); ++g) {
    for (std::size_t n = 0; n < loads.machines(); ++n) totals[n] += loads(g, n);
  }
  return totals;
}

namespace {

void check_time_inputs(const LoadMatrix& loads, const SpeedVector& speeds, const AvailableSet& available) {
  if (speeds.size() != loads.machines() || available.universe() != loads.machines()) {
    throw ValidationError("load matrix, speed vector and available set disagree on N");
  }
}

}  // namespace

Rational computation_time(const LoadMatrix& loads, const SpeedVector& speeds, const AvailableSet& available) {
  check_time_inputs(loads, speeds, available);
  const LoadVector totals = load_vector(loads);
  Rational worst = 0;
  for (std::size_t n = 0; n < totals.size(); ++n) {
    if (!available.contains(n)) {
      if (totals[n] != 0) throw ValidationError("unavailable machine " + std::to_string(n + 1) + " carries load");
      continue;
    }
    worst = std::max(worst, Rational(totals[n] / speeds[n]));
  }
  return worst;
}

std::size_t bottleneck_machine(const LoadMatrix& loads, const SpeedVector& speeds, const AvailableSet& available) {
  const Rational worst = computation_time(loads, speeds, available);
  const LoadVector totals = load_vector(loads);
  for (std::size_t n : available) {
    if (totals[n] / speeds[n] == worst) return n;
  }
  return available.members().front();
}

std::vector<LoadViolation> validate_load_matrix(const LoadMatrix& loads, const StoragePlacement& placement,
                                                const AvailableSet& available, std::size_t stragglers) {
  std::vector<LoadViolation> out;
  if (loads.submatrices() != placement.submatrices() || loads.machines() != placement.machines() ||
      available.universe() != placement.machines()) {
    out.push_back({LoadViolation::Kind::Shape, 0, std::nullopt, "dimensions disagree with the placement"});
    return out;
  }
  const Rational target = Rational(stragglers + 1);
  for (std::size_t g = 0; g < loads.submatrices(); ++g) {
    Rational sum = 0;
    for (std::size_t n = 0; n < loads.machines(); ++n) {
      const Rational& mu = loads(g, n);
      const std::string where = "(g=" + std::to_string(g + 1) + ", n=" + std::to_string(n + 1) + ")";
      if (mu < 0 || mu > 1) {
        out.push_back({LoadViolation::Kind::OutOfRange, g, n, "load " + to_string(mu) + " at " + where + " outside [0,1]"});
      }
      if (mu != 0 && !placement.stores(n, g)) {
        out.push_back({LoadViolation::Kind::NotStored, g, n, "load at " + where + " but machine does not store sub-matrix"});
      } else if (mu != 0 && !available.contains(n)) {
        out.push_back({LoadViolation::Kind::Unavailable, g, n, "load at " + where + " but machine is unavailable"});
      }
      sum += mu;
    }
    if (sum != target) {
      out.push_back({LoadViolation::Kind::RowSum, g, std::nullopt,
                     "sub-matrix " + std::to_string(g + 1) + " loads sum to " + to_string(sum) + ", expected " +
                         to_string(target)});
    }
  }
  return out;
}

}  // namespace usec
