#include "usec/optimizer.hpp"

#include "max_flow.hpp"
#include "usec/errors.hpp"

#include <algorithm>
#include <optional>

namespace usec {

namespace {

using Levels = std::vector<std::optional<Rational>>;

struct Cut {
  std::vector<std::size_t> submatrices;
  std::vector<std::size_t> machines;
  std::size_t cut_edges = 0;
};

/// source -> sub-matrix g (capacity 1+S) -> available holder n (capacity 1)
/// -> sink (capacity level[n] * s[n]).
class TransportNetwork {
 public:
  explicit TransportNetwork(const AssignmentProblem& problem)
      : problem_(problem),
        submatrices_(problem.placement.submatrices()),
        machines_(problem.placement.machines()),
        flow_(submatrices_ + machines_ + 2) {
    const Rational demand(problem.redundancy());
    for (std::size_t g = 0; g < submatrices_; ++g) source_arcs_.push_back(flow_.add_edge(source(), sub_node(g), demand));
    holder_arcs_.resize(submatrices_);
    for (std::size_t g = 0; g < submatrices_; ++g) {
      for (std::size_t n : problem.placement.holders(g)) {
        if (!problem.available.contains(n)) continue;
        holder_arcs_[g].emplace_back(n, flow_.add_edge(sub_node(g), machine_node(n), Rational(1)));
      }
    }
    sink_arcs_.resize(machines_);
    for (std::size_t n : problem.available) sink_arcs_[n] = flow_.add_edge(machine_node(n), sink(), Rational(0));
  }

  std::size_t probes() const { return probes_; }

  /// Runs max flow with machine n capped at fixed[n]*s[n] if set, else c*s[n].
  bool feasible(const Rational& c, const Levels& fixed) {
    ++probes_;
    for (std::size_t n : problem_.available) {
      const Rational& level = fixed[n] ? *fixed[n] : c;
      flow_.set_capacity(*sink_arcs_[n], level * problem_.speeds[n]);
    }
    const Rational value = flow_.run(source(), sink());
    return value == Rational(submatrices_ * problem_.redundancy());
  }

  /// Cut from the last run. `maximal` selects the largest source side.
  Cut cut(bool maximal) const {
    const std::vector<bool> side = maximal ? flow_.cannot_reach(sink()) : flow_.reachable_from(source());
    Cut out;
    for (std::size_t g = 0; g < submatrices_; ++g) {
      if (side[sub_node(g)]) out.submatrices.push_back(g);
    }
    for (std::size_t n : problem_.available) {
      if (side[machine_node(n)]) out.machines.push_back(n);
    }
    for (std::size_t g : out.submatrices) {
      for (const auto& [n, arc] : holder_arcs_[g]) {
        if (!side[machine_node(n)]) ++out.cut_edges;
      }
    }
    return out;
  }

  /// Smallest c for which the cut stops being violated, or nullopt if the
  /// free machines in it have no speed (violated at every c).
  std::optional<Rational> cut_ratio(const Cut& cut, const Levels& fixed) const {
    Rational numerator = Rational(problem_.redundancy() * cut.submatrices.size()) - Rational(cut.cut_edges);
    Rational free_speed = 0;
    for (std::size_t n : cut.machines) {
      if (fixed[n]) {
        numerator -= *fixed[n] * problem_.speeds[n];
      } else {
        free_speed += problem_.speeds[n];
      }
    }
    if (free_speed == 0) return std::nullopt;
    return Rational(numerator / free_speed);
  }

  LoadMatrix loads() const {
    LoadMatrix m(submatrices_, machines_);
    for (std::size_t g = 0; g < submatrices_; ++g) {
      for (const auto& [n, arc] : holder_arcs_[g]) m(g, n) = flow_.flow(arc);
    }
    return m;
  }

 private:
  std::size_t source() const { return 0; }
  std::size_t sub_node(std::size_t g) const { return 1 + g; }
  std::size_t machine_node(std::size_t n) const { return 1 + submatrices_ + n; }
  std::size_t sink() const { return 1 + submatrices_ + machines_; }

  const AssignmentProblem& problem_;
  std::size_t submatrices_;
  std::size_t machines_;
  detail::MaxFlow flow_;
  std::vector<std::size_t> source_arcs_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> holder_arcs_;
  std::vector<std::optional<std::size_t>> sink_arcs_;
  std::size_t probes_ = 0;
};

struct SearchResult {
  Rational c;   // feasible
  Rational lo;  // lower bound (== c when exact)
  bool exact = false;
  /// The violated cut whose ratio turned out to be the optimum, if any.
  std::optional<Cut> binding;
};

/// Smallest c in [lo, hi] that is feasible for the free machines. `hi` must
/// be feasible. Bisection on c; every infeasible probe also yields a
/// violated cut whose ratio is a valid lower bound, and testing that bound
/// directly pins the optimum exactly once the binding cut is found.
SearchResult search(TransportNetwork& net, Rational lo, Rational hi, const Levels& fixed, const SolveOptions& options) {
  const Rational tol = from_double(options.tolerance);
  std::optional<Cut> best_cut;
  auto raise_lower = [&](const Rational& probe) {
    Cut cut = net.cut(false);
    auto ratio = net.cut_ratio(cut, fixed);
    if (ratio && *ratio > probe && *ratio >= lo) {
      lo = *ratio;
      best_cut = std::move(cut);
    } else {
      lo = std::max(lo, probe);
    }
  };
  auto done = [&](const Rational& c) {
    SearchResult r{c, c, true, std::nullopt};
    if (best_cut && net.cut_ratio(*best_cut, fixed) == c) r.binding = best_cut;
    return r;
  };
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    if (lo >= hi) return done(hi);
    if (net.feasible(lo, fixed)) return done(lo);
    raise_lower(lo);
    if (lo >= hi) return done(hi);
    if (hi - lo > tol) {
      const Rational mid = (lo + hi) / 2;
      if (net.feasible(mid, fixed)) {
        hi = mid;
      } else {
        raise_lower(mid);
      }
    }
  }
  return {hi, lo, false, std::nullopt};
}

std::vector<std::size_t> available_holders(const AssignmentProblem& problem, std::size_t g) {
  std::vector<std::size_t> out;
  for (std::size_t n : problem.placement.holders(g)) {
    if (problem.available.contains(n)) out.push_back(n);
  }
  return out;
}

void check_shapes(const AssignmentProblem& problem) {
  if (problem.speeds.size() != problem.placement.machines() ||
      problem.available.universe() != problem.placement.machines()) {
    throw ValidationError("placement, speeds and available set disagree on N");
  }
}

Rational initial_upper_bound(const AssignmentProblem& problem) {
  Rational slowest = problem.speeds[problem.available.members().front()];
  for (std::size_t n : problem.available) slowest = std::min(slowest, problem.speeds[n]);
  return Rational(problem.placement.submatrices() * problem.redundancy()) / slowest;
}

Rational initial_lower_bound(const AssignmentProblem& problem) {
  Rational total = 0;
  for (std::size_t n : problem.available) total += problem.speeds[n];
  return Rational(problem.placement.submatrices() * problem.redundancy()) / total;
}

CutCertificate to_certificate(const TransportNetwork& net, const Cut& cut, const Levels& none) {
  CutCertificate cert;
  cert.submatrices = cut.submatrices;
  cert.machines = cut.machines;
  cert.cut_edges = cut.cut_edges;
  if (auto ratio = net.cut_ratio(cut, none)) cert.bound = *ratio;
  return cert;
}

}  // namespace

void check_structural_feasibility(const AssignmentProblem& problem) {
  check_shapes(problem);
  for (std::size_t g = 0; g < problem.placement.submatrices(); ++g) {
    const std::size_t have = available_holders(problem, g).size();
    if (have < problem.redundancy()) {
      throw InfeasibleError("sub-matrix " + std::to_string(g + 1) + " has " + std::to_string(have) +
                                " available holders but needs 1+S=" + std::to_string(problem.redundancy()),
                            g);
    }
  }
}

bool is_feasible(const AssignmentProblem& problem, const Rational& c) {
  check_shapes(problem);
  TransportNetwork net(problem);
  return net.feasible(c, Levels(problem.placement.machines()));
}

Optimum solve(const AssignmentProblem& problem, const SolveOptions& options) {
  check_structural_feasibility(problem);
  TransportNetwork net(problem);
  const std::size_t machines = problem.placement.machines();
  Levels fixed(machines);

  const Rational c_hi = initial_upper_bound(problem);
  if (!net.feasible(c_hi, fixed)) throw Error("internal: initial upper bound is infeasible");
  const SearchResult first = search(net, initial_lower_bound(problem), c_hi, fixed, options);

  Optimum result;
  result.c_star = first.c;
  result.exact = first.exact;
  if (first.binding) {
    result.certificate = to_certificate(net, *first.binding, fixed);
  } else if (first.exact) {
    net.feasible(first.c, fixed);
    result.certificate = to_certificate(net, net.cut(true), fixed);
  } else {
    net.feasible(first.lo, fixed);
    result.certificate = to_certificate(net, net.cut(false), fixed);
  }

  if (!options.balanced) {
    net.feasible(first.c, fixed);
    result.loads = net.loads();
    result.probes = net.probes();
    return result;
  }

  // Fix the machines that are saturated at the current level, then minimize
  // the finish time of the rest, until every available machine has a level.
  auto free_count = [&] {
    std::size_t count = 0;
    for (std::size_t n : problem.available) count += fixed[n] ? 0 : 1;
    return count;
  };
  SearchResult round = first;
  while (free_count() > 0) {
    net.feasible(round.c, fixed);
    const Cut tight = net.cut(true);
    std::size_t newly_fixed = 0;
    if (round.exact) {
      for (std::size_t n : tight.machines) {
        if (!fixed[n]) {
          fixed[n] = round.c;
          ++newly_fixed;
        }
      }
    }
    if (newly_fixed == 0) {
      for (std::size_t n : problem.available) {
        if (!fixed[n]) fixed[n] = round.c;
      }
      break;
    }
    if (free_count() == 0) break;
    round = search(net, Rational(0), round.c, fixed, options);
  }
  net.feasible(Rational(0), fixed);
  result.loads = net.loads();
  result.levels.assign(machines, Rational(0));
  for (std::size_t n : problem.available) result.levels[n] = *fixed[n];
  result.probes = net.probes();
  return result;
}

CutCertificate min_cut_certificate(const AssignmentProblem& problem, const Rational& c) {
  check_shapes(problem);
  for (std::size_t g = 0; g < problem.placement.submatrices(); ++g) {
    const auto holders = available_holders(problem, g);
    if (holders.size() < problem.redundancy()) {
      CutCertificate cert;
      cert.submatrices = {g};
      cert.cut_edges = holders.size();
      return cert;
    }
  }
  TransportNetwork net(problem);
  const Levels none(problem.placement.machines());
  if (!net.feasible(c, none)) return to_certificate(net, net.cut(false), none);
  const Cut tight = net.cut(true);
  if (tight.submatrices.empty()) {
    throw ValidationError("time " + to_string(c) + " is feasible with slack; no tight cut exists");
  }
  return to_certificate(net, tight, none);
}

// ---------------------------------------------------------------------------
// Grid oracles

namespace {

struct GridSetup {
  std::size_t redundancy;
  std::size_t steps;
  std::vector<std::vector<std::size_t>> holders;  // available holders per g
};

GridSetup grid_setup(const AssignmentProblem& problem, std::size_t grid_steps) {
  check_structural_feasibility(problem);
  if (problem.placement.machines() > kOracleMaxMachines || problem.placement.submatrices() > kOracleMaxSubmatrices) {
    throw SizeCapError("grid oracle limited to N <= " + std::to_string(kOracleMaxMachines) + " and G <= " +
                       std::to_string(kOracleMaxSubmatrices));
  }
  if (grid_steps == 0) throw ValidationError("grid_steps must be positive");
  GridSetup setup{problem.redundancy(), grid_steps, {}};
  for (std::size_t g = 0; g < problem.placement.submatrices(); ++g) setup.holders.push_back(available_holders(problem, g));
  return setup;
}

/// Number of ways to write `total` as an ordered sum of `parts` integers in
/// [0, bound], saturating at `cap + 1`.
std::size_t count_compositions(std::size_t total, std::size_t parts, std::size_t bound, std::size_t cap) {
  std::vector<std::size_t> ways(total + 1, 0);
  ways[0] = 1;
  for (std::size_t p = 0; p < parts; ++p) {
    std::vector<std::size_t> next(total + 1, 0);
    for (std::size_t t = 0; t <= total; ++t) {
      if (ways[t] == 0) continue;
      for (std::size_t x = 0; x <= bound && t + x <= total; ++x) next[t + x] = std::min(cap + 1, next[t + x] + ways[t]);
    }
    ways = std::move(next);
  }
  return ways[total];
}

std::size_t grid_size(const GridSetup& setup, std::size_t cap) {
  std::size_t size = 1;
  for (const auto& h : setup.holders) {
    const std::size_t ways = count_compositions(setup.redundancy * setup.steps, h.size(), setup.steps, cap);
    if (ways == 0) return 0;
    if (size > (cap + 1) / ways) return cap + 1;
    size *= ways;
  }
  return size;
}

void enumerate_compositions(std::size_t total, std::size_t parts, std::size_t bound, std::vector<std::size_t>& current,
                            std::vector<std::vector<std::size_t>>& out) {
  if (current.size() + 1 == parts) {
    if (total <= bound) {
      current.push_back(total);
      out.push_back(current);
      current.pop_back();
    }
    return;
  }
  for (std::size_t x = 0; x <= std::min(total, bound); ++x) {
    current.push_back(x);
    enumerate_compositions(total - x, parts, bound, current, out);
    current.pop_back();
  }
}

/// Integral transportation check: every subset A of sub-matrices must fit
/// into sum_n min(K * |A held by n|, caps[n]).
bool grid_feasible(const GridSetup& setup, const std::vector<long long>& caps) {
  const std::size_t submatrices = setup.holders.size();
  const long long demand = static_cast<long long>(setup.redundancy * setup.steps);
  std::vector<long long> degree(caps.size());
  for (std::size_t mask = 1; mask < (std::size_t{1} << submatrices); ++mask) {
    std::fill(degree.begin(), degree.end(), 0);
    long long need = 0;
    for (std::size_t g = 0; g < submatrices; ++g) {
      if (!(mask >> g & 1)) continue;
      need += demand;
      for (std::size_t n : setup.holders[g]) ++degree[n];
    }
    long long supply = 0;
    for (std::size_t n = 0; n < caps.size(); ++n) {
      supply += std::min(degree[n] * static_cast<long long>(setup.steps), caps[n]);
    }
    if (supply < need) return false;
  }
  return true;
}

Rational grid_sweep(const AssignmentProblem& problem, const GridSetup& setup) {
  const std::size_t machines = problem.placement.machines();
  const Rational steps(setup.steps);
  std::vector<Rational> candidates{Rational(0)};
  for (std::size_t n : problem.available) {
    std::size_t held = 0;
    for (const auto& h : setup.holders) held += std::count(h.begin(), h.end(), n);
    for (std::size_t m = 1; m <= held * setup.steps; ++m) {
      candidates.push_back(Rational(m) / (steps * problem.speeds[n]));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto feasible = [&](const Rational& c) {
    std::vector<long long> caps(machines, 0);
    for (std::size_t n : problem.available) {
      const Rational scaled = c * steps * problem.speeds[n];
      caps[n] = boost::multiprecision::mpz_int(numerator(scaled) / denominator(scaled)).convert_to<long long>();
    }
    return grid_feasible(setup, caps);
  };
  std::size_t lo = 0, hi = candidates.size() - 1;
  if (!feasible(candidates[hi])) throw Error("internal: grid sweep found no feasible level");
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(candidates[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

}  // namespace

Rational grid_enumeration_oracle(const AssignmentProblem& problem, std::size_t grid_steps, std::size_t cap) {
  const GridSetup setup = grid_setup(problem, grid_steps);
  if (grid_size(setup, cap) > cap) throw SizeCapError("grid has more than " + std::to_string(cap) + " load matrices");

  const std::size_t machines = problem.placement.machines();
  std::vector<std::vector<std::vector<std::size_t>>> choices(setup.holders.size());
  for (std::size_t g = 0; g < setup.holders.size(); ++g) {
    std::vector<std::size_t> current;
    enumerate_compositions(setup.redundancy * setup.steps, setup.holders[g].size(), setup.steps, current, choices[g]);
  }
  std::vector<Rational> unit(machines);  // time per grid unit
  for (std::size_t n : problem.available) unit[n] = Rational(1) / (Rational(setup.steps) * problem.speeds[n]);

  std::optional<Rational> best;
  std::vector<std::size_t> column(machines, 0);
  auto objective = [&] {
    Rational worst = 0;
    for (std::size_t n : problem.available) worst = std::max(worst, Rational(column[n] * unit[n]));
    return worst;
  };
  auto recurse = [&](auto&& self, std::size_t g) -> void {
    if (g == choices.size()) {
      Rational value = objective();
      if (!best || value < *best) best = std::move(value);
      return;
    }
    for (const auto& choice : choices[g]) {
      for (std::size_t i = 0; i < choice.size(); ++i) column[setup.holders[g][i]] += choice[i];
      self(self, g + 1);
      for (std::size_t i = 0; i < choice.size(); ++i) column[setup.holders[g][i]] -= choice[i];
    }
  };
  recurse(recurse, 0);
  return *best;
}

Rational brute_force_oracle(const AssignmentProblem& problem, std::size_t grid_steps) {
  const GridSetup setup = grid_setup(problem, grid_steps);
  if (grid_size(setup, kOracleEnumerationCap) <= kOracleEnumerationCap) {
    return grid_enumeration_oracle(problem, grid_steps);
  }
  return grid_sweep(problem, setup);
}

}  // namespace usec
