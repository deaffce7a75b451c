#include "usec/assignment.hpp"

#include "usec/errors.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace usec {

std::vector<RowRange> partition_rows(std::span<const Rational> alphas, std::size_t rows) {
  std::vector<RowRange> out;
  out.reserve(alphas.size());
  Rational cumulative = 0;
  std::size_t previous = 0;
  for (std::size_t f = 0; f < alphas.size(); ++f) {
    cumulative += alphas[f];
    std::size_t boundary = rows;
    if (f + 1 < alphas.size()) {
      // round half up: floor(rows * cumulative + 1/2)
      const Rational scaled = Rational(rows) * cumulative + Rational(1, 2);
      boundary = boost::multiprecision::mpz_int(numerator(scaled) / denominator(scaled)).convert_to<std::size_t>();
      boundary = std::clamp(boundary, previous, rows);
    }
    out.push_back({previous, boundary});
    previous = boundary;
  }
  return out;
}

namespace {

void realize_rows(SubAssignment& sub) {
  const auto ranges = partition_rows(sub.alphas, sub.rows);
  sub.tasks.clear();
  for (std::size_t f = 0; f < ranges.size(); ++f) {
    if (!ranges[f].empty()) sub.tasks.push_back({ranges[f], sub.fill_sets[f]});
  }
}

}  // namespace

SubAssignment fill_submatrix(std::span<const Rational> loads, std::size_t redundancy, std::size_t rows,
                             std::size_t submatrix) {
  if (redundancy == 0) throw ValidationError("redundancy 1+S must be at least 1");
  Rational total = 0;
  std::size_t positive = 0;
  for (std::size_t n = 0; n < loads.size(); ++n) {
    if (loads[n] < 0 || loads[n] > 1) {
      throw ValidationError("load of machine " + std::to_string(n + 1) + " for sub-matrix " +
                            std::to_string(submatrix + 1) + " is outside [0,1]");
    }
    total += loads[n];
    if (loads[n] > 0) ++positive;
  }
  if (total != Rational(redundancy)) {
    throw ValidationError("loads of sub-matrix " + std::to_string(submatrix + 1) + " sum to " + to_string(total) +
                          ", expected " + std::to_string(redundancy));
  }
  if (positive < redundancy) {
    throw ValidationError("sub-matrix " + std::to_string(submatrix + 1) + " has " + std::to_string(positive) +
                          " loaded machines, needs at least " + std::to_string(redundancy));
  }

  SubAssignment sub;
  sub.submatrix = submatrix;
  sub.rows = rows;
  std::vector<Rational> remaining(loads.begin(), loads.end());
  const Rational share(redundancy);
  std::vector<std::size_t> order;

  while (true) {
    order.clear();
    Rational left = 0;
    for (std::size_t n = 0; n < remaining.size(); ++n) {
      if (remaining[n] > 0) {
        order.push_back(n);
        left += remaining[n];
      }
    }
    if (order.empty()) break;
    if (sub.alphas.size() == positive) {
      throw Error("filling of sub-matrix " + std::to_string(submatrix + 1) + " exceeded " +
                  std::to_string(positive) + " iterations");
    }
    const std::size_t count = order.size();
    if (count < redundancy) {
      throw Error("filling of sub-matrix " + std::to_string(submatrix + 1) + " left load on fewer than 1+S machines");
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remaining[a] < remaining[b]; });

    // smallest remaining load plus the redundancy-1 largest
    std::vector<std::size_t> chosen{order.front()};
    for (std::size_t i = count - redundancy + 1; i < count; ++i) chosen.push_back(order[i]);

    Rational alpha = remaining[order.front()];
    if (count >= redundancy + 1) {
      alpha = std::min(Rational(left / share - remaining[order[count - redundancy]]), alpha);
    }
    if (alpha <= 0) {
      throw Error("filling of sub-matrix " + std::to_string(submatrix + 1) + " produced a non-positive share");
    }
    for (std::size_t n : chosen) remaining[n] -= alpha;
    std::sort(chosen.begin(), chosen.end());
    sub.alphas.push_back(alpha);
    sub.fill_sets.push_back(std::move(chosen));
  }
  realize_rows(sub);
  return sub;
}

SubAssignment homogeneous_cyclic(std::size_t holders, std::size_t stragglers, std::size_t rows, std::size_t submatrix) {
  if (holders < stragglers + 1) {
    throw ValidationError("sub-matrix " + std::to_string(submatrix + 1) + " has " + std::to_string(holders) +
                          " holders, needs 1+S=" + std::to_string(stragglers + 1));
  }
  if (rows == 0) throw ValidationError("sub-matrix must have at least one row");
  SubAssignment sub;
  sub.submatrix = submatrix;
  sub.rows = rows;
  const std::size_t base = rows / holders;
  const std::size_t extra = rows % holders;
  std::size_t start = 0;
  for (std::size_t f = 0; f < holders; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    std::vector<std::size_t> machines;
    for (std::size_t k = 0; k <= stragglers; ++k) machines.push_back((f + k) % holders);
    sub.alphas.push_back(Rational(size, rows));
    sub.fill_sets.push_back(machines);
    if (size > 0) sub.tasks.push_back({{start, start + size}, std::move(machines)});
    start += size;
  }
  return sub;
}

ComputationAssignment assign_heterogeneous(const LoadMatrix& loads, std::size_t stragglers,
                                           std::size_t rows_per_submatrix) {
  ComputationAssignment out;
  out.machines = loads.machines();
  out.rows_per_submatrix = rows_per_submatrix;
  std::vector<Rational> row(loads.machines());
  for (std::size_t g = 0; g < loads.submatrices(); ++g) {
    for (std::size_t n = 0; n < loads.machines(); ++n) row[n] = loads(g, n);
    out.subs.push_back(fill_submatrix(row, stragglers + 1, rows_per_submatrix, g));
  }
  return out;
}

ComputationAssignment assign_homogeneous(const StoragePlacement& placement, const AvailableSet& available,
                                         std::size_t stragglers, std::size_t rows_per_submatrix) {
  ComputationAssignment out;
  out.machines = placement.machines();
  out.rows_per_submatrix = rows_per_submatrix;
  for (std::size_t g = 0; g < placement.submatrices(); ++g) {
    std::vector<std::size_t> holders;
    for (std::size_t n : placement.holders(g)) {
      if (available.contains(n)) holders.push_back(n);
    }
    SubAssignment sub = homogeneous_cyclic(holders.size(), stragglers, rows_per_submatrix, g);
    auto remap = [&](std::vector<std::size_t>& machines) {
      for (auto& m : machines) m = holders[m];
      std::sort(machines.begin(), machines.end());
    };
    for (auto& set : sub.fill_sets) remap(set);
    for (auto& task : sub.tasks) remap(task.machines);
    out.subs.push_back(std::move(sub));
  }
  return out;
}

LoadMatrix assignment_to_load_matrix(const ComputationAssignment& assignment) {
  LoadMatrix m(assignment.subs.size(), assignment.machines);
  for (std::size_t g = 0; g < assignment.subs.size(); ++g) {
    const auto& sub = assignment.subs[g];
    std::vector<std::size_t> counts(assignment.machines, 0);
    for (const auto& task : sub.tasks) {
      for (std::size_t n : task.machines) counts[n] += task.rows.size();
    }
    for (std::size_t n = 0; n < assignment.machines; ++n) m(g, n) = Rational(counts[n], sub.rows);
  }
  return m;
}

LoadMatrix fractional_load_matrix(const ComputationAssignment& assignment) {
  LoadMatrix m(assignment.subs.size(), assignment.machines);
  for (std::size_t g = 0; g < assignment.subs.size(); ++g) {
    const auto& sub = assignment.subs[g];
    for (std::size_t f = 0; f < sub.alphas.size(); ++f) {
      for (std::size_t n : sub.fill_sets[f]) m(g, n) += sub.alphas[f];
    }
  }
  return m;
}

std::vector<std::size_t> rows_per_machine(const ComputationAssignment& assignment) {
  std::vector<std::size_t> rows(assignment.machines, 0);
  for (const auto& sub : assignment.subs) {
    for (const auto& task : sub.tasks) {
      for (std::size_t n : task.machines) rows[n] += task.rows.size();
    }
  }
  return rows;
}

std::optional<StragglerCounterexample> verify_straggler_tolerance(const ComputationAssignment& assignment,
                                                                  std::size_t stragglers,
                                                                  const AvailableSet& available,
                                                                  std::size_t subset_cap) {
  const auto& pool = available.members();
  if (stragglers > pool.size()) stragglers = pool.size();
  if (binomial(pool.size(), stragglers) > subset_cap) {
    throw SizeCapError("C(" + std::to_string(pool.size()) + "," + std::to_string(stragglers) +
                       ") straggler subsets exceed the cap of " + std::to_string(subset_cap));
  }
  std::vector<std::size_t> pick(stragglers);
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<bool> straggling(assignment.machines, false);
  while (true) {
    std::fill(straggling.begin(), straggling.end(), false);
    for (std::size_t i : pick) straggling[pool[i]] = true;
    for (const auto& sub : assignment.subs) {
      for (std::size_t f = 0; f < sub.tasks.size(); ++f) {
        const auto& machines = sub.tasks[f].machines;
        const bool covered = std::any_of(machines.begin(), machines.end(), [&](std::size_t n) {
          return n < straggling.size() && !straggling[n] && available.contains(n);
        });
        if (!covered) {
          StragglerCounterexample cx;
          for (std::size_t i : pick) cx.stragglers.push_back(pool[i]);
          cx.submatrix = sub.submatrix;
          cx.task = f;
          return cx;
        }
      }
    }
    // next S-subset of positions in lexicographic order
    std::size_t i = stragglers;
    while (i > 0 && pick[i - 1] == pool.size() - stragglers + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < stragglers; ++j) pick[j] = pick[j - 1] + 1;
  }
  return std::nullopt;
}

std::vector<std::string> validate_assignment(const ComputationAssignment& assignment, const StoragePlacement& placement,
                                             const AvailableSet& available, std::size_t stragglers) {
  std::vector<std::string> problems;
  if (assignment.subs.size() != placement.submatrices()) {
    problems.push_back("assignment covers " + std::to_string(assignment.subs.size()) + " sub-matrices, placement has " +
                       std::to_string(placement.submatrices()));
    return problems;
  }
  for (std::size_t g = 0; g < assignment.subs.size(); ++g) {
    const auto& sub = assignment.subs[g];
    const std::string name = "sub-matrix " + std::to_string(g + 1);
    std::vector<RowRange> ranges;
    for (std::size_t f = 0; f < sub.tasks.size(); ++f) {
      const auto& task = sub.tasks[f];
      const std::string where = name + " set " + std::to_string(f + 1);
      ranges.push_back(task.rows);
      auto machines = task.machines;
      std::sort(machines.begin(), machines.end());
      if (std::adjacent_find(machines.begin(), machines.end()) != machines.end()) {
        problems.push_back(where + " repeats a machine");
      }
      if (machines.size() != stragglers + 1) {
        problems.push_back(where + " has " + std::to_string(machines.size()) + " machines, expected 1+S=" +
                           std::to_string(stragglers + 1));
      }
      for (std::size_t n : machines) {
        if (n >= placement.machines() || !placement.stores(n, g)) {
          problems.push_back(where + " uses machine " + std::to_string(n + 1) + " which does not store it");
        } else if (!available.contains(n)) {
          problems.push_back(where + " uses unavailable machine " + std::to_string(n + 1));
        }
      }
    }
    std::sort(ranges.begin(), ranges.end(), [](const RowRange& a, const RowRange& b) { return a.begin < b.begin; });
    std::size_t next = 0;
    for (const auto& r : ranges) {
      if (r.begin != next || r.end <= r.begin) {
        problems.push_back(name + " row sets do not partition rows 1.." + std::to_string(sub.rows));
        break;
      }
      next = r.end;
    }
    if (next != sub.rows && problems.empty()) {
      problems.push_back(name + " row sets do not cover rows 1.." + std::to_string(sub.rows));
    }
  }
  return problems;
}

void write_assignment_csv(std::ostream& out, const ComputationAssignment& assignment) {
  out << "# usec-assignment machines=" << assignment.machines << " submatrices=" << assignment.subs.size()
      << " rows_per_submatrix=" << assignment.rows_per_submatrix << '\n';
  out << "g,f,row_start,row_end,machines\n";
  for (const auto& sub : assignment.subs) {
    for (std::size_t f = 0; f < sub.tasks.size(); ++f) {
      const auto& task = sub.tasks[f];
      out << sub.submatrix + 1 << ',' << f + 1 << ',' << task.rows.begin + 1 << ',' << task.rows.end;
      for (std::size_t n : task.machines) out << ',' << n + 1;
      out << '\n';
    }
  }
}

namespace {

std::size_t parse_field(const std::string& text, std::size_t line, std::size_t column) {
  if (text.empty() || text.find_first_not_of("0123456789 \t\r") != std::string::npos ||
      text.find_first_of("0123456789") == std::string::npos) {
    throw ParseError("expected a non-negative integer, got '" + text + "'", line, column);
  }
  return std::stoul(text);
}

std::size_t parse_meta(const std::string& header, const std::string& key, std::size_t line) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos) throw ParseError("missing '" + key + "=' in header", line, 1);
  std::size_t end = pos + key.size() + 1;
  std::size_t stop = header.find_first_of(" \t\r", end);
  return parse_field(header.substr(end, stop == std::string::npos ? std::string::npos : stop - end), line, end + 1);
}

}  // namespace

ComputationAssignment parse_assignment_csv(std::string_view text) {
  ComputationAssignment out;
  bool have_meta = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line.front() == '#') {
      if (line.find("usec-assignment") != std::string::npos) {
        out.machines = parse_meta(line, "machines", line_no);
        const std::size_t submatrices = parse_meta(line, "submatrices", line_no);
        out.rows_per_submatrix = parse_meta(line, "rows_per_submatrix", line_no);
        out.subs.resize(submatrices);
        for (std::size_t g = 0; g < submatrices; ++g) {
          out.subs[g].submatrix = g;
          out.subs[g].rows = out.rows_per_submatrix;
        }
        have_meta = true;
      }
      continue;
    }
    if (line.rfind("g,", 0) == 0) continue;
    if (!have_meta) throw ParseError("data before '# usec-assignment' header", line_no, 1);

    std::vector<std::string> fields;
    std::vector<std::size_t> columns;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      columns.push_back(start + 1);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 5) throw ParseError("expected g,f,row_start,row_end,machines...", line_no, 1);
    const std::size_t g = parse_field(fields[0], line_no, columns[0]);
    const std::size_t first = parse_field(fields[2], line_no, columns[2]);
    const std::size_t last = parse_field(fields[3], line_no, columns[3]);
    if (g == 0 || g > out.subs.size()) throw ParseError("sub-matrix index out of range", line_no, columns[0]);
    if (first == 0 || last < first || last > out.rows_per_submatrix) {
      throw ParseError("row range out of bounds", line_no, columns[2]);
    }
    RowTask task{{first - 1, last}, {}};
    for (std::size_t i = 4; i < fields.size(); ++i) {
      const std::size_t n = parse_field(fields[i], line_no, columns[i]);
      if (n == 0 || n > out.machines) throw ParseError("machine index out of range", line_no, columns[i]);
      task.machines.push_back(n - 1);
    }
    auto& sub = out.subs[g - 1];
    sub.alphas.push_back(Rational(task.rows.size(), sub.rows));
    sub.fill_sets.push_back(task.machines);
    sub.tasks.push_back(std::move(task));
  }
  if (!have_meta) throw ParseError("missing '# usec-assignment' header", line_no + 1, 1);
  return out;
}

}  // namespace usec
