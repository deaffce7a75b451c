#include "usec/placement.hpp"

#include "usec/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

namespace usec {

StoragePlacement::StoragePlacement(std::size_t machines, std::size_t submatrices, std::size_t replication,
                                   std::vector<std::vector<std::size_t>> stored_by_machine)
    : replication_(replication), store_(std::move(stored_by_machine)), holders_(submatrices) {
  if (machines == 0) throw ValidationError("placement needs at least one machine");
  if (submatrices == 0) throw ValidationError("placement needs at least one sub-matrix");
  if (replication == 0 || replication > machines) {
    throw ValidationError("replication J=" + std::to_string(replication) + " must satisfy 1 <= J <= N=" +
                          std::to_string(machines));
  }
  if (store_.size() != machines) {
    throw ValidationError("expected storage lists for " + std::to_string(machines) + " machines, got " +
                          std::to_string(store_.size()));
  }
  for (std::size_t n = 0; n < machines; ++n) {
    auto& z = store_[n];
    std::sort(z.begin(), z.end());
    if (std::adjacent_find(z.begin(), z.end()) != z.end()) {
      throw ValidationError("machine " + std::to_string(n + 1) + " lists a sub-matrix twice");
    }
    for (std::size_t g : z) {
      if (g >= submatrices) {
        throw ValidationError("machine " + std::to_string(n + 1) + " stores sub-matrix " + std::to_string(g + 1) +
                              " but G=" + std::to_string(submatrices));
      }
      holders_[g].push_back(n);
    }
  }
  for (std::size_t g = 0; g < submatrices; ++g) {
    if (holders_[g].size() != replication) {
      throw ValidationError("sub-matrix " + std::to_string(g + 1) + " is stored by " +
                            std::to_string(holders_[g].size()) + " machines, expected J=" +
                            std::to_string(replication));
    }
  }
}

bool StoragePlacement::stores(std::size_t machine, std::size_t submatrix) const {
  const auto& z = store_.at(machine);
  return std::binary_search(z.begin(), z.end(), submatrix);
}

std::string StoragePlacement::to_text() const {
  std::ostringstream out;
  out << machines() << ' ' << submatrices() << ' ' << replication() << '\n';
  for (std::size_t n = 0; n < machines(); ++n) {
    out << n + 1 << ':';
    for (std::size_t g : store_[n]) out << ' ' << g + 1;
    out << '\n';
  }
  return out.str();
}

StoragePlacement repetition_placement(std::size_t machines, std::size_t submatrices, std::size_t replication) {
  if (replication == 0 || machines % replication != 0) {
    throw ValidationError("repetition placement needs J to divide N");
  }
  const std::size_t groups = machines / replication;
  if (submatrices % groups != 0) {
    throw ValidationError("repetition placement needs N/J=" + std::to_string(groups) + " to divide G=" +
                          std::to_string(submatrices));
  }
  const std::size_t block = submatrices / groups;
  std::vector<std::vector<std::size_t>> store(machines);
  for (std::size_t n = 0; n < machines; ++n) {
    const std::size_t group = n / replication;
    for (std::size_t g = group * block; g < (group + 1) * block; ++g) store[n].push_back(g);
  }
  return {machines, submatrices, replication, std::move(store)};
}

StoragePlacement cyclic_placement(std::size_t machines, std::size_t replication) {
  if (replication > machines) throw ValidationError("cyclic placement needs J <= N");
  std::vector<std::vector<std::size_t>> store(machines);
  for (std::size_t n = 0; n < machines; ++n) {
    for (std::size_t k = 0; k < replication; ++k) store[n].push_back((n + k) % machines);
  }
  return {machines, machines, replication, std::move(store)};
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step
    const std::size_t factor = n - k + i;
    if (result > std::numeric_limits<std::size_t>::max() / factor) return std::numeric_limits<std::size_t>::max();
    result = result * factor / i;
  }
  return result;
}

StoragePlacement man_placement(std::size_t machines, std::size_t replication, std::size_t max_submatrices) {
  if (replication == 0 || replication > machines) throw ValidationError("MAN placement needs 1 <= J <= N");
  const std::size_t count = binomial(machines, replication);
  if (count > max_submatrices) {
    throw SizeCapError("MAN placement would create C(" + std::to_string(machines) + "," +
                       std::to_string(replication) + ") sub-matrices, cap is " + std::to_string(max_submatrices));
  }
  std::vector<std::vector<std::size_t>> store(machines);
  std::vector<std::size_t> subset(replication);
  for (std::size_t i = 0; i < replication; ++i) subset[i] = i;
  for (std::size_t g = 0; g < count; ++g) {
    for (std::size_t n : subset) store[n].push_back(g);
    // next subset in lexicographic order
    std::size_t i = replication;
    while (i > 0 && subset[i - 1] == machines - replication + i - 1) --i;
    if (i == 0) break;
    ++subset[i - 1];
    for (std::size_t j = i; j < replication; ++j) subset[j] = subset[j - 1] + 1;
  }
  return {machines, count, replication, std::move(store)};
}

namespace {

class LineScanner {
 public:
  LineScanner(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  void skip_space() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= line_.size();
  }
  bool consume(char ch) {
    skip_space();
    if (pos_ < line_.size() && line_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::size_t number(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    last_start_ = start;
    while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    if (start == pos_) fail(std::string("expected ") + what, start);
    const auto text = line_.substr(start, pos_ - start);
    if (text.size() > 9) fail(std::string(what) + " out of range", start);
    return std::stoul(std::string(text));
  }
  /// 0-based offset where the last number began.
  std::size_t last_start() const { return last_start_; }
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const { throw ParseError(msg, line_no_, at + 1); }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

 private:
  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
  std::size_t last_start_ = 0;
};

}  // namespace

StoragePlacement parse_placement(std::string_view text) {
  bool have_header = false;
  std::size_t machines = 0, submatrices = 0, replication = 0;
  std::vector<std::vector<std::size_t>> store;
  std::vector<bool> seen;
  std::size_t line_no = 0;

  while (!text.empty()) {
    ++line_no;
    auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineScanner scan(line, line_no);
    if (scan.at_end()) continue;

    if (!have_header) {
      machines = scan.number("N");
      submatrices = scan.number("G");
      replication = scan.number("J");
      if (!scan.at_end()) scan.fail("unexpected text after header");
      if (machines == 0) scan.fail("N must be positive", 0);
      store.assign(machines, {});
      seen.assign(machines, false);
      have_header = true;
      continue;
    }

    const std::size_t n = scan.number("machine index");
    if (n == 0 || n > machines) {
      scan.fail("machine index " + std::to_string(n) + " outside 1.." + std::to_string(machines), scan.last_start());
    }
    if (seen[n - 1]) scan.fail("machine " + std::to_string(n) + " listed twice", scan.last_start());
    seen[n - 1] = true;
    if (!scan.consume(':')) scan.fail("expected ':' after machine index");
    while (!scan.at_end()) {
      const std::size_t g = scan.number("sub-matrix index");
      if (g == 0 || g > submatrices) {
        scan.fail("sub-matrix index " + std::to_string(g) + " outside 1.." + std::to_string(submatrices),
                  scan.last_start());
      }
      store[n - 1].push_back(g - 1);
    }
  }
  if (!have_header) throw ParseError("missing 'N G J' header", line_no + 1, 1);
  for (std::size_t n = 0; n < machines; ++n) {
    if (!seen[n]) throw ValidationError("machine " + std::to_string(n + 1) + " has no entry");
  }
  return {machines, submatrices, replication, std::move(store)};
}

StoragePlacement load_placement_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open placement file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_placement(buffer.str());
}

}  // namespace usec
