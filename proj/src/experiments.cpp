#include "usec/experiments.hpp"

#include "usec/errors.hpp"
#include "usec/optimizer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace usec {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

StoragePlacement named_placement(std::string_view name, std::size_t machines, std::size_t replication) {
  if (name == "repetition") return repetition_placement(machines, machines, replication);
  if (name == "cyclic") return cyclic_placement(machines, replication);
  if (name == "man") return man_placement(machines, replication);
  throw ValidationError("unknown placement '" + std::string(name) + "' (expected repetition, cyclic or man)");
}

SpeedVector speeds_for_granularity(std::span<const double> speeds, std::size_t submatrices,
                                   std::size_t reference_submatrices) {
  SpeedVector base = SpeedVector::from_doubles(speeds);
  if (reference_submatrices == 0 || submatrices == reference_submatrices) return base;
  const Rational factor(submatrices, reference_submatrices);
  std::vector<Rational> scaled;
  for (const auto& s : base.values()) scaled.push_back(s * factor);
  return SpeedVector(std::move(scaled));
}

SpeedDistribution SpeedDistribution::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  parts.push_back(current);
  auto number = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(parts.at(i), &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ValidationError("bad distribution parameter in '" + std::string(text) + "'");
    }
  };
  SpeedDistribution d;
  if (parts[0] == "exponential" && parts.size() <= 2) {
    d.kind = Kind::Exponential;
    d.a = parts.size() == 2 ? number(1) : 1.0;
    if (!(d.a > 0)) throw ValidationError("exponential rate must be positive");
  } else if (parts[0] == "uniform" && parts.size() == 3) {
    d.kind = Kind::Uniform;
    d.a = number(1);
    d.b = number(2);
    if (!(d.a >= 0 && d.b > d.a)) throw ValidationError("uniform needs 0 <= low < high");
  } else if (parts[0] == "constant" && parts.size() == 2) {
    d.kind = Kind::Constant;
    d.a = number(1);
    if (!(d.a > 0)) throw ValidationError("constant speed must be positive");
  } else {
    throw ValidationError("unknown distribution '" + std::string(text) +
                          "' (expected exponential[:rate], uniform:low:high or constant:value)");
  }
  return d;
}

std::string SpeedDistribution::to_string() const {
  switch (kind) {
    case Kind::Exponential:
      return "exponential:" + format_double(a);
    case Kind::Uniform:
      return "uniform:" + format_double(a) + ":" + format_double(b);
    case Kind::Constant:
      return "constant:" + format_double(a);
  }
  return {};
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t trial) {
  // splitmix64
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> draw_speeds(const SpeedDistribution& distribution, std::size_t machines, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> speeds(machines);
  for (auto& s : speeds) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    switch (distribution.kind) {
      case SpeedDistribution::Kind::Exponential:
        s = -std::log1p(-u) / distribution.a;
        break;
      case SpeedDistribution::Kind::Uniform:
        s = distribution.a + (distribution.b - distribution.a) * u;
        break;
      case SpeedDistribution::Kind::Constant:
        s = distribution.a;
        break;
    }
    s = std::max(s, kMinTrialSpeed);
  }
  return speeds;
}

PlacementSummary summarize(std::string placement, std::span<const double> values) {
  PlacementSummary s;
  s.placement = std::move(placement);
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double squares = 0.0;
  for (double v : values) squares += (v - s.mean) * (v - s.mean);
  s.variance = values.size() > 1 ? squares / static_cast<double>(values.size() - 1) : 0.0;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  return s;
}

std::vector<HistogramBin> histogram(const std::vector<TrialRecord>& records, const std::vector<std::string>& placements,
                                    std::size_t bins) {
  std::vector<HistogramBin> out;
  if (records.empty() || bins == 0) return out;
  std::vector<double> pooled;
  for (const auto& r : records) pooled.push_back(r.c);
  std::sort(pooled.begin(), pooled.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(pooled.size())));
  const double top = pooled[std::max<std::size_t>(rank, 1) - 1];
  const double width = top / static_cast<double>(bins);

  for (const auto& name : placements) {
    std::vector<std::size_t> counts(bins + 1, 0);
    for (const auto& r : records) {
      if (r.placement != name) continue;
      if (r.c > top) {
        ++counts[bins];
      } else if (width <= 0.0) {
        ++counts[bins - 1];
      } else {
        const auto b = static_cast<std::size_t>(r.c / width);
        ++counts[std::min(b, bins - 1)];
      }
    }
    for (std::size_t b = 0; b < bins; ++b) {
      const double high = b + 1 == bins ? top : width * static_cast<double>(b + 1);
      out.push_back({name, b + 1, width * static_cast<double>(b), high, counts[b]});
    }
    out.push_back({name, bins + 1, top, std::numeric_limits<double>::infinity(), counts[bins]});
  }
  return out;
}

TrialReport run_trials(const TrialOptions& options) {
  if (options.trials == 0) throw ValidationError("trials must be at least 1");
  if (options.placements.empty()) throw ValidationError("no placements requested");
  TrialReport report;
  report.options = options;
  const std::size_t reference = options.reference_submatrices ? options.reference_submatrices : options.machines;
  report.options.reference_submatrices = reference;

  std::vector<StoragePlacement> placements;
  for (const auto& name : options.placements) {
    placements.push_back(named_placement(name, options.machines, options.replication));
  }
  const AvailableSet everyone = AvailableSet::all(options.machines);

  report.records.reserve(options.trials * placements.size());
  for (std::size_t t = 0; t < options.trials; ++t) {
    const std::uint64_t seed = trial_seed(options.seed, t);
    const std::vector<double> speeds = draw_speeds(options.distribution, options.machines, seed);
    for (std::size_t p = 0; p < placements.size(); ++p) {
      const AssignmentProblem problem{placements[p],
                                      speeds_for_granularity(speeds, placements[p].submatrices(), reference), everyone,
                                      0};
      TrialRecord record;
      record.trial = t + 1;
      record.seed = seed;
      record.placement = options.placements[p];
      record.c_star = solve(problem).c_star;
      record.c = to_double(record.c_star);
      report.records.push_back(std::move(record));
    }
  }

  const std::size_t k = placements.size();
  for (std::size_t p = 0; p < k; ++p) {
    std::vector<double> values;
    for (std::size_t t = 0; t < options.trials; ++t) values.push_back(report.records[t * k + p].c);
    report.summaries.push_back(summarize(options.placements[p], values));
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      PairwiseCount pc{options.placements[a], options.placements[b]};
      for (std::size_t t = 0; t < options.trials; ++t) {
        const Rational& ca = report.records[t * k + a].c_star;
        const Rational& cb = report.records[t * k + b].c_star;
        if (ca > cb) {
          ++pc.a_worse;
        } else if (ca < cb) {
          ++pc.a_better;
        } else {
          ++pc.ties;
        }
      }
      report.pairwise.push_back(pc);
    }
  }
  report.histogram = histogram(report.records, options.placements, options.bins);
  return report;
}

void write_trials_csv(std::ostream& out, const TrialReport& report) {
  out << "trial_id,seed,placement,c_star\n";
  for (const auto& r : report.records) {
    out << r.trial << ',' << r.seed << ',' << r.placement << ',' << format_double(r.c) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const TrialReport& report) {
  out << "placement,trials,mean,variance,min,max\n";
  for (const auto& s : report.summaries) {
    out << s.placement << ',' << report.options.trials << ',' << format_double(s.mean) << ','
        << format_double(s.variance) << ',' << format_double(s.min) << ',' << format_double(s.max) << '\n';
  }
  out << "\na,b,a_worse,a_better,ties\n";
  for (const auto& p : report.pairwise) {
    out << p.a << ',' << p.b << ',' << p.a_worse << ',' << p.a_better << ',' << p.ties << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const TrialReport& report) {
  out << "placement,bin,low,high,count\n";
  for (const auto& h : report.histogram) {
    out << h.placement << ',' << h.bin << ',' << format_double(h.low) << ',' << format_double(h.high) << ','
        << h.count << '\n';
  }
}

// ---------------------------------------------------------------------------
// Scenario files

namespace {

std::vector<double> positive_list(const json& value, const char* what) {
  if (!value.is_array()) throw ValidationError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : value) {
    if (!v.is_number()) throw ValidationError(std::string(what) + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

AvailableSet one_based_set(const json& value, std::size_t machines) {
  if (!value.is_array()) throw ValidationError("timeline entries must be arrays of machine indices");
  std::vector<std::size_t> members;
  for (const auto& v : value) {
    const auto n = v.get<std::size_t>();
    if (n == 0 || n > machines) throw ValidationError("timeline machine " + std::to_string(n) + " outside 1.." + std::to_string(machines));
    members.push_back(n - 1);
  }
  return {machines, std::move(members)};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

SimulationSetup parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
      if (json_text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("invalid JSON scenario", line, column);
  }

  try {
    const auto machines = doc.at("machines").get<std::size_t>();
    const auto replication = doc.value("replication", std::size_t{1});
    const auto& placement_spec = doc.at("placement");

    std::optional<StoragePlacement> placement;
    if (placement_spec.is_string()) {
      const auto name = placement_spec.get<std::string>();
      if (name == "repetition") {
        placement = repetition_placement(machines, doc.value("submatrices", machines), replication);
      } else {
        placement = named_placement(name, machines, replication);
      }
    } else if (placement_spec.contains("file")) {
      placement = load_placement_file((base_dir / placement_spec.at("file").get<std::string>()).string());
    } else if (placement_spec.contains("text")) {
      placement = parse_placement(placement_spec.at("text").get<std::string>());
    } else {
      throw ValidationError("placement must be a name, {\"file\": ...} or {\"text\": ...}");
    }
    if (placement->machines() != machines) throw ValidationError("placement N disagrees with 'machines'");

    ElasticScenario scenario{.placement = *placement};
    scenario.true_speeds = positive_list(doc.at("true_speeds"), "true_speeds");
    scenario.steps = doc.value("steps", std::size_t{1});
    scenario.stragglers = doc.value("stragglers", std::size_t{0});
    scenario.gamma = doc.value("gamma", 0.5);
    if (doc.contains("timeline")) {
      for (const auto& entry : doc.at("timeline")) scenario.timeline.push_back(one_based_set(entry, machines));
    }
    if (doc.contains("straggler_policy")) {
      const auto& p = doc.at("straggler_policy");
      const auto kind = p.value("kind", std::string("none"));
      if (kind == "none") {
        scenario.straggler_policy.kind = StragglerPolicy::Kind::None;
      } else if (kind == "random") {
        scenario.straggler_policy.kind = StragglerPolicy::Kind::Random;
      } else if (kind == "adversarial") {
        scenario.straggler_policy.kind = StragglerPolicy::Kind::Adversarial;
      } else {
        throw ValidationError("unknown straggler policy '" + kind + "'");
      }
      scenario.straggler_policy.count = p.value("count", scenario.stragglers);
      scenario.straggler_policy.seed = p.value("seed", std::uint64_t{0});
    }
    if (doc.contains("noise")) {
      scenario.noise.amplitude = doc.at("noise").value("amplitude", 0.05);
      scenario.noise.seed = doc.at("noise").value("seed", std::uint64_t{0});
    }
    if (doc.contains("initial_estimate")) {
      scenario.initial_estimate = positive_list(doc.at("initial_estimate"), "initial_estimate");
    }
    if (doc.value("mode", std::string("heterogeneous")) == "homogeneous") scenario.mode = AssignmentMode::Homogeneous;

    SimulationSetup setup{scenario, {}, {}};
    const json workload = doc.value("workload", json::object());
    const auto kind = workload.value("kind", std::string("uniform_symmetric"));
    const auto seed = workload.value("seed", std::uint64_t{1});
    if (kind == "uniform_symmetric") {
      setup.matrix = DenseMatrix::uniform_symmetric(workload.at("size").get<std::size_t>(), seed);
    } else if (kind == "identity") {
      setup.matrix = DenseMatrix::identity(workload.at("size").get<std::size_t>());
    } else if (kind == "diagonal") {
      const auto values = positive_list(workload.at("values"), "workload.values");
      setup.matrix = DenseMatrix::diagonal(values);
    } else if (kind == "matrix_file") {
      setup.matrix = DenseMatrix::load_text((base_dir / workload.at("path").get<std::string>()).string());
    } else {
      throw ValidationError("unknown workload kind '" + kind + "'");
    }
    if (setup.matrix.rows() % placement->submatrices() != 0) {
      throw ValidationError("matrix rows (" + std::to_string(setup.matrix.rows()) + ") not divisible by G=" +
                            std::to_string(placement->submatrices()));
    }

    if (doc.contains("start") && doc.at("start").is_array()) {
      setup.start = positive_list(doc.at("start"), "start");
    } else {
      std::mt19937_64 rng(workload.value("start_seed", seed + 1));
      setup.start.resize(setup.matrix.cols());
      for (double& v : setup.start) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 + 0.5;
    }
    setup.scenario.validate();
    return setup;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
}

SimulationSetup load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path.parent_path());
}

SimulationReport run_simulation(const SimulationSetup& setup) {
  SimulationReport report;
  ElasticScenario scenario = setup.scenario;
  scenario.mode = AssignmentMode::Heterogeneous;
  report.heterogeneous = power_iteration(setup.matrix, scenario, setup.start);
  scenario.mode = AssignmentMode::Homogeneous;
  report.homogeneous = power_iteration(setup.matrix, scenario, setup.start);
  for (const auto& s : report.heterogeneous.steps) report.total_time_heterogeneous += s.completion_time;
  for (const auto& s : report.homogeneous.steps) report.total_time_homogeneous += s.completion_time;
  return report;
}

namespace {

const char* mode_name(AssignmentMode mode) {
  return mode == AssignmentMode::Heterogeneous ? "heterogeneous" : "homogeneous";
}

template <typename Row>
void for_each_step(const SimulationReport& report, Row&& row) {
  for (const auto* run : {&report.heterogeneous, &report.homogeneous}) {
    for (std::size_t i = 0; i < run->steps.size(); ++i) row(run->steps[i], run->nmse[i]);
  }
}

std::string join_one_based(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(values[i] + 1);
  }
  return out;
}

}  // namespace

void write_simulation_csv(std::ostream& out, const SimulationReport& report) {
  out << "step,mode,c_est,c_real,nmse\n";
  for_each_step(report, [&](const StepMetrics& m, double error) {
    out << m.step << ',' << mode_name(m.mode) << ',' << format_double(to_double(m.c_estimated)) << ','
        << format_double(m.c_realized) << ',' << format_double(error) << '\n';
  });
}

void write_steps_csv(std::ostream& out, const SimulationReport& report) {
  out << "step,mode,completion_time,available,stragglers,loads\n";
  for_each_step(report, [&](const StepMetrics& m, double) {
    out << m.step << ',' << mode_name(m.mode) << ',' << format_double(m.completion_time) << ','
        << join_one_based(m.available) << ',' << join_one_based(m.stragglers) << ',';
    for (std::size_t n = 0; n < m.machine_loads.size(); ++n) out << (n ? " " : "") << format_double(m.machine_loads[n]);
    out << '\n';
  });
}

}  // namespace usec
