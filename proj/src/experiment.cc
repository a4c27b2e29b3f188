#include "qle/experiment.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "qle/errors.h"

namespace qle {

Protocol parse_protocol(std::string_view name) {
  if (name == "alg1") return Protocol::alg1;
  if (name == "alg1_upper") return Protocol::alg1_upper;
  if (name == "alg2") return Protocol::alg2;
  if (name == "alg2_directed") return Protocol::alg2_directed;
  if (name == "alg2_generalized") return Protocol::alg2_generalized;
  throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::alg1: return "alg1";
    case Protocol::alg1_upper: return "alg1_upper";
    case Protocol::alg2: return "alg2";
    case Protocol::alg2_directed: return "alg2_directed";
    case Protocol::alg2_generalized: return "alg2_generalized";
  }
  return "?";
}

namespace {

bool uses_bound(Protocol p) { return p == Protocol::alg1_upper || p == Protocol::alg2_generalized; }

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const std::uint64_t s = std::stoull(text);
      return {s, s};
    }
    return {std::stoull(text.substr(0, dots)), std::stoull(text.substr(dots + 2))};
  } catch (const std::logic_error&) {
    throw ConfigError("--seeds expects A..B, got '" + text + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["protocol"] = to_string(protocol);
  j["topology"] = to_string(topology);
  j["n"] = params.n;
  if (params.degree) j["degree"] = params.degree;
  if (params.arcs) j["arcs"] = params.arcs;
  if (!topology_file.empty()) j["topology_file"] = topology_file;
  j["topology_seed"] = topology_seed;
  if (upper_bound) j["upper_bound"] = upper_bound;
  j["seeds"] = {seed_first, seed_last};
  j["round_cap"] = round_cap;
  if (protocol == Protocol::alg2_generalized) j["mode"] = mode == GuessMode::parallel ? "parallel" : "descending";
  return j;
}

ExperimentConfig parse_args(int argc, const char* const* argv) {
  ExperimentConfig c;
  CLI::App app{"Leader election experiments on anonymous networks"};
  std::string protocol, topology = "ring", seeds = "0..0", mode = "parallel";
  app.add_option("--protocol", protocol, "alg1 | alg1_upper | alg2 | alg2_directed | alg2_generalized")->required();
  app.add_option("--topology", topology, "ring | complete | random_regular | directed_cycle | random_strong_digraph");
  app.add_option("--n", c.params.n, "party count");
  app.add_option("--upper-bound", c.upper_bound, "upper bound N given to the parties");
  app.add_option("--seeds", seeds, "seed range A..B (inclusive)");
  app.add_option("--out", c.out, "report path (stdout if omitted)");
  app.add_option("--trace", c.trace, "JSON-lines phase trace path");
  app.add_option("--round-cap", c.round_cap, "round cap (default 10 N^2)");
  app.add_option("--topology-file", c.topology_file, "edge-list file");
  app.add_option("--degree", c.params.degree, "degree for random_regular");
  app.add_option("--arcs", c.params.arcs, "arc count for random_strong_digraph");
  app.add_option("--topology-seed", c.topology_seed, "seed for the topology and port numbering");
  app.add_option("--jobs", c.jobs, "worker threads");
  app.add_option("--mode", mode, "parallel | descending (alg2_generalized)");
  app.add_option("--max-parties", c.max_parties, "largest n accepted for quantum protocols");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  c.protocol = parse_protocol(protocol);
  if (!c.topology_file.empty()) {
    c.topology = TopologyKind::from_edge_list;
  } else {
    try {
      c.topology = parse_topology_kind(topology);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  std::tie(c.seed_first, c.seed_last) = parse_seed_range(seeds);
  if (mode == "parallel") {
    c.mode = GuessMode::parallel;
  } else if (mode == "descending") {
    c.mode = GuessMode::descending;
  } else {
    throw ConfigError("--mode must be parallel or descending");
  }
  check_config(c);
  return c;
}

Network build_network(const ExperimentConfig& config) {
  Topology topology;
  std::optional<PortNumbering> ports;
  try {
    if (config.topology == TopologyKind::from_edge_list) {
      std::string text = config.params.edge_list;
      if (text.empty()) text = read_file(config.topology_file);
      auto file = parse_edge_list(text);
      topology = std::move(file.topology);
      ports = std::move(file.ports);
    } else {
      topology = generate(config.topology, config.params, config.topology_seed);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  auto problems = validate(topology);
  if (!problems.empty()) throw ConfigError("invalid topology: " + problems.front());
  if (!ports) ports = assign_ports(topology, config.topology_seed);
  return Network(std::move(topology), std::move(*ports));
}

void check_config(const ExperimentConfig& c) {
  if (c.seed_first > c.seed_last) throw ConfigError("empty seed range");
  if (c.jobs < 1) throw ConfigError("--jobs must be positive");
  if (c.topology != TopologyKind::from_edge_list && c.params.n < 2) throw ConfigError("--n must be at least 2");
  const Network net = build_network(c);
  const int n = net.size();
  if (n > c.max_parties) throw ConfigError("n exceeds the configured party limit");
  if (c.protocol == Protocol::alg2_directed && !net.directed())
    throw ConfigError("alg2_directed needs a directed topology");
  if ((c.protocol == Protocol::alg1 || c.protocol == Protocol::alg1_upper || c.protocol == Protocol::alg2) &&
      net.directed())
    throw ConfigError(to_string(c.protocol) + " needs an undirected topology");
  if (uses_bound(c.protocol)) {
    if (c.upper_bound < n) throw ConfigError("--upper-bound must be at least n");
  } else if (c.upper_bound != 0) {
    throw ConfigError("--upper-bound only applies to alg1_upper and alg2_generalized");
  }
}

nlohmann::json CellResult::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["stats"] = stats.to_json();
  j["leaders"] = leaders;
  j["audit"] = audit.to_json();
  j["ok"] = ok;
  return j;
}

CellResult run_cell(const Network& net, const ExperimentConfig& config, std::uint64_t seed, const RunOptions& base) {
  const int n = net.size();
  const int bound = uses_bound(config.protocol) ? config.upper_bound : n;
  CellResult cell;
  cell.seed = seed;

  RunOptions opts = base;
  opts.seed = seed;
  if (config.round_cap > 0) opts.round_cap = config.round_cap;
  if (opts.round_cap == 0) opts.round_cap = default_round_cap(std::max(n, bound));
  CatAudit cats(n);
  const bool counting = config.protocol == Protocol::alg2 || config.protocol == Protocol::alg2_directed ||
                        config.protocol == Protocol::alg2_generalized;
  if (counting) {
    auto user = base.observer;
    opts.observer = [&cats, user](const RoundView& view) {
      cats(view);
      if (user) user(view);
    };
  }

  Program program;
  switch (config.protocol) {
    case Protocol::alg1: program = alg1_program(n); break;
    case Protocol::alg1_upper: program = alg1_program(bound); break;
    case Protocol::alg2:
    case Protocol::alg2_directed: program = alg2_program(n); break;
    case Protocol::alg2_generalized: program = generalized_program(bound, config.mode); break;
  }

  try {
    cell.stats = run(net, program, opts);
  } catch (const Error& e) {
    cell.audit.violations.push_back(std::string("run failed: ") + e.what());
    return cell;
  }

  const RunStats& st = cell.stats;
  cell.leaders = st.count_status("eligible");
  if (config.protocol == Protocol::alg1 || config.protocol == Protocol::alg1_upper) {
    cell.audit = audit_alg1(st, n);
  } else {
    cell.audit = audit_alg2(st, n, n);
    if (config.protocol == Protocol::alg2_generalized) audit_generalized(st, n, bound, cell.audit);
  }
  auto& v = cell.audit.violations;
  if (st.max_norm_deviation >= 1e-9) v.push_back("norm deviated by " + std::to_string(st.max_norm_deviation));
  if (st.qubits_allocated - st.qubits_retired != st.qubits_live) v.push_back("qubit conservation failed");
  if (counting) {
    for (const auto& s : cats.violations()) v.push_back(s);
    int instances = 0;
    if (config.protocol == Protocol::alg2_generalized && config.mode == GuessMode::parallel) {
      for (int m = 2; m <= bound; ++m) instances += ceil_log2(m);
    } else if (config.protocol != Protocol::alg2_generalized) {
      instances = ceil_log2(n);
    }
    if (cats.checked() == 0) v.push_back("no shared cat state was audited");
    const std::uint64_t per_instance = net.directed() ? net.edge_count() : 2ull * net.edge_count();
    if (instances > 0) {
      const std::uint64_t first = st.per_round.empty() ? 0 : st.per_round.front().qubits;
      if (first != per_instance * instances)
        v.push_back("round 1 moved " + std::to_string(first) + " qubits, expected " +
                    std::to_string(per_instance * instances));
      for (std::size_t r = 1; r < st.per_round.size(); ++r)
        if (st.per_round[r].qubits != 0) {
          v.push_back("quantum communication in round " + std::to_string(r + 1));
          break;
        }
    }
  }
  cell.ok = cell.leaders == 1 && v.empty();
  return cell;
}

Report run_experiment(const ExperimentConfig& config) {
  check_config(config);
  const Network net = build_network(config);
  const std::size_t count = config.seed_last - config.seed_first + 1;
  std::vector<CellResult> cells(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        cells[i] = run_cell(net, config, config.seed_first + i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  Report report;
  nlohmann::json cells_json = nlohmann::json::array();
  int successes = 0, max_rounds = 0, max_phases = 0, violations = 0;
  std::uint64_t max_qubits = 0, max_bits = 0;
  for (const auto& cell : cells) {
    cells_json.push_back(cell.to_json());
    successes += cell.ok ? 1 : 0;
    max_rounds = std::max(max_rounds, cell.stats.rounds);
    max_qubits = std::max(max_qubits, cell.stats.qubits_moved);
    max_bits = std::max(max_bits, cell.stats.classical_bits);
    max_phases = std::max(max_phases, cell.audit.phases_used);
    violations += static_cast<int>(cell.audit.violations.size());
    for (auto line : cell.audit.trace_lines()) {
      line["seed"] = cell.seed;
      report.trace_lines.push_back(line.dump());
    }
  }
  nlohmann::json agg;
  agg["runs"] = count;
  agg["success_rate"] = static_cast<double>(successes) / static_cast<double>(count);
  agg["max_rounds"] = max_rounds;
  agg["max_qubits"] = max_qubits;
  agg["max_bits"] = max_bits;
  agg["max_phases"] = max_phases;
  agg["audit_violations"] = violations;
  nlohmann::json cfg = config.to_json();
  cfg["parties"] = net.size();
  cfg["edges"] = net.edge_count();
  report.document = {{"config", cfg}, {"cells", cells_json}, {"aggregates", agg}};
  report.success = successes == static_cast<int>(count);
  return report;
}

int write_report(const ExperimentConfig& config, const Report& report) {
  const std::string body = report.document.dump(2) + "\n";
  if (config.out.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(config.out);
    if (!out) throw ConfigError("cannot write " + config.out);
    out << body;
  }
  if (!config.trace.empty()) {
    std::ofstream trace(config.trace);
    if (!trace) throw ConfigError("cannot write " + config.trace);
    for (const auto& line : report.trace_lines) trace << line << "\n";
  }
  return report.success ? 0 : 1;
}

}  // namespace qle
