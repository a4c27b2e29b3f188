#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qle/leader.h"
#include "qle/runtime.h"
#include "qle/topology.h"

namespace qle {

enum class Protocol { alg1, alg1_upper, alg2, alg2_directed, alg2_generalized };

Protocol parse_protocol(std::string_view name);
std::string to_string(Protocol p);

inline constexpr int kMaxQuantumParties = 10;

struct ExperimentConfig {
  Protocol protocol = Protocol::alg1;
  TopologyKind topology = TopologyKind::ring;
  TopologyParams params;
  std::string topology_file;  // path; read when topology is from_edge_list
  std::uint64_t topology_seed = 0;
  int upper_bound = 0;  // alg1_upper and alg2_generalized
  std::uint64_t seed_first = 0;
  std::uint64_t seed_last = 0;
  std::string out;
  std::string trace;
  int round_cap = 0;
  int jobs = 1;
  GuessMode mode = GuessMode::parallel;
  int max_parties = kMaxQuantumParties;

  nlohmann::json to_json() const;
};

// Thrown by parse_args for --help; what() is the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ConfigError on bad flags or an incompatible protocol/topology pair,
// HelpRequested for --help.
ExperimentConfig parse_args(int argc, const char* const* argv);
// Throws ConfigError.
void check_config(const ExperimentConfig& config);

Network build_network(const ExperimentConfig& config);

struct CellResult {
  std::uint64_t seed = 0;
  RunStats stats;
  AuditReport audit;
  int leaders = 0;
  bool ok = false;
  nlohmann::json to_json() const;
};

CellResult run_cell(const Network& network, const ExperimentConfig& config, std::uint64_t seed,
                    const RunOptions& base = {});

struct Report {
  nlohmann::json document;
  std::vector<std::string> trace_lines;
  bool success = false;  // every run elected exactly one leader with no audit violation
};

Report run_experiment(const ExperimentConfig& config);
// Writes the report and, if requested, the trace. Returns the exit code.
int write_report(const ExperimentConfig& config, const Report& report);

}  // namespace qle
