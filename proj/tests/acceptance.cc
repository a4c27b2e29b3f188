// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "qle/experiment.h"
#include "support.h"

namespace qle {
namespace {

using Clock = std::chrono::steady_clock;

constexpr int kSeeds = 20;

struct Line {
  std::string name;
  bool pass = true;
  std::vector<std::string> problems;
  std::string summary;

  void fail(const std::string& what) {
    pass = false;
    if (problems.size() < 5) problems.push_back(what);
  }
};

std::vector<Line> lines;

// Norm and ancilla bookkeeping gathered from every protocol run below.
struct SoundnessTally {
  double max_norm = 0;
  std::uint64_t norm_checks = 0;
  std::uint64_t zero_audits = 0;
  int runs = 0;
  std::vector<std::string> failures;
} soundness;

void report(const Line& l) {
  std::printf("%s %s: %s\n", l.pass ? "PASS" : "FAIL", l.name.c_str(), l.summary.c_str());
  for (const auto& p : l.problems) std::printf("    %s\n", p.c_str());
  std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Case {
  std::string name;
  Network net;
};

Case topo(const std::string& name, TopologyKind kind, TopologyParams p, std::uint64_t seed = 0) {
  return {name, testing::make_network(generate(kind, p, seed), seed + 1)};
}

TopologyParams regular(int n, int d) {
  TopologyParams p{n};
  p.degree = d;
  return p;
}

TopologyParams strong(int n, int arcs) {
  TopologyParams p{n};
  p.arcs = arcs;
  return p;
}

ExperimentConfig config_for(Protocol protocol, int bound = 0) {
  ExperimentConfig c;
  c.protocol = protocol;
  c.upper_bound = bound;
  return c;
}

// Runs one cell and folds its soundness counters into the global tally.
CellResult run_counted(const Case& cs, const ExperimentConfig& config, std::uint64_t seed) {
  CellResult cell = run_cell(cs.net, config, seed);
  soundness.runs++;
  soundness.max_norm = std::max(soundness.max_norm, cell.stats.max_norm_deviation);
  soundness.norm_checks += cell.stats.norm_checks;
  soundness.zero_audits += cell.stats.zero_audits;
  for (const auto& v : cell.audit.violations)
    if (v.rfind("run failed", 0) == 0 && soundness.failures.size() < 5)
      soundness.failures.push_back(cs.name + " seed " + std::to_string(seed) + ": " + v);
  return cell;
}

std::string where(const Case& cs, std::uint64_t seed) { return cs.name + " seed " + std::to_string(seed); }

void check_unique_leader(Line& line, const Case& cs, const CellResult& cell) {
  if (cell.leaders != 1) line.fail(where(cs, cell.seed) + ": " + std::to_string(cell.leaders) + " leaders");
  for (const auto& v : cell.audit.violations) line.fail(where(cs, cell.seed) + ": " + v);
}

// Round 1 carries every shared qubit; later rounds are classical only.
void check_quantum_rounds(Line& line, const Case& cs, const CellResult& cell, std::uint64_t expected_first) {
  const auto& pr = cell.stats.per_round;
  const std::uint64_t first = pr.empty() ? 0 : pr.front().qubits;
  if (first != expected_first)
    line.fail(where(cs, cell.seed) + ": round 1 moved " + std::to_string(first) + " qubits, expected " +
              std::to_string(expected_first));
  for (std::size_t r = 1; r < pr.size(); ++r)
    if (pr[r].qubits != 0) {
      line.fail(where(cs, cell.seed) + ": " + std::to_string(pr[r].qubits) + " qubits in round " +
                std::to_string(pr[r].round));
      break;
    }
  if (cell.stats.qubits_moved != expected_first)
    line.fail(where(cs, cell.seed) + ": " + std::to_string(cell.stats.qubits_moved) + " qubits in total");
}

std::uint64_t links(const Network& net) { return net.directed() ? net.edge_count() : 2ull * net.edge_count(); }

Line quantum_rounds{"quantum communication only in round 1"};
int quantum_round_runs = 0;

void alg1_family() {
  Line line{"alg1 elects one leader on the mixed family"};
  std::vector<Case> cases;
  for (int n = 3; n <= 8; ++n) cases.push_back(topo("C" + std::to_string(n), TopologyKind::ring, {n}));
  cases.push_back(topo("K4", TopologyKind::complete, {4}));
  cases.push_back(topo("K5", TopologyKind::complete, {5}));
  cases.push_back({"Petersen", testing::make_network(testing::petersen(), 3)});
  cases.push_back(topo("3-regular n=8 #1", TopologyKind::random_regular, regular(8, 3), 11));
  cases.push_back(topo("3-regular n=8 #2", TopologyKind::random_regular, regular(8, 3), 12));
  const auto t0 = Clock::now();
  int runs = 0, max_rounds = 0;
  for (const auto& cs : cases)
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      CellResult cell = run_counted(cs, config_for(Protocol::alg1), seed);
      check_unique_leader(line, cs, cell);
      max_rounds = std::max(max_rounds, cell.stats.rounds);
      ++runs;
    }
  const double secs = seconds_since(t0);
  if (secs >= 300) line.fail("took " + std::to_string(secs) + " s");
  std::ostringstream s;
  s << runs << " runs, max rounds " << max_rounds << ", " << secs << " s";
  line.summary = s.str();
  lines.push_back(line);
}

void alg1_with_bound() {
  Line line{"alg1 with upper bound 2n elects one leader"};
  int runs = 0;
  for (const auto& cs : {topo("C4", TopologyKind::ring, {4}), topo("K4", TopologyKind::complete, {4})})
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      CellResult cell = run_counted(cs, config_for(Protocol::alg1_upper, 2 * cs.net.size()), seed);
      check_unique_leader(line, cs, cell);
      ++runs;
    }
  line.summary = std::to_string(runs) + " runs";
  lines.push_back(line);
}

void alg2_undirected() {
  Line line{"alg2 elects one leader within the phase and minority budgets"};
  std::vector<Case> cases;
  for (int n = 3; n <= 6; ++n) cases.push_back(topo("C" + std::to_string(n), TopologyKind::ring, {n}));
  cases.push_back(topo("K4", TopologyKind::complete, {4}));
  cases.push_back(topo("3-regular n=6", TopologyKind::random_regular, regular(6, 3), 5));
  int runs = 0, max_phases = 0;
  for (const auto& cs : cases) {
    const int n = cs.net.size();
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      CellResult cell = run_counted(cs, config_for(Protocol::alg2), seed);
      check_unique_leader(line, cs, cell);
      if (cell.audit.phases_used > ceil_log2(n))
        line.fail(where(cs, seed) + ": " + std::to_string(cell.audit.phases_used) + " phases");
      for (const auto& ph : cell.audit.phases) {
        const std::int64_t c = ph.detail.value("c", std::int64_t{-1});
        if (c < 1 || c > ph.k / 2)
          line.fail(where(cs, seed) + ": phase " + std::to_string(ph.phase) + " minority " + std::to_string(c) +
                    " with k = " + std::to_string(ph.k));
      }
      max_phases = std::max(max_phases, cell.audit.phases_used);
      check_quantum_rounds(quantum_rounds, cs, cell, links(cs.net) * ceil_log2(n));
      ++quantum_round_runs;
      ++runs;
    }
  }
  line.summary = std::to_string(runs) + " runs, max phases " + std::to_string(max_phases);
  lines.push_back(line);
}

void alg2_directed() {
  Line line{"alg2 elects one leader on directed networks"};
  std::vector<Case> cases;
  for (int n = 3; n <= 5; ++n) cases.push_back(topo("directed C" + std::to_string(n), TopologyKind::directed_cycle, {n}));
  cases.push_back(topo("strong digraph n=5 m=9", TopologyKind::random_strong_digraph, strong(5, 9), 4));
  int runs = 0;
  for (const auto& cs : cases)
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      CellResult cell = run_counted(cs, config_for(Protocol::alg2_directed), seed);
      check_unique_leader(line, cs, cell);
      check_quantum_rounds(quantum_rounds, cs, cell, links(cs.net) * ceil_log2(cs.net.size()));
      ++quantum_round_runs;
      ++runs;
    }
  line.summary = std::to_string(runs) + " runs";
  lines.push_back(line);
}

void generalized() {
  Line line{"generalized election errors on every overshoot and settles on n"};
  int runs = 0, exceptions = 0;
  for (int n = 3; n <= 5; ++n) {
    const Case cs = topo("C" + std::to_string(n), TopologyKind::ring, {n});
    const int bound = n + 3;
    std::uint64_t shared = 0;
    for (int m = 2; m <= bound; ++m) shared += links(cs.net) * ceil_log2(m);
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      CellResult cell = run_counted(cs, config_for(Protocol::alg2_generalized, bound), seed);
      ++runs;
      for (const auto& v : cell.audit.violations)
        if (v.rfind("run failed", 0) == 0) ++exceptions;
      check_unique_leader(line, cs, cell);
      std::map<int, int> errors;
      for (const auto& e : cell.stats.events)
        if (e.value("alg", "") == "guess" && e.value("outcome", "") == "error") errors[e["m"].get<int>()]++;
      for (int m = n + 1; m <= bound; ++m)
        if (errors[m] != n) line.fail(where(cs, seed) + ": guess " + std::to_string(m) + " did not error everywhere");
      for (const auto& out : cell.stats.outputs)
        if (out.value != n) line.fail(where(cs, seed) + ": winner " + std::to_string(out.value));
      check_quantum_rounds(quantum_rounds, cs, cell, shared);
      ++quantum_round_runs;
    }
  }
  if (exceptions) line.fail(std::to_string(exceptions) + " runs raised exceptions");
  line.summary = std::to_string(runs) + " runs, " + std::to_string(exceptions) + " exceptions";
  lines.push_back(line);
}

void gate_zero_amplitudes() {
  Line line{"symmetry-breaking gates kill the all-equal amplitudes"};
  double worst = 0, worst_unitary = 0;
  const std::vector<std::pair<double, int>> params = {{0.37, 1}, {1.9, 2}, {-2.4, 3}};
  for (int k : {2, 4, 6, 8}) {
    worst = std::max(worst, testing::u_all_equal_residual(k, qsim::u_gate(k)));
    for (const auto& [psi, t] : params) worst = std::max(worst, testing::u_all_equal_residual(k, qsim::u_gate_general(k, psi, t)));
  }
  for (int k : {3, 5, 7}) worst = std::max(worst, testing::v_all_equal_residual(k));
  for (int k = 2; k <= 8; ++k) {
    worst_unitary = std::max(worst_unitary, qsim::hadamard().unitarity_error());
    if (k % 2 == 0) {
      worst_unitary = std::max(worst_unitary, qsim::u_gate(k).unitarity_error());
      for (const auto& [psi, t] : params)
        worst_unitary = std::max(worst_unitary, qsim::u_gate_general(k, psi, t).unitarity_error());
    } else {
      worst_unitary = std::max(worst_unitary, qsim::v_gate(k).unitarity_error());
    }
    worst_unitary = std::max(worst_unitary, qsim::w_gate(k).unitarity_error());
  }
  if (worst >= 1e-9) line.fail("residual amplitude " + std::to_string(worst));
  if (worst_unitary >= 1e-12) line.fail("unitarity error " + std::to_string(worst_unitary));
  std::ostringstream s;
  s << "max residual " << worst << ", max unitarity error " << worst_unitary;
  line.summary = s.str();
  lines.push_back(line);
}

void fview_equivalence() {
  Line line{"constructed f-views match brute-force views"};
  int checked = 0;
  for (const auto& [name, net] : testing::small_family(5)) {
    const int n = net.size();
    for (int alphabet : {1, 2}) {
      const auto labels = testing::random_labels(n, alphabet, 31 * n + alphabet);
      for (int h = 0; h <= 2 * (n - 1); ++h) {
        const auto views = testing::construct_all(net, labels, h);
        for (int v = 0; v < n; ++v) {
          const std::string at = name + " h=" + std::to_string(h) + " v=" + std::to_string(v);
          if (unfold(views[v]).canonical() != build_view(net, labels, v, h).canonical()) line.fail(at + ": not isomorphic");
          const FView once = minimize(views[v]);
          if (!(minimize(once) == once)) line.fail(at + ": minimize not idempotent");
          if (serialize(once) != serialize(views[v])) line.fail(at + ": constructed f-view not minimal");
          if (once.max_level_width() > static_cast<std::size_t>(n)) line.fail(at + ": level wider than n");
          ++checked;
        }
      }
    }
  }
  line.summary = std::to_string(checked) + " (network, labels, depth, party) cases";
  lines.push_back(line);
}

void view_counting() {
  Line line{"view and party counts match brute force"};
  int checked = 0;
  for (const auto& [name, net] : testing::small_family(5)) {
    const int n = net.size();
    for (int alphabet : {1, 2, 3}) {
      const auto labels = testing::random_labels(n, alphabet, 13 * n + alphabet);
      const auto views = testing::construct_all(net, labels, 2 * (n - 1));
      const auto classes = testing::view_classes(net, labels, n - 1);
      for (int v = 0; v < n; ++v) {
        std::int64_t total = 0;
        for (Label s = 0; s < static_cast<Label>(alphabet); ++s) {
          std::set<int> distinct;
          int members = 0;
          for (int u = 0; u < n; ++u)
            if (labels[u] == s) distinct.insert(classes[u]), ++members;
          const std::string at = name + " v=" + std::to_string(v) + " label " + std::to_string(s);
          if (count_views(views[v], {s}, n) != static_cast<std::int64_t>(distinct.size()))
            line.fail(at + ": view count");
          const std::int64_t c = count_parties(views[v], {s}, n);
          if (c != members) line.fail(at + ": party count " + std::to_string(c) + " vs " + std::to_string(members));
          total += c;
          ++checked;
        }
        if (total != n) line.fail(name + " v=" + std::to_string(v) + ": counts sum to " + std::to_string(total));
      }
    }
  }
  line.summary = std::to_string(checked) + " singleton counts";
  lines.push_back(line);
}

void view_stabilization() {
  Line line{"view partitions stabilize by depth n-1"};
  int checked = 0, directed = 0;
  for (const auto& [name, net] : testing::small_family(5)) {
    const int n = net.size();
    for (int alphabet : {1, 2, 3}) {
      const auto labels = testing::random_labels(n, alphabet, 5 * n + alphabet);
      const auto before = testing::normalize_partition(testing::view_classes(net, labels, n - 1));
      const auto at = testing::normalize_partition(testing::view_classes(net, labels, n));
      if (before != at) line.fail(name + " alphabet " + std::to_string(alphabet));
      ++checked;
      directed += net.directed() ? 1 : 0;
    }
  }
  line.summary = std::to_string(checked) + " labelled networks, " + std::to_string(directed) + " directed";
  lines.push_back(line);
}

void simulator_soundness() {
  Line line{"simulator soundness"};
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) worst = std::max(worst, testing::random_circuit_difference(seed));
  if (worst >= 1e-9) line.fail("sparse and dense differ by " + std::to_string(worst));
  if (soundness.max_norm >= 1e-9) line.fail("norm deviated by " + std::to_string(soundness.max_norm));
  if (soundness.norm_checks == 0) line.fail("no norm checks recorded");
  if (soundness.zero_audits == 0) line.fail("no ancilla audits recorded");
  for (const auto& f : soundness.failures) line.fail(f);
  std::ostringstream s;
  s << "dense gap " << worst << "; " << soundness.runs << " runs, " << soundness.norm_checks << " norm checks (max "
    << soundness.max_norm << "), " << soundness.zero_audits << " ancilla audits";
  line.summary = s.str();
  lines.push_back(line);
}

std::vector<std::vector<std::string>> per_party_events(const RunStats& s, int n) {
  std::vector<std::vector<std::string>> out(n);
  for (auto e : s.events) {
    const int party = e["party"].get<int>();
    e.erase("party");
    out[party].push_back(e.dump());
  }
  return out;
}

bool equivariant(const Network& net, const Program& program, std::uint64_t seed) {
  const int n = net.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed + 1000);
  shuffle(perm, rng);
  RunOptions base;
  base.seed = seed;
  const RunStats a = run(net, program, base);
  RunOptions moved;
  moved.seed = seed;
  moved.streams.assign(n, 0);
  for (int v = 0; v < n; ++v) moved.streams[perm[v]] = v;
  const RunStats b = run(net.permuted(perm), program, moved);
  if (a.rounds != b.rounds || a.classical_bits != b.classical_bits || a.qubits_moved != b.qubits_moved) return false;
  const auto ea = per_party_events(a, n), eb = per_party_events(b, n);
  for (int v = 0; v < n; ++v)
    if (!(a.outputs[v] == b.outputs[perm[v]]) || ea[v] != eb[perm[v]]) return false;
  return true;
}

void determinism() {
  Line line{"determinism and anonymity"};
  int reports = 0, permutations = 0;
  std::vector<ExperimentConfig> configs;
  for (Protocol p : {Protocol::alg1, Protocol::alg2}) {
    ExperimentConfig c = config_for(p);
    c.topology = TopologyKind::complete;
    c.params.n = 4;
    c.seed_last = 9;
    configs.push_back(c);
  }
  ExperimentConfig g = config_for(Protocol::alg2_generalized, 5);
  g.params.n = 3;
  g.seed_last = 4;
  configs.push_back(g);
  for (auto c : configs) {
    const std::string first = run_experiment(c).document.dump(2);
    if (run_experiment(c).document.dump(2) != first) line.fail(to_string(c.protocol) + ": reports differ");
    c.jobs = 3;
    if (run_experiment(c).document.dump(2) != first) line.fail(to_string(c.protocol) + ": reports differ with jobs=3");
    ++reports;
  }
  const Case k4 = topo("K4", TopologyKind::complete, {4});
  const Case ring = topo("C5", TopologyKind::ring, {5}, 2);
  const Case digraph = topo("strong digraph", TopologyKind::random_strong_digraph, strong(5, 8), 3);
  const std::vector<std::tuple<std::string, const Case*, Program>> programs = {
      {"alg1 K4", &k4, alg1_program(4)},
      {"alg2 C5", &ring, alg2_program(5)},
      {"alg2 digraph", &digraph, alg2_program(5)},
      {"generalized C5", &ring, generalized_program(6, GuessMode::parallel)},
  };
  for (const auto& [name, cs, program] : programs)
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      if (!equivariant(cs->net, program, seed)) line.fail(name + " seed " + std::to_string(seed) + ": not equivariant");
      ++permutations;
    }
  line.summary = std::to_string(reports) + " report configs, " + std::to_string(permutations) + " permuted runs";
  lines.push_back(line);
}

}  // namespace
}  // namespace qle

int main() {
  using namespace qle;
  alg1_family();
  report(lines.back());
  alg1_with_bound();
  report(lines.back());
  alg2_undirected();
  report(lines.back());
  alg2_directed();
  report(lines.back());
  generalized();
  report(lines.back());
  quantum_rounds.summary = std::to_string(quantum_round_runs) + " alg2 runs";
  if (quantum_round_runs == 0) quantum_rounds.fail("no runs");
  lines.push_back(quantum_rounds);
  report(lines.back());
  gate_zero_amplitudes();
  report(lines.back());
  fview_equivalence();
  report(lines.back());
  view_counting();
  report(lines.back());
  view_stabilization();
  report(lines.back());
  simulator_soundness();
  report(lines.back());
  determinism();
  report(lines.back());

  int failed = 0;
  for (const auto& l : lines) failed += l.pass ? 0 : 1;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(lines.size()) - failed, lines.size());
  return failed == 0 ? 0 : 1;
}
