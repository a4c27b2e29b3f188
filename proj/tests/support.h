// Test-side oracles shared by the unit tests and the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "qle/errors.h"
#include "qle/fview.h"
#include "qle/qsim.h"
#include "qle/rng.h"
#include "qle/runtime.h"
#include "qle/topology.h"

namespace qle::testing {

// ---- graphs -----------------------------------------------------------------

struct NamedNetwork {
  std::string name;
  Network net;
};

inline Network make_network(Topology t, std::uint64_t port_seed = 0) {
  PortNumbering p = assign_ports(t, port_seed);
  return Network(std::move(t), std::move(p));
}

inline Topology path_graph(int n) {
  Topology t{n, false, {}};
  for (int v = 0; v + 1 < n; ++v) t.edges.emplace_back(v, v + 1);
  return t;
}

inline Topology star_graph(int n) {
  Topology t{n, false, {}};
  for (int v = 1; v < n; ++v) t.edges.emplace_back(0, v);
  return t;
}

inline Topology petersen() {
  Topology t{10, false, {}};
  for (int i = 0; i < 5; ++i) {
    t.edges.emplace_back(i, (i + 1) % 5);
    t.edges.emplace_back(i, i + 5);
    t.edges.emplace_back(5 + i, 5 + (i + 2) % 5);
  }
  return t;
}

// Random spanning tree plus `chords` extra edges.
inline Topology tree_with_chords(int n, int chords, std::uint64_t seed) {
  Rng rng(seed);
  Topology t{n, false, {}};
  std::set<std::pair<int, int>> have;
  for (int v = 1; v < n; ++v) {
    int u = static_cast<int>(uniform_index(rng, v));
    t.edges.emplace_back(u, v);
    have.insert({u, v});
  }
  int tries = 0;
  while (chords > 0 && tries++ < 100) {
    int u = static_cast<int>(uniform_index(rng, n));
    int v = static_cast<int>(uniform_index(rng, n));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!have.insert({u, v}).second) continue;
    t.edges.emplace_back(u, v);
    --chords;
  }
  return t;
}

// Every graph of the small family with n <= max_n, undirected and directed.
inline std::vector<NamedNetwork> small_family(int max_n, bool include_directed = true) {
  std::vector<NamedNetwork> out;
  auto add = [&](std::string name, Topology t, std::uint64_t port_seed = 0) {
    out.push_back({std::move(name), make_network(std::move(t), port_seed)});
  };
  for (int n = 2; n <= max_n; ++n) {
    const std::string s = std::to_string(n);
    if (n >= 3) add("ring" + s, generate(TopologyKind::ring, {n}, 0));
    if (n >= 3) add("ring" + s + "_ports1", generate(TopologyKind::ring, {n}, 0), 1);
    add("path" + s, path_graph(n));
    add("complete" + s, generate(TopologyKind::complete, {n}, 0));
    if (n >= 4) add("star" + s, star_graph(n));
    if (n >= 4) add("tree_chords" + s, tree_with_chords(n, 1, 10 + n));
    if (include_directed && n >= 2) add("dicycle" + s, generate(TopologyKind::directed_cycle, {n}, 0));
    if (include_directed && n >= 3) {
      TopologyParams p{n};
      p.arcs = n + 2;
      add("strong" + s, generate(TopologyKind::random_strong_digraph, p, 5 + n), n);
    }
  }
  return out;
}

inline std::vector<Label> random_labels(int n, int alphabet, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Label> out(n);
  for (auto& x : out) x = uniform_index(rng, alphabet);
  return out;
}

// ---- strong connectivity (Tarjan) -----------------------------------------

inline int strongly_connected_components(int n, const std::vector<std::pair<int, int>>& arcs) {
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : arcs) adj[u].push_back(v);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on(n, false);
  int counter = 0, components = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = true;
    for (int w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      ++components;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = false;
      } while (w != v);
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return components;
}

// ---- dense state vector -----------------------------------------------------

class DenseState {
 public:
  using Amp = std::complex<double>;

  int add_qubit() {
    const int q = qubits_++;
    amps_.resize(amps_.size() * 2, 0.0);
    return q;
  }
  int size() const { return qubits_; }
  Amp amp(std::size_t index) const { return amps_[index]; }

  void apply_1q(const qsim::GateMatrix& g, int q) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & bit) continue;
      const Amp a0 = amps_[i], a1 = amps_[i | bit];
      amps_[i] = g(0, 0) * a0 + g(0, 1) * a1;
      amps_[i | bit] = g(1, 0) * a0 + g(1, 1) * a1;
    }
  }

  void apply_2q(const qsim::GateMatrix& g, int high, int low) {
    const std::size_t hb = std::size_t{1} << high, lb = std::size_t{1} << low;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (i & (hb | lb)) continue;
      const std::size_t idx[4] = {i, i | lb, i | hb, i | hb | lb};
      Amp in[4], out[4] = {};
      for (int r = 0; r < 4; ++r) in[r] = amps_[idx[r]];
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out[r] += g(r, c) * in[c];
      for (int r = 0; r < 4; ++r) amps_[idx[r]] = out[r];
    }
  }

  void apply_classical(const std::vector<int>& inputs, const std::vector<int>& targets, const qsim::ClassicalFn& f) {
    std::vector<Amp> next(amps_.size(), 0.0);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      std::uint64_t x = 0;
      for (std::size_t j = 0; j < inputs.size(); ++j) x |= static_cast<std::uint64_t>((i >> inputs[j]) & 1) << j;
      const std::uint64_t y = f(x);
      std::size_t k = i;
      for (std::size_t j = 0; j < targets.size(); ++j)
        if ((y >> j) & 1) k ^= std::size_t{1} << targets[j];
      next[k] += amps_[i];
    }
    amps_ = std::move(next);
  }

  double probability_one(int q) const {
    double p = 0;
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if ((i >> q) & 1) p += std::norm(amps_[i]);
    return p;
  }

  void project(int q, int outcome) {
    double p = 0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      if (static_cast<int>((i >> q) & 1) != outcome) {
        amps_[i] = 0;
      } else {
        p += std::norm(amps_[i]);
      }
    }
    const double s = 1.0 / std::sqrt(p);
    for (auto& a : amps_) a *= s;
  }

 private:
  int qubits_ = 0;
  std::vector<Amp> amps_{1.0};
};

// Largest entrywise difference between the sparse state (qubits `ids`,
// dense index j for ids[j]) and the dense vector.
inline double max_difference(const qsim::SparseState& sparse, const std::vector<qsim::QubitId>& ids,
                             const DenseState& dense) {
  double worst = 0;
  const std::size_t dim = std::size_t{1} << ids.size();
  for (std::size_t i = 0; i < dim; ++i) {
    std::map<qsim::QubitId, int> config;
    for (std::size_t j = 0; j < ids.size(); ++j) config[ids[j]] = static_cast<int>((i >> j) & 1);
    worst = std::max(worst, std::abs(sparse.amplitude(config) - dense.amp(i)));
  }
  return worst;
}

inline qsim::GateMatrix random_unitary_1q(Rng& rng) {
  const double pi = std::numbers::pi;
  const double alpha = uniform01(rng) * 2 * pi, beta = uniform01(rng) * 2 * pi, gamma = uniform01(rng) * 2 * pi;
  const double t = uniform01(rng) * pi / 2;
  const std::complex<double> g0 = std::polar(1.0, alpha);
  qsim::GateMatrix g;
  g(0, 0) = g0 * std::polar(std::cos(t), beta);
  g(0, 1) = g0 * std::polar(std::sin(t), gamma);
  g(1, 0) = -g0 * std::polar(std::sin(t), -gamma);
  g(1, 1) = g0 * std::polar(std::cos(t), -beta);
  return g;
}

// Random circuit over at most `max_qubits` qubits mixing every operation the
// simulator offers; returns the worst amplitude difference seen after any
// step.
inline double random_circuit_difference(std::uint64_t seed, int max_qubits = 10, int steps = 60) {
  Rng rng(seed);
  qsim::SparseState sparse;
  DenseState dense;
  std::vector<qsim::QubitId> ids;
  const int width = 2 + static_cast<int>(uniform_index(rng, max_qubits - 1));
  for (int i = 0; i < width; ++i) {
    ids.push_back(sparse.alloc(0));
    dense.add_qubit();
  }
  Rng measure_rng(seed ^ 0xabcdef);
  double worst = 0;
  for (int s = 0; s < steps; ++s) {
    const int a = static_cast<int>(uniform_index(rng, width));
    int b = static_cast<int>(uniform_index(rng, width - 1));
    if (b >= a) ++b;
    switch (uniform_index(rng, 9)) {
      case 0: {
        auto g = qsim::hadamard();
        sparse.apply_1q(g, ids[a]);
        dense.apply_1q(g, a);
        break;
      }
      case 1: {
        const int k = 2 * (1 + static_cast<int>(uniform_index(rng, 4)));
        auto g = uniform_index(rng, 2) ? qsim::u_gate(k)
                                       : qsim::u_gate_general(k, uniform01(rng) * 3, static_cast<int>(uniform_index(rng, 3)));
        sparse.apply_1q(g, ids[a]);
        dense.apply_1q(g, a);
        break;
      }
      case 2: {
        auto g = qsim::w_gate(1 + static_cast<int>(uniform_index(rng, 8)));
        sparse.apply_1q(g, ids[a]);
        dense.apply_1q(g, a);
        break;
      }
      case 3: {
        auto g = qsim::v_gate(3 + 2 * static_cast<int>(uniform_index(rng, 3)));
        sparse.apply_2q(g, ids[a], ids[b]);
        dense.apply_2q(g, a, b);
        break;
      }
      case 4: {
        auto g = random_unitary_1q(rng);
        sparse.apply_1q(g, ids[a]);
        dense.apply_1q(g, a);
        break;
      }
      case 5: {  // copy / CNOT
        auto f = [](std::uint64_t x) { return x; };
        const qsim::QubitId in[] = {ids[a]}, out[] = {ids[b]};
        sparse.apply_classical(in, out, f);
        dense.apply_classical({a}, {b}, f);
        break;
      }
      case 6: {  // random reversible function: target ^= table(inputs)
        std::vector<int> pool(width);
        for (int i = 0; i < width; ++i) pool[i] = i;
        shuffle(pool, rng);
        const int nin = 1 + static_cast<int>(uniform_index(rng, std::min(3, width - 1)));
        const int nout = 1 + static_cast<int>(uniform_index(rng, std::min(2, width - nin)));
        std::vector<int> in(pool.begin(), pool.begin() + nin), out(pool.begin() + nin, pool.begin() + nin + nout);
        std::vector<std::uint64_t> table(std::size_t{1} << nin);
        for (auto& t : table) t = uniform_index(rng, std::uint64_t{1} << nout);
        auto f = [table](std::uint64_t x) { return table[x]; };
        std::vector<qsim::QubitId> sin, sout;
        for (int q : in) sin.push_back(ids[q]);
        for (int q : out) sout.push_back(ids[q]);
        sparse.apply_classical(sin, sout, f);
        dense.apply_classical(in, out, f);
        break;
      }
      case 7: {
        if (uniform_index(rng, 3) != 0) break;
        const int outcome = sparse.measure(ids[a], measure_rng);
        dense.project(a, outcome);
        break;
      }
      default: {
        if (uniform_index(rng, 3) != 0) break;
        const int outcome = sparse.measure_hadamard(ids[a], measure_rng);
        dense.apply_1q(qsim::hadamard(), a);
        dense.project(a, outcome);
        break;
      }
    }
    worst = std::max(worst, max_difference(sparse, ids, dense));
  }
  return worst;
}

// ---- all-equal amplitude checks ---------------------------------------------

// k-qubit cat state; returns the qubit ids.
inline std::vector<qsim::QubitId> make_cat(qsim::SparseState& st, int k) {
  std::vector<qsim::QubitId> q;
  for (int i = 0; i < k; ++i) q.push_back(st.alloc(i));
  st.apply_1q(qsim::hadamard(), q[0]);
  for (int i = 1; i < k; ++i) {
    const qsim::QubitId in[] = {q[0]}, out[] = {q[i]};
    st.apply_classical(in, out, [](std::uint64_t x) { return x; });
  }
  return q;
}

// max over b in {0,1} of |amp(b^k)| after U on every qubit of a k-cat.
inline double u_all_equal_residual(int k, const qsim::GateMatrix& u) {
  qsim::SparseState st;
  auto q = make_cat(st, k);
  for (auto id : q) st.apply_1q(u, id);
  double worst = 0;
  for (int b = 0; b < 2; ++b) {
    std::map<qsim::QubitId, int> config;
    for (auto id : q) config[id] = b;
    worst = std::max(worst, std::abs(st.amplitude(config)));
  }
  return worst;
}

// max over b in {00,01,10,11} of |amp(b^k)| after copying each cat qubit
// into a partner and applying V_k to each pair.
inline double v_all_equal_residual(int k) {
  qsim::SparseState st;
  auto r0 = make_cat(st, k);
  std::vector<qsim::QubitId> r1;
  for (int i = 0; i < k; ++i) {
    r1.push_back(st.alloc(i));
    const qsim::QubitId in[] = {r0[i]}, out[] = {r1[i]};
    st.apply_classical(in, out, [](std::uint64_t x) { return x; });
  }
  const auto v = qsim::v_gate(k);
  for (int i = 0; i < k; ++i) st.apply_2q(v, r0[i], r1[i]);
  double worst = 0;
  for (int b = 0; b < 4; ++b) {
    std::map<qsim::QubitId, int> config;
    for (int i = 0; i < k; ++i) {
      config[r0[i]] = (b >> 1) & 1;
      config[r1[i]] = b & 1;
    }
    worst = std::max(worst, std::abs(st.amplitude(config)));
  }
  return worst;
}

// ---- views ------------------------------------------------------------------

// Every labeled path of exactly `length` edges from node u, as the
// sequence label, port, peer port, label, ...
inline std::set<std::vector<std::uint64_t>> path_set(const FView& fv, NodeRef u, std::size_t length) {
  std::set<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> cur{fv.node(u).label};
  std::function<void(NodeRef, std::size_t)> walk = [&](NodeRef at, std::size_t left) {
    if (left == 0) {
      out.insert(cur);
      return;
    }
    const auto& node = fv.node(at);
    if (node.edges.empty()) {
      out.insert(cur);  // truncated early: records the dead end
      return;
    }
    for (const auto& e : node.edges) {
      NodeRef next{at.level + 1, e.target};
      cur.push_back(e.label.port);
      cur.push_back(e.label.peer_port);
      cur.push_back(fv.node(next).label);
      walk(next, left - 1);
      cur.resize(cur.size() - 3);
    }
  };
  walk(u, length);
  return out;
}

// Parties grouped by their depth-h view, via canonical tree strings.
inline std::vector<int> view_classes(const Network& net, const std::vector<Label>& labels, int h) {
  std::map<std::string, int> ids;
  std::vector<int> out;
  for (int v = 0; v < net.size(); ++v) {
    auto key = build_view(net, labels, v, h).canonical();
    auto it = ids.emplace(key, static_cast<int>(ids.size())).first;
    out.push_back(it->second);
  }
  return out;
}

// Classes renumbered by first occurrence so partitions compare with ==.
inline std::vector<int> normalize_partition(const std::vector<int>& classes) {
  std::map<int, int> renumber;
  std::vector<int> out;
  for (int c : classes) out.push_back(renumber.emplace(c, static_cast<int>(renumber.size())).first->second);
  return out;
}

// The minimal f-view of depth h that party v builds, computed centrally.
inline FView reference_fview(const Network& net, const std::vector<Label>& labels, int v, int h) {
  return minimize(fold(build_view(net, labels, v, h)));
}

// Per-party inputs for tests: the engine creates party programs in
// bookkeeping order, so a counter hands party v its own argument. Make a
// fresh Program for each run.
using IndexedProgram = std::function<Proc<PartyOutput>(PartyContext&, int)>;

inline Program indexed(IndexedProgram body) {
  auto next = std::make_shared<int>(0);
  return [body, next](PartyContext& ctx) { return body(ctx, (*next)++); };
}

inline Proc<PartyOutput> construct_party(PartyContext& ctx, int h, Label x, FView* sink) {
  *sink = co_await construct_fview(ctx, h, x);
  co_return PartyOutput{"done", 0};
}

// Runs the distributed construction and returns each party's f-view.
inline std::vector<FView> construct_all(const Network& net, const std::vector<Label>& labels, int h,
                                        RunStats* stats = nullptr) {
  std::vector<FView> out(net.size());
  auto result = run(net, indexed([&](PartyContext& ctx, int v) { return construct_party(ctx, h, labels[v], &out[v]); }));
  if (stats) *stats = std::move(result);
  return out;
}

// Partition of parties by path-set equality of length `length`, decided by
// path_set_equal on one f-view that hangs every party's f-view below a
// synthetic root.
inline std::vector<int> partition_by_path_sets(const std::vector<FView>& views, int length) {
  std::vector<std::pair<EdgeLabel, FView>> children;
  for (std::size_t v = 0; v < views.size(); ++v)
    children.push_back({EdgeLabel{static_cast<std::uint32_t>(v + 1), 1}, views[v]});
  const FView fv = minimize(FView::attach(0, children));
  std::vector<NodeRef> at;
  for (const auto& e : fv.root().edges) at.push_back(NodeRef{1, e.target});
  std::vector<int> classes(views.size(), -1);
  int next = 0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    for (std::size_t u = 0; u < v && classes[v] < 0; ++u)
      if (path_set_equal(fv, at[u], at[v], length + 1)) classes[v] = classes[u];
    if (classes[v] < 0) classes[v] = next++;
  }
  return classes;
}

}  // namespace qle::testing
