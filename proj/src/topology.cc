#include "qle/topology.h"

#include <algorithm>
#include <array>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "qle/errors.h"
#include "qle/rng.h"

namespace qle {

namespace {

std::pair<int, int> unordered(int u, int v) { return u < v ? std::pair{u, v} : std::pair{v, u}; }

Topology ring(int n) {
  if (n < 3) throw ParameterError("ring needs n >= 3");
  Topology t{n, false, {}};
  for (int v = 0; v < n; ++v) t.edges.emplace_back(v, (v + 1) % n);
  return t;
}

Topology complete(int n) {
  if (n < 2) throw ParameterError("complete graph needs n >= 2");
  Topology t{n, false, {}};
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) t.edges.emplace_back(u, v);
  return t;
}

Topology directed_cycle(int n) {
  if (n < 2) throw ParameterError("directed cycle needs n >= 2");
  Topology t{n, true, {}};
  for (int v = 0; v < n; ++v) t.edges.emplace_back(v, (v + 1) % n);
  return t;
}

// Configuration model, retried until simple and connected.
Topology random_regular(int n, int d, std::uint64_t seed) {
  if (n < 2 || d < 1 || d >= n) throw ParameterError("random_regular needs 1 <= d < n");
  if ((static_cast<long>(n) * d) % 2 != 0) throw ParameterError("random_regular needs n*d even");
  if (d == 1 && n > 2) throw ParameterError("random_regular with d = 1 is disconnected for n > 2");
  Rng rng(splitmix64(seed ^ 0x5eed0001ULL));
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<int> stubs;
    for (int v = 0; v < n; ++v)
      for (int j = 0; j < d; ++j) stubs.push_back(v);
    shuffle(stubs, rng);
    std::set<std::pair<int, int>> seen;
    Topology t{n, false, {}};
    bool ok = true;
    for (std::size_t i = 0; i < stubs.size(); i += 2) {
      int u = stubs[i], v = stubs[i + 1];
      if (u == v || !seen.insert(unordered(u, v)).second) {
        ok = false;
        break;
      }
      t.edges.push_back(unordered(u, v));
    }
    if (ok && validate(t).empty()) {
      std::sort(t.edges.begin(), t.edges.end());
      return t;
    }
  }
  throw ParameterError("random_regular: no simple connected graph found");
}

Topology random_strong_digraph(int n, int m, std::uint64_t seed) {
  if (n < 2) throw ParameterError("random_strong_digraph needs n >= 2");
  if (m < n || static_cast<long>(m) > static_cast<long>(n) * (n - 1))
    throw ParameterError("random_strong_digraph needs n <= m <= n(n-1)");
  Rng rng(splitmix64(seed ^ 0x5eed0002ULL));
  std::vector<int> order(n);
  for (int v = 0; v < n; ++v) order[v] = v;
  shuffle(order, rng);
  Topology t{n, true, {}};
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < n; ++i) {
    std::pair<int, int> arc{order[i], order[(i + 1) % n]};
    seen.insert(arc);
    t.edges.push_back(arc);
  }
  std::vector<std::pair<int, int>> rest;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && !seen.count({u, v})) rest.emplace_back(u, v);
  shuffle(rest, rng);
  for (int i = 0; i < m - n; ++i) t.edges.push_back(rest[i]);
  return t;
}

std::vector<std::vector<int>> out_lists(const Topology& t) {
  std::vector<std::vector<int>> adj(t.n);
  for (auto [u, v] : t.edges) {
    adj[u].push_back(v);
    if (!t.directed) adj[v].push_back(u);
  }
  return adj;
}

std::vector<std::vector<int>> in_lists(const Topology& t) {
  if (!t.directed) return out_lists(t);
  std::vector<std::vector<int>> adj(t.n);
  for (auto [u, v] : t.edges) adj[v].push_back(u);
  return adj;
}

int reach_count(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<bool> seen(adj.size(), false);
  std::queue<int> q;
  q.push(start);
  seen[start] = true;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        q.push(v);
      }
    }
  }
  return count;
}

}  // namespace

TopologyKind parse_topology_kind(std::string_view name) {
  if (name == "ring") return TopologyKind::ring;
  if (name == "complete") return TopologyKind::complete;
  if (name == "random_regular") return TopologyKind::random_regular;
  if (name == "directed_cycle") return TopologyKind::directed_cycle;
  if (name == "random_strong_digraph") return TopologyKind::random_strong_digraph;
  if (name == "from_edge_list") return TopologyKind::from_edge_list;
  throw ParameterError("unknown topology kind: " + std::string(name));
}

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::ring: return "ring";
    case TopologyKind::complete: return "complete";
    case TopologyKind::random_regular: return "random_regular";
    case TopologyKind::directed_cycle: return "directed_cycle";
    case TopologyKind::random_strong_digraph: return "random_strong_digraph";
    case TopologyKind::from_edge_list: return "from_edge_list";
  }
  return "?";
}

Topology generate(TopologyKind kind, const TopologyParams& params, std::uint64_t seed) {
  switch (kind) {
    case TopologyKind::ring: return ring(params.n);
    case TopologyKind::complete: return complete(params.n);
    case TopologyKind::random_regular: return random_regular(params.n, params.degree, seed);
    case TopologyKind::directed_cycle: return directed_cycle(params.n);
    case TopologyKind::random_strong_digraph:
      return random_strong_digraph(params.n, params.arcs, seed);
    case TopologyKind::from_edge_list: {
      auto file = parse_edge_list(params.edge_list);
      return file.topology;
    }
  }
  throw ParameterError("unknown topology kind");
}

std::vector<std::string> validate(const Topology& t) {
  std::vector<std::string> out;
  if (t.n < 1) {
    out.push_back("no nodes");
    return out;
  }
  std::set<std::pair<int, int>> seen;
  bool endpoints_ok = true;
  for (auto [u, v] : t.edges) {
    if (u < 0 || u >= t.n || v < 0 || v >= t.n) {
      out.push_back("endpoint out of range: " + std::to_string(u) + " " + std::to_string(v));
      endpoints_ok = false;
      continue;
    }
    if (u == v) out.push_back("self-loop at " + std::to_string(u));
    auto key = t.directed ? std::pair{u, v} : unordered(u, v);
    if (!seen.insert(key).second)
      out.push_back("duplicate link " + std::to_string(u) + " " + std::to_string(v));
  }
  if (!endpoints_ok) return out;
  auto fwd = out_lists(t);
  if (!t.directed) {
    if (reach_count(fwd, 0) != t.n) out.push_back("not connected");
  } else {
    auto back = in_lists(t);
    if (reach_count(fwd, 0) != t.n || reach_count(back, 0) != t.n)
      out.push_back("not strongly connected");
  }
  return out;
}

PortNumbering assign_ports(const Topology& t, std::uint64_t seed) {
  PortNumbering p;
  p.out_ports = out_lists(t);
  for (int v = 0; v < t.n; ++v) {
    Rng rng(stream_seed(seed ^ 0x9047ULL, 2 * static_cast<std::uint64_t>(v)));
    shuffle(p.out_ports[v], rng);
  }
  if (!t.directed) {
    p.in_ports = p.out_ports;
    return p;
  }
  p.in_ports = in_lists(t);
  for (int v = 0; v < t.n; ++v) {
    Rng rng(stream_seed(seed ^ 0x9047ULL, 2 * static_cast<std::uint64_t>(v) + 1));
    shuffle(p.in_ports[v], rng);
  }
  return p;
}

std::vector<std::string> validate_ports(const Topology& t, const PortNumbering& p) {
  std::vector<std::string> out;
  if (static_cast<int>(p.out_ports.size()) != t.n || static_cast<int>(p.in_ports.size()) != t.n) {
    out.push_back("port table size mismatch");
    return out;
  }
  auto fwd = out_lists(t);
  auto back = in_lists(t);
  for (int v = 0; v < t.n; ++v) {
    auto a = fwd[v], b = p.out_ports[v];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) out.push_back("out-ports of " + std::to_string(v) + " are not a bijection");
    a = back[v];
    b = p.in_ports[v];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) out.push_back("in-ports of " + std::to_string(v) + " are not a bijection");
    if (!t.directed && p.in_ports[v] != p.out_ports[v])
      out.push_back("undirected node " + std::to_string(v) + " has distinct in/out ports");
  }
  return out;
}

EdgeListFile parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto next_line = [&](std::vector<std::string>& tokens) {
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      tokens.clear();
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  };
  auto to_int = [](const std::string& s) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(s, &used);
    } catch (const std::exception&) {
      throw ParameterError("edge list: not an integer: " + s);
    }
    if (used != s.size()) throw ParameterError("edge list: not an integer: " + s);
    return value;
  };

  std::vector<std::string> tok;
  if (!next_line(tok) || tok.size() != 2) throw ParameterError("edge list: header must be 'n directed'");
  EdgeListFile file;
  file.topology.n = to_int(tok[0]);
  if (tok[1] == "1" || tok[1] == "directed") {
    file.topology.directed = true;
  } else if (tok[1] == "0" || tok[1] == "undirected") {
    file.topology.directed = false;
  } else {
    throw ParameterError("edge list: second header field must be 0/1");
  }
  if (file.topology.n < 1) throw ParameterError("edge list: n must be positive");

  std::vector<std::array<int, 4>> rows;
  int with_ports = 0;
  while (next_line(tok)) {
    if (tok.size() != 2 && tok.size() != 4) throw ParameterError("edge list: bad line: " + line);
    std::array<int, 4> r{to_int(tok[0]), to_int(tok[1]), 0, 0};
    if (tok.size() == 4) {
      r[2] = to_int(tok[2]);
      r[3] = to_int(tok[3]);
      ++with_ports;
    }
    rows.push_back(r);
    file.topology.edges.emplace_back(r[0], r[1]);
  }
  auto problems = validate(file.topology);
  if (!problems.empty()) throw ParameterError("edge list: " + problems.front());
  if (with_ports == 0) return file;
  if (with_ports != static_cast<int>(rows.size()))
    throw ParameterError("edge list: ports must be given on every line or none");

  int n = file.topology.n;
  std::vector<std::map<int, int>> outs(n), ins(n);
  for (auto& r : rows) {
    if (!outs[r[0]].emplace(r[2], r[1]).second)
      throw ParameterError("edge list: port reused at node " + std::to_string(r[0]));
    if (!ins[r[1]].emplace(r[3], r[0]).second)
      throw ParameterError("edge list: port reused at node " + std::to_string(r[1]));
    if (!file.topology.directed) {
      if (!outs[r[1]].emplace(r[3], r[0]).second || !ins[r[0]].emplace(r[2], r[1]).second)
        throw ParameterError("edge list: port reused");
    }
  }
  PortNumbering p;
  p.out_ports.resize(n);
  p.in_ports.resize(n);
  auto flatten = [](const std::map<int, int>& m, std::vector<int>& dst) {
    int expect = 1;
    for (auto [port, nb] : m) {
      if (port != expect++) throw ParameterError("edge list: ports must be 1..d");
      dst.push_back(nb);
    }
  };
  for (int v = 0; v < n; ++v) {
    if (file.topology.directed) {
      flatten(outs[v], p.out_ports[v]);
      flatten(ins[v], p.in_ports[v]);
    } else {
      flatten(outs[v], p.out_ports[v]);
      p.in_ports[v] = p.out_ports[v];
    }
  }
  file.ports = std::move(p);
  return file;
}

std::string format_edge_list(const Topology& t, const PortNumbering* ports) {
  std::ostringstream out;
  out << t.n << ' ' << (t.directed ? 1 : 0) << '\n';
  auto port_of = [](const std::vector<int>& table, int nb) {
    return static_cast<int>(std::find(table.begin(), table.end(), nb) - table.begin()) + 1;
  };
  for (auto [u, v] : t.edges) {
    out << u << ' ' << v;
    if (ports) out << ' ' << port_of(ports->out_ports[u], v) << ' ' << port_of(ports->in_ports[v], u);
    out << '\n';
  }
  return out.str();
}

Network::Network(Topology topology, PortNumbering ports)
    : topology_(std::move(topology)), ports_(std::move(ports)) {
  auto problems = validate(topology_);
  auto port_problems = validate_ports(topology_, ports_);
  problems.insert(problems.end(), port_problems.begin(), port_problems.end());
  if (!problems.empty()) throw ParameterError("invalid network: " + problems.front());
  int n = topology_.n;
  deliver_.resize(n);
  source_.resize(n);
  auto index_of = [](const std::vector<int>& table, int nb) {
    return static_cast<int>(std::find(table.begin(), table.end(), nb) - table.begin()) + 1;
  };
  for (int v = 0; v < n; ++v) {
    for (int w : ports_.out_ports[v]) deliver_[v].push_back({w, index_of(ports_.in_ports[w], v)});
    for (int u : ports_.in_ports[v]) source_[v].push_back({u, index_of(ports_.out_ports[u], v)});
  }
}

int Network::max_degree() const {
  int d = 0;
  for (int v = 0; v < size(); ++v) d = std::max(d, std::max(in_degree(v), out_degree(v)));
  return d;
}

Network Network::permuted(const std::vector<int>& perm) const {
  int n = size();
  Topology t{n, topology_.directed, {}};
  for (auto [u, v] : topology_.edges) t.edges.emplace_back(perm[u], perm[v]);
  PortNumbering p;
  p.out_ports.resize(n);
  p.in_ports.resize(n);
  for (int v = 0; v < n; ++v) {
    for (int w : ports_.out_ports[v]) p.out_ports[perm[v]].push_back(perm[w]);
    for (int w : ports_.in_ports[v]) p.in_ports[perm[v]].push_back(perm[w]);
  }
  return Network(std::move(t), std::move(p));
}

}  // namespace qle
