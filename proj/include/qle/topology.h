#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qle {

// Node ids 0..n-1 exist only on the simulator side.
struct Topology {
  int n = 0;
  bool directed = false;
  // Undirected: unordered pairs. Directed: (tail, head).
  std::vector<std::pair<int, int>> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
};

// Ports are 1-based. out_ports[v][p - 1] is the neighbor reached through
// port p of v; in_ports[v][p - 1] is the neighbor heard on port p.
// For undirected topologies the two tables are identical.
struct PortNumbering {
  std::vector<std::vector<int>> out_ports;
  std::vector<std::vector<int>> in_ports;

  bool operator==(const PortNumbering&) const = default;
};

enum class TopologyKind {
  ring,
  complete,
  random_regular,
  directed_cycle,
  random_strong_digraph,
  from_edge_list,
};

struct TopologyParams {
  int n = 0;
  int degree = 0;          // random_regular
  int arcs = 0;            // random_strong_digraph
  std::string edge_list;   // from_edge_list, file contents
};

TopologyKind parse_topology_kind(std::string_view name);
std::string to_string(TopologyKind kind);

// Pure function of (kind, params, seed). Throws ParameterError.
Topology generate(TopologyKind kind, const TopologyParams& params, std::uint64_t seed);

// Empty result means valid.
std::vector<std::string> validate(const Topology& topology);

PortNumbering assign_ports(const Topology& topology, std::uint64_t seed);

std::vector<std::string> validate_ports(const Topology& topology, const PortNumbering& ports);

struct EdgeListFile {
  Topology topology;
  std::optional<PortNumbering> ports;  // present when every line carries ports
};

// Format: first line "n directed", then "u v [pu pv]" per link. '#' starts a
// comment. For directed links pu is the out-port at u and pv the in-port at v.
EdgeListFile parse_edge_list(std::string_view text);
std::string format_edge_list(const Topology& topology, const PortNumbering* ports = nullptr);

// Topology plus ports with precomputed delivery tables.
class Network {
 public:
  struct Endpoint {
    int node;
    int port;
  };

  Network(Topology topology, PortNumbering ports);

  int size() const { return topology_.n; }
  bool directed() const { return topology_.directed; }
  int edge_count() const { return topology_.edge_count(); }
  int in_degree(int v) const { return static_cast<int>(ports_.in_ports[v].size()); }
  int out_degree(int v) const { return static_cast<int>(ports_.out_ports[v].size()); }
  int max_degree() const;

  // Where a message sent by v on out-port p is received.
  Endpoint deliver(int v, int out_port) const { return deliver_[v][out_port - 1]; }
  // The neighbor heard by v on in-port p, and the out-port it used.
  Endpoint source(int v, int in_port) const { return source_[v][in_port - 1]; }

  const Topology& topology() const { return topology_; }
  const PortNumbering& ports() const { return ports_; }

  // Relabels node v as perm[v]; ports travel with their nodes.
  Network permuted(const std::vector<int>& perm) const;

 private:
  Topology topology_;
  PortNumbering ports_;
  std::vector<std::vector<Endpoint>> deliver_;
  std::vector<std::vector<Endpoint>> source_;
};

}  // namespace qle
