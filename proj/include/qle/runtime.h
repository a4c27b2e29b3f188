#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "qle/bits.h"
#include "qle/proc.h"
#include "qle/qsim.h"
#include "qle/topology.h"

namespace qle {

class Engine;

// Opaque handle to a qubit the party holds. The id is not readable by
// protocol code.
class Qubit {
 public:
  Qubit() = default;
  bool operator==(const Qubit&) const = default;
  bool valid() const { return id_ != kInvalid; }

 private:
  static constexpr qsim::QubitId kInvalid = ~qsim::QubitId{0};
  explicit Qubit(qsim::QubitId id) : id_(id) {}
  qsim::QubitId id_ = kInvalid;

  friend class PartyContext;
  friend class Engine;
};

struct Message {
  BitString bits;
  std::vector<Qubit> qubits;
  // Optional attribution of bits to named sub-streams; the remainder of the
  // payload is counted under "frame".
  std::vector<std::pair<std::string, std::uint64_t>> sections;
};

struct PartyOutput {
  std::string status;
  std::int64_t value = 0;

  bool operator==(const PartyOutput&) const = default;
};

// Port-addressed message surface seen by one protocol instance.
class Mailbox {
 public:
  virtual ~Mailbox() = default;
  virtual void post(int out_port, Message msg) = 0;
  virtual const Message* received(int in_port) const = 0;
};

// A party's sandboxed handle. Exposes local degrees, port-addressed
// messaging, operations on qubits the party holds, and a trace sink.
class PartyContext {
 public:
  int in_degree() const;
  int out_degree() const;
  bool directed() const;
  // d for undirected networks, d^I + d^O for directed ones.
  int degree() const { return directed() ? in_degree() + out_degree() : out_degree(); }

  void send(int out_port, Message msg);
  // Message that arrived on in_port at the last round boundary, or null.
  const Message* received(int in_port) const;
  RoundAwaiter end_round() const { return RoundAwaiter{slot_}; }

  Qubit alloc();
  std::vector<Qubit> alloc(int count);
  void apply(const qsim::GateMatrix& gate, Qubit q);
  void apply(const qsim::GateMatrix& gate, Qubit high, Qubit low);
  void classical(std::span<const Qubit> inputs, std::span<const Qubit> targets,
                 const qsim::ClassicalFn& f);
  void classical(std::initializer_list<Qubit> inputs, std::initializer_list<Qubit> targets,
                 const qsim::ClassicalFn& f) {
    classical(std::span<const Qubit>(inputs.begin(), inputs.size()),
              std::span<const Qubit>(targets.begin(), targets.size()), f);
  }
  int measure(Qubit q);
  int measure_hadamard(Qubit q);
  void free_zero(std::span<const Qubit> qs);
  void free_zero(Qubit q) { free_zero(std::span<const Qubit>(&q, 1)); }
  void discard(Qubit q);

  // Simulator-side trace; the engine stamps party and round.
  void record(nlohmann::json event);
  // Names a qubit for round observers.
  void tag(Qubit q, const std::string& name);

  // Same party, separate message surface and resume slot. Used to run
  // several protocol instances side by side.
  PartyContext with_mailbox(Mailbox* mailbox, ResumeSlot* slot) const;

 private:
  PartyContext(Engine* engine, int party, Mailbox* mailbox, ResumeSlot* slot)
      : engine_(engine), party_(party), mailbox_(mailbox), slot_(slot) {}
  qsim::QubitId held(Qubit q) const;

  Engine* engine_;
  int party_;
  Mailbox* mailbox_;
  ResumeSlot* slot_;

  friend class Engine;
};

using Program = std::function<Proc<PartyOutput>(PartyContext&)>;

struct RoundView {
  int step;  // 1-based index of the step just completed
  const qsim::SparseState& state;
  // (party, name) -> qubit
  const std::map<std::pair<int, std::string>, qsim::QubitId>& tags;
};

struct RunOptions {
  std::uint64_t seed = 0;
  int round_cap = 0;  // 0 means 10 * n^2
  // stream_of_party[v] is the RNG stream index of party v; it also fixes
  // the stepping order. Empty means identity.
  std::vector<int> streams;
  std::function<void(const RoundView&)> observer;
};

struct RoundCounters {
  int round = 0;
  std::uint64_t qubits = 0;
  std::uint64_t bits = 0;
};

struct RunStats {
  int rounds = 0;
  std::uint64_t qubits_moved = 0;
  std::uint64_t classical_bits = 0;
  std::vector<RoundCounters> per_round;
  std::vector<PartyOutput> outputs;
  std::map<std::string, std::uint64_t> bits_by_tag;
  std::vector<nlohmann::json> events;

  std::uint64_t qubits_allocated = 0;
  std::uint64_t qubits_retired = 0;
  std::uint64_t qubits_live = 0;
  std::uint64_t zero_audits = 0;
  std::uint64_t norm_checks = 0;
  double max_norm_deviation = 0.0;

  int count_status(const std::string& status) const;
  nlohmann::json to_json() const;
};

int default_round_cap(int n);

// Runs `program` at every party until all halt.
// Throws DivergenceError past the round cap; protocol exceptions propagate.
RunStats run(const Network& network, const Program& program, const RunOptions& options = {});

}  // namespace qle
