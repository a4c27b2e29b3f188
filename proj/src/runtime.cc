#include "qle/runtime.h"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>

#include "qle/errors.h"

namespace qle {

namespace {

constexpr int kInFlight = -2;

class PortMailbox : public Mailbox {
 public:
  PortMailbox(Engine* engine, int party, int in_degree, int out_degree)
      : engine_(engine), party_(party), inbox(in_degree), outbox(out_degree) {}

  void post(int out_port, Message msg) override;
  const Message* received(int in_port) const override {
    const auto& m = inbox[in_port - 1];
    return m ? &*m : nullptr;
  }

  Engine* engine_;
  int party_;
  std::vector<std::optional<Message>> inbox;
  std::vector<std::optional<Message>> outbox;
};

}  // namespace

class Engine {
 public:
  Engine(const Network& net, const RunOptions& opts) : net_(net), opts_(opts) {
    const int n = net.size();
    streams_ = opts.streams;
    if (streams_.empty()) {
      streams_.resize(n);
      std::iota(streams_.begin(), streams_.end(), 0);
    }
    if (static_cast<int>(streams_.size()) != n) throw UsageError("one RNG stream per party");
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](int a, int b) { return streams_[a] < streams_[b]; });
    for (int v = 0; v < n; ++v) {
      rngs_.emplace_back(stream_seed(opts.seed, static_cast<std::uint64_t>(streams_[v])));
      mailboxes_.push_back(
          std::make_unique<PortMailbox>(this, v, net.in_degree(v), net.out_degree(v)));
    }
    slots_.resize(n);
  }

  RunStats run(const Program& program);

  const Network& net_;
  const RunOptions& opts_;
  qsim::SparseState state_;
  std::vector<int> streams_;
  std::vector<int> order_;
  std::vector<Rng> rngs_;
  std::vector<std::unique_ptr<PortMailbox>> mailboxes_;
  std::vector<ResumeSlot> slots_;
  std::set<qsim::QubitId> in_flight_;
  std::map<std::pair<int, std::string>, qsim::QubitId> tags_;
  std::vector<nlohmann::json> events_;
  int step_ = 0;

  qsim::QubitId check_held(int party, Qubit q) const {
    if (!q.valid() || !state_.live(q.id_)) throw UsageError("qubit handle is not live");
    if (state_.owner(q.id_) != party || in_flight_.count(q.id_))
      throw UsageError("qubit is not held by this party");
    return q.id_;
  }
  static Qubit wrap(qsim::QubitId id) { return Qubit(id); }
  static qsim::QubitId raw(Qubit q) { return q.id_; }
};

namespace {

void PortMailbox::post(int out_port, Message msg) {
  for (Qubit q : msg.qubits) engine_->in_flight_.insert(Engine::raw(q));
  auto& slot = outbox[out_port - 1];
  if (slot) throw UsageError("two messages on one port in one round");
  slot = std::move(msg);
}

}  // namespace

int PartyContext::in_degree() const { return engine_->net_.in_degree(party_); }
int PartyContext::out_degree() const { return engine_->net_.out_degree(party_); }
bool PartyContext::directed() const { return engine_->net_.directed(); }

void PartyContext::send(int out_port, Message msg) {
  if (out_port < 1 || out_port > out_degree()) throw UsageError("send on a nonexistent port");
  for (Qubit q : msg.qubits) engine_->check_held(party_, q);
  mailbox_->post(out_port, std::move(msg));
}

const Message* PartyContext::received(int in_port) const {
  if (in_port < 1 || in_port > in_degree()) throw UsageError("read from a nonexistent port");
  return mailbox_->received(in_port);
}

qsim::QubitId PartyContext::held(Qubit q) const { return engine_->check_held(party_, q); }

Qubit PartyContext::alloc() { return Engine::wrap(engine_->state_.alloc(party_)); }

std::vector<Qubit> PartyContext::alloc(int count) {
  std::vector<Qubit> out;
  for (auto id : engine_->state_.alloc(party_, count)) out.push_back(Engine::wrap(id));
  return out;
}

void PartyContext::apply(const qsim::GateMatrix& gate, Qubit q) {
  engine_->state_.apply_1q(gate, held(q));
}

void PartyContext::apply(const qsim::GateMatrix& gate, Qubit high, Qubit low) {
  engine_->state_.apply_2q(gate, held(high), held(low));
}

void PartyContext::classical(std::span<const Qubit> inputs, std::span<const Qubit> targets,
                             const qsim::ClassicalFn& f) {
  std::vector<qsim::QubitId> in, out;
  for (Qubit q : inputs) in.push_back(held(q));
  for (Qubit q : targets) out.push_back(held(q));
  engine_->state_.apply_classical(in, out, f);
}

int PartyContext::measure(Qubit q) { return engine_->state_.measure(held(q), engine_->rngs_[party_]); }

int PartyContext::measure_hadamard(Qubit q) {
  return engine_->state_.measure_hadamard(held(q), engine_->rngs_[party_]);
}

void PartyContext::free_zero(std::span<const Qubit> qs) {
  std::vector<qsim::QubitId> ids;
  for (Qubit q : qs) ids.push_back(held(q));
  engine_->state_.assert_zero_and_free(ids);
}

void PartyContext::discard(Qubit q) { engine_->state_.discard_definite(held(q)); }

void PartyContext::record(nlohmann::json event) {
  event["party"] = party_;
  event["step"] = engine_->step_;
  engine_->events_.push_back(std::move(event));
}

void PartyContext::tag(Qubit q, const std::string& name) { engine_->tags_[{party_, name}] = held(q); }

PartyContext PartyContext::with_mailbox(Mailbox* mailbox, ResumeSlot* slot) const {
  return PartyContext(engine_, party_, mailbox, slot);
}

RunStats Engine::run(const Program& program) {
  const int n = net_.size();
  std::vector<PartyContext> contexts;
  contexts.reserve(n);
  for (int v = 0; v < n; ++v) contexts.push_back(PartyContext(this, v, mailboxes_[v].get(), &slots_[v]));
  std::vector<Proc<PartyOutput>> procs;
  for (int v = 0; v < n; ++v) {
    procs.push_back(program(contexts[v]));
    slots_[v].handle = procs[v].handle();
  }
  std::vector<bool> halted(n, false);
  const int cap = opts_.round_cap > 0 ? opts_.round_cap : default_round_cap(n);

  RunStats stats;
  stats.outputs.resize(n);
  for (;;) {
    ++step_;
    bool waiting = false;
    for (int v : order_) {
      if (halted[v]) continue;
      slots_[v].handle.resume();
      if (procs[v].done()) {
        stats.outputs[v] = procs[v].take();
        halted[v] = true;
      } else {
        waiting = true;
      }
    }
    if (opts_.observer) opts_.observer(RoundView{step_, state_, tags_});

    bool pending = false;
    for (int v = 0; v < n; ++v)
      for (auto& m : mailboxes_[v]->outbox) pending = pending || m.has_value();
    if (!waiting && !pending) break;

    ++stats.rounds;
    if (stats.rounds > cap) throw DivergenceError("round cap " + std::to_string(cap) + " exceeded");
    RoundCounters rc;
    rc.round = stats.rounds;
    for (int v = 0; v < n; ++v) {
      for (auto& m : mailboxes_[v]->inbox) m.reset();
    }
    for (int v : order_) {
      auto& box = mailboxes_[v]->outbox;
      for (int p = 1; p <= static_cast<int>(box.size()); ++p) {
        if (!box[p - 1]) continue;
        Message msg = std::move(*box[p - 1]);
        box[p - 1].reset();
        auto dst = net_.deliver(v, p);
        for (Qubit q : msg.qubits) {
          state_.transfer(raw(q), dst.node);
          in_flight_.erase(raw(q));
        }
        if (halted[dst.node]) continue;
        rc.qubits += msg.qubits.size();
        rc.bits += msg.bits.size();
        if (!msg.sections.empty()) {
          std::uint64_t covered = 0;
          for (auto& [tag, bits] : msg.sections) {
            stats.bits_by_tag[tag] += bits;
            covered += bits;
          }
          stats.bits_by_tag["frame"] += msg.bits.size() - covered;
        }
        mailboxes_[dst.node]->inbox[dst.port - 1] = std::move(msg);
      }
    }
    stats.qubits_moved += rc.qubits;
    stats.classical_bits += rc.bits;
    stats.per_round.push_back(rc);
  }
  stats.events = std::move(events_);
  stats.qubits_allocated = state_.allocated_total();
  stats.qubits_retired = state_.retired_total();
  stats.qubits_live = state_.live_qubits().size();
  stats.zero_audits = state_.zero_audits();
  stats.norm_checks = state_.norm_checks();
  stats.max_norm_deviation = state_.max_norm_deviation();
  return stats;
}

int default_round_cap(int n) { return 10 * n * n; }

RunStats run(const Network& network, const Program& program, const RunOptions& options) {
  Engine engine(network, options);
  return engine.run(program);
}

int RunStats::count_status(const std::string& status) const {
  return static_cast<int>(
      std::count_if(outputs.begin(), outputs.end(), [&](const PartyOutput& o) { return o.status == status; }));
}

nlohmann::json RunStats::to_json() const {
  nlohmann::json j;
  j["rounds"] = rounds;
  j["qubits_moved"] = qubits_moved;
  j["classical_bits"] = classical_bits;
  auto& pr = j["per_round"] = nlohmann::json::array();
  for (const auto& r : per_round) pr.push_back({{"round", r.round}, {"qubits", r.qubits}, {"bits", r.bits}});
  auto& out = j["outputs"] = nlohmann::json::array();
  for (const auto& o : outputs) out.push_back({{"status", o.status}, {"value", o.value}});
  if (!bits_by_tag.empty()) j["bits_by_tag"] = bits_by_tag;
  j["qubits_allocated"] = qubits_allocated;
  j["qubits_retired"] = qubits_retired;
  j["qubits_live"] = qubits_live;
  j["zero_audits"] = zero_audits;
  j["max_norm_deviation"] = max_norm_deviation;
  return j;
}

}  // namespace qle
