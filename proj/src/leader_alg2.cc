#include <memory>
#include <optional>

#include "qle/errors.h"
#include "qle/leader.h"

namespace qle {

namespace {

std::uint64_t identity(std::uint64_t x) { return x; }

void flip(PartyContext& ctx, Qubit q) {
  const Qubit target[] = {q};
  ctx.classical(std::span<const Qubit>(), target, [](std::uint64_t) { return std::uint64_t{1}; });
}

}  // namespace

Proc<SharedCats> share_cats(PartyContext& ctx, int count, std::string tag_prefix) {
  const int out = ctx.out_degree();
  const int in = ctx.in_degree();
  SharedCats cats;
  cats.r0.resize(count);
  cats.y.assign(count, std::vector<int>(in, 0));

  std::vector<std::vector<Qubit>> outgoing(out);
  for (int c = 0; c < count; ++c) {
    cats.r0[c] = ctx.alloc();
    ctx.apply(qsim::hadamard(), cats.r0[c]);
    for (int p = 0; p < out; ++p) {
      Qubit q = ctx.alloc();
      ctx.classical({cats.r0[c]}, {q}, identity);
      outgoing[p].push_back(q);
    }
  }
  for (int p = 1; p <= out; ++p) {
    Message m;
    m.qubits = outgoing[p - 1];
    ctx.send(p, std::move(m));
  }
  co_await ctx.end_round();

  for (int j = 1; j <= in; ++j) {
    const Message* m = ctx.received(j);
    if (!m || static_cast<int>(m->qubits.size()) != count)
      throw ProtocolError("share_cats: expected " + std::to_string(count) + " qubits on in-port " + std::to_string(j));
    for (int c = 0; c < count; ++c) {
      Qubit incoming = m->qubits[c];
      Qubit parity = ctx.alloc();
      ctx.classical({cats.r0[c], incoming}, {parity}, [](std::uint64_t x) { return (x ^ (x >> 1)) & 1; });
      const int y = ctx.measure(parity);
      ctx.discard(parity);
      cats.y[c][j - 1] = y;
      // CNOT leaves y in the incoming qubit; clear it before the audit.
      ctx.classical({cats.r0[c]}, {incoming}, identity);
      if (y) flip(ctx, incoming);
      ctx.free_zero(incoming);
    }
  }
  if (!tag_prefix.empty())
    for (int c = 0; c < count; ++c) ctx.tag(cats.r0[c], tag_prefix + "/" + std::to_string(c + 1));
  co_return cats;
}

Label parity_label(int bit, Status status) {
  return (static_cast<Label>(bit & 1) << 1) | (status == Status::eligible ? 1 : 0);
}

Proc<bool> classical_consistency(PartyContext& ctx, Status status, int n, std::vector<int> y) {
  if (static_cast<int>(y.size()) != ctx.in_degree()) throw UsageError("one parity bit per in-port");
  LabelTransform negate = [&y](int in_port, FView fv) {
    if (y[in_port - 1]) return fv.relabeled([](Label l) { return l ^ 2; });
    return fv;
  };
  FView fv = co_await construct_fview(ctx, n - 1, parity_label(0, status), negate);
  bool zero = false, one = false;
  for (const auto& level : fv.levels()) {
    for (const auto& node : level) {
      zero = zero || node.label == parity_label(0, Status::eligible);
      one = one || node.label == parity_label(1, Status::eligible);
    }
  }
  co_return !(zero && one);
}

Proc<void> distill_and_break(PartyContext& ctx, Qubit r0, Qubit r1, Status status, int k, int n) {
  int w = 0;
  if (status == Status::ineligible) {
    w = ctx.measure_hadamard(r0);
    ctx.discard(r0);
  }
  FView fv = co_await construct_fview(ctx, 2 * n - 1, static_cast<Label>(w));
  const std::int64_t minus = count_parties(fv, {1}, n);
  if (status == Status::eligible) {
    if (minus % 2 == 1) ctx.apply(qsim::w_gate(k), r0);
    break_symmetry(ctx, r0, r1, k);
  }
}

Proc<Minority> count_minority(PartyContext& ctx, int z, int n) {
  FView fv = co_await construct_fview(ctx, 2 * n - 1, static_cast<Label>(z + 1));
  std::array<std::int64_t, 4> counts{};
  for (int i = 0; i < 4; ++i) counts[i] = count_parties(fv, {static_cast<Label>(i + 1)}, n);
  co_return pick_minority(counts, n);
}

namespace {

// The phases of one election with party count m. Budget exhaustion is
// reported as an error outcome; other failures throw.
Proc<ElectionOutcome> counting_phases(PartyContext& ctx, Status status, int m) {
  if (m < 2) throw ParameterError("party count must be at least 2");
  const int s = ceil_log2(m);
  SharedCats cats = co_await share_cats(ctx, s, "cat/" + std::to_string(m));
  std::int64_t k = m;
  for (int i = 0; i < s; ++i) {
    const bool eligible = status == Status::eligible;
    const bool consistent = co_await classical_consistency(ctx, status, m, cats.y[i]);
    Qubit r0 = cats.r0[i];
    Qubit r1 = ctx.alloc();
    if (consistent) {
      if (k < 2) throw InconsistencyError("phase started with k < 2");
      co_await distill_and_break(ctx, r0, r1, status, static_cast<int>(k), m);
    }
    int z = -1;
    if (eligible) {
      const int high = ctx.measure(r0);
      z = 2 * high + ctx.measure(r1);
      ctx.discard(r0);
      ctx.discard(r1);
    } else {
      ctx.free_zero(r1);
    }
    const Minority minor = co_await count_minority(ctx, z, m);
    if (z != minor.z) status = Status::ineligible;
    ctx.record({{"alg", "alg2"},
                {"m", m},
                {"phase", i + 1},
                {"k", k},
                {"eligible", eligible},
                {"consistent", consistent},
                {"z", z},
                {"z_minor", minor.z},
                {"c", minor.count}});
    k = minor.count;
    if (k == 1) co_return ElectionOutcome{false, status, i + 1, {}};
  }
  co_return ElectionOutcome{true, status, s, "phase budget exhausted"};
}

}  // namespace

Proc<Status> elect_by_counting(PartyContext& ctx, Status status, int n) {
  ElectionOutcome out = co_await counting_phases(ctx, status, n);
  if (out.error) throw ProtocolError("election with the exact party count failed: " + out.reason);
  co_return out.status;
}

Proc<ElectionOutcome> elect_or_error(PartyContext& ctx, Status status, int m) {
  ElectionOutcome out;
  try {
    out = co_await counting_phases(ctx, status, m);
  } catch (const Error& e) {
    out = ElectionOutcome{true, Status::ineligible, 0, e.what()};
  }
  ctx.record({{"alg", "guess"},
              {"m", m},
              {"outcome", out.error ? "error" : to_string(out.status)},
              {"phases", out.phases},
              {"reason", out.reason}});
  co_return out;
}

namespace {

// Per-instance message surface; the parent packs all instances' messages
// for a port into one framed message each round.
class InstanceMailbox : public Mailbox {
 public:
  InstanceMailbox(int in_degree, int out_degree) : inbox(in_degree), outbox(out_degree) {}

  void post(int out_port, Message msg) override {
    auto& slot = outbox[out_port - 1];
    if (slot) throw UsageError("two messages on one port in one round");
    slot = std::move(msg);
  }
  const Message* received(int in_port) const override {
    const auto& m = inbox[in_port - 1];
    return m ? &*m : nullptr;
  }

  std::vector<std::optional<Message>> inbox;
  std::vector<std::optional<Message>> outbox;
};

struct Instance {
  Instance(PartyContext& parent, int m_, int in_degree, int out_degree)
      : m(m_), box(in_degree, out_degree), ctx(parent.with_mailbox(&box, &slot)) {}

  int m;
  InstanceMailbox box;
  ResumeSlot slot;
  PartyContext ctx;
  Proc<ElectionOutcome> proc;
  std::optional<ElectionOutcome> result;
};

Proc<GeneralizedOutcome> run_parallel(PartyContext& ctx, Status status, int bound) {
  const int in = ctx.in_degree();
  const int out = ctx.out_degree();
  std::vector<std::unique_ptr<Instance>> instances;
  for (int m = 2; m <= bound; ++m) {
    auto inst = std::make_unique<Instance>(ctx, m, in, out);
    inst->proc = elect_or_error(inst->ctx, status, m);
    inst->slot.handle = inst->proc.handle();
    instances.push_back(std::move(inst));
  }

  for (;;) {
    bool active = false;
    for (auto& inst : instances) {
      if (inst->result) continue;
      inst->slot.handle.resume();
      if (inst->proc.done()) {
        inst->result = inst->proc.take();
      } else {
        active = true;
      }
    }
    for (int p = 1; p <= out; ++p) {
      Message bundle;
      bool any = false;
      for (auto& inst : instances) {
        auto& slot = inst->box.outbox[p - 1];
        if (!slot) continue;
        any = true;
        bundle.bits.push_varint(static_cast<std::uint64_t>(inst->m));
        bundle.bits.push_varint(slot->bits.size());
        bundle.bits.append(slot->bits);
        bundle.bits.push_varint(slot->qubits.size());
        bundle.qubits.insert(bundle.qubits.end(), slot->qubits.begin(), slot->qubits.end());
        bundle.sections.emplace_back("m=" + std::to_string(inst->m), slot->bits.size());
        slot.reset();
      }
      if (any) ctx.send(p, std::move(bundle));
    }
    for (auto& inst : instances)
      for (auto& m : inst->box.inbox) m.reset();
    if (!active) break;

    co_await ctx.end_round();

    for (int j = 1; j <= in; ++j) {
      const Message* msg = ctx.received(j);
      if (!msg) continue;
      BitReader reader(msg->bits);
      std::size_t next_qubit = 0;
      while (!reader.done()) {
        const auto m = static_cast<int>(reader.read_varint());
        const std::size_t bits = reader.read_varint();
        Message part;
        part.bits = reader.read_bits(bits);
        const std::size_t qubits = reader.read_varint();
        if (next_qubit + qubits > msg->qubits.size()) throw DecodeError("bundle qubit count mismatch");
        part.qubits.assign(msg->qubits.begin() + static_cast<std::ptrdiff_t>(next_qubit),
                           msg->qubits.begin() + static_cast<std::ptrdiff_t>(next_qubit + qubits));
        next_qubit += qubits;
        if (m < 2 || m > bound) throw DecodeError("bundle names an unknown instance");
        Instance& inst = *instances[m - 2];
        if (!inst.result) inst.box.inbox[j - 1] = std::move(part);
      }
      if (next_qubit != msg->qubits.size()) throw DecodeError("bundle qubit count mismatch");
    }
  }

  for (auto it = instances.rbegin(); it != instances.rend(); ++it) {
    const ElectionOutcome& r = *(*it)->result;
    if (!r.error) co_return GeneralizedOutcome{r.status, (*it)->m};
  }
  throw ProtocolError("every guessed party count reported an error");
}

Proc<GeneralizedOutcome> run_descending(PartyContext& ctx, Status status, int bound) {
  for (int m = bound; m >= 2; --m) {
    ElectionOutcome out = co_await elect_or_error(ctx, status, m);
    if (!out.error) co_return GeneralizedOutcome{out.status, m};
  }
  throw ProtocolError("every guessed party count reported an error");
}

}  // namespace

Proc<GeneralizedOutcome> elect_with_upper_bound(PartyContext& ctx, Status status, int N, GuessMode mode) {
  if (N < 2) throw ParameterError("upper bound must be at least 2");
  if (mode == GuessMode::parallel) co_return co_await run_parallel(ctx, status, N);
  co_return co_await run_descending(ctx, status, N);
}

}  // namespace qle
