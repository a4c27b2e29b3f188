#include "qle/errors.h"
#include "qle/leader.h"

namespace qle {

namespace {

// Two-qubit symbol register; lo is bit 0.
struct SymbolReg {
  Qubit lo, hi;
};

SymbolReg alloc_symbol(PartyContext& ctx) {
  auto q = ctx.alloc(2);
  return {q[0], q[1]};
}

std::uint64_t identity(std::uint64_t x) { return x; }

void flip(PartyContext& ctx, Qubit q) {
  const Qubit target[] = {q};
  ctx.classical(std::span<const Qubit>(), target, [](std::uint64_t) { return std::uint64_t{1}; });
}

// target ^= source
void copy_symbol(PartyContext& ctx, const SymbolReg& source, const SymbolReg& target) {
  ctx.classical({source.lo, source.hi}, {target.lo, target.hi}, identity);
}

// target ^= fold of all sources
void fold_into(PartyContext& ctx, const SymbolReg& own, const std::vector<SymbolReg>& received,
               const SymbolReg& target) {
  std::vector<Qubit> inputs{own.lo, own.hi};
  for (const auto& r : received) {
    inputs.push_back(r.lo);
    inputs.push_back(r.hi);
  }
  const std::size_t count = received.size() + 1;
  const Qubit targets[] = {target.lo, target.hi};
  ctx.classical(inputs, targets, [count](std::uint64_t x) {
    std::uint64_t acc = x & 3;
    for (std::size_t i = 1; i < count; ++i) acc = combine_symbols(acc, (x >> (2 * i)) & 3);
    return acc;
  });
}

void free_symbol(PartyContext& ctx, const SymbolReg& r) {
  const Qubit qs[] = {r.lo, r.hi};
  ctx.free_zero(qs);
}

Message symbol_message(const SymbolReg& r) {
  Message m;
  m.qubits = {r.lo, r.hi};
  return m;
}

SymbolReg take_symbol(PartyContext& ctx, int port) {
  const Message* m = ctx.received(port);
  if (!m || m->qubits.size() != 2) throw ProtocolError("expected a symbol register on port " + std::to_string(port));
  return {m->qubits[0], m->qubits[1]};
}

}  // namespace

Proc<void> consistency_check(PartyContext& ctx, Qubit r0, Qubit s, Status status, int n) {
  if (ctx.directed()) throw UsageError("the consistency check needs an undirected network");
  const int d = ctx.out_degree();
  if (2 * (d + 1) > 64) throw UsageError("degree too large for the symbol fold");

  std::vector<SymbolReg> own(n + 1);  // own[t] for t = 1..n
  std::vector<std::vector<SymbolReg>> exchanged(n);

  own[1] = alloc_symbol(ctx);
  if (status == Status::eligible) {
    ctx.classical({r0}, {own[1].lo}, identity);
  } else {
    flip(ctx, own[1].hi);
  }

  for (int t = 1; t <= n - 1; ++t) {
    exchanged[t].resize(d);
    for (int i = 1; i <= d; ++i) {
      exchanged[t][i - 1] = alloc_symbol(ctx);
      copy_symbol(ctx, own[t], exchanged[t][i - 1]);
      ctx.send(i, symbol_message(exchanged[t][i - 1]));
    }
    co_await ctx.end_round();
    for (int i = 1; i <= d; ++i) exchanged[t][i - 1] = take_symbol(ctx, i);
    own[t + 1] = alloc_symbol(ctx);
    fold_into(ctx, own[t], exchanged[t], own[t + 1]);
  }

  ctx.classical({own[n].lo, own[n].hi}, {s}, [](std::uint64_t x) { return x == kSymCross ? 1 : 0; });

  for (int t = n - 1; t >= 1; --t) {
    fold_into(ctx, own[t], exchanged[t], own[t + 1]);
    free_symbol(ctx, own[t + 1]);
    for (int i = 1; i <= d; ++i) ctx.send(i, symbol_message(exchanged[t][i - 1]));
    co_await ctx.end_round();
    for (int i = 1; i <= d; ++i) {
      SymbolReg back = take_symbol(ctx, i);
      copy_symbol(ctx, own[t], back);
      free_symbol(ctx, back);
    }
  }

  if (status == Status::eligible) {
    ctx.classical({r0}, {own[1].lo}, identity);
  } else {
    flip(ctx, own[1].hi);
  }
  free_symbol(ctx, own[1]);
}

void break_symmetry(PartyContext& ctx, Qubit r0, Qubit r1, int k) {
  if (k % 2 == 0) {
    ctx.apply(qsim::u_gate(k), r0);
  } else {
    ctx.classical({r0}, {r1}, identity);
    ctx.apply(qsim::v_gate(k), r0, r1);
  }
}

Proc<int> flood_max(PartyContext& ctx, int z, int n) {
  int best = z;
  for (int t = 1; t <= n - 1; ++t) {
    for (int p = 1; p <= ctx.out_degree(); ++p) {
      Message m;
      m.bits.push(static_cast<std::uint64_t>(best + 1), 3);
      ctx.send(p, std::move(m));
    }
    co_await ctx.end_round();
    for (int p = 1; p <= ctx.in_degree(); ++p) {
      const Message* m = ctx.received(p);
      if (!m) throw ProtocolError("flood_max: no message on port " + std::to_string(p));
      BitReader in(m->bits);
      best = std::max(best, static_cast<int>(in.read(3)) - 1);
    }
  }
  co_return best;
}

Proc<Status> elect_by_consistency(PartyContext& ctx, Status status, int n) {
  if (n < 2) throw ParameterError("party count must be at least 2");
  int phase = 0;
  for (int k = n; k >= 2; --k) {
    ++phase;
    const bool eligible = status == Status::eligible;
    Qubit r0 = ctx.alloc();
    if (eligible) ctx.apply(qsim::hadamard(), r0);
    Qubit s = ctx.alloc();
    co_await consistency_check(ctx, r0, s, status, n);
    const int verdict = ctx.measure(s);
    ctx.discard(s);

    Qubit r1 = ctx.alloc();
    if (verdict == 0 && eligible) break_symmetry(ctx, r0, r1, k);
    int z = -1;
    if (eligible) {
      const int high = ctx.measure(r0);
      z = 2 * high + ctx.measure(r1);
      ctx.discard(r0);
      ctx.discard(r1);
    } else {
      ctx.free_zero(r0);
      ctx.free_zero(r1);
    }
    const int z_max = co_await flood_max(ctx, z, n);
    if (z != z_max) status = Status::ineligible;
    ctx.record({{"alg", "alg1"},
                {"phase", phase},
                {"k", k},
                {"eligible", eligible},
                {"inconsistent", verdict},
                {"z", z},
                {"z_max", z_max}});
  }
  co_return status;
}

}  // namespace qle
