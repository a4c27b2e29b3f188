#include "qle/errors.h"
#include "qle/leader.h"

namespace qle {

std::string to_string(Status s) { return s == Status::eligible ? "eligible" : "ineligible"; }

std::uint64_t combine_symbols(std::uint64_t a, std::uint64_t b) {
  if (a == kSymCross || b == kSymCross) return kSymCross;
  if (a == kSymStar) return b;
  if (b == kSymStar) return a;
  return a == b ? a : kSymCross;
}

int ceil_log2(int n) {
  if (n < 1) throw ParameterError("ceil_log2 of a nonpositive value");
  int s = 0;
  while ((1 << s) < n) ++s;
  return s;
}

Minority pick_minority(const std::array<std::int64_t, 4>& counts, int n) {
  Minority best{0, counts[0] == 0 ? n : counts[0]};
  for (int i = 1; i < 4; ++i) {
    const std::int64_t c = counts[i] == 0 ? n : counts[i];
    if (c < best.count) best = {i, c};
  }
  return best;
}

PartyOutput to_output(Status s, std::int64_t value) { return PartyOutput{to_string(s), value}; }

namespace {

Proc<PartyOutput> alg1_main(PartyContext& ctx, int n) {
  Status s = co_await elect_by_consistency(ctx, Status::eligible, n);
  co_return to_output(s);
}

Proc<PartyOutput> alg2_main(PartyContext& ctx, int n) {
  Status s = co_await elect_by_counting(ctx, Status::eligible, n);
  co_return to_output(s);
}

Proc<PartyOutput> guess_main(PartyContext& ctx, int m) {
  ElectionOutcome out = co_await elect_or_error(ctx, Status::eligible, m);
  if (out.error) co_return PartyOutput{"error", out.phases};
  co_return to_output(out.status, out.phases);
}

Proc<PartyOutput> generalized_main(PartyContext& ctx, int bound, GuessMode mode) {
  GeneralizedOutcome out = co_await elect_with_upper_bound(ctx, Status::eligible, bound, mode);
  co_return to_output(out.status, out.winner);
}

}  // namespace

Program alg1_program(int n_or_bound) {
  return [n_or_bound](PartyContext& ctx) { return alg1_main(ctx, n_or_bound); };
}

Program alg2_program(int n) {
  return [n](PartyContext& ctx) { return alg2_main(ctx, n); };
}

Program guess_program(int m) {
  return [m](PartyContext& ctx) { return guess_main(ctx, m); };
}

Program generalized_program(int bound, GuessMode mode) {
  return [bound, mode](PartyContext& ctx) { return generalized_main(ctx, bound, mode); };
}

}  // namespace qle
