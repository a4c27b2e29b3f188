#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "qle/fview.h"
#include "qle/proc.h"
#include "qle/runtime.h"

namespace qle {

enum class Status { eligible, ineligible };

std::string to_string(Status s);

// Two-bit alphabet used by the consistency check.
inline constexpr std::uint64_t kSymZero = 0b00;
inline constexpr std::uint64_t kSymOne = 0b01;
inline constexpr std::uint64_t kSymStar = 0b10;
inline constexpr std::uint64_t kSymCross = 0b11;

// Commutative, associative combine: cross absorbs, star is the identity.
std::uint64_t combine_symbols(std::uint64_t a, std::uint64_t b);

int ceil_log2(int n);

// ---- Algorithm I ----------------------------------------------------------

// Flips s when the eligible parties' r0 contents disagree; every ancilla is
// uncomputed and audited. Takes 2(n - 1) rounds.
Proc<void> consistency_check(PartyContext& ctx, Qubit r0, Qubit s, Status status, int n);
// U_k on r0 for even k; copy r0 into r1 then V_k on (r0, r1) for odd k.
void break_symmetry(PartyContext& ctx, Qubit r0, Qubit r1, int k);
// Flooding maximum over n - 1 rounds. z in -1..3.
Proc<int> flood_max(PartyContext& ctx, int z, int n);
// n may be any upper bound on the party count.
Proc<Status> elect_by_consistency(PartyContext& ctx, Status status, int n);

// ---- Algorithm II ---------------------------------------------------------

struct SharedCats {
  std::vector<Qubit> r0;            // one per instance
  std::vector<std::vector<int>> y;  // y[i][j - 1]: parity with the neighbor on in-port j
};

// `count` cat-like states over all parties, built in one quantum round.
// Works on undirected and directed networks alike.
Proc<SharedCats> share_cats(PartyContext& ctx, int count, std::string tag_prefix = {});

// Relative-parity f-view labels: (bit << 1) | eligible.
Label parity_label(int bit, Status status);
// True when the eligible parties' bits agree. Takes n - 1 rounds.
Proc<bool> classical_consistency(PartyContext& ctx, Status status, int n, std::vector<int> y);
// Hadamard-basis distillation onto the eligible parties, then
// break_symmetry. Takes 2n - 1 rounds.
Proc<void> distill_and_break(PartyContext& ctx, Qubit r0, Qubit r1, Status status, int k, int n);

struct Minority {
  int z = 0;
  std::int64_t count = 0;
  bool operator==(const Minority&) const = default;
};
// counts[i] is the number of parties with z = i; zeros are read as n.
Minority pick_minority(const std::array<std::int64_t, 4>& counts, int n);
// Takes 2n - 1 rounds.
Proc<Minority> count_minority(PartyContext& ctx, int z, int n);

struct ElectionOutcome {
  bool error = false;
  Status status = Status::ineligible;
  int phases = 0;
  std::string reason;
};

// Exact party count. Throws ProtocolError if the phase budget runs out.
Proc<Status> elect_by_counting(PartyContext& ctx, Status status, int n);
// Guessed party count m: reports error instead of electing when the guess
// is inconsistent with the network.
Proc<ElectionOutcome> elect_or_error(PartyContext& ctx, Status status, int m);

enum class GuessMode { parallel, descending };

struct GeneralizedOutcome {
  Status status = Status::ineligible;
  int winner = 0;  // largest guess that did not error
};

// Upper bound N on the party count.
Proc<GeneralizedOutcome> elect_with_upper_bound(PartyContext& ctx, Status status, int N,
                                                GuessMode mode = GuessMode::parallel);

// ---- Programs and audits ----------------------------------------------------

PartyOutput to_output(Status s, std::int64_t value = 0);

Program alg1_program(int n_or_bound);
Program alg2_program(int n);
Program guess_program(int m);
Program generalized_program(int bound, GuessMode mode);

struct PhaseSummary {
  int m = 0;  // instance (party count used), 0 for Algorithm I
  int phase = 0;
  std::int64_t k = 0;
  int eligible = 0;
  int eligible_after = 0;
  nlohmann::json detail;
};

struct AuditReport {
  std::vector<std::string> violations;
  std::vector<PhaseSummary> phases;
  int phases_used = 0;
  nlohmann::json to_json() const;
  std::vector<nlohmann::json> trace_lines() const;
};

AuditReport audit_alg1(const RunStats& stats, int n);
// exact_m: the instance whose k is tracked against the true count.
AuditReport audit_alg2(const RunStats& stats, int n, int exact_m);
// Guessed instances above n must error at every party; the winner must be n.
void audit_generalized(const RunStats& stats, int n, int bound, AuditReport& report);

// Checks every shared cat right after it is built: exactly two
// complementary configurations of magnitude 1/sqrt(2).
class CatAudit {
 public:
  explicit CatAudit(int n) : n_(n) {}
  void operator()(const RoundView& view);
  const std::vector<std::string>& violations() const { return violations_; }
  int checked() const { return checked_; }

 private:
  int n_;
  int checked_ = 0;
  std::set<std::string> done_;
  std::vector<std::string> violations_;
};

}  // namespace qle
