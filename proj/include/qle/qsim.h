#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "qle/rng.h"

namespace qle::qsim {

using Amp = std::complex<double>;
using QubitId = std::uint32_t;

inline constexpr double kPruneThreshold = 1e-12;
inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kUnitarityTolerance = 1e-12;

// Row-major, basis |0>,|1> or |00>,|01>,|10>,|11> (first qubit high).
struct GateMatrix {
  int dim = 2;
  std::array<Amp, 16> m{};

  Amp operator()(int r, int c) const { return m[r * dim + c]; }
  Amp& operator()(int r, int c) { return m[r * dim + c]; }

  // max |M^dagger M - I| entrywise.
  double unitarity_error() const;
  bool is_unitary(double tol = kUnitarityTolerance) const { return unitarity_error() < tol; }
};

enum class GateKind { hadamard, u_k, u_k_general, v_k, w_k };

// Throws ParameterError on parity or range violations.
GateMatrix build_gate(GateKind kind, int k = 0, double psi = 0.0, int t = 0);

GateMatrix hadamard();
GateMatrix u_gate(int k);
GateMatrix u_gate_general(int k, double psi, int t);
GateMatrix v_gate(int k);
GateMatrix w_gate(int k);

// Packed input bits in, packed target bits out. Bit j stands for the j-th
// qubit of the corresponding list.
using ClassicalFn = std::function<std::uint64_t(std::uint64_t)>;

// Global pure state kept as a product of independent sparse factors. Each
// factor maps bit configurations of its qubits to amplitudes; factors merge
// when an operation spans more than one.
class SparseState {
 public:
  static constexpr int kNoOwner = -1;

  std::vector<QubitId> alloc(int owner, int count);
  QubitId alloc(int owner) { return alloc(owner, 1).front(); }

  void apply_1q(const GateMatrix& gate, QubitId q);
  // q0 is the high bit of the 4-dim basis.
  void apply_2q(const GateMatrix& gate, QubitId q0, QubitId q1);
  void apply_classical(std::span<const QubitId> inputs, std::span<const QubitId> targets,
                       const ClassicalFn& f);

  int measure(QubitId q, Rng& rng);
  std::vector<int> measure(std::span<const QubitId> qs, Rng& rng);
  // 0 for +, 1 for -.
  int measure_hadamard(QubitId q, Rng& rng);

  void transfer(QubitId q, int new_owner);

  // Throws GarbageLeakError unless every branch holds 0 on every qubit.
  void assert_zero_and_free(std::span<const QubitId> qs);
  void assert_zero_and_free(QubitId q) { assert_zero_and_free(std::span<const QubitId>(&q, 1)); }
  // Retires a qubit sitting in a computational basis state (e.g. after a
  // measurement). Throws UsageError if it is still in superposition.
  void discard_definite(QubitId q);

  // Test hook. config must assign a bit to every live qubit.
  Amp amplitude(const std::map<QubitId, int>& config) const;

  // Branches of the factor holding exactly the qubits `qs`, bits listed in
  // the order of `qs`. Throws UsageError when qs is not one whole factor.
  std::vector<std::pair<std::vector<int>, Amp>> factor_state(std::span<const QubitId> qs) const;

  bool live(QubitId q) const;
  int owner(QubitId q) const;
  std::vector<QubitId> live_qubits() const;

  double norm() const;
  std::size_t branch_count() const;
  std::size_t factor_count() const;

  std::uint64_t allocated_total() const { return allocated_; }
  std::uint64_t retired_total() const { return retired_; }
  std::uint64_t live_count() const { return allocated_ - retired_; }
  std::uint64_t transfers() const { return transfers_; }
  std::uint64_t zero_audits() const { return zero_audits_; }
  double max_norm_deviation() const { return max_norm_dev_; }
  std::uint64_t norm_checks() const { return norm_checks_; }

 private:
  struct Factor {
    std::vector<QubitId> slots;  // slot -> qubit, or kFreeSlot
    std::vector<std::uint32_t> free_slots;
    std::size_t words = 1;
    std::vector<std::uint64_t> keys;  // branch-major, `words` per branch
    std::vector<Amp> amps;
    bool alive = true;

    std::size_t size() const { return amps.size(); }
    const std::uint64_t* key(std::size_t b) const { return keys.data() + b * words; }
    std::uint64_t* key(std::size_t b) { return keys.data() + b * words; }
  };

  struct QubitRecord {
    int owner = kNoOwner;
    bool live = false;
    std::uint32_t factor = 0;
    std::uint32_t slot = 0;
  };

  static constexpr QubitId kFreeSlot = ~QubitId{0};

  const QubitRecord& record(QubitId q) const;
  std::uint32_t new_factor();
  std::uint32_t take_slot(Factor& f, QubitId q);
  void widen(Factor& f, std::size_t words);
  // Merges factors of all qs into one and returns its index.
  std::uint32_t unify(std::span<const QubitId> qs);
  void merge_into(std::uint32_t dst, std::uint32_t src);
  void apply_local(std::uint32_t factor, std::span<const std::uint32_t> slots, const GateMatrix& gate);
  void release_slot(QubitId q);
  void split_definite(QubitId q);
  void check_norm(const Factor& f);

  std::vector<QubitRecord> qubits_;
  std::vector<QubitId> free_ids_;
  std::vector<Factor> factors_;
  std::vector<std::uint32_t> free_factors_;

  std::uint64_t allocated_ = 0;
  std::uint64_t retired_ = 0;
  std::uint64_t transfers_ = 0;
  std::uint64_t zero_audits_ = 0;
  std::uint64_t norm_checks_ = 0;
  double max_norm_dev_ = 0.0;
  Amp global_phase_{1.0, 0.0};
};

}  // namespace qle::qsim
