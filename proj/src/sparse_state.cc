#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qle/errors.h"
#include "qle/qsim.h"

namespace qle::qsim {

namespace {

inline int get_bit(const std::uint64_t* key, std::uint32_t slot) {
  return static_cast<int>((key[slot >> 6] >> (slot & 63)) & 1ULL);
}

inline void flip_bit(std::uint64_t* key, std::uint32_t slot) { key[slot >> 6] ^= 1ULL << (slot & 63); }

inline void clear_bit(std::uint64_t* key, std::uint32_t slot) {
  key[slot >> 6] &= ~(1ULL << (slot & 63));
}

}  // namespace

const SparseState::QubitRecord& SparseState::record(QubitId q) const {
  if (q >= qubits_.size() || !qubits_[q].live)
    throw UsageError("qubit " + std::to_string(q) + " is not live");
  return qubits_[q];
}

bool SparseState::live(QubitId q) const { return q < qubits_.size() && qubits_[q].live; }

int SparseState::owner(QubitId q) const { return record(q).owner; }

std::vector<QubitId> SparseState::live_qubits() const {
  std::vector<QubitId> out;
  for (QubitId q = 0; q < qubits_.size(); ++q)
    if (qubits_[q].live) out.push_back(q);
  return out;
}

std::uint32_t SparseState::new_factor() {
  std::uint32_t idx;
  if (!free_factors_.empty()) {
    idx = free_factors_.back();
    free_factors_.pop_back();
  } else {
    idx = static_cast<std::uint32_t>(factors_.size());
    factors_.emplace_back();
  }
  Factor& f = factors_[idx];
  f = Factor{};
  f.keys.assign(1, 0ULL);
  f.amps.assign(1, Amp{1.0, 0.0});
  return idx;
}

void SparseState::widen(Factor& f, std::size_t words) {
  if (words <= f.words) return;
  std::vector<std::uint64_t> keys(f.size() * words, 0ULL);
  for (std::size_t b = 0; b < f.size(); ++b)
    std::copy(f.key(b), f.key(b) + f.words, keys.data() + b * words);
  f.keys = std::move(keys);
  f.words = words;
}

std::uint32_t SparseState::take_slot(Factor& f, QubitId q) {
  std::uint32_t slot;
  if (!f.free_slots.empty()) {
    slot = f.free_slots.back();
    f.free_slots.pop_back();
    f.slots[slot] = q;
  } else {
    slot = static_cast<std::uint32_t>(f.slots.size());
    f.slots.push_back(q);
    if (slot >= f.words * 64) widen(f, f.words + 1);
  }
  return slot;
}

std::vector<QubitId> SparseState::alloc(int owner, int count) {
  std::vector<QubitId> out;
  for (int i = 0; i < count; ++i) {
    QubitId q;
    if (!free_ids_.empty()) {
      q = free_ids_.back();
      free_ids_.pop_back();
    } else {
      q = static_cast<QubitId>(qubits_.size());
      qubits_.emplace_back();
    }
    std::uint32_t fi = new_factor();
    std::uint32_t slot = take_slot(factors_[fi], q);
    qubits_[q] = QubitRecord{owner, true, fi, slot};
    ++allocated_;
    out.push_back(q);
  }
  return out;
}

void SparseState::merge_into(std::uint32_t dst, std::uint32_t src) {
  // Assign slots first: take_slot may widen dst.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> moves;  // (src slot, dst slot)
  {
    std::vector<QubitId> src_slots = factors_[src].slots;
    for (std::uint32_t s = 0; s < src_slots.size(); ++s) {
      if (src_slots[s] == kFreeSlot) continue;
      moves.emplace_back(s, take_slot(factors_[dst], src_slots[s]));
    }
  }
  Factor& d = factors_[dst];
  Factor& s = factors_[src];
  const std::size_t w = d.words;
  std::vector<std::uint64_t> contrib(s.size() * w, 0ULL);
  for (std::size_t b = 0; b < s.size(); ++b) {
    for (auto [from, to] : moves)
      if (get_bit(s.key(b), from)) flip_bit(contrib.data() + b * w, to);
  }
  std::vector<std::uint64_t> keys;
  std::vector<Amp> amps;
  keys.reserve(d.size() * s.size() * w);
  amps.reserve(d.size() * s.size());
  for (std::size_t a = 0; a < d.size(); ++a) {
    for (std::size_t b = 0; b < s.size(); ++b) {
      Amp amp = d.amps[a] * s.amps[b];
      if (std::abs(amp) < kPruneThreshold) continue;
      for (std::size_t j = 0; j < w; ++j) keys.push_back(d.key(a)[j] | contrib[b * w + j]);
      amps.push_back(amp);
    }
  }
  d.keys = std::move(keys);
  d.amps = std::move(amps);
  for (auto [from, to] : moves) {
    QubitRecord& r = qubits_[d.slots[to]];
    r.factor = dst;
    r.slot = to;
  }
  s = Factor{};
  s.alive = false;
  free_factors_.push_back(src);
  check_norm(d);
}

std::uint32_t SparseState::unify(std::span<const QubitId> qs) {
  std::vector<std::uint32_t> fs;
  for (QubitId q : qs) fs.push_back(record(q).factor);
  std::sort(fs.begin(), fs.end());
  fs.erase(std::unique(fs.begin(), fs.end()), fs.end());
  std::uint32_t dst = fs.front();
  for (std::uint32_t f : fs)
    if (factors_[f].size() > factors_[dst].size()) dst = f;
  for (std::uint32_t f : fs)
    if (f != dst) merge_into(dst, f);
  return dst;
}

void SparseState::check_norm(const Factor& f) {
  double s = 0.0;
  for (const Amp& a : f.amps) s += std::norm(a);
  max_norm_dev_ = std::max(max_norm_dev_, std::abs(s - 1.0));
  ++norm_checks_;
}

void SparseState::apply_local(std::uint32_t fi, std::span<const std::uint32_t> slots,
                              const GateMatrix& gate) {
  Factor& f = factors_[fi];
  const std::size_t w = f.words;
  const int arity = static_cast<int>(slots.size());
  const int dim = 1 << arity;
  std::vector<std::uint64_t> mask(w, ~0ULL);
  for (auto s : slots) clear_bit(mask.data(), s);
  auto index_of = [&](const std::uint64_t* k) {
    int x = 0;
    for (auto s : slots) x = 2 * x + get_bit(k, s);
    return x;
  };
  std::vector<std::uint32_t> idx(f.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    const std::uint64_t* ka = f.key(a);
    const std::uint64_t* kb = f.key(b);
    for (std::size_t j = 0; j < w; ++j) {
      std::uint64_t x = ka[j] & mask[j], y = kb[j] & mask[j];
      if (x != y) return x < y;
    }
    return index_of(ka) < index_of(kb);
  });
  std::vector<std::uint64_t> keys;
  std::vector<Amp> amps;
  keys.reserve(f.keys.size() * dim);
  amps.reserve(f.size() * dim);
  std::vector<std::uint64_t> base(w);
  std::size_t i = 0;
  while (i < idx.size()) {
    Amp in[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < w; ++j) base[j] = f.key(idx[i])[j] & mask[j];
    std::size_t e = i;
    while (e < idx.size()) {
      const std::uint64_t* k = f.key(idx[e]);
      bool same = true;
      for (std::size_t j = 0; j < w && same; ++j) same = (k[j] & mask[j]) == base[j];
      if (!same) break;
      in[index_of(k)] += f.amps[idx[e]];
      ++e;
    }
    for (int o = 0; o < dim; ++o) {
      Amp out = 0.0;
      for (int c = 0; c < dim; ++c) out += gate(o, c) * in[c];
      if (std::abs(out) < kPruneThreshold) continue;
      std::size_t at = keys.size();
      keys.insert(keys.end(), base.begin(), base.end());
      for (int j = 0; j < arity; ++j)
        if ((o >> (arity - 1 - j)) & 1) flip_bit(keys.data() + at, slots[j]);
      amps.push_back(out);
    }
    i = e;
  }
  f.keys = std::move(keys);
  f.amps = std::move(amps);
  check_norm(f);
}

void SparseState::apply_1q(const GateMatrix& gate, QubitId q) {
  if (gate.dim != 2) throw UsageError("apply_1q needs a 2x2 gate");
  const QubitRecord& r = record(q);
  const std::uint32_t slots[1] = {r.slot};
  apply_local(r.factor, slots, gate);
}

void SparseState::apply_2q(const GateMatrix& gate, QubitId q0, QubitId q1) {
  if (gate.dim != 4) throw UsageError("apply_2q needs a 4x4 gate");
  if (q0 == q1) throw UsageError("apply_2q needs distinct qubits");
  const QubitId both[2] = {q0, q1};
  std::uint32_t fi = unify(std::span<const QubitId>(both, 2));
  const std::uint32_t slots[2] = {record(q0).slot, record(q1).slot};
  apply_local(fi, slots, gate);
}

void SparseState::apply_classical(std::span<const QubitId> inputs, std::span<const QubitId> targets,
                                  const ClassicalFn& fn) {
  if (inputs.size() > 64 || targets.size() > 64) throw UsageError("apply_classical: too many qubits");
  std::vector<QubitId> all(inputs.begin(), inputs.end());
  all.insert(all.end(), targets.begin(), targets.end());
  for (QubitId q : all) record(q);
  {
    std::vector<QubitId> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw UsageError("apply_classical: inputs and targets must be distinct");
  }
  if (targets.empty()) return;
  std::uint32_t fi = unify(all);
  Factor& f = factors_[fi];
  std::vector<std::uint32_t> in_slots, out_slots;
  for (QubitId q : inputs) in_slots.push_back(qubits_[q].slot);
  for (QubitId q : targets) out_slots.push_back(qubits_[q].slot);
  for (std::size_t b = 0; b < f.size(); ++b) {
    std::uint64_t* k = f.key(b);
    std::uint64_t x = 0;
    for (std::size_t j = 0; j < in_slots.size(); ++j)
      x |= static_cast<std::uint64_t>(get_bit(k, in_slots[j])) << j;
    std::uint64_t y = fn(x);
    for (std::size_t j = 0; j < out_slots.size(); ++j)
      if ((y >> j) & 1ULL) flip_bit(k, out_slots[j]);
  }
}

void SparseState::split_definite(QubitId q) {
  QubitRecord& r = qubits_[q];
  Factor& f = factors_[r.factor];
  std::size_t live_slots = f.slots.size() - f.free_slots.size();
  if (live_slots <= 1) return;
  int bit = get_bit(f.key(0), r.slot);
  if (bit)
    for (std::size_t b = 0; b < f.size(); ++b) clear_bit(f.key(b), r.slot);
  f.slots[r.slot] = kFreeSlot;
  f.free_slots.push_back(r.slot);
  std::uint32_t fi = new_factor();
  Factor& g = factors_[fi];
  std::uint32_t slot = take_slot(g, q);
  if (bit) flip_bit(g.key(0), slot);
  r.factor = fi;
  r.slot = slot;
}

int SparseState::measure(QubitId q, Rng& rng) {
  const QubitRecord& r = record(q);
  Factor& f = factors_[r.factor];
  double p1 = 0.0, total = 0.0;
  for (std::size_t b = 0; b < f.size(); ++b) {
    double p = std::norm(f.amps[b]);
    total += p;
    if (get_bit(f.key(b), r.slot)) p1 += p;
  }
  const double u = uniform01(rng);
  const int outcome = (u * total < p1) ? 1 : 0;
  const double kept = outcome ? p1 : total - p1;
  const double scale = 1.0 / std::sqrt(kept);
  std::size_t out = 0;
  for (std::size_t b = 0; b < f.size(); ++b) {
    if (get_bit(f.key(b), r.slot) != outcome) continue;
    if (out != b) std::copy(f.key(b), f.key(b) + f.words, f.key(out));
    f.amps[out] = f.amps[b] * scale;
    ++out;
  }
  f.amps.resize(out);
  f.keys.resize(out * f.words);
  check_norm(f);
  split_definite(q);
  return outcome;
}

std::vector<int> SparseState::measure(std::span<const QubitId> qs, Rng& rng) {
  std::vector<int> out;
  for (QubitId q : qs) out.push_back(measure(q, rng));
  return out;
}

int SparseState::measure_hadamard(QubitId q, Rng& rng) {
  apply_1q(hadamard(), q);
  return measure(q, rng);
}

void SparseState::transfer(QubitId q, int new_owner) {
  record(q);
  qubits_[q].owner = new_owner;
  ++transfers_;
}

void SparseState::release_slot(QubitId q) {
  QubitRecord& r = qubits_[q];
  Factor& f = factors_[r.factor];
  f.slots[r.slot] = kFreeSlot;
  f.free_slots.push_back(r.slot);
  if (f.free_slots.size() == f.slots.size()) {
    // Nothing left but a global phase.
    global_phase_ *= f.amps.empty() ? Amp{0.0} : f.amps.front() / std::abs(f.amps.front());
    f = Factor{};
    f.alive = false;
    free_factors_.push_back(r.factor);
  }
  r.live = false;
  r.owner = kNoOwner;
  free_ids_.push_back(q);
  ++retired_;
}

void SparseState::assert_zero_and_free(std::span<const QubitId> qs) {
  for (QubitId q : qs) {
    const QubitRecord& r = record(q);
    const Factor& f = factors_[r.factor];
    for (std::size_t b = 0; b < f.size(); ++b) {
      if (get_bit(f.key(b), r.slot))
        throw GarbageLeakError("qubit " + std::to_string(q) + " is not |0> in every branch");
    }
  }
  for (QubitId q : qs) {
    if (!qubits_[q].live) throw UsageError("qubit freed twice");
    ++zero_audits_;
    release_slot(q);
  }
}

void SparseState::discard_definite(QubitId q) {
  const QubitRecord& r = record(q);
  Factor& f = factors_[r.factor];
  int bit = get_bit(f.key(0), r.slot);
  for (std::size_t b = 1; b < f.size(); ++b)
    if (get_bit(f.key(b), r.slot) != bit)
      throw UsageError("qubit " + std::to_string(q) + " is in superposition; measure it first");
  if (bit)
    for (std::size_t b = 0; b < f.size(); ++b) clear_bit(f.key(b), r.slot);
  release_slot(q);
}

Amp SparseState::amplitude(const std::map<QubitId, int>& config) const {
  for (auto [q, bit] : config)
    if (!live(q)) throw UsageError("amplitude: qubit " + std::to_string(q) + " is not live");
  Amp result = global_phase_;
  for (const Factor& f : factors_) {
    if (!f.alive) continue;
    std::vector<std::uint64_t> want(f.words, 0ULL);
    for (std::uint32_t s = 0; s < f.slots.size(); ++s) {
      if (f.slots[s] == kFreeSlot) continue;
      auto it = config.find(f.slots[s]);
      if (it == config.end()) throw UsageError("amplitude: configuration misses a live qubit");
      if (it->second) flip_bit(want.data(), s);
    }
    Amp found = 0.0;
    for (std::size_t b = 0; b < f.size(); ++b) {
      if (std::equal(want.begin(), want.end(), f.key(b))) {
        found = f.amps[b];
        break;
      }
    }
    result *= found;
  }
  return result;
}

std::vector<std::pair<std::vector<int>, Amp>> SparseState::factor_state(
    std::span<const QubitId> qs) const {
  if (qs.empty()) throw UsageError("factor_state: no qubits");
  std::uint32_t fi = record(qs.front()).factor;
  for (QubitId q : qs)
    if (record(q).factor != fi) throw UsageError("factor_state: qubits span several factors");
  const Factor& f = factors_[fi];
  if (f.slots.size() - f.free_slots.size() != qs.size())
    throw UsageError("factor_state: factor holds other qubits");
  std::vector<std::pair<std::vector<int>, Amp>> out;
  for (std::size_t b = 0; b < f.size(); ++b) {
    std::vector<int> bits;
    for (QubitId q : qs) bits.push_back(get_bit(f.key(b), qubits_[q].slot));
    out.emplace_back(std::move(bits), f.amps[b] * global_phase_);
  }
  return out;
}

double SparseState::norm() const {
  double n = std::norm(global_phase_);
  for (const Factor& f : factors_) {
    if (!f.alive) continue;
    double s = 0.0;
    for (const Amp& a : f.amps) s += std::norm(a);
    n *= s;
  }
  return n;
}

std::size_t SparseState::branch_count() const {
  std::size_t total = 1;
  for (const Factor& f : factors_)
    if (f.alive) total *= f.size();
  return total;
}

std::size_t SparseState::factor_count() const {
  std::size_t c = 0;
  for (const Factor& f : factors_) c += f.alive ? 1 : 0;
  return c;
}

}  // namespace qle::qsim
