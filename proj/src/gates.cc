#include <cmath>
#include <numbers>

#include "qle/errors.h"
#include "qle/qsim.h"

namespace qle::qsim {

namespace {

constexpr double kPi = std::numbers::pi;
const Amp kI{0.0, 1.0};

Amp phase(double angle) { return std::polar(1.0, angle); }

}  // namespace

double GateMatrix::unitarity_error() const {
  double worst = 0.0;
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      Amp sum = 0.0;
      for (int j = 0; j < dim; ++j) sum += std::conj((*this)(j, r)) * (*this)(j, c);
      if (r == c) sum -= 1.0;
      worst = std::max(worst, std::abs(sum));
    }
  }
  return worst;
}

GateMatrix hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  GateMatrix g;
  g(0, 0) = s;
  g(0, 1) = s;
  g(1, 0) = s;
  g(1, 1) = -s;
  return g;
}

GateMatrix u_gate(int k) {
  if (k < 2 || k % 2 != 0) throw ParameterError("U_k needs even k >= 2");
  const double s = 1.0 / std::sqrt(2.0);
  GateMatrix g;
  g(0, 0) = s;
  g(0, 1) = s * phase(-kPi / k);
  g(1, 0) = -s * phase(kPi / k);
  g(1, 1) = s;
  return g;
}

GateMatrix u_gate_general(int k, double psi, int t) {
  if (k < 2 || k % 2 != 0) throw ParameterError("U_k(psi,t) needs even k >= 2");
  const double s = 1.0 / std::sqrt(2.0);
  const double shifted = psi - (2.0 * t + 1.0) * kPi / k;
  GateMatrix g;
  g(0, 0) = s * phase(psi);
  g(0, 1) = s * phase(shifted);
  g(1, 0) = -s * phase(-shifted);
  g(1, 1) = s * phase(-psi);
  return g;
}

GateMatrix v_gate(int k) {
  if (k < 3 || k % 2 == 0) throw ParameterError("V_k needs odd k >= 3");
  const Amp w = phase(kPi / k);
  const double re = std::cos(kPi / k);
  const double im = std::sin(kPi / k);
  const double re_half = std::cos(kPi / (2.0 * k));
  const double sq2 = std::sqrt(2.0);
  const double sre = std::sqrt(re);
  const double scale = 1.0 / std::sqrt(re + 1.0);
  GateMatrix g;
  g.dim = 4;
  g(0, 0) = 1.0 / sq2;
  g(0, 1) = 0.0;
  g(0, 2) = sre;
  g(0, 3) = w / sq2;
  g(1, 0) = 1.0 / sq2;
  g(1, 1) = 0.0;
  g(1, 2) = -sre * std::conj(w);
  g(1, 3) = std::conj(w) / sq2;
  g(2, 0) = sre;
  g(2, 1) = 0.0;
  g(2, 2) = phase(-kPi / (2.0 * k)) * im / (kI * sq2 * re_half);
  g(2, 3) = -sre;
  g(3, 0) = 0.0;
  g(3, 1) = std::sqrt(re + 1.0);
  g(3, 2) = 0.0;
  g(3, 3) = 0.0;
  for (auto& x : g.m) x *= scale;
  return g;
}

GateMatrix w_gate(int k) {
  if (k < 1) throw ParameterError("W_k needs k >= 1");
  GateMatrix g;
  g(0, 0) = 1.0;
  g(1, 1) = phase(kPi / k);
  return g;
}

GateMatrix build_gate(GateKind kind, int k, double psi, int t) {
  switch (kind) {
    case GateKind::hadamard: return hadamard();
    case GateKind::u_k: return u_gate(k);
    case GateKind::u_k_general: return u_gate_general(k, psi, t);
    case GateKind::v_k: return v_gate(k);
    case GateKind::w_k: return w_gate(k);
  }
  throw ParameterError("unknown gate kind");
}

}  // namespace qle::qsim
