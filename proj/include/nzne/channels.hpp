#pragma once

// Kraus-operator channels, their vectorized superoperators, and the three
// parametrized noise-model families bound to gate classes.

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nzne/pauli.hpp"
#include "nzne/tensor.hpp"

namespace nzne {

struct Channel {
  int arity = 1;  // 1 or 2 qubits
  std::vector<Mat> kraus;
  std::string label;

  Eigen::Index dim() const { return arity == 1 ? 2 : 4; }

  bool is_identity() const {
    if (kraus.size() != 1) return false;
    return (kraus[0] - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff() <
           1e-14;
  }

  // CPTP trace preservation: sum K^dag K = identity.
  double cptp_defect() const {
    Mat acc = Mat::Zero(dim(), dim());
    for (const auto& k : kraus) acc += k.adjoint() * k;
    return (acc - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }

  void validate(double tol = 1e-12) const {
    if (arity != 1 && arity != 2) {
      throw std::invalid_argument("Channel: arity must be 1 or 2");
    }
    for (const auto& k : kraus) {
      if (k.rows() != dim() || k.cols() != dim()) {
        throw std::invalid_argument("Channel: Kraus dimension mismatch");
      }
    }
    if (cptp_defect() > tol) {
      throw std::invalid_argument("Channel '" + label + "' is not CPTP");
    }
  }

  // Direct Kraus action on a density matrix of matching dimension.
  Mat apply(const Mat& rho) const {
    Mat out = Mat::Zero(dim(), dim());
    for (const auto& k : kraus) out += k * rho * k.adjoint();
    return out;
  }
};

inline Channel identity_channel(int arity) {
  Channel ch;
  ch.arity = arity;
  ch.kraus = {Mat::Identity(ch.dim(), ch.dim())};
  ch.label = "identity";
  return ch;
}

// Two-qubit depolarizing channel: rho -> (1-lambda) rho + lambda I/4.
// Kraus set: sqrt(1 - 15 lambda/16) I and sqrt(lambda/16) sigma_i x sigma_j
// for the 15 non-identity Pauli pairs.
inline Channel depolarizing2(double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("depolarizing2: lambda in [0,1]");
  }
  Channel ch;
  ch.arity = 2;
  ch.label = "depolarizing2";
  if (lambda == 0.0) return identity_channel(2);
  ch.kraus.push_back(std::sqrt(1.0 - 15.0 * lambda / 16.0) * Mat::Identity(4, 4));
  const Pauli ps[4] = {Pauli::I, Pauli::X, Pauli::Y, Pauli::Z};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == 0 && j == 0) continue;
      ch.kraus.push_back(std::sqrt(lambda / 16.0) *
                         kron(pauli_matrix(ps[i]), pauli_matrix(ps[j])));
    }
  }
  return ch;
}

enum class GateClass { ZRot, Hadamard, Cx, Other };

// Biased cat-qubit error model; probabilities per gate class:
//   Z(theta): Z with prob lambda
//   H:        Z with prob 3 lambda, X with prob 2 lambda
//   CX:       Z1 3 lambda, Z2 lambda/2, Z1 Z2 lambda/2
// Qubit 1 is the control, qubit 2 the target.
inline Channel cat_noise_for_gate(GateClass gate, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("cat noise: lambda >= 0");
  Channel ch;
  ch.label = "cat";
  auto add = [&](double p, const Mat& m) {
    if (p < 0.0 || p > 1.0) {
      throw std::invalid_argument("cat noise: probability outside [0,1]");
    }
    if (p > 0.0) ch.kraus.push_back(std::sqrt(p) * m);
  };
  const Mat& z = pauli_matrix(Pauli::Z);
  const Mat& x = pauli_matrix(Pauli::X);
  const Mat& id1 = pauli_matrix(Pauli::I);
  switch (gate) {
    case GateClass::ZRot:
      ch.arity = 1;
      add(1.0 - lambda, id1);
      add(lambda, z);
      break;
    case GateClass::Hadamard:
      ch.arity = 1;
      add(1.0 - 5.0 * lambda, id1);
      add(3.0 * lambda, z);
      add(2.0 * lambda, x);
      break;
    case GateClass::Cx:
      ch.arity = 2;
      add(1.0 - 4.0 * lambda, kron(id1, id1));
      add(3.0 * lambda, kron(z, id1));
      add(lambda / 2.0, kron(id1, z));
      add(lambda / 2.0, kron(z, z));
      break;
    case GateClass::Other:
      return identity_channel(1);
  }
  return ch;
}

// Depolarizing channel restricted to matchgate-compatible Paulis:
// K0 = sqrt(1-lambda) I, K_sigma = sqrt(lambda/7) sigma for
// sigma in {ZI, IZ, XX, XY, YY, YX, ZZ}.
inline Channel matchgate_depolarizing(double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("matchgate_depolarizing: lambda in [0,1]");
  }
  Channel ch;
  ch.arity = 2;
  ch.label = "matchgate_depolarizing";
  if (lambda == 0.0) return identity_channel(2);
  ch.kraus.push_back(std::sqrt(1.0 - lambda) * Mat::Identity(4, 4));
  const std::pair<Pauli, Pauli> sigmas[7] = {
      {Pauli::Z, Pauli::I}, {Pauli::I, Pauli::Z}, {Pauli::X, Pauli::X},
      {Pauli::X, Pauli::Y}, {Pauli::Y, Pauli::Y}, {Pauli::Y, Pauli::X},
      {Pauli::Z, Pauli::Z}};
  for (const auto& [a, b] : sigmas) {
    ch.kraus.push_back(std::sqrt(lambda / 7.0) *
                       kron(pauli_matrix(a), pauli_matrix(b)));
  }
  return ch;
}

// Vectorized action of a channel under the per-site superket convention
// (i, j) -> 2i + j: for arity 2 the joint index order is
// (i_a, j_a, i_b, j_b), matching two adjacent phys-dim-4 MPS sites.
inline Mat to_superoperator(const Channel& ch) {
  const Eigen::Index dim = ch.dim();
  Mat s = Mat::Zero(dim * dim, dim * dim);
  for (const auto& k : ch.kraus) s += kron(k, k.conjugate());
  if (ch.arity == 1) return s;
  // Reorder (i_a i_b | j_a j_b) -> (i_a j_a | i_b j_b) on rows and columns.
  Mat out = Mat::Zero(16, 16);
  auto pos = [](int ia, int ja, int ib, int jb) {
    return ((ia * 2 + ja) * 2 + ib) * 2 + jb;
  };
  auto raw = [](int ia, int ja, int ib, int jb) {
    return ((ia * 2 + ib) * 2 + ja) * 2 + jb;
  };
  for (int ia = 0; ia < 2; ++ia)
    for (int ja = 0; ja < 2; ++ja)
      for (int ib = 0; ib < 2; ++ib)
        for (int jb = 0; jb < 2; ++jb)
          for (int ka = 0; ka < 2; ++ka)
            for (int la = 0; la < 2; ++la)
              for (int kb = 0; kb < 2; ++kb)
                for (int lb = 0; lb < 2; ++lb)
                  out(pos(ia, ja, ib, jb), pos(ka, la, kb, lb)) =
                      s(raw(ia, ja, ib, jb), raw(ka, la, kb, lb));
  return out;
}

// Superoperator of a unitary gate under the same convention.
inline Mat unitary_superoperator(const Mat& u) {
  Channel ch;
  ch.arity = u.rows() == 2 ? 1 : 2;
  ch.kraus = {u};
  return to_superoperator(ch);
}

enum class NoiseFamily { None, Depolarizing, Cat, MatchgateDepolarizing };

inline NoiseFamily noise_family_from_string(const std::string& s) {
  if (s == "none") return NoiseFamily::None;
  if (s == "depolarizing") return NoiseFamily::Depolarizing;
  if (s == "cat") return NoiseFamily::Cat;
  if (s == "matchgate_depolarizing") return NoiseFamily::MatchgateDepolarizing;
  throw std::invalid_argument("unknown noise family: " + s);
}

inline std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::None: return "none";
    case NoiseFamily::Depolarizing: return "depolarizing";
    case NoiseFamily::Cat: return "cat";
    case NoiseFamily::MatchgateDepolarizing: return "matchgate_depolarizing";
  }
  return "?";
}

// Binds gate occurrences (gate class, arity) to channel factories. Single
// qubit gates are noiseless in the depolarizing and matchgate families; the
// cat family covers exactly the {Z(theta), H, CX} gate set and maps every
// other class to the identity channel.
struct NoiseModel {
  NoiseFamily family = NoiseFamily::None;

  double max_lambda() const {
    switch (family) {
      case NoiseFamily::None: return 0.0;
      case NoiseFamily::Cat: return 0.2;  // H row: 1 - 5 lambda >= 0
      default: return 1.0;
    }
  }

  void check_lambda(double lambda) const {
    if (lambda < 0.0 || lambda > max_lambda()) {
      throw std::invalid_argument("noise strength " + std::to_string(lambda) +
                                  " outside [0, " +
                                  std::to_string(max_lambda()) + "] for " +
                                  to_string(family));
    }
  }

  Channel channel_for(const std::string& gate_class, int arity,
                      double lambda) const {
    check_lambda(lambda);
    if (lambda == 0.0) return identity_channel(arity);
    switch (family) {
      case NoiseFamily::None:
        return identity_channel(arity);
      case NoiseFamily::Depolarizing:
        return arity == 2 ? depolarizing2(lambda) : identity_channel(1);
      case NoiseFamily::MatchgateDepolarizing:
        return arity == 2 ? matchgate_depolarizing(lambda)
                          : identity_channel(1);
      case NoiseFamily::Cat: {
        if (gate_class == "rz") return cat_noise_for_gate(GateClass::ZRot, lambda);
        if (gate_class == "h") return cat_noise_for_gate(GateClass::Hadamard, lambda);
        if (gate_class == "cx") return cat_noise_for_gate(GateClass::Cx, lambda);
        return identity_channel(arity);
      }
    }
    return identity_channel(arity);
  }
};

}  // namespace nzne
