#pragma once

// Pauli labels, Pauli strings and weighted Pauli-sum observables.

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nzne/tensor.hpp"

namespace nzne {

using Mat = Eigen::MatrixXcd;

enum class Pauli { I, X, Y, Z };

inline char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

inline Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
  }
  throw std::invalid_argument(std::string("unknown Pauli label: ") + c);
}

inline const Mat& pauli_matrix(Pauli p) {
  static const Mat id = Mat::Identity(2, 2);
  static const Mat x = (Mat(2, 2) << 0, 1, 1, 0).finished();
  static const Mat y = (Mat(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished();
  static const Mat z = (Mat(2, 2) << 1, 0, 0, -1).finished();
  switch (p) {
    case Pauli::I: return id;
    case Pauli::X: return x;
    case Pauli::Y: return y;
    case Pauli::Z: return z;
  }
  throw std::logic_error("unreachable");
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// A product of single-site Paulis; unlisted sites carry the identity.
struct PauliString {
  std::vector<std::pair<std::size_t, Pauli>> factors;

  PauliString() = default;
  PauliString(std::initializer_list<std::pair<std::size_t, Pauli>> f)
      : factors(f) {
    validate();
  }
  explicit PauliString(std::vector<std::pair<std::size_t, Pauli>> f)
      : factors(std::move(f)) {
    validate();
  }

  void validate() const {
    std::set<std::size_t> seen;
    for (const auto& [site, p] : factors) {
      if (!seen.insert(site).second) {
        throw std::invalid_argument("PauliString: repeated site index");
      }
    }
  }

  std::size_t max_site() const {
    std::size_t m = 0;
    for (const auto& [site, p] : factors) m = std::max(m, site);
    return m;
  }

  Pauli at_site(std::size_t site) const {
    for (const auto& [s, p] : factors) {
      if (s == site) return p;
    }
    return Pauli::I;
  }

  std::string to_string() const {
    std::string out;
    for (const auto& [site, p] : factors) {
      out += pauli_char(p);
      out += std::to_string(site);
      out += ' ';
    }
    if (!out.empty()) out.pop_back();
    return out.empty() ? "I" : out;
  }

  // Dense n-qubit matrix (for oracle-side checks; n small).
  Mat to_matrix(std::size_t n_qubits) const {
    Mat out = Mat::Identity(1, 1);
    for (std::size_t q = 0; q < n_qubits; ++q) {
      out = kron(out, pauli_matrix(at_site(q)));
    }
    return out;
  }
};

// constant + sum of coef * PauliString; covers plain Pauli expectation values
// as well as affine combinations such as occupation numbers (I - Z)/2.
struct Observable {
  double constant = 0.0;
  std::vector<std::pair<double, PauliString>> terms;

  Observable() = default;
  explicit Observable(PauliString s) { terms.emplace_back(1.0, std::move(s)); }
  Observable(double c, std::vector<std::pair<double, PauliString>> t)
      : constant(c), terms(std::move(t)) {}

  std::size_t max_site() const {
    std::size_t m = 0;
    for (const auto& [c, s] : terms) m = std::max(m, s.max_site());
    return m;
  }

  Mat to_matrix(std::size_t n_qubits) const {
    const std::size_t dim = std::size_t{1} << n_qubits;
    Mat out = constant * Mat::Identity(dim, dim);
    for (const auto& [c, s] : terms) out += c * s.to_matrix(n_qubits);
    return out;
  }
};

using ObservableSet = std::map<std::string, Observable>;

}  // namespace nzne
