#pragma once

// Matrix-product representation of pure states (physical dimension 2) and
// vectorized density matrices (physical dimension 4), with canonicalization,
// norms, trace, Pauli expectation values, bond entropies and compression.
//
// Superket convention for physical dimension 4: the pair (i, j) of ket/bra
// indices of a density matrix entry rho_{ij} is linearized as 2*i + j. Every
// superoperator in the toolkit uses the same convention.

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nzne/pauli.hpp"
#include "nzne/tensor.hpp"

namespace nzne {

class TnState {
 public:
  TnState(std::size_t n_sites, std::size_t phys_dim)
      : n_(n_sites), d_(phys_dim) {
    if (n_ == 0) throw std::invalid_argument("TnState: need at least one site");
    if (d_ != 2 && d_ != 4) {
      throw std::invalid_argument("TnState: phys_dim must be 2 or 4");
    }
    sites_.assign(n_, DenseTensor({1, d_, 1}));
  }

  // Vectorized |b><b| product state (phys_dim 4). Trace and norm are 1.
  static TnState product_density(const std::vector<int>& bits) {
    TnState st(bits.size(), 4);
    for (std::size_t q = 0; q < bits.size(); ++q) {
      const int b = bits[q];
      if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0/1");
      st.sites_[q].at({0, static_cast<std::size_t>(3 * b), 0}) = 1.0;
    }
    st.center_ = 0;
    return st;
  }

  // |b> product state (phys_dim 2).
  static TnState product_pure(const std::vector<int>& bits) {
    TnState st(bits.size(), 2);
    for (std::size_t q = 0; q < bits.size(); ++q) {
      const int b = bits[q];
      if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0/1");
      st.sites_[q].at({0, static_cast<std::size_t>(b), 0}) = 1.0;
    }
    st.center_ = 0;
    return st;
  }

  std::size_t n_sites() const { return n_; }
  std::size_t phys_dim() const { return d_; }
  const DenseTensor& site(std::size_t q) const { return sites_.at(q); }
  DenseTensor& site(std::size_t q) { return sites_.at(q); }
  std::optional<std::size_t> canonical_center() const { return center_; }

  double log_fidelity() const { return log_fidelity_; }
  void add_log_fidelity(double lf) { log_fidelity_ += lf; }

  std::size_t bond_dim(std::size_t bond) const {
    // bond b separates sites {0..b-1} | {b..n-1}; boundary bonds have extent 1.
    if (bond == 0 || bond == n_) return 1;
    return sites_.at(bond).extent(0);
  }

  std::size_t max_bond_dim() const {
    std::size_t m = 1;
    for (std::size_t b = 1; b < n_; ++b) m = std::max(m, bond_dim(b));
    return m;
  }

  // Moves the canonical center to `target`, establishing the mixed-canonical
  // gauge if the state has none yet.
  void canonicalize(std::size_t target) {
    if (target >= n_) throw std::out_of_range("canonicalize: bad center");
    if (!center_) {
      for (std::size_t c = 0; c < target; ++c) left_orthonormalize(c);
      for (std::size_t c = n_ - 1; c > target; --c) right_orthonormalize(c);
      center_ = target;
      return;
    }
    while (*center_ < target) {
      left_orthonormalize(*center_);
      ++*center_;
    }
    while (*center_ > target) {
      right_orthonormalize(*center_);
      --*center_;
    }
  }

  // Applies a d x d operator to one site. Non-unitary operators are absorbed
  // at the canonical center so the gauge stays valid.
  void apply_one_site(std::size_t q, const Mat& op, bool unitary = true) {
    if (q >= n_) throw std::out_of_range("apply_one_site: site out of range");
    if (op.rows() != static_cast<Eigen::Index>(d_) ||
        op.cols() != static_cast<Eigen::Index>(d_)) {
      throw std::invalid_argument("apply_one_site: operator dimension");
    }
    if (!unitary && (!center_ || *center_ != q)) canonicalize(q);
    DenseTensor o({d_, d_});
    Eigen::Map<MatrixXcdR>(o.data(), d_, d_) = op;
    DenseTensor res = contract(o, sites_[q], {{1, 1}});  // (s, Dl, Dr)
    sites_[q] = permute(res, {1, 0, 2});
  }

  // Applies a d^2 x d^2 operator to sites (q, q+1) and splits back with a
  // rank-`max_bond` SVD. Returns the kept squared-weight fraction of the
  // truncation. `absorb_right` selects which side keeps the singular values
  // (and hence where the canonical center lands).
  double apply_two_site(std::size_t q, const Mat& op, std::size_t max_bond,
                        double sv_floor = 0.0, bool absorb_right = true) {
    if (q + 1 >= n_) throw std::out_of_range("apply_two_site: bond out of range");
    const auto dd = static_cast<Eigen::Index>(d_ * d_);
    if (op.rows() != dd || op.cols() != dd) {
      throw std::invalid_argument("apply_two_site: operator dimension");
    }
    if (!center_) {
      canonicalize(q);
    } else if (*center_ < q) {
      canonicalize(q);
    } else if (*center_ > q + 1) {
      canonicalize(q + 1);
    }

    const std::size_t dl = sites_[q].extent(0);
    const std::size_t dr = sites_[q + 1].extent(2);
    DenseTensor theta = contract(sites_[q], sites_[q + 1], {{2, 0}});
    // theta: (dl, s0, s1, dr) -> apply op over the joint physical index.
    DenseTensor o({d_ * d_, d_ * d_});
    Eigen::Map<MatrixXcdR>(o.data(), dd, dd) = op;
    DenseTensor applied = contract(o, theta, {{1, 1}, {2, 2}});  // (s0 s1), dl, dr
    applied.reshape_inplace({d_, d_, dl, dr});
    DenseTensor mat = permute(applied, {2, 0, 1, 3});
    mat.reshape_inplace({dl * d_, d_ * dr});

    SvdResult svd = truncated_svd(mat, max_bond, sv_floor);
    const std::size_t k = svd.s.size();
    if (absorb_right) {
      sites_[q] = svd.u.reshaped({dl, d_, k});
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < d_ * dr; ++j) {
          svd.vh[i * d_ * dr + j] *= svd.s[i];
        }
      }
      sites_[q + 1] = svd.vh.reshaped({k, d_, dr});
      center_ = q + 1;
    } else {
      sites_[q + 1] = svd.vh.reshaped({k, d_, dr});
      for (std::size_t i = 0; i < dl * d_; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          svd.u[i * k + j] *= svd.s[j];
        }
      }
      sites_[q] = svd.u.reshaped({dl, d_, k});
      center_ = q;
    }
    return 1.0 - svd.discarded_weight;
  }

  double frobenius_norm() const {
    if (center_) return sites_[*center_].frobenius_norm();
    return std::sqrt(std::abs(overlap_with(*this)));
  }

  void normalize() {
    const double nrm = frobenius_norm();
    if (nrm == 0.0) throw std::runtime_error("normalize: zero state");
    const cplx f(1.0 / nrm, 0.0);
    if (center_) {
      sites_[*center_].scale(f);
    } else {
      sites_[0].scale(f);
    }
  }

  void scale(cplx factor) {
    if (center_) {
      sites_[*center_].scale(factor);
    } else {
      sites_[0].scale(factor);
    }
  }

  // Tr(rho) for phys_dim 4: contraction with the identity superket per site.
  cplx trace() const {
    if (d_ != 4) throw std::logic_error("trace: phys_dim 4 only");
    Eigen::RowVectorXcd w(4);
    w << 1, 0, 0, 1;
    return closed_contraction([&](std::size_t) { return w; });
  }

  // <psi|O|psi>/<psi|psi> (phys_dim 2) or Tr(O rho)/Tr(rho) (phys_dim 4).
  // The imaginary part is discarded when below `imag_tol`, else this throws:
  // a large imaginary part signals state corruption.
  double expectation(const PauliString& obs, double imag_tol = 1e-8) const {
    if (!obs.factors.empty() && obs.max_site() >= n_) {
      throw std::out_of_range("expectation: observable site out of range");
    }
    cplx num, den;
    if (d_ == 4) {
      num = closed_contraction([&](std::size_t q) {
        const Mat& p = pauli_matrix(obs.at_site(q));
        Eigen::RowVectorXcd w(4);
        // weight for superket component (i,j) is P_{j,i}
        w << p(0, 0), p(1, 0), p(0, 1), p(1, 1);
        return w;
      });
      den = trace();
    } else {
      num = sandwich(obs);
      den = sandwich(PauliString{});
    }
    if (std::abs(den) == 0.0) throw std::runtime_error("expectation: zero norm");
    const cplx val = num / den;
    if (std::abs(val.imag()) > imag_tol) {
      throw std::runtime_error("expectation: non-Hermitian result " +
                               std::to_string(val.imag()) + " for " +
                               obs.to_string());
    }
    return val.real();
  }

  double expectation(const Observable& obs, double imag_tol = 1e-8) const {
    double v = obs.constant;
    for (const auto& [coef, s] : obs.terms) v += coef * expectation(s, imag_tol);
    return v;
  }

  // MPO entanglement entropy at bond l (0 < l < n): -sum p_i ln p_i with
  // p_i the normalized squared singular values across the bond.
  double bond_entropy(std::size_t l) {
    const auto s = bond_spectrum(l);
    return entropy_from_singular_values(s);
  }

  double max_entropy() {
    double m = 0.0;
    for (double e : all_bond_entropies()) m = std::max(m, e);
    return m;
  }

  // Entropies for bonds 1..n-1, computed in one canonical sweep.
  std::vector<double> all_bond_entropies() {
    std::vector<double> out;
    if (n_ == 1) return out;
    canonicalize(0);
    for (std::size_t c = 0; c + 1 < n_; ++c) {
      const std::size_t dl = sites_[c].extent(0);
      const std::size_t dr = sites_[c].extent(2);
      DenseTensor m = sites_[c].reshaped({dl * d_, dr});
      SvdResult svd = truncated_svd(m, dr);
      out.push_back(entropy_from_singular_values(svd.s));
      const std::size_t k = svd.s.size();
      sites_[c] = svd.u.reshaped({dl, d_, k});
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < dr; ++j) svd.vh[i * dr + j] *= svd.s[i];
      }
      DenseTensor sv = svd.vh.reshaped({k, dr});
      sites_[c + 1] = contract(sv, sites_[c + 1], {{1, 0}});
      center_ = c + 1;
    }
    return out;
  }

  // Sweeps an SVD truncation to bond cap D_max, renormalizes the Frobenius
  // norm to 1, and returns the product of kept squared-weight fractions.
  double compress(std::size_t d_max, double sv_floor = 0.0) {
    if (d_max < 1) throw std::invalid_argument("compress: D_max >= 1");
    canonicalize(n_ - 1);
    double kept = 1.0;
    for (std::size_t c = n_ - 1; c > 0; --c) {
      const std::size_t dl = sites_[c].extent(0);
      const std::size_t dr = sites_[c].extent(2);
      DenseTensor m = sites_[c].reshaped({dl, d_ * dr});
      SvdResult svd = truncated_svd(m, d_max, sv_floor);
      kept *= 1.0 - svd.discarded_weight;
      const std::size_t k = svd.s.size();
      sites_[c] = svd.vh.reshaped({k, d_, dr});
      for (std::size_t i = 0; i < dl; ++i) {
        for (std::size_t j = 0; j < k; ++j) svd.u[i * k + j] *= svd.s[j];
      }
      DenseTensor us = svd.u.reshaped({dl, k});
      sites_[c - 1] = contract(sites_[c - 1], us, {{2, 0}});
      center_ = c - 1;
    }
    normalize();
    return kept;
  }

  // Frobenius inner product <this|other> (conjugate on `this`).
  cplx overlap_with(const TnState& other) const {
    if (other.n_ != n_ || other.d_ != d_) {
      throw std::invalid_argument("overlap: shape mismatch");
    }
    Eigen::MatrixXcd env = Eigen::MatrixXcd::Ones(1, 1);
    for (std::size_t q = 0; q < n_; ++q) {
      const auto& a = sites_[q];         // bra side, conjugated
      const auto& b = other.sites_[q];   // ket side
      const std::size_t al = a.extent(0), ar = a.extent(2);
      const std::size_t bl = b.extent(0), br = b.extent(2);
      Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(ar, br);
      for (std::size_t s = 0; s < d_; ++s) {
        Eigen::MatrixXcd as(al, ar), bs(bl, br);
        for (std::size_t i = 0; i < al; ++i)
          for (std::size_t j = 0; j < ar; ++j)
            as(i, j) = std::conj(a[(i * d_ + s) * ar + j]);
        for (std::size_t i = 0; i < bl; ++i)
          for (std::size_t j = 0; j < br; ++j)
            bs(i, j) = b[(i * d_ + s) * br + j];
        next.noalias() += as.transpose() * env * bs;
      }
      env = std::move(next);
    }
    return env(0, 0);
  }

  // Full contraction to a dense vector of size phys_dim^n (small n only).
  Eigen::VectorXcd to_dense(std::size_t max_entries = (1u << 26)) const {
    std::size_t total = 1;
    for (std::size_t q = 0; q < n_; ++q) {
      total *= d_;
      if (total > max_entries) {
        throw std::runtime_error("to_dense: state too large");
      }
    }
    DenseTensor acc = sites_[0].reshaped({d_, sites_[0].extent(2)});
    std::size_t phys = d_;
    for (std::size_t q = 1; q < n_; ++q) {
      acc = contract(acc, sites_[q], {{1, 0}});
      phys *= d_;
      acc.reshape_inplace({phys, sites_[q].extent(2)});
    }
    Eigen::VectorXcd out(static_cast<Eigen::Index>(phys));
    for (std::size_t i = 0; i < phys; ++i) out(static_cast<Eigen::Index>(i)) = acc[i];
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    const char magic[4] = {'N', 'Z', 'T', 'N'};
    f.write(magic, 4);
    write_u32(f, 1);
    write_u64(f, n_);
    write_u64(f, d_);
    const std::int64_t c = center_ ? static_cast<std::int64_t>(*center_) : -1;
    f.write(reinterpret_cast<const char*>(&c), sizeof(c));
    f.write(reinterpret_cast<const char*>(&log_fidelity_), sizeof(double));
    for (const auto& t : sites_) {
      write_u64(f, t.extent(0));
      write_u64(f, t.extent(1));
      write_u64(f, t.extent(2));
      f.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(cplx)));
    }
    if (!f) throw std::runtime_error("write failed: " + path);
  }

  static TnState load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (std::string(magic, 4) != "NZTN") {
      throw std::runtime_error("bad state file magic");
    }
    if (read_u32(f) != 1) throw std::runtime_error("unsupported state version");
    const std::size_t n = read_u64(f);
    const std::size_t d = read_u64(f);
    std::int64_t c;
    f.read(reinterpret_cast<char*>(&c), sizeof(c));
    double lf;
    f.read(reinterpret_cast<char*>(&lf), sizeof(lf));
    TnState st(n, d);
    for (std::size_t q = 0; q < n; ++q) {
      const std::size_t dl = read_u64(f), dd = read_u64(f), dr = read_u64(f);
      if (dd != d) throw std::runtime_error("corrupt state file");
      DenseTensor t({dl, dd, dr});
      f.read(reinterpret_cast<char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(cplx)));
      st.sites_[q] = std::move(t);
    }
    if (!f) throw std::runtime_error("truncated state file: " + path);
    st.center_ = c >= 0 ? std::optional<std::size_t>(static_cast<std::size_t>(c))
                        : std::nullopt;
    st.log_fidelity_ = lf;
    st.validate();
    return st;
  }

  void validate() const {
    if (sites_.size() != n_) throw std::runtime_error("TnState: site count");
    for (std::size_t q = 0; q < n_; ++q) {
      if (sites_[q].rank() != 3 || sites_[q].extent(1) != d_) {
        throw std::runtime_error("TnState: malformed site tensor");
      }
      if (q + 1 < n_ && sites_[q].extent(2) != sites_[q + 1].extent(0)) {
        throw std::runtime_error("TnState: bond mismatch");
      }
    }
    if (sites_.front().extent(0) != 1 || sites_.back().extent(2) != 1) {
      throw std::runtime_error("TnState: boundary bonds must have extent 1");
    }
  }

 private:
  static double entropy_from_singular_values(const std::vector<double>& s) {
    double total = 0.0;
    for (double v : s) total += v * v;
    if (total <= 0.0) return 0.0;
    double ent = 0.0;
    for (double v : s) {
      const double p = v * v / total;
      if (p > 0.0) ent -= p * std::log(p);
    }
    return ent;
  }

  std::vector<double> bond_spectrum(std::size_t l) {
    if (l == 0 || l >= n_) throw std::out_of_range("bond index");
    canonicalize(l - 1);
    const std::size_t dl = sites_[l - 1].extent(0);
    const std::size_t dr = sites_[l - 1].extent(2);
    DenseTensor m = sites_[l - 1].reshaped({dl * d_, dr});
    return truncated_svd(m, dr).s;
  }

  void left_orthonormalize(std::size_t c) {
    const std::size_t dl = sites_[c].extent(0);
    const std::size_t dr = sites_[c].extent(2);
    auto [q, r] = qr_thin(sites_[c].reshaped({dl * d_, dr}));
    const std::size_t k = q.extent(1);
    sites_[c] = q.reshaped({dl, d_, k});
    sites_[c + 1] = contract(r, sites_[c + 1], {{1, 0}});
  }

  void right_orthonormalize(std::size_t c) {
    const std::size_t dl = sites_[c].extent(0);
    const std::size_t dr = sites_[c].extent(2);
    auto [l, q] = lq_thin(sites_[c].reshaped({dl, d_ * dr}));
    const std::size_t k = q.extent(0);
    sites_[c] = q.reshaped({k, d_, dr});
    sites_[c - 1] = contract(sites_[c - 1], l, {{2, 0}});
  }

  template <typename WeightFn>
  cplx closed_contraction(WeightFn&& weight) const {
    Eigen::RowVectorXcd env = Eigen::RowVectorXcd::Ones(1);
    for (std::size_t q = 0; q < n_; ++q) {
      const auto& t = sites_[q];
      const std::size_t dl = t.extent(0), dr = t.extent(2);
      const Eigen::RowVectorXcd w = weight(q);
      Eigen::MatrixXcd site_mat = Eigen::MatrixXcd::Zero(dl, dr);
      for (std::size_t s = 0; s < d_; ++s) {
        if (w(static_cast<Eigen::Index>(s)) == cplx(0.0, 0.0)) continue;
        for (std::size_t i = 0; i < dl; ++i) {
          for (std::size_t j = 0; j < dr; ++j) {
            site_mat(i, j) += w(static_cast<Eigen::Index>(s)) *
                              t[(i * d_ + s) * dr + j];
          }
        }
      }
      env = env * site_mat;
    }
    return env(0);
  }

  // <psi| P |psi> for phys_dim 2.
  cplx sandwich(const PauliString& obs) const {
    Eigen::MatrixXcd env = Eigen::MatrixXcd::Ones(1, 1);
    for (std::size_t q = 0; q < n_; ++q) {
      const auto& t = sites_[q];
      const std::size_t dl = t.extent(0), dr = t.extent(2);
      const Mat& p = pauli_matrix(obs.at_site(q));
      std::vector<Eigen::MatrixXcd> slices(d_, Eigen::MatrixXcd(dl, dr));
      for (std::size_t s = 0; s < d_; ++s) {
        for (std::size_t i = 0; i < dl; ++i)
          for (std::size_t j = 0; j < dr; ++j)
            slices[s](i, j) = t[(i * d_ + s) * dr + j];
      }
      Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(dr, dr);
      for (std::size_t sp = 0; sp < d_; ++sp) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dl, dr);
        for (std::size_t s = 0; s < d_; ++s) {
          if (p(sp, s) != cplx(0.0, 0.0)) acc += p(sp, s) * slices[s];
        }
        next.noalias() += slices[sp].adjoint() * env * acc;
      }
      env = std::move(next);
    }
    return env(0, 0);
  }

  static void write_u32(std::ofstream& f, std::uint32_t v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  static void write_u64(std::ofstream& f, std::uint64_t v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  static std::uint32_t read_u32(std::ifstream& f) {
    std::uint32_t v;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  }
  static std::uint64_t read_u64(std::ifstream& f) {
    std::uint64_t v;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  }

  std::size_t n_ = 0;
  std::size_t d_ = 2;
  std::vector<DenseTensor> sites_;
  std::optional<std::size_t> center_;
  double log_fidelity_ = 0.0;
};

}  // namespace nzne
