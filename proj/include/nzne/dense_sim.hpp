#pragma once

// Dense reference simulators: exact density-matrix evolution of noisy
// circuits, noiseless statevector evolution, statevector Kraus-trajectory
// sampling, and the true-fidelity comparison against tensor network states.
//
// Basis convention: site 0 is the most significant digit, matching the kron
// order of pauli.hpp and TnState::to_dense(). Density matrices are stored as
// superkets with the per-site (i, j) -> 2i + j linearization.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nzne/channels.hpp"
#include "nzne/circuits.hpp"
#include "nzne/stats.hpp"
#include "nzne/tn_state.hpp"

namespace nzne {

struct DenseCaps {
  int density_qubits = 12;     // 4^12 superket entries by default
  int statevector_qubits = 26;
};

enum class DenseMode { DensityMatrix, Statevector };

struct DenseState {
  DenseMode mode = DenseMode::Statevector;
  int n_qubits = 0;
  Eigen::VectorXcd entries;

  static DenseState statevector(const std::vector<int>& bits,
                                const DenseCaps& caps = {}) {
    const int n = static_cast<int>(bits.size());
    if (n > caps.statevector_qubits) {
      throw std::invalid_argument("statevector: qubit count over cap");
    }
    DenseState st;
    st.mode = DenseMode::Statevector;
    st.n_qubits = n;
    st.entries = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
    std::size_t idx = 0;
    for (int b : bits) idx = idx * 2 + static_cast<std::size_t>(b);
    st.entries(static_cast<Eigen::Index>(idx)) = 1.0;
    return st;
  }

  static DenseState density(const std::vector<int>& bits,
                            const DenseCaps& caps = {}) {
    const int n = static_cast<int>(bits.size());
    if (n > caps.density_qubits) {
      throw std::invalid_argument("density matrix: qubit count over cap");
    }
    DenseState st;
    st.mode = DenseMode::DensityMatrix;
    st.n_qubits = n;
    st.entries = Eigen::VectorXcd::Zero(Eigen::Index{1} << (2 * n));
    std::size_t idx = 0;
    for (int b : bits) idx = idx * 4 + static_cast<std::size_t>(3 * b);
    st.entries(static_cast<Eigen::Index>(idx)) = 1.0;
    return st;
  }

  int digit_bits() const { return mode == DenseMode::Statevector ? 1 : 2; }

  cplx trace() const {
    if (mode != DenseMode::DensityMatrix) {
      throw std::logic_error("trace: density mode only");
    }
    cplx tr = 0.0;
    const std::size_t ket_dim = std::size_t{1} << n_qubits;
    for (std::size_t i = 0; i < ket_dim; ++i) {
      std::size_t idx = 0;
      for (int k = n_qubits - 1; k >= 0; --k) {
        const std::size_t bk = (i >> k) & 1u;
        idx = idx * 4 + 3 * bk;
      }
      tr += entries(static_cast<Eigen::Index>(idx));
    }
    return tr;
  }

  double hermiticity_defect() const {
    if (mode != DenseMode::DensityMatrix) return 0.0;
    double worst = 0.0;
    const std::size_t dim = static_cast<std::size_t>(entries.size());
    for (std::size_t v = 0; v < dim; ++v) {
      std::size_t vt = 0;
      std::size_t rest = v;
      std::size_t mul = 1;
      for (int k = 0; k < n_qubits; ++k) {
        const std::size_t s = rest & 3u;
        rest >>= 2;
        vt += ((s & 1u) * 2 + (s >> 1)) * mul;  // (i,j) -> (j,i)
        mul <<= 2;
      }
      worst = std::max(worst, std::abs(entries(static_cast<Eigen::Index>(v)) -
                                       std::conj(entries(
                                           static_cast<Eigen::Index>(vt)))));
    }
    return worst;
  }
};

namespace detail {

// Applies a local operator on one or two sites of a dense vector whose
// per-site digit width is `w` bits (1 for amplitudes, 2 for superkets).
inline void apply_local_1(Eigen::VectorXcd& v, int n_sites, int w, int site,
                          const Mat& op) {
  const int d = 1 << w;
  const int shift = (n_sites - 1 - site) * w;
  const std::size_t dim = static_cast<std::size_t>(v.size());
  const std::size_t stride = std::size_t{1} << shift;
  const std::size_t low_mask = stride - 1;
  std::vector<cplx> buf(d);
  for (std::size_t u = 0; u < dim >> w; ++u) {
    const std::size_t base = ((u & ~low_mask) << w) | (u & low_mask);
    for (int s = 0; s < d; ++s) buf[s] = v(static_cast<Eigen::Index>(base + stride * s));
    for (int s = 0; s < d; ++s) {
      cplx acc = 0.0;
      for (int t = 0; t < d; ++t) acc += op(s, t) * buf[t];
      v(static_cast<Eigen::Index>(base + stride * s)) = acc;
    }
  }
}

inline void apply_local_2(Eigen::VectorXcd& v, int n_sites, int w, int site_a,
                          int site_b, const Mat& op) {
  const int d = 1 << w;
  const std::size_t sa = std::size_t{1} << ((n_sites - 1 - site_a) * w);
  const std::size_t sb = std::size_t{1} << ((n_sites - 1 - site_b) * w);
  const std::size_t lo = std::min(sa, sb), hi = std::max(sa, sb);
  const std::size_t dim = static_cast<std::size_t>(v.size());
  const std::size_t lo_mask = lo - 1;
  const std::size_t n_mid = hi / (lo << w);  // combinations between the fields
  std::vector<cplx> buf(static_cast<std::size_t>(d) * d);
  for (std::size_t u = 0; u < dim >> (2 * w); ++u) {
    const std::size_t low = u & lo_mask;
    const std::size_t mid = (u / lo) % n_mid;
    const std::size_t high = u / (lo * n_mid);
    const std::size_t base = low | (mid * (lo << w)) | (high * (hi << w));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        buf[static_cast<std::size_t>(a) * d + b] =
            v(static_cast<Eigen::Index>(base + sa * a + sb * b));
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        cplx acc = 0.0;
        const int row = a * d + b;
        for (int c = 0; c < d * d; ++c) acc += op(row, c) * buf[c];
        v(static_cast<Eigen::Index>(base + sa * a + sb * b)) = acc;
      }
    }
  }
}

inline void apply_operator(DenseState& st, const Gate& g, const Mat& op) {
  const int w = st.digit_bits();
  if (g.arity() == 1) {
    apply_local_1(st.entries, st.n_qubits, w, g.targets[0], op);
  } else {
    apply_local_2(st.entries, st.n_qubits, w, g.targets[0], g.targets[1], op);
  }
}

}  // namespace detail

// Per-gate Kraus choices for one trajectory: -1 marks identity channels.
// Only valid when every Kraus operator is a scalar multiple of a unitary,
// which makes the sampling probabilities state-independent.
inline std::vector<int> sample_kraus_choices(const Circuit& circ,
                                             const NoiseModel& noise,
                                             double lambda,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<int> choices;
  for (const auto& sc : circ.subcircuits) {
    for (const auto& g : sc) {
      const Channel ch = noise.channel_for(g.gate_class, g.arity(), lambda);
      if (ch.is_identity()) {
        choices.push_back(-1);
        continue;
      }
      std::vector<double> probs;
      probs.reserve(ch.kraus.size());
      for (const auto& k : ch.kraus) {
        const Mat kk = k.adjoint() * k;
        const double p = kk.trace().real() / static_cast<double>(kk.rows());
        if ((kk - p * Mat::Identity(kk.rows(), kk.cols())).cwiseAbs().maxCoeff() >
            1e-12) {
          throw std::invalid_argument(
              "sample_kraus_choices: Kraus operator is not scalar-unitary");
        }
        probs.push_back(p);
      }
      double r = unif(rng);
      int pick = static_cast<int>(probs.size()) - 1;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (r < probs[i]) {
          pick = static_cast<int>(i);
          break;
        }
        r -= probs[i];
      }
      choices.push_back(pick);
    }
  }
  return choices;
}

// Exact density-matrix evolution: each gate's superoperator followed by its
// noise channel's superoperator, no truncation anywhere.
inline DenseState evolve_density(const Circuit& circ, const NoiseModel& noise,
                                 double lambda, const DenseCaps& caps = {},
                                 double check_tol = 1e-10) {
  noise.check_lambda(lambda);
  DenseState st = DenseState::density(circ.initial_bits, caps);
  for (const auto& sc : circ.subcircuits) {
    for (const auto& g : sc) {
      const Mat gate_s = unitary_superoperator(g.matrix);
      const Channel ch = noise.channel_for(g.gate_class, g.arity(), lambda);
      const Mat op = ch.is_identity() ? gate_s : to_superoperator(ch) * gate_s;
      detail::apply_operator(st, g, op);
    }
    if (std::abs(st.trace() - cplx(1.0, 0.0)) > check_tol) {
      throw std::runtime_error("evolve_density: trace drift beyond tolerance");
    }
    if (st.hermiticity_defect() > check_tol) {
      throw std::runtime_error("evolve_density: hermiticity loss");
    }
  }
  return st;
}

inline DenseState run_statevector(const Circuit& circ,
                                  const DenseCaps& caps = {}) {
  DenseState st = DenseState::statevector(circ.initial_bits, caps);
  for (const auto& sc : circ.subcircuits) {
    for (const auto& g : sc) detail::apply_operator(st, g, g.matrix);
  }
  return st;
}

struct TrajectoryOptions {
  std::uint64_t seed = 0;
  const std::vector<int>* forced_choices = nullptr;  // per-gate Kraus picks
};

// One stochastic Kraus unraveling of the noisy circuit. After each gate one
// Kraus operator of its channel is sampled and applied with renormalization;
// state-independent probabilities are precomputed when every Kraus operator
// is a scalar multiple of a unitary, otherwise p_i = <psi|K_i^dag K_i|psi>.
inline DenseState sample_trajectory(const Circuit& circ,
                                    const NoiseModel& noise, double lambda,
                                    const TrajectoryOptions& opts,
                                    const DenseCaps& caps = {}) {
  noise.check_lambda(lambda);
  DenseState st = DenseState::statevector(circ.initial_bits, caps);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t gate_index = 0;
  for (const auto& sc : circ.subcircuits) {
    for (const auto& g : sc) {
      detail::apply_operator(st, g, g.matrix);
      const Channel ch = noise.channel_for(g.gate_class, g.arity(), lambda);
      if (ch.is_identity()) {
        if (opts.forced_choices) ++gate_index;
        continue;
      }
      int pick = -1;
      if (opts.forced_choices) {
        pick = opts.forced_choices->at(gate_index++);
        if (pick < 0) {
          throw std::invalid_argument("forced choice missing for noisy gate");
        }
      } else {
        // State-dependent sampling; reduces to constants for scalar-unitary
        // Kraus sets but stays correct in general.
        double r = unif(rng);
        Eigen::VectorXcd saved = st.entries;
        for (std::size_t i = 0; i < ch.kraus.size(); ++i) {
          detail::apply_operator(st, g, ch.kraus[i]);
          const double p = st.entries.squaredNorm();
          if (r < p || i + 1 == ch.kraus.size()) {
            pick = static_cast<int>(i);
            break;
          }
          r -= p;
          st.entries = saved;
        }
        st.entries.normalize();
        continue;
      }
      detail::apply_operator(st, g, ch.kraus[static_cast<std::size_t>(pick)]);
      st.entries.normalize();
    }
  }
  return st;
}

// <O> on a dense state (trace-renormalized in density mode).
inline double dense_expectation(const DenseState& st, const Observable& obs,
                                double imag_tol = 1e-8) {
  auto pauli_value = [&](const PauliString& s) -> cplx {
    if (st.mode == DenseMode::Statevector) {
      Eigen::VectorXcd tmp = st.entries;
      for (const auto& [site, p] : s.factors) {
        if (p == Pauli::I) continue;
        detail::apply_local_1(tmp, st.n_qubits, 1, static_cast<int>(site),
                              pauli_matrix(p));
      }
      return st.entries.dot(tmp) / st.entries.squaredNorm();
    }
    // Tr(P rho)/Tr(rho): fold per-site weights over the superket.
    Eigen::VectorXcd cur = st.entries;
    for (int site = st.n_qubits - 1; site >= 0; --site) {
      const Mat& p = pauli_matrix(s.at_site(static_cast<std::size_t>(site)));
      Eigen::Vector4cd w;
      w << p(0, 0), p(1, 0), p(0, 1), p(1, 1);
      const std::size_t next_dim = static_cast<std::size_t>(cur.size()) / 4;
      Eigen::VectorXcd nxt(static_cast<Eigen::Index>(next_dim));
      for (std::size_t m = 0; m < next_dim; ++m) {
        cplx acc = 0.0;
        for (int t = 0; t < 4; ++t) {
          acc += w(t) * cur(static_cast<Eigen::Index>(4 * m + t));
        }
        nxt(static_cast<Eigen::Index>(m)) = acc;
      }
      cur = std::move(nxt);
    }
    return cur(0) / st.trace();
  };
  cplx v = obs.constant;
  for (const auto& [coef, s] : obs.terms) v += coef * pauli_value(s);
  if (std::abs(v.imag()) > imag_tol) {
    throw std::runtime_error("dense_expectation: non-Hermitian result");
  }
  return v.real();
}

// Vectorizes a TnState into a dense superket (pure states become |psi><psi|).
inline Eigen::VectorXcd tn_to_dense_superket(const TnState& state,
                                             std::size_t max_entries = (1u << 26)) {
  if (state.phys_dim() == 4) return state.to_dense(max_entries);
  const Eigen::VectorXcd psi = state.to_dense(max_entries);
  const std::size_t ket_dim = static_cast<std::size_t>(psi.size());
  if (ket_dim * ket_dim > max_entries) {
    throw std::runtime_error("tn_to_dense_superket: state too large");
  }
  const int n = state.n_sites() > 0 ? static_cast<int>(state.n_sites()) : 0;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(
      static_cast<Eigen::Index>(ket_dim * ket_dim));
  for (std::size_t i = 0; i < ket_dim; ++i) {
    for (std::size_t j = 0; j < ket_dim; ++j) {
      std::size_t idx = 0;
      for (int k = n - 1; k >= 0; --k) {
        const std::size_t ik = (i >> k) & 1u, jk = (j >> k) & 1u;
        idx += (2 * ik + jk) << (2 * (n - 1 - k));
      }
      out(static_cast<Eigen::Index>(idx)) =
          psi(static_cast<Eigen::Index>(i)) *
          std::conj(psi(static_cast<Eigen::Index>(j)));
    }
  }
  return out;
}

// True fidelity |<rho~|rho>|^2 / (|rho~|^2 |rho|^2) between an approximate
// tensor network state and an exact density-matrix state.
inline double true_fidelity(const TnState& approx, const DenseState& exact) {
  if (exact.mode != DenseMode::DensityMatrix) {
    throw std::invalid_argument("true_fidelity: exact state must be density");
  }
  if (approx.n_sites() != static_cast<std::size_t>(exact.n_qubits)) {
    throw std::invalid_argument("true_fidelity: qubit count mismatch");
  }
  const Eigen::VectorXcd a = tn_to_dense_superket(approx);
  const cplx ip = a.dot(exact.entries);  // conjugates a
  const double na = a.squaredNorm(), nb = exact.entries.squaredNorm();
  if (na == 0.0 || nb == 0.0) throw std::runtime_error("true_fidelity: zero state");
  return std::norm(ip) / (na * nb);
}

struct TrajectoryMeanResult {
  std::map<std::string, Welford> stats;
  std::size_t n_samples = 0;
};

// Mean over seeded statevector trajectories; seeds are base_seed + index and
// per-thread blocks merge in block order, so the reduction is deterministic.
inline TrajectoryMeanResult trajectory_mean_statevector(
    const Circuit& circ, const NoiseModel& noise, double lambda,
    std::size_t n_samples, std::uint64_t base_seed,
    const ObservableSet& observables, int n_threads = 1,
    const DenseCaps& caps = {}) {
  n_threads = std::max(1, n_threads);
  std::vector<std::map<std::string, Welford>> partial(
      static_cast<std::size_t>(n_threads));
  const std::size_t block =
      (n_samples + static_cast<std::size_t>(n_threads) - 1) /
      static_cast<std::size_t>(n_threads);
  auto worker = [&](int tid) {
    const std::size_t lo = static_cast<std::size_t>(tid) * block;
    const std::size_t hi = std::min(n_samples, lo + block);
    auto& acc = partial[static_cast<std::size_t>(tid)];
    for (std::size_t s = lo; s < hi; ++s) {
      TrajectoryOptions opts;
      opts.seed = base_seed + s;
      const DenseState st = sample_trajectory(circ, noise, lambda, opts, caps);
      for (const auto& [name, obs] : observables) {
        acc[name].add(dense_expectation(st, obs));
      }
    }
  };
  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  TrajectoryMeanResult out;
  out.n_samples = n_samples;
  for (const auto& p : partial) {
    for (const auto& [name, w] : p) out.stats[name].merge(w);
  }
  return out;
}

}  // namespace nzne
