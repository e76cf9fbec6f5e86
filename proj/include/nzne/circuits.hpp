#pragma once

// Gate/circuit data model, a nearest-neighbor routing helper, and builders
// for the benchmark families (transverse-field Ising, Fermi-Hubbard with
// Jordan-Wigner encoding and fermionic swaps, XY chain) plus random 1D
// circuits. One subcircuit corresponds to one Trotter step (or one random
// layer) and defines the granularity of the partial-fidelity accounting.

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nzne/pauli.hpp"

namespace nzne {

struct Gate {
  Mat matrix;                 // 2x2 or 4x4, in the basis of `targets` order
  std::vector<int> targets;   // 1 or 2 qubit indices (adjacent for 2-qubit)
  std::string gate_class;     // noise-binding label
  std::optional<double> theta;

  int arity() const { return static_cast<int>(targets.size()); }

  void validate(int n_qubits) const {
    if (targets.empty() || targets.size() > 2) {
      throw std::invalid_argument("Gate: need 1 or 2 targets");
    }
    for (int t : targets) {
      if (t < 0 || t >= n_qubits) throw std::invalid_argument("Gate: target range");
    }
    const Eigen::Index d = arity() == 1 ? 2 : 4;
    if (matrix.rows() != d || matrix.cols() != d) {
      throw std::invalid_argument("Gate: matrix dimension");
    }
    if (targets.size() == 2) {
      if (targets[0] == targets[1]) {
        throw std::invalid_argument("Gate: repeated target");
      }
      if (std::abs(targets[0] - targets[1]) != 1) {
        throw std::invalid_argument("Gate: two-qubit targets must be adjacent");
      }
    }
    if ((matrix.adjoint() * matrix - Mat::Identity(d, d)).cwiseAbs().maxCoeff() >
        1e-12) {
      throw std::invalid_argument("Gate '" + gate_class + "' is not unitary");
    }
  }
};

struct CircuitMetadata {
  std::string model;  // tfim | fhm | xym | random1d | custom
  double dt = 0.0;
  int steps = 0;
  std::map<std::string, double> params;
};

struct Circuit {
  int n_qubits = 0;
  std::vector<int> initial_bits;            // by chain position at time 0
  std::vector<std::vector<Gate>> subcircuits;
  ObservableSet observables;
  CircuitMetadata meta;

  std::size_t total_gates() const {
    std::size_t n = 0;
    for (const auto& sc : subcircuits) n += sc.size();
    return n;
  }

  std::size_t two_qubit_gates() const {
    std::size_t n = 0;
    for (const auto& sc : subcircuits)
      for (const auto& g : sc)
        if (g.arity() == 2) ++n;
    return n;
  }

  void validate() const {
    if (n_qubits < 1) throw std::invalid_argument("Circuit: n_qubits");
    if (subcircuits.empty()) {
      throw std::invalid_argument("Circuit: need at least one subcircuit");
    }
    if (initial_bits.size() != static_cast<std::size_t>(n_qubits)) {
      throw std::invalid_argument("Circuit: initial_bits size");
    }
    for (const auto& sc : subcircuits)
      for (const auto& g : sc) g.validate(n_qubits);
    for (const auto& [name, obs] : observables) {
      if (!obs.terms.empty() &&
          obs.max_site() >= static_cast<std::size_t>(n_qubits)) {
        throw std::invalid_argument("Circuit: observable '" + name +
                                    "' out of range");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Common gate matrices.

inline Mat zz_rotation(double theta) {
  Mat m = Mat::Zero(4, 4);
  const cplx en = std::exp(cplx(0, -theta));
  const cplx ep = std::exp(cplx(0, theta));
  m(0, 0) = en;
  m(1, 1) = ep;
  m(2, 2) = ep;
  m(3, 3) = en;
  return m;
}

inline Mat x_rotation(double theta) {
  Mat m(2, 2);
  m << std::cos(theta), cplx(0, -std::sin(theta)), cplx(0, -std::sin(theta)),
      std::cos(theta);
  return m;
}

inline Mat z_rotation(double theta) {  // exp(-i theta Z)
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = std::exp(cplx(0, -theta));
  m(1, 1) = std::exp(cplx(0, theta));
  return m;
}

inline Mat hadamard() {
  Mat m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

inline Mat cx_gate() {  // control = first index
  Mat m = Mat::Identity(4, 4);
  m(2, 2) = 0;
  m(3, 3) = 0;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

inline Mat swap_gate() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = 1;
  return m;
}

inline Mat fswap_gate() {
  Mat m = swap_gate();
  m(3, 3) = -1;
  return m;
}

// exp(i theta (XX + YY)): identity on the even-parity subspace, a rotation on
// {|01>, |10>}. Used for hopping terms (theta > 0) and XY evolution.
inline Mat xxyy_rotation(double theta) {
  Mat m = Mat::Identity(4, 4);
  m(1, 1) = std::cos(2 * theta);
  m(2, 2) = std::cos(2 * theta);
  m(1, 2) = cplx(0, std::sin(2 * theta));
  m(2, 1) = cplx(0, std::sin(2 * theta));
  return m;
}

// ---------------------------------------------------------------------------
// Nearest-neighbor routing. Tracks where each logical label (lattice qubit or
// fermionic mode) currently sits on the chain; emits swap gates to bring two
// labels together and leaves them at their new positions. With the fermionic
// flavor the swaps preserve the Jordan-Wigner encoding, so two-mode gates on
// chain-adjacent modes never need explicit Z strings.

class ChainRouter {
 public:
  ChainRouter(std::vector<int> initial_order, bool fermionic)
      : order_(std::move(initial_order)), fermionic_(fermionic) {
    pos_.assign(order_.size(), -1);
    for (std::size_t p = 0; p < order_.size(); ++p) {
      const int label = order_[p];
      if (label < 0 || static_cast<std::size_t>(label) >= order_.size() ||
          pos_[label] != -1) {
        throw std::invalid_argument("ChainRouter: invalid initial order");
      }
      pos_[label] = static_cast<int>(p);
    }
  }

  static ChainRouter identity(std::size_t n, bool fermionic) {
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    return ChainRouter(std::move(order), fermionic);
  }

  int position_of(int label) const { return pos_.at(label); }
  const std::vector<int>& order() const { return order_; }

  // Emits swaps into `out` until labels a and b sit on neighboring chain
  // positions; the two labels walk toward each other.
  void make_adjacent(int a, int b, std::vector<Gate>& out) {
    int pa = pos_.at(a), pb = pos_.at(b);
    if (pa == pb) throw std::invalid_argument("make_adjacent: same label");
    while (std::abs(pa - pb) > 1) {
      if (pa > pb) std::swap(pa, pb);
      swap_positions(pb - 1, pb, out);
      pb -= 1;
      if (pb - pa > 1) {
        swap_positions(pa, pa + 1, out);
        pa += 1;
      }
      pa = pos_.at(a);
      pb = pos_.at(b);
    }
  }

  // Emits a two-qubit gate on the labels' (adjacent) positions. The matrix is
  // given in (a, b) order; targets may come out in descending chain order and
  // the appliers reindex orientation-sensitive gates at application time.
  void apply_two(int a, int b, const Mat& m, const std::string& cls,
                 std::optional<double> theta, std::vector<Gate>& out) {
    make_adjacent(a, b, out);
    Gate g;
    g.targets = {pos_.at(a), pos_.at(b)};
    g.matrix = m;
    g.gate_class = cls;
    g.theta = theta;
    out.push_back(std::move(g));
  }

  void apply_one(int a, const Mat& m, const std::string& cls,
                 std::optional<double> theta, std::vector<Gate>& out) {
    Gate g;
    g.targets = {pos_.at(a)};
    g.matrix = m;
    g.gate_class = cls;
    g.theta = theta;
    out.push_back(std::move(g));
  }

 private:
  void swap_positions(int p, int q, std::vector<Gate>& out) {
    // p and q = p + 1
    Gate g;
    g.targets = {p, q};
    g.matrix = fermionic_ ? fswap_gate() : swap_gate();
    g.gate_class = fermionic_ ? "fswap" : "swap";
    out.push_back(std::move(g));
    std::swap(order_[p], order_[q]);
    pos_[order_[p]] = p;
    pos_[order_[q]] = q;
  }

  std::vector<int> order_;  // order_[position] = label
  std::vector<int> pos_;    // pos_[label] = position
  bool fermionic_;
};

// ---------------------------------------------------------------------------
// Transverse-field Ising model: H = J sum_<ij> Z_i Z_j + h sum_j X_j on a
// rows x cols lattice, second-order Trotter with the symmetric
// ZZ/2 - X - ZZ/2 splitting and half-steps merged across steps. Qubits are
// indexed row-major, so a 2 x 7 lattice yields two blocks of 7 consecutive
// chain qubits; lattice edges off the chain are routed with swap gates.

struct TfimOptions {
  bool cat_gate_set = false;  // compile into {Z(theta), H, CX}
};

inline Circuit build_tfim(int rows, int cols, double J, double h, double dt,
                          int steps, bool periodic,
                          const TfimOptions& opts = {}) {
  if (rows < 1 || cols < 1 || rows * cols < 2) {
    throw std::invalid_argument("build_tfim: invalid lattice");
  }
  if (steps < 1) throw std::invalid_argument("build_tfim: steps >= 1");
  const int n = rows * cols;
  auto qubit = [&](int r, int c) { return r * cols + c; };

  std::set<std::pair<int, int>> edges;
  auto add_edge = [&](int a, int b) {
    if (a == b) return;
    edges.insert({std::min(a, b), std::max(a, b)});
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) add_edge(qubit(r, c), qubit(r, c + 1));
      else if (periodic && cols > 1) add_edge(qubit(r, c), qubit(r, 0));
      if (r + 1 < rows) add_edge(qubit(r, c), qubit(r + 1, c));
      else if (periodic && rows > 1) add_edge(qubit(r, c), qubit(0, c));
    }
  }

  ChainRouter router = ChainRouter::identity(n, /*fermionic=*/false);
  Circuit circ;
  circ.n_qubits = n;
  circ.initial_bits.assign(n, 0);
  circ.meta.model = "tfim";
  circ.meta.dt = dt;
  circ.meta.steps = steps;
  circ.meta.params = {{"rows", double(rows)}, {"cols", double(cols)},
                      {"J", J},               {"h", h},
                      {"periodic", periodic ? 1.0 : 0.0},
                      {"cat_gate_set", opts.cat_gate_set ? 1.0 : 0.0}};

  auto emit_zz = [&](int a, int b, double theta, std::vector<Gate>& out) {
    if (!opts.cat_gate_set) {
      router.apply_two(a, b, zz_rotation(theta), "zz_rot", theta, out);
      return;
    }
    // exp(-i theta ZZ) = CX . (I x exp(-i theta Z)) . CX
    router.make_adjacent(a, b, out);
    router.apply_two(a, b, cx_gate(), "cx", std::nullopt, out);
    router.apply_one(b, z_rotation(theta), "rz", theta, out);
    router.apply_two(a, b, cx_gate(), "cx", std::nullopt, out);
  };
  auto emit_x = [&](int q, double theta, std::vector<Gate>& out) {
    if (!opts.cat_gate_set) {
      router.apply_one(q, x_rotation(theta), "x_rot", theta, out);
      return;
    }
    router.apply_one(q, hadamard(), "h", std::nullopt, out);
    router.apply_one(q, z_rotation(theta), "rz", theta, out);
    router.apply_one(q, hadamard(), "h", std::nullopt, out);
  };
  auto zz_layer = [&](double dt_eff, std::vector<Gate>& out) {
    for (const auto& [a, b] : edges) emit_zz(a, b, J * dt_eff, out);
  };
  auto x_layer = [&](double dt_eff, std::vector<Gate>& out) {
    for (int q = 0; q < n; ++q) emit_x(q, h * dt_eff, out);
  };

  for (int s = 0; s < steps; ++s) {
    std::vector<Gate> sc;
    zz_layer(s == 0 ? dt / 2 : dt, sc);
    x_layer(dt, sc);
    if (s == steps - 1) zz_layer(dt / 2, sc);
    circ.subcircuits.push_back(std::move(sc));
  }

  if (opts.cat_gate_set) {
    // Routing swaps must also live in the {Z(theta), H, CX} gate set.
    for (auto& sc : circ.subcircuits) {
      std::vector<Gate> expanded;
      expanded.reserve(sc.size());
      for (auto& g : sc) {
        if (g.gate_class == "swap") {
          Gate fwd{cx_gate(), g.targets, "cx", std::nullopt};
          Gate rev{cx_gate(), {g.targets[1], g.targets[0]}, "cx", std::nullopt};
          expanded.push_back(fwd);
          expanded.push_back(rev);
          expanded.push_back(fwd);
        } else {
          expanded.push_back(std::move(g));
        }
      }
      sc = std::move(expanded);
    }
  }

  for (const auto& [a, b] : edges) {
    const auto pa = static_cast<std::size_t>(router.position_of(a));
    const auto pb = static_cast<std::size_t>(router.position_of(b));
    circ.observables["ZZ_" + std::to_string(a) + "_" + std::to_string(b)] =
        Observable(PauliString{{pa, Pauli::Z}, {pb, Pauli::Z}});
  }
  for (int q = 0; q < n; ++q) {
    const auto p = static_cast<std::size_t>(router.position_of(q));
    circ.observables["X_" + std::to_string(q)] =
        Observable(PauliString{{p, Pauli::X}});
  }
  circ.validate();
  return circ;
}

// Energy per site from the named TFIM observables.
inline Observable tfim_energy_per_site(const Circuit& circ) {
  const double J = circ.meta.params.at("J");
  const double h = circ.meta.params.at("h");
  Observable e;
  for (const auto& [name, obs] : circ.observables) {
    const double coef =
        name.rfind("ZZ_", 0) == 0 ? J : (name.rfind("X_", 0) == 0 ? h : 0.0);
    for (const auto& [c, s] : obs.terms) e.terms.emplace_back(coef * c, s);
  }
  for (auto& [c, s] : e.terms) c /= circ.n_qubits;
  return e;
}

// ---------------------------------------------------------------------------
// Fermi-Hubbard model on an m x n lattice (m sites per row, n rows, open
// boundaries, two spin modes per site) under the Jordan-Wigner encoding.
// First-order Trotter; per step: on-site layer, horizontal hopping layer,
// vertical hopping layer. Modes live on a snaked chain and fermionic swaps
// bring hopping partners together, so no explicit Z strings ever appear in
// the circuit. Readout observables carry the Z strings for whatever mode
// ordering the final permutation left behind.

inline Circuit build_fhm(int m, int n, double t, double U, double dt,
                         int steps) {
  if (m < 1 || n < 1 || m * n < 2) {
    throw std::invalid_argument("build_fhm: invalid lattice");
  }
  if (steps < 1) throw std::invalid_argument("build_fhm: steps >= 1");
  const int n_sites = m * n;
  const int n_modes = 2 * n_sites;
  auto site = [&](int r, int c) { return r * m + c; };
  auto mode = [&](int s, int spin) { return 2 * s + spin; };

  // Snaked initial ordering: row 0 left-to-right, row 1 right-to-left, ...
  // with the two spin modes of each site kept adjacent.
  std::vector<int> initial_order;
  initial_order.reserve(n_modes);
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k < m; ++k) {
      const int c = (r % 2 == 0) ? k : m - 1 - k;
      initial_order.push_back(mode(site(r, c), 0));
      initial_order.push_back(mode(site(r, c), 1));
    }
  }
  ChainRouter router(initial_order, /*fermionic=*/true);

  Circuit circ;
  circ.n_qubits = n_modes;
  circ.meta.model = "fhm";
  circ.meta.dt = dt;
  circ.meta.steps = steps;
  circ.meta.params = {{"m", double(m)}, {"n", double(n)}, {"t", t}, {"U", U}};

  // Anti-ferromagnetic half filling: even-parity sites spin-up occupied.
  circ.initial_bits.assign(n_modes, 0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < m; ++c) {
      const int spin_occ = ((r + c) % 2 == 0) ? 0 : 1;
      const int md = mode(site(r, c), spin_occ);
      circ.initial_bits[router.position_of(md)] = 1;
    }
  }

  const Mat onsite = [&] {
    Mat g = Mat::Identity(4, 4);
    g(3, 3) = std::exp(cplx(0, -U * dt));
    return g;
  }();
  const Mat hop = xxyy_rotation(t * dt / 2.0);

  for (int s = 0; s < steps; ++s) {
    std::vector<Gate> sc;
    for (int st = 0; st < n_sites; ++st) {
      router.apply_two(mode(st, 0), mode(st, 1), onsite, "onsite", U * dt, sc);
    }
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c + 1 < m; ++c) {
        for (int spin = 0; spin < 2; ++spin) {
          router.apply_two(mode(site(r, c), spin), mode(site(r, c + 1), spin),
                           hop, "hop", t * dt, sc);
        }
      }
    }
    for (int r = 0; r + 1 < n; ++r) {
      for (int c = 0; c < m; ++c) {
        for (int spin = 0; spin < 2; ++spin) {
          router.apply_two(mode(site(r, c), spin), mode(site(r + 1, c), spin),
                           hop, "hop", t * dt, sc);
        }
      }
    }
    circ.subcircuits.push_back(std::move(sc));
  }

  // Observables in terms of final chain positions.
  auto pos = [&](int md) {
    return static_cast<std::size_t>(router.position_of(md));
  };
  auto number_obs = [&](int md) {
    Observable o;
    o.constant = 0.5;
    o.terms.emplace_back(-0.5, PauliString{{pos(md), Pauli::Z}});
    return o;
  };
  auto hopping_obs = [&](int ma, int mb) {
    std::size_t p = pos(ma), q = pos(mb);
    if (p > q) std::swap(p, q);
    std::vector<std::pair<std::size_t, Pauli>> xs{{p, Pauli::X}},
        ys{{p, Pauli::Y}};
    for (std::size_t k = p + 1; k < q; ++k) {
      xs.emplace_back(k, Pauli::Z);
      ys.emplace_back(k, Pauli::Z);
    }
    xs.emplace_back(q, Pauli::X);
    ys.emplace_back(q, Pauli::Y);
    Observable o;
    o.terms.emplace_back(0.5, PauliString(xs));
    o.terms.emplace_back(0.5, PauliString(ys));
    return o;
  };
  const char* spin_tag[2] = {"up", "dn"};
  for (int st = 0; st < n_sites; ++st) {
    for (int spin = 0; spin < 2; ++spin) {
      circ.observables["n_" + std::to_string(st) + "_" + spin_tag[spin]] =
          number_obs(mode(st, spin));
    }
    Observable fill, mag, docc;
    fill.constant = 1.0;
    fill.terms.emplace_back(-0.5, PauliString{{pos(mode(st, 0)), Pauli::Z}});
    fill.terms.emplace_back(-0.5, PauliString{{pos(mode(st, 1)), Pauli::Z}});
    mag.terms.emplace_back(-0.5, PauliString{{pos(mode(st, 0)), Pauli::Z}});
    mag.terms.emplace_back(0.5, PauliString{{pos(mode(st, 1)), Pauli::Z}});
    docc.constant = 0.25;
    docc.terms.emplace_back(-0.25, PauliString{{pos(mode(st, 0)), Pauli::Z}});
    docc.terms.emplace_back(-0.25, PauliString{{pos(mode(st, 1)), Pauli::Z}});
    {
      std::size_t p = pos(mode(st, 0)), q = pos(mode(st, 1));
      if (p > q) std::swap(p, q);
      docc.terms.emplace_back(
          0.25, PauliString{{p, Pauli::Z}, {q, Pauli::Z}});
    }
    circ.observables["filling_" + std::to_string(st)] = fill;
    circ.observables["mag_" + std::to_string(st)] = mag;
    circ.observables["docc_" + std::to_string(st)] = docc;
  }
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < m; ++c) {
      const int a = site(r, c);
      for (int spin = 0; spin < 2; ++spin) {
        if (c + 1 < m) {
          const int b = site(r, c + 1);
          circ.observables["hop_" + std::to_string(a) + "_" +
                           std::to_string(b) + "_" + spin_tag[spin]] =
              hopping_obs(mode(a, spin), mode(b, spin));
        }
        if (r + 1 < n) {
          const int b = site(r + 1, c);
          circ.observables["hop_" + std::to_string(a) + "_" +
                           std::to_string(b) + "_" + spin_tag[spin]] =
              hopping_obs(mode(a, spin), mode(b, spin));
        }
      }
    }
  }
  circ.validate();
  return circ;
}

// Energy per site: H = -t sum hop + U sum docc, divided by the site count.
inline Observable fhm_energy_per_site(const Circuit& circ) {
  const double t = circ.meta.params.at("t");
  const double U = circ.meta.params.at("U");
  const double n_sites =
      circ.meta.params.at("m") * circ.meta.params.at("n");
  Observable e;
  for (const auto& [name, obs] : circ.observables) {
    double coef = 0.0;
    if (name.rfind("hop_", 0) == 0) coef = -t;
    else if (name.rfind("docc_", 0) == 0) coef = U;
    else continue;
    e.constant += coef * obs.constant / n_sites;
    for (const auto& [c, s] : obs.terms) {
      e.terms.emplace_back(coef * c / n_sites, s);
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// XY chain: H = J sum (XX + YY) + h sum Z. The Z field commutes with every
// hopping term, so it is applied as an exact per-step layer; the even/odd
// bond split uses the symmetric second-order scheme with merged half-steps.
// Every two-qubit gate is a matchgate.

inline Circuit build_xym(int n, double J, double h, double dt, int steps) {
  if (n < 2) throw std::invalid_argument("build_xym: n >= 2");
  if (steps < 1) throw std::invalid_argument("build_xym: steps >= 1");
  Circuit circ;
  circ.n_qubits = n;
  circ.meta.model = "xym";
  circ.meta.dt = dt;
  circ.meta.steps = steps;
  circ.meta.params = {{"n", double(n)}, {"J", J}, {"h", h}};
  circ.initial_bits.assign(n, 0);
  for (int q = 0; q < n; q += 2) circ.initial_bits[q] = 1;  // |1010...>

  auto bond_layer = [&](int parity, double dt_eff, std::vector<Gate>& out) {
    for (int q = parity; q + 1 < n; q += 2) {
      Gate g;
      g.targets = {q, q + 1};
      g.matrix = xxyy_rotation(-J * dt_eff);  // exp(-i J dt (XX+YY))
      g.gate_class = "xy";
      g.theta = J * dt_eff;
      out.push_back(std::move(g));
    }
  };

  for (int s = 0; s < steps; ++s) {
    std::vector<Gate> sc;
    for (int q = 0; q < n; ++q) {
      Gate g;
      g.targets = {q};
      g.matrix = z_rotation(h * dt);
      g.gate_class = "rz";
      g.theta = h * dt;
      sc.push_back(std::move(g));
    }
    bond_layer(0, s == 0 ? dt / 2 : dt, sc);
    bond_layer(1, dt, sc);
    if (s == steps - 1) bond_layer(0, dt / 2, sc);
    circ.subcircuits.push_back(std::move(sc));
  }

  for (int q = 0; q + 1 < n; ++q) {
    circ.observables["YX_" + std::to_string(q) + "_" + std::to_string(q + 1)] =
        Observable(PauliString{{static_cast<std::size_t>(q), Pauli::Y},
                               {static_cast<std::size_t>(q + 1), Pauli::X}});
  }
  for (int q = 0; q < n; ++q) {
    circ.observables["Z_" + std::to_string(q)] =
        Observable(PauliString{{static_cast<std::size_t>(q), Pauli::Z}});
  }
  circ.validate();
  return circ;
}

// ---------------------------------------------------------------------------
// Random 1D circuits: per layer, Haar-random single-qubit gates on all
// qubits followed by CZ on all neighboring pairs.

inline Mat haar_random_1q(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat g(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = cplx(nd(rng), nd(rng));
  const Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < 2; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

inline Circuit random_1d_circuit(int n, int layers, std::uint64_t seed) {
  if (n < 2 || layers < 1) throw std::invalid_argument("random_1d_circuit");
  std::mt19937_64 rng(seed);
  Mat cz = Mat::Identity(4, 4);
  cz(3, 3) = -1;
  Circuit circ;
  circ.n_qubits = n;
  circ.initial_bits.assign(n, 0);
  circ.meta.model = "random1d";
  circ.meta.steps = layers;
  circ.meta.params = {{"n", double(n)}, {"layers", double(layers)},
                      {"seed", double(seed)}};
  for (int l = 0; l < layers; ++l) {
    std::vector<Gate> sc;
    for (int q = 0; q < n; ++q) {
      Gate g;
      g.targets = {q};
      g.matrix = haar_random_1q(rng);
      g.gate_class = "haar1";
      sc.push_back(std::move(g));
    }
    for (int q = 0; q + 1 < n; ++q) {
      Gate g;
      g.targets = {q, q + 1};
      g.matrix = cz;
      g.gate_class = "cz";
      sc.push_back(std::move(g));
    }
    circ.subcircuits.push_back(std::move(sc));
  }
  for (int q = 0; q < n; ++q) {
    circ.observables["Z_" + std::to_string(q)] =
        Observable(PauliString{{static_cast<std::size_t>(q), Pauli::Z}});
  }
  circ.validate();
  return circ;
}

// ---------------------------------------------------------------------------
// JSON serialization (cross-implementation circuit exchange).

inline nlohmann::json observable_to_json(const Observable& o) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [c, s] : o.terms) {
    nlohmann::json paulis = nlohmann::json::array();
    for (const auto& [site, p] : s.factors) {
      paulis.push_back({site, std::string(1, pauli_char(p))});
    }
    terms.push_back({{"coef", c}, {"paulis", paulis}});
  }
  return {{"constant", o.constant}, {"terms", terms}};
}

inline Observable observable_from_json(const nlohmann::json& j) {
  Observable o;
  o.constant = j.value("constant", 0.0);
  for (const auto& t : j.at("terms")) {
    std::vector<std::pair<std::size_t, Pauli>> factors;
    for (const auto& p : t.at("paulis")) {
      factors.emplace_back(p.at(0).get<std::size_t>(),
                           pauli_from_char(p.at(1).get<std::string>().at(0)));
    }
    o.terms.emplace_back(t.at("coef").get<double>(),
                         PauliString(std::move(factors)));
  }
  return o;
}

inline nlohmann::json circuit_to_json(const Circuit& c) {
  nlohmann::json j;
  j["schema"] = "nzne.circuit.v1";
  j["n_qubits"] = c.n_qubits;
  j["initial_bits"] = c.initial_bits;
  j["metadata"] = {{"model", c.meta.model},
                   {"dt", c.meta.dt},
                   {"steps", c.meta.steps},
                   {"params", c.meta.params}};
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& sc : c.subcircuits) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : sc) {
      nlohmann::json m = nlohmann::json::array();
      for (Eigen::Index i = 0; i < g.matrix.rows(); ++i) {
        for (Eigen::Index k = 0; k < g.matrix.cols(); ++k) {
          m.push_back({g.matrix(i, k).real(), g.matrix(i, k).imag()});
        }
      }
      nlohmann::json gj = {{"class", g.gate_class},
                           {"targets", g.targets},
                           {"matrix", m}};
      if (g.theta) gj["theta"] = *g.theta;
      gates.push_back(std::move(gj));
    }
    subs.push_back(std::move(gates));
  }
  j["subcircuits"] = std::move(subs);
  nlohmann::json obs;
  for (const auto& [name, o] : c.observables) obs[name] = observable_to_json(o);
  j["observables"] = std::move(obs);
  return j;
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit c;
  c.n_qubits = j.at("n_qubits").get<int>();
  c.initial_bits = j.at("initial_bits").get<std::vector<int>>();
  if (j.contains("metadata")) {
    const auto& md = j["metadata"];
    c.meta.model = md.value("model", "custom");
    c.meta.dt = md.value("dt", 0.0);
    c.meta.steps = md.value("steps", 0);
    if (md.contains("params")) {
      c.meta.params = md["params"].get<std::map<std::string, double>>();
    }
  }
  for (const auto& sj : j.at("subcircuits")) {
    std::vector<Gate> sc;
    for (const auto& gj : sj) {
      Gate g;
      g.gate_class = gj.at("class").get<std::string>();
      g.targets = gj.at("targets").get<std::vector<int>>();
      if (gj.contains("theta")) g.theta = gj["theta"].get<double>();
      const Eigen::Index d = g.targets.size() == 1 ? 2 : 4;
      g.matrix.resize(d, d);
      const auto& m = gj.at("matrix");
      if (static_cast<Eigen::Index>(m.size()) != d * d) {
        throw std::invalid_argument("circuit json: bad matrix size");
      }
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index k = 0; k < d; ++k) {
          const auto& e = m[static_cast<std::size_t>(i * d + k)];
          g.matrix(i, k) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
        }
      }
      sc.push_back(std::move(g));
    }
    c.subcircuits.push_back(std::move(sc));
  }
  if (j.contains("observables")) {
    for (const auto& [name, oj] : j["observables"].items()) {
      c.observables[name] = observable_from_json(oj);
    }
  }
  c.validate();
  return c;
}

}  // namespace nzne
