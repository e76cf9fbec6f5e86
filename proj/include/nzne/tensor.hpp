#pragma once

// Dense complex tensor primitives: reshape, permutation, contraction, QR and
// truncated SVD. Everything downstream (MPS evolution, superoperators, fits)
// builds on the kernels in this header.
//
// Data layout: row-major ("last axis fastest"). A tensor with shape
// (d0, d1, ..., dk) stores entry (i0, ..., ik) at linear offset
// i0*d1*...*dk + i1*d2*...*dk + ... + ik. All modules assume this layout.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

namespace nzne {

using cplx = std::complex<double>;

using MatrixXcdR =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), cplx(0.0, 0.0)) {}

  DenseTensor(std::vector<std::size_t> shape, std::vector<cplx> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_)) {
      throw std::invalid_argument("DenseTensor: shape/data size mismatch");
    }
  }

  static DenseTensor from_matrix(const Eigen::Ref<const MatrixXcdR>& m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()),
                   static_cast<std::size_t>(m.cols())});
    Eigen::Map<MatrixXcdR>(t.data_.data(), m.rows(), m.cols()) = m;
    return t;
  }

  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  std::vector<cplx>& storage() { return data_; }
  const std::vector<cplx>& storage() const { return data_; }

  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }

  cplx& at(std::initializer_list<std::size_t> idx) {
    return data_[offset(idx)];
  }
  const cplx& at(std::initializer_list<std::size_t> idx) const {
    return data_[offset(idx)];
  }

  // Reinterprets the entries under a new shape of equal total size.
  DenseTensor reshaped(std::vector<std::size_t> new_shape) const {
    if (count(new_shape) != data_.size()) {
      throw std::invalid_argument("reshape: size mismatch");
    }
    return DenseTensor(std::move(new_shape), data_);
  }

  void reshape_inplace(std::vector<std::size_t> new_shape) {
    if (count(new_shape) != data_.size()) {
      throw std::invalid_argument("reshape: size mismatch");
    }
    shape_ = std::move(new_shape);
  }

  // Maps a rank-2 tensor onto an Eigen matrix view (no copy).
  Eigen::Map<const MatrixXcdR> as_matrix() const {
    if (rank() != 2) throw std::logic_error("as_matrix: tensor is not rank 2");
    return {data_.data(), static_cast<Eigen::Index>(shape_[0]),
            static_cast<Eigen::Index>(shape_[1])};
  }
  Eigen::Map<MatrixXcdR> as_matrix() {
    if (rank() != 2) throw std::logic_error("as_matrix: tensor is not rank 2");
    return {data_.data(), static_cast<Eigen::Index>(shape_[0]),
            static_cast<Eigen::Index>(shape_[1])};
  }

  DenseTensor conjugated() const {
    DenseTensor out = *this;
    for (auto& v : out.data_) v = std::conj(v);
    return out;
  }

  void scale(cplx factor) {
    for (auto& v : data_) v *= factor;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (const auto& v : data_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
  }

  void check_finite(const char* where) const {
    if (!all_finite()) {
      throw std::runtime_error(std::string("non-finite tensor entries in ") +
                               where);
    }
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d == 0) throw std::invalid_argument("tensor extent must be positive");
      n *= d;
    }
    return n;
  }

 private:
  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != shape_.size()) {
      throw std::invalid_argument("index rank mismatch");
    }
    std::size_t off = 0;
    auto it = idx.begin();
    for (std::size_t a = 0; a < shape_.size(); ++a, ++it) {
      if (*it >= shape_[a]) throw std::out_of_range("tensor index");
      off = off * shape_[a] + *it;
    }
    return off;
  }

  std::vector<std::size_t> shape_;
  std::vector<cplx> data_;
};

// Axis permutation: out(i_perm[0], ..., i_perm[k]) = in(i_0, ..., i_k), i.e.
// axis `perm[a]` of the input becomes axis `a` of the output.
inline DenseTensor permute(const DenseTensor& t, const std::vector<int>& perm) {
  const std::size_t r = t.rank();
  if (perm.size() != r) throw std::invalid_argument("permute: rank mismatch");
  std::vector<bool> seen(r, false);
  std::vector<std::size_t> out_shape(r);
  for (std::size_t a = 0; a < r; ++a) {
    if (perm[a] < 0 || static_cast<std::size_t>(perm[a]) >= r || seen[perm[a]])
      throw std::invalid_argument("permute: invalid permutation");
    seen[perm[a]] = true;
    out_shape[a] = t.extent(perm[a]);
  }
  DenseTensor out(out_shape);
  if (r == 0) {
    out[0] = t[0];
    return out;
  }

  // Walk the input linearly; maintain the output offset incrementally.
  std::vector<std::size_t> out_stride(r, 1);  // indexed by *input* axis
  {
    std::vector<std::size_t> stride_of_out_axis(r, 1);
    for (std::size_t a = r - 1; a > 0; --a) {
      stride_of_out_axis[a - 1] = stride_of_out_axis[a] * out_shape[a];
    }
    for (std::size_t a = 0; a < r; ++a) out_stride[perm[a]] = stride_of_out_axis[a];
  }
  std::vector<std::size_t> idx(r, 0);
  std::size_t out_off = 0;
  const std::size_t n = t.size();
  for (std::size_t lin = 0; lin < n; ++lin) {
    out[out_off] = t[lin];
    for (std::size_t a = r; a-- > 0;) {
      idx[a]++;
      out_off += out_stride[a];
      if (idx[a] < t.extent(a)) break;
      out_off -= idx[a] * out_stride[a];
      idx[a] = 0;
    }
  }
  return out;
}

// Tensor contraction over the given axis pairs (axis of `a`, axis of `b`).
// Output axes are the unpaired axes of `a` (in order) followed by the
// unpaired axes of `b` (in order).
inline DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                            const std::vector<std::pair<int, int>>& paired_axes) {
  std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
  for (const auto& [pa, pb] : paired_axes) {
    if (pa < 0 || static_cast<std::size_t>(pa) >= a.rank() || pb < 0 ||
        static_cast<std::size_t>(pb) >= b.rank()) {
      throw std::invalid_argument("contract: axis index out of range");
    }
    if (a_used[pa] || b_used[pb]) {
      throw std::invalid_argument("contract: repeated axis in pairing");
    }
    if (a.extent(pa) != b.extent(pb)) {
      throw std::invalid_argument(
          "contract: extent mismatch on axes (" + std::to_string(pa) + "," +
          std::to_string(pb) + "): " + std::to_string(a.extent(pa)) + " vs " +
          std::to_string(b.extent(pb)));
    }
    a_used[pa] = true;
    b_used[pb] = true;
  }

  std::vector<int> a_perm, b_perm;
  std::vector<std::size_t> out_shape;
  std::size_t m = 1, k = 1, n = 1;
  for (std::size_t ax = 0; ax < a.rank(); ++ax) {
    if (!a_used[ax]) {
      a_perm.push_back(static_cast<int>(ax));
      out_shape.push_back(a.extent(ax));
      m *= a.extent(ax);
    }
  }
  for (const auto& [pa, pb] : paired_axes) {
    a_perm.push_back(pa);
    k *= a.extent(pa);
  }
  std::vector<int> b_con;
  for (const auto& [pa, pb] : paired_axes) b_con.push_back(pb);
  b_perm = b_con;
  for (std::size_t bx = 0; bx < b.rank(); ++bx) {
    if (!b_used[bx]) {
      b_perm.push_back(static_cast<int>(bx));
      out_shape.push_back(b.extent(bx));
      n *= b.extent(bx);
    }
  }

  DenseTensor am = permute(a, a_perm);
  DenseTensor bm = permute(b, b_perm);
  DenseTensor out(out_shape.empty() ? std::vector<std::size_t>{}
                                    : out_shape);
  Eigen::Map<const MatrixXcdR> A(am.data(), m, k);
  Eigen::Map<const MatrixXcdR> B(bm.data(), k, n);
  Eigen::Map<MatrixXcdR> C(out.data(), m, n);
  C.noalias() = A * B;
  return out;
}

struct SvdResult {
  DenseTensor u;           // m x k left isometry
  std::vector<double> s;   // k singular values, non-increasing
  DenseTensor vh;          // k x n right isometry (rows orthonormal)
  double discarded_weight = 0.0;  // sum of squared dropped s / sum of all squared s
};

namespace detail {

// Full SVD of a row-major complex matrix via LAPACK divide & conquer,
// falling back to the standard driver if zgesdd fails to converge.
inline void full_svd(const DenseTensor& m, MatrixXcdR& u, std::vector<double>& s,
                     MatrixXcdR& vh) {
  const auto rows = static_cast<lapack_int>(m.extent(0));
  const auto cols = static_cast<lapack_int>(m.extent(1));
  const lapack_int kk = std::min(rows, cols);
  std::vector<cplx> work(m.storage());
  s.assign(kk, 0.0);
  u.resize(rows, kk);
  vh.resize(kk, cols);
  lapack_int info = LAPACKE_zgesdd(LAPACK_ROW_MAJOR, 'S', rows, cols,
                                   work.data(), cols, s.data(), u.data(), kk,
                                   vh.data(), cols);
  if (info != 0) {
    work = m.storage();
    std::vector<double> superb(std::max<lapack_int>(1, kk - 1));
    info = LAPACKE_zgesvd(LAPACK_ROW_MAJOR, 'S', 'S', rows, cols, work.data(),
                          cols, s.data(), u.data(), kk, vh.data(), cols,
                          superb.data());
    if (info != 0) {
      throw std::runtime_error("SVD failed to converge (info=" +
                               std::to_string(info) + ")");
    }
  }
}

}  // namespace detail

// Rank-truncated SVD of a matrix-shaped tensor. Keeps
//   min(max_rank, #{s_i > cutoff * s_1}, rank(m))
// singular triplets. The zero matrix yields rank 0 with discarded_weight 0.
inline SvdResult truncated_svd(const DenseTensor& m, std::size_t max_rank,
                               double cutoff = 0.0) {
  if (m.rank() != 2) throw std::invalid_argument("truncated_svd: need a matrix");
  if (max_rank < 1) throw std::invalid_argument("truncated_svd: max_rank >= 1");
  m.check_finite("truncated_svd input");

  MatrixXcdR u;
  std::vector<double> s;
  MatrixXcdR vh;
  detail::full_svd(m, u, s, vh);

  double total = 0.0;
  for (double v : s) total += v * v;

  std::size_t keep = 0;
  if (total > 0.0) {
    const double thresh = cutoff * s[0];
    for (double v : s) {
      if (v > thresh && v > 0.0) ++keep;
    }
    keep = std::min(keep, max_rank);
  }

  SvdResult out;
  if (keep == 0) {
    // Zero (or fully cut) matrix: represent as an explicit rank-0 result.
    out.u = DenseTensor({m.extent(0), 1});
    out.vh = DenseTensor({1, m.extent(1)});
    out.s = {0.0};
    out.discarded_weight = 0.0;
    return out;
  }

  double kept = 0.0;
  for (std::size_t i = 0; i < keep; ++i) kept += s[i] * s[i];
  out.discarded_weight = total > 0.0 ? std::max(0.0, 1.0 - kept / total) : 0.0;
  out.s.assign(s.begin(), s.begin() + keep);
  out.u = DenseTensor({m.extent(0), keep});
  out.vh = DenseTensor({keep, m.extent(1)});
  out.u.as_matrix() = u.leftCols(keep);
  out.vh.as_matrix() = vh.topRows(keep);
  return out;
}

// Thin QR: m (r x c) = Q (r x k) R (k x c), k = min(r, c).
inline std::pair<DenseTensor, DenseTensor> qr_thin(const DenseTensor& m) {
  if (m.rank() != 2) throw std::invalid_argument("qr_thin: need a matrix");
  const auto rows = static_cast<lapack_int>(m.extent(0));
  const auto cols = static_cast<lapack_int>(m.extent(1));
  const lapack_int k = std::min(rows, cols);
  std::vector<cplx> work(m.storage());
  std::vector<cplx> tau(k);
  lapack_int info = LAPACKE_zgeqrf(LAPACK_ROW_MAJOR, rows, cols, work.data(),
                                   cols, tau.data());
  if (info != 0) throw std::runtime_error("zgeqrf failed");

  DenseTensor r({static_cast<std::size_t>(k), static_cast<std::size_t>(cols)});
  for (lapack_int i = 0; i < k; ++i) {
    for (lapack_int j = i; j < cols; ++j) {
      r[static_cast<std::size_t>(i) * cols + j] =
          work[static_cast<std::size_t>(i) * cols + j];
    }
  }
  info = LAPACKE_zungqr(LAPACK_ROW_MAJOR, rows, k, k, work.data(), cols,
                        tau.data());
  if (info != 0) throw std::runtime_error("zungqr failed");
  DenseTensor q({static_cast<std::size_t>(rows), static_cast<std::size_t>(k)});
  for (lapack_int i = 0; i < rows; ++i) {
    for (lapack_int j = 0; j < k; ++j) {
      q[static_cast<std::size_t>(i) * k + j] =
          work[static_cast<std::size_t>(i) * cols + j];
    }
  }
  return {std::move(q), std::move(r)};
}

// Thin LQ: m (r x c) = L (r x k) Q (k x c), k = min(r, c), Q rows orthonormal.
inline std::pair<DenseTensor, DenseTensor> lq_thin(const DenseTensor& m) {
  if (m.rank() != 2) throw std::invalid_argument("lq_thin: need a matrix");
  const auto rows = static_cast<lapack_int>(m.extent(0));
  const auto cols = static_cast<lapack_int>(m.extent(1));
  const lapack_int k = std::min(rows, cols);
  std::vector<cplx> work(m.storage());
  std::vector<cplx> tau(k);
  lapack_int info = LAPACKE_zgelqf(LAPACK_ROW_MAJOR, rows, cols, work.data(),
                                   cols, tau.data());
  if (info != 0) throw std::runtime_error("zgelqf failed");

  DenseTensor l({static_cast<std::size_t>(rows), static_cast<std::size_t>(k)});
  for (lapack_int i = 0; i < rows; ++i) {
    for (lapack_int j = 0; j <= std::min<lapack_int>(i, k - 1); ++j) {
      l[static_cast<std::size_t>(i) * k + j] =
          work[static_cast<std::size_t>(i) * cols + j];
    }
  }
  info = LAPACKE_zunglq(LAPACK_ROW_MAJOR, k, cols, k, work.data(), cols,
                        tau.data());
  if (info != 0) throw std::runtime_error("zunglq failed");
  DenseTensor q({static_cast<std::size_t>(k), static_cast<std::size_t>(cols)});
  for (lapack_int i = 0; i < k; ++i) {
    for (lapack_int j = 0; j < cols; ++j) {
      q[static_cast<std::size_t>(i) * cols + j] =
          work[static_cast<std::size_t>(i) * cols + j];
    }
  }
  return {std::move(l), std::move(q)};
}

}  // namespace nzne
