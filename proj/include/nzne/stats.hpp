#pragma once

// Welford running mean/variance with deterministic pairwise merging.

#include <cmath>
#include <cstddef>

namespace nzne {

struct Welford {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  // Chan et al. merge; merging in a fixed block order keeps reductions
  // deterministic regardless of scheduling.
  void merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double d = o.mean - mean;
    const auto na = static_cast<double>(n), nb = static_cast<double>(o.n);
    mean += d * nb / (na + nb);
    m2 += o.m2 + d * d * na * nb / (na + nb);
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double std_error() const {
    return n > 0 ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0;
  }
};

}  // namespace nzne
