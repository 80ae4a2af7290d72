#pragma once

// Banded LU factorization with partial pivoting.

#include "seqmanifold/error.hpp"
#include "seqmanifold/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace seqmanifold {

/// Square banded matrix with `lower` subdiagonals and `upper` superdiagonals.
/// Row i stores columns i-lower .. i+upper+lower; the extra `lower` slots
/// absorb fill-in from row interchanges during factorization.
class BandedMatrix {
 public:
  BandedMatrix(int n, int lower, int upper)
      : n_(n), kl_(lower), ku_(upper), width_(2 * lower + upper + 1),
        data_(static_cast<std::size_t>(n) * static_cast<std::size_t>(width_), 0.0) {}

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  bool in_band(int i, int j) const { return j >= i - kl_ && j <= i + ku_ + kl_; }

  double& at(int i, int j) { return data_[index(i, j)]; }
  double at(int i, int j) const { return in_band(i, j) ? data_[index(i, j)] : 0.0; }

  Mat to_dense() const {
    Mat m = Mat::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_ + kl_); ++j) m(i, j) = at(i, j);
    return m;
  }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(j - i + kl_);
  }

  int n_, kl_, ku_, width_;
  std::vector<double> data_;
};

/// In-place LU of a BandedMatrix; `solve` may be called repeatedly.
class BandedLU {
 public:
  explicit BandedLU(BandedMatrix a) : lu_(std::move(a)), pivots_(static_cast<std::size_t>(lu_.size())) {
    const int n = lu_.size();
    const int kl = lu_.lower();
    const int span = lu_.upper() + kl;  // reach of U after pivoting
    for (int k = 0; k < n; ++k) {
      const int last = std::min(n - 1, k + kl);
      int p = k;
      double best = std::abs(lu_.at(k, k));
      for (int i = k + 1; i <= last; ++i) {
        const double v = std::abs(lu_.at(i, k));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      pivots_[static_cast<std::size_t>(k)] = p;
      if (best == 0.0) throw Error(ErrorCode::SingularJacobian, "banded matrix is singular");
      const int jmax = std::min(n - 1, k + span);
      if (p != k)
        for (int j = k; j <= jmax; ++j) std::swap(lu_.at(k, j), lu_.at(p, j));
      const double pivot = lu_.at(k, k);
      for (int i = k + 1; i <= last; ++i) {
        double& lik = lu_.at(i, k);
        if (lik == 0.0) continue;
        lik /= pivot;
        for (int j = k + 1; j <= jmax; ++j) lu_.at(i, j) -= lik * lu_.at(k, j);
      }
    }
  }

  Vec solve(Vec b) const {
    const int n = lu_.size();
    if (b.size() != n) throw Error(ErrorCode::DimensionMismatch, "right-hand side has wrong size");
    const int kl = lu_.lower();
    const int span = lu_.upper() + kl;
    for (int k = 0; k < n; ++k) {
      const int p = pivots_[static_cast<std::size_t>(k)];
      if (p != k) std::swap(b(k), b(p));
      const int last = std::min(n - 1, k + kl);
      for (int i = k + 1; i <= last; ++i) b(i) -= lu_.at(i, k) * b(k);
    }
    for (int k = n - 1; k >= 0; --k) {
      const int jmax = std::min(n - 1, k + span);
      double s = b(k);
      for (int j = k + 1; j <= jmax; ++j) s -= lu_.at(k, j) * b(j);
      b(k) = s / lu_.at(k, k);
    }
    return b;
  }

 private:
  BandedMatrix lu_;
  std::vector<int> pivots_;
};

}  // namespace seqmanifold
