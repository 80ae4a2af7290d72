#pragma once

// Truncated sequences u(0..N) in R^d, the shift, the pushforward f_*, and the
// convolution kernel g(n) = T^{n-1}(1_{n>=1} I - P^u) whose convolution is a
// right inverse of S - T_*.

#include "seqmanifold/dynsys.hpp"
#include "seqmanifold/error.hpp"
#include "seqmanifold/linalg.hpp"
#include "seqmanifold/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

namespace seqmanifold {

/// Entries u(0), ..., u(N) stored as the columns of a d x (N+1) matrix.
class TruncatedSequence {
 public:
  TruncatedSequence() = default;
  TruncatedSequence(int dim, int length) : entries_(Mat::Zero(dim, length)) {}
  explicit TruncatedSequence(Mat entries) : entries_(std::move(entries)) {}

  int dim() const { return static_cast<int>(entries_.rows()); }
  int length() const { return static_cast<int>(entries_.cols()); }

  auto operator[](int n) { return entries_.col(n); }
  auto operator[](int n) const { return entries_.col(n); }

  const Mat& matrix() const { return entries_; }
  Mat& matrix() { return entries_; }

  /// max_n |u(n)|_2
  double sup_norm() const {
    return entries_.size() == 0 ? 0.0 : entries_.colwise().norm().maxCoeff();
  }

 private:
  Mat entries_;
};

/// CSV with header `n,u_1,...,u_d`, one row per index.
inline void write_csv(std::ostream& out, const TruncatedSequence& u) {
  out << "n";
  for (int i = 0; i < u.dim(); ++i) out << ",u_" << (i + 1);
  out << "\n" << std::setprecision(17);
  for (int n = 0; n < u.length(); ++n) {
    out << n;
    for (int i = 0; i < u.dim(); ++i) out << "," << u[n](i);
    out << "\n";
  }
}

/// g(n) on the window -K..K; zero outside.
struct ConvolutionKernel {
  int dim = 0;
  int half_width = 0;
  std::vector<Mat> blocks;  // blocks[n + K] = g(n)
  double l1_norm = 0.0;     // sum of |g(n)|_2 over the window
  double decay_rate = 0.0;  // rho with |g(n)| <= C rho^|n| on the window
  double decay_const = 0.0;

  Mat operator()(int n) const {
    if (n < -half_width || n > half_width) return Mat::Zero(dim, dim);
    return blocks[static_cast<std::size_t>(n + half_width)];
  }
  const Mat& block(int n) const { return blocks[static_cast<std::size_t>(n + half_width)]; }
};

/// Builds g by g(1) = P^s, g(n+1) = P^s T g(n), and g(0) = -T^{-1} P^u,
/// g(n-1) = P^u T^{-1} g(n), extending the window until both end blocks are
/// below tail_tol times the accumulated l1 norm.
inline ConvolutionKernel kernel_g(const Mat& T, const HyperbolicSplitting& split,
                                  double tail_tol = 1e-14) {
  if (T.rows() != split.dim || T.cols() != split.dim)
    throw Error(ErrorCode::DimensionMismatch, "matrix and splitting dimensions differ");
  if (!(std::max(split.radius_s, split.radius_u_inv) < 1.0))
    throw Error(ErrorCode::NotHyperbolic, "splitting radii must be below one");
  const int d = split.dim;
  const Mat Tinv = T.inverse();
  // P^s T and P^u T^{-1} equal T and T^{-1} on the respective ranges; the
  // projection stops roundoff in the complementary subspace from growing.
  const Mat step_s = split.proj_s * T;
  const Mat step_u = split.proj_u * Tinv;

  std::vector<Mat> pos{split.proj_s};  // g(1), g(2), ...
  std::vector<Mat> neg{Mat(-Tinv * split.proj_u)};  // g(0), g(-1), ...
  std::vector<double> pos_norm{op_norm(pos[0])}, neg_norm{op_norm(neg[0])};
  double l1 = pos_norm[0] + neg_norm[0];

  const double rho = std::max(split.radius_s, split.radius_u_inv);
  const int predicted =
      static_cast<int>(std::ceil(std::log(tail_tol) / std::log(std::max(rho, 1e-300)))) + 10 * d;
  const int max_width = 2 * std::max(predicted, 1) + 10;

  int K = 1;
  // Window covers n = -K..K: needs g(K) = pos[K-1] and g(-K) = neg[K].
  while (true) {
    while (static_cast<int>(pos.size()) < K) {
      pos.push_back(step_s * pos.back());
      pos_norm.push_back(op_norm(pos.back()));
      l1 += pos_norm.back();
    }
    while (static_cast<int>(neg.size()) < K + 1) {
      neg.push_back(step_u * neg.back());
      neg_norm.push_back(op_norm(neg.back()));
      l1 += neg_norm.back();
    }
    if (pos_norm[K - 1] + neg_norm[K] <= tail_tol * l1) break;
    if (++K > max_width)
      throw Error(ErrorCode::NoDecay, "kernel blocks failed to decay within " + std::to_string(max_width));
  }

  ConvolutionKernel g;
  g.dim = d;
  g.half_width = K;
  g.blocks.resize(static_cast<std::size_t>(2 * K + 1));
  for (int n = 0; n <= K; ++n) g.blocks[static_cast<std::size_t>(K - n)] = neg[n];
  for (int n = 1; n <= K; ++n) g.blocks[static_cast<std::size_t>(K + n)] = pos[n - 1];
  g.l1_norm = 0.0;
  for (const auto& b : g.blocks) g.l1_norm += op_norm(b);

  // |g(n)| <= C rate^|n| on the window with rate = (rho + 1) / 2 and the
  // smallest such C.
  const double rate = 0.5 * (rho + 1.0);
  double C = 0.0;
  for (int n = -K; n <= K; ++n) C = std::max(C, op_norm(g.block(n)) / std::pow(rate, std::abs(n)));
  g.decay_rate = rate;
  g.decay_const = C;
  return g;
}

/// (g * w)(n) = sum_{h=0}^{N} g(n-h) w(h) for n = 0..N, with w zero-extended.
inline TruncatedSequence convolve(const ConvolutionKernel& g, const TruncatedSequence& w) {
  if (w.dim() != g.dim) throw Error(ErrorCode::DimensionMismatch, "kernel and sequence dimensions differ");
  const int len = w.length();
  TruncatedSequence u(g.dim, len);
  for (int n = 0; n < len; ++n) {
    const int lo = std::max(0, n - g.half_width);
    const int hi = std::min(len - 1, n + g.half_width);
    for (int h = lo; h <= hi; ++h) u[n].noalias() += g.block(n - h) * w[h];
  }
  return u;
}

/// ((S - T_*) u)(n) = u(n+1) - T u(n) for n = 0..N-1.
inline TruncatedSequence apply_shift_minus(const Mat& T, const TruncatedSequence& u) {
  if (T.rows() != u.dim()) throw Error(ErrorCode::DimensionMismatch, "operator and sequence dimensions differ");
  const int len = std::max(u.length() - 1, 0);
  TruncatedSequence r(u.dim(), len);
  for (int n = 0; n < len; ++n) r[n] = u[n + 1] - T * u[n];
  return r;
}

/// F(u)(n) = u(n+1) - f(u(n)) for n = 0..N-1.
inline TruncatedSequence apply_F(const SystemSpec& sys, const TruncatedSequence& u) {
  if (u.dim() != sys.dim) throw Error(ErrorCode::DimensionMismatch, "sequence and system dimensions differ");
  for (int n = 0; n < u.length(); ++n)
    if (!sys.in_domain(u[n]))
      throw Error(ErrorCode::DomainEscape, "entry " + std::to_string(n) + " left the system domain");
  const int len = std::max(u.length() - 1, 0);
  TruncatedSequence r(u.dim(), len);
  for (int n = 0; n < len; ++n) r[n] = u[n + 1] - sys.eval(u[n]);
  return r;
}

}  // namespace seqmanifold
