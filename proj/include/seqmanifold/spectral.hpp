#pragma once

// Hyperbolic spectral splitting of a real matrix and adapted norms.

#include "seqmanifold/error.hpp"
#include "seqmanifold/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace seqmanifold {

/// Spectral projections onto the parts of the spectrum inside (P^s) and
/// outside (P^u) the unit circle, with orthonormal bases of their ranges.
struct HyperbolicSplitting {
  int dim = 0;
  Mat proj_s;
  Mat proj_u;
  double radius_s = 0.0;      // max |lambda| on E^s, 0 if E^s = {0}
  double radius_u_inv = 0.0;  // 1 / min |lambda| on E^u, 0 if E^u = {0}
  Mat basis_s;                // dim x dim_s, orthonormal columns
  Mat basis_u;                // dim x dim_u, orthonormal columns
  double gap = 0.0;           // min over eigenvalues of ||lambda| - 1|
  CVec eigenvalues;

  int dim_s() const { return static_cast<int>(basis_s.cols()); }
  int dim_u() const { return static_cast<int>(basis_u.cols()); }

  /// Coordinates of P^s v in basis_s.
  Vec stable_coords(const Vec& v) const { return basis_s.transpose() * (proj_s * v); }
  /// Coordinates of P^u v in basis_u.
  Vec unstable_coords(const Vec& v) const { return basis_u.transpose() * (proj_u * v); }
  Vec embed_stable(const Vec& xi) const { return basis_s * xi; }
  Vec embed_unstable(const Vec& w) const { return basis_u * w; }
};

namespace detail {

// Orthonormal basis of the range of a projection of known rank.
inline Mat range_basis(const Mat& proj, int rank) {
  const auto d = proj.rows();
  if (rank == 0) return Mat(d, 0);
  Eigen::ColPivHouseholderQR<Mat> qr(proj);
  Mat q = qr.householderQ();
  Mat basis = q.leftCols(rank);
  // Orientation: largest-magnitude entry of each column is positive.
  for (int c = 0; c < rank; ++c) {
    Eigen::Index imax = 0;
    basis.col(c).cwiseAbs().maxCoeff(&imax);
    if (basis(imax, c) < 0.0) basis.col(c) *= -1.0;
  }
  return basis;
}

}  // namespace detail

/// Splits the spectrum of T along the unit circle.
///
/// The projector is formed from the complex eigendecomposition
/// T = V diag(lambda) V^{-1}: P^s = Re(V_s W_s) where V_s are the stable
/// eigenvectors and W_s the matching rows of V^{-1}.
inline HyperbolicSplitting split_spectrum(const Mat& T, double gap_tol = 1e-8) {
  if (T.rows() != T.cols() || T.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "split_spectrum needs a nonempty square matrix");
  const int d = static_cast<int>(T.rows());

  Eigen::JacobiSVD<Mat> svd(T);
  const auto& sv = svd.singularValues();
  if (!(sv(d - 1) > 1e-13 * sv(0)))
    throw Error(ErrorCode::Singular, "matrix is not invertible");

  Eigen::EigenSolver<Mat> es(T);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::NotHyperbolic, "eigenvalue solver failed");
  const CVec lambda = es.eigenvalues();
  const CMat V = es.eigenvectors();

  HyperbolicSplitting out;
  out.dim = d;
  out.eigenvalues = lambda;
  out.gap = kInfinity;
  std::vector<int> stable, unstable;
  double min_unstable = kInfinity;
  for (int i = 0; i < d; ++i) {
    const double r = std::abs(lambda(i));
    const double dist = std::abs(r - 1.0);
    out.gap = std::min(out.gap, dist);
    if (dist < gap_tol)
      throw Error(ErrorCode::NotHyperbolic,
                  "eigenvalue of modulus " + std::to_string(r) + " within gap_tol of the unit circle");
    if (r < 1.0) {
      stable.push_back(i);
      out.radius_s = std::max(out.radius_s, r);
    } else {
      unstable.push_back(i);
      min_unstable = std::min(min_unstable, r);
    }
  }
  out.radius_u_inv = unstable.empty() ? 0.0 : 1.0 / min_unstable;

  const CMat W = V.partialPivLu().inverse();
  CMat ps = CMat::Zero(d, d);
  for (int i : stable) ps += V.col(i) * W.row(i);
  out.proj_s = ps.real();
  out.proj_u = Mat::Identity(d, d) - out.proj_s;
  out.basis_s = detail::range_basis(out.proj_s, static_cast<int>(stable.size()));
  out.basis_u = detail::range_basis(out.proj_u, static_cast<int>(unstable.size()));
  return out;
}

/// Weights of the series norm on one invariant subspace, stated for the
/// operator A that is contracting there (T on E^s, T^{-1} on E^u):
///   |c| = sum_{n>=1} alpha^n |A^{-n} c|_2 + sum_{n>=0} beta^{-n} |A^n c|_2.
/// Requires alpha < min|sigma(A)| and max|sigma(A)| < beta.
struct AnnulusWeights {
  double alpha = 0.0;
  double beta = 0.0;
};

struct SeriesTruncation {
  double term_tol = 1e-12;  // last kept term relative to |c|_2
  double tail_tol = 1e-15;  // certified discarded tail relative to |c|_2
  int max_terms = 200000;
};

/// Series norm on a single invariant subspace, evaluated in basis coordinates.
/// The tables hold the pre-weighted powers beta^{-n} A^n (n = 0..) and
/// alpha^n A^{-n} (n = 1..), so evaluation is a sum of Euclidean norms.
class SubspaceNorm {
 public:
  SubspaceNorm() = default;

  SubspaceNorm(const Mat& restricted, AnnulusWeights weights, const SeriesTruncation& trunc)
      : weights_(weights) {
    const auto k = restricted.rows();
    if (k == 0) return;
    build_table(restricted / weights.beta, forward_, true, trunc);
    const Mat inverse = restricted.inverse();
    build_table(inverse * weights.alpha, backward_, false, trunc);

    // Contraction certificate for the truncated sum: the kept forward terms
    // must make the defect beta * |beta^{-(L+1)} A^{L+1}| <= beta - alpha.
    Mat next = forward_.back() * restricted / weights.beta;
    while (weights.beta * op_norm(next) > weights.beta - weights.alpha &&
           static_cast<int>(forward_.size()) < trunc.max_terms) {
      forward_.push_back(next);
      next = next * restricted / weights.beta;
    }
    equivalence_ = 0.0;
    for (const auto& m : forward_) equivalence_ += op_norm(m);
    for (const auto& m : backward_) equivalence_ += op_norm(m);

    // All terms stacked so evaluation is a single matrix-vector product.
    const auto terms = static_cast<Eigen::Index>(forward_.size() + backward_.size());
    stacked_.resize(terms * k, k);
    Eigen::Index row = 0;
    for (const auto* table : {&forward_, &backward_})
      for (const auto& m : *table) {
        stacked_.middleRows(row, k) = m;
        row += k;
      }
  }

  bool trivial() const { return forward_.empty(); }
  AnnulusWeights weights() const { return weights_; }
  int truncation() const {
    return static_cast<int>(std::max(forward_.size(), backward_.size() + 1));
  }
  const std::vector<Mat>& forward_table() const { return forward_; }
  const std::vector<Mat>& backward_table() const { return backward_; }
  /// Upper constant c with |c|_sub <= c * |c|_2.
  double equivalence_bound() const { return equivalence_; }

  double operator()(const Vec& coords) const {
    if (stacked_.rows() == 0) return 0.0;
    const Vec y = stacked_ * coords;
    const Eigen::Index k = stacked_.cols();
    double sum = 0.0;
    for (Eigen::Index row = 0; row < y.size(); row += k) sum += y.segment(row, k).norm();
    return sum;
  }

 private:
  // Appends M^n (n = 0.. for forward, n = 1.. for backward) until the last
  // term is below term_tol and the submultiplicative tail bound
  // t/(1-t) * sum_{j=1..L} |M^j| with t = |M^L| is below tail_tol.
  static void build_table(const Mat& step, std::vector<Mat>& table, bool include_identity,
                          const SeriesTruncation& trunc) {
    const auto k = step.rows();
    Mat power = Mat::Identity(k, k);
    if (include_identity) table.push_back(power);
    double partial = 0.0;
    for (int n = 1; n <= trunc.max_terms; ++n) {
      power = power * step;
      table.push_back(power);
      const double t = op_norm(power);
      partial += t;
      if (t <= trunc.term_tol && t < 1.0 && t / (1.0 - t) * partial <= trunc.tail_tol) return;
    }
    throw Error(ErrorCode::AnnulusViolation, "adapted norm series did not converge within max_terms");
  }

  AnnulusWeights weights_;
  std::vector<Mat> forward_;
  std::vector<Mat> backward_;
  Mat stacked_;
  double equivalence_ = 0.0;
};

/// Equivalent norm |xi|_ad = max(|P^s xi|_s, |P^u xi|_u) in which T contracts
/// E^s and T^{-1} contracts E^u by at least `lambda`.
struct AdaptedNorm {
  HyperbolicSplitting splitting;
  double alpha_s = 0.0, beta_s = 0.0;  // bracket sigma(T|E^s)
  double alpha_u = 0.0, beta_u = 0.0;  // bracket sigma(T|E^u)
  SubspaceNorm stable;
  SubspaceNorm unstable;
  double lambda = 0.0;
  double lower_const = 0.0;  // c1 |xi|_2 <= |xi|_ad
  double upper_const = 0.0;  // |xi|_ad <= c2 |xi|_2

  int truncation_s() const { return stable.truncation(); }
  int truncation_u() const { return unstable.truncation(); }

  double operator()(const Vec& xi) const {
    if (xi.size() != splitting.dim)
      throw Error(ErrorCode::DimensionMismatch, "adapted norm evaluated on a vector of wrong size");
    double s = stable.trivial() ? 0.0 : stable(splitting.stable_coords(xi));
    double u = unstable.trivial() ? 0.0 : unstable(splitting.unstable_coords(xi));
    return std::max(s, u);
  }
};

namespace detail {

inline Mat restrict_to(const Mat& op, const Mat& basis) {
  return basis.transpose() * op * basis;
}

inline void check_annulus(const Mat& restricted, AnnulusWeights w, const char* which) {
  if (restricted.rows() == 0) return;
  const CVec ev = restricted.eigenvalues();
  double lo = kInfinity, hi = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    lo = std::min(lo, std::abs(ev(i)));
    hi = std::max(hi, std::abs(ev(i)));
  }
  if (!(w.alpha > 0.0 && w.alpha < lo && hi < w.beta && w.beta < 1.0))
    throw Error(ErrorCode::AnnulusViolation,
                std::string(which) + " weights (alpha=" + std::to_string(w.alpha) +
                    ", beta=" + std::to_string(w.beta) + ") do not bracket the spectrum [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace detail

/// Builds the adapted norm from explicit weights. `stable` applies to T on
/// E^s, `unstable_inverse` to T^{-1} on E^u.
inline AdaptedNorm build_adapted_norm(const Mat& T, const HyperbolicSplitting& split,
                                      AnnulusWeights stable, AnnulusWeights unstable_inverse,
                                      const SeriesTruncation& trunc = {}) {
  if (T.rows() != split.dim || T.cols() != split.dim)
    throw Error(ErrorCode::DimensionMismatch, "matrix and splitting dimensions differ");
  AdaptedNorm norm;
  norm.splitting = split;

  const Mat a_s = detail::restrict_to(T, split.basis_s);
  const Mat a_u = split.dim_u() > 0 ? Mat(detail::restrict_to(T, split.basis_u).inverse())
                                    : Mat(0, 0);
  detail::check_annulus(a_s, stable, "stable");
  detail::check_annulus(a_u, unstable_inverse, "unstable");

  norm.stable = SubspaceNorm(a_s, stable, trunc);
  norm.unstable = SubspaceNorm(a_u, unstable_inverse, trunc);

  double lambda = 0.0;
  if (split.dim_s() > 0) {
    norm.alpha_s = stable.alpha;
    norm.beta_s = stable.beta;
    lambda = std::max(lambda, stable.beta);
  }
  if (split.dim_u() > 0) {
    norm.alpha_u = 1.0 / unstable_inverse.beta;
    norm.beta_u = 1.0 / unstable_inverse.alpha;
    lambda = std::max(lambda, unstable_inverse.beta);
  }
  norm.lambda = lambda;

  // Each subspace norm dominates the Euclidean norm of its coordinates, and
  // |xi|_2 <= |P^s xi|_2 + |P^u xi|_2.
  const bool both = split.dim_s() > 0 && split.dim_u() > 0;
  norm.lower_const = both ? 0.5 : 1.0;
  norm.upper_const = std::max(norm.stable.equivalence_bound() * op_norm(split.proj_s),
                              norm.unstable.equivalence_bound() * op_norm(split.proj_u));
  return norm;
}

/// Default weights: beta = rho + margin * (1 - rho) where rho is the spectral
/// radius of the contracting restriction, alpha = (1 - margin) * min|sigma|.
inline AdaptedNorm build_adapted_norm(const Mat& T, const HyperbolicSplitting& split,
                                      double beta_margin = 0.5,
                                      const SeriesTruncation& trunc = {}) {
  if (!(beta_margin > 0.0 && beta_margin < 1.0))
    throw Error(ErrorCode::AnnulusViolation, "beta_margin must lie in (0, 1)");
  auto weights_for = [&](const Mat& restricted) {
    AnnulusWeights w;
    if (restricted.rows() == 0) return w;
    const CVec ev = restricted.eigenvalues();
    double lo = kInfinity, hi = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      lo = std::min(lo, std::abs(ev(i)));
      hi = std::max(hi, std::abs(ev(i)));
    }
    w.beta = hi + beta_margin * (1.0 - hi);
    w.alpha = (1.0 - beta_margin) * lo;
    return w;
  };
  const Mat a_s = detail::restrict_to(T, split.basis_s);
  const Mat a_u = split.dim_u() > 0 ? Mat(detail::restrict_to(T, split.basis_u).inverse())
                                    : Mat(0, 0);
  return build_adapted_norm(T, split, weights_for(a_s), weights_for(a_u), trunc);
}

inline double adapted_norm_eval(const AdaptedNorm& norm, const Vec& xi) { return norm(xi); }

}  // namespace seqmanifold
