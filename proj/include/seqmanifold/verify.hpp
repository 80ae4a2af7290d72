#pragma once

// Named property suites run by `seqmanifold verify`. Every suite is
// deterministic for a given seed and returns measured values with their
// thresholds.

#include "seqmanifold/builtins.hpp"
#include "seqmanifold/germext.hpp"
#include "seqmanifold/manifold.hpp"
#include "seqmanifold/seqspace.hpp"
#include "seqmanifold/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace seqmanifold {

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation = "<=";
  bool pass = false;
};

inline Check check_le(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, "<=", value <= threshold};
}

inline Check check_ge(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, ">=", value >= threshold};
}

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> info;

  bool passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

struct VerifyOptions {
  unsigned seed = 0;
  int trials = 100;  // random matrices for kernel and norms
  int dim = 0;       // 0: draw d from {2, ..., 6}
  int samples = 1000;
  std::optional<Mat> matrix;
};

namespace detail {

inline int suite_dim(const VerifyOptions& o, std::mt19937_64& rng) {
  if (o.dim > 0) return o.dim;
  return std::uniform_int_distribution<int>(2, 6)(rng);
}

inline Mat diag_half_two() {
  Mat T = Mat::Zero(2, 2);
  T(0, 0) = 0.5;
  T(1, 1) = 2.0;
  return T;
}

// -(4/7) xi^2 from the functional equation w(xi) = (w(xi/2) - xi^2) / 2,
// unrolled until the argument is negligible.
inline double parabola_by_recursion(double xi, int depth = 80) {
  if (depth == 0 || std::abs(xi) < 1e-300) return 0.0;
  return 0.5 * (parabola_by_recursion(0.5 * xi, depth - 1) - xi * xi);
}

}  // namespace detail

inline SuiteResult suite_kernel(const VerifyOptions& o) {
  SuiteResult res{"kernel", {}, {}};
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss;
  double worst = 0.0, young = 0.0, tail = 0.0;
  for (int t = 0; t < o.trials; ++t) {
    const int d = detail::suite_dim(o, rng);
    const Mat T = random_hyperbolic_matrix(d, rng);
    const HyperbolicSplitting split = split_spectrum(T);
    const ConvolutionKernel g = kernel_g(T, split);
    const int K = g.half_width, support = 20, N = 2 * K + support + 2;
    TruncatedSequence w(d, N + 1);
    for (int n = K + 1; n <= K + support; ++n)
      for (int i = 0; i < d; ++i) w[n](i) = gauss(rng);
    const double wn = max_abs(w.matrix());
    const TruncatedSequence u = convolve(g, w);
    const TruncatedSequence r = apply_shift_minus(T, u);
    double err = 0.0;
    for (int n = 0; n < r.length(); ++n) err = std::max(err, sup_norm(Vec(r[n] - w[n])));
    worst = std::max(worst, err / wn);
    young = std::max(young, u.sup_norm() / (g.l1_norm * w.sup_norm()));
    tail = std::max(tail, (op_norm(g.block(K)) + op_norm(g.block(-K))) / g.l1_norm);
  }
  res.checks.push_back(check_le("right_inverse_max_rel_err", worst, 1e-10));
  res.checks.push_back(check_le("young_ratio", young, 1.0 + 1e-12));
  res.checks.push_back(check_le("window_tail_rel", tail, 1e-12));

  const Mat T = detail::diag_half_two();
  const ConvolutionKernel g = kernel_g(T, split_spectrum(T));
  res.checks.push_back(check_le("diag_l1_norm_err", std::abs(g.l1_norm - 3.0), 1e-12));
  res.info.push_back({"trials", o.trials});
  return res;
}

inline SuiteResult suite_norms(const VerifyOptions& o) {
  SuiteResult res{"norms", {}, {}};
  const Mat T = o.matrix ? *o.matrix : detail::diag_half_two();
  const HyperbolicSplitting split = split_spectrum(T);
  const AdaptedNorm norm = build_adapted_norm(T, split, 0.5);
  const int d = split.dim;

  // Closed form for diagonal matrices: per axis a geometric series in the
  // contracting entry a with the subspace weights (alpha, beta).
  if ((T - Mat(T.diagonal().asDiagonal())).isZero(0.0)) {
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
      const double t = std::abs(T(i, i));
      const bool stable = t < 1.0;
      const double a = stable ? t : 1.0 / t;
      const AnnulusWeights w = stable ? norm.stable.weights() : norm.unstable.weights();
      const double closed = 1.0 / (1.0 - a / w.beta) + (w.alpha / a) / (1.0 - w.alpha / a);
      const double value = norm(Vec(Vec::Unit(d, i)));
      if (i == 0) res.info.push_back({"e1_adapted_norm", value});
      worst = std::max(worst, std::abs(value - closed) / closed);
    }
    res.checks.push_back(check_le("diagonal_closed_form_rel_err", worst, 1e-12));
  }
  res.info.push_back({"lambda", norm.lambda});
  res.info.push_back({"lower_const", norm.lower_const});
  res.info.push_back({"upper_const", norm.upper_const});

  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss;
  auto random_vec = [&](int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = gauss(rng);
    return v;
  };

  // Norm axioms and equivalence constants for the given matrix.
  double tri = 0.0, hom = 0.0, equiv = 0.0;
  for (int k = 0; k < o.samples; ++k) {
    const Vec a = random_vec(d), b = random_vec(d);
    tri = std::max(tri, (norm(Vec(a + b)) - norm(a) - norm(b)) / (norm(a) + norm(b)));
    hom = std::max(hom, std::abs(norm(Vec(-2.5 * a)) - 2.5 * norm(a)) / norm(a));
    const double na = norm(a), e = a.norm();
    equiv = std::max({equiv, norm.lower_const * e / na, na / (norm.upper_const * e)});
  }
  res.checks.push_back(check_le("triangle_excess_rel", tri, 1e-12));
  res.checks.push_back(check_le("homogeneity_rel_err", hom, 1e-12));
  res.checks.push_back(check_le("equivalence_ratio", equiv, 1.0 + 1e-12));

  // Sampled contraction of T on ran P^s and T^{-1} on ran P^u.
  double excess = -kInfinity, radius_err = 0.0;
  int mats = 0;
  for (int t = 0; t < o.trials; ++t) {
    const int dim = detail::suite_dim(o, rng);
    const Mat M = random_hyperbolic_matrix(dim, rng, RandomMatrixOptions{0.1, 0.7, 10.0, 20.0});
    const HyperbolicSplitting sp = split_spectrum(M);
    const AdaptedNorm nm = build_adapted_norm(M, sp, 0.5);
    const Mat As = detail::restrict_to(M, sp.basis_s);
    const Mat Au = sp.dim_u() > 0 ? Mat(detail::restrict_to(M, sp.basis_u).inverse()) : Mat(0, 0);
    for (int k = 0; k < o.samples; ++k) {
      if (sp.dim_s() > 0) {
        const Vec c = random_vec(sp.dim_s());
        excess = std::max(excess, nm.stable(Vec(As * c)) / nm.stable(c) - nm.lambda);
      }
      if (sp.dim_u() > 0) {
        const Vec c = random_vec(sp.dim_u());
        excess = std::max(excess, nm.unstable(Vec(Au * c)) / nm.unstable(c) - nm.lambda);
      }
    }
    if (sp.dim_s() > 0) {
      Mat P = M * sp.proj_s, Pn = Mat::Identity(dim, dim);
      for (int n = 0; n < 64; ++n) Pn = Pn * P;
      radius_err = std::max(radius_err, std::abs(std::pow(op_norm(Pn), 1.0 / 64) / sp.radius_s - 1.0));
    }
    ++mats;
  }
  res.checks.push_back(check_le("contraction_excess_over_lambda", excess, 1e-9));
  res.checks.push_back(check_le("spectral_radius_formula_rel_err", radius_err, 0.05));
  res.info.push_back({"random_matrices", mats});
  return res;
}

inline SuiteResult suite_tangency(const VerifyOptions&) {
  SuiteResult res{"tangency", {}, {}};
  const LocalGraph q = local_graph(quadratic_system(), 0.2, {41});
  const TangencyReport tq = verify_tangency(q);
  res.checks.push_back(check_le("quadratic_Dw0", tq.max_derivative, 1e-6));
  res.checks.push_back(check_le("quadratic_w0", tq.w0_norm, q.newton_tol));
  const LocalGraph h = local_graph(henon_system(), 0.3, {81});
  const TangencyReport th = verify_tangency(h);
  res.checks.push_back(check_le("henon_Dw0", th.max_derivative, 1e-5));
  res.checks.push_back(check_le("henon_w0", th.w0_norm, h.newton_tol));
  const LocalGraph l = local_graph(linear_system(detail::diag_half_two()), 1.0, {11});
  res.checks.push_back(check_le("linear_Dw0", verify_tangency(l).max_derivative, 0.0));
  return res;
}

inline SuiteResult suite_invariance(const VerifyOptions&) {
  SuiteResult res{"invariance", {}, {}};
  const SystemSpec h = henon_system();
  const double coarse = verify_invariance(h, local_graph(h, 0.3, {81})).max_residual;
  const double fine = verify_invariance(h, local_graph(h, 0.3, {161})).max_residual;
  res.checks.push_back(check_le("henon_grid81", coarse, 1e-4));
  res.checks.push_back(check_ge("henon_refinement_factor", coarse / fine, 3.0));
  res.info.push_back({"henon_grid161", fine});

  const SystemSpec q = quadratic_system();
  const LocalGraph gq = local_graph(q, 0.2, {41});
  res.checks.push_back(check_le("quadratic_interpolated", verify_invariance(q, gq).max_residual, 2e-5));
  auto parabola = [&](const Vec& xi) -> std::optional<Vec> {
    if (std::abs(xi(0)) > gq.radius) return std::nullopt;
    // The stable and unstable bases are the coordinate axes here.
    return Vec::Constant(1, detail::parabola_by_recursion(xi(0)));
  };
  res.checks.push_back(check_le("quadratic_exact_reference", verify_invariance(q, gq, parabola).max_residual, 1e-9));

  const SystemSpec l = linear_system(detail::diag_half_two());
  res.checks.push_back(check_le("linear", verify_invariance(l, local_graph(l, 1.0, {11})).max_residual, 0.0));
  return res;
}

inline SuiteResult suite_extension(const VerifyOptions& o) {
  SuiteResult res{"extension", {}, {}};
  const int samples = std::max(o.samples, 1);

  for (const SystemSpec& germ : {scalar_germ(), planar_germ()}) {
    const std::string tag = "lipschitz_" + germ.name;
    const ExtendedMap ext = lipschitz_extension(germ, 0.1, LipschitzOptions{.seed = o.seed});
    res.checks.push_back(check_le(tag + "_agreement", sample_agreement(ext, samples, o.seed), 0.0));
    const ContractionSample cs = sample_contraction(ext, 10 * samples, 1e3, 1e-4, o.seed + 1);
    res.checks.push_back(check_le(tag + "_max_ratio", cs.max_ratio, ext.theta));
    res.checks.push_back(check_le(tag + "_theta", ext.theta, 1.0 - 1e-12));
    const AttractionReport ar = sample_attraction(ext, samples, 1e3, 1e-9, o.seed + 2);
    res.checks.push_back(check_ge(tag + "_attracted_fraction", double(ar.converged) / ar.orbits, 1.0));
    const auto [lf, li] = sample_bilipschitz(ext, samples, 10.0, o.seed + 3);
    res.info.push_back({tag + "_lip_forward", lf});
    res.info.push_back({tag + "_lip_inverse", li});
  }

  const SystemSpec g1 = scalar_germ();
  const ExtendedMap sm = smooth_extension(g1, 2.0, 1.0, 0.1, SmoothOptions{.seed = o.seed});
  res.checks.push_back(check_le("smooth_agreement", sample_agreement(sm, samples, o.seed), 1e-10));
  const ContractionSample cs = sample_contraction(sm, samples, 1e3, 1e-4, o.seed + 1);
  res.checks.push_back(check_le("smooth_max_ratio", cs.max_ratio, sm.theta));
  const AttractionReport ar = sample_attraction(sm, std::max(samples / 10, 1), 1e3, 1e-9, o.seed + 2);
  res.checks.push_back(check_ge("smooth_attracted_fraction", double(ar.converged) / ar.orbits, 1.0));

  // Isotopy of g = xi + xi^2 on [-0.1, 0.1].
  const IsotopyField X([](const Vec& v) { return Vec(v + v.cwiseProduct(v)); },
                       [](const Vec& v) { return Mat(Mat::Identity(1, 1) + 2.0 * Mat(v.asDiagonal())); });
  double iso = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const Vec xi = Vec::Constant(1, -0.1 + 0.005 * i);
    iso = std::max(iso, std::abs(integrate_isotopy(X, xi, 100)(0) - (xi(0) + xi(0) * xi(0))));
  }
  res.checks.push_back(check_le("isotopy_G1_minus_g", iso, 1e-8));

  for (int n : {3, 5}) {
    const auto s = taylor_corrected_cutoff(SinProfile{}, n);
    const auto t = taylor_corrected_cutoff(TanhProfile{}, n);
    int nonzero = 0;
    for (int j = 2; j <= n; ++j) nonzero += (s.series[j] != 0) + (t.series[j] != 0);
    res.checks.push_back(check_le("taylor_n" + std::to_string(n) + "_nonzero_coeffs", nonzero, 0));
    res.checks.push_back(
        check_ge("taylor_n" + std::to_string(n) + "_min_slope",
                 std::min(correction_error_slope(s), correction_error_slope(t)), n + 0.9));
  }
  return res;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"kernel", "norms", "tangency", "invariance", "extension"};
  return names;
}

inline std::vector<SuiteResult> run_suite(const std::string& name, const VerifyOptions& o) {
  if (name == "all") {
    std::vector<SuiteResult> out;
    for (const auto& n : suite_names()) out.push_back(run_suite(n, o).front());
    return out;
  }
  if (name == "kernel") return {suite_kernel(o)};
  if (name == "norms") return {suite_norms(o)};
  if (name == "tangency") return {suite_tangency(o)};
  if (name == "invariance") return {suite_invariance(o)};
  if (name == "extension") return {suite_extension(o)};
  throw Error(ErrorCode::UnknownSuite, "unknown suite '" + name + "'");
}

}  // namespace seqmanifold
