#pragma once

// Extension of the germ of a local attractor at 0 to a global topological
// contraction: the Lipschitz cutoff construction, the isotopy vector field
// with its bounded smooth extension, and the Taylor-correcting recursion for
// cutoff maps.

#include "seqmanifold/dynsys.hpp"
#include "seqmanifold/error.hpp"
#include "seqmanifold/linalg.hpp"
#include "seqmanifold/ode.hpp"
#include "seqmanifold/series.hpp"
#include "seqmanifold/spectral.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

namespace seqmanifold {

// ---------------------------------------------------------------------------
// Cutoff profiles

enum class Smoothness { lipschitz, smooth };

/// Radial profile chi with chi = 1 on [0, inner] and chi = 0 on [outer, inf).
struct CutoffProfile {
  double inner = 1.0;
  double outer = 2.0;
  Smoothness smoothness = Smoothness::lipschitz;

  double operator()(double s) const {
    if (s <= inner) return 1.0;
    if (s >= outer) return 0.0;
    const double x = (s - inner) / (outer - inner);
    if (smoothness == Smoothness::lipschitz) return 1.0 - x;
    return 1.0 - smooth_step(x);
  }

  /// Bound on the Lipschitz constant of xi -> chi(|xi|) xi in any norm:
  /// sup chi + sup_s |chi'(s)| s.
  double lipschitz_constant() const {
    if (smoothness == Smoothness::lipschitz) return 1.0 + outer / (outer - inner);
    double best = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      const double x = i / 4000.0;
      best = std::max(best, smooth_step_derivative(x) * (inner + x * (outer - inner)) / (outer - inner));
    }
    return 1.0 + best;
  }

  /// C-infinity step: 0 for x <= 0, 1 for x >= 1.
  static double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
  }

  static double smooth_step_derivative(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    const double da = a / (x * x), db = -b / ((1.0 - x) * (1.0 - x));
    return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
  }
};

/// chi(s) = 1 on [0,1], 2 - s on [1,2], 0 beyond; lip of chi(|xi|) xi is at most 3.
inline CutoffProfile piecewise_linear_cutoff() { return CutoffProfile{1.0, 2.0, Smoothness::lipschitz}; }

inline CutoffProfile smooth_cutoff(double inner, double outer) {
  if (!(inner > 0.0 && outer > inner)) throw Error(ErrorCode::BadConfig, "cutoff needs 0 < inner < outer");
  return CutoffProfile{inner, outer, Smoothness::smooth};
}

// ---------------------------------------------------------------------------
// Shared helpers

enum class ExtensionKind { lipschitz, smooth };

inline const char* to_string(ExtensionKind k) { return k == ExtensionKind::lipschitz ? "lipschitz" : "smooth"; }

/// A globally defined map that agrees with the germ near 0 and satisfies
/// |f~(xi)|_ad <= theta |xi|_ad.
struct ExtendedMap {
  SystemSpec base_system;
  VectorMap eval;
  VectorMap eval_integrated;  // smooth kind: always runs the flow; lipschitz kind: same as eval
  std::optional<VectorMap> inverse;
  double agreement_radius = 0.0;  // f~ = f on the adapted ball of this radius
  double theta = 0.0;
  ExtensionKind kind = ExtensionKind::lipschitz;
  AdaptedNorm norm;
  double op_norm_T = 0.0;     // |T|_ad, sampled and capped by the certified bound
  double lip_estimate = 0.0;  // lipschitz kind: sampled lip f0 (inflated)
  double field_bound = 0.0;   // smooth kind: sampled sup |X(t,xi)| / |xi| on B_r (inflated)
  double cutoff_scale = 0.0;  // lipschitz: lambda; smooth: r
  double epsilon = 0.0, r0 = 0.0, s0 = 0.0;
  int samples = 0;
};

/// g(xi) = f(x + xi) - x, so the fixed point moves to the origin.
inline SystemSpec translate_to_origin(const SystemSpec& sys) {
  const Vec x = sys.fixed_point;
  SystemSpec out = sys;
  out.eval = [f = sys.eval, x](const Vec& xi) { return Vec(f(Vec(x + xi)) - x); };
  out.jacobian = [J = sys.jacobian, x](const Vec& xi) { return J(Vec(x + xi)); };
  if (sys.inverse)
    out.inverse = VectorMap([inv = *sys.inverse, x](const Vec& xi) { return Vec(inv(Vec(x + xi)) - x); });
  out.fixed_point = Vec::Zero(sys.dim);
  return out;
}

namespace detail {

inline void require_origin(const SystemSpec& germ) {
  if (germ.fixed_point.size() != germ.dim || germ.fixed_point.norm() > 1e-14)
    throw Error(ErrorCode::BadConfig, "germ must have its fixed point at the origin (use translate_to_origin)");
}

inline AdaptedNorm attractor_norm(const SystemSpec& germ, double beta_margin) {
  const Mat T = germ.linearization();
  HyperbolicSplitting split;
  try {
    split = split_spectrum(T);
  } catch (const Error& e) {
    throw Error(ErrorCode::NotLocalAttractor, e.what());
  }
  if (split.dim_u() != 0) throw Error(ErrorCode::NotLocalAttractor, "origin has unstable directions");
  return build_adapted_norm(T, split, beta_margin);
}

// Random point with adapted norm equal to `radius`.
inline Vec point_on_sphere(const AdaptedNorm& norm, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vec v(norm.splitting.dim);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
  return v * (radius / norm(v));
}

inline Vec point_in_ball(const AdaptedNorm& norm, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double d = norm.splitting.dim;
  return point_on_sphere(norm, radius * std::pow(uni(rng), 1.0 / d), rng);
}

}  // namespace detail

/// Sampled operator norm of M in the adapted norm: random directions
/// refined by a shrinking random search around the best one.
inline double adapted_operator_norm(const AdaptedNorm& norm, const Mat& M, int samples = 4000,
                                    unsigned seed = 0) {
  std::mt19937_64 rng(seed);
  const int d = norm.splitting.dim;
  auto ratio = [&](const Vec& v) { return norm(Vec(M * v)) / norm(v); };
  Vec best = detail::point_on_sphere(norm, 1.0, rng);
  double best_ratio = ratio(best);
  for (int i = 1; i < samples; ++i) {
    Vec v = detail::point_on_sphere(norm, 1.0, rng);
    const double r = ratio(v);
    if (r > best_ratio) {
      best_ratio = r;
      best = v;
    }
  }
  if (d > 1) {
    std::normal_distribution<double> gauss;
    for (double step = 0.1; step > 1e-10; step *= 0.7)
      for (int k = 0; k < 20; ++k) {
        Vec v = best;
        for (int i = 0; i < d; ++i) v(i) += step * gauss(rng) * best.norm();
        const double r = ratio(v);
        if (r > best_ratio) {
          best_ratio = r;
          best = v;
        }
      }
  }
  return best_ratio;
}

/// (1 + k lip) |T| with k the Lipschitz constant of the cutoff map.
inline double lipschitz_contraction_factor(double lip_f0, double op_norm_T, double k = 3.0) {
  return (1.0 + k * lip_f0) * op_norm_T;
}

/// Sampled Lipschitz constant of `fn` on the adapted ball of `radius`:
/// half the pairs are independent, half are close (relative offset 1e-4).
inline double sampled_lipschitz(const VectorMap& fn, const AdaptedNorm& norm, double radius, int pairs,
                                unsigned seed) {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Vec a = detail::point_in_ball(norm, radius, rng);
    Vec b;
    if (k % 2 == 0) {
      b = detail::point_in_ball(norm, radius, rng);
    } else {
      b = a + detail::point_on_sphere(norm, 1e-4 * radius, rng);
      const double nb = norm(b);
      if (nb > radius) b *= radius / nb;
    }
    const double den = norm(Vec(a - b));
    if (den <= 0.0) continue;
    best = std::max(best, norm(Vec(fn(a) - fn(b))) / den);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Lipschitz extension

struct LipschitzOptions {
  int pairs = 10000;
  double safety = 1.2;
  unsigned seed = 0;
  double beta_margin = 0.5;
  int halvings = 60;
  int bisections = 40;
};

/// f~(xi) = T(xi + f0(phi_lambda(xi))) with f = T(id + f0) and
/// phi_lambda(xi) = chi(|xi|/lambda) xi for the piecewise-linear chi.
/// lambda is the largest radius (at most `lambda_scale`, found by halving
/// then bisection) on which the inflated sampled lip f0 satisfies
/// lip < 1/3 and (1 + 3 lip)|T| <= (1 + |T|)/2, which keeps theta away from 1.
inline ExtendedMap lipschitz_extension(const SystemSpec& germ, double lambda_scale,
                                       const LipschitzOptions& opts = {}) {
  detail::require_origin(germ);
  if (!(lambda_scale > 0.0)) throw Error(ErrorCode::BadConfig, "lambda_scale must be positive");
  const AdaptedNorm norm = detail::attractor_norm(germ, opts.beta_margin);
  const Mat T = germ.linearization();
  const Mat Tinv = T.inverse();
  const CutoffProfile chi = piecewise_linear_cutoff();
  const double k = chi.lipschitz_constant();
  const double opT = std::min(norm.lambda, adapted_operator_norm(norm, T, 4000, opts.seed) * (1.0 + 1e-6));

  auto f0 = [f = germ.eval, Tinv](const Vec& xi) { return Vec(Tinv * f(xi) - xi); };
  auto lip_at = [&](double radius) {
    return opts.safety * sampled_lipschitz(f0, norm, radius, opts.pairs, opts.seed + 1);
  };
  const double theta_cap = 0.5 * (1.0 + opT);
  auto admissible = [&](double lip) { return lip < 1.0 / k && lipschitz_contraction_factor(lip, opT, k) <= theta_cap; };

  ExtendedMap ext;
  ext.base_system = germ;
  ext.kind = ExtensionKind::lipschitz;
  ext.norm = norm;
  ext.op_norm_T = opT;
  ext.samples = opts.pairs;

  double lip_hi = lip_at(lambda_scale);
  if (lip_hi <= 1e-9) {
    // f0 vanishes to roundoff: the germ is linear and needs no cutoff.
    ext.eval = germ.eval;
    ext.eval_integrated = germ.eval;
    ext.inverse = VectorMap([Tinv](const Vec& y) { return Vec(Tinv * y); });
    ext.agreement_radius = kInfinity;
    ext.cutoff_scale = kInfinity;
    ext.lip_estimate = lip_hi;
    ext.theta = opT;
    return ext;
  }

  double lambda = lambda_scale, lip = lip_hi;
  if (!admissible(lip_hi)) {
    double hi = lambda_scale, lo = lambda_scale;
    double lip_lo = lip_hi;
    int h = 0;
    for (; h < opts.halvings && !admissible(lip_lo); ++h) {
      hi = lo;
      lo *= 0.5;
      lip_lo = lip_at(lo);
    }
    if (!admissible(lip_lo))
      throw Error(ErrorCode::NoContractionRadius, "no sampled radius satisfies the contraction condition");
    for (int b = 0; b < opts.bisections; ++b) {
      const double mid = 0.5 * (lo + hi);
      const double lm = lip_at(mid);
      if (admissible(lm)) {
        lo = mid;
        lip_lo = lm;
      } else {
        hi = mid;
      }
    }
    lambda = lo;
    lip = lip_lo;
  }

  ext.lip_estimate = lip;
  ext.theta = lipschitz_contraction_factor(lip, opT, k);
  ext.cutoff_scale = lambda;
  ext.agreement_radius = lambda * chi.inner;

  auto state = std::make_shared<const std::tuple<VectorMap, Mat, Mat, AdaptedNorm, CutoffProfile, double>>(
      germ.eval, T, Tinv, norm, chi, lambda);
  ext.eval = [state](const Vec& xi) {
    const auto& [f, Tm, Ti, nrm, profile, lam] = *state;
    const double c = profile(nrm(xi) / lam);
    if (c == 1.0) return f(xi);  // identical to T(xi + f0(xi))
    const Vec p = c * xi;
    return Vec(Tm * (xi + (Ti * f(p) - p)));
  };
  ext.eval_integrated = ext.eval;
  // xi = T^{-1} y - f0(phi(xi)) is a contraction since lip(f0 o phi) < 1.
  ext.inverse = VectorMap([state](const Vec& y) {
    const auto& [f, Tm, Ti, nrm, profile, lam] = *state;
    const Vec z = Ti * y;
    Vec xi = z;
    for (int it = 0; it < 200; ++it) {
      const double c = profile(nrm(xi) / lam);
      const Vec p = c * xi;
      const Vec next = z - (Ti * f(p) - p);
      const double change = (next - xi).norm();
      xi = next;
      if (change <= 1e-15 * std::max(1.0, xi.norm())) break;
    }
    return xi;
  });
  return ext;
}

// ---------------------------------------------------------------------------
// Isotopy vector field

/// X(t, eta) = g(H(t, eta)) - H(t, eta), where H(t, .) inverts
/// xi -> t g(xi) + (1 - t) xi. Trajectories of X starting at xi are the
/// straight segments t -> t g(xi) + (1 - t) xi, so G(1, xi) = g(xi).
class IsotopyField {
 public:
  IsotopyField(VectorMap g, JacobianMap dg) : g_(std::move(g)), dg_(std::move(dg)) {}

  /// Newton inversion of the straight-line homotopy, polished one step past
  /// the 1e-13 tolerance.
  Vec homotopy_inverse(double t, const Vec& eta) const {
    if (eta.isZero(0.0)) return eta;
    const auto d = eta.size();
    Vec xi = eta;
    const double tol = 1e-13 * std::max(1.0, eta.norm());
    for (int it = 0; it < 50; ++it) {
      const Vec r = t * g_(xi) + (1.0 - t) * xi - eta;
      if (!r.allFinite()) break;
      const bool done = r.norm() <= tol;
      const Mat J = t * dg_(xi) + (1.0 - t) * Mat::Identity(d, d);
      Eigen::PartialPivLU<Mat> lu(J);
      const Vec step = lu.solve(r);
      if (!step.allFinite()) break;
      xi -= step;
      if (done) return xi;
    }
    throw Error(ErrorCode::NoConvergence, "homotopy inversion failed; eta is outside the invertibility neighbourhood");
  }

  Vec operator()(double t, const Vec& eta) const {
    if (eta.isZero(0.0)) return Vec::Zero(eta.size());
    const Vec h = homotopy_inverse(t, eta);
    return g_(h) - h;
  }

  const VectorMap& g() const { return g_; }

 private:
  VectorMap g_;
  JacobianMap dg_;
};

inline Vec isotopy_field(const VectorMap& g, const JacobianMap& dg, double t, const Vec& eta) {
  return IsotopyField(g, dg)(t, eta);
}

/// G(1, xi) for dG/dt = field(t, G), G(0) = xi, by `steps` RK4 steps.
template <class Field>
Vec integrate_isotopy(const Field& field, const Vec& xi, int steps = 100) {
  return rk4_integrate([&](double t, const Vec& y) { return Vec(field(t, y)); }, xi, 0.0, 1.0, steps);
}

struct StepDoublingReport {
  std::vector<int> steps;
  std::vector<double> differences;  // max |G_N - G_2N| over the points, per N
  double observed_order = 0.0;      // log2 of the last ratio of successive differences
};

/// max over `points` of |G_N(1, xi) - G_{2N}(1, xi)| for N = base, 2 base, ...
template <class Field>
StepDoublingReport step_doubling(const Field& field, const std::vector<Vec>& points, int base, int levels = 3) {
  StepDoublingReport rep;
  std::vector<std::vector<Vec>> runs;
  for (int l = 0; l <= levels; ++l) {
    const int n = base << l;
    rep.steps.push_back(n);
    std::vector<Vec> out;
    for (const Vec& p : points) out.push_back(integrate_isotopy(field, p, n));
    runs.push_back(std::move(out));
  }
  for (int l = 0; l < levels; ++l) {
    double m = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) m = std::max(m, (runs[l][i] - runs[l + 1][i]).norm());
    rep.differences.push_back(m);
  }
  const auto k = rep.differences.size();
  if (k >= 2 && rep.differences[k - 1] > 0.0)
    rep.observed_order = std::log2(rep.differences[k - 2] / rep.differences[k - 1]);
  else
    rep.observed_order = kInfinity;
  return rep;
}

// ---------------------------------------------------------------------------
// Smooth extension

struct SmoothOptions {
  int steps = 100;
  int field_samples = 2000;
  double safety = 1.2;
  unsigned seed = 0;
  double beta_margin = 0.5;
  double r_start = 0.5;  // largest radius tried for the field bound
  int halvings = 60;
};

/// f~ = T G~(1, .) where G~ integrates X~(t, xi) = X(t, psi(xi)),
/// psi(xi) = (r/r0) phi((r0/r) xi), phi(xi) = chi(|xi|) xi with the smooth
/// profile equal to 1 on [0, s0] and 0 beyond r0. r is the largest radius
/// (halving from r_start) with sampled |X(t, xi)| <= epsilon |xi| on B_r.
/// theta = |T| exp(epsilon r0 / s0).
inline ExtendedMap smooth_extension(const SystemSpec& germ, double r0, double s0, double epsilon,
                                    const SmoothOptions& opts = {}) {
  detail::require_origin(germ);
  if (!(s0 > 0.0 && r0 > s0)) throw Error(ErrorCode::BadConfig, "need 0 < s0 < r0");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::BadConfig, "epsilon must be positive");
  const AdaptedNorm norm = detail::attractor_norm(germ, opts.beta_margin);
  const Mat T = germ.linearization();
  const Mat Tinv = T.inverse();
  const double opT = std::min(norm.lambda, adapted_operator_norm(norm, T, 4000, opts.seed) * (1.0 + 1e-6));
  const double growth = std::exp(epsilon * r0 / s0);
  const double theta = opT * growth;
  if (!(theta < 1.0))
    throw Error(ErrorCode::EpsilonTooLarge,
                "certificate |T| exp(eps r0/s0) = " + std::to_string(theta) + " is not below one");

  auto field = std::make_shared<const IsotopyField>(
      [f = germ.eval, Tinv](const Vec& xi) { return Vec(Tinv * f(xi)); },
      [J = germ.jacobian, Tinv](const Vec& xi) { return Mat(Tinv * J(xi)); });

  // Sampled sup |X(t, xi)| / |xi| over t in {0, 0.1, ..., 1} and xi in B_r,
  // with half the points on the sphere |xi| = r where the ratio peaks.
  auto field_ratio = [&](double radius) {
    std::mt19937_64 rng(opts.seed + 2);
    double best = 0.0;
    for (int k = 0; k < opts.field_samples; ++k) {
      const Vec xi = k % 2 == 0 ? detail::point_on_sphere(norm, radius, rng)
                                : detail::point_in_ball(norm, radius, rng);
      const double nx = norm(xi);
      if (nx == 0.0) continue;
      for (int j = 0; j <= 10; ++j) {
        Vec x;
        try {
          x = (*field)(0.1 * j, xi);
        } catch (const Error&) {
          return kInfinity;
        }
        best = std::max(best, norm(x) / nx);
      }
    }
    return opts.safety * best;
  };

  double r = opts.r_start;
  double bound = field_ratio(r);
  if (bound <= 1e-9) {
    // X vanishes to roundoff at every sample: the germ is linear, f~ = f = T.
    ExtendedMap ext;
    ext.base_system = germ;
    ext.kind = ExtensionKind::smooth;
    ext.norm = norm;
    ext.op_norm_T = opT;
    ext.theta = opT;
    ext.eval = germ.eval;
    ext.eval_integrated = germ.eval;
    ext.inverse = VectorMap([Tinv](const Vec& y) { return Vec(Tinv * y); });
    ext.agreement_radius = kInfinity;
    ext.cutoff_scale = kInfinity;
    ext.epsilon = epsilon;
    ext.r0 = r0;
    ext.s0 = s0;
    ext.samples = opts.field_samples;
    return ext;
  }
  for (int h = 0; h < opts.halvings && !(bound <= epsilon); ++h) {
    r *= 0.5;
    bound = field_ratio(r);
  }
  if (!(bound <= epsilon))
    throw Error(ErrorCode::NoContractionRadius, "no sampled radius satisfies |X(t,xi)| <= eps |xi|");

  const CutoffProfile chi = smooth_cutoff(s0, r0);
  const int steps = opts.steps;
  auto cutoff_field = [field, norm, chi, r, r0](double t, const Vec& xi) {
    const double c = chi(norm(xi) * r0 / r);
    if (c == 0.0) return Vec(Vec::Zero(xi.size()));
    return (*field)(t, Vec(c * xi));
  };

  ExtendedMap ext;
  ext.base_system = germ;
  ext.kind = ExtensionKind::smooth;
  ext.norm = norm;
  ext.op_norm_T = opT;
  ext.field_bound = bound;
  ext.cutoff_scale = r;
  ext.epsilon = epsilon;
  ext.r0 = r0;
  ext.s0 = s0;
  ext.theta = theta;
  ext.samples = opts.field_samples;
  // X~ = X on B_s with s = r s0 / r0. Along a trajectory |G(t)| <= e^{eps t}|xi|,
  // so f~ = f wherever e^eps |xi| <= s.
  ext.agreement_radius = r * s0 / r0 * std::exp(-epsilon);
  ext.eval_integrated = [cutoff_field, T, steps](const Vec& xi) {
    return Vec(T * integrate_isotopy(cutoff_field, xi, steps));
  };
  ext.eval = [flow = ext.eval_integrated, f = germ.eval, norm, s = ext.agreement_radius](const Vec& xi) {
    if (norm(xi) <= s) return f(xi);
    return flow(xi);
  };
  ext.inverse = VectorMap([cutoff_field, Tinv, steps](const Vec& y) {
    const Vec z = Tinv * y;
    return rk4_integrate([&](double t, const Vec& v) { return Vec(-cutoff_field(1.0 - t, v)); }, z, 0.0, 1.0,
                         steps);
  });
  return ext;
}

/// The time-dependent field X~ of a smooth extension, exposed for
/// integrator diagnostics.
inline std::function<Vec(double, const Vec&)> cutoff_isotopy_field(const SystemSpec& germ, const ExtendedMap& ext) {
  const Mat Tinv = germ.linearization().inverse();
  auto field = std::make_shared<const IsotopyField>(
      [f = germ.eval, Tinv](const Vec& xi) { return Vec(Tinv * f(xi)); },
      [J = germ.jacobian, Tinv](const Vec& xi) { return Mat(Tinv * J(xi)); });
  const CutoffProfile chi = smooth_cutoff(ext.s0, ext.r0);
  return [field, norm = ext.norm, chi, r = ext.cutoff_scale, r0 = ext.r0](double t, const Vec& xi) {
    const double c = chi(norm(xi) * r0 / r);
    if (c == 0.0) return Vec(Vec::Zero(xi.size()));
    return (*field)(t, Vec(c * xi));
  };
}

// ---------------------------------------------------------------------------
// Monte-Carlo certificates

struct ContractionSample {
  double max_ratio = 0.0;  // max |f~(xi)|_ad / |xi|_ad
  int samples = 0;
};

/// Random xi with |xi|_ad log-uniform in [min_radius, max_radius].
inline ContractionSample sample_contraction(const ExtendedMap& ext, int samples, double max_radius = 1e3,
                                            double min_radius = 1e-4, unsigned seed = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(std::log(min_radius), std::log(max_radius));
  ContractionSample out;
  for (int k = 0; k < samples; ++k) {
    const Vec xi = detail::point_on_sphere(ext.norm, std::exp(uni(rng)), rng);
    out.max_ratio = std::max(out.max_ratio, ext.norm(ext.eval(xi)) / ext.norm(xi));
    ++out.samples;
  }
  return out;
}

/// max |f~(xi) - f(xi)| over points of the agreement ball, using the
/// integrated path for the smooth kind.
inline double sample_agreement(const ExtendedMap& ext, int samples, unsigned seed = 0) {
  std::mt19937_64 rng(seed);
  const double s = std::isinf(ext.agreement_radius) ? 1.0 : ext.agreement_radius;
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec xi = detail::point_in_ball(ext.norm, s, rng);
    worst = std::max(worst, (ext.eval_integrated(xi) - ext.base_system.eval(xi)).norm());
  }
  return worst;
}

struct AttractionReport {
  int orbits = 0;
  int converged = 0;         // reached |xi_n|_ad <= target within the predicted count
  int max_steps_used = 0;
  int max_steps_allowed = 0;
};

/// Forward orbits from |xi_0|_ad log-uniform in [1, max_radius]; each must
/// reach `target` within ceil(log(target / |xi_0|_ad) / log theta) steps.
inline AttractionReport sample_attraction(const ExtendedMap& ext, int orbits, double max_radius = 1e3,
                                          double target = 1e-9, unsigned seed = 0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, std::log(max_radius));
  AttractionReport rep;
  for (int k = 0; k < orbits; ++k) {
    Vec xi = detail::point_on_sphere(ext.norm, std::exp(uni(rng)), rng);
    const double r0 = ext.norm(xi);
    const double predicted = std::ceil(std::log(target / r0) / std::log(ext.theta));
    const int allowed = static_cast<int>(std::clamp(predicted, 0.0, 1e8));
    rep.max_steps_allowed = std::max(rep.max_steps_allowed, allowed);
    int n = 0;
    double r = r0;
    while (r > target && n < allowed) {
      xi = ext.eval(xi);
      r = ext.norm(xi);
      ++n;
    }
    ++rep.orbits;
    if (r <= target) {
      ++rep.converged;
      rep.max_steps_used = std::max(rep.max_steps_used, n);
    }
  }
  return rep;
}

/// Sampled difference-quotient bounds of f~ and of its inverse on pairs
/// drawn from the adapted ball of `radius`.
inline std::pair<double, double> sample_bilipschitz(const ExtendedMap& ext, int pairs, double radius,
                                                    unsigned seed = 0) {
  if (!ext.inverse) throw Error(ErrorCode::InverseUnavailable, "extension has no inverse");
  return {sampled_lipschitz(ext.eval, ext.norm, radius, pairs, seed),
          sampled_lipschitz(*ext.inverse, ext.norm, radius, pairs, seed + 1)};
}

// ---------------------------------------------------------------------------
// Taylor-correcting recursion for componentwise cutoff profiles

using HighPrecision = boost::multiprecision::cpp_bin_float_50;

struct SinProfile {
  TruncatedSeries<Rational> series(int order) const { return sin_series(order); }
  template <class S>
  S operator()(const S& x) const {
    using std::sin;
    return sin(x);
  }
};

struct TanhProfile {
  TruncatedSeries<Rational> series(int order) const { return tanh_series(order); }
  template <class S>
  S operator()(const S& x) const {
    using std::tanh;
    return tanh(x);
  }
};

/// chi(|x|) x with the smooth profile equal to 1 on [0, 1] and 0 beyond 2:
/// already the identity near 0, so its series is exactly x.
struct FlatCutoffProfile {
  TruncatedSeries<Rational> series(int order) const { return TruncatedSeries<Rational>::identity(order); }
  template <class S>
  S operator()(const S& x) const {
    using std::abs;
    using std::exp;
    const S s = abs(x);
    if (s <= 1) return x;
    if (s >= 2) return S(0);
    const S u = s - 1;
    const S a = exp(-1 / u), b = exp(-1 / (1 - u));
    return (1 - a / (a + b)) * x;
  }
};

/// phi_n = phi o p_2 o ... o p_n with p_j(x) = x - c_j x^j, where c_j is the
/// degree-j coefficient of phi_{j-1}. Coefficients 2..n of phi_n vanish.
template <class Profile>
struct CorrectedCutoff {
  Profile profile;
  int n = 1;
  std::vector<Rational> corrections;  // corrections[j] = c_j, j = 2..n (others 0)
  TruncatedSeries<Rational> series;   // phi_n through order n + 2

  template <class S>
  S operator()(const S& x) const {
    S y = x;
    for (int j = n; j >= 2; --j) {
      if (corrections[static_cast<std::size_t>(j)] == 0) continue;
      S pw = y;
      for (int e = 1; e < j; ++e) pw *= y;
      y -= coeff_to<S>(corrections[static_cast<std::size_t>(j)]) * pw;
    }
    return profile(y);
  }

  Vec apply(const Vec& xi) const {
    Vec out(xi.size());
    for (Eigen::Index i = 0; i < xi.size(); ++i) out(i) = (*this)(xi(i));
    return out;
  }
};

template <class Profile>
CorrectedCutoff<Profile> taylor_corrected_cutoff(const Profile& profile, int n) {
  if (n < 1) throw Error(ErrorCode::BadProfile, "correction order must be at least 1");
  const int order = n + 2;
  TruncatedSeries<Rational> phi = profile.series(order);
  if (phi[0] != 0) throw Error(ErrorCode::BadProfile, "profile must vanish at 0");
  if (phi[1] != 1) throw Error(ErrorCode::BadProfile, "profile derivative at 0 must be 1");

  CorrectedCutoff<Profile> out;
  out.profile = profile;
  out.n = n;
  out.corrections.assign(static_cast<std::size_t>(n + 1), Rational(0));
  for (int j = 2; j <= n; ++j) {
    const Rational c = phi[j];
    out.corrections[static_cast<std::size_t>(j)] = c;
    if (c == 0) continue;
    TruncatedSeries<Rational> p = TruncatedSeries<Rational>::identity(order);
    p[j] -= c;
    phi = phi.compose(p);
  }
  out.series = phi;
  return out;
}

/// Least-squares slope of log|phi_n(x) - x| against log x over `points`
/// log-spaced x in [lo, hi], evaluated in 50-digit arithmetic.
template <class Profile>
double correction_error_slope(const CorrectedCutoff<Profile>& phi, double lo = 1e-3, double hi = 1e-1,
                              int points = 25) {
  std::vector<double> lx, ly;
  for (int i = 0; i < points; ++i) {
    const double x = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
    const HighPrecision hx(x);
    const HighPrecision err = boost::multiprecision::abs(phi(hx) - hx);
    if (err == 0) continue;
    lx.push_back(std::log(x));
    ly.push_back(static_cast<double>(boost::multiprecision::log(err)));
  }
  if (lx.size() < 2) return kInfinity;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace seqmanifold
