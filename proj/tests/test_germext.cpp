#include "seqmanifold/builtins.hpp"
#include "seqmanifold/germext.hpp"

#include <gtest/gtest.h>

using namespace seqmanifold;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::UnknownSuite;
}

SystemSpec scalar_poly(std::vector<Monomial> terms, std::optional<Vec> fixed = Vec::Zero(1)) {
  PolynomialConfig c;
  c.map = PolynomialMap(1, {std::move(terms)});
  c.fixed_point = fixed;
  return make_polynomial_system(c);
}

SystemSpec linear_attractor() {
  Mat T(2, 2);
  T << 0.5, 0.1, 0.0, -0.3;
  return linear_system(T);
}

struct DoubledSin {
  TruncatedSeries<Rational> series(int order) const { return Rational(2) * sin_series(order); }
  template <class S>
  S operator()(const S& x) const {
    using std::sin;
    return 2 * sin(x);
  }
};

struct ShiftedSin {
  TruncatedSeries<Rational> series(int order) const {
    auto s = sin_series(order);
    s[0] = 1;
    return s;
  }
  template <class S>
  S operator()(const S& x) const {
    using std::sin;
    return 1 + sin(x);
  }
};

}  // namespace

TEST(Cutoff, PiecewiseLinearValues) {
  const CutoffProfile chi = piecewise_linear_cutoff();
  EXPECT_EQ(chi(0.0), 1.0);
  EXPECT_EQ(chi(1.0), 1.0);
  EXPECT_DOUBLE_EQ(chi(1.5), 0.5);
  EXPECT_EQ(chi(2.0), 0.0);
  EXPECT_EQ(chi(7.0), 0.0);
  EXPECT_DOUBLE_EQ(chi.lipschitz_constant(), 3.0);
}

TEST(Cutoff, SmoothStepProperties) {
  for (double x = 0.01; x < 1.0; x += 0.01) {
    EXPECT_NEAR(CutoffProfile::smooth_step(x) + CutoffProfile::smooth_step(1.0 - x), 1.0, 1e-14);
    const double h = 1e-6;
    const double fd = (CutoffProfile::smooth_step(x + h) - CutoffProfile::smooth_step(x - h)) / (2 * h);
    EXPECT_NEAR(CutoffProfile::smooth_step_derivative(x), fd, 1e-6);
  }
  const CutoffProfile chi = smooth_cutoff(1.0, 2.0);
  EXPECT_EQ(chi(1.0), 1.0);
  EXPECT_EQ(chi(2.0), 0.0);
  EXPECT_DOUBLE_EQ(chi(1.5), 0.5);
  EXPECT_GT(chi.lipschitz_constant(), 3.0);
  EXPECT_THROW(smooth_cutoff(2.0, 1.0), Error);
}

TEST(Cutoff, CutoffMapLipschitzBound) {
  // xi -> chi(|xi|) xi sampled in the Euclidean norm against the stated bound.
  const CutoffProfile chi = piecewise_linear_cutoff();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  double best = 0.0;
  for (int k = 0; k < 20000; ++k) {
    Vec a(2), b(2);
    a << uni(rng), uni(rng);
    b = a + 1e-5 * Vec::Random(2);
    const Vec fa = chi(a.norm()) * a, fb = chi(b.norm()) * b;
    best = std::max(best, (fa - fb).norm() / (a - b).norm());
  }
  EXPECT_LE(best, chi.lipschitz_constant() + 1e-6);
  EXPECT_GE(best, 1.9);  // the radial derivative 2 - 2s reaches -2 at s = 2
}

TEST(Lipschitz, ContractionFactor) {
  EXPECT_DOUBLE_EQ(lipschitz_contraction_factor(1.0 / 6.0, 0.5), 0.75);
  EXPECT_DOUBLE_EQ(lipschitz_contraction_factor(0.0, 0.5), 0.5);
}

TEST(Lipschitz, SampledLipOfScalarNonlinearity) {
  // f0(xi) = 2 xi^2 and |xi|_ad = 4|xi|, so lip f0 on the adapted ball of radius rho is rho.
  const SystemSpec g = scalar_germ();
  const AdaptedNorm norm = detail::attractor_norm(g, 0.5);
  EXPECT_NEAR(norm(scalar(1.0)), 4.0, 1e-12);
  auto f0 = [](const Vec& xi) { return Vec(2.0 * xi.cwiseProduct(xi)); };
  const double lip = sampled_lipschitz(f0, norm, 1.0 / 6.0, 10000, 1);
  EXPECT_LE(lip, 1.0 / 6.0 + 1e-12);
  EXPECT_GE(lip, 1.0 / 6.0 * 0.99);
}

TEST(Lipschitz, ScalarGermCertificate) {
  const SystemSpec g = scalar_germ();
  const ExtendedMap ext = lipschitz_extension(g, 1.0);
  EXPECT_EQ(ext.kind, ExtensionKind::lipschitz);
  EXPECT_LT(ext.theta, 1.0);
  EXPECT_NEAR(ext.op_norm_T, 0.5, 1e-6);
  EXPECT_LT(ext.lip_estimate, 1.0 / 3.0);
  const ContractionSample c = sample_contraction(ext, 10000);
  EXPECT_LE(c.max_ratio, ext.theta);
  // agreement on the inner ball, cut off to T far away
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const Vec xi = detail::point_in_ball(ext.norm, ext.agreement_radius, rng);
    EXPECT_EQ(ext.eval(xi)(0), g.eval(xi)(0));
  }
  const Vec far = scalar(10.0);
  EXPECT_DOUBLE_EQ(ext.eval(far)(0), 5.0);
  for (double y : {-3.0, -0.01, 0.02, 0.3, 40.0})
    EXPECT_NEAR(ext.eval((*ext.inverse)(scalar(y)))(0), y, 1e-12 * std::max(1.0, std::abs(y)));
}

TEST(Lipschitz, PlanarGermCertificate) {
  const ExtendedMap ext = lipschitz_extension(planar_germ(), 0.1);
  EXPECT_LT(ext.theta, 1.0);
  const double rho = split_spectrum(planar_germ().linearization()).radius_s;
  EXPECT_GE(ext.op_norm_T, rho * (1.0 - 1e-9));
  EXPECT_LE(ext.op_norm_T, ext.norm.lambda);
  EXPECT_LE(sample_contraction(ext, 5000, 1e3, 1e-4, 9).max_ratio, ext.theta);
  const AttractionReport a = sample_attraction(ext, 200);
  EXPECT_EQ(a.converged, a.orbits);
  EXPECT_LE(a.max_steps_used, a.max_steps_allowed);
  const auto [lip, lip_inv] = sample_bilipschitz(ext, 2000, 5.0);
  EXPECT_LE(lip, ext.theta * (1.0 + 1e-6));
  EXPECT_TRUE(std::isfinite(lip_inv));
  EXPECT_GE(lip_inv, 1.0);
}

TEST(Lipschitz, LinearGermNeedsNoCutoff) {
  const ExtendedMap ext = lipschitz_extension(linear_attractor(), 1.0);
  EXPECT_TRUE(std::isinf(ext.agreement_radius));
  EXPECT_LE(ext.lip_estimate, 1e-9);
  EXPECT_LT(ext.theta, 1.0);
  Vec v(2);
  v << 300.0, -7.0;
  EXPECT_EQ((ext.eval(v) - linear_attractor().eval(v)).norm(), 0.0);
}

TEST(Lipschitz, Errors) {
  EXPECT_EQ(code_of([] { lipschitz_extension(quadratic_system(), 1.0); }), ErrorCode::NotLocalAttractor);
  EXPECT_EQ(code_of([] { lipschitz_extension(henon_system(), 1.0); }), ErrorCode::BadConfig);
  LipschitzOptions o;
  o.halvings = 2;
  const SystemSpec steep = scalar_poly({{0.5, {1}}, {100.0, {2}}});
  EXPECT_EQ(code_of([&] { lipschitz_extension(steep, 1.0, o); }), ErrorCode::NoContractionRadius);
  EXPECT_NO_THROW(lipschitz_extension(steep, 1.0));
  EXPECT_EQ(code_of([] { lipschitz_extension(scalar_germ(), -1.0); }), ErrorCode::BadConfig);
}

TEST(Lipschitz, TranslateToOrigin) {
  // x -> x/2 + 1/2 + (x - 1)^2 fixes 1.
  const SystemSpec shifted = scalar_poly({{0.5, {1}}, {1.5, {0}}, {-2.0, {1}}, {1.0, {2}}}, scalar(1.0));
  EXPECT_EQ(code_of([&] { lipschitz_extension(shifted, 1.0); }), ErrorCode::BadConfig);
  const SystemSpec g = translate_to_origin(shifted);
  EXPECT_LE(g.eval(Vec::Zero(1)).norm(), 1e-15);
  for (double x : {-0.3, 0.1, 0.4}) EXPECT_NEAR(g.eval(scalar(x))(0), 0.5 * x + x * x, 1e-15);
  EXPECT_LT(lipschitz_extension(g, 1.0).theta, 1.0);
}

TEST(Isotopy, IdentityGivesZeroField) {
  const IsotopyField X([](const Vec& x) { return x; }, [](const Vec& x) { return Mat(Mat::Identity(x.size(), x.size())); });
  for (double t : {0.0, 0.4, 1.0}) EXPECT_EQ(X(t, scalar(0.7)).norm(), 0.0);
}

TEST(Isotopy, LinearClosedForm) {
  // g(xi) = a xi: H(t, eta) = eta / (1 + t(a - 1)), X = (a - 1) eta / (1 + t(a - 1)).
  const double a = 0.4;
  const IsotopyField X([a](const Vec& x) { return Vec(a * x); },
                       [a](const Vec& x) { return Mat(a * Mat::Identity(x.size(), x.size())); });
  for (double t = 0.0; t <= 1.0; t += 0.125)
    for (double eta : {-2.0, 0.3, 5.0})
      EXPECT_NEAR(X(t, scalar(eta))(0), (a - 1) * eta / (1 + t * (a - 1)), 1e-12 * std::abs(eta));
  EXPECT_EQ(X(0.5, Vec::Zero(1)).norm(), 0.0);
}

TEST(Isotopy, TimeOneMapIsGerm) {
  // g = T^{-1} f for the scalar germ: g(xi) = xi + 2 xi^2.
  const IsotopyField X([](const Vec& x) { return Vec(x + 2.0 * x.cwiseProduct(x)); },
                       [](const Vec& x) { return Mat(Mat::Identity(1, 1) + 4.0 * x.asDiagonal().toDenseMatrix()); });
  for (double xi : {-0.2, -0.05, 0.03, 0.1}) {
    const Vec G = integrate_isotopy(X, scalar(xi), 100);
    EXPECT_NEAR(G(0), xi + 2 * xi * xi, 1e-8);
  }
  // Outside the invertibility neighbourhood of the homotopy.
  EXPECT_EQ(code_of([&] { X.homotopy_inverse(1.0, scalar(-1.0)); }), ErrorCode::NoConvergence);
}

TEST(Smooth, ScalarGermAgreementAndContraction) {
  const SystemSpec g = scalar_germ();
  const ExtendedMap ext = smooth_extension(g, 2.0, 1.0, 0.05);
  EXPECT_EQ(ext.kind, ExtensionKind::smooth);
  EXPECT_NEAR(ext.theta, ext.op_norm_T * std::exp(0.1), 1e-15);
  EXPECT_LT(ext.theta, 1.0);
  EXPECT_LE(ext.field_bound, 0.05);
  EXPECT_GT(ext.agreement_radius, 0.0);
  EXPECT_LE(sample_agreement(ext, 200), 1e-12);
  EXPECT_LE(sample_contraction(ext, 500, 1e3, 1e-4, 5).max_ratio, ext.theta);
  for (double y : {-4.0, 0.01, 0.5})
    EXPECT_NEAR(ext.eval((*ext.inverse)(scalar(y)))(0), y, 1e-6 * std::max(1.0, std::abs(y)));
}

TEST(Smooth, LinearGerm) {
  const ExtendedMap ext = smooth_extension(linear_attractor(), 2.0, 1.0, 0.05);
  EXPECT_TRUE(std::isinf(ext.agreement_radius));
  EXPECT_LT(ext.theta, 1.0);
}

TEST(Smooth, Errors) {
  EXPECT_EQ(code_of([] { smooth_extension(scalar_germ(), 2.0, 1.0, 1.0); }), ErrorCode::EpsilonTooLarge);
  EXPECT_EQ(code_of([] { smooth_extension(scalar_germ(), 1.0, 2.0, 0.05); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { smooth_extension(quadratic_system(), 2.0, 1.0, 0.05); }), ErrorCode::NotLocalAttractor);
  SmoothOptions o;
  o.halvings = 1;
  const SystemSpec steep = scalar_poly({{0.5, {1}}, {100.0, {2}}});
  EXPECT_EQ(code_of([&] { smooth_extension(steep, 2.0, 1.0, 0.05, o); }), ErrorCode::NoContractionRadius);
}

TEST(Smooth, CutoffFieldFourthOrder) {
  const SystemSpec g = scalar_germ();
  const ExtendedMap ext = smooth_extension(g, 2.0, 1.0, 0.05);
  const auto field = cutoff_isotopy_field(g, ext);
  // Starting points inside the cutoff annulus, where trajectories bend.
  const double r = ext.cutoff_scale;
  std::vector<Vec> pts;
  for (double u : {0.55, 0.7, 0.85, -0.6, -0.8}) pts.push_back(scalar(u * r / ext.norm(scalar(1.0))));
  const StepDoublingReport rep = step_doubling(field, pts, 4, 4);
  EXPECT_GE(rep.observed_order, 3.7);
}

TEST(Taylor, SeriesCoefficients) {
  const auto t = tanh_series(7);
  EXPECT_EQ(t[1], Rational(1));
  EXPECT_EQ(t[3], Rational(-1, 3));
  EXPECT_EQ(t[5], Rational(2, 15));
  EXPECT_EQ(t[7], Rational(-17, 315));
  EXPECT_EQ(t[2], Rational(0));
  const auto s = sin_series(5);
  EXPECT_EQ(s[3], Rational(-1, 6));
  EXPECT_EQ(s[5], Rational(1, 120));
}

TEST(Taylor, SinClosedForm) {
  const auto phi = taylor_corrected_cutoff(SinProfile{}, 3);
  EXPECT_EQ(phi.corrections[2], Rational(0));
  EXPECT_EQ(phi.corrections[3], Rational(-1, 6));
  for (double x : {-0.3, 0.01, 0.2, 0.7}) EXPECT_NEAR(phi(x), std::sin(x + x * x * x / 6), 1e-15);
  for (int k = 2; k <= 3; ++k) EXPECT_EQ(phi.series[k], Rational(0));
  EXPECT_NEAR(correction_error_slope(phi), 5.0, 0.05);
}

TEST(Taylor, ErrorSlopes) {
  for (int n : {3, 5}) {
    const auto phi = taylor_corrected_cutoff(TanhProfile{}, n);
    for (int k = 2; k <= n; ++k) EXPECT_EQ(phi.series[k], Rational(0)) << n << " " << k;
    EXPECT_NE(phi.series[n + 2], Rational(0));
    EXPECT_NEAR(correction_error_slope(phi), n + 2.0, 0.05);
    const Vec v = phi.apply(Vec::Constant(3, 0.01));
    EXPECT_NEAR(v(2), 0.01, std::pow(0.01, n + 1));
  }
  EXPECT_NEAR(correction_error_slope(taylor_corrected_cutoff(SinProfile{}, 5)), 7.0, 0.05);
}

TEST(Taylor, FlatProfileNeedsNoCorrection) {
  const auto phi = taylor_corrected_cutoff(FlatCutoffProfile{}, 6);
  for (const auto& c : phi.corrections) EXPECT_EQ(c, Rational(0));
  EXPECT_TRUE(std::isinf(correction_error_slope(phi)));
  EXPECT_EQ(phi(3.0), 0.0);
}

TEST(Taylor, BadProfiles) {
  EXPECT_EQ(code_of([] { taylor_corrected_cutoff(SinProfile{}, 0); }), ErrorCode::BadProfile);
  EXPECT_EQ(code_of([] { taylor_corrected_cutoff(DoubledSin{}, 3); }), ErrorCode::BadProfile);
  EXPECT_EQ(code_of([] { taylor_corrected_cutoff(ShiftedSin{}, 3); }), ErrorCode::BadProfile);
}
