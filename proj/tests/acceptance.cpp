// Acceptance criteria: one PASS/FAIL line each, nonzero exit if any fails.
// A criterion passes when its measured values meet their tolerances and it
// finishes within its time budget.

#include "seqmanifold/builtins.hpp"
#include "seqmanifold/germext.hpp"
#include "seqmanifold/manifold.hpp"
#include "seqmanifold/seqspace.hpp"
#include "seqmanifold/spectral.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace seqmanifold;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void le(const std::string& what, double value, double tol) { record(what, value, "<=", tol, value <= tol); }
  void ge(const std::string& what, double value, double tol) { record(what, value, ">=", tol, value >= tol); }

 private:
  void record(const std::string& what, double value, const char* rel, double tol, bool ok) {
    pass = pass && ok;
    detail << " " << what << "=" << value << (ok ? "" : "!") << rel << tol;
  }
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<void(Outcome&)> body;
};

Vec scalar(double v) { return Vec::Constant(1, v); }

Mat diag2(double a, double b) {
  Mat T = Mat::Zero(2, 2);
  T(0, 0) = a;
  T(1, 1) = b;
  return T;
}

double parabola_by_iteration(double xi) {
  // w(xi) = (w(xi/2) - xi^2) / 2 iterated from w = 0.
  double acc = 0.0, scale = 1.0, x = xi;
  for (int k = 0; k < 80; ++k) {
    scale *= 0.5;
    acc -= scale * x * x;
    x *= 0.5;
  }
  return acc;
}

void right_inverse(Outcome& o) {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> dims(2, 6);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = dims(rng);
    const Mat T = random_hyperbolic_matrix(d, rng);
    const ConvolutionKernel g = kernel_g(T, split_spectrum(T));
    const int K = g.half_width, N = 2 * K + 32;
    TruncatedSequence w(d, N + 1);
    for (int n = K + 1; n <= K + 30; ++n)
      for (int i = 0; i < d; ++i) w[n](i) = gauss(rng);
    const TruncatedSequence r = apply_shift_minus(T, convolve(g, w));
    double err = 0.0;
    for (int n = 0; n < r.length(); ++n) err = std::max(err, (r[n] - w[n]).cwiseAbs().maxCoeff());
    worst = std::max(worst, err / w.matrix().cwiseAbs().maxCoeff());
  }
  o.le("max_rel_err", worst, 1e-10);
}

void analytic_manifold(Outcome& o) {
  const LocalGraph g = local_graph(quadratic_system(), 0.2, {41});
  o.ge("truncation", default_truncation(g.splitting), minimum_truncation(g.splitting, g.newton_tol));
  double closed = 0.0, iterated = 0.0;
  for (const auto& s : g.samples) {
    const double x = s.point(0), y = s.point(1);
    closed = std::max(closed, std::abs(y + 4.0 / 7.0 * x * x));
    iterated = std::max(iterated, std::abs(y - parabola_by_iteration(x)));
  }
  o.ge("nodes", static_cast<double>(g.samples.size()), 41);
  o.le("closed_form_err", closed, 1e-9);
  o.le("functional_iteration_err", iterated, 1e-9);
}

void tangency(Outcome& o) {
  o.le("quadratic_Dw0", verify_tangency(local_graph(quadratic_system(), 0.2, {41})).max_derivative, 1e-6);
  const TangencyReport h = verify_tangency(local_graph(henon_system(), 0.3, {81}));
  o.le("henon_Dw0", h.max_derivative, 1e-5);
  o.le("henon_w0", h.w0_norm, 1e-12);
}

void invariance(Outcome& o) {
  const SystemSpec h = henon_system();
  const double coarse = verify_invariance(h, local_graph(h, 0.3, {81})).max_residual;
  const double fine = verify_invariance(h, local_graph(h, 0.3, {161})).max_residual;
  o.le("grid81", coarse, 1e-4);
  o.ge("refinement_factor", coarse / fine, 3.0);
}

void globalization(Outcome& o) {
  const SystemSpec h = henon_system();
  const GlobalCloud c = globalize(h, local_graph(h, 0.3, {81}), 6);
  o.ge("points", static_cast<double>(c.points.size()), 82);
  o.ge("member_fraction", static_cast<double>(c.members()) / static_cast<double>(c.points.size()), 1.0);
}

void decay_and_truncation(Outcome& o) {
  double excess = -kInfinity, shift = 0.0;
  int orbits = 0;
  for (const SystemSpec& sys : {quadratic_system(), henon_system()}) {
    const double r = sys.name == "henon" ? 0.3 : 0.2;
    const LocalGraph g = local_graph(sys, r, {41});
    const double bound = std::log(effective_radius(g.splitting));
    for (const auto& s : g.samples) {
      if (!s.converged) continue;
      ++orbits;
      if (std::isfinite(s.decay_slope)) excess = std::max(excess, s.decay_slope - bound);
    }
    for (std::size_t k = 0; k < g.samples.size(); k += 4) {
      const auto& s = g.samples[k];
      OrbitOptions longer;
      longer.truncation = default_truncation(g.splitting) + 20;
      const TruncatedOrbit o2 = solve_orbit(make_orbit_problem(sys, g.splitting, s.xi, longer));
      shift = std::max(shift, (o2.u[0] - s.point).norm());
    }
  }
  o.ge("orbits", orbits, 82);
  o.le("decay_slope_excess", excess, 0.0);
  o.le("u0_shift_N_plus_20", shift, 1e-10);
}

void adapted_norm(Outcome& o) {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> dims(2, 6);
  double excess = -kInfinity;
  int tested = 0;
  while (tested < 100) {
    const int d = dims(rng);
    const Mat T = random_hyperbolic_matrix(d, rng, RandomMatrixOptions{0.1, 0.7, 10.0, 20.0});
    const HyperbolicSplitting s = split_spectrum(T);
    if (s.dim_s() == 0) continue;
    const AdaptedNorm norm = build_adapted_norm(T, s, 0.5);
    for (int k = 0; k < 10000; ++k) {
      Vec c(s.dim_s());
      for (int i = 0; i < c.size(); ++i) c(i) = gauss(rng);
      const Vec v = s.embed_stable(c);
      excess = std::max(excess, norm(Vec(T * v)) / norm(v) - norm.lambda);
    }
    ++tested;
  }
  o.le("ratio_minus_lambda", excess, 1e-9);
  const Mat D = diag2(0.5, 2.0);
  const AdaptedNorm nd = build_adapted_norm(D, split_spectrum(D), 0.5);
  o.le("alpha_err", std::abs(nd.stable.weights().alpha - 0.25), 1e-15);
  o.le("beta_err", std::abs(nd.stable.weights().beta - 0.75), 1e-15);
  o.le("e1_rel_err", std::abs(nd(Vec(Vec::Unit(2, 0))) / 4.0 - 1.0), 1e-15);
}

void lipschitz(Outcome& o) {
  for (const SystemSpec& germ : {scalar_germ(), planar_germ()}) {
    const ExtendedMap ext = lipschitz_extension(germ, 0.1);
    std::mt19937_64 rng(303);
    double agree = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vec xi = detail::point_in_ball(ext.norm, ext.agreement_radius, rng);
      agree = std::max(agree, (ext.eval(xi) - germ.eval(xi)).cwiseAbs().maxCoeff());
    }
    o.le(germ.name + "_agreement", agree, 0.0);
    o.le(germ.name + "_theta", ext.theta, 1.0 - 1e-12);
    o.le(germ.name + "_ratio_minus_theta", sample_contraction(ext, 10000, 1e3, 1e-4, 304).max_ratio - ext.theta, 0.0);
  }
}

void isotopy(Outcome& o) {
  // G(1, .) = g for g = T^{-1} f on B_0.1.
  std::mt19937_64 rng(404);
  for (const SystemSpec& germ : {scalar_germ(), planar_germ()}) {
    const Mat Tinv = germ.linearization().inverse();
    const IsotopyField X([&](const Vec& v) { return Vec(Tinv * germ.eval(v)); },
                         [&](const Vec& v) { return Mat(Tinv * germ.jacobian(v)); });
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> uni;
    double err = 0.0;
    for (int k = 0; k < 200; ++k) {
      Vec xi(germ.dim);
      for (int i = 0; i < germ.dim; ++i) xi(i) = gauss(rng);
      xi *= 0.1 * std::pow(uni(rng), 1.0 / germ.dim) / xi.norm();
      err = std::max(err, (integrate_isotopy(X, xi, 100) - Tinv * germ.eval(xi)).cwiseAbs().maxCoeff());
    }
    o.le(germ.name + "_G1_minus_g", err, 1e-8);
  }
  // RK4 order under step doubling on the cut-off field, whose trajectories bend.
  const SystemSpec g = scalar_germ();
  const ExtendedMap ext = smooth_extension(g, 2.0, 1.0, 0.1);
  const auto field = cutoff_isotopy_field(g, ext);
  const double unit = ext.norm(scalar(1.0));
  std::vector<Vec> pts;
  for (double u : {0.55, 0.7, 0.85, -0.6, -0.8}) pts.push_back(scalar(u * ext.cutoff_scale / unit));
  o.ge("cutoff_field_order", step_doubling(field, pts, 4, 4).observed_order, 3.7);
}

void smooth(Outcome& o) {
  const ExtendedMap ext = smooth_extension(scalar_germ(), 2.0, 1.0, 0.1);
  o.le("theta", ext.theta, 1.0 - 1e-12);
  o.le("ratio_minus_theta", sample_contraction(ext, 10000, 1e3, 1e-4, 505).max_ratio - ext.theta, 0.0);
  const AttractionReport a = sample_attraction(ext, 1000, 1e3, 1e-9, 506);
  o.ge("attracted_fraction", static_cast<double>(a.converged) / a.orbits, 1.0);
  o.le("steps_used_minus_allowed", a.max_steps_used - a.max_steps_allowed, 0.0);
}

void taylor(Outcome& o) {
  for (int n : {3, 5}) {
    const auto s = taylor_corrected_cutoff(SinProfile{}, n);
    const auto t = taylor_corrected_cutoff(TanhProfile{}, n);
    int nonzero = 0;
    for (int j = 2; j <= n; ++j) nonzero += (s.series[j] != 0) + (t.series[j] != 0);
    const std::string tag = "n" + std::to_string(n);
    o.le(tag + "_nonzero_coeffs", nonzero, 0);
    o.ge(tag + "_sin_slope", correction_error_slope(s), n + 0.9);
    o.ge(tag + "_tanh_slope", correction_error_slope(t), n + 0.9);
  }
}

void flow_pipeline(Outcome& o) {
  const SystemSpec f = saddle_flow_system();
  o.le("linearization_err", (f.linearization() - diag2(0.5, 2.0)).cwiseAbs().maxCoeff(), 1e-8);
  const LocalGraph g = local_graph(f, 0.5, {21});
  double w = 0.0, y = 0.0;
  for (const auto& s : g.samples) {
    w = std::max(w, s.w.cwiseAbs().maxCoeff());
    y = std::max(y, std::abs(s.point(1)));
  }
  o.le("max_abs_w", w, 1e-8);
  o.le("max_abs_y", y, 1e-8);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"right_inverse", 5, right_inverse},
      {"analytic_oracle_manifold", 2, analytic_manifold},
      {"tangency", 5, tangency},
      {"invariance_residual", 30, invariance},
      {"globalization_membership", 60, globalization},
      {"orbit_decay_truncation", 60, decay_and_truncation},
      {"adapted_norm_certificates", 30, adapted_norm},
      {"lipschitz_extension", 10, lipschitz},
      {"isotopy_identity", 5, isotopy},
      {"smooth_extension", 60, smooth},
      {"taylor_recursion", 1, taylor},
      {"flow_pipeline", 5, flow_pipeline},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = out.pass && in_time;
    failed += !pass;
    std::printf("%s %-28s %7.2fs%s (budget %gs)%s\n", pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                in_time ? "" : "!", c.budget_seconds, out.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
