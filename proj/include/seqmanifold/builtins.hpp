#pragma once

// Named systems used by the command line and the test suites, and a
// generator of random hyperbolic matrices.

#include "seqmanifold/dynsys.hpp"
#include "seqmanifold/error.hpp"
#include "seqmanifold/linalg.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace seqmanifold {

/// xi -> xi/2 + xi^2, a scalar local attractor at 0.
inline SystemSpec scalar_germ() {
  PolynomialConfig c;
  c.name = "germ1d";
  c.map = PolynomialMap(1, {{{0.5, {1}}, {1.0, {2}}}});
  c.fixed_point = Vec::Zero(1);
  return make_polynomial_system(c);
}

/// (x, y) -> (x/2 + y/5 + y^2, 2y/5 + x^2 - xy/2), a non-normal planar attractor at 0.
inline SystemSpec planar_germ() {
  PolynomialConfig c;
  c.name = "germ2d";
  c.map = PolynomialMap(2, {{{0.5, {1, 0}}, {0.2, {0, 1}}, {1.0, {0, 2}}},
                            {{0.4, {0, 1}}, {1.0, {2, 0}}, {-0.5, {1, 1}}}});
  c.fixed_point = Vec::Zero(2);
  return make_polynomial_system(c);
}

/// Time-ln 2 map of x' = diag(-1, 1) x.
inline SystemSpec saddle_flow_system(int steps = 64) {
  VectorFieldConfig v;
  v.field.name = "saddle_flow";
  v.field.map = PolynomialMap(2, {{{-1.0, {1, 0}}}, {{1.0, {0, 1}}}});
  v.field.fixed_point = Vec::Zero(2);
  v.time = std::numbers::ln2;
  v.steps = steps;
  return time_T_map(v);
}

struct BuiltinParams {
  double a = 1.4;
  double b = 0.3;
  Mat matrix;  // for "linear"; defaults to diag(1/2, 2)
};

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"linear", "quadratic", "henon", "germ1d", "germ2d", "saddle_flow"};
  return names;
}

inline SystemSpec builtin_system(const std::string& name, const BuiltinParams& p = {}) {
  if (name == "linear") {
    Mat T = p.matrix;
    if (T.size() == 0) {
      T = Mat::Zero(2, 2);
      T(0, 0) = 0.5;
      T(1, 1) = 2.0;
    }
    if (T.rows() != T.cols()) throw Error(ErrorCode::BadConfig, "linear system needs a square matrix");
    return linear_system(T);
  }
  if (name == "quadratic") return quadratic_system();
  if (name == "henon") return henon_system(p.a, p.b);
  if (name == "germ1d") return scalar_germ();
  if (name == "germ2d") return planar_germ();
  if (name == "saddle_flow") return saddle_flow_system();
  throw Error(ErrorCode::BadConfig, "unknown built-in system '" + name + "'");
}

struct RandomMatrixOptions {
  double min_stable = 0.1;  // stable moduli drawn from [min_stable, max_stable]
  double max_stable = 0.8;
  double max_unstable = 10.0;  // unstable moduli from [1/max_stable, max_unstable]
  double max_condition = 20.0;  // cap on the eigenvector matrix condition number
};

/// Q D Q^{-1} with D block diagonal (real eigenvalues and rotation-scaling
/// blocks) and Q a random matrix with bounded condition number. Each
/// eigenvalue is stable or unstable with probability 1/2.
inline Mat random_hyperbolic_matrix(int d, std::mt19937_64& rng, const RandomMatrixOptions& o = {}) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss;
  auto modulus = [&] {
    if (uni(rng) < 0.5) return o.min_stable + (o.max_stable - o.min_stable) * uni(rng);
    const double lo = std::log(1.0 / o.max_stable), hi = std::log(o.max_unstable);
    return std::exp(lo + (hi - lo) * uni(rng));
  };
  Mat D = Mat::Zero(d, d);
  int i = 0;
  while (i < d) {
    if (i + 1 < d && uni(rng) < 0.4) {
      const double m = modulus(), angle = std::numbers::pi * (0.05 + 0.9 * uni(rng));
      D(i, i) = D(i + 1, i + 1) = m * std::cos(angle);
      D(i, i + 1) = -m * std::sin(angle);
      D(i + 1, i) = m * std::sin(angle);
      i += 2;
    } else {
      D(i, i) = (uni(rng) < 0.5 ? -1.0 : 1.0) * modulus();
      i += 1;
    }
  }
  Mat Q(d, d);
  for (int attempt = 0;; ++attempt) {
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) Q(r, c) = gauss(rng);
    Q += 1.5 * Mat::Identity(d, d);
    Eigen::JacobiSVD<Mat> svd(Q);
    const auto& s = svd.singularValues();
    if (s(d - 1) > 0.0 && s(0) / s(d - 1) <= o.max_condition) break;
    if (attempt > 1000) throw Error(ErrorCode::BadConfig, "could not draw a well-conditioned basis");
  }
  return Q * D * Q.inverse();
}

}  // namespace seqmanifold
