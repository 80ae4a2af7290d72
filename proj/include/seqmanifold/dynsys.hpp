#pragma once

// Discrete dynamical systems: polynomial maps, built-in examples, time-T
// maps of polynomial vector fields, fixed points and local inversion.

#include "seqmanifold/error.hpp"
#include "seqmanifold/linalg.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace seqmanifold {

/// A smooth map f on R^d with its Jacobian and a fixed point x.
/// `domain_radius` bounds the Euclidean distance to x inside which the map
/// is considered valid.
struct SystemSpec {
  std::string name;
  int dim = 0;
  VectorMap eval;
  JacobianMap jacobian;
  std::optional<VectorMap> inverse;
  Vec fixed_point;
  double domain_radius = kInfinity;

  bool in_domain(const Vec& p) const {
    if (!p.allFinite()) return false;
    return std::isinf(domain_radius) || (p - fixed_point).norm() <= domain_radius;
  }
  Mat linearization() const { return jacobian(fixed_point); }
};

// ---------------------------------------------------------------------------
// Polynomial maps

struct Monomial {
  double coeff = 0.0;
  std::vector<int> powers;
};

/// Component i of the map is sum over terms of coeff * prod_j x_j^{powers_j}.
class PolynomialMap {
 public:
  PolynomialMap() = default;
  PolynomialMap(int dim, std::vector<std::vector<Monomial>> components)
      : dim_(dim), components_(std::move(components)) {
    if (dim_ <= 0) throw Error(ErrorCode::BadConfig, "polynomial map dimension must be positive");
    if (static_cast<int>(components_.size()) != dim_)
      throw Error(ErrorCode::BadConfig, "expected " + std::to_string(dim_) + " components, got " +
                                            std::to_string(components_.size()));
    for (const auto& comp : components_)
      for (const auto& term : comp) {
        if (static_cast<int>(term.powers.size()) != dim_)
          throw Error(ErrorCode::BadConfig, "monomial exponent vector has wrong length");
        for (int e : term.powers)
          if (e < 0) throw Error(ErrorCode::BadConfig, "negative exponent");
        if (!std::isfinite(term.coeff)) throw Error(ErrorCode::BadConfig, "non-finite coefficient");
      }
  }

  int dim() const { return dim_; }
  const std::vector<std::vector<Monomial>>& components() const { return components_; }

  Vec operator()(const Vec& x) const {
    Vec y = Vec::Zero(dim_);
    for (int i = 0; i < dim_; ++i)
      for (const auto& term : components_[i]) y(i) += term.coeff * monomial(x, term.powers, -1);
    return y;
  }

  Mat jacobian(const Vec& x) const {
    Mat J = Mat::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (const auto& term : components_[i])
        for (int j = 0; j < dim_; ++j) {
          const int e = term.powers[j];
          if (e == 0) continue;
          J(i, j) += term.coeff * e * monomial(x, term.powers, j);
        }
    return J;
  }

 private:
  // prod_k x_k^{p_k}, with the exponent of `lowered` reduced by one.
  static double monomial(const Vec& x, const std::vector<int>& powers, int lowered) {
    double v = 1.0;
    for (std::size_t k = 0; k < powers.size(); ++k) {
      int e = powers[k] - (static_cast<int>(k) == lowered ? 1 : 0);
      const double base = x(static_cast<Eigen::Index>(k));
      for (; e > 0; --e) v *= base;
    }
    return v;
  }

  int dim_ = 0;
  std::vector<std::vector<Monomial>> components_;
};

struct PolynomialConfig {
  std::string name = "polynomial";
  PolynomialMap map;
  std::optional<PolynomialMap> inverse;
  std::optional<Vec> fixed_point;
  std::optional<Vec> guess;
  double domain_radius = kInfinity;
};

struct VectorFieldConfig {
  PolynomialConfig field;
  double time = 1.0;
  int steps = 64;
};

// ---------------------------------------------------------------------------
// Newton solvers

inline constexpr double kFixedPointTol = 1e-13;
inline constexpr int kFixedPointMaxIter = 100;

/// Newton iteration on f(x) - x = 0.
inline Vec find_fixed_point(const VectorMap& eval, const JacobianMap& jacobian, Vec guess) {
  const auto d = guess.size();
  for (int it = 0; it <= kFixedPointMaxIter; ++it) {
    const Vec r = eval(guess) - guess;
    if (!r.allFinite()) break;
    if (sup_norm(r) <= kFixedPointTol) return guess;
    if (it == kFixedPointMaxIter) break;
    const Mat J = jacobian(guess) - Mat::Identity(d, d);
    Eigen::FullPivLU<Mat> lu(J);
    if (!lu.isInvertible())
      throw Error(ErrorCode::SingularJacobian, "Df - I is singular along the Newton path");
    guess -= lu.solve(r);
  }
  throw Error(ErrorCode::NoConvergence, "fixed-point Newton iteration did not converge");
}

/// Solves f(p) = y for p by Newton's method started at `guess`.
inline std::optional<Vec> newton_invert(const SystemSpec& sys, const Vec& y, Vec guess,
                                        double tol = 1e-13, int max_iter = 60) {
  for (int it = 0; it < max_iter; ++it) {
    const Vec r = sys.eval(guess) - y;
    if (!r.allFinite()) return std::nullopt;
    if (sup_norm(r) <= tol * std::max(1.0, sup_norm(y))) return guess;
    Eigen::PartialPivLU<Mat> lu(sys.jacobian(guess));
    const Vec step = lu.solve(r);
    if (!step.allFinite()) return std::nullopt;
    guess -= step;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Construction

inline SystemSpec make_polynomial_system(const PolynomialConfig& config) {
  const int d = config.map.dim();
  if (d <= 0) throw Error(ErrorCode::BadConfig, "empty polynomial map");
  if (config.inverse && config.inverse->dim() != d)
    throw Error(ErrorCode::BadConfig, "inverse dimension differs from map dimension");
  if (config.fixed_point && config.fixed_point->size() != d)
    throw Error(ErrorCode::BadConfig, "fixed_point has wrong dimension");
  if (config.guess && config.guess->size() != d)
    throw Error(ErrorCode::BadConfig, "guess has wrong dimension");

  auto map = std::make_shared<const PolynomialMap>(config.map);
  SystemSpec sys;
  sys.name = config.name;
  sys.dim = d;
  sys.eval = [map](const Vec& x) { return (*map)(x); };
  sys.jacobian = [map](const Vec& x) { return map->jacobian(x); };
  if (config.inverse) {
    auto inv = std::make_shared<const PolynomialMap>(*config.inverse);
    sys.inverse = VectorMap([inv](const Vec& x) { return (*inv)(x); });
  }
  sys.domain_radius = config.domain_radius;
  if (config.fixed_point) {
    sys.fixed_point = *config.fixed_point;
  } else {
    sys.fixed_point = find_fixed_point(sys.eval, sys.jacobian, config.guess.value_or(Vec::Zero(d)));
  }
  return sys;
}

inline SystemSpec linear_system(const Mat& T) {
  if (T.rows() != T.cols() || T.rows() == 0)
    throw Error(ErrorCode::BadConfig, "linear system needs a nonempty square matrix");
  const int d = static_cast<int>(T.rows());
  SystemSpec sys;
  sys.name = "linear";
  sys.dim = d;
  sys.eval = [T](const Vec& x) { return Vec(T * x); };
  sys.jacobian = [T](const Vec&) { return T; };
  Eigen::FullPivLU<Mat> lu(T);
  if (lu.isInvertible()) {
    const Mat Tinv = lu.inverse();
    sys.inverse = VectorMap([Tinv](const Vec& x) { return Vec(Tinv * x); });
  }
  sys.fixed_point = Vec::Zero(d);
  return sys;
}

/// f(x, y) = (x/2, 2y + x^2), inverse (x, y) -> (2x, y/2 - 2x^2).
/// Its stable manifold is the parabola y = -(4/7) x^2.
inline SystemSpec quadratic_system() {
  SystemSpec sys;
  sys.name = "quadratic";
  sys.dim = 2;
  sys.eval = [](const Vec& p) {
    Vec q(2);
    q << 0.5 * p(0), 2.0 * p(1) + p(0) * p(0);
    return q;
  };
  sys.jacobian = [](const Vec& p) {
    Mat J(2, 2);
    J << 0.5, 0.0, 2.0 * p(0), 2.0;
    return J;
  };
  sys.inverse = VectorMap([](const Vec& p) {
    Vec q(2);
    q << 2.0 * p(0), 0.5 * p(1) - 2.0 * p(0) * p(0);
    return q;
  });
  sys.fixed_point = Vec::Zero(2);
  return sys;
}

/// Henon map f(x, y) = (1 + y - a x^2, b x) with inverse
/// (x, y) -> (y/b, x - 1 + a (y/b)^2), at its fixed point with x > 0.
inline SystemSpec henon_system(double a = 1.4, double b = 0.3, double domain_radius = 3.0) {
  if (b == 0.0) throw Error(ErrorCode::BadConfig, "Henon map needs b != 0");
  SystemSpec sys;
  sys.name = "henon";
  sys.dim = 2;
  sys.eval = [a, b](const Vec& p) {
    Vec q(2);
    q << 1.0 + p(1) - a * p(0) * p(0), b * p(0);
    return q;
  };
  sys.jacobian = [a, b](const Vec& p) {
    Mat J(2, 2);
    J << -2.0 * a * p(0), 1.0, b, 0.0;
    return J;
  };
  sys.inverse = VectorMap([a, b](const Vec& p) {
    const double x = p(1) / b;
    Vec q(2);
    q << x, p(0) - 1.0 + a * x * x;
    return q;
  });
  // a x^2 + (1 - b) x - 1 = 0, positive root.
  const double c = 1.0 - b;
  const double disc = c * c + 4.0 * a;
  if (disc < 0.0 || a == 0.0) throw Error(ErrorCode::BadConfig, "Henon parameters admit no fixed point");
  Vec guess(2);
  guess(0) = (-c + std::sqrt(disc)) / (2.0 * a);
  guess(1) = b * guess(0);
  sys.fixed_point = find_fixed_point(sys.eval, sys.jacobian, guess);
  sys.domain_radius = domain_radius;
  return sys;
}

// ---------------------------------------------------------------------------
// Time-T maps of polynomial vector fields

namespace detail {

struct FlowState {
  Vec y;
  Mat J;
};

// One RK4 step of the field together with the exact derivative of the step
// with respect to its starting point.
inline FlowState rk4_step_with_jacobian(const PolynomialMap& field, const FlowState& s, double h) {
  const auto d = s.y.size();
  const Mat I = Mat::Identity(d, d);
  const Vec k1 = field(s.y);
  const Mat K1 = field.jacobian(s.y);
  const Vec y2 = s.y + 0.5 * h * k1;
  const Vec k2 = field(y2);
  const Mat K2 = field.jacobian(y2) * (I + 0.5 * h * K1);
  const Vec y3 = s.y + 0.5 * h * k2;
  const Vec k3 = field(y3);
  const Mat K3 = field.jacobian(y3) * (I + 0.5 * h * K2);
  const Vec y4 = s.y + h * k3;
  const Vec k4 = field(y4);
  const Mat K4 = field.jacobian(y4) * (I + h * K3);
  FlowState out;
  out.y = s.y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  out.J = (I + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)) * s.J;
  return out;
}

inline Vec rk4_flow(const PolynomialMap& field, Vec y, double h, int steps) {
  for (int i = 0; i < steps; ++i) {
    const Vec k1 = field(y);
    const Vec k2 = field(y + 0.5 * h * k1);
    const Vec k3 = field(y + 0.5 * h * k2);
    const Vec k4 = field(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace detail

/// Time-T map of the polynomial field: `steps` RK4 steps of size T/steps.
/// The Jacobian differentiates the integrator itself; the inverse runs the
/// same scheme with the step negated. The fixed point is an equilibrium of
/// the field (taken from the config or found by Newton on the field).
inline SystemSpec time_T_map(const VectorFieldConfig& config) {
  if (config.steps < 1) throw Error(ErrorCode::BadConfig, "time_T_map needs steps >= 1");
  if (!std::isfinite(config.time)) throw Error(ErrorCode::BadConfig, "time must be finite");
  const int d = config.field.map.dim();
  if (d <= 0) throw Error(ErrorCode::BadConfig, "empty vector field");
  auto field = std::make_shared<const PolynomialMap>(config.field.map);
  const double h = config.time / config.steps;
  const int steps = config.steps;

  SystemSpec sys;
  sys.name = config.field.name;
  sys.dim = d;
  sys.eval = [field, h, steps](const Vec& x) { return detail::rk4_flow(*field, x, h, steps); };
  sys.jacobian = [field, h, steps, d](const Vec& x) {
    detail::FlowState s{x, Mat::Identity(d, d)};
    for (int i = 0; i < steps; ++i) s = detail::rk4_step_with_jacobian(*field, s, h);
    return s.J;
  };
  sys.inverse = VectorMap([field, h, steps](const Vec& x) { return detail::rk4_flow(*field, x, -h, steps); });
  sys.domain_radius = config.field.domain_radius;

  if (config.field.fixed_point) {
    if (config.field.fixed_point->size() != d)
      throw Error(ErrorCode::BadConfig, "fixed_point has wrong dimension");
    sys.fixed_point = *config.field.fixed_point;
  } else {
    // Equilibria of the field are fixed by every RK step.
    Vec x = config.field.guess.value_or(Vec::Zero(d));
    if (x.size() != d) throw Error(ErrorCode::BadConfig, "guess has wrong dimension");
    bool done = false;
    for (int it = 0; it <= kFixedPointMaxIter && !done; ++it) {
      const Vec r = (*field)(x);
      if (sup_norm(r) <= kFixedPointTol) {
        done = true;
        break;
      }
      Eigen::FullPivLU<Mat> lu(field->jacobian(x));
      if (!lu.isInvertible())
        throw Error(ErrorCode::SingularJacobian, "field Jacobian singular while locating the equilibrium");
      x -= lu.solve(r);
    }
    if (!done) throw Error(ErrorCode::NoConvergence, "equilibrium search did not converge");
    sys.fixed_point = x;
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Consistency checks on a SystemSpec

struct SystemCheck {
  double fixed_point_residual = 0.0;
  double jacobian_fd_error = 0.0;  // max relative deviation from central differences
  double inverse_roundtrip = 0.0;  // max |f^{-1}(f(p)) - p|, 0 if no inverse
  bool has_inverse = false;

  bool ok() const {
    return fixed_point_residual <= 1e-12 && jacobian_fd_error <= 1e-5 &&
           (!has_inverse || inverse_roundtrip <= 1e-9);
  }
};

/// Samples `points` random points within `spread` of the fixed point.
inline SystemCheck check_system(const SystemSpec& sys, unsigned seed = 0, int points = 20,
                                double spread = 0.05) {
  SystemCheck out;
  out.fixed_point_residual = (sys.eval(sys.fixed_point) - sys.fixed_point).norm();
  out.has_inverse = sys.inverse.has_value();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int d = sys.dim;
  for (int k = 0; k < points; ++k) {
    Vec p = sys.fixed_point;
    for (int i = 0; i < d; ++i) p(i) += spread * uni(rng);
    const Mat J = sys.jacobian(p);
    Mat fd(d, d);
    for (int j = 0; j < d; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(p(j)));
      Vec a = p, b = p;
      a(j) += h;
      b(j) -= h;
      fd.col(j) = (sys.eval(a) - sys.eval(b)) / (2.0 * h);
    }
    const double scale = std::max(1.0, max_abs(J));
    out.jacobian_fd_error = std::max(out.jacobian_fd_error, max_abs(J - fd) / scale);
    if (sys.inverse) {
      out.inverse_roundtrip = std::max(out.inverse_roundtrip, ((*sys.inverse)(sys.eval(p)) - p).norm());
    }
  }
  return out;
}

}  // namespace seqmanifold
