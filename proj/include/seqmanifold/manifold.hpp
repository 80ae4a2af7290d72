#pragma once

// Stable manifolds from the zero set of F(u) = Su - f_*(u): truncated orbit
// Newton solves, local graphs over E^s(r), and globalization by preimages.

#include "seqmanifold/banded.hpp"
#include "seqmanifold/dynsys.hpp"
#include "seqmanifold/error.hpp"
#include "seqmanifold/linalg.hpp"
#include "seqmanifold/seqspace.hpp"
#include "seqmanifold/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

namespace seqmanifold {

struct OrbitOptions {
  int truncation = 0;  // 0 selects default_truncation
  double newton_tol = 1e-12;
  int max_iter = 50;
};

/// Tail factor used to size truncations: (radius_s + 1) / 2.
inline double effective_radius(const HyperbolicSplitting& split) { return 0.5 * (split.radius_s + 1.0); }

inline int default_truncation(const HyperbolicSplitting& split) {
  const double n = std::ceil(std::log(1e-14) / std::log(effective_radius(split)));
  return std::max(60, static_cast<int>(n));
}

inline int minimum_truncation(const HyperbolicSplitting& split, double newton_tol) {
  return static_cast<int>(std::ceil(std::log(newton_tol) / std::log(effective_radius(split))));
}

/// Orbit u(0..N) of f with P^s(u(0) - x) = basis_s * xi and P^u(u(N) - x) = 0.
struct OrbitProblem {
  SystemSpec system;
  HyperbolicSplitting splitting;
  Vec xi;
  int truncation = 60;
  double newton_tol = 1e-12;
  int max_iter = 50;
};

inline OrbitProblem make_orbit_problem(const SystemSpec& sys, const HyperbolicSplitting& split,
                                       const Vec& xi, const OrbitOptions& opts = {}) {
  if (xi.size() != split.dim_s())
    throw Error(ErrorCode::DimensionMismatch, "xi must have one entry per stable direction");
  if (split.dim != sys.dim) throw Error(ErrorCode::DimensionMismatch, "splitting and system dimensions differ");
  OrbitProblem p;
  p.system = sys;
  p.splitting = split;
  p.xi = xi;
  p.newton_tol = opts.newton_tol;
  p.max_iter = opts.max_iter;
  p.truncation = opts.truncation > 0 ? opts.truncation : default_truncation(split);
  const int min_n = minimum_truncation(split, p.newton_tol);
  if (p.truncation < min_n)
    throw Error(ErrorCode::BadConfig, "truncation " + std::to_string(p.truncation) +
                                          " below the minimum " + std::to_string(min_n) + " for this tolerance");
  return p;
}

inline OrbitProblem make_orbit_problem(const SystemSpec& sys, const Vec& xi, const OrbitOptions& opts = {}) {
  return make_orbit_problem(sys, split_spectrum(sys.linearization()), xi, opts);
}

struct TruncatedOrbit {
  Vec xi;
  TruncatedSequence u;
  double residual = 0.0;
  double decay_slope = 0.0;  // least-squares slope of log|u(n) - x|
  double decay_rate = 0.0;   // exp(decay_slope), 0 for the constant orbit
  int iterations = 0;
};

namespace detail {

// Ordering of equations: d_s head rows, then d rows per step n = 0..N-1,
// then d_u tail rows. Unknowns are u(0), ..., u(N).
inline Vec orbit_residual(const OrbitProblem& p, const TruncatedSequence& u) {
  const auto& s = p.splitting;
  const int d = s.dim, ds = s.dim_s(), N = p.truncation;
  const Vec& x = p.system.fixed_point;
  Vec r(static_cast<Eigen::Index>(N + 1) * d);
  r.head(ds) = s.stable_coords(u[0] - x) - p.xi;
  for (int n = 0; n < N; ++n) r.segment(ds + n * d, d) = u[n + 1] - p.system.eval(u[n]);
  r.tail(d - ds) = s.unstable_coords(u[N] - x);
  return r;
}

inline BandedMatrix orbit_jacobian(const OrbitProblem& p, const TruncatedSequence& u) {
  const auto& s = p.splitting;
  const int d = s.dim, ds = s.dim_s(), du = s.dim_u(), N = p.truncation;
  const int kl = ds + d - 1;
  const int ku = std::max(d - 1, 2 * d - 1 - ds);
  BandedMatrix J((N + 1) * d, kl, ku);
  const Mat head = s.basis_s.transpose() * s.proj_s;
  const Mat tail = s.basis_u.transpose() * s.proj_u;
  for (int i = 0; i < ds; ++i)
    for (int j = 0; j < d; ++j) J.at(i, j) = head(i, j);
  for (int n = 0; n < N; ++n) {
    const Mat A = p.system.jacobian(u[n]);
    const int row = ds + n * d;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) J.at(row + i, n * d + j) = -A(i, j);
      J.at(row + i, (n + 1) * d + i) = 1.0;
    }
  }
  const int row = ds + N * d;
  for (int i = 0; i < du; ++i)
    for (int j = 0; j < d; ++j) J.at(row + i, N * d + j) = tail(i, j);
  return J;
}

inline void fit_decay(TruncatedOrbit& orbit, const Vec& x) {
  std::vector<double> ns, logs;
  for (int n = 0; n < orbit.u.length(); ++n) {
    const double e = (orbit.u[n] - x).norm();
    if (e > 1e-12) {
      ns.push_back(n);
      logs.push_back(std::log(e));
    }
  }
  if (ns.size() < 2) {
    orbit.decay_slope = -kInfinity;
    orbit.decay_rate = 0.0;
    return;
  }
  const double mn = std::accumulate(ns.begin(), ns.end(), 0.0) / ns.size();
  const double ml = std::accumulate(logs.begin(), logs.end(), 0.0) / logs.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    sxy += (ns[i] - mn) * (logs[i] - ml);
    sxx += (ns[i] - mn) * (ns[i] - mn);
  }
  orbit.decay_slope = sxy / sxx;
  orbit.decay_rate = std::exp(orbit.decay_slope);
}

}  // namespace detail

/// Linear initial guess u(n) = x + T^n basis_s xi with T = Df(x).
inline TruncatedSequence linear_orbit_guess(const OrbitProblem& p) {
  const int d = p.splitting.dim;
  const Mat step = p.splitting.proj_s * p.system.linearization();  // T on E^s, roundoff kept out of E^u
  TruncatedSequence u(d, p.truncation + 1);
  Vec v = p.splitting.embed_stable(p.xi);
  for (int n = 0; n <= p.truncation; ++n) {
    u[n] = p.system.fixed_point + v;
    v = step * v;
  }
  return u;
}

/// Newton's method on the square system (N+1)d x (N+1)d. Each step solves
/// the block-bidiagonal Jacobian with its head/tail border by banded LU with
/// partial pivoting.
inline TruncatedOrbit solve_orbit(const OrbitProblem& p, const TruncatedSequence* initial = nullptr) {
  TruncatedOrbit out;
  out.xi = p.xi;
  out.u = initial ? *initial : linear_orbit_guess(p);
  if (out.u.length() != p.truncation + 1 || out.u.dim() != p.splitting.dim)
    throw Error(ErrorCode::DimensionMismatch, "initial orbit has wrong shape");

  auto check_domain = [&](const TruncatedSequence& u) {
    for (int n = 0; n < u.length(); ++n)
      if (!p.system.in_domain(u[n]))
        throw Error(ErrorCode::DomainEscape, "orbit entry " + std::to_string(n) + " left the system domain");
  };
  check_domain(out.u);

  for (int it = 0;; ++it) {
    const Vec r = detail::orbit_residual(p, out.u);
    out.residual = sup_norm(r);
    out.iterations = it;
    if (!std::isfinite(out.residual)) break;
    if (out.residual <= p.newton_tol) {
      detail::fit_decay(out, p.system.fixed_point);
      return out;
    }
    if (it == p.max_iter) break;
    const BandedLU lu(detail::orbit_jacobian(p, out.u));
    const Vec delta = lu.solve(-r);
    out.u.matrix() += Eigen::Map<const Mat>(delta.data(), p.splitting.dim, p.truncation + 1);
    check_domain(out.u);
  }
  std::ostringstream msg;
  msg << "orbit Newton did not converge (residual " << out.residual << ") for xi = [" << p.xi.transpose()
      << "]; shrink |xi| or raise the truncation";
  throw Error(ErrorCode::NoConvergence, msg.str());
}

// ---------------------------------------------------------------------------
// Membership in W^s

struct MembershipResult {
  bool member = false;
  double min_distance = kInfinity;
  int first_hit = -1;
};

/// Iterates f up to `steps` times and records whether the orbit enters the
/// tol-ball around x. The first hit is the finite-precision form of
/// f^n(p) -> x: forward iteration near a saddle amplifies roundoff in the
/// unstable direction, so the orbit eventually drifts away again.
inline MembershipResult forward_membership(const SystemSpec& sys, Vec p, int steps, double tol) {
  MembershipResult res;
  for (int n = 0; n <= steps; ++n) {
    if (!p.allFinite()) break;
    const double dist = (p - sys.fixed_point).norm();
    res.min_distance = std::min(res.min_distance, dist);
    if (dist <= tol) {
      res.member = true;
      res.first_hit = n;
      break;
    }
    if (n < steps) p = sys.eval(p);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Local graph

struct GraphOptions {
  OrbitOptions orbit;
  int membership_steps = 40;
  double membership_tol = 1e-6;
  double probe_fraction = 1e-4;  // tangency probes at +-probe_fraction * r * e_i
  double beta_margin = 0.5;
};

struct GraphSample {
  Vec xi;
  Vec w;      // unstable coordinates of P^u(u(0) - x)
  Vec point;  // u(0) = x + basis_s xi + basis_u w
  bool converged = false;
  double residual = 0.0;
  double decay_slope = 0.0;
  double decay_rate = 0.0;
  int iterations = 0;
  bool monotone = false;  // adapted norm of u(n) - x non-increasing
  bool member = false;
};

struct LocalGraph {
  SystemSpec system;
  HyperbolicSplitting splitting;
  double radius = 0.0;
  std::vector<int> grid_shape;
  std::vector<std::vector<double>> axes;  // node coordinates per stable axis
  std::vector<GraphSample> samples;       // grid order, first axis fastest
  std::vector<GraphSample> probes;        // +h e_1, -h e_1, +h e_2, ...
  double probe_step = 0.0;
  double newton_tol = 1e-12;

  const GraphSample& at(const std::vector<int>& idx) const {
    std::size_t flat = 0, stride = 1;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      flat += static_cast<std::size_t>(idx[a]) * stride;
      stride *= static_cast<std::size_t>(grid_shape[a]);
    }
    return samples[flat];
  }
};

namespace detail {

inline bool adapted_monotone(const AdaptedNorm& norm, const TruncatedSequence& u, const Vec& x) {
  double prev = kInfinity;
  for (int n = 0; n < u.length(); ++n) {
    const double v = norm(Vec(u[n] - x));
    if (v > prev * (1.0 + 1e-12) + 1e-15) return false;
    prev = v;
  }
  return true;
}

inline TruncatedSequence shifted_guess(const TruncatedSequence& base, const Mat& T,
                                       const HyperbolicSplitting& split, const Vec& dxi) {
  TruncatedSequence u = base;
  const Mat step = split.proj_s * T;
  Vec v = split.embed_stable(dxi);
  for (int n = 0; n < u.length(); ++n) {
    u[n] += v;
    v = step * v;
  }
  return u;
}

}  // namespace detail

/// Samples the local stable manifold as the graph xi -> w(xi) over a uniform
/// grid on the box [-r, r]^{d_s}, solving from small |xi| outward with each
/// node warm-started from an already solved neighbour.
inline LocalGraph local_graph(const SystemSpec& sys, double r, const std::vector<int>& grid,
                              const GraphOptions& opts = {}) {
  const Mat T = sys.linearization();
  const HyperbolicSplitting split = split_spectrum(T);
  const int ds = split.dim_s();
  if (ds < 1 || ds > 2)
    throw Error(ErrorCode::DimensionMismatch, "grid sampling supports 1 or 2 stable dimensions");
  if (static_cast<int>(grid.size()) != ds)
    throw Error(ErrorCode::DimensionMismatch, "grid needs one count per stable dimension");
  for (int c : grid)
    if (c < 1) throw Error(ErrorCode::BadConfig, "grid counts must be positive");
  if (!(r > 0.0)) throw Error(ErrorCode::BadConfig, "radius must be positive");

  const AdaptedNorm norm = build_adapted_norm(T, split, opts.beta_margin);

  LocalGraph g;
  g.system = sys;
  g.splitting = split;
  g.radius = r;
  g.grid_shape = grid;
  g.newton_tol = opts.orbit.newton_tol;
  for (int a = 0; a < ds; ++a) {
    std::vector<double> ax;
    for (int i = 0; i < grid[a]; ++i)
      ax.push_back(grid[a] == 1 ? 0.0 : -r + 2.0 * r * i / (grid[a] - 1));
    g.axes.push_back(ax);
  }
  const int nodes = ds == 1 ? grid[0] : grid[0] * grid[1];
  auto node_xi = [&](int flat) {
    Vec xi(ds);
    xi(0) = g.axes[0][flat % grid[0]];
    if (ds == 2) xi(1) = g.axes[1][flat / grid[0]];
    return xi;
  };

  auto solve_node = [&](const Vec& xi, const TruncatedOrbit* neighbour) {
    const OrbitProblem prob = make_orbit_problem(sys, split, xi, opts.orbit);
    TruncatedOrbit orbit;
    if (neighbour) {
      const TruncatedSequence guess = detail::shifted_guess(neighbour->u, T, split, xi - neighbour->xi);
      orbit = solve_orbit(prob, &guess);
    } else {
      orbit = solve_orbit(prob);
    }
    GraphSample s;
    s.xi = xi;
    s.point = orbit.u[0];
    s.w = split.unstable_coords(s.point - sys.fixed_point);
    s.converged = true;
    s.residual = orbit.residual;
    s.decay_slope = orbit.decay_slope;
    s.decay_rate = orbit.decay_rate;
    s.iterations = orbit.iterations;
    s.monotone = detail::adapted_monotone(norm, orbit.u, sys.fixed_point);
    s.member = forward_membership(sys, s.point, opts.membership_steps, opts.membership_tol).member;
    return std::make_pair(s, orbit);
  };

  std::vector<int> order(static_cast<std::size_t>(nodes));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return node_xi(a).norm() < node_xi(b).norm(); });

  std::vector<std::optional<TruncatedOrbit>> solved(static_cast<std::size_t>(nodes));
  g.samples.resize(static_cast<std::size_t>(nodes));
  for (int flat : order) {
    const Vec xi = node_xi(flat);
    const TruncatedOrbit* best = nullptr;
    double best_norm = kInfinity;
    const int i0 = flat % grid[0];
    const int i1 = ds == 2 ? flat / grid[0] : 0;
    for (int di = -1; di <= 1; ++di)
      for (int dj = (ds == 2 ? -1 : 0); dj <= (ds == 2 ? 1 : 0); ++dj) {
        const int a = i0 + di, b = i1 + dj;
        if ((di == 0 && dj == 0) || a < 0 || a >= grid[0] || b < 0 || (ds == 2 && b >= grid[1])) continue;
        const auto& cand = solved[static_cast<std::size_t>(a + b * grid[0])];
        if (cand && cand->xi.norm() < best_norm) {
          best = &*cand;
          best_norm = cand->xi.norm();
        }
      }
    auto [sample, orbit] = solve_node(xi, best);
    g.samples[static_cast<std::size_t>(flat)] = sample;
    solved[static_cast<std::size_t>(flat)] = std::move(orbit);
  }

  g.probe_step = opts.probe_fraction * r;
  const TruncatedOrbit centre = solve_orbit(make_orbit_problem(sys, split, Vec::Zero(ds), opts.orbit));
  for (int a = 0; a < ds; ++a)
    for (double sign : {1.0, -1.0}) {
      Vec xi = Vec::Zero(ds);
      xi(a) = sign * g.probe_step;
      g.probes.push_back(solve_node(xi, &centre).first);
    }
  return g;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct TangencyReport {
  double max_derivative = 0.0;  // max |entry| of the central-difference Dw(0)
  double w0_norm = 0.0;
};

inline TangencyReport verify_tangency(const LocalGraph& g) {
  TangencyReport rep;
  const int ds = g.splitting.dim_s();
  if (static_cast<int>(g.probes.size()) != 2 * ds)
    throw Error(ErrorCode::BadConfig, "graph lacks tangency probes");
  for (int a = 0; a < ds; ++a) {
    const Vec col = (g.probes[2 * a].w - g.probes[2 * a + 1].w) / (2.0 * g.probe_step);
    rep.max_derivative = std::max(rep.max_derivative, sup_norm(col));
  }
  // w(0) from the grid node at the origin when present, else the probe midpoint.
  Vec w0 = 0.5 * (g.probes[0].w + g.probes[1].w);
  for (const auto& s : g.samples)
    if (s.xi.norm() == 0.0) w0 = s.w;
  rep.w0_norm = w0.norm();
  return rep;
}

namespace detail {

// Index of the cell [axis[i], axis[i+1]] containing v, plus the local weight.
inline std::optional<std::pair<int, double>> locate(const std::vector<double>& axis, double v) {
  if (axis.size() < 2 || v < axis.front() || v > axis.back()) return std::nullopt;
  auto it = std::upper_bound(axis.begin(), axis.end(), v);
  int i = static_cast<int>(it - axis.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(axis.size()) - 2);
  const double t = (v - axis[i]) / (axis[i + 1] - axis[i]);
  return std::make_pair(i, t);
}

}  // namespace detail

/// Piecewise-(bi)linear interpolation of w over the grid.
inline std::optional<Vec> interpolate_graph(const LocalGraph& g, const Vec& xi) {
  const int ds = g.splitting.dim_s();
  const auto c0 = detail::locate(g.axes[0], xi(0));
  if (!c0) return std::nullopt;
  if (ds == 1) {
    const auto [i, t] = *c0;
    return Vec((1.0 - t) * g.at({i}).w + t * g.at({i + 1}).w);
  }
  const auto c1 = detail::locate(g.axes[1], xi(1));
  if (!c1) return std::nullopt;
  const auto [i, s] = *c0;
  const auto [j, t] = *c1;
  return Vec((1.0 - s) * (1.0 - t) * g.at({i, j}).w + s * (1.0 - t) * g.at({i + 1, j}).w +
             (1.0 - s) * t * g.at({i, j + 1}).w + s * t * g.at({i + 1, j + 1}).w);
}

struct InvarianceReport {
  double max_residual = 0.0;
  int checked = 0;
  int skipped = 0;  // images outside the sampled stable box
};

/// max over samples p of |w(f(p)) - w_ref(xi(f(p)))| where w_ref defaults to
/// the graph's own piecewise-linear interpolant.
inline InvarianceReport verify_invariance(const SystemSpec& sys, const LocalGraph& g,
                                          const std::function<std::optional<Vec>(const Vec&)>& w_ref = {}) {
  if (g.samples.empty()) throw Error(ErrorCode::BadConfig, "empty graph");
  InvarianceReport rep;
  for (const auto& s : g.samples) {
    const Vec q = sys.eval(s.point) - sys.fixed_point;
    const Vec xi = g.splitting.stable_coords(q);
    const Vec w = g.splitting.unstable_coords(q);
    const std::optional<Vec> ref = w_ref ? w_ref(xi) : interpolate_graph(g, xi);
    if (!ref) {
      ++rep.skipped;
      continue;
    }
    ++rep.checked;
    rep.max_residual = std::max(rep.max_residual, (w - *ref).norm());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Globalization

struct GlobalizeOptions {
  double dedup_resolution = 1e-9;
  double membership_tol = 1e-6;
  bool allow_newton_inverse = true;
};

struct CloudPoint {
  int depth = 0;
  Vec p;
  bool member = false;
  double min_distance = 0.0;
};

struct GlobalCloud {
  std::vector<CloudPoint> points;
  int dropped_domain = 0;     // preimages outside the declared domain
  int dropped_inversion = 0;  // Newton inversion failures
  int duplicates = 0;
  int membership_steps = 0;

  std::size_t members() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(),
                                                  [](const CloudPoint& c) { return c.member; }));
  }
};

inline int globalize_membership_steps(const HyperbolicSplitting& split, int n_pre) {
  const double per = std::ceil(std::log(2.0) / -std::log(effective_radius(split)));
  return 40 + n_pre * static_cast<int>(per);
}

/// Union over m = 0..n_pre of f^{-m}(graph points), de-duplicated on a grid
/// of the given resolution; each point carries its depth m and the result
/// of the forward membership test.
inline GlobalCloud globalize(const SystemSpec& sys, const LocalGraph& g, int n_pre,
                             const GlobalizeOptions& opts = {}) {
  if (n_pre < 0) throw Error(ErrorCode::BadConfig, "n_pre must be nonnegative");
  if (!sys.inverse && !opts.allow_newton_inverse && n_pre > 0)
    throw Error(ErrorCode::InverseUnavailable, "system has no inverse and Newton inversion is disabled");

  GlobalCloud cloud;
  cloud.membership_steps = globalize_membership_steps(g.splitting, n_pre);
  const Mat Tinv = sys.linearization().inverse();

  std::set<std::vector<long long>> seen;
  auto key_of = [&](const Vec& p) -> std::optional<std::vector<long long>> {
    std::vector<long long> key;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double q = p(i) / opts.dedup_resolution;
      if (!(std::abs(q) < 9e18)) return std::nullopt;
      key.push_back(std::llround(q));
    }
    return key;
  };

  std::vector<Vec> level;
  for (const auto& s : g.samples) level.push_back(s.point);
  for (int m = 0; m <= n_pre; ++m) {
    std::vector<Vec> kept;
    for (const Vec& p : level) {
      const auto key = key_of(p);
      if (!key || !sys.in_domain(p)) {
        ++cloud.dropped_domain;
        continue;
      }
      if (!seen.insert(*key).second) {
        ++cloud.duplicates;
        continue;
      }
      const MembershipResult mr = forward_membership(sys, p, cloud.membership_steps, opts.membership_tol);
      cloud.points.push_back(CloudPoint{m, p, mr.member, mr.min_distance});
      kept.push_back(p);
    }
    if (m == n_pre) break;
    level.clear();
    for (const Vec& p : kept) {
      if (sys.inverse) {
        level.push_back((*sys.inverse)(p));
      } else {
        const Vec guess = sys.fixed_point + Tinv * (p - sys.fixed_point);
        if (auto q = newton_invert(sys, p, guess)) {
          level.push_back(*q);
        } else {
          ++cloud.dropped_inversion;
        }
      }
    }
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// CSV output

/// Columns: xi_1[,xi_2], w_1..w_du, p_1..p_d, converged, decay_rate.
inline void write_graph_csv(std::ostream& out, const LocalGraph& g) {
  const int ds = g.splitting.dim_s(), du = g.splitting.dim_u(), d = g.splitting.dim;
  for (int i = 0; i < ds; ++i) out << (i ? "," : "") << "xi_" << (i + 1);
  for (int i = 0; i < du; ++i) out << ",w_" << (i + 1);
  for (int i = 0; i < d; ++i) out << ",p_" << (i + 1);
  out << ",converged,decay_rate\n" << std::setprecision(17);
  for (const auto& s : g.samples) {
    for (int i = 0; i < ds; ++i) out << (i ? "," : "") << s.xi(i);
    for (int i = 0; i < du; ++i) out << "," << s.w(i);
    for (int i = 0; i < d; ++i) out << "," << s.point(i);
    out << "," << (s.converged ? 1 : 0) << "," << s.decay_rate << "\n";
  }
}

/// Columns: m, p_1..p_d.
inline void write_cloud_csv(std::ostream& out, const GlobalCloud& cloud, int dim) {
  out << "m";
  for (int i = 0; i < dim; ++i) out << ",p_" << (i + 1);
  out << "\n" << std::setprecision(17);
  for (const auto& c : cloud.points) {
    out << c.depth;
    for (int i = 0; i < dim; ++i) out << "," << c.p(i);
    out << "\n";
  }
}

}  // namespace seqmanifold
