// seqmanifold: command-line front end.
//
//   seqmanifold split    --system henon
//   seqmanifold orbit    --system quadratic --xi 0.1 --out orbit.csv
//   seqmanifold manifold --system henon --radius 0.3 --grid 81 --globalize 6 --out ws.csv
//   seqmanifold extend   --system germ1d --kind smooth
//   seqmanifold verify   all --seed 0
//
// Every command prints a JSON report on stdout. Exit status: 0 all checks
// pass, 1 a check failed, 2 usage error, 3 numerical failure.

#include "seqmanifold/builtins.hpp"
#include "seqmanifold/config.hpp"
#include "seqmanifold/germext.hpp"
#include "seqmanifold/manifold.hpp"
#include "seqmanifold/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sm = seqmanifold;
using nlohmann::json;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Shared {
  std::string system;
  std::string out;
  unsigned seed = 0;
  std::string truncation = "auto";
  double tol = 1e-12;
  double a = 1.4, b = 0.3;
  std::string matrix;
};

struct Report {
  std::string command;
  json inputs = json::object();
  json outputs = json::array();
  json data = json::object();
  std::vector<sm::Check> checks;

  void add(sm::Check c) { checks.push_back(std::move(c)); }
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const sm::Check& c) { return c.pass; });
  }
  json to_json(double elapsed) const {
    json cs = json::array();
    for (const auto& c : checks)
      cs.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold},
                    {"relation", c.relation}, {"pass", c.pass}});
    return {{"command", command}, {"inputs", inputs}, {"outputs", outputs},
            {"checks", cs},       {"data", data},     {"elapsed_seconds", elapsed}};
  }
};

json to_json(const sm::Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const sm::Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("malformed ") + what + " '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what);
  return out;
}

sm::Mat parse_matrix(const std::string& text) {
  const sm::Mat m = sm::parse_matrix_literal(text);
  if (m.size() == 0) throw UsageError("malformed matrix literal '" + text + "' (rows ';', entries ',')");
  return m;
}

sm::SystemSpec resolve_system(const Shared& s, const std::string& fallback) {
  const std::string name = s.system.empty() ? fallback : s.system;
  const auto& names = sm::builtin_names();
  if (std::find(names.begin(), names.end(), name) != names.end()) {
    sm::BuiltinParams p;
    p.a = s.a;
    p.b = s.b;
    if (!s.matrix.empty()) p.matrix = parse_matrix(s.matrix);
    return sm::builtin_system(name, p);
  }
  if (!std::filesystem::exists(name))
    throw UsageError("--system '" + name + "' is neither a built-in nor an existing config file");
  return sm::load_system_file(name);
}

sm::OrbitOptions orbit_options(const Shared& s) {
  sm::OrbitOptions o;
  o.newton_tol = s.tol;
  if (s.truncation != "auto") {
    try {
      std::size_t used = 0;
      o.truncation = std::stoi(s.truncation, &used);
      if (used != s.truncation.size() || o.truncation < 1) throw std::invalid_argument(s.truncation);
    } catch (const std::exception&) {
      throw UsageError("--truncation must be a positive integer or 'auto'");
    }
  }
  return o;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  return f;
}

void echo_shared(Report& r, const Shared& s) {
  r.inputs["system"] = s.system;
  r.inputs["seed"] = s.seed;
  r.inputs["truncation"] = s.truncation;
  r.inputs["tol"] = s.tol;
  if (!s.out.empty()) r.inputs["out"] = s.out;
  if (!s.matrix.empty()) r.inputs["matrix"] = s.matrix;
}

// ---------------------------------------------------------------------------

void cmd_split(const Shared& s, Report& r) {
  const sm::SystemSpec sys = resolve_system(s, "linear");
  const sm::Mat T = sys.linearization();
  const sm::HyperbolicSplitting sp = sm::split_spectrum(T);
  const sm::AdaptedNorm norm = sm::build_adapted_norm(T, sp, 0.5);

  json ev = json::array();
  for (Eigen::Index i = 0; i < sp.eigenvalues.size(); ++i)
    ev.push_back({sp.eigenvalues(i).real(), sp.eigenvalues(i).imag()});
  r.data = {{"fixed_point", to_json(sys.fixed_point)},
            {"jacobian", to_json(T)},
            {"eigenvalues", ev},
            {"dim_s", sp.dim_s()},
            {"dim_u", sp.dim_u()},
            {"radius_s", sp.radius_s},
            {"radius_u_inv", sp.radius_u_inv},
            {"gap", sp.gap},
            {"proj_s", to_json(sp.proj_s)},
            {"proj_u", to_json(sp.proj_u)},
            {"basis_s", to_json(sp.basis_s)},
            {"basis_u", to_json(sp.basis_u)},
            {"adapted_norm",
             {{"lambda", norm.lambda},
              {"alpha_s", norm.alpha_s},
              {"beta_s", norm.beta_s},
              {"alpha_u", norm.alpha_u},
              {"beta_u", norm.beta_u},
              {"truncation_s", norm.truncation_s()},
              {"truncation_u", norm.truncation_u()},
              {"lower_const", norm.lower_const},
              {"upper_const", norm.upper_const}}}};

  const int d = sp.dim;
  const double scale = std::max(1.0, sm::max_abs(T));
  const sm::Mat I = sm::Mat::Identity(d, d);
  r.add(sm::check_le("projector_sum", sm::max_abs(sp.proj_s + sp.proj_u - I), 1e-10));
  r.add(sm::check_le("projector_idempotent", sm::max_abs(sp.proj_s * sp.proj_s - sp.proj_s), 1e-10));
  r.add(sm::check_le("projector_complementary", sm::max_abs(sp.proj_s * sp.proj_u), 1e-10));
  r.add(sm::check_le("projector_commutes", sm::max_abs(T * sp.proj_s - sp.proj_s * T) / scale, 1e-10));

  if (!s.out.empty()) {
    open_output(s.out) << r.data.dump(2) << "\n";
    r.outputs.push_back(s.out);
  }
}

void cmd_orbit(const Shared& s, const std::string& xi_text, Report& r) {
  const sm::SystemSpec sys = resolve_system(s, "quadratic");
  const sm::Mat T = sys.linearization();
  const sm::HyperbolicSplitting sp = sm::split_spectrum(T);
  const std::vector<double> xs = parse_list(xi_text, "--xi");
  if (static_cast<int>(xs.size()) != sp.dim_s())
    throw UsageError("--xi needs " + std::to_string(sp.dim_s()) + " stable coordinate(s)");
  const sm::Vec xi = Eigen::Map<const sm::Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  r.inputs["xi"] = xs;

  const sm::OrbitProblem p = sm::make_orbit_problem(sys, sp, xi, orbit_options(s));
  const sm::TruncatedOrbit o = sm::solve_orbit(p);
  const double bound = std::log(sm::effective_radius(sp));
  r.data = {{"truncation", p.truncation},
            {"iterations", o.iterations},
            {"residual", o.residual},
            {"decay_slope", o.decay_slope},
            {"decay_rate", o.decay_rate},
            {"u0", to_json(sm::Vec(o.u[0]))}};
  r.add(sm::check_le("residual", o.residual, p.newton_tol));
  if (std::isfinite(o.decay_slope)) r.add(sm::check_le("decay_slope", o.decay_slope, bound));
  const sm::Vec head = sp.stable_coords(sm::Vec(o.u[0] - sys.fixed_point)) - xi;
  r.add(sm::check_le("head_condition", head.norm(), p.newton_tol));
  if (sp.dim_u() > 0) {
    const sm::Vec tail = sp.unstable_coords(sm::Vec(o.u[p.truncation] - sys.fixed_point));
    r.add(sm::check_le("tail_condition", tail.norm(), p.newton_tol));
  }
  if (!s.out.empty()) {
    auto f = open_output(s.out);
    sm::write_csv(f, o.u);
    r.outputs.push_back(s.out);
  }
}

void cmd_manifold(const Shared& s, double radius, const std::string& grid_text, int n_pre, std::string cloud,
                  Report& r) {
  const sm::SystemSpec sys = resolve_system(s, "quadratic");
  std::vector<int> grid;
  for (double g : parse_list(grid_text, "--grid")) {
    if (g < 1 || g != std::floor(g)) throw UsageError("--grid entries must be positive integers");
    grid.push_back(static_cast<int>(g));
  }
  const int ds = sm::split_spectrum(sys.linearization()).dim_s();
  if (grid.size() == 1 && ds == 2) grid.push_back(grid[0]);
  r.inputs["radius"] = radius;
  r.inputs["grid"] = grid;
  r.inputs["globalize"] = n_pre;
  if (sys.name == "henon") {
    r.inputs["a"] = s.a;
    r.inputs["b"] = s.b;
  }

  sm::GraphOptions opts;
  opts.orbit = orbit_options(s);
  const sm::LocalGraph g = sm::local_graph(sys, radius, grid, opts);

  int converged = 0, members = 0, monotone = 0;
  double slope_excess = -sm::kInfinity, max_w = 0.0;
  const double bound = std::log(sm::effective_radius(g.splitting));
  for (const auto& smp : g.samples) {
    converged += smp.converged;
    members += smp.member;
    monotone += smp.monotone;
    if (std::isfinite(smp.decay_slope)) slope_excess = std::max(slope_excess, smp.decay_slope - bound);
    max_w = std::max(max_w, smp.w.size() ? sm::sup_norm(smp.w) : 0.0);
  }
  const auto n = static_cast<double>(g.samples.size());
  const sm::TangencyReport tan = sm::verify_tangency(g);
  const sm::InvarianceReport inv = sm::verify_invariance(sys, g);
  r.data = {{"samples", g.samples.size()},
            {"converged", converged},
            {"monotone", monotone},
            {"max_abs_w", max_w},
            {"tangency", tan.max_derivative},
            {"invariance", inv.max_residual},
            {"invariance_checked", inv.checked},
            {"invariance_skipped", inv.skipped}};
  r.add(sm::check_ge("converged_fraction", converged / n, 1.0));
  r.add(sm::check_ge("membership_fraction", members / n, 1.0));
  r.add(sm::check_le("w0_norm", tan.w0_norm, opts.orbit.newton_tol));
  if (std::isfinite(slope_excess)) r.add(sm::check_le("decay_slope_excess", slope_excess, 0.0));

  if (sys.name == "quadratic") {
    double err = 0.0;
    for (const auto& smp : g.samples)
      err = std::max(err, std::abs(smp.point(1) + 4.0 / 7.0 * smp.point(0) * smp.point(0)));
    r.add(sm::check_le("oracle_parabola_max_err", err, 1e-9));
  }
  if (sys.name == "linear") r.add(sm::check_le("linear_max_abs_w", max_w, 1e-12));

  const std::string out = s.out.empty() ? "graph.csv" : s.out;
  {
    auto f = open_output(out);
    sm::write_graph_csv(f, g);
  }
  r.outputs.push_back(out);

  if (n_pre > 0) {
    const sm::GlobalCloud c = sm::globalize(sys, g, n_pre);
    if (cloud.empty()) {
      const std::filesystem::path p(out);
      cloud = (p.parent_path() / (p.stem().string() + "_global.csv")).string();
    }
    {
      auto f = open_output(cloud);
      sm::write_cloud_csv(f, c, sys.dim);
    }
    r.outputs.push_back(cloud);
    r.data["cloud"] = {{"points", c.points.size()},
                       {"members", c.members()},
                       {"dropped_domain", c.dropped_domain},
                       {"dropped_inversion", c.dropped_inversion},
                       {"duplicates", c.duplicates},
                       {"membership_steps", c.membership_steps}};
    const double frac = c.points.empty() ? 0.0 : double(c.members()) / c.points.size();
    r.add(sm::check_ge("cloud_membership_fraction", frac, 1.0));
  }
}

struct ExtendArgs {
  std::string kind = "lipschitz";
  double lambda_scale = 0.1;
  double r0 = 2.0, s0 = 1.0, epsilon = 0.1;
  int samples = 10000;
};

void cmd_extend(const Shared& s, const ExtendArgs& e, Report& r) {
  sm::SystemSpec sys = resolve_system(s, "germ1d");
  if (sys.fixed_point.norm() != 0.0) sys = sm::translate_to_origin(sys);
  r.inputs["kind"] = e.kind;
  r.inputs["samples"] = e.samples;

  sm::ExtendedMap ext;
  if (e.kind == "lipschitz") {
    r.inputs["lambda_scale"] = e.lambda_scale;
    ext = sm::lipschitz_extension(sys, e.lambda_scale, sm::LipschitzOptions{.seed = s.seed});
  } else if (e.kind == "smooth") {
    r.inputs["r0"] = e.r0;
    r.inputs["s0"] = e.s0;
    r.inputs["epsilon"] = e.epsilon;
    ext = sm::smooth_extension(sys, e.r0, e.s0, e.epsilon, sm::SmoothOptions{.seed = s.seed});
  } else {
    throw UsageError("--kind must be 'lipschitz' or 'smooth'");
  }
  const sm::ContractionSample cs = sm::sample_contraction(ext, e.samples, 1e3, 1e-4, s.seed + 1);
  const double agreement = sm::sample_agreement(ext, 1000, s.seed + 2);

  json cert = {{"kind", sm::to_string(ext.kind)},
               {"s", std::isinf(ext.agreement_radius) ? json("inf") : json(ext.agreement_radius)},
               {"theta", ext.theta},
               {"lip_estimate", ext.lip_estimate},
               {"samples", cs.samples},
               {"max_ratio_observed", cs.max_ratio}};
  if (ext.kind == sm::ExtensionKind::smooth) cert["field_bound"] = ext.field_bound;
  cert["cutoff_scale"] = std::isinf(ext.cutoff_scale) ? json("inf") : json(ext.cutoff_scale);
  cert["operator_norm_T"] = ext.op_norm_T;
  r.data = cert;
  r.add(sm::check_le("theta_below_one", ext.theta, 1.0 - 1e-12));
  r.add(sm::check_le("max_ratio_observed", cs.max_ratio, ext.theta));
  r.add(sm::check_le("agreement_max_err", agreement, ext.kind == sm::ExtensionKind::lipschitz ? 0.0 : 1e-10));
  if (!s.out.empty()) {
    open_output(s.out) << cert.dump(2) << "\n";
    r.outputs.push_back(s.out);
  }
}

void cmd_verify(const Shared& s, const std::string& suite, const sm::VerifyOptions& vo, Report& r) {
  r.inputs["suite"] = suite;
  r.inputs["trials"] = vo.trials;
  r.inputs["dim"] = vo.dim;
  r.inputs["samples"] = vo.samples;
  (void)s;
  for (const auto& res : sm::run_suite(suite, vo)) {
    json info = json::object();
    for (const auto& [k, v] : res.info) info[k] = v;
    r.data[res.suite] = {{"pass", res.passed()}, {"info", info}};
    for (auto c : res.checks) {
      c.name = res.suite + "." + c.name;
      r.add(std::move(c));
    }
  }
}

void add_shared(CLI::App* cmd, Shared& s) {
  cmd->add_option("--system", s.system, "built-in name (" + [] {
    std::string n;
    for (const auto& x : sm::builtin_names()) n += (n.empty() ? "" : ", ") + x;
    return n;
  }() + ") or JSON config path");
  cmd->add_option("--out", s.out, "output path");
  cmd->add_option("--seed", s.seed, "random seed")->capture_default_str();
  cmd->add_option("--truncation", s.truncation, "orbit truncation N, or 'auto'")->capture_default_str();
  cmd->add_option("--tol", s.tol, "Newton tolerance")->capture_default_str();
  cmd->add_option("--a", s.a, "Henon parameter a")->capture_default_str();
  cmd->add_option("--b", s.b, "Henon parameter b")->capture_default_str();
  cmd->add_option("--matrix", s.matrix, "matrix literal, rows ';' entries ','");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable manifolds of hyperbolic fixed points and germ extensions"};
  app.require_subcommand(1);
  Shared shared;

  auto* split = app.add_subcommand("split", "spectral splitting and adapted norm at the fixed point");
  add_shared(split, shared);

  auto* orbit = app.add_subcommand("orbit", "solve one truncated orbit with prescribed stable coordinates");
  add_shared(orbit, shared);
  std::string xi_text = "0.1";
  orbit->add_option("--xi", xi_text, "stable coordinates, comma separated")->capture_default_str();

  auto* manifold = app.add_subcommand("manifold", "local stable manifold graph and optional globalization");
  add_shared(manifold, shared);
  double radius = 0.1;
  std::string grid_text = "41";
  int n_pre = 0;
  std::string cloud;
  manifold->add_option("--radius", radius, "graph radius in stable coordinates")->capture_default_str();
  manifold->add_option("--grid", grid_text, "nodes per stable axis (n or n1,n2)")->capture_default_str();
  manifold->add_option("--globalize", n_pre, "number of backward iterations")->capture_default_str();
  manifold->add_option("--cloud", cloud, "cloud CSV path (default <out stem>_global.csv)");

  auto* extend = app.add_subcommand("extend", "extend an attracting germ to a global contraction");
  add_shared(extend, shared);
  ExtendArgs ea;
  extend->add_option("--kind", ea.kind, "lipschitz or smooth")->capture_default_str();
  extend->add_option("--lambda-scale", ea.lambda_scale, "largest cutoff radius tried")->capture_default_str();
  extend->add_option("--r0", ea.r0, "smooth cutoff support radius")->capture_default_str();
  extend->add_option("--s0", ea.s0, "smooth cutoff identity radius")->capture_default_str();
  extend->add_option("--epsilon", ea.epsilon, "field bound |X| <= eps |xi|")->capture_default_str();
  extend->add_option("--samples", ea.samples, "Monte-Carlo contraction samples")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run a property suite");
  add_shared(verify, shared);
  std::string suite;
  sm::VerifyOptions vo;
  verify->add_option("suite", suite, "kernel, norms, tangency, invariance, extension or all")->required();
  verify->add_option("--dim", vo.dim, "matrix dimension (0: random in 2..6)")->capture_default_str();
  verify->add_option("--trials", vo.trials, "random matrices")->capture_default_str();
  verify->add_option("--samples", vo.samples, "samples per matrix or certificate")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  Report report;
  try {
    echo_shared(report, shared);
    if (split->parsed()) {
      report.command = "split";
      cmd_split(shared, report);
    } else if (orbit->parsed()) {
      report.command = "orbit";
      cmd_orbit(shared, xi_text, report);
    } else if (manifold->parsed()) {
      report.command = "manifold";
      cmd_manifold(shared, radius, grid_text, n_pre, cloud, report);
    } else if (extend->parsed()) {
      report.command = "extend";
      cmd_extend(shared, ea, report);
    } else if (verify->parsed()) {
      report.command = "verify";
      vo.seed = shared.seed;
      if (!shared.matrix.empty()) vo.matrix = parse_matrix(shared.matrix);
      cmd_verify(shared, suite, vo, report);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case sm::ErrorCode::BadConfig:
      case sm::ErrorCode::UnknownSuite:
      case sm::ErrorCode::DimensionMismatch:
        return kExitUsage;
      default:
        return kExitNumerical;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << report.to_json(elapsed).dump(2) << "\n";
  if (report.command == "verify" && report.checks.empty()) return kExitCheckFailed;
  return report.passed() ? 0 : kExitCheckFailed;
}
