#include "seqmanifold/builtins.hpp"
#include "seqmanifold/config.hpp"
#include "seqmanifold/dynsys.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <numbers>

using namespace seqmanifold;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// x' = -x + y^2, y' = y + x y
VectorFieldConfig curved_field(double time, int steps) {
  VectorFieldConfig v;
  v.field.map = PolynomialMap(2, {{{-1.0, {1, 0}}, {1.0, {0, 2}}}, {{1.0, {0, 1}}, {1.0, {1, 1}}}});
  v.field.fixed_point = Vec::Zero(2);
  v.time = time;
  v.steps = steps;
  return v;
}

}  // namespace

TEST(Builtins, QuadraticEvaluation) {
  const SystemSpec q = quadratic_system();
  EXPECT_LE((q.eval(vec2(0.2, 0.1)) - vec2(0.1, 0.24)).norm(), 1e-15);
  Mat J = q.jacobian(Vec::Zero(2));
  EXPECT_EQ(J(0, 0), 0.5);
  EXPECT_EQ(J(1, 1), 2.0);
  EXPECT_EQ(J(0, 1), 0.0);
  EXPECT_EQ(J(1, 0), 0.0);
}

TEST(Builtins, HenonEvaluationAndFixedPoint) {
  const SystemSpec h = henon_system(1.4, 0.3);
  EXPECT_LE((h.eval(Vec::Zero(2)) - vec2(1.0, 0.0)).norm(), 1e-15);
  const double x = (-0.7 + std::sqrt(6.09)) / 2.8;
  EXPECT_NEAR(h.fixed_point(0), x, 1e-13);
  EXPECT_NEAR(h.fixed_point(1), 0.3 * x, 1e-13);
  EXPECT_NEAR(h.fixed_point(0), 0.631354, 5e-7);
  EXPECT_NEAR(h.fixed_point(1), 0.189406, 5e-7);
}

TEST(FixedPoint, NewtonFromGuess) {
  const SystemSpec h = henon_system();
  const Vec x = find_fixed_point(h.eval, h.jacobian, vec2(0.6, 0.2));
  EXPECT_NEAR(x(0), 0.631354, 5e-7);
  EXPECT_NEAR(x(1), 0.189406, 5e-7);
  EXPECT_LE((h.eval(x) - x).norm(), 1e-13);

  const SystemSpec q = quadratic_system();
  EXPECT_LE(find_fixed_point(q.eval, q.jacobian, vec2(0.01, 0.01)).norm(), 1e-13);

  Mat T(2, 2);
  T << 0.3, 1.0, 0.0, 3.0;
  const SystemSpec l = linear_system(T);
  EXPECT_LE(find_fixed_point(l.eval, l.jacobian, vec2(5.0, -7.0)).norm(), 1e-13);
}

TEST(FixedPoint, SingularJacobian) {
  // x -> x + 1 has residual 1 and singular Df - I everywhere.
  const PolynomialMap shift(1, {{{1.0, {1}}, {1.0, {0}}}});
  try {
    find_fixed_point([&](const Vec& x) { return shift(x); }, [&](const Vec& x) { return shift.jacobian(x); },
                     Vec::Zero(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularJacobian);
  }
}

TEST(Builtins, AllPassConsistencyChecks) {
  for (const auto& name : builtin_names()) {
    const SystemCheck c = check_system(builtin_system(name), 1);
    EXPECT_TRUE(c.ok()) << name << ": residual " << c.fixed_point_residual << " jac " << c.jacobian_fd_error
                        << " inverse " << c.inverse_roundtrip;
  }
  EXPECT_THROW(builtin_system("nope"), Error);
}

TEST(Builtins, ExactInverses) {
  const SystemSpec q = quadratic_system();
  const Vec p = vec2(0.3, -0.2);
  EXPECT_LE(((*q.inverse)(q.eval(p)) - p).norm(), 1e-15);
  const SystemSpec h = henon_system();
  EXPECT_LE(((*h.inverse)(h.eval(p)) - p).norm(), 1e-14);
  const auto inv = newton_invert(h, h.eval(p), h.fixed_point);
  ASSERT_TRUE(inv.has_value());
  EXPECT_LE((*inv - p).norm(), 1e-12);
}

TEST(Polynomial, Validation) {
  EXPECT_THROW(PolynomialMap(2, {{{1.0, {1, 0}}}}), Error);
  EXPECT_THROW(PolynomialMap(1, {{{1.0, {-1}}}}), Error);
  EXPECT_THROW(PolynomialMap(1, {{{1.0, {1, 1}}}}), Error);
  const PolynomialMap m(2, {{{2.0, {2, 1}}}, {{-1.0, {0, 3}}}});
  const Vec x = vec2(1.5, -2.0);
  EXPECT_DOUBLE_EQ(m(x)(0), 2.0 * 2.25 * -2.0);
  Mat J = m.jacobian(x);
  EXPECT_DOUBLE_EQ(J(0, 0), 2.0 * 2 * 1.5 * -2.0);
  EXPECT_DOUBLE_EQ(J(0, 1), 2.0 * 2.25);
  EXPECT_DOUBLE_EQ(J(1, 1), -3.0 * 4.0);
}

TEST(TimeMap, SaddleFlowReproducesDiagonal) {
  const SystemSpec f = saddle_flow_system(64);
  const Mat J = f.linearization();
  Mat ref = Mat::Zero(2, 2);
  ref(0, 0) = 0.5;
  ref(1, 1) = 2.0;
  EXPECT_LE(max_abs(J - ref), 1e-8);
  const Vec p = vec2(0.3, -0.1);
  EXPECT_LE((f.eval(p) - ref * p).norm(), 1e-8);
}

TEST(TimeMap, ZeroTimeIsIdentity) {
  const SystemSpec f = time_T_map(curved_field(0.0, 10));
  const Vec p = vec2(0.2, 0.4);
  EXPECT_EQ((f.eval(p) - p).norm(), 0.0);
  EXPECT_LE(max_abs(f.jacobian(p) - Mat::Identity(2, 2)), 0.0);
}

TEST(TimeMap, BackwardUndoesForward) {
  const SystemSpec f = time_T_map(curved_field(0.5, 32));
  for (double s : {0.01, 0.05, 0.1}) {
    const Vec p = vec2(s, -s);
    EXPECT_LE(((*f.inverse)(f.eval(p)) - p).norm(), 1e-9);
  }
  EXPECT_TRUE(check_system(f).ok());
}

TEST(TimeMap, FourthOrderConvergence) {
  const Vec p = vec2(0.4, 0.3);
  const double T = 1.0;
  const Vec ref = time_T_map(curved_field(T, 32)).eval(p);
  const double e1 = (time_T_map(curved_field(T, 8)).eval(p) - ref).norm();
  const double e2 = (time_T_map(curved_field(T, 16)).eval(p) - ref).norm();
  EXPECT_GE(e1 / e2, 12.0);
}

TEST(TimeMap, BadSteps) {
  EXPECT_THROW(time_T_map(curved_field(1.0, 0)), Error);
}

TEST(Config, ParsesPolynomialSystem) {
  const auto j = nlohmann::json::parse(R"({
    "dim": 2,
    "components": [[{"coeff": 0.5, "powers": [1, 0]}],
                   [{"coeff": 2.0, "powers": [0, 1]}, {"coeff": 1.0, "powers": [2, 0]}]],
    "inverse": [[{"coeff": 2.0, "powers": [1, 0]}],
                [{"coeff": 0.5, "powers": [0, 1]}, {"coeff": -2.0, "powers": [2, 0]}]],
    "guess": [0.01, 0.01]
  })");
  const SystemSpec s = make_polynomial_system(parse_polynomial_config(j));
  EXPECT_LE(s.fixed_point.norm(), 1e-13);
  EXPECT_LE((s.eval(vec2(0.2, 0.1)) - vec2(0.1, 0.24)).norm(), 1e-15);
  ASSERT_TRUE(s.inverse.has_value());
  EXPECT_TRUE(check_system(s).ok());
}

TEST(Config, RejectsMalformed) {
  const char* bad[] = {
      R"({"components": []})",
      R"({"dim": 0, "components": []})",
      R"({"dim": 1, "components": [[{"coeff": 1, "powers": [1, 2]}]]})",
      R"({"dim": 1, "components": [[{"coeff": 1, "powers": [-1]}]]})",
      R"({"dim": 1, "components": [[{"coeff": 1, "powers": [1.5]}]]})",
      R"({"dim": 1, "components": [[{"coeff": "x", "powers": [1]}]]})",
      R"({"dim": 2, "components": [[{"coeff": 1, "powers": [1, 0]}]]})",
      R"({"dim": 1, "components": [[{"coeff": 0.5, "powers": [1]}]], "fixed_point": [0, 0]})",
  };
  for (const char* text : bad) {
    try {
      make_polynomial_system(parse_polynomial_config(nlohmann::json::parse(text)));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadConfig) << text;
    }
  }
}

TEST(Config, VectorFieldFileBecomesTimeMap) {
  const std::string path = testing::TempDir() + "saddle_field.json";
  {
    std::ofstream f(path);
    f << R"({"dim": 2, "time": 0.6931471805599453, "steps": 64, "fixed_point": [0, 0],
            "components": [[{"coeff": -1, "powers": [1, 0]}], [{"coeff": 1, "powers": [0, 1]}]]})";
  }
  const SystemSpec s = load_system_file(path);
  EXPECT_NEAR(s.linearization()(0, 0), 0.5, 1e-8);
  EXPECT_NEAR(s.linearization()(1, 1), 2.0, 1e-8);
  std::remove(path.c_str());
  EXPECT_THROW(load_system_file(path), Error);
}
