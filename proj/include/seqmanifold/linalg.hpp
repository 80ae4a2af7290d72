#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace seqmanifold {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

using VectorMap = std::function<Vec(const Vec&)>;
using JacobianMap = std::function<Mat(const Vec&)>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Spectral (operator 2-) norm.
inline double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

inline double max_abs(const Mat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double sup_norm(const Vec& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Parses "a,b;c,d" into a matrix (rows split by ';', entries by ',').
/// Returns an empty matrix on malformed input.
inline Mat parse_matrix_literal(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  std::string token;
  auto flush_token = [&]() -> bool {
    std::size_t first = token.find_first_not_of(" \t");
    if (first == std::string::npos) return false;
    try {
      std::size_t used = 0;
      double v = std::stod(token.substr(first), &used);
      if (token.find_first_not_of(" \t", first + used) != std::string::npos) return false;
      row.push_back(v);
    } catch (...) {
      return false;
    }
    token.clear();
    return true;
  };
  for (char c : text) {
    if (c == ',' || c == ';') {
      if (!flush_token()) return {};
      if (c == ';') {
        rows.push_back(row);
        row.clear();
      }
    } else {
      token.push_back(c);
    }
  }
  if (!flush_token()) return {};
  rows.push_back(row);
  const auto cols = rows.front().size();
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) return {};
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace seqmanifold
