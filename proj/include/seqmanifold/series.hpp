#pragma once

// Univariate truncated power series sum_{k=0}^{order} c_k x^k.

#include "seqmanifold/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <type_traits>
#include <vector>

namespace seqmanifold {

using Rational = boost::multiprecision::cpp_rational;

/// Converts a coefficient to a floating type; rationals go through
/// numerator / denominator so no precision is lost before the division.
template <class S, class Coeff>
S coeff_to(const Coeff& c) {
  if constexpr (std::is_same_v<Coeff, Rational>) {
    return S(boost::multiprecision::numerator(c)) / S(boost::multiprecision::denominator(c));
  } else {
    return S(c);
  }
}

template <class Coeff>
class TruncatedSeries {
 public:
  TruncatedSeries() : coeffs_(1, Coeff(0)) {}
  explicit TruncatedSeries(int order) : coeffs_(static_cast<std::size_t>(order + 1), Coeff(0)) {}
  explicit TruncatedSeries(std::vector<Coeff> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(Coeff(0));
  }

  static TruncatedSeries identity(int order) {
    TruncatedSeries s(order);
    if (order >= 1) s[1] = Coeff(1);
    return s;
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const Coeff& operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }
  Coeff& operator[](int k) { return coeffs_[static_cast<std::size_t>(k)]; }
  const std::vector<Coeff>& coeffs() const { return coeffs_; }

  TruncatedSeries truncated(int order) const {
    TruncatedSeries s(order);
    for (int k = 0; k <= std::min(order, this->order()); ++k) s[k] = (*this)[k];
    return s;
  }

  friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
    TruncatedSeries s(std::min(a.order(), b.order()));
    for (int k = 0; k <= s.order(); ++k) s[k] = a[k] + b[k];
    return s;
  }
  friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
    TruncatedSeries s(std::min(a.order(), b.order()));
    for (int k = 0; k <= s.order(); ++k) s[k] = a[k] - b[k];
    return s;
  }
  friend TruncatedSeries operator*(const Coeff& c, const TruncatedSeries& a) {
    TruncatedSeries s(a.order());
    for (int k = 0; k <= s.order(); ++k) s[k] = c * a[k];
    return s;
  }
  /// Cauchy product truncated at the smaller order.
  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    const int n = std::min(a.order(), b.order());
    TruncatedSeries s(n);
    for (int i = 0; i <= n; ++i) {
      if (a[i] == Coeff(0)) continue;
      for (int j = 0; i + j <= n; ++j) s[i + j] += a[i] * b[j];
    }
    return s;
  }

  /// 1 / a, requires a[0] != 0.
  TruncatedSeries reciprocal() const {
    if ((*this)[0] == Coeff(0)) throw Error(ErrorCode::BadProfile, "series reciprocal needs a nonzero constant term");
    TruncatedSeries s(order());
    s[0] = Coeff(1) / (*this)[0];
    for (int k = 1; k <= order(); ++k) {
      Coeff acc(0);
      for (int j = 1; j <= k; ++j) acc += (*this)[j] * s[k - j];
      s[k] = -acc / (*this)[0];
    }
    return s;
  }

  /// (*this)(inner(x)), requires inner[0] == 0 so every order stays exact.
  TruncatedSeries compose(const TruncatedSeries& inner) const {
    if (inner[0] != Coeff(0)) throw Error(ErrorCode::BadProfile, "composition needs an inner series without constant term");
    const int n = std::min(order(), inner.order());
    // Horner: c_n, then acc = acc * inner + c_k.
    TruncatedSeries acc(n);
    acc[0] = (*this)[n];
    const TruncatedSeries in = inner.truncated(n);
    for (int k = n - 1; k >= 0; --k) {
      acc = acc * in;
      acc[0] += (*this)[k];
    }
    return acc;
  }

  template <class S>
  S evaluate(const S& x) const {
    S acc(0);
    for (int k = order(); k >= 0; --k) acc = acc * x + coeff_to<S>((*this)[k]);
    return acc;
  }

 private:
  std::vector<Coeff> coeffs_;
};

namespace detail {

inline Rational factorial(int n) {
  boost::multiprecision::cpp_int f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return Rational(f);
}

}  // namespace detail

/// sin x = sum (-1)^k x^{2k+1} / (2k+1)!
inline TruncatedSeries<Rational> sin_series(int order) {
  TruncatedSeries<Rational> s(order);
  for (int k = 1; k <= order; k += 2) s[k] = Rational((k / 2) % 2 == 0 ? 1 : -1) / detail::factorial(k);
  return s;
}

inline TruncatedSeries<Rational> sinh_series(int order) {
  TruncatedSeries<Rational> s(order);
  for (int k = 1; k <= order; k += 2) s[k] = Rational(1) / detail::factorial(k);
  return s;
}

inline TruncatedSeries<Rational> cosh_series(int order) {
  TruncatedSeries<Rational> s(order);
  for (int k = 0; k <= order; k += 2) s[k] = Rational(1) / detail::factorial(k);
  return s;
}

/// tanh = sinh / cosh, computed exactly by series division.
inline TruncatedSeries<Rational> tanh_series(int order) {
  return sinh_series(order) * cosh_series(order).reciprocal();
}

}  // namespace seqmanifold
