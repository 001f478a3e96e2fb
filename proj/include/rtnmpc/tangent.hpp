/*
 Copyright 2026 The rtnmpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

// Forward-mode automatic differentiation with a fixed number of directional
// derivatives carried alongside each value.
//
// Model functions are written once against a generic scalar type and
// evaluated either on double or on Tangent<K>. Jacobians wider than K are
// assembled chunk by chunk (see ocp.cpp).

#include <array>
#include <cmath>
#include <ostream>

namespace rtnmpc {

template <int K> class Tangent {
  static_assert(K > 0, "Tangent needs at least one direction");

public:
  static constexpr int kDirections = K;

  constexpr Tangent() : value_(0.0), partials_{} {}
  constexpr Tangent(double v) : value_(v), partials_{} {} // NOLINT: implicit constant promotion

  /// Seeds direction `dir` with unit derivative.
  static Tangent variable(double v, int dir) {
    Tangent t(v);
    t.partials_[static_cast<std::size_t>(dir)] = 1.0;
    return t;
  }

  double value() const { return value_; }
  double partial(int dir) const { return partials_[static_cast<std::size_t>(dir)]; }
  double &partial(int dir) { return partials_[static_cast<std::size_t>(dir)]; }
  const std::array<double, K> &partials() const { return partials_; }

  Tangent &operator+=(const Tangent &o) {
    value_ += o.value_;
    for (int i = 0; i < K; ++i) partials_[i] += o.partials_[i];
    return *this;
  }
  Tangent &operator-=(const Tangent &o) {
    value_ -= o.value_;
    for (int i = 0; i < K; ++i) partials_[i] -= o.partials_[i];
    return *this;
  }
  Tangent &operator*=(const Tangent &o) {
    for (int i = 0; i < K; ++i) partials_[i] = partials_[i] * o.value_ + value_ * o.partials_[i];
    value_ *= o.value_;
    return *this;
  }
  Tangent &operator/=(const Tangent &o) {
    const double q = value_ / o.value_;
    for (int i = 0; i < K; ++i) partials_[i] = (partials_[i] - q * o.partials_[i]) / o.value_;
    value_ = q;
    return *this;
  }

  Tangent operator-() const {
    Tangent r(*this);
    r.value_ = -value_;
    for (auto &p : r.partials_) p = -p;
    return r;
  }
  Tangent operator+() const { return *this; }

  /// f(value) with derivative df applied to every direction.
  Tangent chain(double fv, double df) const {
    Tangent r(fv);
    for (int i = 0; i < K; ++i) r.partials_[i] = df * partials_[i];
    return r;
  }

private:
  double value_;
  std::array<double, K> partials_;
};

template <int K> Tangent<K> operator+(Tangent<K> a, const Tangent<K> &b) { return a += b; }
template <int K> Tangent<K> operator-(Tangent<K> a, const Tangent<K> &b) { return a -= b; }
template <int K> Tangent<K> operator*(Tangent<K> a, const Tangent<K> &b) { return a *= b; }
template <int K> Tangent<K> operator/(Tangent<K> a, const Tangent<K> &b) { return a /= b; }
template <int K> Tangent<K> operator+(Tangent<K> a, double b) { return a += Tangent<K>(b); }
template <int K> Tangent<K> operator+(double a, Tangent<K> b) { return b += Tangent<K>(a); }
template <int K> Tangent<K> operator-(Tangent<K> a, double b) { return a -= Tangent<K>(b); }
template <int K> Tangent<K> operator-(double a, const Tangent<K> &b) { return Tangent<K>(a) -= b; }
template <int K> Tangent<K> operator*(Tangent<K> a, double b) { return a *= Tangent<K>(b); }
template <int K> Tangent<K> operator*(double a, Tangent<K> b) { return b *= Tangent<K>(a); }
template <int K> Tangent<K> operator/(Tangent<K> a, double b) { return a /= Tangent<K>(b); }
template <int K> Tangent<K> operator/(double a, const Tangent<K> &b) { return Tangent<K>(a) /= b; }

template <int K> bool operator<(const Tangent<K> &a, const Tangent<K> &b) { return a.value() < b.value(); }
template <int K> bool operator>(const Tangent<K> &a, const Tangent<K> &b) { return a.value() > b.value(); }
template <int K> bool operator<=(const Tangent<K> &a, const Tangent<K> &b) { return a.value() <= b.value(); }
template <int K> bool operator>=(const Tangent<K> &a, const Tangent<K> &b) { return a.value() >= b.value(); }
template <int K> bool operator==(const Tangent<K> &a, const Tangent<K> &b) { return a.value() == b.value(); }

template <int K> Tangent<K> sin(const Tangent<K> &a) { return a.chain(std::sin(a.value()), std::cos(a.value())); }
template <int K> Tangent<K> cos(const Tangent<K> &a) { return a.chain(std::cos(a.value()), -std::sin(a.value())); }
template <int K> Tangent<K> tan(const Tangent<K> &a) {
  const double t = std::tan(a.value());
  return a.chain(t, 1.0 + t * t);
}
template <int K> Tangent<K> exp(const Tangent<K> &a) {
  const double e = std::exp(a.value());
  return a.chain(e, e);
}
template <int K> Tangent<K> log(const Tangent<K> &a) { return a.chain(std::log(a.value()), 1.0 / a.value()); }
template <int K> Tangent<K> sqrt(const Tangent<K> &a) {
  const double s = std::sqrt(a.value());
  return a.chain(s, 0.5 / s);
}
template <int K> Tangent<K> tanh(const Tangent<K> &a) {
  const double t = std::tanh(a.value());
  return a.chain(t, 1.0 - t * t);
}
template <int K> Tangent<K> atan(const Tangent<K> &a) {
  return a.chain(std::atan(a.value()), 1.0 / (1.0 + a.value() * a.value()));
}
template <int K> Tangent<K> abs(const Tangent<K> &a) {
  return a.chain(std::abs(a.value()), a.value() < 0.0 ? -1.0 : 1.0);
}
template <int K> Tangent<K> pow(const Tangent<K> &a, double p) {
  return a.chain(std::pow(a.value(), p), p * std::pow(a.value(), p - 1.0));
}
template <int K> Tangent<K> atan2(const Tangent<K> &y, const Tangent<K> &x) {
  const double r2 = x.value() * x.value() + y.value() * y.value();
  Tangent<K> r(std::atan2(y.value(), x.value()));
  for (int i = 0; i < K; ++i) r.partial(i) = (x.value() * y.partial(i) - y.value() * x.partial(i)) / r2;
  return r;
}

template <int K> std::ostream &operator<<(std::ostream &os, const Tangent<K> &a) {
  os << a.value() << " [";
  for (int i = 0; i < K; ++i) os << (i ? ", " : "") << a.partial(i);
  return os << "]";
}

/// Value part of a double or a tangent, for branching inside generic models.
inline double value_of(double v) { return v; }
template <int K> double value_of(const Tangent<K> &v) { return v.value(); }

} // namespace rtnmpc
