#ifndef PERSIM_POLY_HPP_
#define PERSIM_POLY_HPP_

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace persim {

// Dense univariate polynomial, coefficients stored lowest degree first.
// Degrees stay tiny here (products of a few affine sensing factors), so a
// plain vector is the right representation.
class Poly {
 public:
  Poly() : c_{0.0} {}
  explicit Poly(std::vector<double> c) : c_(std::move(c)) {
    if (c_.empty()) c_.push_back(0.0);
  }
  static Poly constant(double a) { return Poly({a}); }
  static Poly affine(double a0, double a1) { return Poly({a0, a1}); }

  std::size_t degree() const { return c_.size() - 1; }
  double coeff(std::size_t k) const { return k < c_.size() ? c_[k] : 0.0; }

  double operator()(double x) const {
    double v = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) v = v * x + c_[k];
    return v;
  }

  // Antiderivative with zero constant term.
  Poly integral() const {
    std::vector<double> r(c_.size() + 1, 0.0);
    for (std::size_t k = 0; k < c_.size(); ++k) r[k + 1] = c_[k] / double(k + 1);
    return Poly(std::move(r));
  }

  // Derivative.
  Poly derivative() const {
    if (c_.size() == 1) return Poly();
    std::vector<double> r(c_.size() - 1, 0.0);
    for (std::size_t k = 1; k < c_.size(); ++k) r[k - 1] = c_[k] * double(k);
    return Poly(std::move(r));
  }

  Poly& operator+=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Poly& operator*=(double a) {
    for (double& v : c_) v *= a;
    return *this;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(r));
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, double s) { return a *= s; }

 private:
  std::vector<double> c_;
};

}  // namespace persim

#endif  // PERSIM_POLY_HPP_
