#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fastmc/error.hpp"

namespace fastmc {

/// c * x_0^e_0 * ... * x_{d-1}^e_{d-1}
struct Monomial {
  std::vector<int> exponents;
  double coefficient = 0.0;
};

/// c * |x_variable - center|
struct AbsTerm {
  std::size_t variable = 0;
  double center = 0.0;
  double coefficient = 0.0;
};

/// One output entry of a PolynomialMap.
///
/// The entry evaluates an inner expression p(x) = sum(monomials) + sum(abs_terms).
/// With `square_root` set it evaluates sqrt(max(p(x), 0)) instead, which is how
/// diffusions given by their square (sigma^2 polynomials) are stored.
struct MapEntry {
  std::vector<Monomial> monomials;
  std::vector<AbsTerm> abs_terms;
  bool square_root = false;
};

namespace detail {

inline double int_pow(double x, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// Vector/matrix valued map whose entries are (root-)polynomial expressions
/// of `input_dim` real inputs. Outputs are laid out row-major.
class PolynomialMap {
 public:
  PolynomialMap() = default;

  PolynomialMap(std::size_t input_dim, std::size_t rows, std::size_t cols,
                std::vector<MapEntry> entries)
      : input_dim_(input_dim), rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (input_dim_ == 0) throw InputError("polynomial map: input dimension must be positive");
    if (rows_ == 0 || cols_ == 0) throw InputError("polynomial map: output dimensions must be positive");
    if (entries_.size() != rows_ * cols_) {
      throw InputError("polynomial map: expected " + std::to_string(rows_ * cols_) +
                       " entries, got " + std::to_string(entries_.size()));
    }
    for (const auto& entry : entries_) {
      for (const auto& mono : entry.monomials) {
        if (mono.exponents.size() != input_dim_) {
          throw InputError("polynomial map: exponent tuple length " +
                           std::to_string(mono.exponents.size()) + " != input dimension " +
                           std::to_string(input_dim_));
        }
        for (int e : mono.exponents) {
          if (e < 0) throw InputError("polynomial map: negative exponent");
        }
        if (!std::isfinite(mono.coefficient)) throw InputError("polynomial map: non-finite coefficient");
      }
      for (const auto& term : entry.abs_terms) {
        if (term.variable >= input_dim_) throw InputError("polynomial map: abs term variable out of range");
        if (!std::isfinite(term.coefficient) || !std::isfinite(term.center)) {
          throw InputError("polynomial map: non-finite abs term");
        }
      }
    }
  }

  /// All-zero map.
  static PolynomialMap zero(std::size_t input_dim, std::size_t rows, std::size_t cols) {
    return PolynomialMap(input_dim, rows, cols, std::vector<MapEntry>(rows * cols));
  }

  std::size_t input_dim() const { return input_dim_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const MapEntry& entry(std::size_t row, std::size_t col) const { return entries_[row * cols_ + col]; }
  const std::vector<MapEntry>& entries() const { return entries_; }

  void evaluate(std::span<const double> x, std::span<double> out) const {
    check_input(x);
    if (out.size() != entries_.size()) throw InputError("polynomial map: output span has wrong size");
    for (std::size_t k = 0; k < entries_.size(); ++k) out[k] = entry_value(entries_[k], x);
  }

  std::vector<double> operator()(std::span<const double> x) const {
    std::vector<double> out(entries_.size());
    evaluate(x, out);
    return out;
  }

  /// d(entry(row, col)) / d x_j. Root entries report 0 where the inner
  /// expression is not positive.
  double partial(std::size_t row, std::size_t col, std::span<const double> x, std::size_t j) const {
    check_input(x);
    const MapEntry& entry = entries_[row * cols_ + col];
    const double d_inner = inner_partial(entry, x, j);
    if (!entry.square_root) return d_inner;
    const double inner = inner_value(entry, x);
    if (inner <= 0.0) return 0.0;
    return d_inner / (2.0 * std::sqrt(inner));
  }

  static double inner_value(const MapEntry& entry, std::span<const double> x) {
    double sum = 0.0;
    for (const auto& mono : entry.monomials) {
      double term = mono.coefficient;
      for (std::size_t i = 0; i < mono.exponents.size(); ++i) {
        if (mono.exponents[i] != 0) term *= detail::int_pow(x[i], mono.exponents[i]);
      }
      sum += term;
    }
    for (const auto& t : entry.abs_terms) sum += t.coefficient * std::abs(x[t.variable] - t.center);
    return sum;
  }

  static double entry_value(const MapEntry& entry, std::span<const double> x) {
    const double inner = inner_value(entry, x);
    if (!entry.square_root) return inner;
    return inner > 0.0 ? std::sqrt(inner) : 0.0;
  }

 private:
  void check_input(std::span<const double> x) const {
    if (x.size() != input_dim_) {
      throw InputError("polynomial map: input has dimension " + std::to_string(x.size()) +
                       ", expected " + std::to_string(input_dim_));
    }
  }

  static double inner_partial(const MapEntry& entry, std::span<const double> x, std::size_t j) {
    double sum = 0.0;
    for (const auto& mono : entry.monomials) {
      const int ej = mono.exponents[j];
      if (ej == 0) continue;
      double term = mono.coefficient * ej;
      for (std::size_t i = 0; i < mono.exponents.size(); ++i) {
        const int e = (i == j) ? ej - 1 : mono.exponents[i];
        if (e != 0) term *= detail::int_pow(x[i], e);
      }
      sum += term;
    }
    for (const auto& t : entry.abs_terms) {
      if (t.variable != j) continue;
      const double d = x[j] - t.center;
      sum += t.coefficient * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
    }
    return sum;
  }

  std::size_t input_dim_ = 1;
  std::size_t rows_ = 1;
  std::size_t cols_ = 1;
  std::vector<MapEntry> entries_ = std::vector<MapEntry>(1);
};

/// Univariate polynomial entry sum_k coefficients[k] * x^k.
inline MapEntry univariate_entry(std::initializer_list<double> coefficients, bool square_root = false) {
  MapEntry entry;
  int power = 0;
  for (double c : coefficients) {
    if (c != 0.0) entry.monomials.push_back({{power}, c});
    ++power;
  }
  entry.square_root = square_root;
  return entry;
}

}  // namespace fastmc
