#pragma once

// Exact rational arithmetic for quantized fractions. Every protocol decision
// (trigger conditions, extrema, assignment, stopping) goes through these
// types; floating point only ever appears in plot output.

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace qkm {

using BigInt = boost::multiprecision::cpp_int;
using IntVector = std::vector<BigInt>;

/// A rational number num/den with den > 0. Not kept reduced; equality and
/// ordering are by value.
class Fraction {
 public:
  Fraction() : num_(0), den_(1) {}
  Fraction(BigInt num);  // NOLINT(google-explicit-constructor)
  /// Throws std::invalid_argument when den == 0. A negative denominator is
  /// folded into the numerator.
  Fraction(BigInt num, BigInt den);
  Fraction(long long num, long long den = 1) : Fraction(BigInt(num), BigInt(den)) {}

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }

  /// Canonical reduced form, e.g. "7/2", "-2/1", "0/1".
  std::string str() const;
  /// Accepts "num/den" or a plain integer.
  static Fraction parse(std::string_view text);

  double to_double() const;

  friend Fraction operator+(const Fraction& a, const Fraction& b);
  friend Fraction operator-(const Fraction& a, const Fraction& b);
  friend Fraction operator*(const Fraction& a, const Fraction& b);
  Fraction& operator+=(const Fraction& other);

  friend bool operator==(const Fraction& a, const Fraction& b);
  friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b);

 private:
  BigInt num_;
  BigInt den_;
};

bool frac_equal(const Fraction& a, const Fraction& b);
bool frac_less(const Fraction& a, const Fraction& b);
/// Divides out gcd(num, den); 0/x becomes 0/1.
Fraction reduce(const Fraction& f);

/// A d-dimensional rational vector sharing one positive denominator.
class FractionVector {
 public:
  FractionVector() : den_(1) {}
  FractionVector(IntVector numerators, BigInt denominator);

  static FractionVector from_integers(IntVector values);
  /// Brings per-dimension fractions over their least common denominator.
  static FractionVector from_components(std::span<const Fraction> components);

  std::size_t dim() const { return nums_.size(); }
  const IntVector& numerators() const { return nums_; }
  const BigInt& denominator() const { return den_; }
  Fraction operator[](std::size_t i) const { return Fraction(nums_[i], den_); }
  std::vector<Fraction> components() const;

  /// Divides numerators and denominator by their common gcd.
  FractionVector reduced() const;

  /// Reduced per-component text joined by sep, e.g. "3/1 4/1".
  std::string str(char sep = ' ') const;
  std::vector<double> to_doubles() const;

  friend bool operator==(const FractionVector& a, const FractionVector& b);

 private:
  IntVector nums_;
  BigInt den_;
};

/// sum_i (x_i - c_i)^2 over the common denominator den(c)^2.
/// Throws std::invalid_argument on dimension mismatch.
Fraction sq_dist_exact(std::span<const BigInt> x, const FractionVector& c);

/// Bits needed for |v| plus a sign bit; used for payload accounting.
std::size_t bit_width(const BigInt& v);

}  // namespace qkm
