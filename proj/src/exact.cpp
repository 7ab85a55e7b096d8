#include "qkm/exact.hpp"

#include <charconv>
#include <stdexcept>

#include "qkm/errors.hpp"

namespace qkm {

namespace {

BigInt parse_integer(std::string_view text) {
  if (text.empty()) throw ParseError("empty integer token");
  std::size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (start == text.size()) throw ParseError("malformed integer '" + std::string(text) + "'");
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') {
      throw ParseError("malformed integer '" + std::string(text) + "'");
    }
  }
  const std::size_t first = text.find_first_not_of('0', start);
  BigInt v = first == std::string_view::npos ? BigInt(0) : BigInt(std::string(text.substr(first)));
  return text[0] == '-' ? BigInt(-v) : v;
}

}  // namespace

Fraction::Fraction(BigInt num) : num_(std::move(num)), den_(1) {}

Fraction::Fraction(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_ == 0) throw std::invalid_argument("fraction with zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
}

std::string Fraction::str() const {
  Fraction r = reduce(*this);
  return r.num_.str() + "/" + r.den_.str();
}

Fraction Fraction::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Fraction(parse_integer(text));
  BigInt den = parse_integer(text.substr(slash + 1));
  if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  return Fraction(parse_integer(text.substr(0, slash)), std::move(den));
}

double Fraction::to_double() const {
  Fraction r = reduce(*this);
  return r.num_.convert_to<double>() / r.den_.convert_to<double>();
}

Fraction operator+(const Fraction& a, const Fraction& b) {
  if (a.den_ == b.den_) return reduce(Fraction(a.num_ + b.num_, a.den_));
  return reduce(Fraction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_));
}

Fraction operator-(const Fraction& a, const Fraction& b) {
  if (a.den_ == b.den_) return reduce(Fraction(a.num_ - b.num_, a.den_));
  return reduce(Fraction(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_));
}

Fraction operator*(const Fraction& a, const Fraction& b) {
  return reduce(Fraction(a.num_ * b.num_, a.den_ * b.den_));
}

Fraction& Fraction::operator+=(const Fraction& other) {
  *this = *this + other;
  return *this;
}

bool operator==(const Fraction& a, const Fraction& b) { return frac_equal(a, b); }

std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
  const int c = a.den_ == b.den_ ? a.num_.compare(b.num_) : BigInt(a.num_ * b.den_).compare(b.num_ * a.den_);
  return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

bool frac_equal(const Fraction& a, const Fraction& b) {
  if (a.den() == b.den()) return a.num() == b.num();
  return a.num() * b.den() == b.num() * a.den();
}

bool frac_less(const Fraction& a, const Fraction& b) {
  if (a.den() == b.den()) return a.num() < b.num();
  return a.num() * b.den() < b.num() * a.den();
}

Fraction reduce(const Fraction& f) {
  if (f.num() == 0) return Fraction(BigInt(0), BigInt(1));
  BigInt g = boost::multiprecision::gcd(f.num(), f.den());
  if (g == 1) return f;
  return Fraction(f.num() / g, f.den() / g);
}

FractionVector::FractionVector(IntVector numerators, BigInt denominator)
    : nums_(std::move(numerators)), den_(std::move(denominator)) {
  if (den_ == 0) throw std::invalid_argument("fraction vector with zero denominator");
  if (den_ < 0) {
    den_ = -den_;
    for (auto& v : nums_) v = -v;
  }
}

FractionVector FractionVector::from_integers(IntVector values) {
  return FractionVector(std::move(values), BigInt(1));
}

FractionVector FractionVector::from_components(std::span<const Fraction> components) {
  std::vector<Fraction> reduced;
  reduced.reserve(components.size());
  BigInt den = 1;
  for (const auto& c : components) {
    reduced.push_back(reduce(c));
    den = boost::multiprecision::lcm(den, reduced.back().den());
  }
  IntVector nums;
  nums.reserve(reduced.size());
  for (const auto& r : reduced) nums.push_back(r.num() * (den / r.den()));
  return FractionVector(std::move(nums), std::move(den));
}

std::vector<Fraction> FractionVector::components() const {
  std::vector<Fraction> out;
  out.reserve(nums_.size());
  for (const auto& v : nums_) out.emplace_back(v, den_);
  return out;
}

FractionVector FractionVector::reduced() const {
  BigInt g = den_;
  for (const auto& v : nums_) {
    if (g == 1) break;
    g = boost::multiprecision::gcd(g, v);
  }
  if (g == 1) return *this;
  IntVector nums;
  nums.reserve(nums_.size());
  for (const auto& v : nums_) nums.push_back(v / g);
  return FractionVector(std::move(nums), den_ / g);
}

std::string FractionVector::str(char sep) const {
  std::string out;
  for (std::size_t i = 0; i < nums_.size(); ++i) {
    if (i) out += sep;
    out += (*this)[i].str();
  }
  return out;
}

std::vector<double> FractionVector::to_doubles() const {
  std::vector<double> out;
  out.reserve(nums_.size());
  for (std::size_t i = 0; i < nums_.size(); ++i) out.push_back((*this)[i].to_double());
  return out;
}

bool operator==(const FractionVector& a, const FractionVector& b) {
  if (a.dim() != b.dim()) return false;
  if (a.den_ == b.den_) return a.nums_ == b.nums_;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (a.nums_[i] * b.den_ != b.nums_[i] * a.den_) return false;
  }
  return true;
}

Fraction sq_dist_exact(std::span<const BigInt> x, const FractionVector& c) {
  if (x.size() != c.dim()) {
    throw std::invalid_argument("sq_dist_exact: dimension mismatch (" + std::to_string(x.size()) +
                                " vs " + std::to_string(c.dim()) + ")");
  }
  const BigInt& den = c.denominator();
  BigInt sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    BigInt diff = x[i] * den - c.numerators()[i];
    sum += diff * diff;
  }
  return Fraction(std::move(sum), den * den);
}

std::size_t bit_width(const BigInt& v) {
  if (v == 0) return 1;
  return boost::multiprecision::msb(boost::multiprecision::abs(v)) + 2;
}

}  // namespace qkm
