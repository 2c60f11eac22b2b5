#pragma once

#include <compare>
#include <limits>
#include <stdexcept>
#include <string>

namespace rfgan {

/// Extended real number: a finite double or one of +inf / -inf.
///
/// Arithmetic that would produce NaN in IEEE terms (inf - inf, 0 * inf with
/// an infinite factor coming from a divergent term) throws instead, except
/// the measure-theoretic convention 0 * (+-inf) = 0 used for zero-mass
/// outcomes.
class ExtReal {
 public:
  enum class Kind { Finite, PosInf, NegInf };

  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtReal pos_inf() { return ExtReal(Kind::PosInf); }
  static constexpr ExtReal neg_inf() { return ExtReal(Kind::NegInf); }

  /// Maps IEEE infinities onto the tagged representation; rejects NaN.
  static ExtReal from_double(double v) {
    if (v != v) throw std::domain_error("ExtReal: NaN is not an extended real");
    if (v == std::numeric_limits<double>::infinity()) return pos_inf();
    if (v == -std::numeric_limits<double>::infinity()) return neg_inf();
    return ExtReal(v);
  }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::Finite; }
  constexpr bool is_pos_inf() const { return kind_ == Kind::PosInf; }
  constexpr bool is_neg_inf() const { return kind_ == Kind::NegInf; }

  /// Finite value; throws on infinities.
  double value() const {
    if (!is_finite()) throw std::domain_error("ExtReal: value() of an infinite quantity");
    return value_;
  }

  /// IEEE view, for output and comparisons with tolerances only.
  constexpr double to_double() const {
    switch (kind_) {
      case Kind::PosInf: return std::numeric_limits<double>::infinity();
      case Kind::NegInf: return -std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  std::string str() const;

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.is_finite() && b.is_finite()) return ExtReal(a.value_ + b.value_);
    if ((a.is_pos_inf() && b.is_neg_inf()) || (a.is_neg_inf() && b.is_pos_inf()))
      throw std::domain_error("ExtReal: inf - inf is undefined");
    return a.is_finite() ? b : a;
  }
  friend ExtReal operator-(ExtReal a) {
    switch (a.kind_) {
      case Kind::PosInf: return neg_inf();
      case Kind::NegInf: return pos_inf();
      default: return ExtReal(-a.value_);
    }
  }
  friend ExtReal operator-(ExtReal a, ExtReal b) { return a + (-b); }

  /// Scaling by a finite real; 0 * (+-inf) = 0.
  friend ExtReal operator*(double s, ExtReal a) {
    if (a.is_finite()) return ExtReal(s * a.value_);
    if (s == 0.0) return ExtReal(0.0);
    return (s > 0.0) == a.is_pos_inf() ? pos_inf() : neg_inf();
  }
  friend ExtReal operator*(ExtReal a, double s) { return s * a; }

  ExtReal& operator+=(ExtReal o) { return *this = *this + o; }

  friend constexpr std::partial_ordering operator<=>(ExtReal a, ExtReal b) {
    return a.to_double() <=> b.to_double();
  }
  friend constexpr bool operator==(ExtReal a, ExtReal b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::Finite || a.value_ == b.value_);
  }

 private:
  constexpr explicit ExtReal(Kind k) : kind_(k) {}

  Kind kind_ = Kind::Finite;
  double value_ = 0.0;
};

inline ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }
inline ExtReal min(ExtReal a, ExtReal b) { return b < a ? b : a; }

}  // namespace rfgan
