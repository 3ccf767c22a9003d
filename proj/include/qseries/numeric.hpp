// Configurable-precision scalar substrate for the q-series engine.
//
// Every quantity in the library is an HPComplex whose components are MPFR
// reals. The working precision is taken from a PrecisionContext and installed
// with a PrecisionScope for the duration of an evaluation.

#ifndef QSERIES_NUMERIC_HPP
#define QSERIES_NUMERIC_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace qseries {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;
using BigInt = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Errors

/// Base class of every error the library raises.
class QSeriesError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the region where an evaluator or identity is defined.
class DomainError : public QSeriesError {
public:
  using QSeriesError::QSeriesError;
};

/// A denominator factor fell within pole_guard of zero.
class PoleError : public DomainError {
public:
  PoleError(const std::string& what, std::int64_t index)
      : DomainError(what), index_(index) {}
  std::int64_t index() const noexcept { return index_; }

private:
  std::int64_t index_;
};

/// Invalid context or argument combination supplied by the caller.
class ArgumentError : public QSeriesError {
public:
  using QSeriesError::QSeriesError;
};

// ---------------------------------------------------------------------------
// PrecisionContext

class PrecisionContext {
public:
  static constexpr int kDefaultPrecisionBits = 200;
  static constexpr int kDefaultToleranceDigits = 30;
  static constexpr long kDefaultMaxTerms = 10000;
  static constexpr long kDefaultMaxWindow = 200;

  /// Default context: 200 bits, 30 digits, 10000 terms, window 200.
  PrecisionContext();

  int precision_bits() const noexcept { return precision_bits_; }
  int tolerance_digits() const noexcept { return tolerance_digits_; }
  long max_terms() const noexcept { return max_terms_; }
  long max_window() const noexcept { return max_window_; }
  /// Decimal exponent of the pole guard: factors below 10^-pole_guard_digits are poles.
  int pole_guard_digits() const noexcept { return pole_guard_digits_; }

  /// MPFR decimal digits that cover precision_bits.
  unsigned digits10() const noexcept;

  /// 10^-tolerance_digits at the current precision.
  Real tolerance() const;
  /// 10^-(tolerance_digits + extra).
  Real tolerance(int extra_digits) const;
  Real pole_guard() const;
  /// Unit roundoff 2^-precision_bits.
  Real epsilon() const;

  /// Same limits, more bits. Used for the confirmation pass.
  PrecisionContext with_precision(int precision_bits) const;

  friend bool operator==(const PrecisionContext&, const PrecisionContext&) = default;

private:
  friend PrecisionContext make_context(int, int, long, long);
  PrecisionContext(int bits, int tol, long terms, long window);

  int precision_bits_;
  int tolerance_digits_;
  long max_terms_;
  long max_window_;
  int pole_guard_digits_;
};

/// Validates and builds a context. Throws ArgumentError when precision_bits < 64,
/// tolerance_digits*log2(10) > precision_bits - 32, max_terms < 16 or max_window < 8.
PrecisionContext make_context(int precision_bits, int tolerance_digits, long max_terms,
                              long max_window);

/// Installs the context's precision as the MPFR default for new values and
/// restores the previous default on destruction. The default is process-wide:
/// evaluations running at the same time must share a precision.
class PrecisionScope {
public:
  explicit PrecisionScope(const PrecisionContext& ctx);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
  unsigned saved_;
};

// ---------------------------------------------------------------------------
// HPComplex

class HPComplex {
public:
  HPComplex() : re_(0), im_(0) {}
  HPComplex(Real re) : re_(std::move(re)), im_(0) {}  // NOLINT(implicit)
  HPComplex(Real re, Real im) : re_(std::move(re)), im_(std::move(im)) {}
  HPComplex(double re) : re_(re), im_(0) {}  // NOLINT(implicit)
  HPComplex(double re, double im) : re_(re), im_(im) {}
  HPComplex(int re) : re_(re), im_(0) {}  // NOLINT(implicit)

  const Real& re() const noexcept { return re_; }
  const Real& im() const noexcept { return im_; }

  bool is_zero() const { return re_ == 0 && im_ == 0; }
  bool is_real() const { return im_ == 0; }

  HPComplex& operator+=(const HPComplex& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  HPComplex& operator-=(const HPComplex& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  HPComplex& operator*=(const HPComplex& o);
  HPComplex& operator/=(const HPComplex& o);
  HPComplex& operator*=(const Real& s) {
    re_ *= s;
    im_ *= s;
    return *this;
  }

  friend HPComplex operator+(HPComplex l, const HPComplex& r) { return l += r; }
  friend HPComplex operator-(HPComplex l, const HPComplex& r) { return l -= r; }
  friend HPComplex operator*(HPComplex l, const HPComplex& r) { return l *= r; }
  friend HPComplex operator/(HPComplex l, const HPComplex& r) { return l /= r; }
  friend HPComplex operator*(HPComplex l, const Real& s) { return l *= s; }
  friend HPComplex operator*(const Real& s, HPComplex r) { return r *= s; }
  friend HPComplex operator-(const HPComplex& v) { return {-v.re_, -v.im_}; }
  friend bool operator==(const HPComplex& l, const HPComplex& r) {
    return l.re_ == r.re_ && l.im_ == r.im_;
  }

private:
  Real re_;
  Real im_;
};

Real abs(const HPComplex& z);
Real norm(const HPComplex& z);
HPComplex conj(const HPComplex& z);
/// Principal logarithm and exponential.
HPComplex log(const HPComplex& z);
HPComplex exp(const HPComplex& z);
/// Integer power by repeated squaring; negative exponents invert. Throws PoleError for 0^-n.
HPComplex pow(const HPComplex& z, const BigInt& e);
HPComplex pow(const HPComplex& z, std::int64_t e);

/// pi at the current default precision (cached per precision).
Real pi();

/// Parses "re", "re+imi", "re-imi" or "imi" exactly at the current precision.
/// Throws ArgumentError on malformed input.
HPComplex parse_complex(std::string_view text);

/// Scientific decimal string with `digits` significant digits (0: the value's own precision).
std::string to_decimal(const Real& v, int digits = 0);
std::ostream& operator<<(std::ostream& os, const HPComplex& z);

// ---------------------------------------------------------------------------
// Exponent weights

/// Nonnegative rational with small denominator, the weight alpha in q^(alpha n^2).
class Rational {
public:
  static constexpr std::int64_t kMaxDenominator = 12;

  Rational(std::int64_t num = 0, std::int64_t den = 1);  // NOLINT(implicit)

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  bool is_integer() const noexcept { return den_ == 1; }
  bool is_zero() const noexcept { return num_ == 0; }
  Real to_real() const;
  std::string str() const;

  /// Parses "p" or "p/q".
  static Rational parse(std::string_view text);

  friend Rational operator*(const Rational& l, std::int64_t r) {
    return Rational(l.num_ * r, l.den_);
  }
  friend bool operator==(const Rational&, const Rational&) = default;

private:
  std::int64_t num_;
  std::int64_t den_;
};

/// q^alpha: exact integer power when alpha is integral, otherwise the principal
/// power, which requires q real in (0, 1) (DomainError otherwise).
HPComplex rational_power(const HPComplex& q, const Rational& alpha);

/// q^(alpha n^2) directly: unbounded-integer exponent when alpha*n^2 is integral,
/// exp(alpha n^2 log q) otherwise.
HPComplex quadratic_weight(const HPComplex& q, const Rational& alpha, std::int64_t n);

/// q^(k(k-1)/2) by repeated squaring on an unbounded-integer exponent. k >= 0.
HPComplex q_triangular_power(const HPComplex& q, std::int64_t k);

// ---------------------------------------------------------------------------
// Roots of unity

struct RootOfUnity {
  std::int64_t order;     ///< r >= 1
  std::int64_t exponent;  ///< reduced into [0, r)
  HPComplex value;        ///< exp(2 pi i exponent / r)
};

/// exp(2 pi i (i mod r) / r). Quarter turns are exact; other values come from
/// high-precision pi. Throws ArgumentError for r <= 0.
RootOfUnity root_of_unity(std::int64_t r, std::int64_t i);

}  // namespace qseries

#endif  // QSERIES_NUMERIC_HPP
