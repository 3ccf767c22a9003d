#include "qseries/numeric.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

namespace qseries {

namespace {

constexpr double kLog2Of10 = 3.321928094887362;

unsigned bits_to_digits10(int bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120));
}

// Precision actually carried by new Real values, in bits.
long current_bits() { return static_cast<long>(Real().precision()); }

}  // namespace

// ---------------------------------------------------------------------------
// PrecisionContext

PrecisionContext::PrecisionContext()
    : PrecisionContext(kDefaultPrecisionBits, kDefaultToleranceDigits, kDefaultMaxTerms,
                       kDefaultMaxWindow) {}

PrecisionContext::PrecisionContext(int bits, int tol, long terms, long window)
    : precision_bits_(bits),
      tolerance_digits_(tol),
      max_terms_(terms),
      max_window_(window),
      pole_guard_digits_(bits / 8) {}  // 1e-25 at 200 bits

PrecisionContext make_context(int precision_bits, int tolerance_digits, long max_terms,
                              long max_window) {
  if (precision_bits < 64) {
    throw ArgumentError("precision_bits must be at least 64, got " +
                        std::to_string(precision_bits));
  }
  if (tolerance_digits <= 0) {
    throw ArgumentError("tolerance_digits must be positive");
  }
  if (tolerance_digits * kLog2Of10 > precision_bits - 32) {
    throw ArgumentError("tolerance of " + std::to_string(tolerance_digits) +
                        " digits exceeds the precision margin of " +
                        std::to_string(precision_bits) + " bits (need 32 guard bits)");
  }
  if (max_terms < 16) throw ArgumentError("max_terms must be at least 16");
  if (max_window < 8) throw ArgumentError("max_window must be at least 8");
  return PrecisionContext(precision_bits, tolerance_digits, max_terms, max_window);
}

unsigned PrecisionContext::digits10() const noexcept { return bits_to_digits10(precision_bits_); }

Real PrecisionContext::tolerance() const { return tolerance(0); }

Real PrecisionContext::tolerance(int extra_digits) const {
  return boost::multiprecision::pow(Real(10), -(tolerance_digits_ + extra_digits));
}

Real PrecisionContext::pole_guard() const {
  return boost::multiprecision::pow(Real(10), -pole_guard_digits_);
}

Real PrecisionContext::epsilon() const {
  return boost::multiprecision::ldexp(Real(1), -precision_bits_);
}

PrecisionContext PrecisionContext::with_precision(int precision_bits) const {
  return make_context(precision_bits, tolerance_digits_, max_terms_, max_window_);
}

PrecisionScope::PrecisionScope(const PrecisionContext& ctx) : saved_(Real::default_precision()) {
  Real::default_precision(ctx.digits10());
}

PrecisionScope::~PrecisionScope() { Real::default_precision(saved_); }

// ---------------------------------------------------------------------------
// HPComplex

HPComplex& HPComplex::operator*=(const HPComplex& o) {
  Real re = re_ * o.re_ - im_ * o.im_;
  im_ = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(re);
  return *this;
}

HPComplex& HPComplex::operator/=(const HPComplex& o) {
  if (o.im_ == 0) {
    re_ /= o.re_;
    im_ /= o.re_;
    return *this;
  }
  Real d = o.re_ * o.re_ + o.im_ * o.im_;
  Real re = (re_ * o.re_ + im_ * o.im_) / d;
  im_ = (im_ * o.re_ - re_ * o.im_) / d;
  re_ = std::move(re);
  return *this;
}

Real abs(const HPComplex& z) {
  if (z.im() == 0) return boost::multiprecision::abs(z.re());
  return boost::multiprecision::hypot(z.re(), z.im());
}

Real norm(const HPComplex& z) { return z.re() * z.re() + z.im() * z.im(); }

HPComplex conj(const HPComplex& z) { return {z.re(), -z.im()}; }

HPComplex log(const HPComplex& z) {
  return {boost::multiprecision::log(abs(z)), boost::multiprecision::atan2(z.im(), z.re())};
}

HPComplex exp(const HPComplex& z) {
  Real m = boost::multiprecision::exp(z.re());
  if (z.im() == 0) return HPComplex(m);
  return {m * boost::multiprecision::cos(z.im()), m * boost::multiprecision::sin(z.im())};
}

HPComplex pow(const HPComplex& z, const BigInt& e) {
  if (e == 0) return HPComplex(1);
  if (e < 0) {
    if (z.is_zero()) throw PoleError("zero raised to a negative power", 0);
    return HPComplex(1) / pow(z, BigInt(-e));
  }
  HPComplex result(1);
  HPComplex base = z;
  const auto bits = boost::multiprecision::msb(e);
  for (std::size_t b = 0; b <= bits; ++b) {
    if (boost::multiprecision::bit_test(e, static_cast<unsigned>(b))) result *= base;
    if (b < bits) base *= base;
  }
  return result;
}

HPComplex pow(const HPComplex& z, std::int64_t e) { return pow(z, BigInt(e)); }

Real pi() {
  static std::mutex mutex;
  static std::map<long, Real> cache;
  const long bits = current_bits();
  std::lock_guard lock(mutex);
  auto it = cache.find(bits);
  if (it == cache.end()) {
    it = cache.emplace(bits, boost::math::constants::pi<Real>()).first;
  }
  return it->second;
}

namespace {

Real parse_real(std::string_view text, std::string_view whole) {
  if (text.empty()) throw ArgumentError("malformed number: '" + std::string(whole) + "'");
  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-') ++i;
  bool digits = false;
  bool dot = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      digits = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!digits) throw ArgumentError("malformed number: '" + std::string(whole) + "'");
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') {
      throw ArgumentError("malformed number: '" + std::string(whole) + "'");
    }
    ++i;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
    bool exp_digits = false;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) exp_digits = true;
    if (!exp_digits || i != text.size()) {
      throw ArgumentError("malformed number: '" + std::string(whole) + "'");
    }
  }
  return Real(std::string(text));
}

}  // namespace

HPComplex parse_complex(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw ArgumentError("empty complex number");
  if (s.back() != 'i') return HPComplex(parse_real(s, text));

  s.remove_suffix(1);
  // Find the sign separating real and imaginary parts, skipping exponent signs.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  auto imag_part = [&](std::string_view v) -> Real {
    if (v.empty() || v == "+") return Real(1);
    if (v == "-") return Real(-1);
    return parse_real(v, text);
  };
  if (split == std::string_view::npos) return HPComplex(Real(0), imag_part(s));
  return HPComplex(parse_real(s.substr(0, split), text), imag_part(s.substr(split)));
}

std::string to_decimal(const Real& v, int digits) {
  std::ostringstream os;
  const int d = digits > 0 ? digits : static_cast<int>(v.precision());
  os << std::scientific << std::setprecision(d - 1) << v;
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const HPComplex& z) {
  const auto p = static_cast<int>(os.precision());
  os << to_decimal(z.re(), p);
  if (z.im() != 0) {
    os << (z.im() < 0 ? "-" : "+") << to_decimal(boost::multiprecision::abs(z.im()), p) << "i";
  }
  return os;
}

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw ArgumentError("rational denominator must be positive");
  if (num < 0) throw ArgumentError("alpha must be nonnegative");
  const std::int64_t g = std::gcd(num, den);
  num_ = g ? num / g : 0;
  den_ = g ? den / g : 1;
  if (den_ > kMaxDenominator) {
    throw ArgumentError("alpha denominator " + std::to_string(den_) + " exceeds 12");
  }
}

Real Rational::to_real() const { return Real(num_) / Real(den_); }

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text) {
  auto to_int = [&](std::string_view v) {
    if (v.empty()) throw ArgumentError("malformed rational: '" + std::string(text) + "'");
    std::int64_t out = 0;
    for (char c : v) {
      if (c < '0' || c > '9') {
        throw ArgumentError("malformed rational: '" + std::string(text) + "'");
      }
      out = out * 10 + (c - '0');
    }
    return out;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(to_int(text), 1);
  return Rational(to_int(text.substr(0, slash)), to_int(text.substr(slash + 1)));
}

HPComplex rational_power(const HPComplex& q, const Rational& alpha) {
  if (alpha.is_integer()) return pow(q, alpha.num());
  if (!q.is_real() || q.re() <= 0) {
    throw DomainError("fractional alpha requires real q in (0, 1)");
  }
  return HPComplex(boost::multiprecision::pow(q.re(), alpha.to_real()));
}

HPComplex quadratic_weight(const HPComplex& q, const Rational& alpha, std::int64_t n) {
  const BigInt scaled = BigInt(alpha.num()) * BigInt(n) * BigInt(n);
  if (scaled % alpha.den() == 0) return pow(q, BigInt(scaled / alpha.den()));
  if (!q.is_real() || q.re() <= 0) {
    throw DomainError("fractional alpha requires real q in (0, 1)");
  }
  return HPComplex(boost::multiprecision::exp(alpha.to_real() * Real(n) * Real(n) *
                                              boost::multiprecision::log(q.re())));
}

HPComplex q_triangular_power(const HPComplex& q, std::int64_t k) {
  if (k < 0) throw ArgumentError("q_triangular_power needs k >= 0");
  const BigInt e = BigInt(k) * BigInt(k - 1) / 2;
  return pow(q, e);
}

// ---------------------------------------------------------------------------
// Roots of unity

RootOfUnity root_of_unity(std::int64_t r, std::int64_t i) {
  if (r <= 0) throw ArgumentError("root of unity order must be positive");
  std::int64_t e = i % r;
  if (e < 0) e += r;

  // Exact quarter turns.
  if (e == 0) return {r, e, HPComplex(1)};
  if (2 * e == r) return {r, e, HPComplex(-1)};
  if (4 * e == r) return {r, e, HPComplex(0, 1)};
  if (4 * e == 3 * r) return {r, e, HPComplex(0, -1)};

  static std::mutex mutex;
  static std::map<std::tuple<long, std::int64_t, std::int64_t>, HPComplex> cache;
  // Reduce the fraction so equal angles share a cache slot.
  const std::int64_t g = std::gcd(e, r);
  const auto key = std::make_tuple(current_bits(), r / g, e / g);
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    const Real angle = 2 * pi() * Real(e / g) / Real(r / g);
    it = cache.emplace(key, HPComplex(boost::multiprecision::cos(angle),
                                      boost::multiprecision::sin(angle)))
             .first;
  }
  return {r, e, it->second};
}

}  // namespace qseries
