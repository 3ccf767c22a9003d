#include "qseries/pochhammer.hpp"

namespace qseries {

namespace {

// Extra decimal digits demanded of every truncated product beyond the context
// tolerance, so that products of several symbols still clear it.
constexpr int kProductGuardDigits = 10;

void combine_flags(SeriesValue& out, const SeriesValue& l, const SeriesValue& r) {
  out.terms_used = l.terms_used + r.terms_used;
  out.converged = l.converged && r.converged;
  if (!l.diagnostic.empty()) out.diagnostic = l.diagnostic;
  if (!r.diagnostic.empty()) {
    out.diagnostic += out.diagnostic.empty() ? r.diagnostic : "; " + r.diagnostic;
  }
}

SeriesValue infinite_product(const HPComplex& a, const HPComplex& q, const PrecisionContext& ctx,
                             bool check_poles) {
  require_nome(q);
  SeriesValue out;
  out.value = HPComplex(1);
  if (a.is_zero()) return out;

  const Real abs_a = abs(a);
  const Real abs_q = abs(q);
  const Real one_minus = 1 - abs_q;
  const Real target = ctx.tolerance(kProductGuardDigits) / 2;
  const Real guard = ctx.pole_guard();

  HPComplex aqj = a;   // a q^j
  Real tail = abs_a;   // |a| |q|^j
  long j = 0;
  for (; j < ctx.max_terms(); ++j) {
    if (tail <= Real(0.5) && tail / one_minus <= target) break;
    const HPComplex factor = HPComplex(1) - aqj;
    if (check_poles && abs(factor) < guard) {
      throw PoleError("infinite product (a;q)_inf has a vanishing factor at j=" +
                          std::to_string(j),
                      j);
    }
    out.value *= factor;
    aqj *= q;
    tail *= abs_q;
  }
  out.terms_used = j;
  out.abs_error_estimate = 2 * tail / one_minus * abs(out.value);
  if (j == ctx.max_terms()) {
    out.converged = false;
    out.diagnostic = "infinite product did not reach its tail bound within max_terms";
  }
  return out;
}

}  // namespace

void require_nome(const HPComplex& q) {
  if (abs(q) > Real("0.999")) {
    throw DomainError("|q| must be at most 0.999");
  }
}

HPComplex poch_finite(const HPComplex& a, const HPComplex& q, std::int64_t n,
                      const PrecisionContext& ctx) {
  require_nome(q);
  HPComplex result(1);
  if (n >= 0) {
    HPComplex aqj = a;
    for (std::int64_t j = 0; j < n; ++j) {
      result *= HPComplex(1) - aqj;
      aqj *= q;
    }
    return result;
  }
  if (q.is_zero()) throw PoleError("(a;q)_n with n < 0 needs q != 0", 0);
  const Real guard = ctx.pole_guard();
  const HPComplex qinv = HPComplex(1) / q;
  HPComplex aqj = a * qinv;  // a q^{-j}
  for (std::int64_t j = 1; j <= -n; ++j) {
    const HPComplex factor = HPComplex(1) - aqj;
    if (abs(factor) < guard) {
      throw PoleError("(a;q)_" + std::to_string(n) + " has a pole: 1 - a q^-" +
                          std::to_string(j) + " vanishes",
                      j);
    }
    result *= factor;
    aqj *= qinv;
  }
  return HPComplex(1) / result;
}

SeriesValue poch_infinite(const HPComplex& a, const HPComplex& q, const PrecisionContext& ctx) {
  return infinite_product(a, q, ctx, false);
}

SeriesValue inverse_poch_infinite(const HPComplex& a, const HPComplex& q,
                                  const PrecisionContext& ctx) {
  SeriesValue v = infinite_product(a, q, ctx, true);
  v.value = HPComplex(1) / v.value;
  v.abs_error_estimate = v.abs_error_estimate * abs(v.value) * abs(v.value);
  return v;
}

HPComplex poch_multi(std::span<const HPComplex> bases, const HPComplex& q, std::int64_t n,
                     const PrecisionContext& ctx) {
  HPComplex result(1);
  for (const auto& b : bases) result *= poch_finite(b, q, n, ctx);
  return result;
}

SeriesValue poch_multi_infinite(std::span<const HPComplex> bases, const HPComplex& q,
                                const PrecisionContext& ctx) {
  SeriesValue out;
  out.value = HPComplex(1);
  for (const auto& b : bases) out = multiply(out, poch_infinite(b, q, ctx));
  return out;
}

SeriesValue poch_ratio_infinite(std::span<const HPComplex> numerator,
                                std::span<const HPComplex> denominator, const HPComplex& q,
                                const PrecisionContext& ctx) {
  SeriesValue out = poch_multi_infinite(numerator, q, ctx);
  for (const auto& d : denominator) out = multiply(out, inverse_poch_infinite(d, q, ctx));
  return out;
}

SeriesValue multiply(const SeriesValue& l, const SeriesValue& r) {
  SeriesValue out;
  out.value = l.value * r.value;
  // |lr| (e_l/|l| + e_r/|r|) written without dividing by possibly-zero factors.
  out.abs_error_estimate = l.abs_error_estimate * abs(r.value) + r.abs_error_estimate * abs(l.value);
  combine_flags(out, l, r);
  return out;
}

SeriesValue divide(const SeriesValue& l, const SeriesValue& r) {
  if (r.value.is_zero()) throw PoleError("division by a vanishing series value", 0);
  SeriesValue out;
  out.value = l.value / r.value;
  const Real ar = abs(r.value);
  out.abs_error_estimate = l.abs_error_estimate / ar + r.abs_error_estimate * abs(out.value) / ar;
  combine_flags(out, l, r);
  return out;
}

SeriesValue add(const SeriesValue& l, const SeriesValue& r) {
  SeriesValue out;
  out.value = l.value + r.value;
  out.abs_error_estimate = l.abs_error_estimate + r.abs_error_estimate;
  combine_flags(out, l, r);
  return out;
}

SeriesValue power(const SeriesValue& v, int e) {
  SeriesValue out;
  out.value = HPComplex(1);
  if (e < 0) {
    SeriesValue one;
    one.value = HPComplex(1);
    return divide(one, power(v, -e));
  }
  for (int i = 0; i < e; ++i) out = multiply(out, v);
  return out;
}

}  // namespace qseries
