#include "qseries/series.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace qseries {

namespace {

// alpha = 0 convergence regions are enforced this far inside the boundary.
Real region_margin() { return Real("0.05"); }

void expect_index(std::int64_t got, std::int64_t want) {
  if (got != want) {
    throw std::logic_error("term generator called out of order: expected index " +
                           std::to_string(want) + ", got " + std::to_string(got));
  }
}

HPComplex checked_factor(const HPComplex& one_minus, const Real& guard, const std::string& what,
                         std::int64_t index) {
  if (abs(one_minus) < guard) {
    throw PoleError(what + " vanishes at index " + std::to_string(index), index);
  }
  return one_minus;
}

}  // namespace

SeriesValue sum_unilateral(const UnilateralSpec& spec) {
  const PrecisionContext& ctx = spec.context;
  const long cap = spec.cap > 0 ? spec.cap : ctx.max_terms();
  const Real small = ctx.tolerance(5);

  SeriesValue out;
  out.value = HPComplex(0);
  Real prev_mag(-1);
  Real mag(0);
  Real scale(0);  // largest magnitude seen, for the rounding estimate
  int small_run = 0;
  bool stopped = false;
  long k = 0;
  while (k < cap) {
    const HPComplex t = spec.term_at(k);
    out.value += t;
    ++k;
    mag = abs(t);
    const Real partial = abs(out.value);
    if (mag > scale) scale = mag;
    if (partial > scale) scale = partial;
    small_run = mag < small * (1 + partial) ? small_run + 1 : 0;
    if (small_run >= 3 && mag <= prev_mag) {
      stopped = true;
      break;
    }
    prev_mag = mag;
  }
  out.terms_used = k;

  Real tail(0);
  if (mag > 0) {
    const Real ratio = prev_mag > 0 ? mag / prev_mag : Real(0);
    tail = ratio < Real(0.999) ? mag * ratio / (1 - ratio) : mag * Real(cap);
  }
  const Real rounding = Real(k) * ctx.epsilon() * scale;
  out.abs_error_estimate = tail + rounding;

  const Real bound = ctx.tolerance() * std::max<Real>(Real(1), abs(out.value));
  if (!stopped) {
    out.converged = false;
    out.diagnostic = "term cap of " + std::to_string(cap) + " reached before decay";
  } else if (out.abs_error_estimate > bound) {
    out.converged = false;
    out.diagnostic = "error estimate exceeds tolerance (cancellation or slow tail)";
  }
  return out;
}

SeriesValue sum_bilateral(const BilateralSpec& spec) {
  const long window = spec.context.max_window();
  SeriesValue positive = sum_unilateral({spec.term_at, spec.context, window + 1});
  if (!positive.converged) positive.diagnostic = "n >= 0 half: " + positive.diagnostic;

  TermFn negative_terms = [&spec](std::int64_t m) { return spec.term_at(-(m + 1)); };
  SeriesValue negative = sum_unilateral({negative_terms, spec.context, window});
  if (!negative.converged) negative.diagnostic = "n < 0 half: " + negative.diagnostic;

  SeriesValue out = add(positive, negative);
  const Real bound =
      spec.context.tolerance() * std::max<Real>(Real(1), abs(out.value));
  if (out.converged && out.abs_error_estimate > bound) {
    out.converged = false;
    out.diagnostic = "bilateral halves cancel beyond tolerance";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators

TermFn f_terms(const HPComplex& a, const HPComplex& c, const HPComplex& q, const HPComplex& z,
               const PrecisionContext& ctx) {
  struct State {
    std::int64_t next = 0;
    HPComplex term;
    HPComplex aqk, cqk, qk, qk1;
  };
  State s{0, HPComplex(1), a, c, HPComplex(1), q};
  const Real guard = ctx.pole_guard();
  return [s, z, q, guard](std::int64_t k) mutable {
    expect_index(k, s.next);
    const HPComplex current = s.term;
    const HPComplex den =
        (HPComplex(1) - s.qk1) * checked_factor(HPComplex(1) - s.cqk, guard, "(c;q)_k factor", k);
    s.term *= (HPComplex(1) - s.aqk) * s.qk * z / den;
    s.term = -s.term;
    s.aqk *= q;
    s.cqk *= q;
    s.qk *= q;
    s.qk1 *= q;
    ++s.next;
    return current;
  };
}

TermFn a_terms(const Rational& alpha, const HPComplex& a, const HPComplex& q, const HPComplex& t) {
  struct State {
    std::int64_t next = 0;
    HPComplex term, aqk, qk1, weight_step, q_alpha_sq;
  };
  const HPComplex q_alpha = rational_power(q, alpha);
  State s{0, HPComplex(1), a, q, q_alpha, q_alpha * q_alpha};
  return [s, q, t](std::int64_t k) mutable {
    expect_index(k, s.next);
    const HPComplex current = s.term;
    // t_{k+1}/t_k = (1 - a q^k)/(1 - q^{k+1}) t q^{alpha(2k+1)}
    s.term *= (HPComplex(1) - s.aqk) * t * s.weight_step / (HPComplex(1) - s.qk1);
    s.aqk *= q;
    s.qk1 *= q;
    s.weight_step *= s.q_alpha_sq;
    ++s.next;
    return current;
  };
}

TermFn b_terms(const Rational& alpha, const HPComplex& a, const HPComplex& b, const HPComplex& q,
               const HPComplex& x, const PrecisionContext& ctx) {
  if (x.is_zero()) throw DomainError("bilateral sum needs x != 0");
  if (q.is_zero()) throw DomainError("bilateral sum needs q != 0");
  struct Direction {
    std::int64_t next;
    HPComplex term, aq, bq, weight_step;
  };
  const HPComplex q_alpha = rational_power(q, alpha);
  const HPComplex q_alpha_sq = q_alpha * q_alpha;
  const HPComplex qinv = HPComplex(1) / q;
  const HPComplex xinv = HPComplex(1) / x;
  // Forward from n = 0: factors at q^n. Backward from n = -1: factors at q^{-m-1}.
  Direction fwd{0, HPComplex(1), a, b, q_alpha};
  Direction bwd{-1, HPComplex(1), a * qinv, b * qinv, q_alpha};
  const Real guard = ctx.pole_guard();
  return [=](std::int64_t n) mutable {
    if (n >= 0) {
      expect_index(n, fwd.next);
      const HPComplex current = fwd.term;
      const HPComplex den =
          checked_factor(HPComplex(1) - fwd.bq, guard, "(b;q)_n factor 1 - b q^n", n);
      fwd.term *= (HPComplex(1) - fwd.aq) * x * fwd.weight_step / den;
      fwd.aq *= q;
      fwd.bq *= q;
      fwd.weight_step *= q_alpha_sq;
      ++fwd.next;
      return current;
    }
    expect_index(n, bwd.next);
    // t_{n} / t_{n+1} = (1 - b q^n) / (1 - a q^n) x^{-1} q^{alpha(2|n|-1)}
    const HPComplex den =
        checked_factor(HPComplex(1) - bwd.aq, guard, "(a;q)_n factor 1 - a q^n", n);
    bwd.term *= (HPComplex(1) - bwd.bq) * xinv * bwd.weight_step / den;
    bwd.aq *= qinv;
    bwd.bq *= qinv;
    bwd.weight_step *= q_alpha_sq;
    --bwd.next;
    return bwd.term;
  };
}

// ---------------------------------------------------------------------------
// Evaluators

SeriesValue eval_2phi1(const HPComplex& a, const HPComplex& b, const HPComplex& c,
                       const HPComplex& q, const HPComplex& z, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_nome(q);
  if (abs(z) >= 1) throw DomainError("2phi1 needs |z| < 1");
  struct State {
    std::int64_t next = 0;
    HPComplex term, aqk, bqk, cqk, qk1;
  };
  State s{0, HPComplex(1), a, b, c, q};
  const Real guard = ctx.pole_guard();
  TermFn terms = [s, q, z, guard](std::int64_t k) mutable {
    expect_index(k, s.next);
    const HPComplex current = s.term;
    const HPComplex den =
        checked_factor(HPComplex(1) - s.cqk, guard, "(c;q)_k factor", k) * (HPComplex(1) - s.qk1);
    s.term *= (HPComplex(1) - s.aqk) * (HPComplex(1) - s.bqk) * z / den;
    s.aqk *= q;
    s.bqk *= q;
    s.cqk *= q;
    s.qk1 *= q;
    ++s.next;
    return current;
  };
  return sum_unilateral({terms, ctx});
}

SeriesValue heine_transformed_2phi1(const HPComplex& a, const HPComplex& b, const HPComplex& c,
                                    const HPComplex& q, const HPComplex& z,
                                    const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  if (b.is_zero()) throw DomainError("Heine transform needs b != 0");
  const HPComplex c_over_b = c / b;
  if (abs(c_over_b) >= 1) throw DomainError("Heine transform needs |c/b| < 1");
  const std::array<HPComplex, 2> num{c_over_b, b * z};
  const std::array<HPComplex, 2> den{c, z};
  const SeriesValue prefactor = poch_ratio_infinite(num, den, q, ctx);
  return multiply(prefactor, eval_2phi1(a * b * z / c, b, b * z, q, c_over_b, ctx));
}

SeriesValue eval_A(const Rational& alpha, const HPComplex& a, const HPComplex& q,
                   const HPComplex& t, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_nome(q);
  if (alpha.is_zero() && abs(t) > (1 - region_margin())) {
    throw DomainError("A_q^(0)(a;t) needs |t| <= 0.95 (|t| < 1 with margin 0.05)");
  }
  return sum_unilateral({a_terms(alpha, a, q, t), ctx});
}

SeriesValue eval_B(const Rational& alpha, const HPComplex& a, const HPComplex& b,
                   const HPComplex& q, const HPComplex& x, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_nome(q);
  if (x.is_zero()) throw DomainError("B_q^(alpha)(a,b;x) needs x != 0");
  if (alpha.is_zero()) {
    if (a.is_zero()) throw DomainError("1psi1 region |b/a| < |x| < 1 needs a != 0");
    const Real ratio = abs(b / a);
    const Real ax = abs(x);
    if (ax < ratio + region_margin() || ax > (1 - region_margin())) {
      throw DomainError("1psi1 region |b/a| < |x| < 1 violated (margin 0.05): |b/a|=" +
                        to_decimal(ratio, 6) + ", |x|=" + to_decimal(ax, 6));
    }
  }
  return sum_bilateral({b_terms(alpha, a, b, q, x, ctx), ctx});
}

SeriesValue eval_1psi1(const HPComplex& a, const HPComplex& b, const HPComplex& q,
                       const HPComplex& z, const PrecisionContext& ctx) {
  return eval_B(Rational(0), a, b, q, z, ctx);
}

SeriesValue psi11_product(const HPComplex& a, const HPComplex& b, const HPComplex& q,
                          const HPComplex& z, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  if (a.is_zero() || z.is_zero()) throw DomainError("1psi1 product needs a, z != 0");
  const HPComplex az = a * z;
  const std::array<HPComplex, 4> num{q, b / a, az, q / az};
  const std::array<HPComplex, 4> den{b, q / a, z, b / az};
  return poch_ratio_infinite(num, den, q, ctx);
}

SeriesValue eval_F(const HPComplex& a, const HPComplex& c, const HPComplex& q, const HPComplex& z,
                   const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_nome(q);
  return sum_unilateral({f_terms(a, c, q, z, ctx), ctx});
}

SeriesValue eval_terminating_F(std::int64_t n, const HPComplex& c, const HPComplex& q,
                               const HPComplex& z, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_nome(q);
  if (n < 0) throw ArgumentError("terminating F needs n >= 0");
  if (n > 0 && q.is_zero()) throw DomainError("terminating F needs q != 0");
  const Real guard = ctx.pole_guard();
  SeriesValue out;
  out.value = HPComplex(1);
  HPComplex term(1);
  HPComplex aqk = n > 0 ? pow(q, -n) : HPComplex(1);  // q^{k-n}
  HPComplex cqk = c;
  HPComplex qk = HPComplex(1);
  Real scale(1);
  for (std::int64_t k = 0; k < n; ++k) {
    const HPComplex den = (HPComplex(1) - qk * q) * (HPComplex(1) - cqk);
    if (abs(HPComplex(1) - cqk) < guard) {
      throw PoleError("(c;q)_k vanishes at k=" + std::to_string(k + 1), k);
    }
    term *= -((HPComplex(1) - aqk) * qk * z) / den;
    out.value += term;
    scale = std::max<Real>(scale, abs(term));
    aqk *= q;
    cqk *= q;
    qk *= q;
  }
  out.terms_used = static_cast<long>(n + 1);
  out.abs_error_estimate = Real(4 * (n + 1)) * ctx.epsilon() * scale;
  if (out.abs_error_estimate > ctx.tolerance() * std::max<Real>(Real(1), abs(out.value))) {
    out.converged = false;
    out.diagnostic = "cancellation: terms reach " + to_decimal(scale, 3) +
                     ", exceeding the working precision";
  }
  return out;
}

SeriesValue eval_gaussian_series(std::int64_t n, const HPComplex& x, const HPComplex& q,
                                 const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_nome(q);
  if (n < 0) throw ArgumentError("1/(x;q)_n expansion needs n >= 0");
  if (abs(x) > (1 - region_margin())) {
    throw DomainError("1/(x;q)_n expansion needs |x| <= 0.95");
  }
  struct State {
    std::int64_t next = 0;
    HPComplex term, qnk, qk1;
  };
  // coefficient ratio (1 - q^{n+k}) / (1 - q^{k+1})
  State s{0, HPComplex(1), pow(q, n), q};
  TermFn terms = [s, q, x](std::int64_t k) mutable {
    expect_index(k, s.next);
    const HPComplex current = s.term;
    s.term *= (HPComplex(1) - s.qnk) * x / (HPComplex(1) - s.qk1);
    s.qnk *= q;
    s.qk1 *= q;
    ++s.next;
    return current;
  };
  return sum_unilateral({terms, ctx});
}

SeriesValue eval_ramanujan_A(const HPComplex& q, const HPComplex& z, AiryVariant variant,
                             const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  if (variant == AiryVariant::Quadratic) return eval_A(Rational(1), HPComplex(0), q, -z, ctx);
  return eval_A(Rational(0), HPComplex(0), q, -(q * z), ctx);
}

}  // namespace qseries
