#include "qseries/multisection.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <string>

#include "qseries/series.hpp"

namespace qseries {

namespace {


// A finitely supported sequence indexed from `lo`.
struct Laurent {
  std::int64_t lo = 0;
  std::vector<HPComplex> coef;

  std::int64_t hi() const { return lo + static_cast<std::int64_t>(coef.size()) - 1; }
  bool contains(std::int64_t k) const { return k >= lo && k <= hi(); }
  const HPComplex& at(std::int64_t k) const { return coef[static_cast<std::size_t>(k - lo)]; }
};

// Full product of two finitely supported sequences.
Laurent convolve(const Laurent& l, const Laurent& r) {
  Laurent out;
  out.lo = l.lo + r.lo;
  out.coef.assign(l.coef.size() + r.coef.size() - 1, HPComplex(0));
  for (std::size_t i = 0; i < l.coef.size(); ++i) {
    if (l.coef[i].is_zero()) continue;
    for (std::size_t j = 0; j < r.coef.size(); ++j) out.coef[i + j] += l.coef[i] * r.coef[j];
  }
  return out;
}

// Coefficients 0..degree of the product of two power series. Each coefficient
// is summed in mirrored pairs (k, n-k) so that antisymmetric contributions
// cancel exactly.
std::vector<HPComplex> truncated_product(const std::vector<HPComplex>& l,
                                         const std::vector<HPComplex>& r, std::size_t degree) {
  std::vector<HPComplex> out(degree + 1, HPComplex(0));
  for (std::size_t n = 0; n <= degree; ++n) {
    HPComplex acc(0);
    for (std::size_t k = 0; 2 * k < n; ++k) acc += l[k] * r[n - k] + l[n - k] * r[k];
    if (n % 2 == 0) acc += l[n / 2] * r[n / 2];
    out[n] = acc;
  }
  return out;
}

// (a;q)_k / (q;q)_k for k = 0..degree.
std::vector<HPComplex> qbinomial_coefficients(const HPComplex& a, const HPComplex& q,
                                              std::size_t degree) {
  std::vector<HPComplex> c(degree + 1);
  c[0] = HPComplex(1);
  HPComplex aqk = a;
  HPComplex qk1 = q;
  for (std::size_t k = 1; k <= degree; ++k) {
    c[k] = c[k - 1] * (HPComplex(1) - aqk) / (HPComplex(1) - qk1);
    aqk *= q;
    qk1 *= q;
  }
  return c;
}

// (a;q)_k / (b;q)_k for |k| <= window.
Laurent bilateral_coefficients(const HPComplex& a, const HPComplex& b, const HPComplex& q,
                               std::int64_t window, const PrecisionContext& ctx) {
  Laurent out;
  out.lo = -window;
  out.coef.resize(static_cast<std::size_t>(2 * window + 1));
  TermFn terms = b_terms(Rational(0), a, b, q, HPComplex(1), ctx);
  for (std::int64_t k = 0; k <= window; ++k) out.coef[static_cast<std::size_t>(k + window)] = terms(k);
  for (std::int64_t k = -1; k >= -window; --k) {
    out.coef[static_cast<std::size_t>(k + window)] = terms(k);
  }
  return out;
}

// 1 / (1 - a q^k) for |k| <= window.
Laurent reciprocal_factors(const HPComplex& a, const HPComplex& q, std::int64_t window,
                           const PrecisionContext& ctx) {
  if (q.is_zero()) throw DomainError("bilateral sum needs q != 0");
  Laurent out;
  out.lo = -window;
  out.coef.resize(static_cast<std::size_t>(2 * window + 1));
  const Real guard = ctx.pole_guard();
  HPComplex aqk = a * pow(q, -window);
  for (std::int64_t k = -window; k <= window; ++k) {
    const HPComplex den = HPComplex(1) - aqk;
    if (abs(den) < guard) {
      throw PoleError("factor 1 - a q^k vanishes at k=" + std::to_string(k), k);
    }
    out.coef[static_cast<std::size_t>(k + window)] = HPComplex(1) / den;
    aqk *= q;
  }
  return out;
}

// Restricts a sequence to |k| <= window.
Laurent restrict_window(const Laurent& seq, std::int64_t window) {
  Laurent out;
  out.lo = std::max(seq.lo, -window);
  const std::int64_t hi = std::min(seq.hi(), window);
  for (std::int64_t k = out.lo; k <= hi; ++k) out.coef.push_back(seq.at(k));
  return out;
}

// Multiplies each entry k by zeta_r^{exponent * k}.
Laurent twist(const Laurent& seq, std::int64_t r, std::int64_t exponent) {
  Laurent out = seq;
  for (std::int64_t k = seq.lo; k <= seq.hi(); ++k) {
    out.coef[static_cast<std::size_t>(k - seq.lo)] *= root_of_unity(r, exponent * k).value;
  }
  return out;
}

// Smallest window >= 8 at which the decaying (negative-index) side of `seq`
// has dropped below 10^-(tol+10) of the largest entry seen so far. Returns the
// full width when no such window exists.
std::int64_t decay_window(const Laurent& seq, const PrecisionContext& ctx) {
  const Real threshold = ctx.tolerance(10);
  Real largest(0);
  const std::int64_t width = -seq.lo;
  for (std::int64_t k = 0; k <= width; ++k) {
    largest = std::max<Real>(largest, std::max<Real>(abs(seq.at(k)), abs(seq.at(-k))));
    if (k >= 8 && abs(seq.at(-k)) <= threshold * largest) return k;
  }
  return width;
}

// The product of r twisted copies of `base`, i-th copy twisted by exponents[i].
Laurent twisted_product(const Laurent& base, std::int64_t r,
                        const std::vector<std::int64_t>& exponents) {
  Laurent acc = twist(base, r, exponents.front());
  for (std::size_t i = 1; i < exponents.size(); ++i) acc = convolve(acc, twist(base, r, exponents[i]));
  return acc;
}

void require_order(int r) {
  if (r < 2) throw ArgumentError("multisection order r must be at least 2");
}

// Shell-by-shell summation over s in one direction (step +1 or -1) starting at
// `start`. Stops after `run` consecutive shells below 10^-(tol+5)(1 + |partial|).
struct ShellSum {
  SeriesValue total;
  bool stopped = false;
};

ShellSum sum_shells(std::int64_t start, std::int64_t step, std::int64_t cap,
                    const std::function<SeriesValue(std::int64_t)>& shell,
                    const PrecisionContext& ctx, int run = 2) {
  ShellSum out;
  out.total.value = HPComplex(0);
  const Real small = ctx.tolerance(5);
  int small_run = 0;
  Real last(0);
  Real before_last(0);
  Real scale(0);
  long count = 0;
  for (std::int64_t s = start; step > 0 ? s <= cap : s >= -cap; s += step) {
    const SeriesValue term = shell(s);
    out.total.value += term.value;
    out.total.abs_error_estimate += term.abs_error_estimate;
    out.total.terms_used += term.terms_used;
    if (!term.converged) {
      out.total.converged = false;
      out.total.diagnostic = "shell s=" + std::to_string(s) + ": " + term.diagnostic;
    }
    ++count;
    before_last = last;
    last = abs(term.value);
    const Real partial = abs(out.total.value);
    scale = std::max<Real>(scale, std::max<Real>(last, partial));
    small_run = last < small * (1 + partial) ? small_run + 1 : 0;
    if (small_run >= run) {
      out.stopped = true;
      break;
    }
  }
  if (last > 0) {
    const Real ratio = before_last > 0 ? last / before_last : Real(0);
    out.total.abs_error_estimate +=
        ratio < Real(0.999) ? last * ratio / (1 - ratio) : last * Real(cap);
  }
  out.total.abs_error_estimate += Real(count) * ctx.epsilon() * scale;
  if (!out.stopped) {
    out.total.converged = false;
    out.total.diagnostic = "outer shells did not decay within outer_cap=" + std::to_string(cap);
  }
  return out;
}

void finish(SeriesValue& v, const PrecisionContext& ctx) {
  const Real bound = ctx.tolerance() * std::max<Real>(Real(1), abs(v.value));
  if (v.converged && v.abs_error_estimate > bound) {
    v.converged = false;
    v.diagnostic = "error estimate exceeds tolerance";
  }
}

std::int64_t effective_cap(std::int64_t outer_cap, const PrecisionContext& ctx) {
  if (outer_cap < 0) throw ArgumentError("outer_cap must be nonnegative");
  return outer_cap == 0 ? ctx.max_window() : outer_cap;
}

// Unilateral shell coefficients sum_{k in C_{len}^+(s)} prod c(k_i) zeta^{e_i k_i}
// for s = 0..degree.
std::vector<HPComplex> unilateral_shells(const std::vector<HPComplex>& c, std::int64_t r,
                                         const std::vector<std::int64_t>& exponents,
                                         std::size_t degree) {
  auto twisted = [&](std::int64_t e) {
    std::vector<HPComplex> out(degree + 1);
    for (std::size_t k = 0; k <= degree; ++k) {
      out[k] = c[k] * root_of_unity(r, e * static_cast<std::int64_t>(k)).value;
    }
    return out;
  };
  std::vector<HPComplex> acc = twisted(exponents.front());
  for (std::size_t i = 1; i < exponents.size(); ++i) {
    acc = truncated_product(acc, twisted(exponents[i]), degree);
  }
  return acc;
}

// Shared driver for both unilateral expansions. `inner_rotation` multiplies the
// argument of the inner A function (1 or zeta_r).
SeriesValue unilateral_expansion(const Rational& alpha, const HPComplex& a, const HPComplex& q,
                                 const HPComplex& t, int r, std::int64_t outer_cap,
                                 const std::vector<std::int64_t>& exponents,
                                 const HPComplex& inner_rotation, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  require_nome(q);
  if (alpha.is_zero() && abs(t) >= Real(0.8)) {
    throw DomainError("the alpha = 0 expansion needs |t| < 0.8");
  }
  const std::int64_t cap = effective_cap(outer_cap, ctx);
  const HPComplex q_alpha = rational_power(q, alpha);

  std::size_t degree = std::min<std::size_t>(32, static_cast<std::size_t>(cap));
  for (;;) {
    const std::vector<HPComplex> c = qbinomial_coefficients(a, q, degree);
    const std::vector<HPComplex> shells = unilateral_shells(c, r, exponents, degree);
    auto shell = [&](std::int64_t s) {
      const HPComplex& g = shells[static_cast<std::size_t>(s)];
      SeriesValue out;
      out.value = HPComplex(0);
      if (g.is_zero()) return out;
      // q^{alpha s^2} t^s A_q^(alpha)(a; rotation q^{2 alpha s} t)
      const HPComplex weight = pow(q_alpha, BigInt(s) * s) * pow(t, s);
      if (weight.is_zero()) return out;
      const SeriesValue inner =
          eval_A(alpha, a, q, inner_rotation * pow(q_alpha, 2 * s) * t, ctx);
      out.value = g * weight * inner.value;
      out.abs_error_estimate = abs(g * weight) * inner.abs_error_estimate;
      out.terms_used = inner.terms_used;
      out.converged = inner.converged;
      out.diagnostic = inner.diagnostic;
      return out;
    };
    ShellSum sum = sum_shells(0, 1, static_cast<std::int64_t>(degree), shell, ctx);
    if (sum.stopped || degree >= static_cast<std::size_t>(cap)) {
      if (!sum.stopped) {
        sum.total.diagnostic = "outer shells did not decay within outer_cap=" + std::to_string(cap);
      }
      finish(sum.total, ctx);
      return sum.total;
    }
    degree = std::min<std::size_t>(2 * degree, static_cast<std::size_t>(cap));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Compositions

std::vector<Composition> compositions_nonneg(int r, std::int64_t n) {
  if (r < 1) throw ArgumentError("compositions need r >= 1");
  std::vector<Composition> out;
  if (n < 0) return out;
  std::vector<std::int64_t> parts(static_cast<std::size_t>(r), 0);
  std::function<void(int, std::int64_t)> fill = [&](int i, std::int64_t remaining) {
    if (i == r - 1) {
      parts[static_cast<std::size_t>(i)] = remaining;
      out.push_back({parts, n});
      return;
    }
    for (std::int64_t k = 0; k <= remaining; ++k) {
      parts[static_cast<std::size_t>(i)] = k;
      fill(i + 1, remaining - k);
    }
  };
  fill(0, n);
  return out;
}

std::vector<Composition> compositions_windowed(int r, std::int64_t n, std::int64_t window) {
  if (r < 1) throw ArgumentError("compositions need r >= 1");
  if (window < 0) throw ArgumentError("window must be nonnegative");
  std::vector<Composition> out;
  if (n > r * window || n < -r * window) return out;
  std::vector<std::int64_t> parts(static_cast<std::size_t>(r), 0);
  std::function<void(int, std::int64_t)> fill = [&](int i, std::int64_t remaining) {
    const std::int64_t rest = r - 1 - i;  // slots after this one
    if (rest == 0) {
      parts[static_cast<std::size_t>(i)] = remaining;
      out.push_back({parts, n});
      return;
    }
    const std::int64_t lo = std::max(-window, remaining - rest * window);
    const std::int64_t hi = std::min(window, remaining + rest * window);
    for (std::int64_t k = lo; k <= hi; ++k) {
      parts[static_cast<std::size_t>(i)] = k;
      fill(i + 1, remaining - k);
    }
  };
  fill(0, n);
  return out;
}

// ---------------------------------------------------------------------------
// Multisection sums

HPComplex multisum_u1(const HPComplex& a, const HPComplex& q, int r, std::int64_t n,
                      const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  require_nome(q);
  if (n < 0) throw ArgumentError("multisum_u1 needs n >= 0");
  const std::vector<HPComplex> c = qbinomial_coefficients(a, q, static_cast<std::size_t>(n));
  HPComplex total(0);
  for (const Composition& comp : compositions_nonneg(r, n)) {
    HPComplex term(1);
    std::int64_t phase = 0;
    for (std::size_t i = 0; i < comp.parts.size(); ++i) {
      term *= c[static_cast<std::size_t>(comp.parts[i])];
      phase += static_cast<std::int64_t>(i + 1) * comp.parts[i];
    }
    total += term * root_of_unity(r, phase).value;
  }
  return total;
}

HPComplex multisum_u1_claim(const HPComplex& a, const HPComplex& q, int r, std::int64_t n,
                            const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  if (n % r != 0) return HPComplex(0);
  const HPComplex qr = pow(q, r);
  return poch_finite(pow(a, r), qr, n / r, ctx) / poch_finite(qr, qr, n / r, ctx);
}

SeriesValue b1_prefactor(const HPComplex& a, const HPComplex& b, const HPComplex& q, int r,
                         const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  if (a.is_zero()) throw DomainError("bilateral multisection needs a != 0");
  const HPComplex qr = pow(q, r);
  const HPComplex ar = pow(a, r);
  const HPComplex br = pow(b, r);
  const std::array<HPComplex, 2> num1{q, b / a};
  const std::array<HPComplex, 2> den1{b, q / a};
  const std::array<HPComplex, 2> num2{br, qr / ar};
  const std::array<HPComplex, 2> den2{qr, br / ar};
  return multiply(power(poch_ratio_infinite(num1, den1, q, ctx), r),
                  poch_ratio_infinite(num2, den2, qr, ctx));
}

SeriesValue multisum_b1_claim(const HPComplex& a, const HPComplex& b, const HPComplex& q, int r,
                              std::int64_t n, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  SeriesValue out;
  out.value = HPComplex(0);
  if (n % r != 0) return out;
  const std::int64_t m = n / r;
  const HPComplex qr = pow(q, r);
  SeriesValue ratio;
  ratio.value = poch_finite(pow(a, r), qr, m, ctx) / poch_finite(pow(b, r), qr, m, ctx);
  return multiply(b1_prefactor(a, b, q, r, ctx), ratio);
}

SeriesValue multisum_b1(const HPComplex& a, const HPComplex& b, const HPComplex& q, int r,
                        std::int64_t n, std::int64_t window, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  require_nome(q);
  if (window < 0 || window > ctx.max_window()) {
    throw ArgumentError("window must lie in [0, max_window]");
  }
  const Laurent full = bilateral_coefficients(a, b, q, window > 0 ? window : ctx.max_window(), ctx);
  const std::int64_t start = window > 0 ? window : decay_window(full, ctx);

  std::vector<std::int64_t> exponents(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) exponents[static_cast<std::size_t>(i)] = i + 1;

  auto windowed_sum = [&](std::int64_t w) {
    const Laurent product = twisted_product(restrict_window(full, w), r, exponents);
    return product.contains(n) ? product.at(n) : HPComplex(0);
  };
  SeriesValue out;
  std::int64_t K = start;
  Real boundary;
  // Auto mode widens the window until the boundary shell is negligible.
  for (;;) {
    out.value = windowed_sum(K);
    const HPComplex inner = K > 0 ? windowed_sum(K - 1) : HPComplex(0);
    boundary = abs(out.value - inner);
    if (window > 0 || K >= ctx.max_window() ||
        boundary <= ctx.tolerance(5) * std::max<Real>(Real(1), abs(out.value))) {
      break;
    }
    K = std::min<std::int64_t>(ctx.max_window(), K + std::max<std::int64_t>(8, K / 2));
  }
  out.terms_used = static_cast<long>(2 * K + 1);
  out.abs_error_estimate = boundary + Real(2 * K + 1) * r * ctx.epsilon() * abs(out.value);
  if (boundary > ctx.tolerance(5) * std::max<Real>(Real(1), abs(out.value))) {
    out.converged = false;
    out.diagnostic = "boundary shell |k_i| = " + std::to_string(K) + " has not decayed";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Product identities

std::pair<SeriesValue, SeriesValue> product_multisection(const HPComplex& a, const HPComplex& q,
                                                         const HPComplex& t, int r,
                                                         const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  std::vector<HPComplex> num;
  std::vector<HPComplex> den;
  for (int i = 0; i < r; ++i) {
    const HPComplex rotated = root_of_unity(r, i).value * t;
    num.push_back(a * rotated);
    den.push_back(rotated);
  }
  SeriesValue lhs = poch_ratio_infinite(num, den, q, ctx);
  const HPComplex tr = pow(t, r);
  const std::array<HPComplex, 1> rnum{pow(a, r) * tr};
  const std::array<HPComplex, 1> rden{tr};
  SeriesValue rhs = poch_ratio_infinite(rnum, rden, pow(q, r), ctx);
  return {std::move(lhs), std::move(rhs)};
}

std::pair<SeriesValue, SeriesValue> bilateral_product_multisection(
    const HPComplex& a, const HPComplex& b, const HPComplex& q, const HPComplex& z, int r,
    const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  SeriesValue lhs;
  lhs.value = HPComplex(1);
  for (int i = 0; i < r; ++i) {
    lhs = multiply(lhs, psi11_product(a, b, q, root_of_unity(r, i).value * z, ctx));
  }
  const HPComplex qr = pow(q, r);
  const HPComplex ar = pow(a, r);
  const HPComplex zr = pow(z, r);
  const std::array<HPComplex, 2> num1{q, b / a};
  const std::array<HPComplex, 2> den1{b, q / a};
  const std::array<HPComplex, 2> num2{ar * zr, qr / (ar * zr)};
  const std::array<HPComplex, 2> den2{zr, pow(b, r) / (ar * zr)};
  SeriesValue rhs = multiply(power(poch_ratio_infinite(num1, den1, q, ctx), r),
                             poch_ratio_infinite(num2, den2, qr, ctx));
  return {std::move(lhs), std::move(rhs)};
}

// ---------------------------------------------------------------------------
// Expansions

const char* to_string(E2Phase phase) {
  return phase == E2Phase::UpperRMinus1 ? "r-1" : "r";
}

std::optional<E2Phase> parse_e2_phase(std::string_view text) {
  if (text == "r-1") return E2Phase::UpperRMinus1;
  if (text == "r") return E2Phase::UpperR;
  return std::nullopt;
}

SeriesValue eval_e1_rhs(const Rational& alpha, const HPComplex& a, const HPComplex& q,
                        const HPComplex& t, int r, std::int64_t outer_cap,
                        const PrecisionContext& ctx) {
  // Outer indices k_1..k_{r-1} carry zeta^{i k_i}.
  std::vector<std::int64_t> exponents;
  for (int i = 1; i < r; ++i) exponents.push_back(i);
  return unilateral_expansion(alpha, a, q, t, r, outer_cap, exponents, HPComplex(1), ctx);
}

SeriesValue eval_e2_rhs(const Rational& alpha, const HPComplex& a, const HPComplex& q,
                        const HPComplex& t, int r, std::int64_t outer_cap, E2Phase phase,
                        const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  // Outer indices k_2..k_r; the last one carries exponent r or nothing.
  std::vector<std::int64_t> exponents;
  for (int i = 2; i < r; ++i) exponents.push_back(i);
  exponents.push_back(phase == E2Phase::UpperR ? r : 0);
  return unilateral_expansion(alpha, a, q, t, r, outer_cap, exponents,
                              root_of_unity(r, 1).value, ctx);
}

SeriesValue eval_12r_rhs(const Rational& alpha, const HPComplex& a, const HPComplex& b,
                         const HPComplex& q, const HPComplex& x, int r, std::int64_t outer_cap,
                         const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  require_order(r);
  require_nome(q);
  if (alpha.is_zero()) throw DomainError("the bilateral expansion needs alpha > 0");
  if (x.is_zero()) throw DomainError("the bilateral expansion needs x != 0");
  if (a.is_zero()) throw DomainError("the bilateral expansion needs a != 0");
  const std::int64_t cap = effective_cap(outer_cap, ctx);

  // (b, q/a; q)^r / (q, b/a; q)^r * (q^r, b^r a^-r; q^r) / (b^r, q^r a^-r; q^r)
  const HPComplex qr = pow(q, r);
  const HPComplex ar = pow(a, r);
  const HPComplex br = pow(b, r);
  const std::array<HPComplex, 2> num1{b, q / a};
  const std::array<HPComplex, 2> den1{q, b / a};
  const std::array<HPComplex, 2> num2{qr, br / ar};
  const std::array<HPComplex, 2> den2{br, qr / ar};
  const SeriesValue prefactor = multiply(power(poch_ratio_infinite(num1, den1, q, ctx), r),
                                         poch_ratio_infinite(num2, den2, qr, ctx));

  const Laurent full = bilateral_coefficients(a, b, q, ctx.max_window(), ctx);
  const std::int64_t K = decay_window(full, ctx);
  std::vector<std::int64_t> exponents;
  for (int i = 1; i < r; ++i) exponents.push_back(i);
  const Laurent shells = twisted_product(restrict_window(full, K), r, exponents);

  const HPComplex q_alpha = rational_power(q, alpha);
  auto shell = [&](std::int64_t s) {
    SeriesValue out;
    out.value = HPComplex(0);
    if (!shells.contains(s)) {
      out.converged = false;
      out.diagnostic = "shell outside the coefficient window";
      return out;
    }
    const HPComplex& g = shells.at(s);
    const HPComplex weight = pow(q_alpha, BigInt(s) * s) * pow(x, s);
    const SeriesValue inner = eval_B(alpha, a, b, q, x * pow(q_alpha, 2 * s), ctx);
    out.value = g * weight * inner.value;
    out.abs_error_estimate = abs(g * weight) * inner.abs_error_estimate;
    out.terms_used = inner.terms_used;
    out.converged = inner.converged;
    out.diagnostic = inner.diagnostic;
    return out;
  };
  const ShellSum up = sum_shells(0, 1, cap, shell, ctx);
  const ShellSum down = sum_shells(-1, -1, cap, shell, ctx);
  SeriesValue sum = add(up.total, down.total);
  // Window truncation: the dropped boundary shell of the coefficient sequence.
  sum.abs_error_estimate += abs(full.at(-K)) * abs(sum.value);
  SeriesValue out = multiply(prefactor, sum);
  finish(out, ctx);
  return out;
}

std::pair<SeriesValue, SeriesValue> eval_15r_both(const HPComplex& a, const HPComplex& q,
                                                  const HPComplex& x, int r, std::int64_t window,
                                                  std::int64_t outer_cap,
                                                  const PrecisionContext& ctx,
                                                  C15Prefactor prefactor_kind) {
  PrecisionScope scope(ctx);
  require_order(r);
  require_nome(q);
  if (x.is_zero()) throw DomainError("the bilateral Rogers-Ramanujan type sum needs x != 0");
  if (a.is_zero()) throw DomainError("the bilateral Rogers-Ramanujan type sum needs a != 0");
  if (window < 0 || window > ctx.max_window()) {
    throw ArgumentError("window must lie in [0, max_window]");
  }
  const std::int64_t cap = effective_cap(outer_cap, ctx);

  // Left side: sum_n q^{r^2 n^2} x^{rn} / (1 - a^r q^{rn}).
  const HPComplex qr = pow(q, r);
  const HPComplex ar = pow(a, r);
  const HPComplex xr = pow(x, r);
  const HPComplex weight_base = pow(q, r * r);
  const Real guard = ctx.pole_guard();
  TermFn lhs_terms = [&](std::int64_t n) {
    const HPComplex den = HPComplex(1) - ar * pow(qr, n);
    if (abs(den) < guard) throw PoleError("1 - a^r q^{rn} vanishes at n=" + std::to_string(n), n);
    return pow(weight_base, BigInt(n) * n) * pow(xr, n) / den;
  };
  SeriesValue lhs = sum_bilateral({lhs_terms, ctx});

  // Right side. The derived prefactor carries (q^r;q^r)^2/(q;q)^{2r}, the
  // printed one a single power.
  const int k = prefactor_kind == C15Prefactor::Derived ? 2 : 1;
  const std::array<HPComplex, 2> num1{a, q / a};
  const std::array<HPComplex, 2> den2{ar, qr / ar};
  SeriesValue prefactor = multiply(power(poch_infinite(qr, qr, ctx), k),
                                   power(inverse_poch_infinite(q, q, ctx), k * r));
  prefactor = multiply(prefactor, power(poch_multi_infinite(num1, q, ctx), r));
  prefactor = multiply(prefactor, poch_ratio_infinite({}, den2, qr, ctx));

  const Laurent full = reciprocal_factors(a, q, window > 0 ? window : ctx.max_window(), ctx);
  const std::int64_t K = window > 0 ? window : decay_window(full, ctx);
  std::vector<std::int64_t> exponents;
  for (int i = 1; i <= r; ++i) exponents.push_back(i);
  const Laurent shells = twisted_product(restrict_window(full, K), r, exponents);

  auto shell = [&](std::int64_t s) {
    SeriesValue out;
    out.value = HPComplex(0);
    if (!shells.contains(s)) {
      out.converged = false;
      out.diagnostic = "shell outside the coefficient window";
      return out;
    }
    out.value = shells.at(s) * pow(q, BigInt(s) * s) * pow(x, s);
    return out;
  };
  // Only shells with r | s survive the full twist, so runs of r - 1 vanishing
  // shells are expected.
  const ShellSum up = sum_shells(0, 1, cap, shell, ctx, 2 * r);
  const ShellSum down = sum_shells(-1, -1, cap, shell, ctx, 2 * r);
  SeriesValue sum = add(up.total, down.total);
  sum.abs_error_estimate += abs(full.at(-K)) * abs(sum.value);
  SeriesValue rhs = multiply(prefactor, sum);
  finish(lhs, ctx);
  finish(rhs, ctx);
  return {std::move(lhs), std::move(rhs)};
}

// ---------------------------------------------------------------------------
// Coefficient oracle

std::vector<CoefficientPair> coefficient_oracle(const HPComplex& a, const HPComplex& q, int r,
                                                int N, const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  if (r < 2 || r > 6) throw ArgumentError("coefficient oracle needs 2 <= r <= 6");
  if (N < 0 || N > 64) throw ArgumentError("coefficient oracle needs 0 <= N <= 64");
  require_nome(q);
  const auto degree = static_cast<std::size_t>(N);
  const std::vector<HPComplex> c = qbinomial_coefficients(a, q, degree);

  // Series i is sum_k c_k (zeta^i x)^k.
  std::vector<HPComplex> product = c;
  for (int i = 1; i < r; ++i) {
    std::vector<HPComplex> rotated(degree + 1);
    for (std::size_t k = 0; k <= degree; ++k) {
      rotated[k] = c[k] * root_of_unity(r, static_cast<std::int64_t>(i) * static_cast<std::int64_t>(k)).value;
    }
    product = truncated_product(product, rotated, degree);
  }

  std::vector<CoefficientPair> out;
  for (int n = 0; n <= N; ++n) {
    out.push_back({n, product[static_cast<std::size_t>(n)], multisum_u1_claim(a, q, r, n, ctx)});
  }
  return out;
}

}  // namespace qseries
