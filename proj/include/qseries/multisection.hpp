// Roots-of-unity multisection of q-binomial and 1psi1 products.
//
// The r-fold sums over compositions
//
//   sum_{k in C_r(n)} prod_i (a;q)_{k_i} / (b;q)_{k_i} * zeta_r^{sum_i i k_i}
//
// vanish unless r | n, and the remaining coefficients are q^r-analogues of the
// single-sum coefficients. Multi-sum expansions of A_{q^r}^{(r alpha)} and
// B_{q^r}^{(r alpha)} are evaluated shell by shell in s = sum of the outer
// indices, because the weight q^{alpha s^2} controls decay in s rather than in
// the individual indices.

#ifndef QSERIES_MULTISECTION_HPP
#define QSERIES_MULTISECTION_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "qseries/numeric.hpp"
#include "qseries/pochhammer.hpp"

namespace qseries {

/// An integer r-tuple and its total.
struct Composition {
  std::vector<std::int64_t> parts;
  std::int64_t total = 0;

  friend bool operator==(const Composition&, const Composition&) = default;
};

/// All nonnegative r-tuples summing to n, lexicographic. Empty for n < 0.
std::vector<Composition> compositions_nonneg(int r, std::int64_t n);

/// All integer r-tuples with |k_i| <= K summing to n, lexicographic.
/// Empty when |n| > rK.
std::vector<Composition> compositions_windowed(int r, std::int64_t n, std::int64_t window);

/// Left side of the unilateral multisection identity: the exact finite sum over
/// C_r^+(n) of prod (a;q)_{k_i}/(q;q)_{k_i} zeta_r^{sum i k_i}. r >= 2, n >= 0.
HPComplex multisum_u1(const HPComplex& a, const HPComplex& q, int r, std::int64_t n,
                      const PrecisionContext& ctx);

/// Right side of the unilateral identity: 0 if r does not divide n, otherwise
/// (a^r;q^r)_m / (q^r;q^r)_m with n = rm.
HPComplex multisum_u1_claim(const HPComplex& a, const HPComplex& q, int r, std::int64_t n,
                            const PrecisionContext& ctx);

/// Left side of the bilateral multisection identity over C_r(n), windowed to
/// |k_i| <= window. window = 0 picks the smallest window whose boundary
/// contribution is below 10^-(tol+10), capped at max_window. converged is false
/// when the boundary shell of the final window is not small.
SeriesValue multisum_b1(const HPComplex& a, const HPComplex& b, const HPComplex& q, int r,
                        std::int64_t n, std::int64_t window, const PrecisionContext& ctx);

/// (q, b/a; q)_inf^r / (b, q/a; q)_inf^r * (b^r, q^r a^-r; q^r)_inf / (q^r, b^r a^-r; q^r)_inf
SeriesValue b1_prefactor(const HPComplex& a, const HPComplex& b, const HPComplex& q, int r,
                         const PrecisionContext& ctx);

/// Right side of the bilateral identity: 0 if r does not divide n, otherwise
/// b1_prefactor * (a^r;q^r)_m / (b^r;q^r)_m.
SeriesValue multisum_b1_claim(const HPComplex& a, const HPComplex& b, const HPComplex& q, int r,
                              std::int64_t n, const PrecisionContext& ctx);

// ---------------------------------------------------------------------------
// Product identities behind the multisection sums

/// prod_{i<r} (a zeta^i t; q)_inf / (zeta^i t; q)_inf and (a^r t^r; q^r)_inf / (t^r; q^r)_inf.
std::pair<SeriesValue, SeriesValue> product_multisection(const HPComplex& a, const HPComplex& q,
                                                         const HPComplex& t, int r,
                                                         const PrecisionContext& ctx);

/// The bilateral analogue: product of rotated 1psi1 product sides against
/// (q,b/a)^r/(b,q/a)^r * (a^r z^r, q^r a^-r z^-r; q^r) / (z^r, b^r a^-r z^-r; q^r).
std::pair<SeriesValue, SeriesValue> bilateral_product_multisection(
    const HPComplex& a, const HPComplex& b, const HPComplex& q, const HPComplex& z, int r,
    const PrecisionContext& ctx);

// ---------------------------------------------------------------------------
// Multi-sum expansions

/// Phase exponent used for the outer indices k_2..k_r of the second expansion.
enum class E2Phase {
  UpperRMinus1,  ///< zeta^{sum_{i=2}^{r-1} i k_i}
  UpperR,        ///< zeta^{sum_{i=2}^{r} i k_i}
};

const char* to_string(E2Phase phase);
std::optional<E2Phase> parse_e2_phase(std::string_view text);

/// (r-1)-fold sum over k_1..k_{r-1} >= 0 with inner A_q^(alpha)(a; q^{2 alpha s} t),
/// s = sum k_i. Equals A_{q^r}^{(r alpha)}(a^r; t^r). outer_cap bounds s
/// (0: max_window). alpha = 0 requires |t| < 0.8.
SeriesValue eval_e1_rhs(const Rational& alpha, const HPComplex& a, const HPComplex& q,
                        const HPComplex& t, int r, std::int64_t outer_cap,
                        const PrecisionContext& ctx);

/// (r-1)-fold sum over k_2..k_r >= 0 with inner A_q^(alpha)(a; zeta q^{2 alpha s} t).
SeriesValue eval_e2_rhs(const Rational& alpha, const HPComplex& a, const HPComplex& q,
                        const HPComplex& t, int r, std::int64_t outer_cap, E2Phase phase,
                        const PrecisionContext& ctx);

/// Full right side of the bilateral expansion: prefactor times the (r-1)-fold
/// bilateral sum with inner B_q^(alpha)(a, b; x q^{2 alpha s}). Equals
/// B_{q^r}^{(r alpha)}(a^r, b^r; x^r). alpha > 0, x != 0.
SeriesValue eval_12r_rhs(const Rational& alpha, const HPComplex& a, const HPComplex& b,
                         const HPComplex& q, const HPComplex& x, int r, std::int64_t outer_cap,
                         const PrecisionContext& ctx);

/// Prefactor of the bilateral Rogers-Ramanujan type identity.
enum class C15Prefactor {
  Derived,    ///< (q^r;q^r)^2/(q;q)^{2r} (a,q/a;q)^r/(a^r,q^r a^-r;q^r), the b = aq case of 12r
  AsPrinted,  ///< (q^r;q^r)/(q;q)^r (a,q/a;q)^r/(a^r,q^r a^-r;q^r)
};

/// Both sides of that identity: sum_n q^{r^2 n^2} x^{rn}/(1 - a^r q^{rn}) and the
/// prefactor times the r-fold sum of zeta^{sum i k_i} q^{s^2} x^s / prod (1 - a q^{k_i}).
/// window bounds each |k_i| (0: automatic).
std::pair<SeriesValue, SeriesValue> eval_15r_both(const HPComplex& a, const HPComplex& q,
                                                  const HPComplex& x, int r, std::int64_t window,
                                                  std::int64_t outer_cap,
                                                  const PrecisionContext& ctx,
                                                  C15Prefactor prefactor = C15Prefactor::Derived);

// ---------------------------------------------------------------------------
// Coefficient oracle

struct CoefficientPair {
  std::int64_t n;
  HPComplex computed;  ///< coefficient of x^n in the truncated product
  HPComplex claimed;   ///< 0 or (a^r;q^r)_m/(q^r;q^r)_m
};

/// Multiplies the r truncated series sum_k (a;q)_k/(q;q)_k (zeta^i x)^k,
/// i = 0..r-1, as polynomials of degree N and pairs each coefficient with the
/// multisection claim. r in [2, 6], 0 <= N <= 64.
std::vector<CoefficientPair> coefficient_oracle(const HPComplex& a, const HPComplex& q, int r,
                                                int N, const PrecisionContext& ctx);

}  // namespace qseries

#endif  // QSERIES_MULTISECTION_HPP
