// Adaptive summation of unilateral and bilateral q-series.
//
// Terms come from first-order recurrences (one ratio per step) rather than
// fresh Pochhammer products, so a sum of N terms costs O(N) operations.

#ifndef QSERIES_SERIES_HPP
#define QSERIES_SERIES_HPP

#include <cstdint>
#include <functional>

#include "qseries/numeric.hpp"
#include "qseries/pochhammer.hpp"

namespace qseries {

/// k-th (or n-th, for bilateral sums) summand. The engine calls it from one
/// thread per evaluation in increasing |index| order, so recurrence state may
/// live inside the closure.
using TermFn = std::function<HPComplex(std::int64_t)>;

struct UnilateralSpec {
  TermFn term_at;
  PrecisionContext context;
  /// Term cap; 0 means context.max_terms().
  long cap = 0;
};

struct BilateralSpec {
  TermFn term_at;
  PrecisionContext context;
};

/// Sums term_at(0), term_at(1), ... and stops once three consecutive terms are
/// each below 10^-(tol+5) (1 + |partial|) and the last term is no larger than
/// the one before it. The error estimate extrapolates the tail geometrically
/// from the last two magnitudes and adds accumulated rounding.
SeriesValue sum_unilateral(const UnilateralSpec& spec);

/// Sums the n >= 0 half and then the n <= -1 half with the unilateral rule,
/// each capped at max_window terms. Errors add.
SeriesValue sum_bilateral(const BilateralSpec& spec);

// ---------------------------------------------------------------------------
// Term generators (exposed for termwise comparisons)

/// (a;q)_k (-1)^k q^{k(k-1)/2} z^k / (q, c; q)_k
TermFn f_terms(const HPComplex& a, const HPComplex& c, const HPComplex& q, const HPComplex& z,
               const PrecisionContext& ctx);

/// (a;q)_n q^{alpha n^2} t^n / (q;q)_n
TermFn a_terms(const Rational& alpha, const HPComplex& a, const HPComplex& q, const HPComplex& t);

/// (a;q)_n / (b;q)_n q^{alpha n^2} x^n for n in Z.
TermFn b_terms(const Rational& alpha, const HPComplex& a, const HPComplex& b, const HPComplex& q,
               const HPComplex& x, const PrecisionContext& ctx);

// ---------------------------------------------------------------------------
// Evaluators

/// 2phi1(a, b; c; q, z) = sum (a;q)_k (b;q)_k / ((c;q)_k (q;q)_k) z^k, |z| < 1.
SeriesValue eval_2phi1(const HPComplex& a, const HPComplex& b, const HPComplex& c,
                       const HPComplex& q, const HPComplex& z, const PrecisionContext& ctx);

/// Right side of Heine's transformation of 2phi1(a, b; c; q, z):
/// (c/b, bz; q)_inf / (c, z; q)_inf * 2phi1(abz/c, b; bz; q, c/b). Needs |c/b| < 1.
SeriesValue heine_transformed_2phi1(const HPComplex& a, const HPComplex& b, const HPComplex& c,
                                    const HPComplex& q, const HPComplex& z,
                                    const PrecisionContext& ctx);

/// A_q^(alpha)(a; t) = sum_{n>=0} (a;q)_n q^{alpha n^2} t^n / (q;q)_n.
/// alpha = 0 needs |t| <= 0.95.
SeriesValue eval_A(const Rational& alpha, const HPComplex& a, const HPComplex& q,
                   const HPComplex& t, const PrecisionContext& ctx);

/// B_q^(alpha)(a, b; x) = sum_{n in Z} (a;q)_n / (b;q)_n q^{alpha n^2} x^n, x != 0.
/// alpha = 0 needs |b/a| + 0.05 <= |x| <= 0.95.
SeriesValue eval_B(const Rational& alpha, const HPComplex& a, const HPComplex& b,
                   const HPComplex& q, const HPComplex& x, const PrecisionContext& ctx);

/// Ramanujan's 1psi1 series, i.e. B at alpha = 0.
SeriesValue eval_1psi1(const HPComplex& a, const HPComplex& b, const HPComplex& q,
                       const HPComplex& z, const PrecisionContext& ctx);

/// (q, b/a, az, q/(az); q)_inf / (b, q/a, z, b/(az); q)_inf
SeriesValue psi11_product(const HPComplex& a, const HPComplex& b, const HPComplex& q,
                          const HPComplex& z, const PrecisionContext& ctx);

/// F(a, c; z) = sum (a;q)_k (-1)^k q^{k(k-1)/2} z^k / (q, c; q)_k. Entire in z.
SeriesValue eval_F(const HPComplex& a, const HPComplex& c, const HPComplex& q, const HPComplex& z,
                   const PrecisionContext& ctx);

/// F(q^-n, c; z): the finite sum over k = 0..n, added exactly with no
/// truncation. Poles in (c;q)_k raise PoleError; cancellation beyond the
/// tolerance leaves converged false.
SeriesValue eval_terminating_F(std::int64_t n, const HPComplex& c, const HPComplex& q,
                               const HPComplex& z, const PrecisionContext& ctx);

/// sum_k (q;q)_{n+k-1} / ((q;q)_k (q;q)_{n-1}) x^k, the expansion of 1/(x;q)_n.
/// n = 0 gives 1. Needs |x| <= 0.95.
SeriesValue eval_gaussian_series(std::int64_t n, const HPComplex& x, const HPComplex& q,
                                 const PrecisionContext& ctx);

/// Which exponent of q the one-variable function A_q(z) carries.
enum class AiryVariant {
  Quadratic,  ///< sum q^{n^2} (-z)^n / (q;q)_n = A_q^(1)(0; -z)
  AsPrinted,  ///< sum q^n (-z)^n / (q;q)_n, needs |qz| <= 0.95
};

/// Ramanujan's function A_q(z).
SeriesValue eval_ramanujan_A(const HPComplex& q, const HPComplex& z, AiryVariant variant,
                             const PrecisionContext& ctx);

}  // namespace qseries

#endif  // QSERIES_SERIES_HPP
