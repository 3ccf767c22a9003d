// q-shifted factorials (a;q)_n for finite (including negative) and infinite n.
//
// Conventions:
//   (a;q)_n      = prod_{j=0}^{n-1} (1 - a q^j),            n >= 0
//   (a;q)_{-m}   = 1 / (a q^{-m}; q)_m = 1 / prod_{j=1}^{m} (1 - a q^{-j})
//   (a;q)_inf    = prod_{j>=0} (1 - a q^j),                  |q| < 1
//
// The negative-index convention is the one under which Ramanujan's 1psi1 sum
// holds; bilateral evaluators depend on it.

#ifndef QSERIES_POCHHAMMER_HPP
#define QSERIES_POCHHAMMER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qseries/numeric.hpp"

namespace qseries {

/// A summed or multiplied value together with how far it can be trusted.
struct SeriesValue {
  HPComplex value;
  Real abs_error_estimate{0};
  long terms_used = 0;
  bool converged = true;
  /// Why convergence failed (which half, which cap), empty otherwise.
  std::string diagnostic;
};

/// Largest |q| accepted anywhere.
inline constexpr double kMaxNomeModulus = 0.999;

/// Throws DomainError unless |q| <= 0.999.
void require_nome(const HPComplex& q);

/// (a;q)_n for any integer n. Raises PoleError when a factor of a negative-index
/// denominator is within pole_guard of zero.
HPComplex poch_finite(const HPComplex& a, const HPComplex& q, std::int64_t n,
                      const PrecisionContext& ctx);

/// (a;q)_inf truncated where the tail bound drops below the context tolerance
/// (with guard digits). The bound 2|a||q|^N/(1-|q|) |partial| is reported as
/// abs_error_estimate.
SeriesValue poch_infinite(const HPComplex& a, const HPComplex& q, const PrecisionContext& ctx);

/// 1 / (a;q)_inf, raising PoleError when any factor is within pole_guard of zero.
SeriesValue inverse_poch_infinite(const HPComplex& a, const HPComplex& q,
                                  const PrecisionContext& ctx);

/// (b_1, ..., b_k; q)_n: product of the individual finite symbols.
HPComplex poch_multi(std::span<const HPComplex> bases, const HPComplex& q, std::int64_t n,
                     const PrecisionContext& ctx);

/// (b_1, ..., b_k; q)_inf with relative errors added.
SeriesValue poch_multi_infinite(std::span<const HPComplex> bases, const HPComplex& q,
                                const PrecisionContext& ctx);

/// (n_1, ..., n_k; q)_inf / (d_1, ..., d_l; q)_inf with pole checks on the denominator.
SeriesValue poch_ratio_infinite(std::span<const HPComplex> numerator,
                                std::span<const HPComplex> denominator, const HPComplex& q,
                                const PrecisionContext& ctx);

/// Product of two series values; relative error estimates add.
SeriesValue multiply(const SeriesValue& l, const SeriesValue& r);
/// Quotient of two series values; relative error estimates add.
SeriesValue divide(const SeriesValue& l, const SeriesValue& r);
/// Sum of two series values; absolute error estimates add.
SeriesValue add(const SeriesValue& l, const SeriesValue& r);
/// Integer power of a series value.
SeriesValue power(const SeriesValue& v, int e);

}  // namespace qseries

#endif  // QSERIES_POCHHAMMER_HPP
