// Shared fixtures for the test binaries.

#ifndef QSERIES_TESTS_SUPPORT_HPP
#define QSERIES_TESTS_SUPPORT_HPP

#include <string>

#include "qseries/numeric.hpp"

namespace qtest {

using qseries::HPComplex;
using qseries::PrecisionContext;
using qseries::Real;

// Default context with its precision installed for the lifetime of the object.
struct Env {
  PrecisionContext ctx;
  qseries::PrecisionScope scope{ctx};
  Env() = default;
  explicit Env(PrecisionContext c) : ctx(c) {}
};

inline HPComplex c(const std::string& text) { return qseries::parse_complex(text); }
inline HPComplex c(const std::string& re, const std::string& im) {
  return HPComplex(Real(re), Real(im));
}

inline Real rel_diff(const HPComplex& value, const HPComplex& reference) {
  return abs(value - reference) / std::max<Real>(Real(1), abs(reference));
}

inline Real ten_to(int e) { return boost::multiprecision::pow(Real(10), e); }

inline bool agree(const HPComplex& value, const HPComplex& reference, int digits) {
  return rel_diff(value, reference) <= ten_to(-digits);
}

inline double as_double(const Real& v) { return v.convert_to<double>(); }

}  // namespace qtest

#endif  // QSERIES_TESTS_SUPPORT_HPP
