// Executable identity catalog and the verification harness.
//
// Each registered identity pairs two independent evaluators with a domain
// predicate and a seeded sampler. Sampled parameters are IEEE doubles, so a
// case denotes the same point at every working precision.

#ifndef QSERIES_CATALOG_HPP
#define QSERIES_CATALOG_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qseries/multisection.hpp"
#include "qseries/numeric.hpp"
#include "qseries/pochhammer.hpp"

namespace qseries {

using ParamValue = std::variant<std::int64_t, Rational, std::complex<double>>;
using Params = std::map<std::string, ParamValue>;

std::string format_param(const ParamValue& value);

enum class IdentityKind { Infinite, Finite, Bilateral, MultiSum };

const char* to_string(IdentityKind kind);

/// Settings that change what an evaluator computes rather than where.
struct EvalOptions {
  E2Phase e2_phase = E2Phase::UpperR;
  /// When positive, the right side is shifted by 10^-digits * max(1, |rhs|).
  int perturb_digits = 0;
};

/// mt19937_64 with a fixed mapping to doubles, so draws do not depend on the
/// standard library's distribution implementations.
class SampleRng {
public:
  explicit SampleRng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi);
  std::int64_t integer(std::int64_t lo, std::int64_t hi);  // inclusive
  /// Modulus uniform in [lo, hi], phase uniform in [0, 2 pi).
  std::complex<double> polar(double lo, double hi);

private:
  std::mt19937_64 engine_;
};

using Evaluator =
    std::function<SeriesValue(const Params&, const PrecisionContext&, const EvalOptions&)>;

struct IdentitySpec {
  std::string id;
  std::string anchor;  ///< the statement being checked
  IdentityKind kind = IdentityKind::Infinite;
  std::vector<std::string> parameters;
  std::string domain_summary;
  bool real_q = false;
  std::function<Params(SampleRng&)> sampler;
  /// Empty when the point is admissible, otherwise the violated constraint.
  std::function<std::optional<std::string>(const Params&)> domain;
  Evaluator lhs;
  Evaluator rhs;
};

const std::vector<IdentitySpec>& registry();

/// nullptr when unknown.
const IdentitySpec* find_identity(std::string_view id);

struct IdentityCase {
  const IdentitySpec* spec = nullptr;
  Params params;
  PrecisionContext context;
  EvalOptions options;
};

/// Throws ArgumentError for unknown ids and DomainError naming the violated
/// constraint.
IdentityCase instantiate(std::string_view id, Params params, const PrecisionContext& ctx,
                         EvalOptions options = {});

enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(Verdict verdict);

struct VerificationRecord {
  std::string id;
  long sample = 0;
  Params params;
  SeriesValue lhs;
  SeriesValue rhs;
  Real abs_residual{0};
  Real rel_residual{0};
  Verdict verdict = Verdict::Inconclusive;
  std::string diagnostics;
  std::optional<double> wall_ms;
  /// Precision of the confirming re-run, 0 when none took place.
  long confirmed_bits = 0;
};

/// Evaluates both sides. Poles and domain failures during evaluation become
/// inconclusive records.
VerificationRecord check_case(const IdentityCase& c);

struct SuiteOptions {
  std::vector<std::string> ids;
  long samples = 1;
  std::uint64_t seed = 0;
  PrecisionContext context;
  EvalOptions eval;
  unsigned jobs = 1;
  bool timings = false;
  /// Re-check each pass at precision_bits + 64.
  bool confirm = true;
};

struct IdSummary {
  long pass = 0;
  long fail = 0;
  long inconclusive = 0;
  Real max_rel_residual{0};
};

struct E2VariantResult {
  E2Phase phase;
  long pass = 0;
  long total = 0;
  Real max_rel_residual{0};
};

/// Both phase variants of the second expansion checked on the same samples.
struct E2Experiment {
  std::vector<E2VariantResult> variants;
  std::vector<E2Phase> validated;   ///< variants passing every sample
  std::optional<E2Phase> identified;  ///< set iff exactly one variant validated
};

E2Experiment run_e2_experiment(const std::vector<Params>& samples, const PrecisionContext& ctx);

struct Report {
  SuiteOptions options;
  std::string started_at;
  std::vector<VerificationRecord> records;
  long pass = 0;
  long fail = 0;
  long inconclusive = 0;
  Real max_rel_residual{0};
  std::map<std::string, IdSummary> per_id;
  std::optional<E2Experiment> e2_experiment;
};

/// Samples every id, checks all cases (on options.jobs threads) and reduces in
/// (id order, sample index) order. Throws ArgumentError for unknown ids.
Report run_suite(const SuiteOptions& options);

/// The parameter records run_suite would draw for one id.
std::vector<Params> draw_samples(const IdentitySpec& spec, long count, std::uint64_t seed);

std::string report_json(const Report& report);
std::string report_csv(const Report& report);
std::string report_text(const Report& report);

// ---------------------------------------------------------------------------
// Finite sides used by the catalog

/// Which right side of the finite evaluation of sum [n+k-1, k]_q x^k.
enum class F4Form {
  Corrected,  ///< sum_k (q^-n;q)_k (-1)^k q^{k(k-1)/2} (x q^n)^k / ((q;q)_k (x;q)_k)
  AsPrinted,  ///< sum_k (q^-n;q)_k (-1)^k q^{k(k-1)/2} x^k / ((q;q)_k (x q^-n;q)_k)
};

SeriesValue f4_rhs(std::int64_t n, const HPComplex& x, const HPComplex& q, F4Form form,
                   const PrecisionContext& ctx);

/// sum_{k<=m} (q^-m;q)_k (-1)^k q^{k(k-2n-1)/2} x^k / (q, x q^-m; q)_k
SeriesValue f7_sum(std::int64_t m, std::int64_t n, const HPComplex& x, const HPComplex& q,
                   const PrecisionContext& ctx);

/// (x q^-n; q)_inf / (x q^-m; q)_inf as a finite product; exactly 1 when m = n.
HPComplex f7_prefactor(std::int64_t m, std::int64_t n, const HPComplex& x, const HPComplex& q,
                       const PrecisionContext& ctx);

}  // namespace qseries

#endif  // QSERIES_CATALOG_HPP
