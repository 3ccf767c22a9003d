#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "json.hpp"
#include "oracle.hpp"
#include "qseries/catalog.hpp"
#include "support.hpp"

using namespace qseries;
using qtest::c;
using qtest::Env;
using qtest::rel_diff;
using cplx = std::complex<double>;

namespace {

const std::vector<std::string> kIds = {"RR1",   "RR2",   "QBINOM", "PSI11",  "U1",     "B1",    "PRODMS",
                                       "E1",    "E2",    "T12R",   "C15R",   "F2",     "F3",    "F4",
                                       "F7",    "QBINOM1", "LEM1-1", "LEM1-2", "LEM1-3", "LEM1-4", "LEM1-5"};

Params one_sample(const std::string& id, std::uint64_t seed = 1) {
  return draw_samples(*find_identity(id), 1, seed).front();
}

SuiteOptions suite(std::vector<std::string> ids, long samples, std::uint64_t seed) {
  SuiteOptions o;
  o.ids = std::move(ids);
  o.samples = samples;
  o.seed = seed;
  return o;
}

std::string without_timestamp(const Report& report) {
  auto doc = nlohmann::ordered_json::parse(report_json(report));
  doc.erase("started_at");
  return doc.dump();
}

}  // namespace

TEST_CASE("registry lists every identity once with an anchor") {
  std::vector<std::string> ids;
  for (const auto& spec : registry()) {
    ids.push_back(spec.id);
    CHECK_FALSE(spec.anchor.empty());
    CHECK_FALSE(spec.parameters.empty());
    CHECK_FALSE(spec.domain_summary.empty());
    CHECK(static_cast<bool>(spec.sampler));
    CHECK(static_cast<bool>(spec.domain));
    CHECK(static_cast<bool>(spec.lhs));
    CHECK(static_cast<bool>(spec.rhs));
  }
  CHECK(ids == kIds);
  CHECK(find_identity("RR1") == &registry().front());
  CHECK(find_identity("nope") == nullptr);
}

TEST_CASE("every domain rejects a nome outside the disc") {
  for (const auto& id : kIds) {
    CAPTURE(id);
    Params p = one_sample(id);
    p["q"] = cplx(1.5, 0);
    CHECK(find_identity(id)->domain(p).has_value());
    CHECK_THROWS_AS(instantiate(id, p, PrecisionContext()), DomainError);
  }
}

TEST_CASE("samplers stay inside their domains and are deterministic") {
  for (const auto& spec : registry()) {
    CAPTURE(spec.id);
    const auto drawn = draw_samples(spec, 25, 99);
    REQUIRE(drawn.size() == 25);
    for (const auto& p : drawn) {
      CHECK_FALSE(spec.domain(p).has_value());
      for (const auto& name : spec.parameters) CHECK(p.count(name) == 1);
    }
    const auto again = draw_samples(spec, 25, 99);
    for (std::size_t i = 0; i < drawn.size(); ++i) {
      for (const auto& [name, value] : drawn[i]) CHECK(format_param(value) == format_param(again[i].at(name)));
    }
  }
}

TEST_CASE("instantiate reports what is wrong") {
  const PrecisionContext ctx;
  CHECK_THROWS_AS(instantiate("XYZ", {}, ctx), ArgumentError);
  CHECK_THROWS_AS(instantiate("RR1", {}, ctx), ArgumentError);

  const Params f7{{"m", std::int64_t{3}}, {"n", std::int64_t{1}}, {"q", cplx(0.5, 0)}, {"x", cplx(0.5, 0)}};
  try {
    instantiate("F7", f7, ctx);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("F7 requires x != q^l") != std::string::npos);
  }

  const Params psi{{"a", cplx(0.9, 0)}, {"b", cplx(0.1, 0)}, {"q", cplx(0.4, 0)}, {"z", cplx(0.05, 0)}};
  CHECK_THROWS_AS(instantiate("PSI11", psi, ctx), DomainError);
}

TEST_CASE("check_case verdicts") {
  Env env;
  const Params rr{{"q", cplx(0.5, 0.2)}};
  const VerificationRecord pass = check_case(instantiate("RR1", rr, env.ctx));
  CHECK(pass.verdict == Verdict::Pass);
  CHECK(pass.rel_residual <= env.ctx.tolerance());
  CHECK(pass.diagnostics.empty());

  EvalOptions perturbed;
  perturbed.perturb_digits = 10;
  const VerificationRecord fail = check_case(instantiate("RR1", rr, env.ctx, perturbed));
  CHECK(fail.verdict == Verdict::Fail);
  CHECK(fail.rel_residual > Real("1e-11"));
  CHECK(fail.rel_residual < Real("1e-9"));

  // a = q passes the domain but sits on a zero of (q/a; q)_inf.
  const Params pole{{"a", cplx(0.5, 0)}, {"b", cplx(0.05, 0)}, {"q", cplx(0.5, 0)}, {"z", cplx(0.4, 0)}};
  CHECK_FALSE(find_identity("PSI11")->domain(pole).has_value());
  const VerificationRecord inc = check_case(instantiate("PSI11", pole, env.ctx));
  CHECK(inc.verdict == Verdict::Inconclusive);
  CHECK(inc.diagnostics.find("pole") != std::string::npos);
}

TEST_CASE("tight limits make a case inconclusive rather than failing") {
  const PrecisionContext tight = make_context(200, 30, 16, 200);
  qseries::PrecisionScope scope(tight);
  const VerificationRecord rec = check_case(instantiate("RR1", {{"q", cplx(0.98, 0)}}, tight));
  CHECK(rec.verdict == Verdict::Inconclusive);
  CHECK(rec.diagnostics.find("did not converge") != std::string::npos);
}

TEST_CASE("run_suite on the Rogers-Ramanujan pair") {
  const Report report = run_suite(suite({"RR1", "RR2"}, 4, 42));
  CHECK(report.pass == 8);
  CHECK(report.fail == 0);
  CHECK(report.inconclusive == 0);
  REQUIRE(report.records.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(report.records[i].id == (i < 4 ? "RR1" : "RR2"));
    CHECK(report.records[i].sample == static_cast<long>(i % 4));
    CHECK(report.records[i].confirmed_bits == 264);
    CHECK_FALSE(report.records[i].wall_ms.has_value());
  }
  CHECK(report.per_id.at("RR1").pass == 4);
  CHECK_FALSE(report.e2_experiment.has_value());

  CHECK(run_suite(suite({}, 4, 42)).records.empty());
  CHECK_THROWS_AS(run_suite(suite({"RR1", "bogus"}, 1, 1)), ArgumentError);
}

TEST_CASE("run_suite is deterministic and independent of the job count") {
  SuiteOptions one = suite({"QBINOM", "PSI11", "F4", "LEM1-1"}, 3, 2024);
  SuiteOptions three = one;
  three.jobs = 3;
  const Report a = run_suite(one);
  const Report b = run_suite(one);
  const Report p = run_suite(three);
  CHECK(without_timestamp(a) == without_timestamp(b));
  CHECK(without_timestamp(a) == without_timestamp(p));
  CHECK(report_csv(a) == report_csv(p));
}

TEST_CASE("perturbation flips passes to failures") {
  SuiteOptions o = suite({"RR1", "QBINOM", "F7"}, 3, 5);
  o.eval.perturb_digits = 25;
  const Report r = run_suite(o);
  CHECK(r.pass == 0);
  CHECK(r.fail == 9);
}

TEST_CASE("F4 and F7 finite sides") {
  Env env;
  const HPComplex q = c("0.45+0.2i"), x = c("0.3-0.4i");
  for (std::int64_t n = 1; n <= 10; ++n) {
    const HPComplex target = HPComplex(1) / oracle::poch(x, q, n);
    CHECK(rel_diff(f4_rhs(n, x, q, F4Form::Corrected, env.ctx).value, target) <= env.ctx.tolerance());
  }
  CHECK(rel_diff(f4_rhs(3, x, q, F4Form::AsPrinted, env.ctx).value, HPComplex(1) / oracle::poch(x, q, 3)) >
        Real("1e-3"));

  for (std::int64_t m = 0; m <= 6; ++m) {
    CHECK(f7_prefactor(m, m, x, q, env.ctx) == HPComplex(1));
    for (std::int64_t n = 0; n <= 6; ++n) {
      const HPComplex lhs = f7_sum(m, n, x, q, env.ctx).value;
      const HPComplex rhs = f7_prefactor(m, n, x, q, env.ctx) * f7_sum(n, m, x, q, env.ctx).value;
      CHECK(abs(lhs - rhs) <= env.ctx.tolerance() * std::max<Real>(Real(1), abs(rhs)));
    }
  }
  // Diagonal cases are checked with an exact unit prefactor.
  const Params diag{{"m", std::int64_t{4}}, {"n", std::int64_t{4}}, {"q", cplx(0.5, 0.1)}, {"x", cplx(0.3, 0)}};
  const VerificationRecord rec = check_case(instantiate("F7", diag, env.ctx));
  CHECK(rec.verdict == Verdict::Pass);
  CHECK(rec.abs_residual == Real(0));
}

TEST_CASE("second expansion phase experiment") {
  Env env;
  const auto samples = draw_samples(*find_identity("E2"), 3, 7);
  const E2Experiment e = run_e2_experiment(samples, env.ctx);
  REQUIRE(e.variants.size() == 2);
  for (const auto& v : e.variants) {
    CHECK(v.total == 3);
    CHECK(v.pass == 3);
  }
  // Both variants agree to rounding, so neither is singled out.
  CHECK(e.validated.size() == 2);
  CHECK_FALSE(e.identified.has_value());

  const Report r = run_suite(suite({"E2"}, 2, 7));
  REQUIRE(r.e2_experiment.has_value());
  const auto doc = nlohmann::ordered_json::parse(report_json(r));
  CHECK(doc["e2_phase_experiment"]["identified"].is_null());
  CHECK(doc["e2_phase_experiment"]["validated"].size() == 2);
}

TEST_CASE("report formats") {
  SuiteOptions o = suite({"RR1", "PSI11"}, 2, 3);
  o.timings = true;
  const Report r = run_suite(o);
  const auto doc = nlohmann::ordered_json::parse(report_json(r));
  for (const char* key : {"config", "started_at", "records", "summary"}) CHECK(doc.contains(key));
  CHECK(doc["records"].size() == 4);
  const auto& rec = doc["records"][0];
  for (const char* key : {"id", "sample", "params", "lhs", "rhs", "abs_residual", "rel_residual", "verdict",
                          "terms", "error_estimate", "confirmed_bits", "diagnostics", "wall_ms"}) {
    CHECK(rec.contains(key));
  }
  CHECK(rec["wall_ms"].is_number());
  CHECK(rec["lhs"].contains("re"));
  CHECK(rec["lhs"]["re"].is_string());
  CHECK(doc["summary"]["pass"] == 4);
  CHECK(doc["summary"]["per_id"]["PSI11"]["pass"] == 2);
  CHECK(doc["config"]["seed"] == 3);

  const auto untimed = nlohmann::ordered_json::parse(report_json(run_suite(suite({"RR1"}, 1, 3))));
  CHECK(untimed["records"][0]["wall_ms"].is_null());

  const std::string csv = report_csv(r);
  CHECK(csv.rfind("id,sample,verdict,rel_residual", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  const std::string text = report_text(r);
  CHECK(text.find("pass 4, fail 0, inconclusive 0") != std::string::npos);
}

TEST_CASE("every identity verifies on a few samples") {
  SuiteOptions o = suite(kIds, 3, 31337);
  o.confirm = false;
  const Report r = run_suite(o);
  for (const auto& [id, s] : r.per_id) {
    CAPTURE(id);
    CHECK(s.fail == 0);
    CHECK(s.pass + s.inconclusive == 3);
  }
  CHECK(r.pass >= 60);
}
