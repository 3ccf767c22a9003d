#include <sstream>

#include "json.hpp"
#include "qseries/catalog.hpp"

namespace qseries {

namespace {

using nlohmann::ordered_json;

// Residuals are reported with a few significant digits; values at full precision.
constexpr int kResidualDigits = 6;

ordered_json complex_json(const HPComplex& z) {
  return {{"re", to_decimal(z.re())}, {"im", to_decimal(z.im())}};
}

ordered_json param_json(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* r = std::get_if<Rational>(&v)) return r->str();
  const auto& c = std::get<std::complex<double>>(v);
  // Shortest round-trip decimal of each double component.
  const std::string re = format_param(std::complex<double>(c.real(), 0));
  const std::string im = format_param(std::complex<double>(c.imag(), 0));
  return {{"re", re}, {"im", im}};
}

ordered_json params_json(const Params& params) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, value] : params) out[name] = param_json(value);
  return out;
}

ordered_json config_json(const SuiteOptions& o) {
  ordered_json ids = ordered_json::array();
  for (const auto& id : o.ids) ids.push_back(id);
  return {{"precision_bits", o.context.precision_bits()},
          {"tolerance_digits", o.context.tolerance_digits()},
          {"max_terms", o.context.max_terms()},
          {"max_window", o.context.max_window()},
          {"seed", o.seed},
          {"samples", o.samples},
          {"ids", ids},
          {"e2_phase", to_string(o.eval.e2_phase)},
          {"perturb_digits", o.eval.perturb_digits},
          {"confirm", o.confirm}};
}

ordered_json record_json(const VerificationRecord& r) {
  ordered_json out;
  out["id"] = r.id;
  out["sample"] = r.sample;
  out["params"] = params_json(r.params);
  out["lhs"] = complex_json(r.lhs.value);
  out["rhs"] = complex_json(r.rhs.value);
  out["abs_residual"] = to_decimal(r.abs_residual, kResidualDigits);
  out["rel_residual"] = to_decimal(r.rel_residual, kResidualDigits);
  out["verdict"] = to_string(r.verdict);
  out["terms"] = {{"lhs", r.lhs.terms_used}, {"rhs", r.rhs.terms_used}};
  out["error_estimate"] = {{"lhs", to_decimal(r.lhs.abs_error_estimate, kResidualDigits)},
                           {"rhs", to_decimal(r.rhs.abs_error_estimate, kResidualDigits)}};
  out["confirmed_bits"] = r.confirmed_bits;
  out["diagnostics"] = r.diagnostics;
  out["wall_ms"] = r.wall_ms ? ordered_json(*r.wall_ms) : ordered_json(nullptr);
  return out;
}

ordered_json e2_json(const E2Experiment& e) {
  ordered_json variants = ordered_json::array();
  for (const auto& v : e.variants) {
    variants.push_back({{"phase", to_string(v.phase)},
                        {"pass", v.pass},
                        {"total", v.total},
                        {"max_rel_residual", to_decimal(v.max_rel_residual, kResidualDigits)}});
  }
  ordered_json validated = ordered_json::array();
  for (E2Phase p : e.validated) validated.push_back(to_string(p));
  return {{"variants", variants},
          {"validated", validated},
          {"identified", e.identified ? ordered_json(to_string(*e.identified)) : ordered_json(nullptr)}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string params_inline(const Params& params) {
  std::string out;
  for (const auto& [name, value] : params) {
    if (!out.empty()) out += ' ';
    out += name + "=" + format_param(value);
  }
  return out;
}

}  // namespace

std::string report_json(const Report& report) {
  ordered_json doc;
  doc["config"] = config_json(report.options);
  doc["started_at"] = report.started_at;
  ordered_json records = ordered_json::array();
  for (const auto& r : report.records) records.push_back(record_json(r));
  doc["records"] = records;
  ordered_json per_id = ordered_json::object();
  for (const auto& [id, s] : report.per_id) {
    per_id[id] = {{"pass", s.pass},
                  {"fail", s.fail},
                  {"inconclusive", s.inconclusive},
                  {"max_rel_residual", to_decimal(s.max_rel_residual, kResidualDigits)}};
  }
  doc["summary"] = {{"pass", report.pass},
                    {"fail", report.fail},
                    {"inconclusive", report.inconclusive},
                    {"max_rel_residual", to_decimal(report.max_rel_residual, kResidualDigits)},
                    {"per_id", per_id}};
  if (report.e2_experiment) doc["e2_phase_experiment"] = e2_json(*report.e2_experiment);
  return doc.dump(2) + "\n";
}

std::string report_csv(const Report& report) {
  std::ostringstream os;
  os << "id,sample,verdict,rel_residual,abs_residual,lhs_re,lhs_im,rhs_re,rhs_im,lhs_terms,"
        "rhs_terms,confirmed_bits,params,diagnostics\n";
  for (const auto& r : report.records) {
    os << csv_field(r.id) << ',' << r.sample << ',' << to_string(r.verdict) << ','
       << to_decimal(r.rel_residual, kResidualDigits) << ','
       << to_decimal(r.abs_residual, kResidualDigits) << ',' << to_decimal(r.lhs.value.re()) << ','
       << to_decimal(r.lhs.value.im()) << ',' << to_decimal(r.rhs.value.re()) << ','
       << to_decimal(r.rhs.value.im()) << ',' << r.lhs.terms_used << ',' << r.rhs.terms_used << ','
       << r.confirmed_bits << ',' << csv_field(params_inline(r.params)) << ','
       << csv_field(r.diagnostics) << '\n';
  }
  return os.str();
}

std::string report_text(const Report& report) {
  std::ostringstream os;
  for (const auto& r : report.records) {
    os << r.id << " #" << r.sample << "  " << to_string(r.verdict)
       << "  rel=" << to_decimal(r.rel_residual, 3) << "  [" << params_inline(r.params) << "]";
    if (!r.diagnostics.empty()) os << "  " << r.diagnostics;
    os << '\n';
  }
  os << "pass " << report.pass << ", fail " << report.fail << ", inconclusive "
     << report.inconclusive << ", max rel residual " << to_decimal(report.max_rel_residual, 3)
     << '\n';
  if (report.e2_experiment) {
    const E2Experiment& e = *report.e2_experiment;
    os << "E2 phase variants:";
    for (const auto& v : e.variants) {
      os << "  " << to_string(v.phase) << " " << v.pass << "/" << v.total;
    }
    os << "  identified: " << (e.identified ? to_string(*e.identified) : "none") << '\n';
  }
  return os.str();
}

}  // namespace qseries
