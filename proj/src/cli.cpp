#include "qseries/cli.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "qseries/catalog.hpp"
#include "qseries/multisection.hpp"
#include "qseries/series.hpp"

namespace qseries {

namespace {

using nlohmann::ordered_json;

struct Globals {
  int precision = PrecisionContext::kDefaultPrecisionBits;
  int tolerance = PrecisionContext::kDefaultToleranceDigits;
  long max_terms = PrecisionContext::kDefaultMaxTerms;
  long max_window = PrecisionContext::kDefaultMaxWindow;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out_path;
  unsigned jobs = std::max(1U, std::thread::hardware_concurrency());
  std::string e2_phase = "r";
};

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Writes to --out when given, otherwise to the stream.
void emit(const Globals& g, std::ostream& out, const std::string& text) {
  if (g.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(g.out_path, std::ios::binary);
  if (!file) throw UsageError("cannot open output file '" + g.out_path + "'");
  file << text;
}

ordered_json complex_json(const HPComplex& z) {
  return {{"re", to_decimal(z.re())}, {"im", to_decimal(z.im())}};
}

std::string complex_text(const HPComplex& z) {
  const std::string im = to_decimal(z.im());
  return to_decimal(z.re()) + (im.front() == '-' ? " - " + im.substr(1) : " + " + im) + "i";
}

std::int64_t parse_integer(const std::string& name, const std::string& text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw UsageError("--" + name + " must be an integer");
  return v;
}

// ---------------------------------------------------------------------------
// eval

const std::vector<std::string> kEvalParams = {"alpha", "a", "b", "c", "q", "z",
                                              "t",     "x", "n", "r", "window"};

struct EvalArgs {
  std::string series;
  std::map<std::string, std::string> given;
};

class EvalInputs {
public:
  explicit EvalInputs(const EvalArgs& args) : args_(args) {}

  HPComplex complex(const std::string& name) const {
    auto it = args_.given.find(name);
    if (it == args_.given.end()) throw UsageError(args_.series + " needs --" + name);
    try {
      return parse_complex(it->second);
    } catch (const ArgumentError& e) {
      throw UsageError("--" + name + ": " + e.what());
    }
  }
  HPComplex complex_or(const std::string& name, const HPComplex& fallback) const {
    return args_.given.count(name) ? complex(name) : fallback;
  }
  std::int64_t integer(const std::string& name) const {
    auto it = args_.given.find(name);
    if (it == args_.given.end()) throw UsageError(args_.series + " needs --" + name);
    return parse_integer(name, it->second);
  }
  std::int64_t integer_or(const std::string& name, std::int64_t fallback) const {
    return args_.given.count(name) ? integer(name) : fallback;
  }
  Rational rational_or(const std::string& name, const Rational& fallback) const {
    auto it = args_.given.find(name);
    if (it == args_.given.end()) return fallback;
    try {
      return Rational::parse(it->second);
    } catch (const ArgumentError& e) {
      throw UsageError("--" + name + ": " + e.what());
    }
  }

private:
  const EvalArgs& args_;
};

SeriesValue exact(const HPComplex& v) {
  SeriesValue out;
  out.value = v;
  return out;
}

int order_arg(const EvalInputs& in) {
  const std::int64_t r = in.integer("r");
  if (r < 2 || r > 6) throw UsageError("--r must lie in [2, 6]");
  return static_cast<int>(r);
}

SeriesValue evaluate_series(const EvalArgs& args, const PrecisionContext& ctx) {
  const EvalInputs in(args);
  const std::string& s = args.series;
  if (s == "A") {
    return eval_A(in.rational_or("alpha", Rational(0)), in.complex("a"), in.complex("q"),
                  in.complex("t"), ctx);
  }
  if (s == "B") {
    return eval_B(in.rational_or("alpha", Rational(0)), in.complex("a"), in.complex("b"),
                  in.complex("q"), in.complex("x"), ctx);
  }
  if (s == "F") return eval_F(in.complex("a"), in.complex("c"), in.complex("q"), in.complex("z"), ctx);
  if (s == "2phi1") {
    return eval_2phi1(in.complex("a"), in.complex("b"), in.complex("c"), in.complex("q"),
                      in.complex("z"), ctx);
  }
  if (s == "1psi1") {
    return eval_1psi1(in.complex("a"), in.complex("b"), in.complex("q"), in.complex("z"), ctx);
  }
  if (s == "poch") return exact(poch_finite(in.complex("a"), in.complex("q"), in.integer("n"), ctx));
  if (s == "poch-inf") return poch_infinite(in.complex("a"), in.complex("q"), ctx);
  if (s == "multisum-u1") {
    const std::int64_t n = in.integer("n");
    if (n < 0) throw UsageError("--n must be nonnegative");
    return exact(multisum_u1(in.complex("a"), in.complex("q"), order_arg(in), n, ctx));
  }
  if (s == "multisum-b1") {
    const std::int64_t window = in.integer_or("window", 0);
    if (window < 0 || window > ctx.max_window()) throw UsageError("--window must lie in [0, max_window]");
    return multisum_b1(in.complex("a"), in.complex("b"), in.complex("q"), order_arg(in),
                       in.integer("n"), window, ctx);
  }
  throw UsageError("unknown series '" + s + "'");
}

std::string format_eval(const Globals& g, const std::string& series, const SeriesValue& v) {
  if (g.format == "json") {
    ordered_json doc{{"series", series},
                     {"value", complex_json(v.value)},
                     {"abs_error_estimate", to_decimal(v.abs_error_estimate, 6)},
                     {"terms_used", v.terms_used},
                     {"converged", v.converged},
                     {"diagnostic", v.diagnostic}};
    return doc.dump(2) + "\n";
  }
  if (g.format == "csv") {
    std::ostringstream os;
    os << "series,value_re,value_im,abs_error_estimate,terms_used,converged\n"
       << series << ',' << to_decimal(v.value.re()) << ',' << to_decimal(v.value.im()) << ','
       << to_decimal(v.abs_error_estimate, 6) << ',' << v.terms_used << ','
       << (v.converged ? "true" : "false") << '\n';
    return os.str();
  }
  std::ostringstream os;
  os << "value              " << complex_text(v.value) << '\n'
     << "abs_error_estimate " << to_decimal(v.abs_error_estimate, 6) << '\n'
     << "terms_used         " << v.terms_used << '\n';
  if (!v.converged) os << "not converged: " << v.diagnostic << '\n';
  return os.str();
}

int cmd_eval(const Globals& g, const EvalArgs& args, const PrecisionContext& ctx,
             std::ostream& out) {
  PrecisionScope scope(ctx);
  const SeriesValue v = evaluate_series(args, ctx);
  emit(g, out, format_eval(g, args.series, v));
  return v.converged ? kExitPass : kExitInconclusive;
}

// ---------------------------------------------------------------------------
// verify

std::vector<std::string> resolve_ids(const std::string& list) {
  std::vector<std::string> ids;
  if (list == "all") {
    for (const auto& spec : registry()) ids.push_back(spec.id);
    return ids;
  }
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b == std::string::npos) continue;
    item = item.substr(b, e - b + 1);
    if (find_identity(item) == nullptr) throw UsageError("unknown identity '" + item + "'");
    ids.push_back(item);
  }
  if (ids.empty()) throw UsageError("--ids is empty");
  return ids;
}

struct VerifyArgs {
  std::string ids = "all";
  long samples = 1;
  int perturb_digits = 0;
  bool timings = false;
  bool no_confirm = false;
};

int cmd_verify(const Globals& g, const VerifyArgs& args, const PrecisionContext& ctx,
               std::ostream& out) {
  SuiteOptions opt;
  opt.ids = resolve_ids(args.ids);
  if (args.samples < 0) throw UsageError("--samples must be nonnegative");
  opt.samples = args.samples;
  opt.seed = g.seed;
  opt.context = ctx;
  opt.eval.e2_phase = *parse_e2_phase(g.e2_phase);
  opt.eval.perturb_digits = args.perturb_digits;
  opt.jobs = g.jobs;
  opt.timings = args.timings;
  opt.confirm = !args.no_confirm;
  const Report report = run_suite(opt);
  const std::string body = g.format == "json"  ? report_json(report)
                           : g.format == "csv" ? report_csv(report)
                                               : report_text(report);
  emit(g, out, body);
  if (report.fail > 0) return kExitFail;
  if (report.inconclusive > 0) return kExitInconclusive;
  return kExitPass;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleArgs {
  int r = 2;
  int N = 8;
  std::string a = "0";
  std::string q;
};

int cmd_oracle(const Globals& g, const OracleArgs& args, const PrecisionContext& ctx,
               std::ostream& out) {
  if (args.r < 2 || args.r > 4) throw UsageError("--r must lie in [2, 4]");
  if (args.N < 0 || args.N > 64) throw UsageError("--N must lie in [0, 64]");
  PrecisionScope scope(ctx);
  HPComplex a;
  HPComplex q;
  try {
    a = parse_complex(args.a);
    q = parse_complex(args.q);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const auto rows = coefficient_oracle(a, q, args.r, args.N, ctx);
  bool all_match = true;
  ordered_json doc = ordered_json::array();
  std::ostringstream csv;
  std::ostringstream text;
  csv << "n,computed_re,computed_im,claimed_re,claimed_im,abs_diff\n";
  for (const auto& row : rows) {
    const Real diff = abs(row.computed - row.claimed);
    all_match = all_match && diff <= ctx.tolerance();
    doc.push_back({{"n", row.n},
                   {"computed", complex_json(row.computed)},
                   {"claimed", complex_json(row.claimed)},
                   {"abs_diff", to_decimal(diff, 6)}});
    csv << row.n << ',' << to_decimal(row.computed.re()) << ',' << to_decimal(row.computed.im())
        << ',' << to_decimal(row.claimed.re()) << ',' << to_decimal(row.claimed.im()) << ','
        << to_decimal(diff, 6) << '\n';
    text << row.n << "  " << complex_text(row.computed) << "  " << complex_text(row.claimed)
         << "  " << to_decimal(diff, 3) << '\n';
  }
  emit(g, out, g.format == "json" ? doc.dump(2) + "\n" : g.format == "csv" ? csv.str() : text.str());
  return all_match ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------------------
// list

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

int cmd_list(const Globals& g, std::ostream& out) {
  std::ostringstream os;
  if (g.format == "json") {
    ordered_json doc = ordered_json::array();
    for (const auto& s : registry()) {
      doc.push_back({{"id", s.id},
                     {"anchor", s.anchor},
                     {"kind", to_string(s.kind)},
                     {"parameters", s.parameters},
                     {"domain", s.domain_summary}});
    }
    os << doc.dump(2) << '\n';
  } else if (g.format == "csv") {
    os << "id,kind,parameters,domain,anchor\n";
    for (const auto& s : registry()) {
      os << s.id << ',' << to_string(s.kind) << ",\"" << join(s.parameters, " ") << "\",\""
         << s.domain_summary << "\",\"" << s.anchor << "\"\n";
    }
  } else {
    for (const auto& s : registry()) {
      os << s.id << '\t' << s.anchor << '\t' << join(s.parameters, ",") << '\t'
         << s.domain_summary << '\n';
    }
  }
  emit(g, out, os.str());
  return kExitPass;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"q-series evaluator and identity verifier", "qseries"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file (flags take precedence)");

  Globals g;
  app.add_option("--precision", g.precision, "working precision in bits")->capture_default_str();
  app.add_option("--tolerance", g.tolerance, "agreement tolerance in decimal digits")
      ->capture_default_str();
  app.add_option("--max-terms", g.max_terms, "term cap per sum")->capture_default_str();
  app.add_option("--max-window", g.max_window, "bilateral index cap")->capture_default_str();
  app.add_option("--seed", g.seed, "sampler seed")->capture_default_str();
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();
  app.add_option("--out", g.out_path, "write output to this file");
  app.add_option("--jobs", g.jobs, "worker threads for verify")->check(CLI::PositiveNumber);
  app.add_option("--e2-phase", g.e2_phase, "phase exponent variant of the E2 expansion")
      ->check(CLI::IsMember({"r-1", "r"}))
      ->capture_default_str();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "evaluate one series");
  eval->add_option("series", eval_args.series,
                   "A, B, F, 2phi1, 1psi1, poch, poch-inf, multisum-u1, multisum-b1")
      ->required();
  for (const auto& name : kEvalParams) {
    eval->add_option("--" + name, eval_args.given[name], "parameter " + name);
  }

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "verify identities on seeded samples");
  verify->add_option("--ids", verify_args.ids, "comma-separated ids or 'all'")->capture_default_str();
  verify->add_option("--samples", verify_args.samples, "samples per id")->capture_default_str();
  verify->add_option("--perturb-rhs", verify_args.perturb_digits,
                     "shift every right side by 10^-D relative (mutation check)");
  verify->add_flag("--timings", verify_args.timings, "record wall times in the report");
  verify->add_flag("--no-confirm", verify_args.no_confirm,
                   "skip the higher-precision confirmation of passes");

  OracleArgs oracle_args;
  CLI::App* oracle = app.add_subcommand("oracle", "coefficient convolution oracle");
  oracle->add_option("--r", oracle_args.r, "multisection order")->required();
  oracle->add_option("--N", oracle_args.N, "highest coefficient")->required();
  oracle->add_option("--a", oracle_args.a, "parameter a")->capture_default_str();
  oracle->add_option("--q", oracle_args.q, "nome q")->required();

  CLI::App* list = app.add_subcommand("list", "print the identity manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  // Drop eval parameters that were not given.
  for (const auto& name : kEvalParams) {
    if (eval->count("--" + name) == 0) eval_args.given.erase(name);
  }

  try {
    const PrecisionContext ctx = make_context(g.precision, g.tolerance, g.max_terms, g.max_window);
    if (*eval) return cmd_eval(g, eval_args, ctx, out);
    if (*verify) return cmd_verify(g, verify_args, ctx, out);
    if (*oracle) return cmd_oracle(g, oracle_args, ctx, out);
    if (*list) return cmd_list(g, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace qseries
