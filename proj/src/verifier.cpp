#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <set>
#include <thread>

#include "qseries/catalog.hpp"

namespace qseries {

namespace {

// FNV-1a, so each id draws from its own stream regardless of suite order.
std::uint64_t stream_seed(std::uint64_t seed, std::string_view id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return seed ^ h;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void append(std::string& diag, const std::string& text) {
  if (text.empty()) return;
  diag += diag.empty() ? text : "; " + text;
}

void judge(VerificationRecord& rec, const PrecisionContext& ctx) {
  const HPComplex diff = rec.lhs.value - rec.rhs.value;
  rec.abs_residual = abs(diff);
  rec.rel_residual = rec.abs_residual / std::max<Real>(Real(1), abs(rec.rhs.value));
  if (!rec.lhs.converged || !rec.rhs.converged) {
    rec.verdict = Verdict::Inconclusive;
    if (!rec.lhs.converged) append(rec.diagnostics, "lhs did not converge: " + rec.lhs.diagnostic);
    if (!rec.rhs.converged) append(rec.diagnostics, "rhs did not converge: " + rec.rhs.diagnostic);
    return;
  }
  rec.verdict = rec.rel_residual <= ctx.tolerance() ? Verdict::Pass : Verdict::Fail;
}

// Runs `work(i)` for i in [0, count) on up to `jobs` threads.
template <typename Work>
void parallel_for(std::size_t count, unsigned jobs, Work work) {
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) work(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

VerificationRecord check_case(const IdentityCase& c) {
  VerificationRecord rec;
  rec.id = c.spec->id;
  rec.params = c.params;
  PrecisionScope scope(c.context);
  try {
    rec.lhs = c.spec->lhs(c.params, c.context, c.options);
    rec.rhs = c.spec->rhs(c.params, c.context, c.options);
  } catch (const PoleError& e) {
    rec.verdict = Verdict::Inconclusive;
    rec.diagnostics = std::string("pole: ") + e.what();
    return rec;
  } catch (const QSeriesError& e) {
    rec.verdict = Verdict::Inconclusive;
    rec.diagnostics = std::string("evaluation error: ") + e.what();
    return rec;
  }
  if (c.options.perturb_digits > 0) {
    const Real shift = boost::multiprecision::pow(Real(10), -c.options.perturb_digits) *
                       std::max<Real>(Real(1), abs(rec.rhs.value));
    rec.rhs.value += HPComplex(shift);
  }
  judge(rec, c.context);
  return rec;
}

std::vector<Params> draw_samples(const IdentitySpec& spec, long count, std::uint64_t seed) {
  SampleRng rng(stream_seed(seed, spec.id));
  std::vector<Params> out;
  out.reserve(static_cast<std::size_t>(std::max(0L, count)));
  for (long i = 0; i < count; ++i) out.push_back(spec.sampler(rng));
  return out;
}

E2Experiment run_e2_experiment(const std::vector<Params>& samples, const PrecisionContext& ctx) {
  E2Experiment out;
  PrecisionScope scope(ctx);
  for (E2Phase phase : {E2Phase::UpperRMinus1, E2Phase::UpperR}) {
    E2VariantResult res{phase};
    EvalOptions opt;
    opt.e2_phase = phase;
    for (const Params& p : samples) {
      const VerificationRecord rec = check_case(instantiate("E2", p, ctx, opt));
      ++res.total;
      if (rec.verdict == Verdict::Pass) ++res.pass;
      res.max_rel_residual = std::max(res.max_rel_residual, rec.rel_residual);
    }
    if (res.total > 0 && res.pass == res.total) out.validated.push_back(phase);
    out.variants.push_back(res);
  }
  if (out.validated.size() == 1) out.identified = out.validated.front();
  return out;
}

Report run_suite(const SuiteOptions& options) {
  Report report;
  report.options = options;
  report.started_at = utc_timestamp();

  std::vector<const IdentitySpec*> specs;
  std::set<std::string> seen;
  for (const auto& id : options.ids) {
    const IdentitySpec* spec = find_identity(id);
    if (spec == nullptr) throw ArgumentError("unknown identity '" + id + "'");
    if (seen.insert(spec->id).second) specs.push_back(spec);
  }

  struct Job {
    const IdentitySpec* spec;
    long sample;
    Params params;
  };
  std::vector<Job> jobs;
  std::vector<Params> e2_samples;
  for (const IdentitySpec* spec : specs) {
    std::vector<Params> drawn = draw_samples(*spec, options.samples, options.seed);
    if (spec->id == "E2") e2_samples = drawn;
    for (long i = 0; i < static_cast<long>(drawn.size()); ++i) {
      jobs.push_back({spec, i, std::move(drawn[static_cast<std::size_t>(i)])});
    }
  }

  std::vector<VerificationRecord> records(jobs.size());
  auto run_phase = [&](const PrecisionContext& ctx, auto select, auto store) {
    PrecisionScope scope(ctx);
    parallel_for(jobs.size(), options.jobs, [&](std::size_t i) {
      if (!select(i)) return;
      const Job& job = jobs[i];
      const auto start = std::chrono::steady_clock::now();
      VerificationRecord rec;
      try {
        rec = check_case(instantiate(job.spec->id, job.params, ctx, options.eval));
      } catch (const std::exception& e) {
        rec.id = job.spec->id;
        rec.params = job.params;
        rec.verdict = Verdict::Inconclusive;
        rec.diagnostics = e.what();
      }
      rec.sample = job.sample;
      if (options.timings) {
        rec.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
      }
      store(i, std::move(rec));
    });
  };

  run_phase(
      options.context, [](std::size_t) { return true; },
      [&](std::size_t i, VerificationRecord rec) { records[i] = std::move(rec); });

  if (options.confirm) {
    const PrecisionContext high = options.context.with_precision(options.context.precision_bits() + 64);
    run_phase(
        high, [&](std::size_t i) { return records[i].verdict == Verdict::Pass; },
        [&](std::size_t i, VerificationRecord rec) {
          VerificationRecord& base = records[i];
          base.confirmed_bits = high.precision_bits();
          if (base.wall_ms && rec.wall_ms) *base.wall_ms += *rec.wall_ms;
          if (rec.verdict != Verdict::Pass) {
            base.verdict = Verdict::Inconclusive;
            append(base.diagnostics, "pass not confirmed at " + std::to_string(high.precision_bits()) +
                                         " bits: " + to_string(rec.verdict) +
                                         (rec.diagnostics.empty() ? "" : " (" + rec.diagnostics + ")"));
          }
        });
  }

  for (auto& rec : records) {
    IdSummary& s = report.per_id[rec.id];
    switch (rec.verdict) {
      case Verdict::Pass: ++s.pass, ++report.pass; break;
      case Verdict::Fail: ++s.fail, ++report.fail; break;
      case Verdict::Inconclusive: ++s.inconclusive, ++report.inconclusive; break;
    }
    s.max_rel_residual = std::max(s.max_rel_residual, rec.rel_residual);
    report.max_rel_residual = std::max(report.max_rel_residual, rec.rel_residual);
  }
  report.records = std::move(records);

  if (!e2_samples.empty()) report.e2_experiment = run_e2_experiment(e2_samples, options.context);
  return report;
}

}  // namespace qseries
