#include "qseries/catalog.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

#include "qseries/series.hpp"

namespace qseries {

namespace {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Parameter access

const ParamValue& lookup(const Params& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw ArgumentError("missing parameter '" + name + "'");
  return it->second;
}

cplx cz(const Params& p, const std::string& name) {
  const ParamValue& v = lookup(p, name);
  if (const auto* c = std::get_if<cplx>(&v)) return *c;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return cplx(static_cast<double>(*i), 0);
  throw ArgumentError("parameter '" + name + "' must be a complex number");
}

HPComplex hp(const Params& p, const std::string& name) {
  const cplx c = cz(p, name);
  return HPComplex(c.real(), c.imag());
}

std::int64_t ip(const Params& p, const std::string& name) {
  const ParamValue& v = lookup(p, name);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw ArgumentError("parameter '" + name + "' must be an integer");
}

Rational rp(const Params& p, const std::string& name) {
  const ParamValue& v = lookup(p, name);
  if (const auto* r = std::get_if<Rational>(&v)) return *r;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return Rational(*i);
  throw ArgumentError("parameter '" + name + "' must be a rational");
}

int order(const Params& p) { return static_cast<int>(ip(p, "r")); }

// ---------------------------------------------------------------------------
// Domain helpers (double precision: parameters are doubles)

using Violation = std::optional<std::string>;

constexpr double kExactMargin = 1e-12;  // distance treated as "equal" in a domain check
constexpr double kSampleMargin = 0.05;  // distance samplers keep from poles and boundaries

// Some l in [lo, hi] with |1 - x q^l| < margin.
bool near_q_power(cplx x, cplx q, int lo, int hi, double margin) {
  for (int l = lo; l <= hi; ++l) {
    if (std::abs(1.0 - x * std::pow(q, l)) < margin) return true;
  }
  return false;
}

Violation check_nome(const Params& p) {
  if (std::abs(cz(p, "q")) > kMaxNomeModulus) return "|q| must be at most 0.999";
  return std::nullopt;
}

Violation check_range(const Params& p, const std::string& name, std::int64_t lo, std::int64_t hi) {
  const std::int64_t v = ip(p, name);
  if (v < lo || v > hi) {
    return name + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  }
  return std::nullopt;
}

bool near_integer(double v, double margin) { return std::abs(v - std::round(v)) < margin; }

template <typename... Checks>
Violation first_of(Checks&&... checks) {
  Violation out;
  ((out ? void() : void(out = checks())), ...);
  return out;
}

// ---------------------------------------------------------------------------
// Sampling helpers

cplx draw_nome(SampleRng& rng, double lo = 0.1, double hi = 0.7) { return rng.polar(lo, hi); }

// b = a * w with |w| in [lo, hi].
cplx draw_ratio(SampleRng& rng, cplx a, double lo, double hi) { return a * rng.polar(lo, hi); }

// ---------------------------------------------------------------------------
// Value helpers

SeriesValue exact(const HPComplex& v) {
  SeriesValue out;
  out.value = v;
  return out;
}


SeriesValue ratio_inf(std::initializer_list<HPComplex> num, std::initializer_list<HPComplex> den,
                      const HPComplex& q, const PrecisionContext& ctx) {
  return poch_ratio_infinite(std::span<const HPComplex>(num.begin(), num.size()),
                             std::span<const HPComplex>(den.begin(), den.size()), q, ctx);
}

// ---------------------------------------------------------------------------
// Identities

IdentitySpec rr(const std::string& id, int shift) {
  IdentitySpec s;
  s.id = id;
  s.anchor = shift == 0 ? "sum q^{n^2}/(q;q)_n = 1/(q,q^4;q^5)_inf"
                        : "sum q^{n^2+n}/(q;q)_n = 1/(q^2,q^3;q^5)_inf";
  s.kind = IdentityKind::Infinite;
  s.parameters = {"q"};
  s.domain_summary = "|q| <= 0.999";
  s.sampler = [](SampleRng& rng) { return Params{{"q", draw_nome(rng)}}; };
  s.domain = [](const Params& p) { return check_nome(p); };
  s.lhs = [shift](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const HPComplex q = hp(p, "q");
    return eval_A(Rational(1), HPComplex(0), q, shift == 0 ? HPComplex(1) : q, ctx);
  };
  s.rhs = [shift](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const HPComplex q = hp(p, "q");
    const HPComplex q5 = pow(q, 5);
    return shift == 0 ? ratio_inf({}, {q, pow(q, 4)}, q5, ctx)
                      : ratio_inf({}, {pow(q, 2), pow(q, 3)}, q5, ctx);
  };
  return s;
}

IdentitySpec qbinom() {
  IdentitySpec s;
  s.id = "QBINOM";
  s.anchor = "sum (a;q)_n z^n/(q;q)_n = (az;q)_inf/(z;q)_inf";
  s.kind = IdentityKind::Infinite;
  s.parameters = {"a", "q", "z"};
  s.domain_summary = "|z| <= 0.95";
  s.sampler = [](SampleRng& rng) {
    const cplx q = draw_nome(rng);
    const cplx a = rng.polar(0.1, 2.0);
    const cplx z = rng.polar(0.0, 0.8);
    return Params{{"a", a}, {"q", q}, {"z", z}};
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); },
                    [&]() -> Violation {
                      if (std::abs(cz(p, "z")) > 0.95) return "QBINOM requires |z| <= 0.95";
                      return std::nullopt;
                    });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return eval_A(Rational(0), hp(p, "a"), hp(p, "q"), hp(p, "z"), ctx);
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const HPComplex z = hp(p, "z");
    return ratio_inf({hp(p, "a") * z}, {z}, hp(p, "q"), ctx);
  };
  return s;
}

IdentitySpec psi11() {
  IdentitySpec s;
  s.id = "PSI11";
  s.anchor = "sum_{n in Z} (a;q)_n z^n/(b;q)_n = (q,b/a,az,q/az;q)_inf/(b,q/a,z,b/az;q)_inf";
  s.kind = IdentityKind::Bilateral;
  s.parameters = {"a", "b", "q", "z"};
  s.domain_summary = "a != 0, |b/a| + 0.05 <= |z| <= 0.95";
  s.sampler = [](SampleRng& rng) {
    for (;;) {
      const cplx q = draw_nome(rng);
      const cplx a = rng.polar(0.5, 1.5);
      const cplx b = draw_ratio(rng, a, 0.02, 0.3);
      const double ba = std::abs(b / a);
      // Both halves must decay within the default window of 200 terms.
      const cplx z = rng.polar(std::max(ba / 0.6, ba + 0.05), 0.6);
      if (near_q_power(a, q, -4, -1, kSampleMargin)) continue;  // a near q^j
      return Params{{"a", a}, {"b", b}, {"q", q}, {"z", z}};
    }
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); },
                    [&]() -> Violation {
                      const cplx a = cz(p, "a");
                      if (std::abs(a) == 0.0) return "PSI11 requires a != 0";
                      if (std::abs(cz(p, "q")) == 0.0) return "PSI11 requires q != 0";
                      const double ba = std::abs(cz(p, "b") / a);
                      const double z = std::abs(cz(p, "z"));
                      if (z < ba + 0.05 || z > 0.95) {
                        return "PSI11 requires |b/a| + 0.05 <= |z| <= 0.95";
                      }
                      return std::nullopt;
                    });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return eval_1psi1(hp(p, "a"), hp(p, "b"), hp(p, "q"), hp(p, "z"), ctx);
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const HPComplex a = hp(p, "a");
    const HPComplex b = hp(p, "b");
    const HPComplex q = hp(p, "q");
    const HPComplex z = hp(p, "z");
    return ratio_inf({q, b / a, a * z, q / (a * z)}, {b, q / a, z, b / (a * z)}, q, ctx);
  };
  return s;
}

// Unilateral multisection, with r fixed (fixed_r > 0) or sampled.
IdentitySpec u1(const std::string& id, int fixed_r) {
  IdentitySpec s;
  s.id = id;
  s.kind = IdentityKind::Finite;
  if (fixed_r == 0) {
    s.anchor =
        "sum over C_r^+(n) of prod (a;q)_{k_i}/(q;q)_{k_i} zeta_r^{sum i k_i} = "
        "[r|n] (a^r;q^r)_m/(q^r;q^r)_m";
    s.parameters = {"a", "q", "r", "n"};
    s.domain_summary = "2 <= r <= 6, 0 <= n <= 40";
  } else if (fixed_r == 2) {
    s.anchor = "sum_k (a;q)_k (a;q)_{n-k} (-1)^k/((q;q)_k (q;q)_{n-k}) = [2|n] (a^2;q^2)_m/(q^2;q^2)_m";
    s.parameters = {"a", "q", "n"};
    s.domain_summary = "0 <= n <= 40";
  } else {
    s.anchor =
        "sum_{j+k+l=n} (a;q)_j (a;q)_k (a;q)_l rho^{k+2l}/((q;q)_j (q;q)_k (q;q)_l) = "
        "[3|n] (a^3;q^3)_m/(q^3;q^3)_m, rho = e^{2 pi i/3}";
    s.parameters = {"a", "q", "n"};
    s.domain_summary = "0 <= n <= 40";
  }
  s.sampler = [fixed_r](SampleRng& rng) {
    Params p{{"a", rng.polar(0.1, 1.5)}, {"q", draw_nome(rng)}, {"n", rng.integer(0, 20)}};
    if (fixed_r == 0) p["r"] = rng.integer(2, 5);
    return p;
  };
  s.domain = [fixed_r](const Params& p) {
    return first_of([&] { return check_nome(p); },
                    [&] { return fixed_r == 0 ? check_range(p, "r", 2, 6) : Violation{}; },
                    [&] { return check_range(p, "n", 0, 40); });
  };
  auto r_of = [fixed_r](const Params& p) { return fixed_r == 0 ? order(p) : fixed_r; };
  s.lhs = [r_of](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return exact(multisum_u1(hp(p, "a"), hp(p, "q"), r_of(p), ip(p, "n"), ctx));
  };
  s.rhs = [r_of](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const int r = r_of(p);
    const std::int64_t n = ip(p, "n");
    if (n % r != 0) return exact(HPComplex(0));
    const HPComplex q = hp(p, "q");
    const HPComplex qr = pow(q, r);
    return exact(poch_finite(pow(hp(p, "a"), r), qr, n / r, ctx) / poch_finite(qr, qr, n / r, ctx));
  };
  return s;
}

Params draw_bilateral_pair(SampleRng& rng, double q_hi) {
  for (;;) {
    const cplx q = draw_nome(rng, 0.1, q_hi);
    const cplx a = rng.polar(0.5, 1.5);
    const cplx b = draw_ratio(rng, a, 0.02, 0.5);
    if (near_q_power(a, q, -6, -1, kSampleMargin)) continue;
    return Params{{"a", a}, {"b", b}, {"q", q}};
  }
}

Violation check_bilateral_pair(const Params& p) {
  const cplx a = cz(p, "a");
  if (std::abs(a) == 0.0) return "requires a != 0";
  if (std::abs(cz(p, "q")) == 0.0) return "requires q != 0";
  if (std::abs(cz(p, "b") / a) > 0.95) return "requires |b/a| <= 0.95";
  return std::nullopt;
}

// Bilateral multisection. variant: 0 sampled r, 2 the r = 2 case with the
// explicit product, 3 the r = 3 vanishing case, 4 the r = 3 divisible case.
IdentitySpec b1(const std::string& id, int variant) {
  IdentitySpec s;
  s.id = id;
  s.kind = IdentityKind::Bilateral;
  s.parameters = {"a", "b", "q", "n"};
  switch (variant) {
    case 0:
      s.anchor =
          "sum over C_r(n) of prod (a;q)_{k_i}/(b;q)_{k_i} zeta_r^{sum i k_i} = [r|n] "
          "(q,b/a;q)^r/(b,q/a;q)^r (b^r,q^r a^-r;q^r)/(q^r,b^r a^-r;q^r) (a^r;q^r)_m/(b^r;q^r)_m";
      s.parameters.push_back("r");
      s.domain_summary = "2 <= r <= 4, |n| <= 12, a != 0, |b/a| <= 0.95";
      break;
    case 2:
      s.anchor =
          "sum_{j+k=n} (a;q)_j (a;q)_k (-1)^k/((b;q)_j (b;q)_k) = [2|n] "
          "(q,b/a,-b,-q/a;q)_inf/(-q,-b/a,b,q/a;q)_inf (a^2;q^2)_m/(b^2;q^2)_m";
      s.domain_summary = "|n| <= 12, a != 0, |b/a| <= 0.95";
      break;
    case 3:
      s.anchor = "sum_{j+k+l=n} (a;q)_j (a;q)_k (a;q)_l rho^{k+2l}/((b;q)_j (b;q)_k (b;q)_l) = 0, 3 !| n";
      s.domain_summary = "3 does not divide n, |n| <= 12, a != 0, |b/a| <= 0.95";
      break;
    default:
      s.anchor =
          "sum_{j+k+l=3m} (a;q)_j (a;q)_k (a;q)_l rho^{k+2l}/((b;q)_j (b;q)_k (b;q)_l) = "
          "(q,b/a;q)^3/(b,q/a;q)^3 (b^3,q^3 a^-3;q^3)/(q^3,b^3 a^-3;q^3) (a^3;q^3)_m/(b^3;q^3)_m";
      s.domain_summary = "3 divides n, |n| <= 12, a != 0, |b/a| <= 0.95";
      break;
  }
  s.sampler = [variant](SampleRng& rng) {
    Params p = draw_bilateral_pair(rng, 0.6);
    if (variant == 0) p["r"] = rng.integer(2, 4);
    std::int64_t n = rng.integer(-6, 6);
    if (variant == 3 && n % 3 == 0) n += 1;
    if (variant == 4) n = 3 * rng.integer(-2, 2);
    p["n"] = n;
    return p;
  };
  s.domain = [variant](const Params& p) {
    return first_of([&] { return check_nome(p); }, [&] { return check_bilateral_pair(p); },
                    [&] { return variant == 0 ? check_range(p, "r", 2, 4) : Violation{}; },
                    [&] { return check_range(p, "n", -12, 12); },
                    [&]() -> Violation {
                      const std::int64_t n = ip(p, "n");
                      if (variant == 3 && n % 3 == 0) return "requires 3 !| n";
                      if (variant == 4 && n % 3 != 0) return "requires 3 | n";
                      return std::nullopt;
                    });
  };
  auto r_of = [variant](const Params& p) { return variant == 0 ? order(p) : variant == 2 ? 2 : 3; };
  s.lhs = [r_of](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return multisum_b1(hp(p, "a"), hp(p, "b"), hp(p, "q"), r_of(p), ip(p, "n"), 0, ctx);
  };
  s.rhs = [variant, r_of](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const int r = r_of(p);
    const std::int64_t n = ip(p, "n");
    if (n % r != 0) return exact(HPComplex(0));
    const HPComplex a = hp(p, "a");
    const HPComplex b = hp(p, "b");
    const HPComplex q = hp(p, "q");
    const HPComplex qr = pow(q, r);
    const SeriesValue tail = exact(poch_finite(pow(a, r), qr, n / r, ctx) /
                                   poch_finite(pow(b, r), qr, n / r, ctx));
    if (variant == 2) {
      return multiply(ratio_inf({q, b / a, -b, -(q / a)}, {-q, -(b / a), b, q / a}, q, ctx), tail);
    }
    const HPComplex ar = pow(a, r);
    const HPComplex br = pow(b, r);
    const SeriesValue pre = multiply(power(ratio_inf({q, b / a}, {b, q / a}, q, ctx), r),
                                     ratio_inf({br, qr / ar}, {qr, br / ar}, qr, ctx));
    return multiply(pre, tail);
  };
  return s;
}

IdentitySpec prodms() {
  IdentitySpec s;
  s.id = "PRODMS";
  s.anchor = "prod_{i<r} sum_k (a;q)_k (zeta_r^i t)^k/(q;q)_k = (a^r t^r;q^r)_inf/(t^r;q^r)_inf";
  s.kind = IdentityKind::Infinite;
  s.parameters = {"a", "q", "t", "r"};
  s.domain_summary = "2 <= r <= 6, |t| <= 0.95";
  s.sampler = [](SampleRng& rng) {
    return Params{{"a", rng.polar(0.1, 2.0)},
                  {"q", draw_nome(rng)},
                  {"t", rng.polar(0.0, 0.8)},
                  {"r", rng.integer(2, 5)}};
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); }, [&] { return check_range(p, "r", 2, 6); },
                    [&]() -> Violation {
                      if (std::abs(cz(p, "t")) > 0.95) return "PRODMS requires |t| <= 0.95";
                      return std::nullopt;
                    });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const int r = order(p);
    const HPComplex t = hp(p, "t");
    SeriesValue out = exact(HPComplex(1));
    for (int i = 0; i < r; ++i) {
      out = multiply(out, eval_A(Rational(0), hp(p, "a"), hp(p, "q"),
                                 root_of_unity(r, i).value * t, ctx));
    }
    return out;
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const int r = order(p);
    const HPComplex tr = pow(hp(p, "t"), r);
    return ratio_inf({pow(hp(p, "a"), r) * tr}, {tr}, pow(hp(p, "q"), r), ctx);
  };
  return s;
}

Violation check_alpha_region(const Params& p) {
  const Rational alpha = rp(p, "alpha");
  if (alpha.is_zero() && std::abs(cz(p, "t")) >= 0.8) return "alpha = 0 requires |t| < 0.8";
  if (!alpha.is_integer()) {
    const cplx q = cz(p, "q");
    if (q.imag() != 0.0 || q.real() <= 0.0) return "fractional alpha requires real q in (0, 1)";
  }
  return std::nullopt;
}

IdentitySpec expansion(bool second) {
  IdentitySpec s;
  s.id = second ? "E2" : "E1";
  s.anchor = second ? "A_{q^r}^{(r alpha)}(a^r;t^r) = sum over k_2..k_r >= 0 of prod (a;q)_{k_i}/(q;q)_{k_i} "
                      "zeta_r^{phase} q^{alpha s^2} t^s A_q^(alpha)(a; zeta_r q^{2 alpha s} t)"
                    : "A_{q^r}^{(r alpha)}(a^r;t^r) = sum over k_1..k_{r-1} >= 0 of prod (a;q)_{k_i}/(q;q)_{k_i} "
                      "zeta_r^{sum i k_i} q^{alpha s^2} t^s A_q^(alpha)(a; q^{2 alpha s} t)";
  s.kind = IdentityKind::MultiSum;
  s.parameters = {"alpha", "a", "q", "t", "r"};
  s.domain_summary = "2 <= r <= 4, alpha >= 0, alpha = 0 needs |t| < 0.8";
  s.sampler = [](SampleRng& rng) {
    return Params{{"alpha", Rational(rng.integer(1, 2))},
                  {"a", rng.polar(0.1, 1.5)},
                  {"q", draw_nome(rng)},
                  {"t", rng.polar(0.0, 0.6)},
                  {"r", rng.integer(2, 3)}};
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); }, [&] { return check_range(p, "r", 2, 4); },
                    [&] { return check_alpha_region(p); });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const int r = order(p);
    return eval_A(rp(p, "alpha") * r, pow(hp(p, "a"), r), pow(hp(p, "q"), r), pow(hp(p, "t"), r),
                  ctx);
  };
  s.rhs = [second](const Params& p, const PrecisionContext& ctx, const EvalOptions& opt) {
    if (second) {
      return eval_e2_rhs(rp(p, "alpha"), hp(p, "a"), hp(p, "q"), hp(p, "t"), order(p), 0,
                         opt.e2_phase, ctx);
    }
    return eval_e1_rhs(rp(p, "alpha"), hp(p, "a"), hp(p, "q"), hp(p, "t"), order(p), 0, ctx);
  };
  return s;
}

IdentitySpec t12r() {
  IdentitySpec s;
  s.id = "T12R";
  s.anchor =
      "B_{q^r}^{(r alpha)}(a^r,b^r;x^r) = (b,q/a;q)^r/(q,b/a;q)^r (q^r,b^r a^-r;q^r)/(b^r,q^r a^-r;q^r) "
      "sum over k_1..k_{r-1} in Z of prod (a;q)_{k_i}/(b;q)_{k_i} zeta_r^{sum i k_i} q^{alpha s^2} x^s "
      "B_q^(alpha)(a,b; x q^{2 alpha s})";
  s.kind = IdentityKind::MultiSum;
  s.parameters = {"alpha", "a", "b", "q", "x", "r"};
  s.domain_summary = "2 <= r <= 4, alpha > 0, x != 0, a != 0, |b/a| <= 0.95";
  s.sampler = [](SampleRng& rng) {
    for (;;) {
      Params p = draw_bilateral_pair(rng, 0.6);
      const cplx a = cz(p, "a");
      const cplx q = cz(p, "q");
      const std::int64_t r = rng.integer(2, 3);
      // q^r a^-r must stay away from q^{-rj}.
      if (near_q_power(std::pow(a, static_cast<int>(r)), q, -6 * static_cast<int>(r), 0,
                       kSampleMargin)) {
        continue;
      }
      const double ba = std::abs(cz(p, "b") / a);
      p["x"] = rng.polar(ba + 0.1, 0.85);
      p["alpha"] = Rational(rng.integer(1, 2));
      p["r"] = r;
      return p;
    }
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); }, [&] { return check_bilateral_pair(p); },
                    [&] { return check_range(p, "r", 2, 4); },
                    [&]() -> Violation {
                      if (rp(p, "alpha").is_zero()) return "T12R requires alpha > 0";
                      if (std::abs(cz(p, "x")) == 0.0) return "T12R requires x != 0";
                      return check_alpha_region(Params{{"alpha", rp(p, "alpha")},
                                                       {"q", cz(p, "q")},
                                                       {"t", cplx(0, 0)}});
                    });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const int r = order(p);
    return eval_B(rp(p, "alpha") * r, pow(hp(p, "a"), r), pow(hp(p, "b"), r), pow(hp(p, "q"), r),
                  pow(hp(p, "x"), r), ctx);
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return eval_12r_rhs(rp(p, "alpha"), hp(p, "a"), hp(p, "b"), hp(p, "q"), hp(p, "x"), order(p), 0,
                        ctx);
  };
  return s;
}

IdentitySpec c15r() {
  IdentitySpec s;
  s.id = "C15R";
  s.anchor =
      "sum_n q^{r^2 n^2} x^{rn}/(1-a^r q^{rn}) = (q^r;q^r)^2/(q;q)^{2r} (a,q/a;q)^r/(a^r,q^r a^-r;q^r) "
      "sum over k_1..k_r in Z of zeta_r^{sum i k_i} q^{s^2} x^s/prod(1-a q^{k_i})";
  s.kind = IdentityKind::MultiSum;
  s.parameters = {"a", "q", "x", "r"};
  s.domain_summary = "2 <= r <= 4, x != 0, a != q^j";
  s.sampler = [](SampleRng& rng) {
    for (;;) {
      const cplx q = draw_nome(rng, 0.1, 0.6);
      const cplx a = rng.polar(0.3, 1.5);
      if (near_q_power(a, q, -10, 10, kSampleMargin)) continue;
      const std::int64_t r = rng.integer(2, 3);
      if (near_q_power(std::pow(a, static_cast<int>(r)), q, -10, 10, kSampleMargin)) continue;
      return Params{{"a", a}, {"q", q}, {"x", rng.polar(0.3, 0.9)}, {"r", r}};
    }
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); }, [&] { return check_range(p, "r", 2, 4); },
                    [&]() -> Violation {
                      const cplx a = cz(p, "a");
                      const cplx q = cz(p, "q");
                      if (std::abs(a) == 0.0 || std::abs(q) == 0.0) return "C15R requires a, q != 0";
                      if (std::abs(cz(p, "x")) == 0.0) return "C15R requires x != 0";
                      if (near_q_power(a, q, -60, 60, kExactMargin)) return "C15R requires a != q^j";
                      return std::nullopt;
                    });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return eval_15r_both(hp(p, "a"), hp(p, "q"), hp(p, "x"), order(p), 0, 0, ctx).first;
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return eval_15r_both(hp(p, "a"), hp(p, "q"), hp(p, "x"), order(p), 0, 0, ctx).second;
  };
  return s;
}

IdentitySpec f2() {
  IdentitySpec s;
  s.id = "F2";
  s.anchor = "F(a,c;z) = (z;q)_inf/(c;q)_inf sum (az/c;q)_k (-1)^k q^{k(k-1)/2} c^k/((q;q)_k (z;q)_k)";
  s.kind = IdentityKind::Infinite;
  s.parameters = {"a", "c", "q", "z"};
  s.domain_summary = "c, z != q^-m";
  s.sampler = [](SampleRng& rng) {
    for (;;) {
      const cplx q = draw_nome(rng);
      const cplx a = rng.polar(0.1, 2.0);
      const cplx c = rng.polar(0.1, 2.0);
      const cplx z = rng.polar(0.1, 2.0);
      if (near_q_power(c, q, 0, 30, kSampleMargin) || near_q_power(z, q, 0, 30, kSampleMargin)) {
        continue;
      }
      return Params{{"a", a}, {"c", c}, {"q", q}, {"z", z}};
    }
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); },
                    [&]() -> Violation {
                      const cplx q = cz(p, "q");
                      if (near_q_power(cz(p, "c"), q, 0, 200, kExactMargin)) {
                        return "F2 requires c != q^-m";
                      }
                      if (near_q_power(cz(p, "z"), q, 0, 200, kExactMargin)) {
                        return "F2 requires z != q^-m";
                      }
                      if (std::abs(cz(p, "c")) == 0.0) return "F2 requires c != 0";
                      return std::nullopt;
                    });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return eval_F(hp(p, "a"), hp(p, "c"), hp(p, "q"), hp(p, "z"), ctx);
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const HPComplex a = hp(p, "a");
    const HPComplex c = hp(p, "c");
    const HPComplex q = hp(p, "q");
    const HPComplex z = hp(p, "z");
    return multiply(ratio_inf({z}, {c}, q, ctx), eval_F(a * z / c, z, q, c, ctx));
  };
  return s;
}

HPComplex real_power(const HPComplex& q, const Real& exponent) {
  return exp(HPComplex(exponent) * log(q));
}

IdentitySpec f3() {
  IdentitySpec s;
  s.id = "F3";
  s.anchor =
      "F(q^alpha, q^{alpha+gamma}; q^{gamma-n}) = (q^{gamma-n};q)_inf/(q^{alpha+gamma};q)_inf "
      "sum_{k<=n} (q^-n;q)_k (-1)^k q^{k(k-1)/2} q^{k(gamma+alpha)}/((q;q)_k (q^{gamma-n};q)_k)";
  s.kind = IdentityKind::Infinite;
  s.real_q = true;
  s.parameters = {"alpha", "gamma", "q", "n"};
  s.domain_summary = "q in (0,1), alpha, gamma real, alpha+gamma not in {0,-1,...}, gamma not an integer";
  s.sampler = [](SampleRng& rng) {
    for (;;) {
      const double alpha = rng.uniform(-3.5, 3.5);
      const double gamma = rng.uniform(-3.5, 3.5);
      if (near_integer(gamma, 0.1)) continue;
      const double sum = alpha + gamma;
      if (sum < 0.1 && near_integer(sum, 0.1)) continue;
      return Params{{"alpha", cplx(alpha, 0)},
                    {"gamma", cplx(gamma, 0)},
                    {"q", cplx(rng.uniform(0.1, 0.7), 0)},
                    {"n", rng.integer(0, 12)}};
    }
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); }, [&] { return check_range(p, "n", 0, 40); },
                    [&]() -> Violation {
                      const cplx q = cz(p, "q");
                      const cplx alpha = cz(p, "alpha");
                      const cplx gamma = cz(p, "gamma");
                      if (q.imag() != 0.0 || q.real() <= 0.0) return "F3 requires real q in (0, 1)";
                      if (alpha.imag() != 0.0 || gamma.imag() != 0.0) {
                        return "F3 requires real alpha and gamma";
                      }
                      const double sum = alpha.real() + gamma.real();
                      if (sum < 0.5 && near_integer(sum, 1e-9)) {
                        return "F3 requires alpha + gamma not a nonpositive integer";
                      }
                      if (near_integer(gamma.real(), 1e-9)) {
                        return "F3 requires gamma - n not a negative integer for every n >= 0";
                      }
                      return std::nullopt;
                    });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const HPComplex q = hp(p, "q");
    const Real alpha(cz(p, "alpha").real());
    const Real gamma(cz(p, "gamma").real());
    const std::int64_t n = ip(p, "n");
    return eval_F(real_power(q, alpha), real_power(q, alpha + gamma), q,
                  real_power(q, gamma) * pow(q, -n), ctx);
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const HPComplex q = hp(p, "q");
    const Real alpha(cz(p, "alpha").real());
    const Real gamma(cz(p, "gamma").real());
    const std::int64_t n = ip(p, "n");
    const HPComplex shifted = real_power(q, gamma) * pow(q, -n);
    const HPComplex c = real_power(q, alpha + gamma);
    return multiply(ratio_inf({shifted}, {c}, q, ctx), eval_terminating_F(n, shifted, q, c, ctx));
  };
  return s;
}

Violation check_unit_x(const Params& p, const std::string& id) {
  if (std::abs(cz(p, "x")) > 0.95) return id + " requires |x| <= 0.95";
  return std::nullopt;
}

IdentitySpec f4() {
  IdentitySpec s;
  s.id = "F4";
  s.anchor =
      "sum_k (q;q)_{n+k-1}/((q;q)_k (q;q)_{n-1}) x^k = "
      "sum_{k<=n} (q^-n;q)_k (-1)^k q^{k(k-1)/2} (x q^n)^k/((q;q)_k (x;q)_k)";
  s.kind = IdentityKind::Infinite;
  s.parameters = {"n", "q", "x"};
  s.domain_summary = "0 <= n <= 40, |x| <= 0.95";
  s.sampler = [](SampleRng& rng) {
    return Params{{"n", rng.integer(1, 12)}, {"q", draw_nome(rng)}, {"x", rng.polar(0.0, 0.8)}};
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); }, [&] { return check_range(p, "n", 0, 40); },
                    [&] { return check_unit_x(p, "F4"); });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return eval_gaussian_series(ip(p, "n"), hp(p, "x"), hp(p, "q"), ctx);
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return f4_rhs(ip(p, "n"), hp(p, "x"), hp(p, "q"), F4Form::Corrected, ctx);
  };
  return s;
}

IdentitySpec f7() {
  IdentitySpec s;
  s.id = "F7";
  s.anchor = "S(m,n,x) = (x q^-n;q)_inf/(x q^-m;q)_inf S(n,m,x), "
             "S(m,n,x) = sum_{k<=m} (q^-m;q)_k (-1)^k q^{k(k-2n-1)/2} x^k/(q, x q^-m;q)_k";
  s.kind = IdentityKind::Finite;
  s.parameters = {"m", "n", "q", "x"};
  s.domain_summary = "0 <= m, n <= 40, x != q^l";
  s.sampler = [](SampleRng& rng) {
    for (;;) {
      const cplx q = draw_nome(rng);
      const cplx x = rng.polar(0.2, 1.5);
      if (near_q_power(x, q, -15, 15, kSampleMargin)) continue;
      const std::int64_t m = rng.integer(0, 12);
      const std::int64_t n = rng.integer(0, 12);
      // The smaller sum is about |q|^{d(d+1)/2} and is reached by cancellation.
      const double d = static_cast<double>(std::abs(m - n));
      if (d * (d + 1) / 2 * -std::log10(std::abs(q)) > 20) continue;
      return Params{{"m", m}, {"n", n}, {"q", q}, {"x", x}};
    }
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); }, [&] { return check_range(p, "m", 0, 40); },
                    [&] { return check_range(p, "n", 0, 40); },
                    [&]() -> Violation {
                      const cplx q = cz(p, "q");
                      if (std::abs(q) == 0.0) return "F7 requires q != 0";
                      if (near_q_power(cz(p, "x"), q, -200, 200, kExactMargin)) {
                        return "F7 requires x != q^l";
                      }
                      return std::nullopt;
                    });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return f7_sum(ip(p, "m"), ip(p, "n"), hp(p, "x"), hp(p, "q"), ctx);
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    const std::int64_t m = ip(p, "m");
    const std::int64_t n = ip(p, "n");
    const HPComplex x = hp(p, "x");
    const HPComplex q = hp(p, "q");
    return multiply(exact(f7_prefactor(m, n, x, q, ctx)), f7_sum(n, m, x, q, ctx));
  };
  return s;
}

IdentitySpec qbinom1() {
  IdentitySpec s;
  s.id = "QBINOM1";
  s.anchor = "1/(x;q)_n = sum_k (q;q)_{n+k-1}/((q;q)_k (q;q)_{n-1}) x^k";
  s.kind = IdentityKind::Infinite;
  s.parameters = {"n", "q", "x"};
  s.domain_summary = "0 <= n <= 40, |x| <= 0.95";
  s.sampler = [](SampleRng& rng) {
    return Params{{"n", rng.integer(0, 12)}, {"q", draw_nome(rng)}, {"x", rng.polar(0.0, 0.8)}};
  };
  s.domain = [](const Params& p) {
    return first_of([&] { return check_nome(p); }, [&] { return check_range(p, "n", 0, 40); },
                    [&] { return check_unit_x(p, "QBINOM1"); });
  };
  s.lhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return exact(HPComplex(1) / poch_finite(hp(p, "x"), hp(p, "q"), ip(p, "n"), ctx));
  };
  s.rhs = [](const Params& p, const PrecisionContext& ctx, const EvalOptions&) {
    return eval_gaussian_series(ip(p, "n"), hp(p, "x"), hp(p, "q"), ctx);
  };
  return s;
}

std::vector<IdentitySpec> build_registry() {
  std::vector<IdentitySpec> out;
  out.push_back(rr("RR1", 0));
  out.push_back(rr("RR2", 1));
  out.push_back(qbinom());
  out.push_back(psi11());
  out.push_back(u1("U1", 0));
  out.push_back(b1("B1", 0));
  out.push_back(prodms());
  out.push_back(expansion(false));
  out.push_back(expansion(true));
  out.push_back(t12r());
  out.push_back(c15r());
  out.push_back(f2());
  out.push_back(f3());
  out.push_back(f4());
  out.push_back(f7());
  out.push_back(qbinom1());
  out.push_back(u1("LEM1-1", 2));
  out.push_back(u1("LEM1-2", 3));
  out.push_back(b1("LEM1-3", 2));
  out.push_back(b1("LEM1-4", 3));
  out.push_back(b1("LEM1-5", 4));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_param(const ParamValue& value) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const Rational& v) const { return v.str(); }
    std::string operator()(const cplx& v) const {
      auto shortest = [](double d) {
        std::array<char, 32> buf{};
        auto res = std::to_chars(buf.data(), buf.data() + buf.size(), d);
        return std::string(buf.data(), res.ptr);
      };
      if (v.imag() == 0.0) return shortest(v.real());
      std::string im = shortest(v.imag());
      if (im.front() != '-') im.insert(im.begin(), '+');
      return shortest(v.real()) + im + "i";
    }
  };
  return std::visit(Visitor{}, value);
}

const char* to_string(IdentityKind kind) {
  switch (kind) {
    case IdentityKind::Infinite: return "infinite";
    case IdentityKind::Finite: return "finite";
    case IdentityKind::Bilateral: return "bilateral";
    case IdentityKind::MultiSum: return "multi-sum";
  }
  return "?";
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

double SampleRng::uniform(double lo, double hi) {
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

std::int64_t SampleRng::integer(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(engine_() % span);
}

std::complex<double> SampleRng::polar(double lo, double hi) {
  const double modulus = uniform(lo, hi);
  const double phase = uniform(0.0, 2 * std::numbers::pi);
  return std::polar(modulus, phase);
}

const std::vector<IdentitySpec>& registry() {
  static const std::vector<IdentitySpec> entries = build_registry();
  return entries;
}

const IdentitySpec* find_identity(std::string_view id) {
  for (const auto& spec : registry()) {
    if (spec.id == id) return &spec;
  }
  return nullptr;
}

IdentityCase instantiate(std::string_view id, Params params, const PrecisionContext& ctx,
                         EvalOptions options) {
  const IdentitySpec* spec = find_identity(id);
  if (spec == nullptr) throw ArgumentError("unknown identity '" + std::string(id) + "'");
  for (const auto& name : spec->parameters) {
    if (!params.count(name)) throw ArgumentError(spec->id + " needs parameter '" + name + "'");
  }
  if (auto violation = spec->domain(params)) {
    throw DomainError(violation->rfind(spec->id, 0) == 0 ? *violation : spec->id + ": " + *violation);
  }
  return IdentityCase{spec, std::move(params), ctx, options};
}

// ---------------------------------------------------------------------------
// Finite sides

SeriesValue f4_rhs(std::int64_t n, const HPComplex& x, const HPComplex& q, F4Form form,
                   const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  if (n < 0) throw ArgumentError("F4 needs n >= 0");
  if (form == F4Form::Corrected) return eval_terminating_F(n, x, q, x * pow(q, n), ctx);
  return eval_terminating_F(n, x * pow(q, -n), q, x, ctx);
}

SeriesValue f7_sum(std::int64_t m, std::int64_t n, const HPComplex& x, const HPComplex& q,
                   const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  if (m < 0 || n < 0) throw ArgumentError("F7 needs m, n >= 0");
  // q^{k(k-2n-1)/2} = q^{k(k-1)/2} q^{-nk}
  return eval_terminating_F(m, x * pow(q, -m), q, x * pow(q, -n), ctx);
}

HPComplex f7_prefactor(std::int64_t m, std::int64_t n, const HPComplex& x, const HPComplex& q,
                       const PrecisionContext& ctx) {
  PrecisionScope scope(ctx);
  if (m == n) return HPComplex(1);
  // (x q^-n;q)_inf / (x q^-m;q)_inf telescopes to a finite product.
  if (m > n) {
    const HPComplex den = poch_finite(x * pow(q, -m), q, m - n, ctx);
    if (abs(den) < ctx.pole_guard()) throw PoleError("(x q^-m;q)_{m-n} vanishes", m - n);
    return HPComplex(1) / den;
  }
  return poch_finite(x * pow(q, -n), q, n - m, ctx);
}

}  // namespace qseries
