// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "hfrac/harness.hpp"
#include "hfrac/multipliers.hpp"

using namespace hfrac;

namespace {

constexpr std::size_t kPairs = 50;
constexpr std::uint64_t kSeed = 42;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Corpus pairs_corpus(const LatticeContext& ctx, std::size_t pairs = kPairs) {
  return generate_corpus(ctx.decomp, {CorpusKind::heat_smoothed_noise, 2 * pairs, kSeed, 0.3});
}

ContextPtr context(int M) {
  static std::vector<std::pair<int, ContextPtr>> cache;
  for (const auto& [m, c] : cache) {
    if (m == M) return c;
  }
  cache.emplace_back(M, LatticeContext::build(1, M));
  return cache.back().second;
}

Outcome from_check(const IdentityCheck& c) {
  return {c.pass(), c.name + " = " + fmt("%.3e", c.value) + " (tol " + fmt("%.0e", c.tolerance) + ")"};
}

/// Largest relative change of per-pair ratios between two runs of one study.
double ratio_drift(const RatioReport& a, const RatioReport& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double r = a.samples[i].ratio_sup, s = b.samples[i].ratio_sup;
    if (r == 0.0 && s == 0.0) continue;
    worst = std::max(worst, std::abs(r - s) / std::max(r, s));
  }
  return worst;
}

/// Finiteness, conclusiveness, scale invariance (u <- 3u, tol 1e-10) and
/// factor-2 stability over M in {4, 6}.
Outcome ratio_contract(const std::function<RatioReport(const LatticeContext&, const Corpus&, const StudyOptions&)>& study) {
  const int Ms[] = {4, 6};
  bool finite = true, conclusive = true;
  double drift = 0.0;
  const StabilityReport stab = refinement_stability(Ms, [&](int M) {
    const ContextPtr ctx = context(M);
    const Corpus corpus = pairs_corpus(*ctx);
    const RatioReport base = study(*ctx, corpus, {});
    StudyOptions scaled;
    scaled.scale_u = 3.0;
    drift = std::max(drift, ratio_drift(base, study(*ctx, corpus, scaled)));
    finite = finite && base.finite;
    conclusive = conclusive && !base.inconclusive;
    return base.max_ratio;
  });
  const bool pass = finite && conclusive && drift <= 1e-10 && stab.pass && !stab.degenerate;
  std::string detail = "max ratios M4 " + fmt("%.4g", stab.max_ratios[0]) + ", M6 " + fmt("%.4g", stab.max_ratios[1]) +
                       ", spread " + fmt("%.3f", stab.spread) + " (tol 2), scale drift " + fmt("%.1e", drift) +
                       " (tol 1e-10)";
  if (!finite) detail += ", non-finite ratio";
  if (!conclusive) detail += ", " + std::string(kInconclusiveFlag);
  return {pass, detail};
}

std::vector<Criterion> criteria() {
  const EstimateInstance thm11 = generate_instance(0.8, 0.8, 0.8, 0.1, 4);
  const TInstance thm12 = generate_t_instance(0.9, 0.3, 0.2, 0.1);
  return {
      {1, "multiplier identity A~(k,lambda,2) = (2k+n)|lambda|", 1.0,
       [] { return from_check(multiplier_identity_check(50)); }},
      {2, "asymptotic ratio A~/A at k = 1e4", 1.0, [] { return from_check(multiplier_asymptotic_check()); }},
      {3, "kernel semigroup R1 * R1 = R2, M = 4", 30.0,
       [] {
         const ContextPtr ctx = context(4);
         return from_check(kernel_semigroup_check(*ctx, pairs_corpus(*ctx, 10)));
       }},
      {4, "fundamental solution L(u * R2) = u, M = 4", 30.0,
       [] {
         const ContextPtr ctx = context(4);
         return from_check(fundamental_solution_check(*ctx, pairs_corpus(*ctx, 10)));
       }},
      {5, "heat-integral vs spectral L^{-1/2}, M = 4", 10.0, [] { return from_check(heat_route_check(*context(4))); }},
      {6, "H_alpha operator vs bilinear route, alpha = 1, M = 6", 180.0,
       [] {
         const ContextPtr ctx = context(6);
         const Corpus cal = generate_corpus(ctx->decomp, {CorpusKind::heat_smoothed_noise, 20, 1, 0.3});
         const Corpus held = generate_corpus(ctx->decomp, {CorpusKind::heat_smoothed_noise, 40, 2, 0.3});
         return from_check(h_route_agreement(*ctx, 1.0, cal, held));
       }},
      {7, "pointwise 3-commutator estimate, (0.8, 0.8, 0.8, 0.1), 50 pairs", 300.0,
       [thm11] {
         return ratio_contract([&](const LatticeContext& ctx, const Corpus& c, const StudyOptions& o) {
           return ratio_study_thm11(ctx, c, thm11, OperatorRoute::spectral, o);
         });
       }},
      {8, "T commutator estimate, (0.9, 0.3, 0.2), 50 pairs", 300.0,
       [thm12] {
         Outcome out = ratio_contract([&](const LatticeContext& ctx, const Corpus& c, const StudyOptions& o) {
           return ratio_study_thm12(ctx, c, thm12, InnerOrder::s_tilde_2, o);
         });
         const ContextPtr ctx = context(4);
         const TInstance zero{0.9, 0.0, 0.2, 0.1, generate_t_instance(0.9, 0.0, 0.2, 0.1).terms};
         const RatioReport control = ratio_study_thm12(*ctx, pairs_corpus(*ctx), zero);
         double lhs = 0.0;
         for (const RatioSample& s : control.samples) lhs = std::max(lhs, s.lhs_max);
         out.pass = out.pass && lhs == 0.0;
         out.detail += ", beta = 0 control max|LHS| " + fmt("%.1e", lhs) + " (must be 0)";
         return out;
       }},
      {9, "L^p estimate, alpha = 1, q1 = q2 = 4, 50 pairs", 180.0,
       [] {
         const int Ms[] = {4, 6};
         bool exact = true, finite = true;
         double p = 0.0;
         const StabilityReport stab = refinement_stability(Ms, [&](int M) {
           const ContextPtr ctx = context(M);
           const Corpus corpus = pairs_corpus(*ctx);
           const LpReport base = lp_inequality_study(*ctx, corpus, 1.0, 4.0, 4.0);
           // Scaling by 2 is exact in binary floating point, so ratios must agree bitwise.
           StudyOptions scaled;
           scaled.scale_u = 2.0;
           exact = exact && lp_inequality_study(*ctx, corpus, 1.0, 4.0, 4.0, scaled).ratios == base.ratios;
           finite = finite && std::isfinite(base.max_ratio);
           p = base.p;
           return base.max_ratio;
         });
         const bool pass = exact && finite && stab.pass && !stab.degenerate && std::abs(p - 4.0) <= 1e-12;
         return Outcome{pass, "p = " + fmt("%.6g", p) + ", max ratios M4 " + fmt("%.4g", stab.max_ratios[0]) + ", M6 " +
                                  fmt("%.4g", stab.max_ratios[1]) + ", spread " + fmt("%.3f", stab.spread) +
                                  " (tol 2), scale invariance " + (exact ? "exact" : "BROKEN")};
       }},
      {10, "geometric-operator estimate, alpha = 0.8, 50 pairs", 300.0,
       [thm11] {
         return ratio_contract([&](const LatticeContext& ctx, const Corpus& c, const StudyOptions& o) {
           return ratio_study_thm11(ctx, c, thm11, OperatorRoute::geometric, o);
         });
       }},
      {11, "negative control drifts under refinement", 300.0,
       [thm11] {
         // Inner orders raised by 1.5: the majorant no longer matches the LHS scaling.
         std::vector<RieszTerm> wrong;
         for (const RieszTerm& t : thm11.riesz_terms()) wrong.push_back({t.s1 + 1.5, t.s2 + 1.5, t.outer});
         const int Ms[] = {4, 6, 8};
         const StabilityReport stab = refinement_stability(Ms, [&](int M) {
           const ContextPtr ctx = context(M);
           return ratio_study_terms(*ctx, pairs_corpus(*ctx), 0.8, 0.8, 0.8, wrong, OperatorRoute::spectral).max_ratio;
         });
         return Outcome{!stab.pass && stab.spread > 2.0, "spread over M = 4, 6, 8: " + fmt("%.3f", stab.spread) +
                                                             " (must exceed 2)"};
       }},
      {12, "integer Leibniz defect refinement order, M = 4 vs 8", 120.0,
       [] {
         const int Ms[] = {4, 8};
         const LeibnizReport r = leibniz_refinement(Ms, kSeed);
         return Outcome{r.order >= 1.0, "defects " + fmt("%.4e", r.defects[0]) + " -> " + fmt("%.4e", r.defects[1]) +
                                            ", order " + fmt("%.3f", r.order) + " (min 1.0)"};
       }},
  };
}

}  // namespace

int main() {
  int failures = 0;
  for (const Criterion& c : criteria()) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.time_limit_s;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %s: %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.detail.c_str(), seconds, c.time_limit_s, in_time ? "" : " TIMEOUT");
    std::fflush(stdout);
  }
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
