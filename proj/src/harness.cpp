#include "hfrac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "hfrac/multipliers.hpp"

namespace hfrac {

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

void require_corpus_on(const LatticeContext& ctx, const Corpus& corpus, const char* what) {
  require(corpus.lattice != nullptr, std::string(what) + ": corpus has no lattice");
  require_same_lattice(*ctx.lattice, *corpus.lattice, what);
}

Eigen::VectorXd normal_vector(std::mt19937_64& rng, Eigen::Index size) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd out(size);
  for (Eigen::Index i = 0; i < size; ++i) out[i] = normal(rng);
  return out;
}

void prewarm(const RieszFamily& riesz, std::initializer_list<double> orders) {
  for (double o : orders) {
    if (std::abs(o) > 1e-12) riesz.matrix(o);
  }
}

}  // namespace

std::shared_ptr<const LatticeContext> LatticeContext::build(int n, int M) {
  std::shared_ptr<LatticeContext> ctx(new LatticeContext);
  ctx->lattice = Lattice::build(n, M);
  ctx->decomp = decompose(assemble_sublaplacian(ctx->lattice));
  ctx->quad = HeatQuadrature::for_spectrum(ctx->decomp);
  ctx->riesz_ = std::make_unique<RieszFamily>(ctx->decomp, ctx->quad);
  return ctx;
}

CorpusKind parse_corpus_kind(std::string_view name) {
  if (name == "heat-smoothed-noise") return CorpusKind::heat_smoothed_noise;
  if (name == "gauge-bump") return CorpusKind::gauge_bump;
  if (name == "eigen-mix") return CorpusKind::eigen_mix;
  throw UsageError("unknown corpus kind '" + std::string(name) +
                   "' (expected heat-smoothed-noise, gauge-bump or eigen-mix)");
}

std::string to_string(CorpusKind kind) {
  switch (kind) {
    case CorpusKind::heat_smoothed_noise: return "heat-smoothed-noise";
    case CorpusKind::gauge_bump: return "gauge-bump";
    case CorpusKind::eigen_mix: return "eigen-mix";
  }
  return "unknown";
}

Corpus generate_corpus(const SpectralDecomposition& decomp, const CorpusDescriptor& desc) {
  require(decomp.lattice != nullptr, "generate_corpus: decomposition has no lattice");
  require(desc.t0 > 0.0 && std::isfinite(desc.t0), "generate_corpus: t0 must be > 0");
  const Lattice& lattice = *decomp.lattice;
  const Eigen::Index N = decomp.size();
  std::mt19937_64 rng(desc.seed);
  Corpus corpus{decomp.lattice, {}, desc};
  corpus.functions.reserve(desc.count);

  Eigen::VectorXd heat = (-desc.t0 * decomp.eigenvalues.array()).exp().matrix();
  for (Eigen::Index i = 0; i < N; ++i) {
    if (decomp.is_zero_mode(i)) heat[i] = 0.0;
  }

  for (std::size_t f = 0; f < desc.count; ++f) {
    Eigen::VectorXd u;
    switch (desc.kind) {
      case CorpusKind::heat_smoothed_noise:
        u = apply_multiplier(decomp, heat, normal_vector(rng, N));
        break;
      case CorpusKind::gauge_bump: {
        std::uniform_int_distribution<std::size_t> node(0, lattice.size() - 1);
        std::normal_distribution<double> normal;
        u = Eigen::VectorXd::Zero(N);
        for (int b = 0; b < 3; ++b) {
          const std::size_t centre_inv = lattice.inverse(node(rng));
          const double amplitude = normal(rng);
          for (std::size_t x = 0; x < lattice.size(); ++x) {
            const double g = lattice.wrapped_gauge(lattice.multiply(centre_inv, x));
            u[static_cast<Eigen::Index>(x)] += amplitude * std::exp(-g * g / (4.0 * desc.t0));
          }
        }
        break;
      }
      case CorpusKind::eigen_mix: {
        std::normal_distribution<double> normal;
        Eigen::VectorXd coeff = Eigen::VectorXd::Zero(N);
        int used = 0;
        for (Eigen::Index i = 0; i < N && used < 32; ++i) {
          if (decomp.is_zero_mode(i)) continue;
          coeff[i] = normal(rng) * heat[i];
          ++used;
        }
        u = decomp.eigenvectors * coeff;
        break;
      }
    }
    u.array() -= u.mean();
    corpus.functions.push_back(std::move(u));
  }
  return corpus;
}

double lp_norm(const Eigen::VectorXd& u, double cell_volume, double p) {
  if (p == kLpInfinity) return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff();
  require(p >= 1.0 && std::isfinite(p), "lp_norm: p must be >= 1");
  if (p == 1.0) return u.cwiseAbs().sum() * cell_volume;
  if (p == 2.0) return std::sqrt(u.squaredNorm() * cell_volume);
  // Scale by the max entry so large p does not overflow.
  const double m = u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  return m * std::pow((u.cwiseAbs() / m).array().pow(p).sum() * cell_volume, 1.0 / p);
}

double lp_norm(const GridFunction& u, double p) { return lp_norm(u.values, u.lattice->cell_volume(), p); }

RatioSample ratio_sample(const Eigen::VectorXd& lhs, const Eigen::VectorXd& rhs) {
  require(lhs.size() == rhs.size(), "ratio_sample: size mismatch");
  RatioSample s;
  const double rmax = rhs.size() == 0 ? 0.0 : rhs.maxCoeff();
  const double floor = kRhsFloor * rmax;
  double rmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index x = 0; x < lhs.size(); ++x) {
    const double l = std::abs(lhs[x]);
    const double r = rhs[x];
    s.lhs_max = std::max(s.lhs_max, l);
    if (r > 0.0) rmin = std::min(rmin, r);
    if (r > 0.0 && r >= floor) {
      s.ratio_sup = std::max(s.ratio_sup, l / r);
    } else if (l != 0.0) {
      ++s.excluded;
    }
  }
  s.rhs_min_positive = std::isfinite(rmin) ? rmin : 0.0;
  return s;
}

void RatioReport::summarize() {
  std::vector<double> sups;
  std::size_t excluded = 0;
  max_ratio = 0.0;
  finite = true;
  for (const RatioSample& s : samples) {
    sups.push_back(s.ratio_sup);
    excluded += s.excluded;
    finite = finite && std::isfinite(s.ratio_sup);
    max_ratio = std::max(max_ratio, s.ratio_sup);
  }
  median_ratio = median_of(sups);
  const double nodes = static_cast<double>(samples.size() * nodes_per_sample);
  excluded_fraction = nodes > 0 ? static_cast<double>(excluded) / nodes : 0.0;
  inconclusive = excluded_fraction > kMaxExcludedFraction;
  flag = inconclusive ? kInconclusiveFlag : "";
}

OperatorRoute parse_route(std::string_view name) {
  if (name == "spectral") return OperatorRoute::spectral;
  if (name == "geometric") return OperatorRoute::geometric;
  throw UsageError("unknown operator route '" + std::string(name) + "' (expected spectral or geometric)");
}

std::string to_string(OperatorRoute route) { return route == OperatorRoute::spectral ? "spectral" : "geometric"; }

RatioReport ratio_study_terms(const LatticeContext& ctx, const Corpus& corpus, double alpha, double tau1, double tau2,
                              std::span<const RieszTerm> terms, OperatorRoute route, const StudyOptions& opts) {
  require_corpus_on(ctx, corpus, "ratio_study");
  require(!terms.empty(), "ratio_study: no RHS terms");
  const SpectralDecomposition& decomp = ctx.decomp;

  Eigen::MatrixXd P, P1, P2;
  nlohmann::json calibration = nullptr;
  if (route == OperatorRoute::spectral) {
    P = frac_power_matrix(decomp, {alpha / 2.0, ZeroModePolicy::keep_zero});
    P1 = frac_power_matrix(decomp, {tau1 / 2.0, ZeroModePolicy::keep_zero});
    P2 = tau2 == tau1 ? P1 : frac_power_matrix(decomp, {tau2 / 2.0, ZeroModePolicy::keep_zero});
  } else {
    require(alpha > 0.0 && alpha < 2.0 && tau1 < 2.0 && tau2 < 2.0,
            "geometric route needs alpha, tau1, tau2 in (0, 2)");
    const Corpus cal = generate_corpus(decomp, opts.calibration);
    const auto fit = [&](double order) { return calibrated_geometric_operator(decomp, order, cal.functions); };
    const SingularOperator G = fit(alpha);
    const SingularOperator G1 = tau1 == alpha ? G : fit(tau1);
    const SingularOperator G2 = tau2 == tau1 ? G1 : (tau2 == alpha ? G : fit(tau2));
    calibration = {{"alpha", G.constant}, {"tau1", G1.constant}, {"tau2", G2.constant}};
    P = G.matrix;
    P1 = G1.matrix;
    P2 = G2.matrix;
  }

  const RieszFamily& riesz = ctx.riesz();
  for (const RieszTerm& t : terms) prewarm(riesz, {t.s1, t.s2, t.outer});

  const std::size_t pairs = std::min(corpus.pair_count(), opts.max_pairs);
  RatioReport report;
  report.samples.resize(pairs);
  report.nodes_per_sample = ctx.lattice->size();
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs); ++i) {
    const Eigen::VectorXd u = opts.scale_u * corpus.first(static_cast<std::size_t>(i));
    const Eigen::VectorXd& v = corpus.second(static_cast<std::size_t>(i));
    const Eigen::VectorXd lhs = three_commutator(P, u, v);
    const Eigen::VectorXd rhs = rhs_terms(riesz, terms, P1 * u, P2 * v);
    report.samples[static_cast<std::size_t>(i)] = ratio_sample(lhs, rhs);
  }
  report.summarize();

  nlohmann::json jterms = nlohmann::json::array();
  for (const RieszTerm& t : terms) jterms.push_back({t.s1, t.s2, t.outer});
  report.metadata = {{"alpha", alpha},
                     {"tau1", tau1},
                     {"tau2", tau2},
                     {"route", to_string(route)},
                     {"terms", jterms},
                     {"lattice", to_json(*ctx.lattice)},
                     {"corpus", {{"kind", to_string(corpus.descriptor.kind)},
                                 {"seed", corpus.descriptor.seed},
                                 {"t0", corpus.descriptor.t0},
                                 {"pairs", pairs}}},
                     {"scale_u", opts.scale_u}};
  if (!calibration.is_null()) report.metadata["calibration"] = calibration;
  return report;
}

RatioReport ratio_study_thm11(const LatticeContext& ctx, const Corpus& corpus, const EstimateInstance& inst,
                              OperatorRoute route, const StudyOptions& opts) {
  inst.validate(ctx.lattice->Q());
  const std::vector<RieszTerm> terms = inst.riesz_terms();
  RatioReport report = ratio_study_terms(ctx, corpus, inst.alpha, inst.tau1, inst.tau2, terms, route, opts);
  report.study = route == OperatorRoute::spectral ? "thm11" : "prop61";
  report.metadata["instance"] = to_json(inst);
  return report;
}

RatioReport ratio_study_thm12(const LatticeContext& ctx, const Corpus& corpus, const TInstance& inst,
                              InnerOrder inner, const StudyOptions& opts) {
  require_corpus_on(ctx, corpus, "ratio_study_thm12");
  inst.validate();
  const TOperators ops = TOperators::build(ctx.decomp, inst.tau, inst.beta, inst.delta);
  const RieszFamily& riesz = ctx.riesz();
  for (const TTerm& t : inst.terms) prewarm(riesz, {t.s1, t.s2, t.st1, t.st2});

  const std::size_t pairs = std::min(corpus.pair_count(), opts.max_pairs);
  RatioReport report;
  report.study = "thm12";
  report.samples.resize(pairs);
  report.nodes_per_sample = ctx.lattice->size();
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs); ++i) {
    const Eigen::VectorXd u = opts.scale_u * corpus.first(static_cast<std::size_t>(i));
    const Eigen::VectorXd& v = corpus.second(static_cast<std::size_t>(i));
    const Eigen::VectorXd lhs = t_commutator(ops, u, v);
    const Eigen::VectorXd rhs = rhs_theorem_1_2(riesz, inst, u, v, inner);
    report.samples[static_cast<std::size_t>(i)] = ratio_sample(lhs, rhs);
  }
  report.summarize();
  report.metadata = {{"instance", to_json(inst)},
                     {"inner_order", inner == InnerOrder::s_tilde_2 ? "s_tilde_2" : "s_tilde_1"},
                     {"lattice", to_json(*ctx.lattice)},
                     {"corpus", {{"kind", to_string(corpus.descriptor.kind)},
                                 {"seed", corpus.descriptor.seed},
                                 {"t0", corpus.descriptor.t0},
                                 {"pairs", pairs}}},
                     {"scale_u", opts.scale_u}};
  return report;
}

std::string StabilityReport::table() const {
  std::ostringstream out;
  out << "M  max_ratio\n" << std::setprecision(6);
  for (std::size_t i = 0; i < Ms.size(); ++i) out << Ms[i] << "  " << max_ratios[i] << '\n';
  out << "spread " << spread << '\n';
  return out.str();
}

StabilityReport refinement_stability(std::span<const int> Ms, const std::function<double(int)>& study,
                                     double factor) {
  require(Ms.size() >= 2, "refinement_stability needs at least two lattice sizes");
  StabilityReport rep;
  rep.Ms.assign(Ms.begin(), Ms.end());
  for (int M : Ms) rep.max_ratios.push_back(study(M));
  const auto [lo, hi] = std::minmax_element(rep.max_ratios.begin(), rep.max_ratios.end());
  const bool finite = std::all_of(rep.max_ratios.begin(), rep.max_ratios.end(), [](double r) {
    return std::isfinite(r) && r >= 0.0;
  });
  if (!finite) {
    rep.spread = std::numeric_limits<double>::infinity();
    rep.pass = false;
  } else if (*hi == 0.0) {
    rep.degenerate = true;
    rep.spread = 1.0;
    rep.pass = true;
  } else if (*lo == 0.0) {
    rep.spread = std::numeric_limits<double>::infinity();
    rep.pass = false;
  } else {
    rep.spread = *hi / *lo;
    rep.pass = rep.spread <= factor;
  }
  return rep;
}

double lp_exponent(double alpha, double q1, double q2, int Q) {
  std::ostringstream tuple;
  tuple << "(alpha=" << alpha << ", q1=" << q1 << ", q2=" << q2 << ", Q=" << Q << ")";
  require(alpha > 0.0 && alpha < Q, "inadmissible exponent tuple " + tuple.str() + ": alpha must lie in (0, Q)");
  require(q1 >= 1.0 && q2 >= 1.0, "inadmissible exponent tuple " + tuple.str() + ": q1, q2 must be >= 1");
  const double inv = 1.0 / q1 + 1.0 / q2 - alpha / Q;
  require(inv > 0.0 && inv <= 1.0,
          "inadmissible exponent tuple " + tuple.str() + ": 1/p = 1/q1 + 1/q2 - alpha/Q must give p >= 1");
  return 1.0 / inv;
}

LpReport lp_inequality_study(const LatticeContext& ctx, const Corpus& corpus, double alpha, double q1, double q2,
                             const StudyOptions& opts) {
  require_corpus_on(ctx, corpus, "lp_inequality_study");
  const int Q = ctx.lattice->Q();
  LpReport rep;
  rep.alpha = alpha;
  rep.q1 = q1;
  rep.q2 = q2;
  rep.p = lp_exponent(alpha, q1, q2, Q);
  rep.residual = 1.0 / rep.p - 1.0 / q1 - 1.0 / q2 + alpha / Q;
  const Eigen::MatrixXd P = frac_power_matrix(ctx.decomp, {alpha / 2.0, ZeroModePolicy::keep_zero});
  const double vol = ctx.lattice->cell_volume();
  const std::size_t pairs = std::min(corpus.pair_count(), opts.max_pairs);
  rep.ratios.resize(pairs);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs); ++i) {
    const Eigen::VectorXd u = opts.scale_u * corpus.first(static_cast<std::size_t>(i));
    const Eigen::VectorXd& v = corpus.second(static_cast<std::size_t>(i));
    const double num = lp_norm(three_commutator(P, u, v), vol, rep.p);
    const double den = lp_norm(P * u, vol, q1) * lp_norm(P * v, vol, q2);
    rep.ratios[static_cast<std::size_t>(i)] = den > 0.0 ? num / den : 0.0;
  }
  rep.max_ratio = rep.ratios.empty() ? 0.0 : *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.median_ratio = median_of(rep.ratios);
  return rep;
}

IdentityCheck kernel_semigroup_check(const LatticeContext& ctx, const Corpus& corpus) {
  require_corpus_on(ctx, corpus, "kernel_semigroup_check");
  const Eigen::MatrixXd& R1 = ctx.riesz().matrix(1.0);
  const Eigen::MatrixXd& R2 = ctx.riesz().matrix(2.0);
  IdentityCheck c{"kernel semigroup (u*R1)*R1 = u*R2", 0.0, 1e-5};
  for (const Eigen::VectorXd& u : corpus.functions) {
    const Eigen::VectorXd ref = R2 * u;
    c.value = std::max(c.value, (R1 * (R1 * u) - ref).norm() / ref.norm());
  }
  return c;
}

IdentityCheck fundamental_solution_check(const LatticeContext& ctx, const Corpus& corpus) {
  require_corpus_on(ctx, corpus, "fundamental_solution_check");
  const SubLaplacianOperator L = assemble_sublaplacian(ctx.lattice);
  const Eigen::MatrixXd& R2 = ctx.riesz().matrix(2.0);
  IdentityCheck c{"fundamental solution L(u*R2) = u", 0.0, 1e-5};
  for (const Eigen::VectorXd& u : corpus.functions) {
    c.value = std::max(c.value, (L.apply(R2 * u) - u).norm() / u.norm());
  }
  return c;
}

IdentityCheck heat_route_check(const LatticeContext& ctx, std::size_t probes) {
  const SpectralDecomposition& d = ctx.decomp;
  require(probes >= 2, "heat_route_check: need at least two probes");
  IdentityCheck c{"heat-integral vs spectral L^{-1/2}", 0.0, 1e-5};
  const Eigen::Index last = d.size() - 1;
  for (std::size_t k = 0; k < probes; ++k) {
    const Eigen::Index i = 1 + static_cast<Eigen::Index>(k) * (last - 1) / static_cast<Eigen::Index>(probes - 1);
    const Eigen::VectorXd e = d.eigenvectors.col(i);
    const Eigen::VectorXd heat = heat_integral_negative_power(d, 1.0, ctx.quad, e);
    const Eigen::VectorXd spec = frac_power_apply(d, {-0.5, ZeroModePolicy::project_out}, e);
    c.value = std::max(c.value, (heat - spec).norm() / spec.norm());
  }
  return c;
}

IdentityCheck h_route_agreement(const LatticeContext& ctx, double alpha, const Corpus& calibration,
                                const Corpus& held_out) {
  require_corpus_on(ctx, calibration, "h_route_agreement");
  require_corpus_on(ctx, held_out, "h_route_agreement");
  const SingularOperator unit = make_singular_operator(periodized_singular_kernel(ctx.lattice, alpha));
  const CalibrationResult fit = calibrate_singular_constant(ctx.decomp, unit, calibration.functions);
  const SingularOperator op = unit.scaled(fit.constant);
  const Eigen::MatrixXd P = frac_power_matrix(ctx.decomp, {alpha / 2.0, ZeroModePolicy::keep_zero});
  IdentityCheck c{"H_alpha operator vs bilinear route", 0.0, 0.10};
  for (std::size_t i = 0; i < held_out.pair_count(); ++i) {
    const Eigen::VectorXd hop = three_commutator(P, held_out.first(i), held_out.second(i));
    const Eigen::VectorXd hbil = h_alpha_bilinear(op, held_out.first(i), held_out.second(i));
    c.value = std::max(c.value, (hop - hbil).norm() / hop.norm());
  }
  return c;
}

IdentityCheck geometric_route_agreement(const LatticeContext& ctx, double alpha, const Corpus& calibration,
                                        const Corpus& held_out) {
  require_corpus_on(ctx, calibration, "geometric_route_agreement");
  require_corpus_on(ctx, held_out, "geometric_route_agreement");
  const SingularOperator op = calibrated_geometric_operator(ctx.decomp, alpha, calibration.functions);
  const Eigen::MatrixXd P = frac_power_matrix(ctx.decomp, {alpha / 2.0, ZeroModePolicy::keep_zero});
  IdentityCheck c{"ML_alpha vs spectral L^{alpha/2}", 0.0, 0.15};
  for (const Eigen::VectorXd& u : held_out.functions) {
    const Eigen::VectorXd ref = P * u;
    c.value = std::max(c.value, (op.apply(u) - ref).norm() / ref.norm());
  }
  return c;
}

IdentityCheck multiplier_identity_check(int kmax) {
  IdentityCheck c{"A~(k,lambda,2) = (2k+n)|lambda|", 0.0, 1e-12};
  for (int n : {1, 2}) {
    for (double lambda : {-4.0, -1.0, -0.5, 0.5, 1.0, 4.0}) {
      for (int k = 0; k <= kmax; ++k) {
        const double exact = (2.0 * k + n) * std::abs(lambda);
        c.value = std::max(c.value, std::abs(multiplier_A_tilde({k, lambda, 2.0, n}) - exact) / exact);
      }
    }
  }
  return c;
}

IdentityCheck multiplier_asymptotic_check() {
  const MultiplierPoint pt{10000, 1.0, 1.0, 1};
  return {"|A~/A - 1| at k = 10^4", std::abs(multiplier_A_tilde(pt) / multiplier_A(pt) - 1.0), 0.01};
}

std::pair<GridFunction, GridFunction> smooth_horizontal_pair(LatticePtr lattice, std::uint64_t seed) {
  require(lattice != nullptr, "smooth_horizontal_pair: null lattice");
  const double period = lattice->h() * lattice->M();
  require(std::abs(period - 2.0 * std::numbers::pi) <= 1e-12 * period,
          "smooth_horizontal_pair: lattice must have horizontal period 2 pi");
  const int dims = 2 * lattice->n();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> wave(-1, 1);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const auto draw = [&] {
    struct Mode {
      Eigen::VectorXd k;
      double amplitude;
      double phase;
    };
    std::vector<Mode> modes;
    for (int m = 0; m < 4; ++m) {
      Eigen::VectorXd k(dims);
      for (int d = 0; d < dims; ++d) k[d] = wave(rng);
      modes.push_back({k, normal(rng), phase(rng)});
    }
    return GridFunction::sample(lattice, [modes](const GroupPoint& p) {
      double s = 0.0;
      for (const Mode& m : modes) s += m.amplitude * std::cos(m.k.dot(p.z) + m.phase);
      return s;
    });
  };
  GridFunction u = draw();
  GridFunction v = draw();
  return {std::move(u), std::move(v)};
}

LeibnizReport leibniz_refinement(std::span<const int> Ms, std::uint64_t seed) {
  require(Ms.size() >= 2, "leibniz_refinement needs at least two lattice sizes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rate(0.2, 0.6);
  const double a1 = rate(rng), a2 = rate(rng), b1 = rate(rng), b2 = rate(rng);
  const double lo = std::numbers::pi / 2.0, hi = std::numbers::pi;
  LeibnizReport rep;
  for (int M : Ms) {
    const LatticePtr lattice = Lattice::build(1, M);
    const GridFunction u = GridFunction::sample(lattice, [&](const GroupPoint& p) {
      return std::exp(a1 * p.z[0] + a2 * p.z[1]);
    });
    const GridFunction v = GridFunction::sample(lattice, [&](const GroupPoint& p) {
      return std::exp(b1 * p.z[0] + b2 * p.z[1]);
    });
    const GridFunction d = integer_leibniz_defect(u, v);
    // Stencils of nodes in [pi/2, pi]^2 never cross the period, so the
    // non-periodic samples are exact there.
    const double slack = 1e-9 * hi;
    double worst = 0.0;
    for (std::size_t i = 0; i < lattice->size(); ++i) {
      const GroupPoint p = lattice->point(i);
      if (p.z[0] >= lo - slack && p.z[0] <= hi + slack && p.z[1] >= lo - slack && p.z[1] <= hi + slack) {
        worst = std::max(worst, std::abs(d.values[static_cast<Eigen::Index>(i)]));
      }
    }
    rep.Ms.push_back(M);
    rep.defects.push_back(worst);
  }
  rep.order = std::log(rep.defects.front() / rep.defects.back()) /
              std::log(static_cast<double>(rep.Ms.back()) / rep.Ms.front());
  return rep;
}

nlohmann::json to_json(const RatioReport& report) {
  nlohmann::json samples = nlohmann::json::array();
  for (const RatioSample& s : report.samples) {
    samples.push_back({{"lhs_max", s.lhs_max},
                       {"rhs_min_positive", s.rhs_min_positive},
                       {"ratio_sup", s.ratio_sup},
                       {"excluded", s.excluded}});
  }
  return {{"study", report.study},
          {"max_ratio", report.max_ratio},
          {"median_ratio", report.median_ratio},
          {"excluded_fraction", report.excluded_fraction},
          {"rhs_floor", kRhsFloor},
          {"finite", report.finite},
          {"inconclusive", report.inconclusive},
          {"flag", report.flag},
          {"metadata", report.metadata},
          {"samples", samples}};
}

nlohmann::json to_json(const StabilityReport& report) {
  return {{"M", report.Ms},
          {"max_ratios", report.max_ratios},
          {"spread", std::isfinite(report.spread) ? nlohmann::json(report.spread) : nlohmann::json(nullptr)},
          {"factor", kStabilityFactor},
          {"pass", report.pass},
          {"degenerate", report.degenerate}};
}

nlohmann::json to_json(const LpReport& report) {
  return {{"alpha", report.alpha}, {"p", report.p},
          {"q1", report.q1},       {"q2", report.q2},
          {"residual", report.residual}, {"max_ratio", report.max_ratio},
          {"median_ratio", report.median_ratio}, {"ratios", report.ratios}};
}

nlohmann::json to_json(const EstimateInstance& inst) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t j = 0; j < inst.terms.size(); ++j) {
    terms.push_back({{"s1", inst.terms[j].first}, {"s2", inst.terms[j].second}, {"defect", inst.defect(j)}});
  }
  return {{"alpha", inst.alpha}, {"tau1", inst.tau1}, {"tau2", inst.tau2}, {"epsilon", inst.epsilon},
          {"terms", terms}};
}

nlohmann::json to_json(const TInstance& inst) {
  nlohmann::json terms = nlohmann::json::array();
  for (const TTerm& t : inst.terms) terms.push_back({{"s1", t.s1}, {"s2", t.s2}, {"st1", t.st1}, {"st2", t.st2}});
  return {{"tau", inst.tau}, {"beta", inst.beta}, {"delta", inst.delta}, {"epsilon", inst.epsilon},
          {"terms", terms}};
}

void write_ratio_csv(std::ostream& out, const RatioReport& report) {
  out << "pair,lhs_max,rhs_min_positive,ratio_sup,excluded\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const RatioSample& s = report.samples[i];
    out << i << ',' << s.lhs_max << ',' << s.rhs_min_positive << ',' << s.ratio_sup << ',' << s.excluded << '\n';
  }
}

void write_lp_csv(std::ostream& out, const LpReport& report) {
  out << "pair,ratio\n" << std::setprecision(17);
  for (std::size_t i = 0; i < report.ratios.size(); ++i) out << i << ',' << report.ratios[i] << '\n';
}

}  // namespace hfrac
