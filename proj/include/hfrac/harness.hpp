#pragma once

// Corpora, norms and the ratio studies that operationalize the pointwise and
// L^p estimates: finiteness, refinement stability within a factor 2, and
// scale invariance of the LHS/RHS ratios.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hfrac/commutators.hpp"
#include "hfrac/kernels.hpp"
#include "hfrac/lattice.hpp"
#include "hfrac/spectral.hpp"

namespace hfrac {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kRhsFloor = 1e-12;
inline constexpr double kMaxExcludedFraction = 0.01;
inline constexpr double kStabilityFactor = 2.0;
inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();
inline constexpr const char* kInconclusiveFlag = "inconclusive: RHS floor exclusions exceed 1%";

/// Lattice, its periodic sub-Laplacian spectrum and the Riesz operator cache.
class LatticeContext {
 public:
  static std::shared_ptr<const LatticeContext> build(int n, int M);
  LatticeContext(const LatticeContext&) = delete;
  LatticeContext& operator=(const LatticeContext&) = delete;

  LatticePtr lattice;
  SpectralDecomposition decomp;
  HeatQuadrature quad;
  const RieszFamily& riesz() const { return *riesz_; }

 private:
  LatticeContext() = default;
  std::unique_ptr<RieszFamily> riesz_;
};
using ContextPtr = std::shared_ptr<const LatticeContext>;

enum class CorpusKind { heat_smoothed_noise, gauge_bump, eigen_mix };
CorpusKind parse_corpus_kind(std::string_view name);
std::string to_string(CorpusKind kind);

struct CorpusDescriptor {
  CorpusKind kind = CorpusKind::heat_smoothed_noise;
  std::size_t count = 100;
  std::uint64_t seed = 42;
  double t0 = 0.3;
};

struct Corpus {
  LatticePtr lattice;
  std::vector<Eigen::VectorXd> functions;  ///< mean-zero
  CorpusDescriptor descriptor;

  std::size_t pair_count() const { return functions.size() / 2; }
  const Eigen::VectorXd& first(std::size_t pair) const { return functions.at(2 * pair); }
  const Eigen::VectorXd& second(std::size_t pair) const { return functions.at(2 * pair + 1); }
};

/// heat-smoothed-noise: e^{-t0 L} xi, xi seeded white noise.
/// gauge-bump: three seeded bumps exp(-|c^{-1}x|^2 / (4 t0)) with normal amplitudes.
/// eigen-mix: normal coefficients times e^{-t0 lambda} on the 32 lowest nonzero modes.
/// All elements have their mean removed.
Corpus generate_corpus(const SpectralDecomposition& decomp, const CorpusDescriptor& desc);

/// (sum |u|^p vol)^{1/p}; max norm for p = kLpInfinity. p >= 1.
double lp_norm(const Eigen::VectorXd& u, double cell_volume, double p);
double lp_norm(const GridFunction& u, double p);

struct RatioSample {
  double lhs_max = 0.0;
  double rhs_min_positive = 0.0;
  double ratio_sup = 0.0;
  std::size_t excluded = 0;
};

/// sup_x |lhs(x)| / rhs(x) over nodes with rhs >= kRhsFloor * max(rhs). Nodes
/// where lhs and rhs both vanish count as ratio 0; other sub-floor nodes are
/// excluded and counted.
RatioSample ratio_sample(const Eigen::VectorXd& lhs, const Eigen::VectorXd& rhs);

struct RatioReport {
  std::string study;
  std::vector<RatioSample> samples;
  std::size_t nodes_per_sample = 0;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  double excluded_fraction = 0.0;
  bool finite = true;
  bool inconclusive = false;
  std::string flag;
  nlohmann::json metadata;

  void summarize();
};

enum class OperatorRoute { spectral, geometric };
OperatorRoute parse_route(std::string_view name);
std::string to_string(OperatorRoute route);

struct StudyOptions {
  /// Multiplies the first function of every pair (scale-invariance probe).
  double scale_u = 1.0;
  std::size_t max_pairs = std::numeric_limits<std::size_t>::max();
  /// Corpus used to calibrate geometric operators.
  CorpusDescriptor calibration{CorpusKind::heat_smoothed_noise, 20, 7, 0.3};
};

/// LHS |H_alpha(u,v)| with a = P_tau1 u, b = P_tau2 v, where P is L^{tau/2}
/// (spectral) or the calibrated ML_tau (geometric), against sum_j terms.
/// The terms are not validated (negative controls use this directly).
RatioReport ratio_study_terms(const LatticeContext& ctx, const Corpus& corpus, double alpha, double tau1, double tau2,
                              std::span<const RieszTerm> terms, OperatorRoute route, const StudyOptions& opts = {});
RatioReport ratio_study_thm11(const LatticeContext& ctx, const Corpus& corpus, const EstimateInstance& inst,
                              OperatorRoute route, const StudyOptions& opts = {});
RatioReport ratio_study_thm12(const LatticeContext& ctx, const Corpus& corpus, const TInstance& inst,
                              InnerOrder inner = InnerOrder::s_tilde_2, const StudyOptions& opts = {});

struct StabilityReport {
  std::vector<int> Ms;
  std::vector<double> max_ratios;
  double spread = 1.0;  ///< max / min over M
  bool pass = true;
  bool degenerate = false;  ///< every ratio was zero (vacuous pass)

  std::string table() const;
};

/// Runs study(M) for every M and compares the returned max ratios.
StabilityReport refinement_stability(std::span<const int> Ms, const std::function<double(int)>& study,
                                     double factor = kStabilityFactor);

/// p from 1/p = 1/q1 + 1/q2 - alpha/Q; throws unless p >= 1.
double lp_exponent(double alpha, double q1, double q2, int Q);

struct LpReport {
  double alpha = 0.0;
  double p = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double residual = 0.0;  ///< 1/p - 1/q1 - 1/q2 + alpha/Q
  std::vector<double> ratios;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
};

LpReport lp_inequality_study(const LatticeContext& ctx, const Corpus& corpus, double alpha, double q1, double q2,
                             const StudyOptions& opts = {});

/// Scalar identity checks reported as value <= tolerance.
struct IdentityCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass() const { return value <= tolerance; }
};

/// max_u ||R_1 R_1 u - R_2 u|| / ||R_2 u||.
IdentityCheck kernel_semigroup_check(const LatticeContext& ctx, const Corpus& corpus);
/// max_u ||L R_2 u - u|| / ||u||.
IdentityCheck fundamental_solution_check(const LatticeContext& ctx, const Corpus& corpus);
/// Heat-integral vs eigen route for L^{-1/2} on eigenvector probes.
IdentityCheck heat_route_check(const LatticeContext& ctx, std::size_t probes = 16);
/// Operator vs bilinear H_alpha after calibration on a separate corpus; max
/// relative L^2 over held-out pairs.
IdentityCheck h_route_agreement(const LatticeContext& ctx, double alpha, const Corpus& calibration,
                                const Corpus& held_out);
/// Calibrated PV operator vs L^{alpha/2}; max relative L^2 over the held-out corpus.
IdentityCheck geometric_route_agreement(const LatticeContext& ctx, double alpha, const Corpus& calibration,
                                        const Corpus& held_out);
/// max over k <= kmax, lambda in {+-0.5, +-1, +-4}, n in {1, 2} of
/// |A~(k,lambda,2) - (2k+n)|lambda|| / ((2k+n)|lambda|).
IdentityCheck multiplier_identity_check(int kmax = 50);
/// |A~/A - 1| at (k, alpha, n) = (10^4, 1, 1).
IdentityCheck multiplier_asymptotic_check();

/// Seeded smooth t-independent test pair on an n = 1 lattice.
std::pair<GridFunction, GridFunction> smooth_horizontal_pair(LatticePtr lattice, std::uint64_t seed);

/// Max-norm of the integer Leibniz defect for seeded exponentials
/// exp(a.z), exp(b.z) (rates in [0.2, 0.6]) over the window [pi/2, pi]^2 of an
/// n = 1 lattice with period 2 pi, for each M.
struct LeibnizReport {
  std::vector<int> Ms;
  std::vector<double> defects;  ///< max-norm of the defect
  double order = 0.0;           ///< log(d_first / d_last) / log(M_last / M_first)
};
LeibnizReport leibniz_refinement(std::span<const int> Ms, std::uint64_t seed);

nlohmann::json to_json(const RatioReport& report);
nlohmann::json to_json(const StabilityReport& report);
nlohmann::json to_json(const LpReport& report);
nlohmann::json to_json(const EstimateInstance& inst);
nlohmann::json to_json(const TInstance& inst);

/// CSV: pair,lhs_max,rhs_min_positive,ratio_sup,excluded.
void write_ratio_csv(std::ostream& out, const RatioReport& report);
/// CSV: pair,ratio.
void write_lp_csv(std::ostream& out, const LpReport& report);

}  // namespace hfrac
