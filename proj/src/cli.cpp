#include "hfrac/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hfrac/multipliers.hpp"

namespace hfrac::cli {

namespace {

const std::vector<std::string> kStudies{"thm11",  "thm12", "cor11", "cor12", "prop61", "kernel-identities",
                                        "multiplier-identities", "negative-control", "leibniz"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& text, int line, const std::string& key) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError(line, key, "expected a number, got '" + text + "'");
  }
  return value;
}

long long parse_integer(const std::string& text, int line, const std::string& key) {
  long long value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(line, key, "expected an integer, got '" + text + "'");
  return value;
}

std::vector<int> parse_int_list(const std::string& text, int line, const std::string& key) {
  std::vector<int> out;
  for (const std::string& item : split_list(text)) out.push_back(static_cast<int>(parse_integer(item, line, key)));
  if (out.empty()) throw ConfigError(line, key, "expected a comma-separated list of integers");
  return out;
}

void validate_lattice_size(int n, int M) {
  require(n >= 1, "n must be >= 1");
  require(M >= 4 && M % 2 == 0, "M must be even and >= 4");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), "cannot write " + tmp.string());
    out << content;
    require(static_cast<bool>(out), "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

struct StudyOutcome {
  nlohmann::json entry;
  std::map<std::string, std::string> csv;  // file name -> content
  bool pass = false;
  bool inconclusive = false;
};

class VerifyRunner {
 public:
  explicit VerifyRunner(const RunConfig& cfg) : cfg_(cfg) {}

  StudyOutcome run(const std::string& name) {
    if (name == "thm11") return ratio_study(name, OperatorRoute::spectral, cfg_.alpha, cfg_.tau1, cfg_.tau2);
    if (name == "prop61") return ratio_study(name, OperatorRoute::geometric, cfg_.alpha, cfg_.tau1, cfg_.tau2);
    if (name == "cor11") {
      return ratio_study(name, OperatorRoute::spectral, cfg_.cor11_alpha, cfg_.cor11_alpha, cfg_.cor11_alpha);
    }
    if (name == "thm12") return thm12();
    if (name == "cor12") return cor12();
    if (name == "kernel-identities") return kernel_identities();
    if (name == "multiplier-identities") return multiplier_identities();
    if (name == "negative-control") return negative_control();
    if (name == "leibniz") return leibniz();
    throw UsageError("unknown study '" + name + "'");
  }

 private:
  const LatticeContext& context(int M) {
    auto it = contexts_.find(M);
    if (it == contexts_.end()) it = contexts_.emplace(M, LatticeContext::build(cfg_.n, M)).first;
    return *it->second;
  }

  const Corpus& corpus(int M) {
    auto it = corpora_.find(M);
    if (it == corpora_.end()) {
      const CorpusDescriptor desc{cfg_.corpus_kind, 2 * cfg_.pairs, cfg_.seed, cfg_.t0};
      it = corpora_.emplace(M, generate_corpus(context(M).decomp, desc)).first;
    }
    return it->second;
  }

  StudyOptions options(double scale = 1.0) const {
    StudyOptions opts;
    opts.scale_u = scale;
    opts.max_pairs = cfg_.pairs;
    opts.calibration.seed = cfg_.seed + 1;
    opts.calibration.t0 = cfg_.t0;
    return opts;
  }

  static double ratio_drift(const std::vector<RatioSample>& a, const std::vector<RatioSample>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double scale = std::max(std::abs(a[i].ratio_sup), 1e-300);
      worst = std::max(worst, std::abs(a[i].ratio_sup - b[i].ratio_sup) / scale);
    }
    return worst;
  }

  static std::string ratio_csv(const RatioReport& r) {
    std::ostringstream out;
    write_ratio_csv(out, r);
    return out.str();
  }

  StudyOutcome finish_ratio(const std::string& name, nlohmann::json params, const std::vector<RatioReport>& reports,
                            const StabilityReport& stab, double scale_error) {
    StudyOutcome o;
    double excluded = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      excluded = std::max(excluded, reports[i].excluded_fraction);
      finite = finite && reports[i].finite;
      o.inconclusive = o.inconclusive || reports[i].inconclusive;
      o.csv[name + "_M" + std::to_string(stab.Ms[i]) + ".csv"] = ratio_csv(reports[i]);
    }
    const double max_ratio = *std::max_element(stab.max_ratios.begin(), stab.max_ratios.end());
    o.pass = finite && stab.pass && scale_error <= 1e-10;
    o.entry = {{"name", name},
               {"params", std::move(params)},
               {"max_ratio", finite_or_null(max_ratio)},
               {"stability", to_json(stab)},
               {"scale_invariance_error", scale_error},
               {"finite", finite},
               {"excluded_fraction", excluded},
               {"pass", o.pass},
               {"inconclusive", o.inconclusive},
               {"flag", o.inconclusive ? kInconclusiveFlag : ""}};
    if (!stab.pass) o.entry["stability_table"] = stab.table();
    return o;
  }

  StudyOutcome ratio_study(const std::string& name, OperatorRoute route, double alpha, double tau1, double tau2) {
    const int Q = 2 * cfg_.n + 2;
    const EstimateInstance inst = generate_instance(alpha, tau1, tau2, cfg_.epsilon, Q, cfg_.max_terms, cfg_.seed);
    std::vector<RatioReport> reports;
    const StabilityReport stab = refinement_stability(cfg_.refine, [&](int M) {
      reports.push_back(ratio_study_thm11(context(M), corpus(M), inst, route, options()));
      return reports.back().max_ratio;
    });
    const int base = cfg_.refine.front();
    const RatioReport scaled = ratio_study_thm11(context(base), corpus(base), inst, route, options(3.0));
    nlohmann::json params = to_json(inst);
    params["route"] = to_string(route);
    return finish_ratio(name, params, reports, stab, ratio_drift(reports.front().samples, scaled.samples));
  }

  StudyOutcome thm12() {
    const TInstance inst = generate_t_instance(cfg_.tau, cfg_.beta, cfg_.delta, cfg_.t_epsilon);
    std::vector<RatioReport> reports;
    const StabilityReport stab = refinement_stability(cfg_.refine, [&](int M) {
      reports.push_back(ratio_study_thm12(context(M), corpus(M), inst, cfg_.inner_order, options()));
      return reports.back().max_ratio;
    });
    const int base = cfg_.refine.front();
    const RatioReport scaled = ratio_study_thm12(context(base), corpus(base), inst, cfg_.inner_order, options(3.0));
    StudyOutcome o = finish_ratio("thm12", to_json(inst), reports, stab,
                                  ratio_drift(reports.front().samples, scaled.samples));
    // beta = 0 turns the commutator into the identity's.
    const TOperators ops = TOperators::build(context(base).decomp, cfg_.tau, 0.0, cfg_.delta);
    double zero_lhs = 0.0;
    for (std::size_t i = 0; i < std::min(cfg_.pairs, corpus(base).pair_count()); ++i) {
      zero_lhs = std::max(zero_lhs, t_commutator(ops, corpus(base).first(i), corpus(base).second(i)).cwiseAbs().maxCoeff());
    }
    o.entry["beta0_lhs_max"] = zero_lhs;
    o.pass = o.pass && zero_lhs <= 1e-10;
    o.entry["pass"] = o.pass;
    return o;
  }

  StudyOutcome cor12() {
    std::vector<LpReport> reports;
    const StabilityReport stab = refinement_stability(cfg_.refine, [&](int M) {
      reports.push_back(lp_inequality_study(context(M), corpus(M), cfg_.lp_alpha, cfg_.q1, cfg_.q2, options()));
      return reports.back().max_ratio;
    });
    const int base = cfg_.refine.front();
    const LpReport scaled = lp_inequality_study(context(base), corpus(base), cfg_.lp_alpha, cfg_.q1, cfg_.q2, options(3.0));
    double scale_error = 0.0;
    for (std::size_t i = 0; i < scaled.ratios.size(); ++i) {
      const double ref = reports.front().ratios[i];
      scale_error = std::max(scale_error, std::abs(scaled.ratios[i] - ref) / std::max(ref, 1e-300));
    }
    StudyOutcome o;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      std::ostringstream csv;
      write_lp_csv(csv, reports[i]);
      o.csv["cor12_M" + std::to_string(stab.Ms[i]) + ".csv"] = csv.str();
    }
    o.pass = stab.pass && scale_error <= 1e-10;
    o.entry = {{"name", "cor12"},
               {"params", {{"alpha", cfg_.lp_alpha}, {"q1", cfg_.q1}, {"q2", cfg_.q2}, {"p", reports.front().p},
                           {"residual", reports.front().residual}}},
               {"max_ratio", finite_or_null(*std::max_element(stab.max_ratios.begin(), stab.max_ratios.end()))},
               {"stability", to_json(stab)},
               {"scale_invariance_error", scale_error},
               {"excluded_fraction", 0.0},
               {"pass", o.pass},
               {"inconclusive", false},
               {"flag", ""}};
    return o;
  }

  static StudyOutcome identity_study(const std::string& name, nlohmann::json params,
                                     const std::vector<IdentityCheck>& checks) {
    StudyOutcome o;
    o.pass = true;
    double worst = 0.0;
    nlohmann::json items = nlohmann::json::array();
    std::ostringstream csv;
    csv << "check,value,tolerance,pass\n" << std::setprecision(17);
    for (const IdentityCheck& c : checks) {
      o.pass = o.pass && c.pass();
      worst = std::max(worst, c.value / c.tolerance);
      items.push_back({{"check", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass()}});
      csv << '"' << c.name << "\"," << c.value << ',' << c.tolerance << ',' << (c.pass() ? "true" : "false") << '\n';
    }
    o.csv[name + ".csv"] = csv.str();
    o.entry = {{"name", name},
               {"params", std::move(params)},
               {"max_ratio", worst},
               {"stability", nullptr},
               {"checks", items},
               {"excluded_fraction", 0.0},
               {"pass", o.pass},
               {"inconclusive", false},
               {"flag", ""}};
    return o;
  }

  StudyOutcome kernel_identities() {
    const int base = cfg_.refine.front();
    const LatticeContext& ctx = context(base);
    const Corpus probes = generate_corpus(ctx.decomp, {cfg_.corpus_kind, 20, cfg_.seed, cfg_.t0});
    return identity_study("kernel-identities", {{"M", base}, {"functions", 20}},
                          {kernel_semigroup_check(ctx, probes), fundamental_solution_check(ctx, probes),
                           heat_route_check(ctx)});
  }

  StudyOutcome multiplier_identities() {
    return identity_study("multiplier-identities", {{"kmax", 50}},
                          {multiplier_identity_check(50), multiplier_asymptotic_check()});
  }

  StudyOutcome negative_control() {
    const int Q = 2 * cfg_.n + 2;
    const EstimateInstance inst = generate_instance(cfg_.alpha, cfg_.tau1, cfg_.tau2, cfg_.epsilon, Q,
                                                    cfg_.max_terms, cfg_.seed);
    std::vector<RieszTerm> bad;
    for (const RieszTerm& t : inst.riesz_terms()) bad.push_back({t.s1 + 1.5, t.s2 + 1.5, t.outer});
    std::vector<RatioReport> reports;
    const StabilityReport stab = refinement_stability(cfg_.control_refine, [&](int M) {
      reports.push_back(ratio_study_terms(context(M), corpus(M), inst.alpha, inst.tau1, inst.tau2, bad,
                                          OperatorRoute::spectral, options()));
      return reports.back().max_ratio;
    });
    StudyOutcome o;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      o.csv["negative-control_M" + std::to_string(stab.Ms[i]) + ".csv"] = ratio_csv(reports[i]);
    }
    // The control passes when the stability test detects the mis-specification.
    o.pass = !stab.pass && !stab.degenerate;
    o.entry = {{"name", "negative-control"},
               {"params", {{"inner_order_shift", 1.5}, {"instance", to_json(inst)}}},
               {"max_ratio", finite_or_null(*std::max_element(stab.max_ratios.begin(), stab.max_ratios.end()))},
               {"stability", to_json(stab)},
               {"drift", finite_or_null(stab.spread)},
               {"excluded_fraction", 0.0},
               {"pass", o.pass},
               {"inconclusive", false},
               {"flag", ""}};
    return o;
  }

  StudyOutcome leibniz() {
    const LeibnizReport rep = leibniz_refinement(cfg_.leibniz_refine, cfg_.seed);
    StudyOutcome o;
    o.pass = rep.order >= 1.0;
    std::ostringstream csv;
    csv << "M,defect\n" << std::setprecision(17);
    for (std::size_t i = 0; i < rep.Ms.size(); ++i) csv << rep.Ms[i] << ',' << rep.defects[i] << '\n';
    o.csv["leibniz.csv"] = csv.str();
    o.entry = {{"name", "leibniz"},
               {"params", {{"M", rep.Ms}}},
               {"max_ratio", nullptr},
               {"stability", nullptr},
               {"defects", rep.defects},
               {"order", rep.order},
               {"excluded_fraction", 0.0},
               {"pass", o.pass},
               {"inconclusive", false},
               {"flag", ""}};
    return o;
  }

  const RunConfig& cfg_;
  std::map<int, ContextPtr> contexts_;
  std::map<int, Corpus> corpora_;
};

}  // namespace

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : UsageError("config line " + std::to_string(line) + ", key '" + key + "': " + message),
      line_(line),
      key_(std::move(key)) {}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig cfg;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(line, text, "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(line, text, "expected 'key = value'");
    const std::string name = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const std::string key = section.empty() ? name : section + "." + name;
    if (value.empty()) throw ConfigError(line, key, "missing value");

    const auto number = [&] { return parse_double(value, line, key); };
    const auto integer = [&] { return static_cast<int>(parse_integer(value, line, key)); };

    if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_integer(value, line, key));
    } else if (key == "lattice.n") {
      cfg.n = integer();
    } else if (key == "lattice.M" || key == "lattice.m") {
      cfg.M = integer();
      cfg.refine.front() = cfg.M;
    } else if (key == "lattice.refine") {
      cfg.refine = parse_int_list(value, line, key);
    } else if (key == "lattice.control_refine") {
      cfg.control_refine = parse_int_list(value, line, key);
    } else if (key == "lattice.leibniz_refine") {
      cfg.leibniz_refine = parse_int_list(value, line, key);
    } else if (key == "thm11.alpha") {
      cfg.alpha = number();
    } else if (key == "thm11.tau1") {
      cfg.tau1 = number();
    } else if (key == "thm11.tau2") {
      cfg.tau2 = number();
    } else if (key == "thm11.epsilon") {
      cfg.epsilon = number();
    } else if (key == "thm11.max_terms") {
      cfg.max_terms = integer();
    } else if (key == "thm12.tau") {
      cfg.tau = number();
    } else if (key == "thm12.beta") {
      cfg.beta = number();
    } else if (key == "thm12.delta") {
      cfg.delta = number();
    } else if (key == "thm12.epsilon") {
      cfg.t_epsilon = number();
    } else if (key == "thm12.inner_order") {
      if (value == "s_tilde_2") {
        cfg.inner_order = InnerOrder::s_tilde_2;
      } else if (value == "s_tilde_1") {
        cfg.inner_order = InnerOrder::s_tilde_1;
      } else {
        throw ConfigError(line, key, "expected s_tilde_2 or s_tilde_1");
      }
    } else if (key == "cor11.alpha") {
      cfg.cor11_alpha = number();
    } else if (key == "cor12.alpha") {
      cfg.lp_alpha = number();
    } else if (key == "cor12.q1") {
      cfg.q1 = number();
    } else if (key == "cor12.q2") {
      cfg.q2 = number();
    } else if (key == "corpus.kind") {
      try {
        cfg.corpus_kind = parse_corpus_kind(value);
      } catch (const UsageError& e) {
        throw ConfigError(line, key, e.what());
      }
    } else if (key == "corpus.pairs") {
      const long long pairs = parse_integer(value, line, key);
      if (pairs < 1) throw ConfigError(line, key, "pairs must be >= 1");
      cfg.pairs = static_cast<std::size_t>(pairs);
    } else if (key == "corpus.t0") {
      cfg.t0 = number();
    } else if (key == "studies.run") {
      cfg.studies = split_list(value);
      for (const std::string& s : cfg.studies) {
        if (std::find(kStudies.begin(), kStudies.end(), s) == kStudies.end()) {
          throw ConfigError(line, key, "unknown study '" + s + "'");
        }
      }
    } else {
      throw ConfigError(line, key, "unknown key");
    }
  }
  return cfg;
}

void RunConfig::validate() const {
  validate_lattice_size(n, M);
  for (const auto* list : {&refine, &control_refine, &leibniz_refine}) {
    require(list->size() >= 2, "refinement lists need at least two lattice sizes");
    for (int m : *list) validate_lattice_size(n, m);
  }
  const int Q = 2 * n + 2;
  require(max_terms >= 1, "max_terms must be >= 1");
  require(t0 > 0.0, "corpus t0 must be > 0");
  require(!studies.empty(), "studies.run lists no study");
  EstimateInstance{alpha, tau1, tau2, epsilon, {}}.validate_parameters(Q);
  TInstance{tau, beta, delta, t_epsilon, {}}.validate_parameters();
  lp_exponent(lp_alpha, q1, q2, Q);
  const auto wants = [&](const char* s) { return std::find(studies.begin(), studies.end(), s) != studies.end(); };
  if (wants("cor11")) EstimateInstance{cor11_alpha, cor11_alpha, cor11_alpha, epsilon, {}}.validate_parameters(Q);
  if (wants("prop61")) {
    require(alpha < 2.0 && tau1 < 2.0 && tau2 < 2.0, "prop61 needs alpha, tau1, tau2 < 2 (geometric kernels)");
  }
  if (wants("leibniz")) require(n == 1, "the leibniz study runs on n = 1 lattices");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

int cmd_lattice_info(int n, int M, double h, bool json, std::ostream& out) {
  const LatticePtr lattice = h > 0.0 ? Lattice::build(n, M, h) : Lattice::build(n, M);
  const nlohmann::json info = to_json(*lattice);
  if (json) {
    out << info.dump(2) << '\n';
    return kExitPass;
  }
  out << std::setprecision(12);
  out << "n = " << lattice->n() << '\n'
      << "M = " << lattice->M() << '\n'
      << "M_t = " << lattice->vertical_period() << '\n'
      << "vertical_levels = " << lattice->vertical_levels() << '\n'
      << "N = " << lattice->size() << '\n'
      << "h = " << lattice->h() << '\n'
      << "h_t = " << lattice->h_t() << '\n'
      << "cell_volume = " << lattice->cell_volume() << '\n'
      << "Q = " << lattice->Q() << '\n';
  return kExitPass;
}

int cmd_multiplier_table(int n, double alpha, int kmax, const std::vector<double>& lambdas, std::ostream& out) {
  const std::vector<MultiplierRow> rows = multiplier_table(n, alpha, kmax, lambdas);
  write_multiplier_csv(out, rows);
  return kExitPass;
}

int cmd_verify(const std::string& config_text, const std::filesystem::path& out_dir, std::ostream& log) {
  std::istringstream in(config_text);
  RunConfig cfg = RunConfig::parse(in);
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  VerifyRunner runner(cfg);
  nlohmann::json studies = nlohmann::json::array();
  bool any_fail = false, any_inconclusive = false;
  for (const std::string& name : cfg.studies) {
    const auto start = std::chrono::steady_clock::now();
    StudyOutcome o = runner.run(name);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& [file, content] : o.csv) write_atomically(out_dir / file, content);
    any_fail = any_fail || !o.pass;
    any_inconclusive = any_inconclusive || o.inconclusive;
    log << (o.inconclusive ? "INCONCLUSIVE" : o.pass ? "PASS" : "FAIL") << ' ' << name << " (" << std::fixed
        << std::setprecision(2) << seconds << " s)" << std::defaultfloat << '\n';
    studies.push_back(std::move(o.entry));
  }

  nlohmann::json report = {{"schema_version", kSchemaVersion},
                           {"config_hash", fnv1a_hex(config_text)},
                           {"timestamp", utc_timestamp()},
                           {"seed", cfg.seed},
                           {"lattice", {{"n", cfg.n}, {"M", cfg.M}, {"refine", cfg.refine}}},
                           {"studies", studies}};
  write_atomically(out_dir / "report.json", report.dump(2) + "\n");
  if (any_fail) return kExitFail;
  return any_inconclusive ? kExitInconclusive : kExitPass;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional sub-Laplacian commutator estimates on Heisenberg lattices", "hfrac"};
  app.require_subcommand(1);

  int info_n = 1, info_m = 4;
  double info_h = 0.0;
  bool info_json = false;
  auto* info = app.add_subcommand("lattice-info", "Print lattice sizes and spacings");
  info->add_option("--n", info_n, "Group parameter n")->required();
  info->add_option("--m", info_m, "Horizontal period M (even, >= 4)")->required();
  info->set_help_flag("--help", "Print this help message and exit");
  info->add_option("--h", info_h, "Horizontal spacing (default 2 pi / M)");
  info->add_flag("--json", info_json, "Print JSON");

  std::string config_path, out_dir;
  auto* verify = app.add_subcommand("verify", "Run the configured estimate studies");
  verify->add_option("--config", config_path, "Config file")->required();
  verify->add_option("--out", out_dir, "Output directory")->required();

  int table_n = 1, kmax = 0;
  double table_alpha = 1.0;
  std::vector<std::string> lambda_args;
  auto* table = app.add_subcommand("multiplier-table", "Print A and A~ multipliers as CSV");
  table->add_option("--n", table_n, "Group parameter n");
  table->add_option("--alpha", table_alpha, "Order alpha in (0, Q)")->required();
  table->add_option("--kmax", kmax, "Largest Laguerre index")->required();
  table->add_option("--lambdas", lambda_args, "Central frequencies (comma or space separated)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (*info) return cmd_lattice_info(info_n, info_m, info_h, info_json, out);
    if (*table) {
      std::vector<double> lambdas;
      for (const std::string& arg : lambda_args) {
        for (const std::string& item : split_list(arg)) lambdas.push_back(parse_double(item, 0, "--lambdas"));
      }
      return cmd_multiplier_table(table_n, table_alpha, kmax, lambdas, out);
    }
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      err << "error: cannot read config " << config_path << '\n';
      return kExitUsage;
    }
    std::ostringstream text;
    text << in.rdbuf();
    return cmd_verify(text.str(), out_dir, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace hfrac::cli
