#pragma once

// Command-line front end: lattice-info, verify and multiplier-table. The
// commands are plain functions over streams so they can be tested in-process.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hfrac/errors.hpp"
#include "hfrac/harness.hpp"

namespace hfrac::cli {

enum ExitCode { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitInconclusive = 3 };

class ConfigError : public UsageError {
 public:
  ConfigError(int line, std::string key, const std::string& message);
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Flat `key = value` text with [sections]; '#' starts a comment.
struct RunConfig {
  std::uint64_t seed = 42;

  int n = 1;
  int M = 4;
  std::vector<int> refine{4, 6};
  std::vector<int> control_refine{4, 6, 8};
  std::vector<int> leibniz_refine{4, 8};

  double alpha = 0.8;
  double tau1 = 0.8;
  double tau2 = 0.8;
  double epsilon = 0.1;
  double tau = 0.9;
  double beta = 0.3;
  double delta = 0.2;
  double t_epsilon = 0.1;
  double q1 = 4.0;
  double q2 = 4.0;
  double lp_alpha = 1.0;
  double cor11_alpha = 2.5;
  InnerOrder inner_order = InnerOrder::s_tilde_2;
  int max_terms = 25;

  CorpusKind corpus_kind = CorpusKind::heat_smoothed_noise;
  std::size_t pairs = 50;
  double t0 = 0.3;

  std::vector<std::string> studies{"multiplier-identities"};

  static RunConfig parse(std::istream& in);
  /// Re-checks every parameter constraint; throws UsageError naming it.
  void validate() const;
};

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

int cmd_lattice_info(int n, int M, double h, bool json, std::ostream& out);
int cmd_multiplier_table(int n, double alpha, int kmax, const std::vector<double>& lambdas, std::ostream& out);
/// Runs the configured studies, writes report.json and per-study CSVs into
/// out_dir (atomically) and returns the exit code.
int cmd_verify(const std::string& config_text, const std::filesystem::path& out_dir, std::ostream& log);

/// Full argument handling; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hfrac::cli
