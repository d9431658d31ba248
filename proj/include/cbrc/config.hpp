#pragma once

// JSON problem configurations and solution files for the command-line tool.
// The schema is documented in docs/config.md.

#include <optional>
#include <string>
#include <vector>

#include "cbrc/design.hpp"

namespace cbrc {

/// Malformed or invalid input; the message names the offending field path
/// (or line and column for syntax errors).
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

enum class CriterionFamily { Cbrc, RcrLinear, RcrImse, PaperExample };

struct ProblemConfig {
  std::shared_ptr<const CbrcProblem> problem;
  CriterionFamily family = CriterionFamily::Cbrc;
  /// Original document, kept so sweeps can rebuild the problem per rho.
  std::string text;
};

/// Parses a configuration document. `rho` overrides the slope parameter of
/// sweepable criteria (paper_example, rcr_linear, rcr_imse).
ProblemConfig parse_config(const std::string& text, std::optional<double> rho = std::nullopt);
ProblemConfig load_config(const std::string& path, std::optional<double> rho = std::nullopt);

/// Rebuilds the configuration with rho applied; ConfigError when the criterion
/// has no rho parameter.
ProblemConfig with_rho(const ProblemConfig& cfg, double rho);

/// Reads design weights from a solution file written by `cbrc solve` or a
/// design file ({"weights": [...]} or {"design": [{"label", "weight"}]}).
std::vector<double> parse_design(const std::string& text, const DesignSpace& space);
std::vector<double> load_design(const std::string& path, const DesignSpace& space);

std::string read_file(const std::string& path);

}  // namespace cbrc
