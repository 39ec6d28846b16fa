#pragma once

#include "chi2geo/rng.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chi2geo::cli {

// Exit codes: analysis finished (0), statistical gate failed (1), malformed
// input or usage (2), validation failure (3), parameter out of range (4).
inline constexpr int kExitOk = 0;
inline constexpr int kExitGateFailed = 1;
inline constexpr int kExitMalformed = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitRange = 4;

/// Input that is not a well-formed spec document.
class MalformedInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// {"mu": [...], "cov": [[...], ...], "label": optional}
struct SpecDocument {
  Eigen::VectorXd mu;
  Eigen::MatrixXd cov;
  std::optional<std::string> label;
};

/// Throws MalformedInput for wrong JSON shape or ragged rows. A square cov
/// whose size differs from len(mu) parses fine and fails later in validation.
[[nodiscard]] SpecDocument parse_spec_document(const nlohmann::json& doc);
[[nodiscard]] nlohmann::ordered_json to_json(const SpecDocument& doc);

struct GenerateOptions {
  int dim = 0;
  int rank = 0;
  double ncp = 0.0;
  std::uint64_t seed = 0;
  double perturb = 0.0;
};

/// Random rank-k orthogonal projection C and mean of length ncp inside
/// Image(C). A positive perturbation is added to one eigenvalue: a unit one
/// when rank >= 1, otherwise a zero one. Throws std::invalid_argument for
/// inconsistent parameters.
[[nodiscard]] SpecDocument generate_spec(const GenerateOptions& opts, Generator gen);

/// Runs the command line `args` (args[0] is the program name). Reports go to
/// `out`, diagnostics and structured errors to `err`. `generator_env` is the
/// value of CHI2GEO_GENERATOR, if set. Returns the process exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err, const std::optional<std::string>& generator_env);

}  // namespace chi2geo::cli
