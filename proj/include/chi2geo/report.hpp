#pragma once

#include "chi2geo/characterizer.hpp"
#include "chi2geo/verifier.hpp"

#include <json.hpp>

#include <string>

namespace chi2geo {

/// Field names are part of the CLI's output schema; keep them stable.
[[nodiscard]] nlohmann::ordered_json to_json(const ChiSquareVerdict& v);
[[nodiscard]] nlohmann::ordered_json to_json(const CumulantEstimate& e);
[[nodiscard]] nlohmann::ordered_json to_json(const VerifyThresholds& t);
[[nodiscard]] nlohmann::ordered_json to_json(const CumulantMismatch& m);
[[nodiscard]] nlohmann::ordered_json to_json(const VerificationReport& r);

/// Prose summaries for --format human.
[[nodiscard]] std::string render_human(const ChiSquareVerdict& v);
[[nodiscard]] std::string render_human(const VerificationReport& r);

}  // namespace chi2geo
