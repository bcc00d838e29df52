#pragma once

#include <json.hpp>

#include "kernrank/fredholm.hpp"
#include "kernrank/rank.hpp"
#include "kernrank/series.hpp"

namespace kernrank {

using Json = nlohmann::ordered_json;

Json to_json(const TolerancePolicy& p);
TolerancePolicy policy_from_json(const Json& j);

Json to_json(const RankReport& r);
Json to_json(const FiniteRankEstimate& e);
Json to_json(const LliProbe& p);
Json to_json(const FiniteDiffReport& r, const TaylorJet& jet);
Json to_json(const InversionReport& r);
Json to_json(const NullMomentReport& r);

/// JSON pointer to the first value that differs between a and b, or "" if equal.
/// Numbers compare by their serialized text.
std::string first_difference(const Json& a, const Json& b, const std::string& path = "");

}  // namespace kernrank
