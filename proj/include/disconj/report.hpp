#pragma once

// JSON forms shared by the command-line reports.

#include "disconj/conjugacy.hpp"
#include "json.hpp"

namespace disconj {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Finite values as numbers, infinities and NaN as the strings "inf", "-inf", "nan".
[[nodiscard]] Json json_number(double v);
[[nodiscard]] double number_from_json(const Json& j);

[[nodiscard]] Json to_json(const Interval& iv);
[[nodiscard]] Json to_json(const ExtendedPoint& p);
[[nodiscard]] Json to_json(const Witness& w);
[[nodiscard]] Json to_json(const Verdict& v);

}  // namespace disconj
