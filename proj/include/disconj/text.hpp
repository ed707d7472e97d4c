#pragma once

#include <string>

namespace disconj {

/// Shortest decimal text that parses back to the same double; infinities are
/// written "inf" / "-inf", NaN as "nan".
[[nodiscard]] std::string format_number(double v);

}  // namespace disconj
