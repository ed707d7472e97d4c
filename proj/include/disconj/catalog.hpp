#pragma once

// Reference equations with machine-checkable facts about them.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "disconj/conjugacy.hpp"
#include "disconj/report.hpp"

namespace disconj {

struct FactResult {
  bool pass = false;
  std::string detail;
};

struct KnownFact {
  std::string id;
  std::string statement;
  /// Where the expected value comes from (a closed form, an explicit
  /// solution, a derivation).
  std::string source;
  std::function<FactResult()> check;
};

struct CatalogEntry {
  std::string id;
  std::string description;
  Equation equation;
  /// A finite interval on which the equation is disconjugate.
  Interval disconjugate_on;
  std::vector<KnownFact> facts;
};

/// Parameters: A (cosh_family), b (rational_family), k (euler), delta
/// (lyapunov_sharpness), R and c (condition6_identity). Overrides replace the
/// defaults A=2, b=1, k=3, delta=0.05, R=1, c=1.
[[nodiscard]] std::vector<CatalogEntry> catalog_list(const ParamMap& overrides = {});

struct FactRun {
  std::string entry;
  std::string fact;
  std::string statement;
  std::string source;
  FactResult result;
  double elapsed_ms = 0.0;
};

/// Runs the facts of the given entries (all when `ids` is empty). Throws
/// PreconditionError for an unknown id. Results come back in catalog order.
[[nodiscard]] std::vector<FactRun> run_catalog(const std::vector<CatalogEntry>& entries,
                                               const std::vector<std::string>& ids = {}, bool parallel = true);

[[nodiscard]] Json to_json(const CatalogEntry& e);
[[nodiscard]] Json to_json(const FactRun& r, bool with_timing = true);

}  // namespace disconj
