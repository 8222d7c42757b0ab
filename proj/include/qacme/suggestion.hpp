#pragma once

#include <string>

namespace qacme {

// One completion proposed by an engine: normalized text plus the engine's
// relevance weight (>= 0).
struct Suggestion {
  std::string text;
  double score = 0.0;

  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

}  // namespace qacme
