#include "sce/report.hpp"

namespace sce {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::HoldsOnSample: return "HOLDS_ON_SAMPLE";
    case Verdict::Violated: return "VIOLATED";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

}  // namespace sce
