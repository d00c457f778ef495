#include "opsynth/errors.hpp"

namespace opsynth {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kCutoff: return "cutoff";
    case ErrorKind::kUnmeasurableElement: return "unmeasurable-element";
    case ErrorKind::kConditioning: return "conditioning";
    case ErrorKind::kNumerical: return "numerical";
  }
  return "unknown";
}

}  // namespace opsynth
