#include "seiprd/errors.hpp"

namespace seiprd {

std::string_view category_name(ErrorCategory category)
{
  switch (category) {
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::diverged: return "integration-diverged";
    case ErrorCategory::alignment: return "alignment";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::ordering: return "ordering";
    case ErrorCategory::format: return "format";
    case ErrorCategory::initialisation: return "initialisation";
    case ErrorCategory::degenerate: return "degenerate-distribution";
    case ErrorCategory::io: return "io";
    case ErrorCategory::config: return "config";
  }
  return "unknown";
}

int exit_code(ErrorCategory category) { return 2 + static_cast<int>(category); }

}  // namespace seiprd
