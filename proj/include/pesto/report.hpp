#pragma once

#include <optional>
#include <string>

#include "pesto/evaluation.hpp"

namespace pesto {

/// Human-readable comparison: one block per category with raw values,
/// normalized values in parentheses, scores and ranks; then the overall block.
std::string render_comparison_table(const ComparisonResult &result,
                                    const std::optional<std::string> &category = {});

/// Flat CSV: one row per candidate, a score and rank column pair per
/// category, then overall score and rank.
std::string render_comparison_csv(const ComparisonResult &result,
                                  const std::optional<std::string> &category = {});

} // namespace pesto
