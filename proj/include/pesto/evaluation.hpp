#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pesto/datastore.hpp"
#include "pesto/scoring_kernels.hpp"

namespace pesto {

struct MetricBinding {
  std::string header;
  std::string accessor;
  Direction direction = Direction::higher_better;
  double weight = 1.0;

  friend bool operator==(const MetricBinding &, const MetricBinding &) = default;
};

struct CategorySpec {
  std::string name;
  double weight = 1.0;
  /// Empty for placeholder categories; those are never scored.
  std::vector<MetricBinding> metrics;

  friend bool operator==(const CategorySpec &, const CategorySpec &) = default;
};

struct EvaluationModel {
  std::string model_name;
  std::vector<CategorySpec> categories;

  const CategorySpec *find(std::string_view category) const;
  std::vector<std::string> category_names() const;

  friend bool operator==(const EvaluationModel &, const EvaluationModel &) = default;
};

class InvalidConfig : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::string_view to_string(Direction direction);

/// Validates and fills defaults (direction higher_better, weights 1).
/// Accepts "Header" or "header" for the display name.
EvaluationModel parse_model(const nlohmann::json &config);
EvaluationModel parse_model_text(std::string_view text);
EvaluationModel load_model(const std::filesystem::path &path);

nlohmann::ordered_json model_to_json(const EvaluationModel &model);
/// Writes atomically.
void save_model(const EvaluationModel &model, const std::filesystem::path &path);

/// OSSPAL with the Community, Support and Software Technology Attributes
/// metric lists populated; the other four categories are placeholders.
const EvaluationModel &default_model();
/// Popularity only: stars and watchers.
const EvaluationModel &minimal_model();

using ScoreMap = std::map<std::string, std::optional<double>>;

/// Map-keyed form of min_max_normalize.
ScoreMap normalize_metric(const ScoreMap &values, Direction direction);

struct RankEntry {
  std::string candidate;
  std::optional<double> score;
  /// Dense rank starting at 1; absent for candidates without a score.
  std::optional<int> rank;

  friend bool operator==(const RankEntry &, const RankEntry &) = default;
};
using Ranking = std::vector<RankEntry>;

/// Descending by score with dense ranks (ties share a rank and are listed
/// by name); unscored candidates come last, by name.
Ranking rank(const ScoreMap &scores);

struct MetricColumn {
  MetricBinding binding;
  /// Both aligned with ComparisonResult::candidates.
  std::vector<std::optional<double>> raw;
  std::vector<std::optional<double>> normalized;
};

struct CategoryResult {
  std::string name;
  double weight = 1.0;
  std::vector<MetricColumn> metrics;
  std::vector<std::optional<double>> scores;
  Ranking ranking;
};

struct ComparisonResult {
  std::string model_name;
  std::vector<std::string> candidates;
  std::vector<CategoryResult> categories;
  std::vector<std::optional<double>> overall;
  Ranking overall_ranking;

  const CategoryResult *find(std::string_view category) const;
};

/// Scores one category across every record of the dataset.
CategoryResult score_category(const CategorySpec &category, const Dataset &dataset);

ComparisonResult score_overall(const EvaluationModel &model, const Dataset &dataset);

/// Restricts a dataset to the named candidates (in dataset order).
/// Throws std::out_of_range naming the first unknown candidate.
Dataset select_candidates(const Dataset &dataset, const std::vector<std::string> &names);

/// JSON view of a comparison. With `category`, only that block is emitted
/// and the overall section is omitted; an unknown name throws std::out_of_range.
nlohmann::ordered_json comparison_to_json(const ComparisonResult &result,
                                          const std::optional<std::string> &category = {});

/// The exact bytes served by /api/comparison and printed by `compare --format json`.
std::string comparison_json_text(const ComparisonResult &result,
                                 const std::optional<std::string> &category = {});

} // namespace pesto
