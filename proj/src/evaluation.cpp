#include "pesto/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pesto/metrics.hpp"

namespace pesto {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kOsspalConfig = R"json({
  "model_name": "OSSPAL",
  "categories": [
    {
      "name": "Community",
      "weight": 1,
      "metrics": [
        {"Header": "#Watch", "accessor": "watcher_count", "direction": "higher_better", "weight": 1},
        {"Header": "#Star", "accessor": "star_count", "direction": "higher_better", "weight": 1},
        {"Header": "Age (days)", "accessor": "age_days", "direction": "higher_better", "weight": 1},
        {"Header": "Avg issue active time (days)", "accessor": "avg_issue_active_time_days", "direction": "lower_better", "weight": 1},
        {"Header": "Avg issue comments", "accessor": "avg_issue_comments", "direction": "higher_better", "weight": 1},
        {"Header": "#Pull requests", "accessor": "pull_request_count", "direction": "higher_better", "weight": 1},
        {"Header": "#Issue raisers", "accessor": "issue_raiser_count", "direction": "higher_better", "weight": 1}
      ]
    },
    {
      "name": "Support",
      "weight": 1,
      "metrics": [
        {"Header": "Avg issue closed time (days)", "accessor": "avg_issue_close_time_days", "direction": "lower_better", "weight": 1},
        {"Header": "#Contributors", "accessor": "contributor_count", "direction": "higher_better", "weight": 1},
        {"Header": "#Org issue raisers", "accessor": "org_issue_raiser_count", "direction": "higher_better", "weight": 1}
      ]
    },
    {"name": "Operational Software Characteristics", "weight": 1, "metrics": []},
    {"name": "Documentation", "weight": 1, "metrics": []},
    {
      "name": "Software Technology Attributes",
      "weight": 1,
      "metrics": [
        {"Header": "#Open issues", "accessor": "open_issue_count", "direction": "lower_better", "weight": 1},
        {"Header": "#Dependencies", "accessor": "dependency_count", "direction": "lower_better", "weight": 1}
      ]
    },
    {"name": "Functionality", "weight": 1, "metrics": []},
    {"name": "Development Process", "weight": 1, "metrics": []}
  ]
}
)json";

constexpr std::string_view kMinimalConfig = R"json({
  "model_name": "Minimal",
  "categories": [
    {
      "name": "Popularity",
      "weight": 1,
      "metrics": [
        {"Header": "#Star", "accessor": "star_count", "direction": "higher_better", "weight": 1},
        {"Header": "#Watch", "accessor": "watcher_count", "direction": "higher_better", "weight": 1}
      ]
    }
  ]
}
)json";

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

/// Rewrites a JavaScript object literal (bare keys, single quotes, comments,
/// trailing commas, optional `export default` / `module.exports =` prefix)
/// into strict JSON.
/// Drops // and /* */ comments outside string literals.
std::string strip_comments(std::string_view src) {
  std::string out;
  std::size_t i = 0;
  const auto n = src.size();
  while (i < n) {
    const char c = src[i];
    if (c == '"' || c == '\'') {
      const auto start = i++;
      while (i < n && src[i] != c) {
        i += src[i] == '\\' ? 2 : 1;
      }
      i = std::min(i + 1, n);
      out += src.substr(start, i - start);
    } else if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') {
        ++i;
      }
    } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      const auto end = src.find("*/", i + 2);
      i = end == std::string_view::npos ? n : end + 2;
      out.push_back(' ');
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

std::string relaxed_to_json(std::string_view original) {
  const std::string uncommented = strip_comments(original);
  std::string_view trimmed = uncommented;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) {
    trimmed.remove_prefix(1);
  }
  for (const std::string_view prefix : {"export default", "module.exports ="}) {
    if (trimmed.substr(0, prefix.size()) == prefix) {
      trimmed.remove_prefix(prefix.size());
      break;
    }
  }
  while (!trimmed.empty() && (std::isspace(static_cast<unsigned char>(trimmed.back())) ||
                              trimmed.back() == ';')) {
    trimmed.remove_suffix(1);
  }

  std::string out;
  std::size_t i = 0;
  const auto n = trimmed.size();
  while (i < n) {
    const char c = trimmed[i];
    if (c == '"' || c == '\'') {
      const char quote = c;
      out.push_back('"');
      ++i;
      while (i < n && trimmed[i] != quote) {
        if (trimmed[i] == '\\' && i + 1 < n) {
          if (trimmed[i + 1] == '\'') {
            out.push_back('\'');
          } else {
            out.push_back('\\');
            out.push_back(trimmed[i + 1]);
          }
          i += 2;
          continue;
        }
        if (trimmed[i] == '"') {
          out += "\\\"";
        } else {
          out.push_back(trimmed[i]);
        }
        ++i;
      }
      out.push_back('"');
      ++i;
    } else if (c == ',') {
      auto j = i + 1;
      while (j < n && std::isspace(static_cast<unsigned char>(trimmed[j]))) {
        ++j;
      }
      if (j >= n || trimmed[j] == '}' || trimmed[j] == ']') {
        i = j;
      } else {
        out.push_back(',');
        ++i;
      }
    } else if (is_ident_start(c)) {
      auto j = i;
      while (j < n && is_ident_char(trimmed[j])) {
        ++j;
      }
      const auto word = trimmed.substr(i, j - i);
      auto k = j;
      while (k < n && std::isspace(static_cast<unsigned char>(trimmed[k]))) {
        ++k;
      }
      if (k < n && trimmed[k] == ':') {
        out += fmt::format("\"{}\"", word);
      } else {
        out += word;
      }
      i = j;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

double read_weight(const json &obj, const std::string &where) {
  const auto it = obj.find("weight");
  if (it == obj.end() || it->is_null()) {
    return 1.0;
  }
  if (!it->is_number()) {
    throw InvalidConfig(fmt::format("{}: weight must be a number", where));
  }
  const double w = it->get<double>();
  if (!std::isfinite(w) || w <= 0.0) {
    throw InvalidConfig(fmt::format("{}: weight must be positive (got {})", where, w));
  }
  return w;
}

std::string valid_accessor_list() {
  const auto names = numeric_accessors();
  return fmt::format("{}", fmt::join(names.begin(), names.end(), ", "));
}

MetricBinding parse_binding(const json &m, const std::string &category) {
  if (!m.is_object()) {
    throw InvalidConfig(fmt::format("category '{}': metric entries must be objects", category));
  }
  MetricBinding b;
  const auto accessor = m.find("accessor");
  if (accessor == m.end() || !accessor->is_string()) {
    throw InvalidConfig(fmt::format("category '{}': metric without an accessor", category));
  }
  b.accessor = accessor->get<std::string>();
  if (!is_numeric_accessor(b.accessor)) {
    throw InvalidConfig(fmt::format("category '{}': unknown accessor '{}'; valid accessors: {}",
                                    category, b.accessor, valid_accessor_list()));
  }
  auto header = m.find("Header");
  if (header == m.end()) {
    header = m.find("header");
  }
  if (header != m.end() && !header->is_string()) {
    throw InvalidConfig(fmt::format("category '{}': Header must be a string", category));
  }
  b.header = header != m.end() ? header->get<std::string>() : b.accessor;

  if (const auto dir = m.find("direction"); dir != m.end() && !dir->is_null()) {
    const auto value = dir->is_string() ? dir->get<std::string>() : std::string();
    if (value == "higher_better") {
      b.direction = Direction::higher_better;
    } else if (value == "lower_better") {
      b.direction = Direction::lower_better;
    } else {
      throw InvalidConfig(fmt::format(
          "category '{}', metric '{}': direction must be \"higher_better\" or \"lower_better\"",
          category, b.accessor));
    }
  }
  b.weight = read_weight(m, fmt::format("category '{}', metric '{}'", category, b.accessor));
  return b;
}

std::vector<std::optional<double>> to_optionals(const ColumnArray<double> &values) {
  std::vector<std::optional<double>> out(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isnan(values(i))) {
      out[static_cast<std::size_t>(i)] = values(i);
    }
  }
  return out;
}

ColumnArray<double> from_optionals(const std::vector<std::optional<double>> &values) {
  ColumnArray<double> out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = values[i].value_or(missing_value<double>());
  }
  return out;
}

ScoreMap to_score_map(const std::vector<std::string> &names,
                      const std::vector<std::optional<double>> &scores) {
  ScoreMap out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.emplace(names[i], scores[i]);
  }
  return out;
}

ordered_json optional_number(const std::optional<double> &v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json keyed(const std::vector<std::string> &names,
                   const std::vector<std::optional<double>> &values) {
  ordered_json out = ordered_json::object();
  for (std::size_t i = 0; i < names.size(); ++i) {
    out[names[i]] = optional_number(values[i]);
  }
  return out;
}

ordered_json ranking_json(const Ranking &ranking) {
  ordered_json out = ordered_json::array();
  for (const auto &entry : ranking) {
    out.push_back({{"candidate", entry.candidate},
                   {"rank", entry.rank ? ordered_json(*entry.rank) : ordered_json(nullptr)},
                   {"score", optional_number(entry.score)}});
  }
  return out;
}

ordered_json category_json(const CategoryResult &category,
                           const std::vector<std::string> &candidates) {
  ordered_json metrics = ordered_json::array();
  for (const auto &m : category.metrics) {
    metrics.push_back({{"header", m.binding.header},
                       {"accessor", m.binding.accessor},
                       {"direction", to_string(m.binding.direction)},
                       {"weight", m.binding.weight},
                       {"raw", keyed(candidates, m.raw)},
                       {"normalized", keyed(candidates, m.normalized)}});
  }
  return {{"name", category.name},
          {"weight", category.weight},
          {"metrics", std::move(metrics)},
          {"scores", keyed(candidates, category.scores)},
          {"ranking", ranking_json(category.ranking)}};
}

} // namespace

// ---------------------------------------------------------------------------

const CategorySpec *EvaluationModel::find(std::string_view category) const {
  const auto it = std::find_if(categories.begin(), categories.end(),
                               [&](const CategorySpec &c) { return c.name == category; });
  return it == categories.end() ? nullptr : &*it;
}

std::vector<std::string> EvaluationModel::category_names() const {
  std::vector<std::string> names;
  for (const auto &c : categories) {
    names.push_back(c.name);
  }
  return names;
}

const CategoryResult *ComparisonResult::find(std::string_view category) const {
  const auto it = std::find_if(categories.begin(), categories.end(),
                               [&](const CategoryResult &c) { return c.name == category; });
  return it == categories.end() ? nullptr : &*it;
}

std::string_view to_string(Direction direction) {
  return direction == Direction::higher_better ? "higher_better" : "lower_better";
}

EvaluationModel parse_model(const json &config) {
  if (!config.is_object()) {
    throw InvalidConfig("config must be a JSON object");
  }
  EvaluationModel model;
  if (const auto name = config.find("model_name"); name != config.end()) {
    if (!name->is_string()) {
      throw InvalidConfig("model_name must be a string");
    }
    model.model_name = name->get<std::string>();
  }
  if (model.model_name.empty()) {
    model.model_name = "custom";
  }

  const auto categories = config.find("categories");
  if (categories == config.end() || !categories->is_array() || categories->empty()) {
    throw InvalidConfig("config must list at least one category");
  }
  std::set<std::string> seen;
  bool any_metric = false;
  for (const auto &c : *categories) {
    if (!c.is_object()) {
      throw InvalidConfig("category entries must be objects");
    }
    const auto name = c.find("name");
    if (name == c.end() || !name->is_string() || name->get<std::string>().empty()) {
      throw InvalidConfig("every category needs a non-empty name");
    }
    CategorySpec spec;
    spec.name = name->get<std::string>();
    if (!seen.insert(spec.name).second) {
      throw InvalidConfig(fmt::format("duplicate category '{}'", spec.name));
    }
    spec.weight = read_weight(c, fmt::format("category '{}'", spec.name));
    if (const auto metrics = c.find("metrics"); metrics != c.end() && !metrics->is_null()) {
      if (!metrics->is_array()) {
        throw InvalidConfig(fmt::format("category '{}': metrics must be a list", spec.name));
      }
      for (const auto &m : *metrics) {
        spec.metrics.push_back(parse_binding(m, spec.name));
      }
    }
    any_metric = any_metric || !spec.metrics.empty();
    model.categories.push_back(std::move(spec));
  }
  if (!any_metric) {
    throw InvalidConfig("at least one category must bind a metric");
  }
  return model;
}

EvaluationModel parse_model_text(std::string_view text) {
  json config = json::parse(text, nullptr, false);
  if (config.is_discarded()) {
    config = json::parse(relaxed_to_json(text), nullptr, false);
    if (config.is_discarded()) {
      throw InvalidConfig("config is neither JSON nor a plain JavaScript object literal");
    }
  }
  return parse_model(config);
}

EvaluationModel load_model(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidConfig(fmt::format("cannot read config '{}'", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_model_text(buffer.str());
  } catch (const InvalidConfig &e) {
    throw InvalidConfig(fmt::format("{}: {}", path.string(), e.what()));
  }
}

ordered_json model_to_json(const EvaluationModel &model) {
  ordered_json categories = ordered_json::array();
  for (const auto &c : model.categories) {
    ordered_json metrics = ordered_json::array();
    for (const auto &m : c.metrics) {
      metrics.push_back({{"Header", m.header},
                         {"accessor", m.accessor},
                         {"direction", to_string(m.direction)},
                         {"weight", m.weight}});
    }
    categories.push_back({{"name", c.name}, {"weight", c.weight}, {"metrics", std::move(metrics)}});
  }
  return {{"model_name", model.model_name}, {"categories", std::move(categories)}};
}

void save_model(const EvaluationModel &model, const fs::path &path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error(fmt::format("cannot write config '{}'", tmp.string()));
    }
    out << model_to_json(model).dump(2) << '\n';
    if (!out.flush()) {
      throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw std::runtime_error(
        fmt::format("cannot replace config '{}': {}", path.string(), ec.message()));
  }
}

const EvaluationModel &default_model() {
  static const EvaluationModel model = parse_model_text(kOsspalConfig);
  return model;
}

const EvaluationModel &minimal_model() {
  static const EvaluationModel model = parse_model_text(kMinimalConfig);
  return model;
}

ScoreMap normalize_metric(const ScoreMap &values, Direction direction) {
  std::vector<std::string> names;
  std::vector<std::optional<double>> column;
  for (const auto &[name, value] : values) {
    names.push_back(name);
    column.push_back(value);
  }
  return to_score_map(names, to_optionals(min_max_normalize(from_optionals(column), direction)));
}

Ranking rank(const ScoreMap &scores) {
  Ranking out;
  for (const auto &[name, score] : scores) {
    out.push_back({name, score, std::nullopt});
  }
  // ScoreMap iterates by name, so a stable sort leaves ties in name order.
  std::stable_sort(out.begin(), out.end(), [](const RankEntry &a, const RankEntry &b) {
    if (a.score.has_value() != b.score.has_value()) {
      return a.score.has_value();
    }
    return a.score && *a.score > *b.score;
  });
  int current = 0;
  std::optional<double> previous;
  for (auto &entry : out) {
    if (!entry.score) {
      break;
    }
    if (!previous || *entry.score != *previous) {
      ++current;
      previous = entry.score;
    }
    entry.rank = current;
  }
  return out;
}

CategoryResult score_category(const CategorySpec &category, const Dataset &dataset) {
  const auto rows = static_cast<Eigen::Index>(dataset.records.size());
  const auto cols = static_cast<Eigen::Index>(category.metrics.size());

  TableArray<double> raw(rows, cols);
  ColumnArray<double> weights(cols);
  std::vector<Direction> directions;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto &binding = category.metrics[static_cast<std::size_t>(j)];
    weights(j) = binding.weight;
    directions.push_back(binding.direction);
    for (Eigen::Index i = 0; i < rows; ++i) {
      raw(i, j) = metric_value(dataset.records[static_cast<std::size_t>(i)], binding.accessor)
                      .value_or(missing_value<double>());
    }
  }
  const TableArray<double> normalized = normalize_columns(raw, directions);
  const ColumnArray<double> scores = weighted_row_mean(normalized, weights);

  std::vector<std::string> names;
  for (const auto &r : dataset.records) {
    names.push_back(r.full_name);
  }

  CategoryResult result;
  result.name = category.name;
  result.weight = category.weight;
  for (Eigen::Index j = 0; j < cols; ++j) {
    result.metrics.push_back({category.metrics[static_cast<std::size_t>(j)],
                              to_optionals(raw.col(j)), to_optionals(normalized.col(j))});
  }
  result.scores = to_optionals(scores);
  result.ranking = rank(to_score_map(names, result.scores));
  return result;
}

ComparisonResult score_overall(const EvaluationModel &model, const Dataset &dataset) {
  ComparisonResult result;
  result.model_name = model.model_name;
  for (const auto &r : dataset.records) {
    result.candidates.push_back(r.full_name);
  }

  const auto rows = static_cast<Eigen::Index>(dataset.records.size());
  const auto cols = static_cast<Eigen::Index>(model.categories.size());
  TableArray<double> category_scores(rows, cols);
  ColumnArray<double> weights(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto &spec = model.categories[static_cast<std::size_t>(j)];
    auto category = score_category(spec, dataset);
    category_scores.col(j) = from_optionals(category.scores);
    weights(j) = spec.weight;
    result.categories.push_back(std::move(category));
  }
  result.overall = to_optionals(weighted_row_mean(category_scores, weights));
  result.overall_ranking = rank(to_score_map(result.candidates, result.overall));
  return result;
}

Dataset select_candidates(const Dataset &dataset, const std::vector<std::string> &names) {
  const std::set<std::string> wanted(names.begin(), names.end());
  for (const auto &name : wanted) {
    if (dataset.find(name) == nullptr) {
      throw std::out_of_range(fmt::format("unknown candidate '{}'", name));
    }
  }
  Dataset out;
  out.schema_version = dataset.schema_version;
  out.source_path = dataset.source_path;
  for (const auto &r : dataset.records) {
    if (wanted.count(r.full_name) != 0) {
      out.records.push_back(r);
    }
  }
  return out;
}

ordered_json comparison_to_json(const ComparisonResult &result,
                                const std::optional<std::string> &category) {
  ordered_json out{{"model_name", result.model_name}, {"candidates", result.candidates}};
  if (category) {
    const auto *block = result.find(*category);
    if (block == nullptr) {
      throw std::out_of_range(fmt::format("unknown category '{}'", *category));
    }
    out["categories"] = ordered_json::array({category_json(*block, result.candidates)});
    return out;
  }
  ordered_json categories = ordered_json::array();
  for (const auto &c : result.categories) {
    categories.push_back(category_json(c, result.candidates));
  }
  out["categories"] = std::move(categories);
  out["overall"] = {{"scores", keyed(result.candidates, result.overall)},
                    {"ranking", ranking_json(result.overall_ranking)}};
  return out;
}

std::string comparison_json_text(const ComparisonResult &result,
                                 const std::optional<std::string> &category) {
  return comparison_to_json(result, category).dump(2) + "\n";
}

} // namespace pesto
