#include "pesto/report.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "pesto/datastore.hpp"

namespace pesto {

namespace {

std::string cell(const std::optional<double> &v) { return v ? format_real(*v) : "-"; }

std::string rank_cell(const Ranking &ranking, const std::string &candidate) {
  for (const auto &entry : ranking) {
    if (entry.candidate == candidate) {
      return entry.rank ? fmt::format("#{}", *entry.rank) : "unranked";
    }
  }
  return "-";
}

std::string rank_value(const Ranking &ranking, const std::string &candidate) {
  for (const auto &entry : ranking) {
    if (entry.candidate == candidate && entry.rank) {
      return std::to_string(*entry.rank);
    }
  }
  return {};
}

/// Left-aligned grid; every column padded to its widest cell.
std::string grid(const std::vector<std::vector<std::string>> &rows) {
  std::vector<std::size_t> widths;
  for (const auto &row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  std::string out;
  for (const auto &row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += c + 1 == row.size() ? row[c] : fmt::format("{:<{}}  ", row[c], widths[c]);
    }
    line.erase(line.find_last_not_of(' ') + 1);
    out += "  " + line + "\n";
  }
  return out;
}

std::string category_block(const CategoryResult &category,
                           const std::vector<std::string> &candidates) {
  std::string out = fmt::format("[{}] weight {}\n", category.name, format_real(category.weight));
  if (category.metrics.empty()) {
    return out + "  no metrics configured\n";
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"metric", "direction", "weight"};
  header.insert(header.end(), candidates.begin(), candidates.end());
  rows.push_back(std::move(header));
  for (const auto &m : category.metrics) {
    std::vector<std::string> row{m.binding.header, std::string(to_string(m.binding.direction)),
                                 format_real(m.binding.weight)};
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      row.push_back(m.raw[i] ? fmt::format("{} ({})", cell(m.raw[i]), cell(m.normalized[i])) : "-");
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> scores{"score", "", ""};
  std::vector<std::string> ranks{"rank", "", ""};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scores.push_back(cell(category.scores[i]));
    ranks.push_back(rank_cell(category.ranking, candidates[i]));
  }
  rows.push_back(std::move(scores));
  rows.push_back(std::move(ranks));
  return out + grid(rows);
}

const CategoryResult &require_category(const ComparisonResult &result, const std::string &name) {
  const auto *block = result.find(name);
  if (block == nullptr) {
    throw std::out_of_range(fmt::format("unknown category '{}'", name));
  }
  return *block;
}

} // namespace

std::string render_comparison_table(const ComparisonResult &result,
                                    const std::optional<std::string> &category) {
  std::string out = fmt::format("{} comparison of {} candidate{}\n\n", result.model_name,
                                result.candidates.size(),
                                result.candidates.size() == 1 ? "" : "s");
  if (category) {
    return out + category_block(require_category(result, *category), result.candidates);
  }
  for (const auto &c : result.categories) {
    out += category_block(c, result.candidates) + "\n";
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{""};
  std::vector<std::string> scores{"score"};
  std::vector<std::string> ranks{"rank"};
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    header.push_back(result.candidates[i]);
    scores.push_back(cell(result.overall[i]));
    ranks.push_back(rank_cell(result.overall_ranking, result.candidates[i]));
  }
  rows.push_back(std::move(header));
  rows.push_back(std::move(scores));
  rows.push_back(std::move(ranks));
  return out + "[Overall]\n" + grid(rows);
}

std::string render_comparison_csv(const ComparisonResult &result,
                                  const std::optional<std::string> &category) {
  std::vector<const CategoryResult *> blocks;
  if (category) {
    blocks.push_back(&require_category(result, *category));
  } else {
    for (const auto &c : result.categories) {
      blocks.push_back(&c);
    }
  }
  std::vector<std::string> header{"full_name"};
  for (const auto *b : blocks) {
    header.push_back(b->name + " score");
    header.push_back(b->name + " rank");
  }
  if (!category) {
    header.emplace_back("overall score");
    header.emplace_back("overall rank");
  }
  std::string out = csv_join(header) + "\n";
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    const auto &name = result.candidates[i];
    std::vector<std::string> row{name};
    for (const auto *b : blocks) {
      row.push_back(b->scores[i] ? format_real(*b->scores[i]) : "");
      row.push_back(rank_value(b->ranking, name));
    }
    if (!category) {
      row.push_back(result.overall[i] ? format_real(*result.overall[i]) : "");
      row.push_back(rank_value(result.overall_ranking, name));
    }
    out += csv_join(row) + "\n";
  }
  return out;
}

} // namespace pesto
