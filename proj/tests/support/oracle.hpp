#pragma once

// Reference scoring written with plain loops, independent of the Eigen
// kernels, used to cross-check the engine.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pesto::testing {

struct OracleMetric {
  std::string accessor;
  bool lower_better = false;
  double weight = 1.0;
};

struct OracleCategory {
  std::string name;
  double weight = 1.0;
  std::vector<OracleMetric> metrics;
};

/// candidate -> accessor -> value (absent entries are missing).
using OracleTable = std::map<std::string, std::map<std::string, double>>;
using OracleScores = std::map<std::string, std::optional<double>>;

inline OracleScores oracle_normalize(const OracleTable &table, const OracleMetric &metric) {
  OracleScores out;
  double lo = 0, hi = 0;
  bool any = false;
  for (const auto &[name, row] : table) {
    auto it = row.find(metric.accessor);
    out[name] = std::nullopt;
    if (it == row.end()) {
      continue;
    }
    if (!any) {
      lo = hi = it->second;
      any = true;
    }
    lo = std::min(lo, it->second);
    hi = std::max(hi, it->second);
  }
  for (const auto &[name, row] : table) {
    auto it = row.find(metric.accessor);
    if (it == row.end()) {
      continue;
    }
    double x = hi == lo ? 0.5 : (it->second - lo) / (hi - lo);
    if (metric.lower_better && hi != lo) {
      x = 1.0 - x;
    }
    out[name] = x;
  }
  return out;
}

inline OracleScores oracle_category(const OracleTable &table, const OracleCategory &category) {
  std::vector<OracleScores> columns;
  for (const auto &m : category.metrics) {
    columns.push_back(oracle_normalize(table, m));
  }
  OracleScores out;
  for (const auto &[name, row] : table) {
    double num = 0, den = 0;
    for (std::size_t j = 0; j < category.metrics.size(); ++j) {
      if (const auto v = columns[j][name]) {
        num += category.metrics[j].weight * *v;
        den += category.metrics[j].weight;
      }
    }
    out[name] = den > 0 ? std::optional<double>(num / den) : std::nullopt;
  }
  return out;
}

inline OracleScores oracle_overall(const OracleTable &table,
                                   const std::vector<OracleCategory> &categories) {
  std::vector<std::pair<double, OracleScores>> scored;
  for (const auto &c : categories) {
    if (!c.metrics.empty()) {
      scored.emplace_back(c.weight, oracle_category(table, c));
    }
  }
  OracleScores out;
  for (const auto &[name, row] : table) {
    double num = 0, den = 0;
    for (const auto &[w, scores] : scored) {
      if (const auto v = scores.at(name)) {
        num += w * *v;
        den += w;
      }
    }
    out[name] = den > 0 ? std::optional<double>(num / den) : std::nullopt;
  }
  return out;
}

/// Dense ranks: 1 + number of distinct higher scores.
inline std::map<std::string, std::optional<int>> oracle_ranks(const OracleScores &scores) {
  std::vector<double> distinct;
  for (const auto &[name, s] : scores) {
    if (s && std::find(distinct.begin(), distinct.end(), *s) == distinct.end()) {
      distinct.push_back(*s);
    }
  }
  std::map<std::string, std::optional<int>> out;
  for (const auto &[name, s] : scores) {
    if (!s) {
      out[name] = std::nullopt;
      continue;
    }
    int higher = 0;
    for (double d : distinct) {
      higher += d > *s ? 1 : 0;
    }
    out[name] = higher + 1;
  }
  return out;
}

/// The bundled OSSPAL model, restated by hand.
inline std::vector<OracleCategory> oracle_osspal() {
  return {
      {"Community",
       1,
       {{"watcher_count"},
        {"star_count"},
        {"age_days"},
        {"avg_issue_active_time_days", true},
        {"avg_issue_comments"},
        {"pull_request_count"},
        {"issue_raiser_count"}}},
      {"Support",
       1,
       {{"avg_issue_close_time_days", true}, {"contributor_count"}, {"org_issue_raiser_count"}}},
      {"Operational Software Characteristics", 1, {}},
      {"Documentation", 1, {}},
      {"Software Technology Attributes",
       1,
       {{"open_issue_count", true}, {"dependency_count", true}}},
      {"Functionality", 1, {}},
      {"Development Process", 1, {}},
  };
}

} // namespace pesto::testing
