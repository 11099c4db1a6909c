#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pesto/metrics.hpp"

namespace pesto {

inline constexpr std::string_view kSchemaVersion = "v1";

/// Canonical column order of the candidate CSV (schema v1).
inline constexpr std::array<std::string_view, 16> kCsvColumns{
    "full_name",
    "crawled_at",
    "star_count",
    "watcher_count",
    "age_days",
    "avg_issue_active_time_days",
    "avg_issue_close_time_days",
    "avg_issue_comments",
    "issue_raiser_count",
    "org_issue_raiser_count",
    "pull_request_count",
    "contributor_count",
    "open_issue_count",
    "dependency_count",
    "download_total",
    "issue_sample_size",
};

struct Dataset {
  /// Unique by full_name, in first-seen order.
  std::vector<CandidateRecord> records;
  std::string schema_version{kSchemaVersion};
  std::optional<std::filesystem::path> source_path;

  const CandidateRecord *find(std::string_view full_name) const;

  friend bool operator==(const Dataset &a, const Dataset &b) {
    return a.records == b.records && a.schema_version == b.schema_version;
  }
};

class DatastoreError : public std::runtime_error {
public:
  enum class Kind { io, schema_mismatch, parse };
  DatastoreError(Kind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

// Low-level RFC 4180 helpers, shared with other CSV emitters.
std::string csv_quote(std::string_view field);
std::string csv_join(std::span<const std::string> fields);
/// Splits CSV text into rows of fields. Accepts LF or CRLF line endings.
std::vector<std::vector<std::string>> csv_parse(std::string_view text);

/// Fixed notation, at most six fractional digits, trailing zeros trimmed.
std::string format_real(double value);

std::string to_csv(const Dataset &dataset);
Dataset from_csv(std::string_view text);

/// Writes atomically (temp file + rename) so readers never see a partial file.
void write_csv(const Dataset &dataset, const std::filesystem::path &path);
Dataset read_csv(const std::filesystem::path &path);

/// Replace-by-full_name; untouched rows keep their position, new ones append.
Dataset merge(Dataset dataset, std::span<const CandidateRecord> new_records);

} // namespace pesto
