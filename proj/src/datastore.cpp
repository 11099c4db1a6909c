#include "pesto/datastore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

namespace pesto {

namespace fs = std::filesystem;

namespace {

std::string format_optional(const std::optional<double> &v) {
  return v ? format_real(*v) : std::string();
}

std::string format_optional(const std::optional<std::int64_t> &v) {
  return v ? std::to_string(*v) : std::string();
}

std::vector<std::string> record_fields(const CandidateRecord &r) {
  return {
      r.full_name,
      format_timestamp(r.crawled_at),
      std::to_string(r.star_count),
      std::to_string(r.watcher_count),
      format_real(r.age_days),
      format_optional(r.avg_issue_active_time_days),
      format_optional(r.avg_issue_close_time_days),
      format_optional(r.avg_issue_comments),
      std::to_string(r.issue_raiser_count),
      std::to_string(r.org_issue_raiser_count),
      std::to_string(r.pull_request_count),
      std::to_string(r.contributor_count),
      std::to_string(r.open_issue_count),
      format_optional(r.dependency_count),
      std::to_string(r.download_total),
      std::to_string(r.issue_sample_size),
  };
}

class RowParser {
public:
  RowParser(const std::vector<std::string> &row, std::size_t row_number)
      : row_(row), row_number_(row_number) {}

  const std::string &text(std::size_t col) const { return row_[col]; }

  std::int64_t count(std::size_t col) const {
    auto v = optional_count(col);
    if (!v) {
      fail(col, "value required");
    }
    return *v;
  }

  std::optional<std::int64_t> optional_count(std::size_t col) const {
    const auto &s = row_[col];
    if (s.empty()) {
      return std::nullopt;
    }
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      fail(col, fmt::format("'{}' is not an integer", s));
    }
    if (v < 0) {
      fail(col, "counts must be non-negative");
    }
    return v;
  }

  double real(std::size_t col) const {
    auto v = optional_real(col);
    if (!v) {
      fail(col, "value required");
    }
    return *v;
  }

  std::optional<double> optional_real(std::size_t col) const {
    const auto &s = row_[col];
    if (s.empty()) {
      return std::nullopt;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
      fail(col, fmt::format("'{}' is not a number", s));
    }
    return v;
  }

  Timestamp timestamp(std::size_t col) const {
    try {
      return parse_timestamp(row_[col]);
    } catch (const std::invalid_argument &e) {
      fail(col, e.what());
    }
  }

  [[noreturn]] void fail(std::size_t col, const std::string &why) const {
    throw DatastoreError(DatastoreError::Kind::parse,
                         fmt::format("row {}, column '{}': {}", row_number_, kCsvColumns[col], why));
  }

private:
  const std::vector<std::string> &row_;
  std::size_t row_number_;
};

} // namespace

const CandidateRecord *Dataset::find(std::string_view full_name) const {
  const auto it = std::find_if(records.begin(), records.end(),
                               [&](const CandidateRecord &r) { return r.full_name == full_name; });
  return it == records.end() ? nullptr : &*it;
}

std::string csv_quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string csv_join(std::span<const std::string> fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) {
      line.push_back(',');
    }
    line += csv_quote(fields[i]);
  }
  return line;
}

std::vector<std::vector<std::string>> csv_parse(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;

  const auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    rows.push_back(std::move(row));
    row.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
    case '"':
      if (!field.empty()) {
        throw DatastoreError(DatastoreError::Kind::parse,
                             fmt::format("row {}: stray quote inside unquoted field",
                                         rows.size() + 1));
      }
      quoted = true;
      field_started = true;
      break;
    case ',':
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
      break;
    case '\r':
      if (i + 1 < text.size() && text[i + 1] == '\n') {
        ++i;
      }
      end_row();
      break;
    case '\n':
      end_row();
      break;
    default:
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) {
    throw DatastoreError(DatastoreError::Kind::parse, "unterminated quoted field");
  }
  if (field_started || !row.empty()) {
    end_row();
  }
  return rows;
}

std::string format_real(double value) {
  auto s = fmt::format("{:.6f}", value);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') {
    s.pop_back();
  }
  if (s == "-0") {
    s = "0";
  }
  return s;
}

std::string to_csv(const Dataset &dataset) {
  std::string out;
  const std::vector<std::string> header(kCsvColumns.begin(), kCsvColumns.end());
  out += csv_join(header);
  out.push_back('\n');
  for (const auto &record : dataset.records) {
    out += csv_join(record_fields(record));
    out.push_back('\n');
  }
  return out;
}

Dataset from_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
    text.remove_prefix(3);
  }
  const auto rows = csv_parse(text);
  if (rows.empty()) {
    throw DatastoreError(DatastoreError::Kind::schema_mismatch, "missing header row");
  }

  const auto &header = rows.front();
  std::unordered_map<std::string, std::size_t> position;
  std::vector<std::string> unknown;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (std::find(kCsvColumns.begin(), kCsvColumns.end(), header[i]) == kCsvColumns.end()) {
      unknown.push_back(header[i]);
    } else if (!position.emplace(header[i], i).second) {
      unknown.push_back(header[i] + " (duplicate)");
    }
  }
  std::vector<std::string> missing;
  for (const auto col : kCsvColumns) {
    if (position.count(std::string(col)) == 0) {
      missing.emplace_back(col);
    }
  }
  if (!unknown.empty() || !missing.empty()) {
    std::string message = "CSV columns do not match schema v1:";
    if (!unknown.empty()) {
      message += fmt::format(" unknown [{}]", fmt::join(unknown, ", "));
    }
    if (!missing.empty()) {
      message += fmt::format(" missing [{}]", fmt::join(missing, ", "));
    }
    throw DatastoreError(DatastoreError::Kind::schema_mismatch, message);
  }

  std::vector<CandidateRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &raw = rows[r];
    if (raw.size() == 1 && raw.front().empty()) {
      continue;
    }
    if (raw.size() != header.size()) {
      throw DatastoreError(DatastoreError::Kind::parse,
                           fmt::format("row {}: expected {} fields, found {}", r + 1,
                                       header.size(), raw.size()));
    }
    std::vector<std::string> ordered;
    ordered.reserve(kCsvColumns.size());
    for (const auto col : kCsvColumns) {
      ordered.push_back(raw[position.at(std::string(col))]);
    }
    const RowParser p(ordered, r + 1);
    CandidateRecord rec;
    rec.full_name = p.text(0);
    if (rec.full_name.empty()) {
      p.fail(0, "value required");
    }
    rec.crawled_at = p.timestamp(1);
    rec.star_count = p.count(2);
    rec.watcher_count = p.count(3);
    rec.age_days = p.real(4);
    rec.avg_issue_active_time_days = p.optional_real(5);
    rec.avg_issue_close_time_days = p.optional_real(6);
    rec.avg_issue_comments = p.optional_real(7);
    rec.issue_raiser_count = p.count(8);
    rec.org_issue_raiser_count = p.count(9);
    rec.pull_request_count = p.count(10);
    rec.contributor_count = p.count(11);
    rec.open_issue_count = p.count(12);
    rec.dependency_count = p.optional_count(13);
    rec.download_total = p.count(14);
    rec.issue_sample_size = p.count(15);
    records.push_back(std::move(rec));
  }
  return merge(Dataset{}, records);
}

void write_csv(const Dataset &dataset, const fs::path &path) {
  const auto text = to_csv(dataset);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DatastoreError(DatastoreError::Kind::io,
                           fmt::format("cannot open '{}' for writing", tmp.string()));
    }
    out << text;
    out.flush();
    if (!out) {
      throw DatastoreError(DatastoreError::Kind::io,
                           fmt::format("write to '{}' failed", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DatastoreError(DatastoreError::Kind::io,
                         fmt::format("cannot replace '{}': {}", path.string(), ec.message()));
  }
}

Dataset read_csv(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DatastoreError(DatastoreError::Kind::io,
                         fmt::format("cannot read '{}'", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    auto dataset = from_csv(buffer.str());
    dataset.source_path = path;
    return dataset;
  } catch (const DatastoreError &e) {
    throw DatastoreError(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

Dataset merge(Dataset dataset, std::span<const CandidateRecord> new_records) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    index.emplace(dataset.records[i].full_name, i);
  }
  for (const auto &record : new_records) {
    const auto [it, inserted] = index.emplace(record.full_name, dataset.records.size());
    if (inserted) {
      dataset.records.push_back(record);
    } else {
      dataset.records[it->second] = record;
    }
  }
  return dataset;
}

} // namespace pesto
