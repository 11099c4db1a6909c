#include "pesto/timestamp.hpp"

#include <charconv>
#include <stdexcept>

#include <fmt/format.h>

namespace pesto {

namespace {

int read_digits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) {
    throw std::invalid_argument(fmt::format("truncated timestamp '{}'", text));
  }
  int value = 0;
  const char *first = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + count, value);
  if (ec != std::errc{} || ptr != first + count) {
    throw std::invalid_argument(fmt::format("malformed timestamp '{}'", text));
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || (text[pos] != c && !(c == 'T' && text[pos] == 't') &&
                             !(c == 'T' && text[pos] == ' '))) {
    throw std::invalid_argument(fmt::format("malformed timestamp '{}'", text));
  }
}

} // namespace

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const int y = read_digits(text, 0, 4);
  expect_char(text, 4, '-');
  const int mo = read_digits(text, 5, 2);
  expect_char(text, 7, '-');
  const int d = read_digits(text, 8, 2);
  expect_char(text, 10, 'T');
  const int h = read_digits(text, 11, 2);
  expect_char(text, 13, ':');
  const int mi = read_digits(text, 14, 2);
  expect_char(text, 16, ':');
  const int s = read_digits(text, 17, 2);

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw std::invalid_argument(fmt::format("out-of-range timestamp '{}'", text));
  }

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      ++pos;
    }
  }
  seconds offset{0};
  if (pos < text.size() && (text[pos] == 'Z' || text[pos] == 'z')) {
    ++pos;
  } else if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    const int sign = text[pos] == '+' ? 1 : -1;
    const int oh = read_digits(text, pos + 1, 2);
    expect_char(text, pos + 3, ':');
    const int om = read_digits(text, pos + 4, 2);
    offset = sign * (hours{oh} + minutes{om});
    pos += 6;
  } else {
    throw std::invalid_argument(fmt::format("timestamp '{}' lacks a UTC offset", text));
  }
  if (pos != text.size()) {
    throw std::invalid_argument(fmt::format("trailing characters in timestamp '{}'", text));
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} - offset;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> tod{t - day_point};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     tod.hours().count(), tod.minutes().count(), tod.seconds().count());
}

double days_between(Timestamp from, Timestamp to) {
  return static_cast<double>((to - from).count()) / 86400.0;
}

Timestamp now_utc() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

} // namespace pesto
