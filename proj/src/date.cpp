#include "abusetrend/date.hpp"

#include <cstdio>
#include <stdexcept>

namespace abusetrend {
namespace {

bool all_digits(std::string_view s) {
  for (char ch : s)
    if (ch < '0' || ch > '9') return false;
  return !s.empty();
}

int to_int(std::string_view s) {
  int v = 0;
  for (char ch : s) v = v * 10 + (ch - '0');
  return v;
}

// Only a time-of-day with optional fraction and an explicit UTC marker is
// accepted after the date.
bool valid_utc_time_suffix(std::string_view rest) {
  if (rest.empty()) return true;
  if (rest.front() != 'T' && rest.front() != ' ') return false;
  rest.remove_prefix(1);
  if (rest.size() < 8 || rest[2] != ':' || rest[5] != ':') return false;
  if (!all_digits(rest.substr(0, 2)) || !all_digits(rest.substr(3, 2)) ||
      !all_digits(rest.substr(6, 2)))
    return false;
  rest.remove_prefix(8);
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    std::size_t n = 0;
    while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9') ++n;
    if (n == 0) return false;
    rest.remove_prefix(n);
  }
  return rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000";
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  return Date(std::chrono::sys_days{ymd});
}

Date Date::parse(std::string_view text) {
  if (text.size() < 10 || text[4] != '-' || text[7] != '-' || !all_digits(text.substr(0, 4)) ||
      !all_digits(text.substr(5, 2)) || !all_digits(text.substr(8, 2)))
    throw std::invalid_argument("expected YYYY-MM-DD date, got '" + std::string(text) + "'");
  if (!valid_utc_time_suffix(text.substr(10)))
    throw std::invalid_argument("unsupported time suffix in '" + std::string(text) + "'");
  const int y = to_int(text.substr(0, 4));
  const auto m = static_cast<unsigned>(to_int(text.substr(5, 2)));
  const auto d = static_cast<unsigned>(to_int(text.substr(8, 2)));
  try {
    return from_ymd(y, m, d);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
  }
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days_}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace abusetrend
