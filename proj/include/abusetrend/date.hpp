#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace abusetrend {

// A UTC calendar day. Stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days d) : days_(d.time_since_epoch().count()) {}

  static Date from_ymd(int year, unsigned month, unsigned day);

  // Accepts YYYY-MM-DD, optionally followed by a UTC time part
  // ("T12:00:00Z", "T12:00:00.000Z", " 12:00:00"). Non-UTC offsets are
  // rejected. Throws std::invalid_argument.
  static Date parse(std::string_view text);

  std::string iso() const;
  std::int64_t days_since_epoch() const { return days_; }

  Date operator+(std::int64_t n) const { return Date(days_ + n); }
  Date operator-(std::int64_t n) const { return Date(days_ - n); }
  std::int64_t operator-(Date other) const { return days_ - other.days_; }
  Date& operator++() {
    ++days_;
    return *this;
  }

  auto operator<=>(const Date&) const = default;

 private:
  constexpr explicit Date(std::int64_t days) : days_(days) {}
  std::int64_t days_ = 0;
};

// Inclusive range of days. Empty when last < first.
struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const { return first <= d && d <= last; }
  std::size_t size() const {
    return last < first ? 0 : static_cast<std::size_t>(last - first) + 1;
  }
  bool empty() const { return last < first; }
};

}  // namespace abusetrend
