#include "vssd/duration.hpp"

#include <charconv>
#include <stdexcept>

namespace vssd {

namespace {

std::int64_t parse_count(std::string_view digits, std::string_view whole) {
  std::int64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc{} ||
      ptr != digits.data() + digits.size() || value < 0) {
    throw std::invalid_argument("bad duration '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Duration parse_duration(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty duration");
  Duration unit = 1;
  std::string_view digits = text;
  switch (text.back()) {
    case 'd': unit = kDay; break;
    case 'h': unit = kHour; break;
    case 'm': unit = kMinute; break;
    case 's': unit = 1; break;
    default: unit = 0; break;
  }
  if (unit != 0) {
    digits.remove_suffix(1);
  } else {
    unit = 1;
  }
  return parse_count(digits, text) * unit;
}

Timestamp parse_time(std::string_view text) {
  if (text.starts_with("day")) {
    return parse_count(text.substr(3), text) * kDay;
  }
  return parse_duration(text);
}

std::string format_duration(Duration d) {
  if (d != 0 && d % kDay == 0) return std::to_string(d / kDay) + "d";
  if (d != 0 && d % kHour == 0) return std::to_string(d / kHour) + "h";
  if (d != 0 && d % kMinute == 0) return std::to_string(d / kMinute) + "m";
  return std::to_string(d) + "s";
}

}  // namespace vssd
