#include "tracefix/timestamp.hpp"

#include <cctype>
#include <cstdio>

namespace tracefix {
namespace {

class Cursor {
public:
  explicit Cursor(std::string_view s) : s_(s) {}
  bool done() const { return i_ == s_.size(); }
  char peek() const { return done() ? '\0' : s_[i_]; }
  bool eat(char c) {
    if (peek() != c) return false;
    ++i_;
    return true;
  }
  // Reads exactly n decimal digits.
  std::optional<int> digits(int n) {
    if (i_ + n > s_.size()) return std::nullopt;
    int v = 0;
    for (int k = 0; k < n; ++k) {
      char c = s_[i_ + k];
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      v = v * 10 + (c - '0');
    }
    i_ += n;
    return v;
  }

private:
  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

  Cursor c(text);
  auto y = c.digits(4);
  if (!y || !c.eat('-')) return std::nullopt;
  auto mo = c.digits(2);
  if (!mo || !c.eat('-')) return std::nullopt;
  auto d = c.digits(2);
  if (!d) return std::nullopt;
  year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;

  microseconds tod{0};
  if (!c.done()) {
    if (!c.eat('T') && !c.eat(' ')) return std::nullopt;
    auto hh = c.digits(2);
    if (!hh || !c.eat(':')) return std::nullopt;
    auto mm = c.digits(2);
    if (!mm || *hh > 23 || *mm > 59) return std::nullopt;
    int ss = 0;
    long frac_us = 0;
    if (c.eat(':')) {
      auto s = c.digits(2);
      if (!s || *s > 60) return std::nullopt;
      ss = *s;
      if (c.eat('.') || c.eat(',')) {
        long scale = 100000;
        int count = 0;
        while (std::isdigit(static_cast<unsigned char>(c.peek()))) {
          int digit = c.peek() - '0';
          c.eat(c.peek());
          frac_us += digit * scale;
          scale /= 10;
          ++count;
        }
        if (count == 0) return std::nullopt;
      }
    }
    tod = hours{*hh} + minutes{*mm} + seconds{ss} + microseconds{frac_us};
    if (c.eat('Z')) {
    } else if (c.peek() == '+' || c.peek() == '-') {
      int sign = c.peek() == '+' ? 1 : -1;
      c.eat(c.peek());
      auto oh = c.digits(2);
      if (!oh) return std::nullopt;
      c.eat(':');
      auto om = c.digits(2);
      if (!om) return std::nullopt;
      tod -= sign * (hours{*oh} + minutes{*om});
    }
  }
  if (!c.done()) return std::nullopt;
  return Timestamp{sys_days{ymd}} + tod;
}

std::string format_iso8601(Timestamp ts) {
  using namespace std::chrono;
  auto day_point = floor<days>(ts);
  year_month_day ymd{day_point};
  auto tod = ts - day_point;
  auto h = duration_cast<hours>(tod);
  auto m = duration_cast<minutes>(tod - h);
  auto s = duration_cast<seconds>(tod - h - m);
  auto us = (tod - h - m - s).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%06ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(h.count()), static_cast<int>(m.count()), static_cast<int>(s.count()),
                static_cast<long>(us));
  return buf;
}

}  // namespace tracefix
