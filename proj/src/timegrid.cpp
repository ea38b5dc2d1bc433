#include "citypulse/timegrid.hpp"

#include <charconv>

namespace citypulse {

std::string_view to_string(DayGroup d) {
  switch (d) {
    case DayGroup::MonThu: return "MonThu";
    case DayGroup::Friday: return "Friday";
    case DayGroup::Saturday: return "Saturday";
    case DayGroup::Sunday: return "Sunday";
  }
  return "?";
}

std::string_view to_string(HourGroup h) {
  switch (h) {
    case HourGroup::Morning: return "Morning";
    case HourGroup::Noon: return "Noon";
    case HourGroup::Afternoon: return "Afternoon";
    case HourGroup::Night: return "Night";
  }
  return "?";
}

std::optional<DayGroup> parse_day_group(std::string_view s) {
  if (s == "MonThu") return DayGroup::MonThu;
  if (s == "Friday") return DayGroup::Friday;
  if (s == "Saturday") return DayGroup::Saturday;
  if (s == "Sunday") return DayGroup::Sunday;
  return std::nullopt;
}

std::optional<HourGroup> parse_hour_group(std::string_view s) {
  if (s == "Morning") return HourGroup::Morning;
  if (s == "Noon") return HourGroup::Noon;
  if (s == "Afternoon") return HourGroup::Afternoon;
  if (s == "Night") return HourGroup::Night;
  return std::nullopt;
}

bool CivilDateTime::valid() const {
  using namespace std::chrono;
  if (month < 1 || month > 12 || day < 1) return false;
  if (hour > 23 || minute > 59 || second > 59) return false;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                     std::chrono::day{day}};
  return ymd.ok();
}

std::chrono::sys_days CivilDateTime::date() const {
  using namespace std::chrono;
  return sys_days{year_month_day{std::chrono::year{year},
                                 std::chrono::month{month},
                                 std::chrono::day{day}}};
}

int64_t CivilDateTime::to_epoch_seconds() const {
  int64_t days = date().time_since_epoch().count();
  return days * 86400 + int64_t(hour) * 3600 + int64_t(minute) * 60 + second;
}

CivilDateTime CivilDateTime::from_epoch_seconds(int64_t secs) {
  using namespace std::chrono;
  int64_t days = secs / 86400;
  int64_t rem = secs % 86400;
  if (rem < 0) {
    days -= 1;
    rem += 86400;
  }
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  return CivilDateTime{int(ymd.year()), unsigned(ymd.month()),
                       unsigned(ymd.day()), unsigned(rem / 3600),
                       unsigned((rem % 3600) / 60), unsigned(rem % 60)};
}

std::string CivilDateTime::to_iso() const {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02u", year, month,
                day, hour, minute, second);
  return buf;
}

std::optional<CivilDateTime> parse_iso_datetime(std::string_view s) {
  // YYYY-MM-DDTHH:MM:SS with 'T' or ' ' separator.
  if (s.size() != 19) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':')
    return std::nullopt;
  auto num = [&](int pos, int len, auto& out) {
    auto first = s.data() + pos;
    auto [p, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc{} && p == first + len;
  };
  CivilDateTime dt{};
  if (!num(0, 4, dt.year) || !num(5, 2, dt.month) || !num(8, 2, dt.day) ||
      !num(11, 2, dt.hour) || !num(14, 2, dt.minute) || !num(17, 2, dt.second))
    return std::nullopt;
  if (!dt.valid()) return std::nullopt;
  return dt;
}

DayGroup day_group_of(std::chrono::weekday wd) {
  switch (wd.c_encoding()) {
    case 5: return DayGroup::Friday;
    case 6: return DayGroup::Saturday;
    case 0: return DayGroup::Sunday;
    default: return DayGroup::MonThu; // Mon..Thu
  }
}

TimeSlot classify_timestamp(const CivilDateTime& ts) {
  using namespace std::chrono;
  sys_days d = ts.date();
  HourGroup hg;
  if (ts.hour >= 5 && ts.hour < 11) {
    hg = HourGroup::Morning;
  } else if (ts.hour >= 11 && ts.hour < 15) {
    hg = HourGroup::Noon;
  } else if (ts.hour >= 15 && ts.hour < 20) {
    hg = HourGroup::Afternoon;
  } else {
    hg = HourGroup::Night;
    // [00:00,05:00) counts as the previous day's night.
    if (ts.hour < 5) d -= days{1};
  }
  return TimeSlot{day_group_of(weekday{d}), hg};
}

std::array<TimeSlot, kNumSlots> all_slots() {
  std::array<TimeSlot, kNumSlots> out{};
  for (int i = 0; i < kNumSlots; ++i) out[i] = TimeSlot::from_index(i);
  return out;
}

} // namespace citypulse
