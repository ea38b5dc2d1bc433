#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace citypulse {

// Coarse weekly time partition: 4 day groups x 4 hour groups = 16 slots.
enum class DayGroup : uint8_t { MonThu = 0, Friday = 1, Saturday = 2, Sunday = 3 };
enum class HourGroup : uint8_t { Morning = 0, Noon = 1, Afternoon = 2, Night = 3 };

inline constexpr int kNumDayGroups = 4;
inline constexpr int kNumHourGroups = 4;
inline constexpr int kNumSlots = kNumDayGroups * kNumHourGroups;

std::string_view to_string(DayGroup d);
std::string_view to_string(HourGroup h);
std::optional<DayGroup> parse_day_group(std::string_view s);
std::optional<HourGroup> parse_hour_group(std::string_view s);

struct TimeSlot {
  DayGroup day;
  HourGroup hour;

  // Dense index in [0,16), stable across runs: day-major, Table-1 order.
  constexpr int index() const {
    return static_cast<int>(day) * kNumHourGroups + static_cast<int>(hour);
  }
  static constexpr TimeSlot from_index(int i) {
    return {static_cast<DayGroup>(i / kNumHourGroups),
            static_cast<HourGroup>(i % kNumHourGroups)};
  }
  friend bool operator==(TimeSlot a, TimeSlot b) {
    return a.day == b.day && a.hour == b.hour;
  }
};

// Local civil datetime; the pipeline never converts timezones.
struct CivilDateTime {
  int year;
  unsigned month;  // 1..12
  unsigned day;    // 1..31
  unsigned hour;   // 0..23
  unsigned minute; // 0..59
  unsigned second; // 0..59

  bool valid() const;
  std::chrono::sys_days date() const;
  int64_t to_epoch_seconds() const;
  static CivilDateTime from_epoch_seconds(int64_t secs);
  std::string to_iso() const;
};

// Parses "YYYY-MM-DDTHH:MM:SS" (a single space also accepted as separator).
std::optional<CivilDateTime> parse_iso_datetime(std::string_view s);

DayGroup day_group_of(std::chrono::weekday wd);

// Assigns ts to its (day group, hour group) slot. Hours in [00:00,05:00)
// belong to the Night group of the previous calendar day.
TimeSlot classify_timestamp(const CivilDateTime& ts);

// All 16 slots, day-major in Table-1 order: (MonThu,Morning) first,
// (Sunday,Night) last.
std::array<TimeSlot, kNumSlots> all_slots();

} // namespace citypulse
