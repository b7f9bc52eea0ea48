#ifndef HEPI_MOBILITY_HPP
#define HEPI_MOBILITY_HPP

#include "hepi/common.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hepi {

enum class ActivityCategory : std::uint8_t { Home, Work, School, Leisure, Other };

std::string_view to_string(ActivityCategory c);
ActivityCategory parse_category(std::string_view text);

enum class EventKind : std::uint8_t {
  Start,
  End,
  /// Artificial event that only carries an agent's last known position.
  Continue,
};

std::string_view to_string(EventKind k);

struct MobilityEvent {
  int agent_id = 0;
  real time_s = 0;
  EventKind kind = EventKind::Start;
  int facility_id = -1;
  ActivityCategory category = ActivityCategory::Home;
  Vec2 location = Vec2::Zero();

  friend bool operator==(const MobilityEvent&, const MobilityEvent&) = default;
};

struct Facility {
  int id = 0;
  ActivityCategory category = ActivityCategory::Home;
  Vec2 location = Vec2::Zero();
  real room_size = 1;
};

/// A stay at one facility; [start_s, end_s] in seconds from the plan origin.
struct Activity {
  int facility_id = -1;
  ActivityCategory category = ActivityCategory::Home;
  Vec2 location = Vec2::Zero();
  real start_s = 0;
  real end_s = 0;
};

/// Where a plan puts its agent at a given time.
struct PlanPosition {
  Vec2 position;
  /// Facility the agent is inside, or -1 while travelling.
  int facility_id = -1;
};

/// Position along an ordered activity list: inside an activity, linearly
/// interpolated while travelling between two activities, pinned to the first
/// (last) location before (after) the plan.
PlanPosition position_at(std::span<const Activity> plan, real t_s);

/// Groups events per agent and pairs Start/End events into activities.
/// Throws if an agent's events are not time-ordered or do not alternate
/// Start/End on the same facility.
std::map<int, std::vector<Activity>> events_to_activities(std::span<const MobilityEvent> events);

/// Inverse of events_to_activities, ordered by agent then time.
std::vector<MobilityEvent> activities_to_events(const std::map<int, std::vector<Activity>>& plans);

/// Checks per-agent ordering and Start/End alternation.
void validate_events(std::span<const MobilityEvent> events);

enum class DayType : std::uint8_t { Weekday = 0, Saturday = 1, Sunday = 2 };
constexpr int kNumDayTypes = 3;
DayType day_type_of(const Date& d);
std::string_view to_string(DayType t);

/// One representative day per day type, as activity lists indexed by plan id.
/// Plan ids are dense in [0, num_plans()); a plan may be empty for a day type.
class WeekPlans {
 public:
  WeekPlans() = default;
  WeekPlans(std::span<const MobilityEvent> weekday, std::span<const MobilityEvent> saturday,
            std::span<const MobilityEvent> sunday);

  int num_plans() const { return num_plans_; }
  const std::vector<Activity>& plan(DayType t, int id) const {
    return days_[static_cast<std::size_t>(t)][static_cast<std::size_t>(id)];
  }
  const std::vector<std::vector<Activity>>& day(DayType t) const { return days_[static_cast<std::size_t>(t)]; }
  const std::vector<MobilityEvent>& events(DayType t) const { return events_[static_cast<std::size_t>(t)]; }

 private:
  int num_plans_ = 0;
  std::array<std::vector<std::vector<Activity>>, kNumDayTypes> days_;
  std::array<std::vector<MobilityEvent>, kNumDayTypes> events_;
};

/// Daily activity participation changes in percent (negative = reduction).
struct ActivityDay {
  Date date;
  real at_home_pct_change = 0;
  real out_of_home_pct_change = 0;
};

class ActivitySchedule {
 public:
  ActivitySchedule() = default;
  explicit ActivitySchedule(std::vector<ActivityDay> days);

  /// Out-of-home change for `d`; 0 when the date is not covered.
  real out_of_home(const Date& d) const;
  bool covers(const Date& first, const Date& last) const;
  const std::vector<ActivityDay>& days() const { return days_; }

 private:
  std::vector<ActivityDay> days_;
};

// CSV formats.
// events:     agent_id,time_s,kind,facility_id,category,x,y
// facilities: facility_id,category,x,y
// activity:   date,at_home_pct_change,out_of_home_pct_change
std::vector<MobilityEvent> parse_events_csv(std::string_view text, const std::string& source = "events");
std::string events_to_csv(std::span<const MobilityEvent> events);
std::vector<Facility> parse_facilities_csv(std::string_view text, const std::string& source = "facilities");
std::string facilities_to_csv(std::span<const Facility> facilities);
ActivitySchedule parse_activity_csv(std::string_view text, const std::string& source = "activity");
std::string activity_to_csv(const ActivitySchedule& schedule);

}  // namespace hepi

#endif  // HEPI_MOBILITY_HPP
