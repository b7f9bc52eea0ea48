#include "hepi/mobility.hpp"

#include <algorithm>
#include <sstream>

namespace hepi {

namespace {
constexpr std::array<std::string_view, 5> kCategoryNames{"home", "work", "school", "leisure", "other"};

std::vector<std::pair<std::size_t, std::string_view>> data_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t number = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    auto line = trim(text.substr(start, end - start));
    if (!line.empty() && line.front() != '#') out.emplace_back(number, line);
    start = end + 1;
  }
  return out;
}

void check_header(const std::vector<std::pair<std::size_t, std::string_view>>& lines, std::string_view expected,
                  const std::string& source) {
  if (lines.empty()) throw ParseError(source, 1, "missing header '" + std::string(expected) + "'");
  if (lines.front().second != expected)
    throw ParseError(source, lines.front().first, "expected header '" + std::string(expected) + "'");
}
}  // namespace

std::string_view to_string(ActivityCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

ActivityCategory parse_category(std::string_view text) {
  text = trim(text);
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
    if (kCategoryNames[i] == text) return static_cast<ActivityCategory>(i);
  throw Error("unknown activity category '" + std::string(text) + "'");
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Start: return "start";
    case EventKind::End: return "end";
    case EventKind::Continue: return "continue";
  }
  return "?";
}

PlanPosition position_at(std::span<const Activity> plan, real t) {
  if (plan.empty()) return {Vec2::Constant(std::numeric_limits<real>::quiet_NaN()), -1};
  if (t <= plan.front().start_s) return {plan.front().location, plan.front().facility_id};
  // first activity whose end is >= t
  auto it = std::lower_bound(plan.begin(), plan.end(), t, [](const Activity& a, real v) { return a.end_s < v; });
  if (it == plan.end()) return {plan.back().location, plan.back().facility_id};
  if (t >= it->start_s) return {it->location, it->facility_id};
  const Activity& prev = *(it - 1);
  const Activity& next = *it;
  const real span = next.start_s - prev.end_s;
  const real f = span > 0 ? (t - prev.end_s) / span : 1.0;
  if (prev.facility_id == next.facility_id) return {prev.location, prev.facility_id};
  return {prev.location + f * (next.location - prev.location), -1};
}

void validate_events(std::span<const MobilityEvent> events) { (void)events_to_activities(events); }

std::map<int, std::vector<Activity>> events_to_activities(std::span<const MobilityEvent> events) {
  std::map<int, std::vector<Activity>> plans;
  std::map<int, const MobilityEvent*> open;
  std::map<int, real> last_time;
  for (const auto& e : events) {
    if (e.kind == EventKind::Continue) continue;
    auto [lt, fresh] = last_time.try_emplace(e.agent_id, e.time_s);
    if (!fresh && e.time_s < lt->second)
      throw Error("events of agent " + std::to_string(e.agent_id) + " are not time-ordered");
    lt->second = e.time_s;
    auto& plan = plans[e.agent_id];
    auto op = open.find(e.agent_id);
    if (e.kind == EventKind::Start) {
      if (op != open.end())
        throw Error("agent " + std::to_string(e.agent_id) + " starts an activity before ending the previous one");
      open.emplace(e.agent_id, &e);
    } else {
      if (op == open.end())
        throw Error("agent " + std::to_string(e.agent_id) + " ends an activity that was never started");
      const MobilityEvent& s = *op->second;
      if (s.facility_id != e.facility_id)
        throw Error("agent " + std::to_string(e.agent_id) + " ends at a different facility than it started");
      plan.push_back({s.facility_id, s.category, s.location, s.time_s, e.time_s});
      open.erase(op);
    }
  }
  if (!open.empty()) throw Error("agent " + std::to_string(open.begin()->first) + " has an unterminated activity");
  return plans;
}

std::vector<MobilityEvent> activities_to_events(const std::map<int, std::vector<Activity>>& plans) {
  std::vector<MobilityEvent> out;
  for (const auto& [id, plan] : plans)
    for (const auto& a : plan) {
      out.push_back({id, a.start_s, EventKind::Start, a.facility_id, a.category, a.location});
      out.push_back({id, a.end_s, EventKind::End, a.facility_id, a.category, a.location});
    }
  return out;
}

DayType day_type_of(const Date& d) {
  const int wd = d.iso_weekday_index();
  if (wd == 5) return DayType::Saturday;
  if (wd == 6) return DayType::Sunday;
  return DayType::Weekday;
}

std::string_view to_string(DayType t) {
  switch (t) {
    case DayType::Weekday: return "weekday";
    case DayType::Saturday: return "saturday";
    case DayType::Sunday: return "sunday";
  }
  return "?";
}

WeekPlans::WeekPlans(std::span<const MobilityEvent> weekday, std::span<const MobilityEvent> saturday,
                     std::span<const MobilityEvent> sunday) {
  const std::array<std::span<const MobilityEvent>, kNumDayTypes> src{weekday, saturday, sunday};
  std::array<std::map<int, std::vector<Activity>>, kNumDayTypes> maps;
  int max_id = -1;
  for (std::size_t d = 0; d < src.size(); ++d) {
    maps[d] = events_to_activities(src[d]);
    for (const auto& e : src[d]) {
      if (e.agent_id < 0) throw Error("agent ids must be non-negative");
      max_id = std::max(max_id, e.agent_id);
    }
    events_[d].assign(src[d].begin(), src[d].end());
  }
  num_plans_ = max_id + 1;
  for (std::size_t d = 0; d < src.size(); ++d) {
    days_[d].assign(static_cast<std::size_t>(num_plans_), {});
    for (auto& [id, plan] : maps[d]) days_[d][static_cast<std::size_t>(id)] = std::move(plan);
  }
}

ActivitySchedule::ActivitySchedule(std::vector<ActivityDay> days) : days_(std::move(days)) {
  for (std::size_t i = 1; i < days_.size(); ++i)
    if (days_[i].date - days_[i - 1].date != 1) throw Error("activity schedule dates must be contiguous");
}

real ActivitySchedule::out_of_home(const Date& d) const {
  if (days_.empty()) return 0;
  const long idx = d - days_.front().date;
  if (idx < 0 || idx >= static_cast<long>(days_.size())) return 0;
  return days_[static_cast<std::size_t>(idx)].out_of_home_pct_change;
}

bool ActivitySchedule::covers(const Date& first, const Date& last) const {
  return !days_.empty() && days_.front().date <= first && last <= days_.back().date;
}

std::vector<MobilityEvent> parse_events_csv(std::string_view text, const std::string& source) {
  const auto lines = data_lines(text);
  check_header(lines, "agent_id,time_s,kind,facility_id,category,x,y", source);
  std::vector<MobilityEvent> out;
  out.reserve(lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [no, line] = lines[i];
    const auto f = split_fields(line);
    if (f.size() != 7) throw ParseError(source, no, "expected 7 fields");
    MobilityEvent e;
    e.agent_id = static_cast<int>(parse_int(f[0], source, no));
    e.time_s = parse_real(f[1], source, no);
    if (f[2] == "start") e.kind = EventKind::Start;
    else if (f[2] == "end") e.kind = EventKind::End;
    else throw ParseError(source, no, "kind must be 'start' or 'end'");
    e.facility_id = static_cast<int>(parse_int(f[3], source, no));
    try {
      e.category = parse_category(f[4]);
    } catch (const Error& err) {
      throw ParseError(source, no, err.what());
    }
    e.location = Vec2(parse_real(f[5], source, no), parse_real(f[6], source, no));
    out.push_back(e);
  }
  return out;
}

std::string events_to_csv(std::span<const MobilityEvent> events) {
  std::ostringstream os;
  os << "agent_id,time_s,kind,facility_id,category,x,y\n";
  for (const auto& e : events)
    os << e.agent_id << ',' << format_real(e.time_s) << ',' << to_string(e.kind) << ',' << e.facility_id << ','
       << to_string(e.category) << ',' << format_real(e.location.x()) << ',' << format_real(e.location.y()) << '\n';
  return os.str();
}

std::vector<Facility> parse_facilities_csv(std::string_view text, const std::string& source) {
  const auto lines = data_lines(text);
  check_header(lines, "facility_id,category,x,y", source);
  std::vector<Facility> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [no, line] = lines[i];
    const auto f = split_fields(line);
    if (f.size() != 4) throw ParseError(source, no, "expected 4 fields");
    Facility fac;
    fac.id = static_cast<int>(parse_int(f[0], source, no));
    try {
      fac.category = parse_category(f[1]);
    } catch (const Error& err) {
      throw ParseError(source, no, err.what());
    }
    fac.location = Vec2(parse_real(f[2], source, no), parse_real(f[3], source, no));
    out.push_back(fac);
  }
  return out;
}

std::string facilities_to_csv(std::span<const Facility> facilities) {
  std::ostringstream os;
  os << "facility_id,category,x,y\n";
  for (const auto& f : facilities)
    os << f.id << ',' << to_string(f.category) << ',' << format_real(f.location.x()) << ','
       << format_real(f.location.y()) << '\n';
  return os.str();
}

ActivitySchedule parse_activity_csv(std::string_view text, const std::string& source) {
  const auto lines = data_lines(text);
  check_header(lines, "date,at_home_pct_change,out_of_home_pct_change", source);
  std::vector<ActivityDay> days;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [no, line] = lines[i];
    const auto f = split_fields(line);
    if (f.size() != 3) throw ParseError(source, no, "expected 3 fields");
    ActivityDay d;
    try {
      d.date = Date::parse(f[0]);
    } catch (const Error& err) {
      throw ParseError(source, no, err.what());
    }
    d.at_home_pct_change = parse_real(f[1], source, no);
    d.out_of_home_pct_change = parse_real(f[2], source, no);
    days.push_back(d);
  }
  return ActivitySchedule(std::move(days));
}

std::string activity_to_csv(const ActivitySchedule& schedule) {
  std::ostringstream os;
  os << "date,at_home_pct_change,out_of_home_pct_change\n";
  for (const auto& d : schedule.days())
    os << d.date.to_string() << ',' << format_real(d.at_home_pct_change) << ','
       << format_real(d.out_of_home_pct_change) << '\n';
  return os.str();
}

}  // namespace hepi
