#ifndef HEPI_TEST_SUPPORT_HPP
#define HEPI_TEST_SUPPORT_HPP

#include "hepi/mobility.hpp"

#include <filesystem>
#include <string>

namespace hepi::test {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hepi-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline MobilityEvent start(int agent, real t, int facility, Vec2 at, ActivityCategory c = ActivityCategory::Work) {
  return {agent, t, EventKind::Start, facility, c, at};
}

inline MobilityEvent end(int agent, real t, int facility, Vec2 at, ActivityCategory c = ActivityCategory::Work) {
  return {agent, t, EventKind::End, facility, c, at};
}

}  // namespace hepi::test

#endif
