#include "hepi/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hepi;

namespace {

TriMesh unit_square() {
  Eigen::Matrix2Xd n(2, 4);
  n << 0, 1, 1, 0,  //
      0, 0, 1, 1;
  TriMesh::Triangles t(3, 2);
  t << 0, 0,  //
      1, 2,   //
      2, 3;
  return TriMesh(n, t);
}

// hexagon around the origin, six equilateral triangles of area 2
TriMesh hexagon_fan() {
  const real side = std::sqrt(8 / std::sqrt(3.0));
  Eigen::Matrix2Xd n(2, 7);
  n.col(0) = Vec2::Zero();
  for (int k = 0; k < 6; ++k) {
    const real a = k * std::numbers::pi / 3;
    n.col(k + 1) = side * Vec2(std::cos(a), std::sin(a));
  }
  TriMesh::Triangles t(3, 6);
  for (int k = 0; k < 6; ++k) t.col(k) << 0, 1 + k, 1 + (k + 1) % 6;
  return TriMesh(n, t);
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("single triangle") {
  const auto m = parse_triangle_files("3 2 0 1\n1 0 0 1\n2 1 0 1\n3 0 1 1\n", "1 3 0\n1 1 2 3\n");
  CHECK(m.num_nodes() == 3);
  CHECK(m.num_triangles() == 1);
  for (int k = 0; k < 3; ++k) {
    REQUIRE(m.node_fan(k).size() == 1);
    CHECK(m.node_fan(k)[0] == 0);
    CHECK(m.is_boundary(k));
    CHECK(fan_area(m, k) == doctest::Approx(0.5));
  }
  CHECK(m.boundary_nodes().size() == 3);
}

TEST_CASE("unit square of two triangles") {
  const auto m = unit_square();
  CHECK(m.total_area() == doctest::Approx(1.0));
  // diagonal runs 0 - 2
  CHECK(m.node_fan(0).size() == 2);
  CHECK(m.node_fan(2).size() == 2);
  CHECK(m.node_fan(1).size() == 1);
  CHECK(fan_area(m, 0) == doctest::Approx(1.0));
  CHECK(fan_area(m, 2) == doctest::Approx(1.0));
  CHECK(m.lumped_mass().sum() == doctest::Approx(1.0));
}

TEST_CASE("regular six-fan") {
  const auto m = hexagon_fan();
  for (int t = 0; t < 6; ++t) CHECK(m.triangle_areas()[t] == doctest::Approx(2.0));
  CHECK(fan_area(m, 0) == doctest::Approx(12.0));
  CHECK_FALSE(m.is_boundary(0));
  CHECK(m.boundary_nodes().size() == 6);
}

TEST_CASE("shared edge goes to the lower triangle") {
  const auto m = unit_square();
  CHECK(locate_point(m, Vec2(0.5, 0.5)) == 0);
  // swapped order: the upper triangle is now index 0 and wins the tie
  TriMesh::Triangles t2(3, 2);
  t2.col(0) << 0, 2, 3;
  t2.col(1) << 0, 1, 2;
  const TriMesh swapped(m.nodes(), t2);
  CHECK(locate_point(swapped, Vec2(0.5, 0.5)) == 0);
  CHECK(locate_point(swapped, Vec2(0.9, 0.1)) == 1);
  CHECK_FALSE(locate_point(m, Vec2(1.5, 0.5)).has_value());
  CHECK_FALSE(TriMesh().contains(Vec2(0, 0)));
}

TEST_CASE("centroids locate to their own triangle") {
  Rng rng = make_rng(5, 0);
  const auto m = make_jittered_rectangle_mesh(Vec2(0, 0), Vec2(100, 60), 12, 7, 0.3, rng);
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.locate(m.centroid(t)) == t);
}

TEST_CASE("fans are consistent with triangles") {
  Rng rng = make_rng(6, 0);
  const auto m = make_jittered_rectangle_mesh(Vec2(-5, 2), Vec2(5, 9), 6, 5, 0.25, rng);
  for (int k = 0; k < m.num_nodes(); ++k) {
    int expected = 0;
    for (int t = 0; t < m.num_triangles(); ++t) expected += (m.triangles().col(t).array() == k).any();
    CHECK(static_cast<int>(m.node_fan(k).size()) == expected);
    for (int t : m.node_fan(k)) CHECK((m.triangles().col(t).array() == k).any());
  }
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.triangle_areas()[t] > 0);
  // rectangle boundary: 2 * (6 + 5) nodes
  CHECK(m.boundary_nodes().size() == 22);
}

TEST_CASE("round trip through Triangle text") {
  Rng rng = make_rng(7, 0);
  const auto m = make_jittered_rectangle_mesh(Vec2(0, 0), Vec2(3, 2), 4, 3, 0.2, rng);
  const auto files = to_triangle_files(m);
  const auto back = parse_triangle_files(files.node, files.ele, files.poly.empty() ? std::nullopt
                                                                                   : std::optional(files.poly));
  CHECK(back == m);
  const auto again = to_triangle_files(back);
  CHECK(again.node == files.node);
  CHECK(again.ele == files.ele);
}

TEST_CASE("comments and one-based indices") {
  const auto m = parse_triangle_files("# nodes\n4 2 0 0\n1 0 0\n2 1 0 # tail\n3 1 1\n4 0 1\n",
                                      "2 3 0\n1 1 2 3\n# c\n2 1 3 4\n");
  CHECK(m.num_triangles() == 2);
  CHECK(m.total_area() == doctest::Approx(1.0));
}

TEST_CASE("parse errors carry line numbers") {
  try {
    parse_triangle_files("3 2 0 0\n0 0 0\n1 1 x\n2 0 1\n", "1 3 0\n0 0 1 2\n");
    FAIL("no throw");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_triangle_files("3 2 0 0\n0 0 0\n1 1 0\n2 0 1\n", "1 3 0\n0 0 1 7\n"), ParseError);
  // degenerate triangle
  CHECK_THROWS_AS(parse_triangle_files("3 2 0 0\n0 0 0\n1 1 0\n2 2 0\n", "1 3 0\n0 0 1 2\n"), Error);
  // node count mismatch
  CHECK_THROWS_AS(parse_triangle_files("4 2 0 0\n0 0 0\n1 1 0\n2 0 1\n", "1 3 0\n0 0 1 2\n"), ParseError);
}

TEST_CASE("nearest node ties go to the lower index") {
  const auto m = unit_square();
  CHECK(m.nearest_node(Vec2(0.5, 0.0)) == 0);
  CHECK(m.nearest_node(Vec2(0.5, 0.5)) == 0);
  CHECK(m.nearest_node(Vec2(0.9, 0.8)) == 2);
}

}
