#include <doctest.h>
#include <qhk/chambers.hpp>

#include <set>

#include "support.hpp"

using namespace qhk;
using namespace qhk_test;

TEST_CASE("one wall for the two-vertex example") {
  auto model = validate_or_throw(two_vertex_p1(0, 1));
  std::vector<Rational> alpha{Rational(1, 2), Rational(1, 2)}, sigma{Rational(1), Rational(1)};
  auto ws = wall_set(*model, alpha, sigma);
  REQUIRE(ws.walls.size() == 1);
  const auto& w = ws.walls[0];
  // tau_i - tau_j = -1, i.e. tau_j - tau_i = 1
  CHECK(w.normal == std::vector<Rational>{Rational(1), Rational(-1)});
  CHECK(w.offset == Rational(-1));
  auto csv = walls_csv(model->model(), ws.walls);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  auto arr = arrange_2d(ws, parse_box("[-3,3]x[-3,3]"));
  REQUIRE(arr.cells.size() == 2);
  for (const auto& c : arr.cells) {
    auto p = params2(Rational(1), Rational(1), c.representative[0], c.representative[1]);
    bool stable = Rational(1) < c.representative[1] - c.representative[0];
    CHECK((classify(*model, p).kind == Classification::Stable) == stable);
  }
}

TEST_CASE("box parsing") {
  auto b = parse_box("-1/2,3,-3,7/4");
  CHECK(b.xmin == Rational(-1, 2));
  CHECK(b.ymax == Rational(7, 4));
  CHECK_THROWS_AS(parse_box("[1,0]x[0,1]"), Error);
  CHECK_THROWS_AS(parse_box("nonsense"), Error);
}

TEST_CASE("walls are deduplicated and oriented") {
  // Two parallel arrows: both give the same {j} subobject wall.
  QBundleModel m = two_vertex_p1(0, 1);
  m.quiver = build_quiver({"i", "j"}, {{"a", "i", "j"}, {"b", "i", "j"}});
  m.arrow_data.push_back(ArrowData::single(poly({1})));
  auto model = validate_or_throw(m);
  auto ws = wall_set(*model, {Rational(1, 2), Rational(1, 2)}, {Rational(2), Rational(3)});
  CHECK(ws.walls.size() == 1);
  CHECK(ws.walls[0].normal[0] == Rational(1));
}

TEST_CASE("dimension other than two is refused for cells") {
  QBundleModel m;
  m.quiver = build_quiver({"a", "b", "c"}, {});
  m.vertex_data = {{{Summand::line(0)}}, {{Summand::line(0)}}, {{Summand::line(0)}}};
  auto model = validate_or_throw(m);
  std::vector<Rational> half(3, Rational(1, 2)), one(3, Rational(1));
  auto ws = wall_set(*model, half, one);
  CHECK(ws.dimension == 3);
  try {
    arrange_2d(ws, parse_box("[-1,1]x[-1,1]"));
    FAIL("expected DimensionUnsupported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionUnsupported);
  }
}

namespace {

// Cells counted by sign vectors at the centres of a fine grid. Doubles are
// fine here: no centre lands on a wall for the lines used below.
std::size_t brute_cells(const std::vector<Wall>& walls, double lo, double hi, int n) {
  std::set<std::vector<int>> seen;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double x = lo + (hi - lo) * (a + 0.5) / n, y = lo + (hi - lo) * (b + 0.5) / n;
      std::vector<int> sig;
      for (const auto& w : walls) {
        double v = to_double(w.normal[0]) * x + to_double(w.normal[1]) * y - to_double(w.offset);
        sig.push_back(v > 0 ? 1 : -1);
      }
      seen.insert(sig);
    }
  }
  return seen.size();
}

}  // namespace

TEST_CASE("generic lines: 1 + k + C(k,2) cells") {
  // Lines x*cos + y*sin = c with distinct slopes, all crossings inside the box.
  std::vector<std::pair<Rational, Rational>> slopes{{Rational(1), Rational(0)},  {Rational(0), Rational(1)},
                                                    {Rational(1), Rational(1)},  {Rational(1), Rational(-2)},
                                                    {Rational(2), Rational(-1)}};
  std::vector<Rational> offs{Rational(1, 3), Rational(-1, 5), Rational(1, 7), Rational(2, 9), Rational(-3, 11)};
  for (std::size_t k = 1; k <= slopes.size(); ++k) {
    WallSet ws;
    ws.dimension = 2;
    for (std::size_t i = 0; i < k; ++i) {
      Wall w;
      w.normal = {slopes[i].first, slopes[i].second};
      if (w.normal[0] == 0) w.normal[1] = 1;
      w.offset = offs[i];
      ws.walls.push_back(w);
    }
    Box2 box{Rational(-1), Rational(1), Rational(-1), Rational(1)};
    auto arr = arrange_2d(ws, box);
    std::size_t expect = 1 + k + k * (k - 1) / 2;
    CHECK(arr.cells.size() == expect);
    CHECK(brute_cells(ws.walls, -1, 1, 2000) == expect);
    std::set<std::vector<int>> sides;
    for (const auto& c : arr.cells) sides.insert(c.side);
    CHECK(sides.size() == arr.cells.size());
  }
}
