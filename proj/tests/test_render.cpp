#include <doctest.h>

#include <string>

#include "crbmgen/svg.hpp"
#include "support/test_support.hpp"

using namespace crbmgen;

namespace {

int count(const std::string& haystack, const std::string& needle) {
  int n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("heatmap: one cell per matrix entry, legend and fixed viewBox") {
  Matrix m(2, 2);
  m << 0.0, 1.0, 2.0, 3.0;
  const std::string svg = render_heatmap(m, "demo");
  CHECK(count(svg, "class=\"cell\"") == 4);
  CHECK(count(svg, "class=\"legend\"") > 0);
  CHECK(svg.find("viewBox=\"0 0 640 ") != std::string::npos);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(render_heatmap(m, "demo") == svg);
  CHECK(count(render_heatmap(testsupport::random_matrix(5, 7, 1)), "class=\"cell\"") == 35);
}

TEST_CASE("heatmap of a constant matrix renders without dividing by zero") {
  const std::string svg = render_heatmap(Matrix::Constant(3, 3, 2.0));
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(count(svg, "class=\"cell\"") == 9);
}

TEST_CASE("bars: one bar per entry, empty vector is an error") {
  Vector v(4);
  v << -1.0, 0.5, 2.0, 0.0;
  const std::string svg = render_bars(v, "onsets");
  CHECK(count(svg, "class=\"cell\"") == 4);
  CHECK(render_bars(v, "onsets") == svg);
  CHECK_THROWS_AS(render_bars(Vector(), "x"), Error);
}

TEST_CASE("keyscape rendering: cells per level and one legend entry per key present") {
  Keyscape ks;
  ks.levels = {{0}, {0, 7}, {0, 0, 7, kNoKey}};
  const std::string svg = render_keyscape(ks, "keys");
  CHECK(count(svg, "class=\"cell\"") == 7);
  CHECK(count(svg, "class=\"legend\"") == 3);
  CHECK(svg.find("G major") != std::string::npos);
  CHECK(svg.find(">none<") != std::string::npos);
  CHECK(render_keyscape(ks, "keys") == svg);
  CHECK_THROWS_AS(render_keyscape(Keyscape{}), Error);
}

TEST_CASE("titles are XML-escaped") {
  const std::string svg = render_heatmap(Matrix::Zero(1, 1), "a<b & \"c\"");
  CHECK(svg.find("a&lt;b &amp; &quot;c&quot;") != std::string::npos);
}

TEST_CASE("key colours: 24 distinct entries plus a neutral colour") {
  std::vector<std::string> seen;
  for (KeyLabel k = 0; k < 24; ++k) {
    const std::string c = key_color(k);
    CHECK(std::find(seen.begin(), seen.end(), c) == seen.end());
    seen.push_back(c);
  }
  CHECK(std::find(seen.begin(), seen.end(), key_color(kNoKey)) == seen.end());
}
