#include <doctest.h>

#include <cmath>
#include <functional>

#include "pathsum/config.hpp"
#include "pathsum/error.hpp"

using namespace pathsum;

namespace {

std::string message(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("sections and globals") {
  const auto cfg = Config::parse("grid_points = 101\n# comment\n[cdt]\nbeta = 30  # strong\nomega = 4\n[verify]\nseed = 3\n",
                                 "run.cfg");
  ConfigSection cdt(cfg, "cdt");
  CHECK(cdt.number("beta") == 30.0);
  CHECK(cdt.integer("grid_points", 7) == 101);
  CHECK(cdt.number("omega0", 1.5) == 1.5);
  CHECK_FALSE(cdt.has("seed"));
  CHECK(cdt.number("omega") == 4.0);
  CHECK_NOTHROW(cdt.finish());

  ConfigSection partial(cfg, "cdt");
  partial.number("beta");
  CHECK(message([&] { partial.finish(); }) == "run.cfg:5: unknown key 'omega' for [cdt]");

  // Unused globals are not an error in other sections.
  ConfigSection verify(cfg, "verify");
  CHECK(verify.seed("seed", 0) == 3u);
  CHECK_NOTHROW(verify.finish());
}

TEST_CASE("typed values and diagnostics") {
  auto cfg = Config::parse("[s]\nx = abc\nlist = 1, 2.5, 3\nints = 1,2,x\nlam = inf\nnan = nan\nmode = fast\n", "c.cfg");
  ConfigSection s(cfg, "s");
  CHECK(message([&] { s.number("x"); }) == "c.cfg:2: key 'x': expected a finite number, got 'abc'");
  CHECK(s.numbers("list") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(message([&] { s.integers("ints"); }).find("c.cfg:4") == 0);
  CHECK(std::isinf(s.number("lam")));
  CHECK_THROWS_AS(s.number("nan"), ParseError);
  CHECK(message([&] { s.number("missing"); }) == "[s]: required key 'missing' is missing");
  CHECK(s.choice("mode", {"slow", "fast"}, 0) == 1);
  CHECK(s.choice("absent", {"slow", "fast"}, 0) == 0);

  cfg.set("s", "mode", "warp", "--mode");
  ConfigSection t(cfg, "s");
  CHECK(message([&] { t.choice("mode", {"slow", "fast"}, 0); }) == "--mode: key 'mode': expected one of slow|fast, got 'warp'");
}

TEST_CASE("malformed files") {
  CHECK(message([] { Config::parse("[cdt\nbeta = 1\n", "f"); }) == "f:1: malformed section header '[cdt'");
  CHECK(message([] { Config::parse("[cdt]\nbeta 1\n", "f"); }) == "f:2: expected 'key = value', got 'beta 1'");
  CHECK(message([] { Config::parse("[cdt]\nbeta =\n", "f"); }) == "f:2: key 'beta' has no value");
  CHECK(message([] { Config::parse("[cdt]\nbeta = 1\nbeta = 2\n", "f"); }) == "f:3: key 'beta' repeated (first at f:2)");
  CHECK_THROWS_AS(Config::read("/nonexistent/run.cfg"), ParseError);
}
