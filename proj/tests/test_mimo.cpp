#include "doctest.h"

#include "cinediff/mimo.hpp"
#include "support.hpp"

using namespace cinediff;

TEST_CASE("25 frames in groups of 3 wrap the last window") {
  const WindowPlan p = plan_windows(25, 3);
  CHECK(p.num_windows() == 9);
  CHECK(p.padded_frames() == 27);
  CHECK(p.windows[0] == std::vector<int>{0, 1, 2});
  CHECK(p.windows[8] == std::vector<int>{24, 0, 1});
  CHECK_FALSE(p.is_pad(8, 0));
  CHECK(p.is_pad(8, 1));
  CHECK(p.is_pad(8, 2));
}

TEST_CASE("exact multiples need no padding") {
  const WindowPlan p = plan_windows(6, 3);
  CHECK(p.num_windows() == 2);
  CHECK(p.padded_frames() == 6);
  CHECK(p.windows[1] == std::vector<int>{3, 4, 5});
}

TEST_CASE("group of one is per-frame processing") {
  const Cine v = testing::random_cine(5, 4, 4, 1);
  const Windows w = window(v, 1);
  REQUIRE(w.groups.size() == 5);
  for (Index t = 0; t < 5; ++t) CHECK((w.groups[static_cast<std::size_t>(t)].frame(0) == v.frame(t)).all());
}

TEST_CASE("group larger than the video wraps repeatedly") {
  const WindowPlan p = plan_windows(2, 5);
  CHECK(p.num_windows() == 1);
  CHECK(p.windows[0] == std::vector<int>{0, 1, 0, 1, 0});
}

TEST_CASE("window then ungroup is the identity") {
  for (auto [t, g] : {std::pair{25, 3}, {7, 3}, {6, 3}, {4, 4}, {1, 3}}) {
    const Cine v = testing::random_cine(t, 5, 6, static_cast<std::uint64_t>(t * 10 + g));
    const Windows w = window(v, g);
    for (const auto& grp : w.groups) CHECK(grp.frames() == g);
    CHECK(ungroup(w.groups, w.plan) == v);
  }
}

TEST_CASE("padded copies are ignored on ungroup") {
  const Cine v = testing::random_cine(7, 4, 4, 3);
  Windows w = window(v, 3);
  REQUIRE(w.groups.size() == 3);
  w.groups[2].frame(1).setConstant(-100.0);
  w.groups[2].frame(2).setConstant(42.0);
  CHECK(ungroup(w.groups, w.plan) == v);
}

TEST_CASE("mimo errors") {
  CHECK_THROWS_AS(plan_windows(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(plan_windows(5, 0), std::invalid_argument);
  const Cine v = testing::random_cine(6, 4, 4, 3);
  Windows w = window(v, 3);
  w.groups.pop_back();
  CHECK_THROWS_AS(ungroup(w.groups, w.plan), std::invalid_argument);
  w = window(v, 3);
  w.groups[0] = Cine(3, 4, 5);
  CHECK_THROWS_AS(ungroup(w.groups, w.plan), std::invalid_argument);
}
