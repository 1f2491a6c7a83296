#include <algorithm>
#include <random>

#include "doctest.h"
#include "evsim/error.hpp"
#include "evsim/rcm.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace evsim;

namespace {

std::vector<Pixel> px(std::initializer_list<int> v) {
  std::vector<Pixel> out;
  for (int x : v) out.push_back(static_cast<Pixel>(x));
  return out;
}

std::vector<int> as_int(const std::vector<Pixel>& v) { return {v.begin(), v.end()}; }

SimConfig plain_config() {
  SimConfig c;
  c.noise_filter = NoiseFilter::none;
  return c;
}

Frame vertical_step(int w, int h, int last_dark_col) {
  Frame f(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = last_dark_col + 1; c < w; ++c) f.at(r, c) = 255;
  return f;
}

Frame checker_junction(int side) {
  Frame f(side, side);
  const int half = side / 2;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) f.at(r, c) = ((r < half) == (c < half)) ? 255 : 0;
  return f;
}

}  // namespace

TEST_CASE("median3") {
  SUBCASE("constant frame unchanged") {
    const Frame f(9, 7, 0, Pixel{42});
    CHECK(median3(f) == f);
  }
  SUBCASE("isolated bright pixel removed") {
    Frame f(7, 7);
    f.at(3, 3) = 255;
    CHECK(median3(f).at(3, 3) == 0);
    CHECK(median3(f) == Frame(7, 7));
  }
  SUBCASE("3x3 ramp centre is 5") {
    const Frame f(3, 3, 0, px({1, 2, 3, 4, 5, 6, 7, 8, 9}));
    CHECK(median3(f).at(1, 1) == 5);
  }
  SUBCASE("matches the sorting oracle with replicated borders") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const int w = 1 + static_cast<int>(rng() % 17);
      const int h = 1 + static_cast<int>(rng() % 17);
      const Frame f = testutil::random_frame(rng, w, h);
      const auto expected = oracle::median3(oracle::to_image(w, h, f.pixels));
      const Frame got = median3(f);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) CHECK(got.at(r, c) == expected[r][c]);
    }
  }
}

TEST_CASE("mad and variance on hand-computed regions") {
  CHECK(mad(px({7, 7, 7, 7})) == 0.0);
  CHECK(variance(px({7, 7, 7, 7})) == 0.0);
  CHECK(mad(px({2, 4})) == 1.0);
  CHECK(variance(px({2, 4})) == 1.0);
  CHECK(mad(px({0, 0, 0, 8})) == 3.0);
  CHECK(variance(px({0, 0, 0, 8})) == 12.0);
  CHECK_THROWS_AS(mad(std::vector<Pixel>{}), DataError);
}

TEST_CASE("mad/variance properties on random regions") {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const Frame f = testutil::random_frame(rng, n, n, 0, 0, 200);
    const auto& region = f.pixels;
    const double m = mad(region);
    const double v = variance(region);
    CHECK(m * m <= v + 1e-9);
    CHECK(m == doctest::Approx(oracle::mad(as_int(region))).epsilon(1e-12));
    CHECK(std::abs(v - oracle::variance(as_int(region))) <= 1e-9);
    const bool constant = std::all_of(region.begin(), region.end(),
                                      [&](Pixel p) { return p == region.front(); });
    CHECK((m == 0.0) == constant);
    CHECK((v == 0.0) == constant);

    std::vector<Pixel> shifted(region);
    for (auto& p : shifted) p = static_cast<Pixel>(p + 55);
    CHECK(std::abs(mad(shifted) - m) <= 1e-9);
    CHECK(std::abs(variance(shifted) - v) <= 1e-9);
  }
}

TEST_CASE("edge_counts") {
  SUBCASE("constant frame has no edges") {
    const Frame f(16, 16, 0, Pixel{90});
    const auto counts = edge_counts(f, build_grid(16, 16, 4), 1);
    CHECK(std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; }));
  }
  SUBCASE("vertical step lights exactly the two columns beside it") {
    const Frame f = vertical_step(16, 16, 7);
    const Gradients g = sobel(f);
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        const int mag = std::abs(g.gx[r * 16 + c]) + std::abs(g.gy[r * 16 + c]);
        CHECK(mag == ((c == 7 || c == 8) ? 1020 : 0));
      }
    }
    const RegionGrid grid = build_grid(16, 16, 4);
    const auto counts = edge_counts(f, grid, 100);
    for (RegionId rid = 0; rid < grid.count(); ++rid) {
      const int col = static_cast<int>(rid % 4);
      CHECK(counts[rid] == ((col == 1 || col == 2) ? 4 : 0));
    }
  }
  SUBCASE("count of 5 meets a threshold of 5") {
    SimConfig c;
    c.spatial_threshold = 5;
    CHECK(classify({5.0, 0}, c).srs == 1);
    CHECK(classify({4.0, 0}, c).srs == 0);
  }
  SUBCASE("matches oracle on random frames") {
    std::mt19937 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
      const Frame f = testutil::random_frame(rng, 24, 16);
      const RegionGrid grid = build_grid(24, 16, 8);
      const int g_th = static_cast<int>(rng() % 800);
      const auto counts = edge_counts(f, grid, g_th);
      const auto img = oracle::to_image(24, 16, f.pixels);
      for (RegionId rid = 0; rid < grid.count(); ++rid) {
        CHECK(counts[rid] ==
              oracle::edge_count(img, grid.origin_row(rid), grid.origin_col(rid), 8, g_th));
      }
    }
  }
}

TEST_CASE("corner_counts") {
  const SimConfig defaults;
  SUBCASE("constant frame has no corners") {
    const Frame f(16, 16, 0, Pixel{200});
    const auto counts = corner_counts(f, build_grid(16, 16, 8), defaults.corner_k,
                                      defaults.corner_response_threshold);
    CHECK(std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; }));
  }
  SUBCASE("checkerboard junction is detected in the junction regions") {
    const Frame f = checker_junction(16);
    const auto img = oracle::to_image(16, 16, f.pixels);
    // Oracle first: the response right at the junction is strongly positive.
    REQUIRE(oracle::harris(img, 7, 7, 0.04L) > 1e6L);
    const RegionGrid grid = build_grid(16, 16, 8);
    const auto counts = corner_counts(f, grid, 0.04, 1e6);
    for (RegionId rid = 0; rid < grid.count(); ++rid) {
      const int expected =
          oracle::corner_count(img, grid.origin_row(rid), grid.origin_col(rid), 8, 0.04L, 1e6L);
      CHECK(counts[rid] == expected);
      CHECK(counts[rid] >= 1);
    }
  }
  SUBCASE("straight edge yields no corners") {
    const Frame f = vertical_step(16, 16, 7);
    const auto img = oracle::to_image(16, 16, f.pixels);
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 16; ++c) REQUIRE(oracle::harris(img, r, c, 0.04L) <= 0.0L);
    const auto counts = corner_counts(f, build_grid(16, 16, 8), 0.04, 1e6);
    CHECK(std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; }));
  }
  SUBCASE("matches oracle on random frames") {
    std::mt19937 rng(14);
    for (int trial = 0; trial < 10; ++trial) {
      const Frame f = testutil::random_frame(rng, 16, 16);
      const auto img = oracle::to_image(16, 16, f.pixels);
      const RegionGrid grid = build_grid(16, 16, 4);
      const double th = (trial % 2 == 0) ? 1e6 : 1e11;
      const auto counts = corner_counts(f, grid, 0.04, th);
      for (RegionId rid = 0; rid < grid.count(); ++rid) {
        CHECK(counts[rid] == oracle::corner_count(img, grid.origin_row(rid),
                                                  grid.origin_col(rid), 4, 0.04L, th));
      }
    }
  }
}

TEST_CASE("temporal_mismatch") {
  const auto a = px({10, 10, 10, 10});
  CHECK(temporal_mismatch(a, a, 1) == 0);
  CHECK(temporal_mismatch(px({10, 13, 10, 10}), a, 3) == 1);
  CHECK(temporal_mismatch(px({10, 12, 10, 10}), a, 3) == 0);
  CHECK(temporal_mismatch(px({0, 0, 0, 0}), a, 10) == 4);
  CHECK(temporal_mismatch(a, a, 0) == 4);
}

TEST_CASE("classify follows the relevance table") {
  SimConfig c;
  c.spatial_threshold = 3;
  c.temporal_threshold = 2;
  const RelevanceBits both = classify({3.0, 2}, c);
  CHECK(both == RelevanceBits{1, 1});
  CHECK(both.active());
  const RelevanceBits still = classify({3.0, 1}, c);
  CHECK(still == RelevanceBits{1, 0});
  CHECK_FALSE(still.active());
  CHECK_FALSE(classify({2.9, 5}, c).active());
  CHECK(classify({2.9, 5}, c).srs == 0);
  CHECK_FALSE(classify({2.9, 0}, c).active());
}

TEST_CASE("rcm_step") {
  std::mt19937 rng(21);
  const RegionGrid grid = build_grid(32, 32, 8);

  SUBCASE("bootstrap makes every region active with raw payloads") {
    SimConfig c;  // median3 on
    c.spatial_threshold = 1e9;
    RcmState st;
    const Frame f = testutil::random_frame(rng, 32, 32);
    const RcmOutput out = rcm_step(f, st, grid, c);
    REQUIRE(out.events.size() == grid.count());
    for (RegionId rid = 0; rid < grid.count(); ++rid) {
      const RegionEvent& ev = out.events[rid];
      CHECK(ev.rid == rid);
      CHECK(ev.active());
      REQUIRE(ev.payload);
      CHECK(*ev.payload == region_view(f, grid, rid).pixels);
    }
    CHECK(st.initialized);
    CHECK(st.reference == median3(f));
  }

  SUBCASE("repeated frame produces no active events") {
    SimConfig c;
    c.temporal_pixel_delta = 1;
    c.temporal_threshold = 1;
    c.spatial_threshold = 0;
    RcmState st;
    Frame f = testutil::random_frame(rng, 32, 32);
    rcm_step(f, st, grid, c);
    for (int k = 1; k < 5; ++k) {
      f.t = k;
      const RcmOutput out = rcm_step(f, st, grid, c);
      CHECK(std::none_of(out.events.begin(), out.events.end(),
                         [](const RegionEvent& e) { return e.active() || e.payload; }));
      for (const auto& r : out.relevance.regions) CHECK(r.scores.mismatch_count == 0);
    }
  }

  SUBCASE("zero thresholds make everything active") {
    SimConfig c;
    c.spatial_threshold = 0;
    c.temporal_threshold = 0;
    RcmState st;
    for (int k = 0; k < 3; ++k) {
      const RcmOutput out = rcm_step(testutil::random_frame(rng, 32, 32, k), st, grid, c);
      CHECK(std::all_of(out.events.begin(), out.events.end(),
                        [](const RegionEvent& e) { return e.active(); }));
    }
  }

  SUBCASE("relevance uses denoised pixels but payload stays raw") {
    SimConfig c;  // median3, delta 2, theta_t 1
    c.spatial_threshold = 0;
    RcmState st;
    Frame base(32, 32, 0, Pixel{50});
    rcm_step(base, st, grid, c);
    Frame noisy = base;
    noisy.t = 1;
    noisy.at(3, 3) = 255;  // salt, removed by the median
    RcmOutput out = rcm_step(noisy, st, grid, c);
    CHECK(out.events[0].mismatch_count == 0);
    CHECK_FALSE(out.events[0].active());

    Frame moved = base;
    moved.t = 2;
    for (int r = 0; r < 4; ++r)
      for (int cc = 0; cc < 4; ++cc) moved.at(r, cc) = 200;
    moved.at(1, 1) = 7;  // survives in the payload only
    out = rcm_step(moved, st, grid, c);
    REQUIRE(out.events[0].active());
    CHECK(*out.events[0].payload == region_view(moved, grid, 0).pixels);
  }

  SUBCASE("frame and reference dimension mismatch is a configuration error") {
    SimConfig c;
    RcmState st;
    CHECK_THROWS_AS(rcm_step(Frame(16, 16), st, grid, c), ConfigError);
    rcm_step(Frame(32, 32), st, grid, c);
    st.reference = Frame(16, 16);
    CHECK_THROWS_AS(rcm_step(Frame(32, 32, 1), st, grid, c), ConfigError);
  }

  SUBCASE("worker count does not change the output") {
    SimConfig c;
    c.spatial_feature = SpatialFeature::variance;
    c.spatial_threshold = 100;
    const Frame a = testutil::random_frame(rng, 32, 32, 0);
    const Frame b = testutil::random_frame(rng, 32, 32, 1);
    RcmState s1;
    RcmState s4;
    rcm_step(a, s1, grid, c, 1);
    rcm_step(a, s4, grid, c, 4);
    const RcmOutput o1 = rcm_step(b, s1, grid, c, 1);
    const RcmOutput o4 = rcm_step(b, s4, grid, c, 4);
    CHECK(o1.relevance == o4.relevance);
    CHECK(o1.events == o4.events);
  }
}

TEST_CASE("reference update policies") {
  SimConfig c = plain_config();
  c.spatial_threshold = 0;
  c.temporal_pixel_delta = 2;
  c.temporal_threshold = 1;
  const RegionGrid grid = build_grid(8, 8, 8);

  auto active_after_drift = [&](ReferenceUpdate mode) {
    c.reference_update = mode;
    RcmState st;
    std::vector<bool> active;
    for (int k = 0; k < 5; ++k) {
      const RcmOutput out = rcm_step(Frame(8, 8, k, static_cast<Pixel>(100 + k)), st, grid, c);
      active.push_back(out.events[0].active());
    }
    return active;
  };
  // A +1 per frame drift never crosses delta=2 frame-to-frame but accumulates
  // against a held reference.
  CHECK(active_after_drift(ReferenceUpdate::every_frame) ==
        std::vector<bool>{true, false, false, false, false});
  CHECK(active_after_drift(ReferenceUpdate::on_event) ==
        std::vector<bool>{true, false, true, false, true});
}

TEST_CASE("threshold monotonicity") {
  std::mt19937 rng(31);
  const RegionGrid grid = build_grid(32, 32, 8);
  for (const auto feature : {SpatialFeature::edge, SpatialFeature::corner, SpatialFeature::mad,
                             SpatialFeature::variance}) {
    for (int trial = 0; trial < 5; ++trial) {
      SimConfig c;
      c.spatial_feature = feature;
      c.corner_response_threshold = 1e9;
      const Frame prev = testutil::random_frame(rng, 32, 32, 0);
      Frame cur = prev;
      cur.t = 1;
      for (auto& p : cur.pixels)
        if (rng() % 3 == 0) p = static_cast<Pixel>(rng() % 256);

      auto bits_for = [&](double ts, int tt, int delta) {
        SimConfig k = c;
        k.spatial_threshold = ts;
        k.temporal_threshold = tt;
        k.temporal_pixel_delta = delta;
        RcmState st;
        rcm_step(prev, st, grid, k);
        return rcm_step(cur, st, grid, k).relevance;
      };
      const auto lo = bits_for(1, 1, 1);
      const auto hi_s = bits_for(40, 1, 1);
      const auto hi_t = bits_for(1, 20, 1);
      const auto hi_d = bits_for(1, 1, 60);
      for (std::size_t i = 0; i < grid.count(); ++i) {
        CHECK(hi_s.regions[i].bits.srs <= lo.regions[i].bits.srs);
        CHECK(hi_t.regions[i].bits.trs <= lo.regions[i].bits.trs);
        CHECK(hi_d.regions[i].bits.trs <= lo.regions[i].bits.trs);
      }
    }
  }
}

TEST_CASE("scores match the brute-force oracle on random 8x8 regions") {
  std::mt19937 rng(41);
  SimConfig c = plain_config();
  for (int trial = 0; trial < 200; ++trial) {
    const Frame cur = testutil::random_frame(rng, 8, 8);
    const Frame ref = testutil::random_frame(rng, 8, 8);
    const RegionGrid grid = build_grid(8, 8, 8);
    const auto ci = oracle::to_image(8, 8, cur.pixels);
    const auto block = oracle::block(ci, 0, 0, 8);
    CHECK(std::abs(mad(cur.pixels) - oracle::mad(block)) <= 1e-9);
    CHECK(std::abs(variance(cur.pixels) - oracle::variance(block)) <= 1e-9);
    const int g_th = 50 + static_cast<int>(rng() % 600);
    CHECK(edge_counts(cur, grid, g_th)[0] == oracle::edge_count(ci, 0, 0, 8, g_th));
    const int delta = static_cast<int>(rng() % 64);
    CHECK(temporal_mismatch(cur.pixels, ref.pixels, delta) ==
          oracle::mismatch(block, as_int(ref.pixels), delta));
  }
}

TEST_CASE("idempotent stillness over many repeats") {
  std::mt19937 rng(51);
  SimConfig c;
  c.spatial_threshold = 0;
  c.temporal_pixel_delta = 1;
  Simulator sim(c, 20, 12);
  const Frame f = testutil::random_frame(rng, 20, 12);
  for (int k = 0; k < 6; ++k) {
    Frame copy = f;
    copy.t = k;
    const RcmOutput out = sim.step(copy);
    const auto active = std::count_if(out.events.begin(), out.events.end(),
                                      [](const RegionEvent& e) { return e.active(); });
    CHECK(active == (k == 0 ? static_cast<long>(sim.grid().count()) : 0));
  }
}

TEST_CASE("Simulator validates its input") {
  Simulator sim(SimConfig{}, 20, 12);
  CHECK(sim.grid().padded_width == 24);
  CHECK(sim.grid().padded_height == 16);
  sim.step(Frame(20, 12, 3));
  CHECK_THROWS_AS(sim.step(Frame(20, 12, 3)), DataError);
  CHECK_THROWS_AS(sim.step(Frame(21, 12, 4)), ConfigError);
  SimConfig bad;
  bad.region_size = 0;
  CHECK_THROWS_AS(Simulator(bad, 8, 8), ConfigError);
}
