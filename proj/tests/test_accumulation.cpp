#include <gtest/gtest.h>

#include <map>
#include <random>

#include "evrange/accumulation.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace evrange {
namespace {

TEST(Accumulate, WindowBoundaryBelongsToNextWindow) {
  const EventStream s{{8, 8},
                      {{0, 0, 0, Polarity::Positive}, {1, 1, 2999, Polarity::Positive}, {2, 2, 3000, Polarity::Negative}}};
  const auto frames = accumulate(s, 3000);
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].total(), 2u);
  EXPECT_EQ(frames[1].total(), 1u);
  EXPECT_EQ(frames[0].window_start_us, 0u);
  EXPECT_EQ(frames[1].window_start_us, 3000u);
  EXPECT_EQ(frames[1].window_len_us, 3000u);
}

TEST(Accumulate, SingleEventLandsAtRowYColumnX) {
  const EventStream s{{8, 6}, {{4, 2, 10, Polarity::Positive}}};
  const auto frames = accumulate(s, 3000);
  ASSERT_EQ(frames.size(), 1u);
  const CountFrame& f = frames[0];
  ASSERT_EQ(f.height(), 6u);
  ASSERT_EQ(f.width(), 8u);
  for (std::size_t r = 0; r < f.height(); ++r) {
    for (std::size_t c = 0; c < f.width(); ++c) EXPECT_EQ(f(r, c), (r == 2 && c == 4) ? 1u : 0u);
  }
}

TEST(Accumulate, EmptyWindowsAreEmitted) {
  const EventStream s{{4, 4}, {{0, 0, 100, Polarity::Positive}, {0, 0, 9100, Polarity::Positive}}};
  const auto frames = accumulate(s, 3000);
  ASSERT_EQ(frames.size(), 4u);
  for (std::size_t k = 0; k < frames.size(); ++k) EXPECT_EQ(frames[k].window_start_us, 3000 * k);
  EXPECT_EQ(frames[1].total(), 0u);
  EXPECT_EQ(frames[2].total(), 0u);
}

TEST(Accumulate, LeadingEmptyWindowsAlignToZero) {
  const EventStream s{{4, 4}, {{0, 0, 7000, Polarity::Positive}}};
  const auto frames = accumulate(s, 3000);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[2].window_start_us, 6000u);
  EXPECT_EQ(frames[2].total(), 1u);
}

TEST(Accumulate, EmptyStreamGivesNoFrames) { EXPECT_TRUE(accumulate(EventStream{{4, 4}, {}}, 3000).empty()); }

TEST(Accumulate, RandomStreamMatchesNaiveRecount) {
  std::mt19937_64 rng(21);
  const SensorGeometry g{40, 30};
  const EventStream s{g, oracle::random_events(rng, g, 10'000, 100'000)};
  const auto frames = accumulate(s, 3000);

  std::map<std::uint64_t, std::map<std::pair<int, int>, std::uint32_t>> naive;
  for (const Event& e : s.events) ++naive[e.t / 3000][{e.y, e.x}];

  ASSERT_EQ(frames.size(), s.events.back().t / 3000 + 1);
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& expected = naive[k];
    std::uint64_t expected_sum = 0;
    for (const auto& [pixel, n] : expected) {
      EXPECT_EQ(frames[k](pixel.first, pixel.second), n);
      expected_sum += n;
    }
    EXPECT_EQ(frames[k].total(), expected_sum) << "window " << k;
    total += frames[k].total();
  }
  EXPECT_EQ(total, s.events.size());
}

TEST(Accumulate, BatchingDoesNotChangeFrames) {
  std::mt19937_64 rng(22);
  const SensorGeometry g{20, 20};
  const EventStream s{g, oracle::random_events(rng, g, 4000, 50'000)};
  const auto whole = accumulate(s, 3000);

  FrameAccumulator acc(g, {3000, PolarityMode::Both});
  std::vector<CountFrame> got;
  auto keep = [&](const CountFrame& f) { got.push_back(f); };
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    // Interleave redundant advances, as the pipeline does for filtered events.
    acc.advance_to(s.events[i].t, keep);
    acc.add(s.events[i], keep);
  }
  acc.finish(keep);
  EXPECT_EQ(got, whole);
}

TEST(Accumulate, PolarityModes) {
  const EventStream s{{4, 4}, {{0, 0, 1, Polarity::Positive}, {0, 0, 2, Polarity::Negative}, {1, 0, 3, Polarity::Negative}}};
  EXPECT_EQ(accumulate(s, 3000, PolarityMode::Both)[0].total(), 3u);
  EXPECT_EQ(accumulate(s, 3000, PolarityMode::Positive)[0].total(), 1u);
  EXPECT_EQ(accumulate(s, 3000, PolarityMode::Negative)[0].total(), 2u);
}

TEST(CropToRoi, SingleCellMarginZero) {
  CountFrame f(20, 30);
  f(7, 12) = 4;
  const CountFrame roi = crop_to_roi(f, 0);
  EXPECT_EQ(roi.height(), 1u);
  EXPECT_EQ(roi.width(), 1u);
  EXPECT_EQ(roi.origin, (PixelOrigin{12, 7}));
  EXPECT_EQ(roi(0, 0), 4u);
}

TEST(CropToRoi, TwoCellsBoundingBox) {
  // Cells given as (x, y): (10,10) and (20,40).
  CountFrame f(100, 100);
  f(10, 10) = 1;
  f(40, 20) = 1;
  const CountFrame roi = crop_to_roi(f, 0);
  EXPECT_EQ(roi.width(), 11u);
  EXPECT_EQ(roi.height(), 31u);
  EXPECT_EQ(roi.origin, (PixelOrigin{10, 10}));
}

TEST(CropToRoi, MarginClampsToSensor) {
  CountFrame f(10, 10);
  f(1, 8) = 1;
  const CountFrame roi = crop_to_roi(f, 4);
  EXPECT_EQ(roi.origin, (PixelOrigin{4, 0}));
  EXPECT_EQ(roi.width(), 6u);
  EXPECT_EQ(roi.height(), 6u);
}

TEST(CropToRoi, AllZeroFrameIsEmptyRoi) {
  try {
    crop_to_roi(CountFrame(5, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyRoi);
  }
}

TEST(CropToRoi, CropThenEmbedRoundTrips) {
  std::mt19937_64 rng(23);
  const SensorGeometry g{64, 48};
  for (int trial = 0; trial < 100; ++trial) {
    CountFrame f = oracle::random_frame(rng, g.height, g.width, 9, 0.02);
    if (f.total() == 0) f(5, 5) = 1;
    const std::uint32_t margin = static_cast<std::uint32_t>(trial % 6);
    const CountFrame roi = crop_to_roi(f, margin);
    EXPECT_EQ(roi.total(), f.total());
    EXPECT_EQ(embed(roi, g), f);
  }
}

TEST(Accumulate, PgmDumpHasHeaderAndPayload) {
  testing::TempDir dir;
  CountFrame f(3, 5);
  f(1, 2) = 70000;
  write_pgm16(f, dir / "f.pgm");
  const std::string bytes = testing::slurp(dir / "f.pgm");
  const std::string header = "P5\n5 3\n65535\n";
  ASSERT_EQ(bytes.size(), header.size() + 3 * 5 * 2);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  const std::size_t at = header.size() + (1 * 5 + 2) * 2;
  EXPECT_EQ(static_cast<unsigned char>(bytes[at]), 0xFF);
  EXPECT_EQ(static_cast<unsigned char>(bytes[at + 1]), 0xFF);
}

}  // namespace
}  // namespace evrange
