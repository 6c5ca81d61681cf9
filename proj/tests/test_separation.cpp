#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "evrange/separation.hpp"
#include "oracles.hpp"

namespace evrange {
namespace {

double weighted_y_brute(const CountFrame& f) {
  long double num = 0, den = 0;
  for (std::size_t r = 0; r < f.height(); ++r) {
    for (std::size_t c = 0; c < f.width(); ++c) {
      num += static_cast<long double>(f(r, c)) * (f.origin.y + r);
      den += f(r, c);
    }
  }
  return static_cast<double>(num / den);
}

CountFrame two_blobs(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  CountFrame f(rows, cols, {static_cast<std::uint32_t>(rng() % 500), static_cast<std::uint32_t>(rng() % 300)});
  std::uniform_real_distribution<double> col(4.0, cols - 5.0), amp(5.0, 60.0), sigma(0.8, 2.5);
  std::uniform_real_distribution<double> top(3.0, rows * 0.35), bottom(rows * 0.65, rows - 4.0);
  oracle::add_blob(f, top(rng), col(rng), sigma(rng), amp(rng));
  oracle::add_blob(f, bottom(rng), col(rng), sigma(rng), amp(rng));
  return f;
}

TEST(WeightedY, SingleCell) {
  CountFrame f(10, 4);
  f(5, 2) = 9;
  EXPECT_DOUBLE_EQ(weighted_y(f), 5.0);
}

TEST(WeightedY, HandArithmetic) {
  CountFrame f(6, 3);
  f(2, 0) = 1;
  f(4, 1) = 3;
  EXPECT_DOUBLE_EQ(weighted_y(f), 3.5);
}

TEST(WeightedY, UsesFullSensorRows) {
  CountFrame f(6, 3, {10, 100});
  f(2, 0) = 1;
  f(4, 1) = 3;
  EXPECT_DOUBLE_EQ(weighted_y(f), 103.5);
}

TEST(WeightedY, EqualBlobsAtHundredAndThreeHundred) {
  CountFrame f(400, 40);
  oracle::add_blob(f, 100.0, 20.0, 2.0, 50.0);
  oracle::add_blob(f, 300.0, 20.0, 2.0, 50.0);
  EXPECT_NEAR(weighted_y(f), 200.0, 0.5);
  EXPECT_NEAR(weighted_y(f), weighted_y_brute(f), 1e-9);
}

TEST(WeightedY, AllZeroIsDegenerate) {
  try {
    weighted_y(CountFrame(3, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateInput);
  }
}

TEST(WeightedY, MatchesBruteForceAndStaysWithinNonzeroRows) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const CountFrame f = oracle::random_frame(rng, 1 + rng() % 40, 1 + rng() % 40, 1000, 0.3);
    if (f.total() == 0) continue;
    const double y = weighted_y(f);
    EXPECT_NEAR(y, weighted_y_brute(f), 1e-9);
    std::size_t lo = f.height(), hi = 0;
    for (std::size_t r = 0; r < f.height(); ++r) {
      for (std::size_t c = 0; c < f.width(); ++c) {
        if (f(r, c)) {
          lo = std::min(lo, r);
          hi = std::max(hi, r);
        }
      }
    }
    EXPECT_GE(y, static_cast<double>(lo));
    EXPECT_LE(y, static_cast<double>(hi));
  }
}

TEST(WeightedY, ScalingInvariance) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const CountFrame f = two_blobs(rng, 60, 20);
    const double y = weighted_y(f);
    for (std::uint32_t k : {2u, 7u, 100u}) {
      CountFrame scaled = f;
      for (auto& c : scaled.counts.values()) c *= k;
      EXPECT_EQ(weighted_y(scaled), y);
    }
  }
}

TEST(Split, RowsTenAndThirty) {
  CountFrame f(40, 5);
  f(10, 2) = 6;
  f(30, 2) = 6;
  const SplitFrames s = split(f);
  EXPECT_DOUBLE_EQ(s.boundary_y, 20.0);
  EXPECT_EQ(s.upper(10, 2), 6u);
  EXPECT_EQ(s.upper(30, 2), 0u);
  EXPECT_EQ(s.lower(30, 2), 6u);
  EXPECT_EQ(s.lower(10, 2), 0u);
}

TEST(Split, RowOnIntegerBoundaryGoesToLower) {
  CountFrame f(5, 1);
  f(0, 0) = 1;
  f(2, 0) = 1;
  f(4, 0) = 1;
  const SplitFrames s = split(f);
  EXPECT_DOUBLE_EQ(s.boundary_y, 2.0);
  EXPECT_EQ(s.upper.total(), 1u);
  EXPECT_EQ(s.lower(2, 0), 1u);
}

TEST(Split, SingleRowIsSeparationFailure) {
  CountFrame f(8, 8);
  for (std::size_t c = 0; c < 8; ++c) f(3, c) = static_cast<std::uint32_t>(c + 1);
  try {
    split(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SeparationFailure);
  }
}

TEST(Split, SumOfHalvesIsInputOnRandomFrames) {
  std::mt19937_64 rng(33);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const CountFrame f = oracle::random_frame(rng, 2 + rng() % 30, 1 + rng() % 30, 50, 0.4);
    SplitFrames s;
    try {
      s = split(f);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    for (std::size_t i = 0; i < f.counts.size(); ++i) {
      EXPECT_EQ(s.upper.counts.values()[i] + s.lower.counts.values()[i], f.counts.values()[i]);
    }
  }
  EXPECT_GT(checked, 80);
}

TEST(Split, InvariantsOnTwoBlobFrames) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    const CountFrame f = two_blobs(rng, 80, 24);
    const SplitFrames s = split(f);
    EXPECT_EQ(s.upper.origin, f.origin);
    EXPECT_EQ(s.lower.origin, f.origin);
    EXPECT_EQ(s.upper.height(), f.height());
    EXPECT_EQ(s.lower.width(), f.width());
    EXPECT_EQ(s.upper.total() + s.lower.total(), f.total());
    EXPECT_EQ(s.boundary_y, weighted_y(f));
    EXPECT_LT(weighted_y(s.upper), s.boundary_y);
    EXPECT_LE(s.boundary_y, weighted_y(s.lower));

    const auto first_lower = static_cast<std::size_t>(std::ceil(s.boundary_y - f.origin.y));
    for (std::size_t r = 0; r < f.height(); ++r) {
      for (std::size_t c = 0; c < f.width(); ++c) {
        if (r >= first_lower) EXPECT_EQ(s.upper(r, c), 0u);
        if (r < first_lower) EXPECT_EQ(s.lower(r, c), 0u);
      }
    }
  }
}

}  // namespace
}  // namespace evrange
