#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "tubekit/medial.hpp"
#include "tubekit/postprocess.hpp"
#include "tubekit/synthetic.hpp"

using namespace tubekit;

namespace {

BoxDetection box(double x0, double y0, double x1, double y1, double score, std::size_t id) {
  return {{x0, y0, x1, y1}, score, id};
}

const BoxDetection* find_id(const std::vector<BoxDetection>& v, std::size_t id) {
  for (const auto& d : v) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

TubeDetection tube_at(double x, double y, double score, std::size_t id, double len = 2.0, double r = 2.0) {
  return {Tube(PolyChain({{x, y}, {x + len, y}}), r), score, "img", id};
}

std::set<std::size_t> ids(const std::vector<TubeDetection>& v) {
  std::set<std::size_t> s;
  for (const auto& d : v) s.insert(d.id);
  return s;
}

std::vector<TubeDetection> random_tubes(synthetic::Rng& rng, std::size_t n) {
  std::vector<TubeDetection> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Point2> pts{{rng.uniform(0, 60), rng.uniform(0, 60)}};
    pts.push_back(pts[0] + Point2{rng.uniform(5, 20), rng.uniform(-5, 5)});
    // Scores on a coarse grid so that ties occur.
    out.push_back({Tube(PolyChain(pts), rng.uniform(2, 5)), 0.1 * (1 + rng.index(9)), "img", i});
  }
  return out;
}

}  // namespace

TEST(BoxIou, Examples) {
  EXPECT_EQ(box_iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_EQ(box_iou({0, 0, 10, 10}, {20, 0, 30, 10}), 0.0);
  EXPECT_DOUBLE_EQ(box_iou({0, 0, 10, 10}, {5, 0, 15, 10}), 50.0 / 150.0);
  EXPECT_EQ(box_iou({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
}

TEST(BoxDetection, Validation) {
  EXPECT_NO_THROW(validate(box(0, 0, 1, 1, 0.5, 0)));
  EXPECT_THROW(validate(box(1, 0, 1, 1, 0.5, 0)), std::invalid_argument);
  EXPECT_THROW(validate(box(0, 0, 1, 1, 1.5, 0)), std::invalid_argument);
}

TEST(SoftNms, Examples) {
  EXPECT_TRUE(soft_nms({}).empty());

  auto one = soft_nms({box(0, 0, 10, 10, 0.7, 3)});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].score, 0.7);

  auto disjoint = soft_nms({box(0, 0, 10, 10, 0.6, 0), box(20, 0, 30, 10, 0.9, 1)});
  ASSERT_EQ(disjoint.size(), 2u);
  EXPECT_EQ(disjoint[0].id, 1u);
  EXPECT_EQ(disjoint[0].score, 0.9);
  EXPECT_EQ(disjoint[1].score, 0.6);

  auto same = soft_nms({box(0, 0, 10, 10, 0.9, 0), box(0, 0, 10, 10, 0.8, 1)});
  ASSERT_EQ(same.size(), 2u);
  EXPECT_EQ(same[0].score, 0.9);
  EXPECT_NEAR(same[1].score, 0.8 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(same[1].score, 0.1083, 1e-4);
}

TEST(SoftNms, ThresholdIsStrict) {
  // IoU exactly 0.5: no decay.
  auto r = soft_nms({box(0, 0, 10, 10, 0.9, 0), box(0, 0, 10, 5, 0.8, 1)});
  EXPECT_EQ(find_id(r, 1)->score, 0.8);
}

TEST(SoftNms, ThreeBoxTrace) {
  // A and B identical; C covers 60% of both.
  auto r = soft_nms({box(0, 0, 10, 10, 0.9, 0), box(0, 0, 10, 10, 0.8, 1), box(0, 0, 10, 6, 0.7, 2)});
  ASSERT_EQ(r.size(), 3u);
  const double c = 0.7 * std::exp(-0.36 / 0.5);
  const double b = 0.8 * std::exp(-2.0) * std::exp(-0.36 / 0.5);
  EXPECT_EQ(r[0].id, 0u);
  EXPECT_EQ(r[1].id, 2u);
  EXPECT_EQ(r[2].id, 1u);
  EXPECT_NEAR(r[1].score, c, 1e-12);
  EXPECT_NEAR(r[2].score, b, 1e-12);
}

TEST(SoftNms, FloorDrops) {
  SoftNmsConfig cfg;
  cfg.score_floor = 0.2;
  auto r = soft_nms({box(0, 0, 10, 10, 0.9, 0), box(0, 0, 10, 10, 0.8, 1)}, cfg);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, 0u);
}

TEST(SoftNms, Properties) {
  synthetic::Rng rng(91);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<BoxDetection> in;
    for (std::size_t i = 0; i < 12; ++i) {
      const double x = rng.uniform(0, 40), y = rng.uniform(0, 40);
      in.push_back(box(x, y, x + rng.uniform(5, 20), y + rng.uniform(5, 20), 0.05 * (1 + rng.index(19)), i));
    }
    const auto out = soft_nms(in);
    for (const auto& d : out) EXPECT_LE(d.score, in[d.id].score);
    for (std::size_t i = 1; i < out.size(); ++i) {
      EXPECT_TRUE(out[i - 1].score > out[i].score || (out[i - 1].score == out[i].score && out[i - 1].id < out[i].id));
    }
    auto shuffled = in;
    std::reverse(shuffled.begin(), shuffled.end());
    std::swap(shuffled[0], shuffled[5]);
    const auto again = soft_nms(shuffled);
    ASSERT_EQ(again.size(), out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(again[i].id, out[i].id);
      EXPECT_EQ(again[i].score, out[i].score);
    }
  }
}

TEST(SoftNms, IdempotentWithoutRemainingOverlaps) {
  // Once no pair overlaps above the threshold, a second pass changes nothing.
  // (Surviving overlapping pairs are decayed again on every pass.)
  const std::vector<BoxDetection> in{box(0, 0, 10, 10, 0.9, 0), box(6, 0, 16, 10, 0.8, 1), box(30, 30, 40, 40, 0.5, 2),
                                     box(31, 30, 41, 40, 0.4, 3)};
  const auto once = soft_nms(in);
  const auto twice = soft_nms(once);
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    EXPECT_EQ(once[i].id, twice[i].id);
  }
  EXPECT_EQ(find_id(twice, 0)->score, find_id(once, 0)->score);
  EXPECT_EQ(find_id(twice, 1)->score, find_id(once, 1)->score);
  EXPECT_EQ(find_id(twice, 2)->score, find_id(once, 2)->score);
}

TEST(PolygonalNms, Examples) {
  auto same = polygonal_nms({tube_at(0, 0, 0.9, 0), tube_at(0, 0, 0.8, 1)});
  ASSERT_EQ(same.size(), 1u);
  EXPECT_EQ(same[0].id, 0u);

  auto disjoint = polygonal_nms({tube_at(0, 0, 0.9, 0), tube_at(50, 0, 0.8, 1)});
  EXPECT_EQ(ids(disjoint), (std::set<std::size_t>{0, 1}));
}

TEST(PolygonalNms, ChainKeepsOuterTubes) {
  // With A and C disjoint, |A^B| + |C^B| <= |B|, so both links of the chain
  // cannot exceed IoU 0.5; the trace is exercised at a lower threshold.
  const TubeDetection a = tube_at(0, 0, 0.9, 0), b = tube_at(3.2, 0, 0.8, 1), c = tube_at(6.4, 0, 0.7, 2);
  auto env = [](const TubeDetection& d) { return tube_envelope(d.tube, 8); };
  const double thr = 0.2;
  ASSERT_GT(polygon_iou(env(a), env(b)), thr);
  ASSERT_GT(polygon_iou(env(b), env(c)), thr);
  ASSERT_EQ(polygon_iou(env(a), env(c)), 0.0);
  EXPECT_EQ(ids(polygonal_nms({c, a, b}, thr)), (std::set<std::size_t>{0, 2}));
  EXPECT_EQ(ids(polygonal_nms({c, a, b}, 0.5)), (std::set<std::size_t>{0, 1, 2}));
}

TEST(PolygonalNms, Properties) {
  synthetic::Rng rng(92);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_tubes(rng, 15);
    const auto kept = polygonal_nms(in);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      EXPECT_EQ(kept[i].score, in[kept[i].id].score);
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        EXPECT_LE(polygon_iou(tube_envelope(kept[i].tube, 8), tube_envelope(kept[j].tube, 8)), 0.5);
      }
    }
    EXPECT_EQ(ids(polygonal_nms(kept)), ids(kept));
    auto shuffled = in;
    std::rotate(shuffled.begin(), shuffled.begin() + 7, shuffled.end());
    EXPECT_EQ(ids(polygonal_nms(shuffled)), ids(kept));
  }
}

TEST(PolygonalNms, EnvelopeFailureNamesDetection) {
  // A hairpin axis with a radius too large for its inner bend.
  TubeDetection bad{Tube(PolyChain({{0, 0}, {10, 0}, {10, 1}, {0, 1}}), 3.0), 0.5, "img", 42};
  try {
    polygonal_nms({tube_at(0, 20, 0.9, 0), bad});
    FAIL() << "expected NmsError";
  } catch (const NmsError& e) {
    EXPECT_EQ(e.detection_id(), 42u);
  }
}
