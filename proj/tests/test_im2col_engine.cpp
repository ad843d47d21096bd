#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <random>

#include "spots/im2col.hpp"
#include "spots/reference.hpp"

using namespace spots;

namespace {

LayerSpec conv_spec(int c, int h, int w, int kh, int kw, int stride, int pad) {
  LayerSpec s;
  s.kind = LayerKind::kConv;
  s.channels = c;
  s.height = h;
  s.width = w;
  s.kernel_h = kh;
  s.kernel_w = kw;
  s.filters = 1;
  s.stride = stride;
  s.pad = pad;
  return s;
}

FeatureMap random_map(std::mt19937& rng, int c, int h, int w, double zero_prob = 0) {
  FeatureMap x(c, h, w);
  for (auto& v : x.values) {
    if (zero_prob > 0 && rng() % 1000 < zero_prob * 1000) v = 0;
    else v = static_cast<i16>(rng() % 2001) - 1000;
  }
  return x;
}

std::array<u64, 4> count_sources(const LayerSpec& s, const Im2ColConfig& cfg) {
  std::array<u64, 4> n{0, 0, 0, 0};
  PatchRange range{0, s.patch_count()};
  for (int p = 0; p < s.patch_count(); ++p)
    for (ElemSource e : classify_sources(p, s, cfg, range))
      ++n[static_cast<size_t>(e)];
  return n;
}

}  // namespace

TEST_CASE("config validation") {
  Im2ColConfig cfg;
  cfg.validate();
  cfg.pu_count = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.pu_count = 4;
  cfg.sram_bandwidth = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.sram_bandwidth = 4;
  cfg.ring_bandwidth = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("bypass eligibility needs stride covering both kernel dims") {
  CHECK(bypass_eligible(conv_spec(1, 4, 4, 2, 2, 2, 0)));
  CHECK(bypass_eligible(conv_spec(1, 9, 9, 1, 1, 1, 0)));
  CHECK(bypass_eligible(conv_spec(1, 7, 7, 1, 1, 3, 0)));
  CHECK_FALSE(bypass_eligible(conv_spec(1, 5, 5, 3, 3, 1, 0)));
  CHECK_FALSE(bypass_eligible(conv_spec(1, 6, 4, 3, 2, 2, 0)));  // covers w, not h
}

TEST_CASE("source taxonomy on the 5x5 single-channel 3x3 walk") {
  LayerSpec s = conv_spec(1, 5, 5, 3, 3, 1, 0);
  Im2ColConfig cfg;  // 4 PUs, unbounded buffers
  PatchRange range{0, 9};

  auto srcs = classify_sources(0, s, cfg, range);
  REQUIRE(srcs.size() == 9);
  for (ElemSource e : srcs) CHECK(e == ElemSource::kNew);

  // patch 1 pulls its left two kernel columns over the ring
  srcs = classify_sources(1, s, cfg, range);
  u64 nb = 0, nw = 0;
  for (ElemSource e : srcs) {
    if (e == ElemSource::kNeighbor) ++nb;
    if (e == ElemSource::kNew) ++nw;
  }
  CHECK(nb == 6);
  CHECK(nw == 3);

  // patch 3 (second row, first column) reuses the two top kernel rows
  srcs = classify_sources(3, s, cfg, range);
  u64 rs = 0;
  for (ElemSource e : srcs) if (e == ElemSource::kReserved) ++rs;
  CHECK(rs == 6);

  // patch 4 = (1,1): neighbor beats reserved on the overlap corner
  srcs = classify_sources(4, s, cfg, range);
  nb = rs = nw = 0;
  for (ElemSource e : srcs) {
    if (e == ElemSource::kNeighbor) ++nb;
    if (e == ElemSource::kReserved) ++rs;
    if (e == ElemSource::kNew) ++nw;
  }
  CHECK(nb == 6);
  CHECK(rs == 2);
  CHECK(nw == 1);

  std::array<u64, 4> totals = count_sources(s, cfg);
  CHECK(totals[0] == 25);  // every input element fetched exactly once
  CHECK(totals[1] == 36);  // 6 px>=1 patches, 6 elements each
  CHECK(totals[2] == 20);  // 2 later rows, 10 in-bounds reserve hits each
  CHECK(totals[3] == 0);
  CHECK(totals[0] + totals[1] + totals[2] + totals[3] == 81ULL);
}

TEST_CASE("classification and the moved data agree with the oracle") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int c = 1 + static_cast<int>(rng() % 4);
    const int kh = 1 + static_cast<int>(rng() % 3);
    const int kw = 1 + static_cast<int>(rng() % 3);
    const int pad = static_cast<int>(rng() % 2);
    int stride = 1 + static_cast<int>(rng() % 2);
    const int rows = 1 + static_cast<int>(rng() % 6);
    const int cols = 1 + static_cast<int>(rng() % 6);
    const int h = kh - 2 * pad + stride * (rows - 1);
    const int w = kw - 2 * pad + stride * (cols - 1);
    if (h < 1 || w < 1 || h + 2 * pad < kh || w + 2 * pad < kw) continue;

    LayerSpec s = conv_spec(c, h, w, kh, kw, stride, pad);
    s.validate();
    Im2ColConfig cfg;
    cfg.pu_count = 1 + static_cast<int>(rng() % 5);
    cfg.sram_bandwidth = 1 + static_cast<int>(rng() % 8);
    FeatureMap x = random_map(rng, c, h, w);

    Im2ColResult sim = simulate_im2col(x, s, cfg);
    Mat16 want = im2col_reference(x, s);
    REQUIRE(sim.matrix.rows == want.rows);
    REQUIRE(sim.matrix.cols == want.cols);
    CHECK(sim.matrix.values == want.values);

    // aggregate stats equal the pure classifier's totals
    std::array<u64, 4> totals = count_sources(s, cfg);
    CHECK(sim.stats.sram_reads == totals[0]);
    CHECK(sim.stats.neighbor_forwards == totals[1]);
    CHECK(sim.stats.reserved_hits == totals[2]);
    CHECK(sim.stats.padding_zeros == totals[3]);
    CHECK(sim.stats.elements_emitted ==
          static_cast<u64>(s.patch_rows()) * static_cast<u64>(s.patch_count()));
    CHECK(sim.stats.elements_emitted ==
          totals[0] + totals[1] + totals[2] + totals[3]);
  }
}

TEST_CASE("read-once holds whenever windows tile or overlap") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const int c = 1 + static_cast<int>(rng() % 3);
    const int k = 1 + static_cast<int>(rng() % 4);
    const int stride = 1 + static_cast<int>(rng() % k);  // stride <= kernel
    const int rows = 1 + static_cast<int>(rng() % 5);
    const int h = k + stride * (rows - 1);
    LayerSpec s = conv_spec(c, h, h, k, k, stride, 0);
    s.validate();
    FeatureMap x = random_map(rng, c, h, h);
    Im2ColConfig cfg;
    Im2ColResult sim = bypass_eligible(s) ? simulate_bypass(x, s, cfg)
                                          : simulate_im2col(x, s, cfg);
    CHECK(sim.stats.sram_reads == static_cast<u64>(c) * h * h);
  }
}

TEST_CASE("strided gaps drop reads below the map size, never above") {
  // kernel 1 stride 2: only one input in four is ever touched
  LayerSpec s = conv_spec(2, 5, 5, 1, 1, 2, 0);
  s.validate();
  std::mt19937 rng(4);
  FeatureMap x = random_map(rng, 2, 5, 5);
  Im2ColConfig cfg;
  Im2ColResult sim = simulate_bypass(x, s, cfg);
  CHECK(sim.stats.sram_reads == 2u * 3 * 3);  // distinct covered elements
}

TEST_CASE("single PU 3x3 round costs ten cycles") {
  LayerSpec s = conv_spec(1, 3, 3, 3, 3, 1, 0);  // one patch, all new
  s.validate();
  Im2ColConfig cfg;
  cfg.pu_count = 1;
  cfg.sram_bandwidth = 4;
  FeatureMap x(1, 3, 3);
  for (size_t i = 0; i < x.values.size(); ++i) x.values[i] = static_cast<i16>(i);
  Im2ColResult sim = simulate_im2col(x, s, cfg);
  CHECK(sim.stats.cycles == 10);

  RoundLoad r{9, 9};
  CHECK(estimate_cycles(std::span<const RoundLoad>(&r, 1), cfg) == 10);
}

TEST_CASE("round cost is the max of delivery and assembly plus a hop") {
  Im2ColConfig cfg;
  cfg.sram_bandwidth = 4;
  std::vector<RoundLoad> rounds = {{12, 9}, {6, 9}, {40, 9}};
  // max(3,9) + max(2,9) + max(10,9), one ring hop per round
  CHECK(estimate_cycles(rounds, cfg) == 9 + 9 + 10 + 3);
  cfg.sram_bandwidth = 1;
  CHECK(estimate_cycles(rounds, cfg) == 12 + 9 + 40 + 3);
}

TEST_CASE("bypass streams at sram bandwidth") {
  Im2ColConfig cfg;
  cfg.sram_bandwidth = 4;
  CHECK(estimate_bypass_cycles(16, cfg) == 4);
  CHECK(estimate_bypass_cycles(17, cfg) == 5);
  CHECK(estimate_bypass_cycles(0, cfg) == 0);

  LayerSpec s = conv_spec(1, 4, 4, 2, 2, 2, 0);
  s.validate();
  std::mt19937 rng(2);
  FeatureMap x = random_map(rng, 1, 4, 4);
  Im2ColResult sim = simulate_bypass(x, s, cfg);
  CHECK(sim.stats.cycles == 4);
  CHECK(sim.matrix.values == im2col_reference(x, s).values);
}

TEST_CASE("neighbor reuse shuts off below the per-patch footprint") {
  // 3x3 stride 1, one channel: a left patch carries (3-1)*3 = 6 elements
  LayerSpec s = conv_spec(1, 5, 5, 3, 3, 1, 0);
  s.validate();
  std::mt19937 rng(6);
  FeatureMap x = random_map(rng, 1, 5, 5);

  Im2ColConfig cfg;
  cfg.reserved_buf_cap = 0;  // isolate the neighbor path
  cfg.neighbor_buf_cap = 6;
  Im2ColResult on = simulate_im2col(x, s, cfg);
  CHECK(on.stats.neighbor_forwards == 36);

  cfg.neighbor_buf_cap = 5;
  Im2ColResult off = simulate_im2col(x, s, cfg);
  CHECK(off.stats.neighbor_forwards == 0);
  CHECK(off.stats.sram_reads == on.stats.sram_reads + 36);
  CHECK(off.matrix.values == on.matrix.values);
}

TEST_CASE("reserve reuse shuts off below the per-patch footprint") {
  LayerSpec s = conv_spec(1, 5, 5, 3, 3, 1, 0);
  s.validate();
  std::mt19937 rng(7);
  FeatureMap x = random_map(rng, 1, 5, 5);

  Im2ColConfig cfg;
  cfg.neighbor_buf_cap = 0;  // reserve alone now covers the whole top overlap
  cfg.reserved_buf_cap = 6;  // (3-1)*3*1
  Im2ColResult on = simulate_im2col(x, s, cfg);
  CHECK(on.stats.reserved_hits == 36);  // 6 py>=1 patches, 6 elements each

  cfg.reserved_buf_cap = 5;
  Im2ColResult off = simulate_im2col(x, s, cfg);
  CHECK(off.stats.reserved_hits == 0);
  CHECK(off.stats.sram_reads == on.stats.sram_reads + 36);
  CHECK(off.matrix.values == on.matrix.values);
}

TEST_CASE("disabling all reuse refetches every in-bounds element") {
  LayerSpec s = conv_spec(2, 6, 6, 3, 3, 1, 1);
  s.validate();
  std::mt19937 rng(9);
  FeatureMap x = random_map(rng, 2, 6, 6);
  Im2ColConfig cfg;
  cfg.neighbor_buf_cap = 0;
  cfg.reserved_buf_cap = 0;
  Im2ColResult sim = simulate_im2col(x, s, cfg);
  CHECK(sim.stats.neighbor_forwards == 0);
  CHECK(sim.stats.reserved_hits == 0);
  // every patch element is either a fresh read or padding
  CHECK(sim.stats.sram_reads + sim.stats.padding_zeros == sim.stats.elements_emitted);
  CHECK(sim.matrix.values == im2col_reference(x, s).values);
}

TEST_CASE("reads fall monotonically as the reserve grows") {
  LayerSpec s = conv_spec(2, 7, 7, 3, 3, 1, 0);
  s.validate();
  std::mt19937 rng(10);
  FeatureMap x = random_map(rng, 2, 7, 7);
  u64 prev = ~0ULL;
  const u64 caps[] = {0, 4, 8, 12, 16, 64, kUnboundedCap};
  for (u64 cap : caps) {
    Im2ColConfig cfg;
    cfg.reserved_buf_cap = cap;
    Im2ColResult sim = simulate_im2col(x, s, cfg);
    CHECK(sim.stats.sram_reads <= prev);
    prev = sim.stats.sram_reads;
  }
  CHECK(prev == 2u * 7 * 7);  // unbounded reserve reaches read-once
}

TEST_CASE("padding is classified, not fetched") {
  LayerSpec s = conv_spec(1, 4, 4, 3, 3, 1, 1);
  s.validate();
  std::mt19937 rng(11);
  FeatureMap x = random_map(rng, 1, 4, 4);
  Im2ColConfig cfg;
  Im2ColResult sim = simulate_im2col(x, s, cfg);
  CHECK(sim.stats.sram_reads == 16);
  CHECK(sim.stats.padding_zeros > 0);
  CHECK(sim.matrix.values == im2col_reference(x, s).values);
}

TEST_CASE("pu count never changes the emitted matrix") {
  LayerSpec s = conv_spec(2, 6, 8, 3, 2, 1, 1);
  s.validate();
  std::mt19937 rng(12);
  FeatureMap x = random_map(rng, 2, 6, 8);
  Mat16 want = im2col_reference(x, s);
  for (int pu : {1, 2, 3, 4, 8, 16}) {
    Im2ColConfig cfg;
    cfg.pu_count = pu;
    Im2ColResult sim = simulate_im2col(x, s, cfg);
    CHECK(sim.matrix.values == want.values);
    CHECK(sim.stats.sram_reads == 2u * 6 * 8);
  }
}

TEST_CASE("split ranges cover the patch space without altering columns") {
  LayerSpec s = conv_spec(2, 6, 6, 3, 3, 1, 0);
  s.validate();
  std::mt19937 rng(13);
  FeatureMap x = random_map(rng, 2, 6, 6);
  Mat16 want = im2col_reference(x, s);
  Im2ColConfig cfg;

  const int total = s.patch_count();
  const int mid = total / 2;
  Im2ColUnit a(x, s, cfg, {0, mid}, 4);
  Im2ColUnit b(x, s, cfg, {mid, total}, 4);
  Mat16 got(s.patch_rows(), total);
  for (Im2ColUnit* u : {&a, &b}) {
    while (auto tile = u->next_tile()) {
      for (int j = 0; j < tile->cols.cols; ++j)
        for (int r = 0; r < got.rows; ++r)
          got.at(r, tile->first_patch + j) = tile->cols.at(r, j);
    }
  }
  CHECK(got.values == want.values);
  // the split boundary forfeits some reuse but never re-reads within a range
  CHECK(a.stats().sram_reads + b.stats().sram_reads >= 2u * 6 * 6);
}

TEST_CASE("max pool rides the patch schedule") {
  std::mt19937 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 1 + static_cast<int>(rng() % 3);
    const int k = 1 + static_cast<int>(rng() % 3);
    const int stride = 1 + static_cast<int>(rng() % k);
    const int rows = 1 + static_cast<int>(rng() % 4);
    const int h = k + stride * (rows - 1);
    LayerSpec s = conv_spec(c, h, h, k, k, stride, 0);
    s.kind = rng() % 2 == 0 ? LayerKind::kMaxPool : LayerKind::kAvgPool;
    s.filters = 0;
    s.relu = rng() % 2 == 0;
    s.validate();
    FeatureMap x = random_map(rng, c, h, h);
    Im2ColConfig cfg;
    PoolResult sim = simulate_pool(x, s, cfg);
    FeatureMap want = pool_reference(x, s);
    REQUIRE(sim.output.same_shape(want));
    CHECK(sim.output.values == want.values);
  }
}

TEST_CASE("pool rejects conv specs") {
  LayerSpec s = conv_spec(1, 4, 4, 2, 2, 2, 0);
  Im2ColConfig cfg;
  FeatureMap x(1, 4, 4);
  CHECK_THROWS_AS(simulate_pool(x, s, cfg), std::invalid_argument);
}
