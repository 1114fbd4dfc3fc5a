#include "gst/sparsity.hpp"

#include <cmath>
#include <cstring>

#include "doctest.h"

using namespace gst;

namespace {

CompressedTensor make_singleton(const std::vector<float>& vals) {
  int n = static_cast<int>(vals.size());
  CompressedTensor ct(build_pattern(PatternKind::Dense, 1, n, 1));
  ct.values = vals;
  return ct;
}

CompressedTensor random_tensor(Rng& rng, PatternKind kind, int rows, int cols, int block,
                               double prune_frac = 0.0) {
  auto ct = project(uniform_init(rng, rows, cols, 1.0), build_pattern(kind, rows, cols, block));
  if (prune_frac > 0) magnitude_prune_inplace(ct, prune_frac);
  return ct;
}

}  // namespace

TEST_CASE("magnitude prune ranks by absolute value") {
  auto ct = make_singleton({0.5f, -0.1f, 0.3f, 0.2f});
  auto out = magnitude_prune(ct, 0.5);
  CHECK(out.mask == std::vector<uint8_t>{1, 0, 1, 0});
  CHECK(out.values[1] == 0.0f);
  CHECK(out.values[3] == 0.0f);

  // target below current sparsity is a no-op
  auto again = magnitude_prune(out, 0.25);
  CHECK(again.mask == out.mask);
}

TEST_CASE("magnitude prune at group granularity") {
  Rng rng(3);
  auto ct = random_tensor(rng, PatternKind::Circulant, 2, 4, 2);  // 4 groups of 2
  auto out = magnitude_prune(ct, 0.5);
  CHECK(out.alive_groups() == 2);
  CHECK(out.pruned_positions() == 4);
}

TEST_CASE("pruning exactness: ceil(t*G) groups from an unpruned mask") {
  Rng rng(17);
  for (double t : {0.1, 0.25, 0.33, 0.5, 0.75, 0.9, 1.0}) {
    auto ct = random_tensor(rng, PatternKind::Circulant, 8, 8, 4);  // G = 16
    auto out = magnitude_prune(ct, t);
    size_t pruned_groups = out.groups() - out.alive_groups();
    // smallest k with k*B >= t*positions, computed independently
    size_t expect = 0;
    while (static_cast<double>(expect) * 4 < t * 64.0) ++expect;
    CHECK(pruned_groups == expect);
  }
}

TEST_CASE("mask monotonicity across prune sequences") {
  Rng rng(7);
  auto ct = random_tensor(rng, PatternKind::Circulant, 8, 8, 2);
  std::vector<uint8_t> prev_mask = ct.mask;
  for (double t : {0.1, 0.2, 0.2, 0.5, 0.4, 0.9}) {
    magnitude_prune_inplace(ct, t);
    for (size_t g = 0; g < ct.mask.size(); ++g) CHECK(ct.mask[g] <= prev_mask[g]);
    prev_mask = ct.mask;
  }
}

TEST_CASE("measure") {
  Rng rng(5);
  auto fresh = random_tensor(rng, PatternKind::Circulant, 8, 8, 2);
  auto rep0 = measure({{&fresh, true}});
  CHECK(rep0.s_global == 0.0);
  CHECK(rep0.effective_block == doctest::Approx(2.0));

  auto dead = random_tensor(rng, PatternKind::Circulant, 8, 8, 2, 1.0);
  auto rep = measure({{&dead, true}, {&fresh, true}});
  CHECK(rep.s_global == doctest::Approx(0.5));
  CHECK(rep.s_layer[0] == doctest::Approx(1.0));
  CHECK(rep.s_layer[1] == doctest::Approx(0.0));

  // a 17-256-256-6 stack compressed only in the middle
  auto w1 = random_tensor(rng, PatternKind::Dense, 256, 17, 1);
  auto w2 = random_tensor(rng, PatternKind::Circulant, 256, 256, 4);
  auto w3 = random_tensor(rng, PatternKind::Dense, 6, 256, 1);
  auto hc = measure({{&w1, false}, {&w2, true}, {&w3, false}});
  CHECK(static_cast<double>(hc.p_comp) / hc.p_total == doctest::Approx(0.917).epsilon(1e-3));
}

TEST_CASE("compression ratio formulas") {
  CHECK(cr_ideal(2, 0.5, 1) == doctest::Approx(0.75));
  CHECK(cr_ideal(1, 0, 1) == doctest::Approx(0.0));
  CHECK(cr_ideal(4, 1, 1) == doctest::Approx(1.0));

  CHECK(cr_bitmap(4, 0, 1) == doctest::Approx(0.6875));
  CHECK(cr_bitmap(1, 0, 1) == doctest::Approx(-0.0625));
  CHECK(cr_bitmap(4, 1, 1) == doctest::Approx(0.9375));
}

TEST_CASE("exact accounting vs formula") {
  Rng rng(9);
  // 4x4 circulant-2, half pruned: 16*4 + 16 = 80 of 256 bits
  auto ct = random_tensor(rng, PatternKind::Circulant, 4, 4, 2, 0.5);
  CHECK(stored_bits(ct) == 80);
  CHECK(cr_exact({{&ct, true}}) == doctest::Approx(0.6875));
  CHECK(cr_exact({{&ct, true}}) == doctest::Approx(cr_bitmap(2, 0.5, 1)));

  auto dense = random_tensor(rng, PatternKind::Dense, 4, 4, 1);
  CHECK(cr_exact({{&dense, false}}) == 0.0);

  auto f4 = random_tensor(rng, PatternKind::B2FriendlyB4, 4, 4, 4);
  CHECK(stored_bits(f4) == 80);
  CHECK(cr_exact({{&f4, true}}) == doctest::Approx(cr_bitmap(4, 0, 1)));
}

TEST_CASE("formula/accounting parity on random models") {
  Rng rng(31337);
  struct KindChoice { PatternKind kind; int block; };
  const KindChoice choices[] = {
      {PatternKind::Dense, 1},
      {PatternKind::Circulant, 2},
      {PatternKind::Circulant, 4},
      {PatternKind::B4FriendlyB2, 2},
      {PatternKind::B2FriendlyB4, 4},
  };
  for (int trial = 0; trial < 50; ++trial) {
    auto choice = choices[rng.next_below(5)];
    int nlayers = 1 + static_cast<int>(rng.next_below(3));
    std::vector<CompressedTensor> tensors;
    std::vector<bool> flags;
    for (int l = 0; l < nlayers; ++l) {
      int r = 4 * (1 + static_cast<int>(rng.next_below(4)));
      int c = 4 * (1 + static_cast<int>(rng.next_below(4)));
      tensors.push_back(random_tensor(rng, choice.kind, r, c, choice.block, rng.next_double()));
      flags.push_back(true);
    }
    if (rng.next_below(2)) {  // an uncompressed layer varies frac
      tensors.push_back(random_tensor(rng, PatternKind::Dense, 6, 10, 1));
      flags.push_back(false);
    }
    std::vector<LayerView> views;
    for (size_t i = 0; i < tensors.size(); ++i) views.push_back({&tensors[i], flags[i]});

    auto rep = measure(views);
    double frac = static_cast<double>(rep.p_comp) / static_cast<double>(rep.p_total);
    double formula = cr_bitmap(rep.effective_block, rep.s_global, frac);
    CHECK(std::fabs(cr_exact(views) - formula) <= 1e-12);
  }
}

TEST_CASE("binary16 conversions") {
  CHECK(float_to_half(0.0f) == 0);
  CHECK(float_to_half(-0.0f) == 0x8000);
  CHECK(float_to_half(1.0f) == 0x3C00);
  CHECK(float_to_half(0.1f) == 0x2E66);
  CHECK(half_to_float(0x2E66) == doctest::Approx(0.0999755859375).epsilon(1e-12));
  CHECK(float_to_half(70000.0f) == 0x7C00);  // overflow -> inf
  CHECK(float_to_half(-70000.0f) == 0xFC00);
  CHECK(half_to_float(0x0001) == doctest::Approx(5.960464477539063e-8));

  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    float x = static_cast<float>(rng.uniform(-8, 8));
    float rt = half_to_float(float_to_half(x));
    CHECK(std::fabs(rt - x) <= std::fabs(x) / 1024.0f + 1e-7f);
  }
}

TEST_CASE("bitmap codec roundtrip") {
  Rng rng(123);
  auto ct = random_tensor(rng, PatternKind::Circulant, 8, 8, 4, 0.3);
  auto blob = encode_bitmap(ct);
  auto back = decode_bitmap(blob.bytes);
  CHECK(back.pattern->same_partition(*ct.pattern));
  CHECK(back.mask == ct.mask);
  for (uint32_t g = 0; g < ct.groups(); ++g) {
    float expect = half_to_float(float_to_half(ct.values[g]));
    if (ct.mask[g]) CHECK(back.values[g] == expect);
  }
  CHECK(blob.payload_bits == stored_bits(ct));

  // canonical form: encode . decode . encode is byte-identical
  auto blob2 = encode_bitmap(back);
  CHECK(blob2.bytes == blob.bytes);
}

TEST_CASE("bitmap codec sizes and edge tensors") {
  Rng rng(5);
  auto ct = random_tensor(rng, PatternKind::Circulant, 4, 4, 2, 0.5);
  auto blob = encode_bitmap(ct);
  // header 16, bitmap 2 bytes (16 bits), values 4 * 2 bytes
  CHECK(blob.bytes.size() == 16 + 2 + 8);
  CHECK(blob.payload_bits == 16 + 4 * 16);

  auto dead = random_tensor(rng, PatternKind::Circulant, 4, 4, 2, 1.0);
  auto dead_blob = encode_bitmap(dead);
  CHECK(dead_blob.bytes.size() == 16 + 2);  // no value records
  for (size_t i = 16; i < dead_blob.bytes.size(); ++i) CHECK(dead_blob.bytes[i] == 0);
  auto dead_back = decode_bitmap(dead_blob.bytes);
  CHECK(dead_back.alive_groups() == 0);
}

TEST_CASE("bitmap codec error reporting") {
  Rng rng(6);
  auto blob = encode_bitmap(random_tensor(rng, PatternKind::Circulant, 4, 4, 2, 0.5));

  auto corrupt_magic = blob.bytes;
  corrupt_magic[2] = 'X';
  try {
    decode_bitmap(corrupt_magic);
    FAIL("expected CodecError");
  } catch (const CodecError& e) {
    CHECK(e.offset == 2);
  }

  auto truncated = blob.bytes;
  truncated.resize(20);
  try {
    decode_bitmap(truncated);
    FAIL("expected CodecError");
  } catch (const CodecError& e) {
    CHECK(e.offset == 20);
  }

  // flip position 0's bit only; its group sibling now disagrees
  auto inconsistent = blob.bytes;
  inconsistent[16] ^= 1;
  try {
    decode_bitmap(inconsistent);
    FAIL("expected CodecError");
  } catch (const CodecError& e) {
    CHECK(e.offset >= 16);
    CHECK(e.bit_offset >= 0);
  }
}
