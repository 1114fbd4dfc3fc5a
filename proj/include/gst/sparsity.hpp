#pragma once

#include <cstdint>
#include <vector>

#include "gst/grouping.hpp"

namespace gst {

// One compressible weight in a model, as seen by the sparsity accounting.
// `compressed` marks layers the grouping/pruning schedule applies to.
struct LayerView {
  const CompressedTensor* tensor = nullptr;
  bool compressed = false;
};

struct SparsityReport {
  std::vector<double> s_layer;  // per compressed layer, mask-level position sparsity
  double s_global = 0.0;        // over all compressed-layer positions
  size_t p_comp = 0;            // positions the schedule applies to
  size_t p_total = 0;           // all weight positions (biases are never compressed
                                // and stay out of the storage accounting)
  // mean group size over compressed layers; the B that Eq-style formulas see
  double effective_block = 1.0;
};

SparsityReport measure(const std::vector<LayerView>& layers);

// Rank groups by |value| ascending (ties by group id) and prune the smallest
// until the pruned-position fraction reaches `target`. Already-pruned groups
// never revive; pruned values become exactly 0.
CompressedTensor magnitude_prune(const CompressedTensor& ct, double target);
// In-place variant used by the training loop.
void magnitude_prune_inplace(CompressedTensor& ct, double target);

// Ideal compression ratio: ((B + S - 1) / B) * frac.
double cr_ideal(double block, double sparsity, double frac);

// With 16-bit values and a 1-bit-per-position bitmap:
// ((B + S - 1) / B - 1/16) * frac. Negative at small B and S is real
// (bitmap overhead exceeds savings) and reported as-is.
double cr_bitmap(double block, double sparsity, double frac);

// Exact bit accounting over a model: 1 - stored_bits / (16 * p_total) where
// stored_bits = sum over compressed layers of (16 * alive groups + positions)
// plus 16 bits per uncompressed position. Headers and padding excluded.
double cr_exact(const std::vector<LayerView>& layers);
// stored_bits for a single layer (the bitmap payload size, in bits).
uint64_t stored_bits(const CompressedTensor& ct);

// IEEE 754 binary16 conversions (round to nearest even).
uint16_t float_to_half(float f);
float half_to_float(uint16_t h);

// Serialized compressed weight:
//   header: magic "GSTB", version u16, kind u8, block u8, rows u32, cols u32
//   bitmap: 1 bit per position, row-major, LSB-first within each byte,
//           zero-padded to a byte boundary; bit = 1 iff the group is alive
//   values: binary16 little-endian, one per alive group in ascending group id
struct BitmapBlob {
  std::vector<uint8_t> bytes;
  // payload bits excluding header and padding: positions + 16 * alive groups
  uint64_t payload_bits = 0;
};

BitmapBlob encode_bitmap(const CompressedTensor& ct);
// Throws CodecError (with the first offending byte/bit) on corrupt input.
CompressedTensor decode_bitmap(const std::vector<uint8_t>& bytes);

}  // namespace gst
