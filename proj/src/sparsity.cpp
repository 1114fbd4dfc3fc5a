#include "gst/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace gst {

SparsityReport measure(const std::vector<LayerView>& layers) {
  SparsityReport rep;
  size_t comp_groups = 0, comp_pruned = 0;
  for (const auto& l : layers) {
    size_t n = l.tensor->positions();
    rep.p_total += n;
    if (!l.compressed) continue;
    size_t pruned = l.tensor->pruned_positions();
    rep.s_layer.push_back(static_cast<double>(pruned) / static_cast<double>(n));
    rep.p_comp += n;
    comp_pruned += pruned;
    comp_groups += l.tensor->groups();
  }
  rep.s_global = rep.p_comp ? static_cast<double>(comp_pruned) / static_cast<double>(rep.p_comp)
                            : 0.0;
  rep.effective_block =
      comp_groups ? static_cast<double>(rep.p_comp) / static_cast<double>(comp_groups) : 1.0;
  return rep;
}

void magnitude_prune_inplace(CompressedTensor& ct, double target) {
  target = std::clamp(target, 0.0, 1.0);
  const GroupPattern& p = *ct.pattern;
  size_t total = p.positions();
  size_t pruned = ct.pruned_positions();
  double need = target * static_cast<double>(total);
  if (static_cast<double>(pruned) >= need) return;

  std::vector<uint32_t> alive;
  alive.reserve(p.group_count);
  for (uint32_t g = 0; g < p.group_count; ++g)
    if (ct.mask[g]) alive.push_back(g);
  std::sort(alive.begin(), alive.end(), [&](uint32_t a, uint32_t b) {
    float ma = std::fabs(ct.values[a]), mb = std::fabs(ct.values[b]);
    return ma != mb ? ma < mb : a < b;
  });

  for (uint32_t g : alive) {
    if (static_cast<double>(pruned) >= need) break;
    ct.mask[g] = 0;
    ct.values[g] = 0.0f;
    pruned += p.group_size(g);
  }
}

CompressedTensor magnitude_prune(const CompressedTensor& ct, double target) {
  CompressedTensor out = ct;
  magnitude_prune_inplace(out, target);
  return out;
}

double cr_ideal(double block, double sparsity, double frac) {
  return ((block + sparsity - 1.0) / block) * frac;
}

double cr_bitmap(double block, double sparsity, double frac) {
  return ((block + sparsity - 1.0) / block - 1.0 / 16.0) * frac;
}

uint64_t stored_bits(const CompressedTensor& ct) {
  return 16ULL * ct.alive_groups() + ct.positions();
}

double cr_exact(const std::vector<LayerView>& layers) {
  uint64_t stored = 0, total = 0;
  for (const auto& l : layers) {
    uint64_t n = l.tensor->positions();
    total += n;
    stored += l.compressed ? stored_bits(*l.tensor) : 16ULL * n;
  }
  if (total == 0) return 0.0;
  return 1.0 - static_cast<double>(stored) / (16.0 * static_cast<double>(total));
}

// ---- binary16 ----

uint16_t float_to_half(float f) {
  uint32_t x;
  std::memcpy(&x, &f, 4);
  uint32_t sign = (x >> 16) & 0x8000u;
  uint32_t mant = x & 0x7FFFFFu;
  uint32_t exp8 = (x >> 23) & 0xFFu;
  if (exp8 == 0xFF) {  // inf / nan
    return static_cast<uint16_t>(sign | 0x7C00u | (mant ? (0x200u | (mant >> 13)) : 0));
  }
  int32_t exp5 = static_cast<int32_t>(exp8) - 127 + 15;
  if (exp5 >= 0x1F) return static_cast<uint16_t>(sign | 0x7C00u);  // overflow -> inf
  if (exp5 <= 0) {
    if (exp5 < -10) return static_cast<uint16_t>(sign);  // underflows past subnormals
    mant |= 0x800000u;
    int shift = 14 - exp5;
    uint32_t sub = mant >> shift;
    uint32_t rem = mant & ((1u << shift) - 1u);
    uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (sub & 1u))) ++sub;
    return static_cast<uint16_t>(sign | sub);
  }
  uint32_t out = sign | (static_cast<uint32_t>(exp5) << 10) | (mant >> 13);
  uint32_t rem = mant & 0x1FFFu;
  if (rem > 0x1000u || (rem == 0x1000u && (out & 1u))) ++out;  // carry may bump the exponent
  return static_cast<uint16_t>(out);
}

float half_to_float(uint16_t h) {
  uint32_t sign = static_cast<uint32_t>(h & 0x8000u) << 16;
  uint32_t exp5 = (h >> 10) & 0x1Fu;
  uint32_t mant = h & 0x3FFu;
  uint32_t x;
  if (exp5 == 0) {
    if (mant == 0) {
      x = sign;
    } else {
      int e = 0;
      while (!(mant & 0x400u)) {
        mant <<= 1;
        ++e;
      }
      mant &= 0x3FFu;
      x = sign | (static_cast<uint32_t>(112 - e) << 23) | (mant << 13);
    }
  } else if (exp5 == 0x1F) {
    x = sign | 0x7F800000u | (mant << 13);
  } else {
    x = sign | ((exp5 + 112) << 23) | (mant << 13);
  }
  float f;
  std::memcpy(&f, &x, 4);
  return f;
}

// ---- bitmap codec ----

namespace {
constexpr size_t kHeaderSize = 16;
constexpr uint16_t kVersion = 1;
const char kMagic[4] = {'G', 'S', 'T', 'B'};

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(static_cast<uint8_t>(v & 0xFF));
  b.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}
uint16_t get_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
}  // namespace

BitmapBlob encode_bitmap(const CompressedTensor& ct) {
  const GroupPattern& p = *ct.pattern;
  BitmapBlob blob;
  auto& b = blob.bytes;
  b.reserve(kHeaderSize + (p.positions() + 7) / 8 + 2 * ct.alive_groups());
  b.insert(b.end(), kMagic, kMagic + 4);
  put_u16(b, kVersion);
  b.push_back(static_cast<uint8_t>(p.kind));
  b.push_back(static_cast<uint8_t>(p.block));
  put_u32(b, static_cast<uint32_t>(p.rows));
  put_u32(b, static_cast<uint32_t>(p.cols));

  size_t n = p.positions();
  size_t bitmap_bytes = (n + 7) / 8;
  size_t bitmap_at = b.size();
  b.resize(b.size() + bitmap_bytes, 0);
  for (size_t pos = 0; pos < n; ++pos)
    if (ct.mask[p.group_of[pos]]) b[bitmap_at + (pos >> 3)] |= static_cast<uint8_t>(1u << (pos & 7));

  for (uint32_t g = 0; g < p.group_count; ++g)
    if (ct.mask[g]) put_u16(b, float_to_half(ct.values[g]));

  blob.payload_bits = n + 16ULL * ct.alive_groups();
  return blob;
}

CompressedTensor decode_bitmap(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < kHeaderSize)
    throw CodecError("bitmap blob truncated inside header (have " +
                         std::to_string(bytes.size()) + " bytes, header needs 16)",
                     static_cast<long long>(bytes.size()));
  for (int i = 0; i < 4; ++i)
    if (bytes[i] != static_cast<uint8_t>(kMagic[i]))
      throw CodecError("bad magic at byte " + std::to_string(i), i);
  uint16_t version = get_u16(&bytes[4]);
  if (version != kVersion)
    throw CodecError("unsupported version " + std::to_string(version) + " at byte 4", 4);
  uint8_t kind_byte = bytes[6];
  if (kind_byte > 3) throw CodecError("unknown pattern kind at byte 6", 6);
  int block = bytes[7];
  int rows = static_cast<int>(get_u32(&bytes[8]));
  int cols = static_cast<int>(get_u32(&bytes[12]));
  if (rows <= 0) throw CodecError("non-positive rows at byte 8", 8);
  if (cols <= 0) throw CodecError("non-positive cols at byte 12", 12);

  PatternPtr pattern;
  try {
    pattern = build_pattern(static_cast<PatternKind>(kind_byte), rows, cols, block);
  } catch (const StructureError& e) {
    throw CodecError(std::string("invalid pattern header: ") + e.what(), 6);
  }

  const GroupPattern& p = *pattern;
  size_t n = p.positions();
  size_t bitmap_bytes = (n + 7) / 8;
  if (bytes.size() < kHeaderSize + bitmap_bytes)
    throw CodecError("bitmap blob truncated inside bitmap at byte " +
                         std::to_string(bytes.size()),
                     static_cast<long long>(bytes.size()));
  const uint8_t* bitmap = &bytes[kHeaderSize];
  auto bit = [&](size_t pos) -> int { return (bitmap[pos >> 3] >> (pos & 7)) & 1; };

  CompressedTensor ct(pattern);
  // first member (lowest row-major position) defines each group's bit
  for (uint32_t g = 0; g < p.group_count; ++g)
    ct.mask[g] = static_cast<uint8_t>(bit(p.member_pos[p.member_off[g]]));
  for (size_t pos = 0; pos < n; ++pos) {
    if (bit(pos) != ct.mask[p.group_of[pos]]) {
      long long byte_off = static_cast<long long>(kHeaderSize + (pos >> 3));
      throw CodecError("inconsistent group bit at byte " + std::to_string(byte_off) + " bit " +
                           std::to_string(pos & 7),
                       byte_off, static_cast<long long>(pos & 7));
    }
  }
  for (size_t pos = n; pos < bitmap_bytes * 8; ++pos) {
    if (bit(pos)) {
      long long byte_off = static_cast<long long>(kHeaderSize + (pos >> 3));
      throw CodecError("nonzero padding bit at byte " + std::to_string(byte_off) + " bit " +
                           std::to_string(pos & 7),
                       byte_off, static_cast<long long>(pos & 7));
    }
  }

  size_t alive = ct.alive_groups();
  size_t expect = kHeaderSize + bitmap_bytes + 2 * alive;
  if (bytes.size() < expect)
    throw CodecError("bitmap blob truncated inside values at byte " +
                         std::to_string(bytes.size()) + " (expected " + std::to_string(expect) +
                         " bytes)",
                     static_cast<long long>(bytes.size()));
  if (bytes.size() > expect)
    throw CodecError("trailing bytes after values at byte " + std::to_string(expect),
                     static_cast<long long>(expect));

  const uint8_t* vp = &bytes[kHeaderSize + bitmap_bytes];
  for (uint32_t g = 0; g < p.group_count; ++g) {
    if (ct.mask[g]) {
      ct.values[g] = half_to_float(get_u16(vp));
      vp += 2;
    }
  }
  return ct;
}

}  // namespace gst
