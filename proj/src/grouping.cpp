#include "gst/grouping.hpp"

#include <unordered_map>

#include "gst/kernels.hpp"

namespace gst {

const char* kind_name(PatternKind k) {
  switch (k) {
    case PatternKind::Dense: return "dense";
    case PatternKind::Circulant: return "circulant";
    case PatternKind::B4FriendlyB2: return "b4-friendly-b2";
    case PatternKind::B2FriendlyB4: return "b2-friendly-b4";
  }
  return "?";
}

PatternKind kind_from_name(const std::string& name) {
  if (name == "dense") return PatternKind::Dense;
  if (name == "circulant") return PatternKind::Circulant;
  if (name == "b4-friendly-b2") return PatternKind::B4FriendlyB2;
  if (name == "b2-friendly-b4") return PatternKind::B2FriendlyB4;
  throw StructureError("unknown pattern kind: " + name);
}

namespace {

// Canonical key of the group a position belongs to. Ids are assigned by
// first occurrence in a row-major scan, so numbering is deterministic.
uint64_t group_key(PatternKind kind, int block, int cols, int i, int j) {
  switch (kind) {
    case PatternKind::Dense:
      return static_cast<uint64_t>(i) * cols + j;
    case PatternKind::Circulant: {
      uint64_t bi = i / block, bj = j / block;
      uint64_t off = static_cast<uint64_t>(((j - i) % block + block) % block);
      return (bi * (cols / block) + bj) * block + off;
    }
    case PatternKind::B4FriendlyB2: {
      // circulant-4 wrapped diagonal, split into row halves of the 4x4 block
      uint64_t bi = i / 4, bj = j / 4;
      uint64_t off = static_cast<uint64_t>(((j - i) % 4 + 4) % 4);
      uint64_t half = (i % 4) / 2;
      return ((bi * (cols / 4) + bj) * 4 + off) * 2 + half;
    }
    case PatternKind::B2FriendlyB4: {
      // four 2x2 sub-blocks; TL ties with BR and TR with BL, each tied pair
      // sharing one circulant-2 structure
      uint64_t bi = i / 4, bj = j / 4;
      int si = (i % 4) / 2, sj = (j % 4) / 2;
      uint64_t pair = (si == sj) ? 0 : 1;
      uint64_t off = static_cast<uint64_t>(((j - i) % 2 + 2) % 2);
      return ((bi * (cols / 4) + bj) * 2 + pair) * 2 + off;
    }
  }
  return 0;
}

}  // namespace

PatternPtr build_pattern(PatternKind kind, int rows, int cols, int block) {
  if (rows <= 0 || cols <= 0) throw StructureError("build_pattern: non-positive dimensions");
  switch (kind) {
    case PatternKind::Dense:
      if (block != 1) throw StructureError("build_pattern: dense pattern has block size 1");
      break;
    case PatternKind::Circulant:
      if (block < 1) throw StructureError("build_pattern: block size must be >= 1");
      if (rows % block != 0 || cols % block != 0)
        throw StructureError("build_pattern: " + std::to_string(rows) + "x" +
                             std::to_string(cols) + " not divisible by block " +
                             std::to_string(block));
      break;
    case PatternKind::B4FriendlyB2:
      if (block != 2) throw StructureError("build_pattern: b4-friendly-b2 has block size 2");
      if (rows % 4 != 0 || cols % 4 != 0)
        throw StructureError("build_pattern: b4-friendly-b2 needs dims divisible by 4");
      break;
    case PatternKind::B2FriendlyB4:
      if (block != 4) throw StructureError("build_pattern: b2-friendly-b4 has block size 4");
      if (rows % 4 != 0 || cols % 4 != 0)
        throw StructureError("build_pattern: b2-friendly-b4 needs dims divisible by 4");
      break;
  }

  auto p = std::make_shared<GroupPattern>();
  p->rows = rows;
  p->cols = cols;
  p->kind = kind;
  p->block = block;
  p->group_of.resize(p->positions());

  std::unordered_map<uint64_t, uint32_t> id_of;
  id_of.reserve(p->positions());
  uint32_t next_id = 0;
  size_t pos = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j, ++pos) {
      uint64_t key = group_key(kind, block, cols, i, j);
      auto [it, inserted] = id_of.try_emplace(key, next_id);
      if (inserted) ++next_id;
      p->group_of[pos] = it->second;
    }
  }
  p->group_count = next_id;

  // CSR inverse map, members in row-major order
  p->member_off.assign(p->group_count + 1, 0);
  for (uint32_t g : p->group_of) ++p->member_off[g + 1];
  for (uint32_t g = 0; g < p->group_count; ++g) p->member_off[g + 1] += p->member_off[g];
  p->member_pos.resize(p->positions());
  std::vector<uint32_t> cursor(p->member_off.begin(), p->member_off.end() - 1);
  for (size_t q = 0; q < p->group_of.size(); ++q)
    p->member_pos[cursor[p->group_of[q]]++] = static_cast<uint32_t>(q);

  return p;
}

size_t CompressedTensor::alive_groups() const {
  size_t n = 0;
  for (uint8_t m : mask) n += m ? 1 : 0;
  return n;
}

size_t CompressedTensor::pruned_positions() const {
  size_t n = 0;
  for (uint32_t g = 0; g < pattern->group_count; ++g)
    if (!mask[g]) n += pattern->group_size(g);
  return n;
}

double CompressedTensor::sparsity() const {
  return static_cast<double>(pruned_positions()) / static_cast<double>(positions());
}

Matrix realize(const CompressedTensor& ct) {
  Matrix m(ct.rows(), ct.cols());
  kernels::realize(*ct.pattern, ct.values.data(), ct.mask.data(), m.data.data());
  return m;
}

CompressedTensor project(const Matrix& m, PatternPtr p) {
  if (m.rows != p->rows || m.cols != p->cols)
    throw ShapeError("project: matrix is " + std::to_string(m.rows) + "x" +
                     std::to_string(m.cols) + ", pattern wants " + std::to_string(p->rows) +
                     "x" + std::to_string(p->cols));
  CompressedTensor ct(std::move(p));
  kernels::group_means(*ct.pattern, m.data.data(), ct.values.data());
  return ct;
}

bool refines(const GroupPattern& fine, const GroupPattern& coarse) {
  if (fine.rows != coarse.rows || fine.cols != coarse.cols)
    throw StructureError("refines: shape mismatch");
  for (uint32_t g = 0; g < fine.group_count; ++g) {
    uint32_t first = fine.member_pos[fine.member_off[g]];
    uint32_t target = coarse.group_of[first];
    for (uint32_t k = fine.member_off[g] + 1; k < fine.member_off[g + 1]; ++k)
      if (coarse.group_of[fine.member_pos[k]] != target) return false;
  }
  return true;
}

CompressedTensor convert_friendly(const CompressedTensor& ct, PatternPtr target) {
  if (!refines(*target, *ct.pattern))
    throw StructureError(std::string("convert_friendly: ") + kind_name(target->kind) + "(B=" +
                         std::to_string(target->block) + ") does not refine " +
                         kind_name(ct.pattern->kind) + "(B=" +
                         std::to_string(ct.pattern->block) + "); use projection conversion");
  CompressedTensor out(std::move(target));
  for (uint32_t g = 0; g < out.pattern->group_count; ++g) {
    uint32_t src = ct.pattern->group_of[out.pattern->member_pos[out.pattern->member_off[g]]];
    out.values[g] = ct.mask[src] ? ct.values[src] : 0.0f;
    out.mask[g] = ct.mask[src];
  }
  return out;
}

CompressedTensor convert_projection(const CompressedTensor& ct, PatternPtr target) {
  if (ct.rows() != target->rows || ct.cols() != target->cols)
    throw ShapeError("convert_projection: shape mismatch");
  CompressedTensor out = project(realize(ct), std::move(target));
  for (uint32_t g = 0; g < out.pattern->group_count; ++g) {
    for (uint32_t k = out.pattern->member_off[g]; k < out.pattern->member_off[g + 1]; ++k) {
      if (!ct.mask[ct.pattern->group_of[out.pattern->member_pos[k]]]) {
        out.mask[g] = 0;
        out.values[g] = 0.0f;
        break;
      }
    }
  }
  return out;
}

}  // namespace gst
