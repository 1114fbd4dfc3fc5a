#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gst/numerics.hpp"

namespace gst {

enum class PatternKind : uint8_t {
  Dense = 0,
  Circulant = 1,
  B4FriendlyB2 = 2,  // circulant-4 groups split in half; trains like block size 2
  B2FriendlyB4 = 3,  // four circulant-2 structures tied together; stores like block size 4
};

const char* kind_name(PatternKind k);
PatternKind kind_from_name(const std::string& name);

// A partition of the positions of a rows x cols matrix into shared-parameter
// groups. Group ids follow the row-major order of each group's first member.
// Immutable once built; share freely across threads.
struct GroupPattern {
  int rows = 0;
  int cols = 0;
  PatternKind kind = PatternKind::Dense;
  int block = 1;  // effective block size = group size (1 for dense)
  uint32_t group_count = 0;
  std::vector<uint32_t> group_of;  // position (row-major) -> group id

  // CSR view of the inverse map: members of group g are
  // member_pos[member_off[g] .. member_off[g+1])
  std::vector<uint32_t> member_off;
  std::vector<uint32_t> member_pos;

  size_t positions() const { return static_cast<size_t>(rows) * cols; }
  uint32_t group_size(uint32_t g) const { return member_off[g + 1] - member_off[g]; }
  uint32_t group_at(int i, int j) const { return group_of[static_cast<size_t>(i) * cols + j]; }

  bool same_partition(const GroupPattern& o) const {
    return rows == o.rows && cols == o.cols && group_of == o.group_of;
  }
};

using PatternPtr = std::shared_ptr<const GroupPattern>;

// Builds the requested partition. Non-dense kinds need rows and cols divisible
// by the block size (and by 4 for the friendly kinds); violations raise
// StructureError and the caller leaves the layer dense.
PatternPtr build_pattern(PatternKind kind, int rows, int cols, int block);

// Shared values plus a liveness mask over groups. Pruned groups hold value 0.
struct CompressedTensor {
  PatternPtr pattern;
  std::vector<float> values;  // one per group
  std::vector<uint8_t> mask;  // one per group, 1 = alive

  CompressedTensor() = default;
  explicit CompressedTensor(PatternPtr p)
      : pattern(std::move(p)),
        values(pattern->group_count, 0.0f),
        mask(pattern->group_count, 1) {}

  int rows() const { return pattern->rows; }
  int cols() const { return pattern->cols; }
  size_t positions() const { return pattern->positions(); }
  uint32_t groups() const { return pattern->group_count; }

  size_t alive_groups() const;
  size_t pruned_positions() const;
  // position-level sparsity implied by the mask
  double sparsity() const;
};

// M[i][j] = mask[g] ? values[g] : 0 with g = group_of(i, j)
Matrix realize(const CompressedTensor& ct);

// Group-mean projection: the Frobenius-nearest p-structured matrix to m.
// All groups come back alive.
CompressedTensor project(const Matrix& m, PatternPtr p);

// True iff every group of `fine` lies inside a single group of `coarse`.
bool refines(const GroupPattern& fine, const GroupPattern& coarse);

// Value-preserving block size conversion: each target group inherits the value
// and mask of the unique source group containing it. Requires
// refines(target, source); realized weights are bit-identical.
CompressedTensor convert_friendly(const CompressedTensor& ct, PatternPtr target);

// Projection conversion: project(realize(ct), target). Target groups touching
// any pruned source position come back pruned (value 0).
CompressedTensor convert_projection(const CompressedTensor& ct, PatternPtr target);

}  // namespace gst
