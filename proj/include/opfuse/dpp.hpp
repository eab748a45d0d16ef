#pragma once

#include <vector>

#include "opfuse/ops.hpp"

namespace opfuse {

// How many consecutive x elements one logical task processes per step.
// Results are independent of the block; the remainder of width % block falls
// back to scalar steps.
struct CoarseningPlan {
    int block = 8;  // one of {1, 2, 4, 8, 16}
};

inline constexpr int kMaxCoarsenBlock = 16;

bool coarsen_block_valid(int block);

// Walks one thread point through the whole chain: read, compute ops in order,
// write. Intermediates live only in locals.
void transform_point(const Pipeline& pipeline, const ThreadPoint& thread);

// Same observable result as calling transform_point over [x_begin, x_end);
// reads/writes are batched `plan.block` elements at a time.
void transform_range(const Pipeline& pipeline, std::int64_t y, std::int64_t z,
                     std::int64_t x_begin, std::int64_t x_end, const CoarseningPlan& plan,
                     IoCounters& io);
void transform_range(const Pipeline& pipeline, std::int64_t y, std::int64_t z,
                     std::int64_t x_begin, std::int64_t x_end, const CoarseningPlan& plan);

enum class Reducer : std::uint8_t { Sum, Max, Min };

// One reduction over a read: per-element transform (identity when absent),
// then an associative-commutative fold. Float sums accumulate in double so
// results agree across worker counts far inside the declared tolerance.
struct ReduceSpec {
    std::optional<IOp> transform;
    Reducer combine = Reducer::Sum;
    std::optional<Element> identity;  // defaulted per reducer and kind when absent
};

Element reducer_identity(Reducer r, ScalarKind kind);
Element combine_elements(Reducer r, ScalarKind kind, const Element& a, const Element& b);

// Fold over every (x, y, z) of the read's iteration space. Deterministic
// order: each worker folds a contiguous row range sequentially, partials are
// combined in worker-index order. workers == 0 means the hardware default.
Element reduce_plane(const IOp& read_iop, const ReduceSpec& spec, int workers = 0);

// All specs evaluated in one traversal; the source is read exactly once.
std::vector<Element> multi_reduce_plane(const IOp& read_iop,
                                        const std::vector<ReduceSpec>& specs, int workers = 0);

}  // namespace opfuse
