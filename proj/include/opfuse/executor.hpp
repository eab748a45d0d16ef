#pragma once

#include <vector>

#include "opfuse/dpp.hpp"
#include "opfuse/ops.hpp"

namespace opfuse {

struct ExecConfig {
    int workers = 0;  // 0 = hardware default
    CoarseningPlan coarsening{};
    int chunk_rows = 8;
};

// One scheduled unit of work: rows [y_begin, y_end) of batch plane z.
struct Task {
    std::uint32_t z = 0;
    std::uint32_t y_begin = 0;
    std::uint32_t y_end = 0;
};

// Disjoint, exactly-covering partition of the iteration space, z-major so
// batched work parallelizes across planes as well as rows.
std::vector<Task> schedule(const Extent3& iter_space, const ExecConfig& config);

struct ExecReport {
    std::uint64_t wall_time_ns = 0;
    std::uint64_t bytes_read = 0;
    std::uint64_t bytes_written = 0;
    std::uint64_t intermediate_bytes_allocated = 0;
    std::uint64_t passes = 0;
    std::uint64_t points_visited = 0;  // (x,y,z) visits summed over passes
};

int resolve_workers(int workers);

// Single fused sweep: every point visited exactly once, intermediates stay in
// locals, no heap traffic between ops.
ExecReport execute_fused(const Pipeline& pipeline, const ExecConfig& config = {});

// Serial reference executor: same semantics and counters as execute_fused,
// one thread, tasks processed in schedule order. Kept as the ground truth the
// parallel path is tested against.
ExecReport execute_fused_serial(const Pipeline& pipeline, const ExecConfig& config = {});

// Multi-pass baseline: one full sweep per compute op, each materializing an
// intermediate plane batch of that op's output kind (allocated fresh for the
// pass, freed after the consuming pass), then a final write sweep. Output is
// bit-identical to execute_fused on the same chain.
ExecReport execute_unfused(const Pipeline& pipeline, const ExecConfig& config = {});
ExecReport execute_unfused(std::vector<IOp> iops, const ExecConfig& config = {});

// execute_unfused's intermediate_bytes_allocated, computed without executing.
std::uint64_t plan_memory_savings(const Pipeline& pipeline);

}  // namespace opfuse
