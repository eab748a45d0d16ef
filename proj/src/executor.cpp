#include "opfuse/executor.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>

namespace opfuse {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t since_ns(Clock::time_point t0) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

void check_config(const ExecConfig& config) {
    if (config.chunk_rows < 1) fail(Errc::InvalidConfig, "chunk_rows must be >= 1");
    if (!coarsen_block_valid(config.coarsening.block))
        fail(Errc::InvalidConfig, "coarsening block must be one of 1/2/4/8/16");
    if (config.workers < 0) fail(Errc::InvalidConfig, "workers must be >= 0");
}

struct SharedCounters {
    std::atomic<std::uint64_t> elements_read{0};
    std::atomic<std::uint64_t> bytes_read{0};
    std::atomic<std::uint64_t> bytes_written{0};
    std::atomic<std::uint64_t> default_reads{0};

    void add(const IoCounters& io) {
        elements_read.fetch_add(io.elements_read, std::memory_order_relaxed);
        bytes_read.fetch_add(io.bytes_read, std::memory_order_relaxed);
        bytes_written.fetch_add(io.bytes_written, std::memory_order_relaxed);
        default_reads.fetch_add(io.default_reads, std::memory_order_relaxed);
    }

    void publish_and_fill(ExecReport& report) const {
        report.bytes_read += bytes_read.load();
        report.bytes_written += bytes_written.load();
        stats::add_elements_read(elements_read.load());
        if (default_reads.load()) stats::add_default_value_reads(default_reads.load());
    }
};

}  // namespace

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

std::vector<Task> schedule(const Extent3& iter_space, const ExecConfig& config) {
    check_config(config);
    std::vector<Task> tasks;
    const auto chunk = static_cast<std::uint32_t>(config.chunk_rows);
    tasks.reserve(std::size_t(iter_space.batch) * ((iter_space.height + chunk - 1) / chunk));
    for (std::uint32_t z = 0; z < iter_space.batch; ++z)
        for (std::uint32_t y = 0; y < iter_space.height; y += chunk)
            tasks.push_back(Task{z, y, std::min(y + chunk, iter_space.height)});
    return tasks;
}

ExecReport execute_fused(const Pipeline& pipeline, const ExecConfig& config) {
    const std::vector<Task> tasks = schedule(pipeline.iter_space, config);
    const int workers = resolve_workers(config.workers);
    const auto width = std::int64_t(pipeline.iter_space.width);

    ExecReport report;
    report.passes = 1;
    report.points_visited = pipeline.iter_space.points();
    SharedCounters shared;

    const auto t0 = Clock::now();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::int64_t t = 0; t < std::int64_t(tasks.size()); ++t) {
        const Task& task = tasks[std::size_t(t)];
        IoCounters io;
        for (std::uint32_t y = task.y_begin; y < task.y_end; ++y)
            transform_range(pipeline, y, task.z, 0, width, config.coarsening, io);
        shared.add(io);
    }
    report.wall_time_ns = since_ns(t0);
    shared.publish_and_fill(report);
    return report;
}

ExecReport execute_fused_serial(const Pipeline& pipeline, const ExecConfig& config) {
    const std::vector<Task> tasks = schedule(pipeline.iter_space, config);
    const auto width = std::int64_t(pipeline.iter_space.width);

    ExecReport report;
    report.passes = 1;
    report.points_visited = pipeline.iter_space.points();
    IoCounters io;

    const auto t0 = Clock::now();
    for (const Task& task : tasks)
        for (std::uint32_t y = task.y_begin; y < task.y_end; ++y)
            transform_range(pipeline, y, task.z, 0, width, config.coarsening, io);
    report.wall_time_ns = since_ns(t0);

    report.bytes_read = io.bytes_read;
    report.bytes_written = io.bytes_written;
    stats::add_elements_read(io.elements_read);
    if (io.default_reads) stats::add_default_value_reads(io.default_reads);
    return report;
}

namespace {

// Intermediate storage for one unfused pass: one plane per batch index.
std::vector<Plane> make_intermediate(const Extent3& space, ScalarKind kind) {
    std::vector<Plane> planes;
    planes.reserve(space.batch);
    for (std::uint32_t z = 0; z < space.batch; ++z)
        planes.push_back(Plane::alloc_uninitialized(space.width, space.height, kind));
    return planes;
}

void load_block(const Plane& p, std::int64_t x0, int n, std::int64_t y, Element* out,
                IoCounters& io) {
    for (int i = 0; i < n; ++i) out[i] = p.load(std::uint32_t(x0 + i), std::uint32_t(y));
    io.bytes_read += std::uint64_t(n) * bytes_per_element(p.kind());
}

void store_block_to(const Plane& p, std::int64_t x0, int n, std::int64_t y, const Element* v,
                    IoCounters& io) {
    for (int i = 0; i < n; ++i) p.store(std::uint32_t(x0 + i), std::uint32_t(y), v[i]);
    io.bytes_written += std::uint64_t(n) * bytes_per_element(p.kind());
}

}  // namespace

ExecReport execute_unfused(const Pipeline& pipeline, const ExecConfig& config) {
    const std::vector<Task> tasks = schedule(pipeline.iter_space, config);
    const int workers = resolve_workers(config.workers);
    const Extent3 space = pipeline.iter_space;
    const auto width = std::int64_t(space.width);
    const std::size_t n_compute = pipeline.compute.size();

    ExecReport report;
    report.passes = n_compute + 1;
    report.points_visited = space.points() * report.passes;
    SharedCounters shared;

    const int block = config.coarsening.block;
    const auto t0 = Clock::now();

    if (n_compute == 0) {
        // Degenerate chain: a single read -> write sweep, no intermediates.
#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (std::int64_t t = 0; t < std::int64_t(tasks.size()); ++t) {
            const Task& task = tasks[std::size_t(t)];
            IoCounters io;
            Element buf[kMaxCoarsenBlock];
            for (std::uint32_t y = task.y_begin; y < task.y_end; ++y) {
                for (std::int64_t x = 0; x < width; x += block) {
                    const int n = static_cast<int>(std::min<std::int64_t>(block, width - x));
                    read_exec_block(pipeline.read, x, n, y, task.z, buf, io);
                    write_exec_block(pipeline.write, x, n, y, task.z, buf, io);
                }
            }
            shared.add(io);
        }
        report.wall_time_ns = since_ns(t0);
        shared.publish_and_fill(report);
        return report;
    }

    std::vector<Plane> previous;  // intermediate consumed by the current pass
    for (std::size_t pass = 0; pass < n_compute; ++pass) {
        const IOp& op = pipeline.compute[pass];
        std::vector<Plane> next = make_intermediate(space, *op.output_kind());
        report.intermediate_bytes_allocated +=
            space.points() * bytes_per_element(*op.output_kind());

#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (std::int64_t t = 0; t < std::int64_t(tasks.size()); ++t) {
            const Task& task = tasks[std::size_t(t)];
            IoCounters io;
            Element buf[kMaxCoarsenBlock];
            const Plane* src = pass == 0 ? nullptr : &previous[task.z];
            const Plane& dst = next[task.z];
            for (std::uint32_t y = task.y_begin; y < task.y_end; ++y) {
                for (std::int64_t x = 0; x < width; x += block) {
                    const int n = static_cast<int>(std::min<std::int64_t>(block, width - x));
                    if (src) load_block(*src, x, n, y, buf, io);
                    else read_exec_block(pipeline.read, x, n, y, task.z, buf, io);
                    compute_exec_block(op, buf, n);
                    store_block_to(dst, x, n, y, buf, io);
                }
            }
            shared.add(io);
        }
        previous = std::move(next);  // frees the consumed intermediate
    }

    // Final pass: sweep the last intermediate through the write op.
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::int64_t t = 0; t < std::int64_t(tasks.size()); ++t) {
        const Task& task = tasks[std::size_t(t)];
        IoCounters io;
        Element buf[kMaxCoarsenBlock];
        const Plane& src = previous[task.z];
        for (std::uint32_t y = task.y_begin; y < task.y_end; ++y) {
            for (std::int64_t x = 0; x < width; x += block) {
                const int n = static_cast<int>(std::min<std::int64_t>(block, width - x));
                load_block(src, x, n, y, buf, io);
                write_exec_block(pipeline.write, x, n, y, task.z, buf, io);
            }
        }
        shared.add(io);
    }
    report.wall_time_ns = since_ns(t0);
    shared.publish_and_fill(report);
    return report;
}

ExecReport execute_unfused(std::vector<IOp> iops, const ExecConfig& config) {
    return execute_unfused(validate_chain(std::move(iops)), config);
}

std::uint64_t plan_memory_savings(const Pipeline& pipeline) {
    std::uint64_t bytes = 0;
    for (const IOp& op : pipeline.compute)
        bytes += pipeline.iter_space.points() * bytes_per_element(*op.output_kind());
    return bytes;
}

}  // namespace opfuse
