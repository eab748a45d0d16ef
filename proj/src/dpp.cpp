#include "opfuse/dpp.hpp"

#include <omp.h>

#include <algorithm>
#include <cassert>

namespace opfuse {

bool coarsen_block_valid(int block) {
    return block == 1 || block == 2 || block == 4 || block == 8 || block == 16;
}

void transform_range(const Pipeline& pipeline, std::int64_t y, std::int64_t z,
                     std::int64_t x_begin, std::int64_t x_end, const CoarseningPlan& plan,
                     IoCounters& io) {
    assert(coarsen_block_valid(plan.block));
    Element buf[kMaxCoarsenBlock];
    std::int64_t x = x_begin;
    const std::int64_t blocked_end = x_begin + (x_end - x_begin) / plan.block * plan.block;
    for (; x < blocked_end; x += plan.block) {
        read_exec_block(pipeline.read, x, plan.block, y, z, buf, io);
        for (const IOp& op : pipeline.compute) compute_exec_block(op, buf, plan.block);
        write_exec_block(pipeline.write, x, plan.block, y, z, buf, io);
    }
    // tail: scalar fallback
    for (; x < x_end; ++x) {
        read_exec_block(pipeline.read, x, 1, y, z, buf, io);
        for (const IOp& op : pipeline.compute) compute_exec_block(op, buf, 1);
        write_exec_block(pipeline.write, x, 1, y, z, buf, io);
    }
}

void transform_range(const Pipeline& pipeline, std::int64_t y, std::int64_t z,
                     std::int64_t x_begin, std::int64_t x_end, const CoarseningPlan& plan) {
    IoCounters io;
    transform_range(pipeline, y, z, x_begin, x_end, plan, io);
    stats::add_elements_read(io.elements_read);
    if (io.default_reads) stats::add_default_value_reads(io.default_reads);
}

void transform_point(const Pipeline& pipeline, const ThreadPoint& thread) {
    transform_range(pipeline, thread.y, thread.z, thread.x, thread.x + 1, CoarseningPlan{1});
}

// --- reduction ------------------------------------------------------------------

Element reducer_identity(Reducer r, ScalarKind kind) {
    const ScalarKind lk = lane_kind(kind);
    const int lanes = lane_count(kind);
    double v = 0.0;
    if (r == Reducer::Max)
        v = lk == ScalarKind::U8 ? 0.0 : -std::numeric_limits<double>::infinity();
    else if (r == Reducer::Min)
        v = lk == ScalarKind::U8 ? 255.0 : std::numeric_limits<double>::infinity();
    Element e;
    for (int l = 0; l < lanes; ++l) {
        switch (lk) {
            case ScalarKind::U8:
                (lanes == 1 ? e.u8 : e.u8v[std::size_t(l)]) = static_cast<std::uint8_t>(v);
                break;
            case ScalarKind::F32:
                (lanes == 1 ? e.f32 : e.f32v[std::size_t(l)]) = static_cast<float>(v);
                break;
            default:
                (lanes == 1 ? e.f64 : e.f64v[std::size_t(l)]) = v;
                break;
        }
    }
    return e;
}

namespace {

template <class T>
T combine_lane(Reducer r, T a, T b) {
    switch (r) {
        case Reducer::Sum:
            if constexpr (std::is_same_v<T, std::uint8_t>) return u8_add(a, b);
            else return a + b;
        case Reducer::Max: return a < b ? b : a;
        case Reducer::Min: return b < a ? b : a;
    }
    return a;
}

}  // namespace

Element combine_elements(Reducer r, ScalarKind kind, const Element& a, const Element& b) {
    Element out;
    switch (kind) {
        case ScalarKind::U8: out.u8 = combine_lane(r, a.u8, b.u8); break;
        case ScalarKind::F32: out.f32 = combine_lane(r, a.f32, b.f32); break;
        case ScalarKind::F64: out.f64 = combine_lane(r, a.f64, b.f64); break;
        case ScalarKind::U8x3:
            for (std::size_t l = 0; l < 3; ++l) out.u8v[l] = combine_lane(r, a.u8v[l], b.u8v[l]);
            break;
        case ScalarKind::F32x3:
            for (std::size_t l = 0; l < 3; ++l) out.f32v[l] = combine_lane(r, a.f32v[l], b.f32v[l]);
            break;
        case ScalarKind::F64x3:
            for (std::size_t l = 0; l < 3; ++l) out.f64v[l] = combine_lane(r, a.f64v[l], b.f64v[l]);
            break;
    }
    return out;
}

namespace {

constexpr int kReduceBlock = 64;

bool is_float_kind(ScalarKind k) { return lane_kind(k) != ScalarKind::U8; }

// Per-worker partial state for one spec. Float sums carry double lanes; all
// other folds carry an element in the value kind.
struct SpecAccum {
    bool double_sum = false;
    std::array<double, 3> d{0.0, 0.0, 0.0};
    Element e;
};

SpecAccum make_accum(Reducer r, ScalarKind kind) {
    SpecAccum a;
    a.double_sum = (r == Reducer::Sum) && is_float_kind(kind);
    if (!a.double_sum) a.e = reducer_identity(r, kind);
    return a;
}

void fold_value(SpecAccum& a, Reducer r, ScalarKind kind, const Element& v) {
    if (a.double_sum) {
        for (int l = 0; l < lane_count(kind); ++l)
            a.d[std::size_t(l)] += lane_as_double(kind, v, l);
    } else {
        a.e = combine_elements(r, kind, a.e, v);
    }
}

void merge_accum(SpecAccum& into, const SpecAccum& from, Reducer r, ScalarKind kind) {
    if (into.double_sum)
        for (std::size_t l = 0; l < 3; ++l) into.d[l] += from.d[l];
    else
        into.e = combine_elements(r, kind, into.e, from.e);
}

Element finish_accum(const SpecAccum& a, ScalarKind kind, const Element& identity) {
    if (!a.double_sum) return a.e;
    Element out;
    const int lanes = lane_count(kind);
    for (int l = 0; l < lanes; ++l) {
        const double total = lane_as_double(kind, identity, l) + a.d[std::size_t(l)];
        if (lane_kind(kind) == ScalarKind::F32)
            (lanes == 1 ? out.f32 : out.f32v[std::size_t(l)]) = static_cast<float>(total);
        else
            (lanes == 1 ? out.f64 : out.f64v[std::size_t(l)]) = total;
    }
    return out;
}

}  // namespace

std::vector<Element> multi_reduce_plane(const IOp& read_iop,
                                        const std::vector<ReduceSpec>& specs, int workers) {
    if (specs.empty()) fail(Errc::EmptyIterSpace, "no reduce specs given");
    const Extent3 space = infer_iter_space(read_iop);
    if (space.points() == 0) fail(Errc::EmptyIterSpace, "empty iteration space");

    const auto n_specs = specs.size();
    std::vector<ScalarKind> value_kind(n_specs);
    std::vector<Element> identity(n_specs);
    for (std::size_t s = 0; s < n_specs; ++s) {
        const ReduceSpec& spec = specs[s];
        if (spec.transform) {
            if (spec.transform->kind() != OpKind::Unary && spec.transform->kind() != OpKind::Binary)
                fail(Errc::InvalidConfig, "reduce transform must be a compute op");
            if (*spec.transform->input_kind() != *read_iop.output_kind())
                fail(Errc::KindMismatch, "reduce transform input kind vs read output");
            value_kind[s] = *spec.transform->output_kind();
        } else {
            value_kind[s] = *read_iop.output_kind();
        }
        identity[s] = spec.identity ? *spec.identity : reducer_identity(spec.combine, value_kind[s]);
    }

    int w_req = workers > 0 ? workers : omp_get_max_threads();
    const std::uint64_t total_rows = std::uint64_t(space.height) * space.batch;
    const int w_count = static_cast<int>(std::min<std::uint64_t>(std::uint64_t(w_req), total_rows));

    // Partials are indexed by worker slot, not by OS thread, so the fold
    // structure depends only on the requested worker count.
    std::vector<std::vector<SpecAccum>> partials(static_cast<std::size_t>(w_count));
    std::vector<std::uint64_t> read_counts(static_cast<std::size_t>(w_count), 0);

#pragma omp parallel for schedule(static, 1) num_threads(w_count)
    for (int w = 0; w < w_count; ++w) {
        auto& mine = partials[static_cast<std::size_t>(w)];
        mine.reserve(n_specs);
        for (std::size_t s = 0; s < n_specs; ++s)
            mine.push_back(make_accum(specs[s].combine, value_kind[s]));

        const std::uint64_t row_begin = total_rows * std::uint64_t(w) / std::uint64_t(w_count);
        const std::uint64_t row_end = total_rows * std::uint64_t(w + 1) / std::uint64_t(w_count);
        IoCounters io;
        Element buf[kReduceBlock];
        Element tbuf[kReduceBlock];
        for (std::uint64_t row = row_begin; row < row_end; ++row) {
            const auto z = std::int64_t(row / space.height);
            const auto y = std::int64_t(row % space.height);
            for (std::uint32_t x0 = 0; x0 < space.width; x0 += kReduceBlock) {
                const int n = static_cast<int>(
                    std::min<std::uint32_t>(kReduceBlock, space.width - x0));
                read_exec_block(read_iop, x0, n, y, z, buf, io);
                for (std::size_t s = 0; s < n_specs; ++s) {
                    const Element* vals = buf;
                    if (specs[s].transform) {
                        std::copy(buf, buf + n, tbuf);
                        compute_exec_block(*specs[s].transform, tbuf, n);
                        vals = tbuf;
                    }
                    for (int i = 0; i < n; ++i)
                        fold_value(mine[s], specs[s].combine, value_kind[s], vals[i]);
                }
            }
        }
        read_counts[static_cast<std::size_t>(w)] = io.elements_read;
    }

    std::uint64_t total_reads = 0;
    for (std::uint64_t c : read_counts) total_reads += c;
    stats::add_elements_read(total_reads);

    // Combine partials in worker-index order.
    std::vector<Element> result(n_specs);
    for (std::size_t s = 0; s < n_specs; ++s) {
        SpecAccum acc = make_accum(specs[s].combine, value_kind[s]);
        if (!acc.double_sum) acc.e = identity[s];
        for (int w = 0; w < w_count; ++w)
            merge_accum(acc, partials[static_cast<std::size_t>(w)][s], specs[s].combine,
                        value_kind[s]);
        result[s] = finish_accum(acc, value_kind[s], identity[s]);
    }
    return result;
}

Element reduce_plane(const IOp& read_iop, const ReduceSpec& spec, int workers) {
    return multi_reduce_plane(read_iop, {spec}, workers).front();
}

}  // namespace opfuse
