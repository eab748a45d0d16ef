#include "opfuse/ops.hpp"

#include <cassert>
#include <cmath>

namespace opfuse {

const char* op_name(OpId id) {
    switch (id) {
        case OpId::PerThreadRead: return "PerThreadRead";
        case OpId::CropRead: return "CropRead";
        case OpId::ResizeRead: return "ResizeRead";
        case OpId::BatchRead: return "BatchRead";
        case OpId::Cast: return "Cast";
        case OpId::SwapRB: return "SwapRB";
        case OpId::ToGray: return "ToGray";
        case OpId::Mul: return "Mul";
        case OpId::Add: return "Add";
        case OpId::Sub: return "Sub";
        case OpId::Div: return "Div";
        case OpId::StaticLoop: return "StaticLoop";
        case OpId::PerThreadWrite: return "PerThreadWrite";
        case OpId::SplitWrite: return "SplitWrite";
        case OpId::BatchWrite: return "BatchWrite";
    }
    return "?";
}

Extent3 infer_iter_space(const IOp& read_iop) {
    if (read_iop.kind() != OpKind::Read)
        fail(Errc::FirstNotRead, "iteration space comes from a read op");
    if (!read_iop.dims_hint())
        fail(Errc::MissingDims, std::string(op_name(read_iop.id())) + " has no dims hint");
    return *read_iop.dims_hint();
}

Pipeline validate_chain(std::vector<IOp> iops) {
    stats::add_chain_validation();
    if (iops.empty()) fail(Errc::EmptyChain, "chain has no ops");
    if (iops.size() > kMaxChainLength)
        fail(Errc::ChainTooLong, std::to_string(iops.size()) + " ops; limit is " +
                                     std::to_string(kMaxChainLength));
    if (iops.front().kind() != OpKind::Read)
        fail(Errc::FirstNotRead, std::string(op_name(iops.front().id())) + " at position 0", 0);
    const int last = static_cast<int>(iops.size()) - 1;
    if (iops.back().kind() != OpKind::Write)
        fail(Errc::LastNotWrite, std::string(op_name(iops.back().id())) + " at position " +
                                     std::to_string(last),
             last);

    ScalarKind current = *iops.front().output_kind();
    for (int i = 1; i <= last; ++i) {
        const IOp& op = iops[static_cast<std::size_t>(i)];
        if (i != last && (op.kind() == OpKind::Read || op.kind() == OpKind::Write))
            fail(Errc::KindMismatch,
                 std::string("expected a compute op at position ") + std::to_string(i) +
                     ", found " + op_name(op.id()),
                 i);
        const ScalarKind in = *op.input_kind();
        if (in != current)
            fail(Errc::KindMismatch,
                 std::string("position ") + std::to_string(i) + ": expected " +
                     std::string(kind_name(current)) + ", found " + std::string(kind_name(in)),
                 i);
        if (op.output_kind()) current = *op.output_kind();
    }

    const Extent3 space = infer_iter_space(iops.front());
    if (!iops.back().dims_hint())
        fail(Errc::MissingDims, "write op has no dims hint", last);
    if (*iops.back().dims_hint() != space)
        fail(Errc::DimsMismatch, "read space " + std::to_string(space.width) + "x" +
                                     std::to_string(space.height) + "x" +
                                     std::to_string(space.batch) + " vs write hint",
             last);

    IOp read = std::move(iops.front());
    IOp write = std::move(iops.back());
    std::vector<IOp> compute(std::make_move_iterator(iops.begin() + 1),
                             std::make_move_iterator(iops.end() - 1));
    return Pipeline{std::move(read), std::move(compute), std::move(write), space};
}

// --- compute dispatch ---------------------------------------------------------

namespace {

struct MulFn {
    std::uint8_t operator()(std::uint8_t a, std::uint8_t b) const { return u8_mul(a, b); }
    float operator()(float a, float b) const { return a * b; }
    double operator()(double a, double b) const { return a * b; }
};
struct AddFn {
    std::uint8_t operator()(std::uint8_t a, std::uint8_t b) const { return u8_add(a, b); }
    float operator()(float a, float b) const { return a + b; }
    double operator()(double a, double b) const { return a + b; }
};
struct SubFn {
    std::uint8_t operator()(std::uint8_t a, std::uint8_t b) const { return u8_sub(a, b); }
    float operator()(float a, float b) const { return a - b; }
    double operator()(double a, double b) const { return a - b; }
};
struct DivFn {
    std::uint8_t operator()(std::uint8_t a, std::uint8_t b) const { return u8_div(a, b); }
    float operator()(float a, float b) const { return a / b; }
    double operator()(double a, double b) const { return a / b; }
};

// Kind dispatch hoisted out of both the repeat loop and the element loop.
template <class Fn>
void arith_block_repeat(ScalarKind k, const Element& c, Element* v, int n, std::uint32_t reps,
                        Fn fn) {
    switch (k) {
        case ScalarKind::U8: {
            const std::uint8_t cc = c.u8;
            for (std::uint32_t r = 0; r < reps; ++r)
                for (int i = 0; i < n; ++i) v[i].u8 = fn(v[i].u8, cc);
            break;
        }
        case ScalarKind::F32: {
            const float cc = c.f32;
            for (std::uint32_t r = 0; r < reps; ++r)
                for (int i = 0; i < n; ++i) v[i].f32 = fn(v[i].f32, cc);
            break;
        }
        case ScalarKind::F64: {
            const double cc = c.f64;
            for (std::uint32_t r = 0; r < reps; ++r)
                for (int i = 0; i < n; ++i) v[i].f64 = fn(v[i].f64, cc);
            break;
        }
        case ScalarKind::U8x3: {
            const auto cc = c.u8v;
            for (std::uint32_t r = 0; r < reps; ++r)
                for (int i = 0; i < n; ++i)
                    for (int l = 0; l < 3; ++l)
                        v[i].u8v[std::size_t(l)] = fn(v[i].u8v[std::size_t(l)], cc[std::size_t(l)]);
            break;
        }
        case ScalarKind::F32x3: {
            const auto cc = c.f32v;
            for (std::uint32_t r = 0; r < reps; ++r)
                for (int i = 0; i < n; ++i)
                    for (int l = 0; l < 3; ++l)
                        v[i].f32v[std::size_t(l)] =
                            fn(v[i].f32v[std::size_t(l)], cc[std::size_t(l)]);
            break;
        }
        case ScalarKind::F64x3: {
            const auto cc = c.f64v;
            for (std::uint32_t r = 0; r < reps; ++r)
                for (int i = 0; i < n; ++i)
                    for (int l = 0; l < 3; ++l)
                        v[i].f64v[std::size_t(l)] =
                            fn(v[i].f64v[std::size_t(l)], cc[std::size_t(l)]);
            break;
        }
    }
}

void swap_rb_block(ScalarKind k, Element* v, int n, std::uint32_t reps) {
    // Swapping twice is the identity, so only the repeat parity matters.
    if (reps % 2 == 0) return;
    switch (k) {
        case ScalarKind::U8x3:
            for (int i = 0; i < n; ++i) std::swap(v[i].u8v[0], v[i].u8v[2]);
            break;
        case ScalarKind::F32x3:
            for (int i = 0; i < n; ++i) std::swap(v[i].f32v[0], v[i].f32v[2]);
            break;
        case ScalarKind::F64x3:
            for (int i = 0; i < n; ++i) std::swap(v[i].f64v[0], v[i].f64v[2]);
            break;
        default: break;  // rejected at construction
    }
}

void to_gray_block(ScalarKind in, Element* v, int n) {
    for (int i = 0; i < n; ++i) {
        const double g = kGrayWeightR * lane_as_double(in, v[i], 0) +
                         kGrayWeightG * lane_as_double(in, v[i], 1) +
                         kGrayWeightB * lane_as_double(in, v[i], 2);
        v[i].f32 = static_cast<float>(g);
    }
}

void cast_block(ScalarKind from, ScalarKind to, Element* v, int n) {
    for (int i = 0; i < n; ++i) v[i] = cast_element(from, to, v[i]);
}

void unary_block(const FoldedUnary& f, Element* v, int n) {
    switch (f.id) {
        case OpId::Cast: cast_block(f.in, f.out, v, n); break;
        case OpId::SwapRB: swap_rb_block(f.in, v, n, 1); break;
        case OpId::ToGray: to_gray_block(f.in, v, n); break;
        default: assert(false && "not a unary op");
    }
}

void static_loop_block(const StaticLoopParams& p, Element* v, int n) {
    switch (p.inner_id) {
        case OpId::Mul: arith_block_repeat(p.value_kind, p.inner_value, v, n, p.repeat, MulFn{}); break;
        case OpId::Add: arith_block_repeat(p.value_kind, p.inner_value, v, n, p.repeat, AddFn{}); break;
        case OpId::Sub: arith_block_repeat(p.value_kind, p.inner_value, v, n, p.repeat, SubFn{}); break;
        case OpId::Div: arith_block_repeat(p.value_kind, p.inner_value, v, n, p.repeat, DivFn{}); break;
        case OpId::SwapRB: swap_rb_block(p.value_kind, v, n, p.repeat); break;
        case OpId::Cast: break;  // kind-preserving cast: identity
        default: assert(false && "unsupported static-loop inner op");
    }
}

}  // namespace

void compute_exec_block(const IOp& iop, Element* values, int n) {
    const ScalarKind in = *iop.input_kind();
    switch (iop.id()) {
        case OpId::Mul:
            arith_block_repeat(in, iop.params<ArithParams>().value, values, n, 1, MulFn{});
            break;
        case OpId::Add:
            arith_block_repeat(in, iop.params<ArithParams>().value, values, n, 1, AddFn{});
            break;
        case OpId::Sub:
            arith_block_repeat(in, iop.params<ArithParams>().value, values, n, 1, SubFn{});
            break;
        case OpId::Div:
            arith_block_repeat(in, iop.params<ArithParams>().value, values, n, 1, DivFn{});
            break;
        case OpId::Cast: cast_block(in, *iop.output_kind(), values, n); break;
        case OpId::SwapRB: swap_rb_block(in, values, n, 1); break;
        case OpId::ToGray: to_gray_block(in, values, n); break;
        case OpId::StaticLoop: static_loop_block(iop.params<StaticLoopParams>(), values, n); break;
        default: assert(false && "not a compute op");
    }
}

Element compute_exec(const IOp& iop, const Element& input) {
    Element v = input;
    compute_exec_block(iop, &v, 1);
    return v;
}

// --- read dispatch -------------------------------------------------------------

namespace {

inline std::int64_t clamp_i64(std::int64_t v, std::int64_t lo, std::int64_t hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

// Continuous rect coordinate for output index i (half-pixel-center convention).
inline double center_coord(std::int64_t i, std::uint32_t rect, std::uint32_t out) {
    return (static_cast<double>(i) + 0.5) * static_cast<double>(rect) /
               static_cast<double>(out) -
           0.5;
}

Element bilinear_sample(const SampleReadParams& p, std::int64_t x, std::int64_t y) {
    const double cx = center_coord(x, p.rect_w, p.out_w);
    const double cy = center_coord(y, p.rect_h, p.out_h);
    const std::int64_t ix = static_cast<std::int64_t>(std::floor(cx));
    const std::int64_t iy = static_cast<std::int64_t>(std::floor(cy));
    const double fx = cx - static_cast<double>(ix);
    const double fy = cy - static_cast<double>(iy);
    const std::int64_t maxx = std::int64_t(p.rect_w) - 1;
    const std::int64_t maxy = std::int64_t(p.rect_h) - 1;
    const auto sx0 = std::uint32_t(p.x0 + clamp_i64(ix, 0, maxx));
    const auto sx1 = std::uint32_t(p.x0 + clamp_i64(ix + 1, 0, maxx));
    const auto sy0 = std::uint32_t(p.y0 + clamp_i64(iy, 0, maxy));
    const auto sy1 = std::uint32_t(p.y0 + clamp_i64(iy + 1, 0, maxy));

    const Element a = p.source.load(sx0, sy0);
    const Element b = p.source.load(sx1, sy0);
    const Element c = p.source.load(sx0, sy1);
    const Element d = p.source.load(sx1, sy1);

    const ScalarKind k = p.source.kind();
    Element out;
    const int lanes = lane_count(k);
    for (int l = 0; l < lanes; ++l) {
        const double top = lerp(lane_as_double(k, a, l), lane_as_double(k, b, l), fx);
        const double bot = lerp(lane_as_double(k, c, l), lane_as_double(k, d, l), fx);
        const double res = lerp(top, bot, fy);
        switch (lane_kind(k)) {
            case ScalarKind::U8:
                (lanes == 1 ? out.u8 : out.u8v[std::size_t(l)]) = round_clamp_u8(res);
                break;
            case ScalarKind::F32:
                (lanes == 1 ? out.f32 : out.f32v[std::size_t(l)]) = static_cast<float>(res);
                break;
            default:
                (lanes == 1 ? out.f64 : out.f64v[std::size_t(l)]) = res;
                break;
        }
    }
    return out;
}

Element nearest_sample(const SampleReadParams& p, std::int64_t x, std::int64_t y) {
    const auto map = [](std::int64_t i, std::uint32_t rect, std::uint32_t out) {
        const double c = (static_cast<double>(i) + 0.5) * static_cast<double>(rect) /
                         static_cast<double>(out);
        return clamp_i64(static_cast<std::int64_t>(std::floor(c)), 0, std::int64_t(rect) - 1);
    };
    const std::uint32_t sx = p.x0 + std::uint32_t(map(x, p.rect_w, p.out_w));
    const std::uint32_t sy = p.y0 + std::uint32_t(map(y, p.rect_h, p.out_h));
    return p.source.load(sx, sy);
}

// One sampled (pre-fold) value plus how many source elements it touched.
Element sample_raw(const SampleReadParams& p, std::int64_t x, std::int64_t y,
                   std::uint64_t& touched) {
    if (!p.resizing()) {
        touched += 1;
        return p.source.load(std::uint32_t(p.x0 + x), std::uint32_t(p.y0 + y));
    }
    if (p.mode == ResizeMode::Nearest) {
        touched += 1;
        return nearest_sample(p, x, y);
    }
    touched += 4;
    return bilinear_sample(p, x, y);
}

void sample_block(const SampleReadParams& p, std::int64_t x0, int n, std::int64_t y,
                  Element* out, IoCounters& io) {
    std::uint64_t touched = 0;
    if (!p.resizing()) {
        for (int i = 0; i < n; ++i)
            out[i] = p.source.load(std::uint32_t(p.x0 + x0 + i), std::uint32_t(p.y0 + y));
        touched = std::uint64_t(n);
    } else if (p.mode == ResizeMode::Nearest) {
        for (int i = 0; i < n; ++i) out[i] = nearest_sample(p, x0 + i, y);
        touched = std::uint64_t(n);
    } else {
        for (int i = 0; i < n; ++i) out[i] = bilinear_sample(p, x0 + i, y);
        touched = std::uint64_t(n) * 4;
    }
    io.elements_read += touched;
    io.bytes_read += touched * bytes_per_element(p.source.kind());
    for (const FoldedUnary& f : p.post) unary_block(f, out, n);
}

void fill_default(const Element& def, Element* out, int n) {
    for (int i = 0; i < n; ++i) out[i] = def;
}

}  // namespace

Element sample_read_at(const SampleReadParams& p, std::int64_t x, std::int64_t y,
                       std::uint64_t* elements_touched) {
    std::uint64_t touched = 0;
    Element v = sample_raw(p, x, y, touched);
    for (const FoldedUnary& f : p.post) unary_block(f, &v, 1);
    if (elements_touched) *elements_touched += touched;
    return v;
}

void read_exec_block(const IOp& iop, std::int64_t x0, int n, std::int64_t y, std::int64_t z,
                     Element* out, IoCounters& io) {
    switch (iop.id()) {
        case OpId::PerThreadRead:
        case OpId::CropRead:
        case OpId::ResizeRead:
            sample_block(iop.params<SampleReadParams>(), x0, n, y, out, io);
            break;
        case OpId::BatchRead: {
            const auto& bp = iop.params<BatchReadParams>();
            if (z < std::int64_t(bp.active_count)) {
                sample_block(bp.per_plane[std::size_t(z)], x0, n, y, out, io);
            } else {
                fill_default(bp.default_value, out, n);
                io.default_reads += std::uint64_t(n);
            }
            break;
        }
        default: assert(false && "not a read op");
    }
}

Element read_exec(const IOp& iop, const ThreadPoint& thread) {
    Element v;
    IoCounters io;
    read_exec_block(iop, thread.x, 1, thread.y, thread.z, &v, io);
    stats::add_elements_read(io.elements_read);
    if (io.default_reads) stats::add_default_value_reads(io.default_reads);
    return v;
}

// --- write dispatch --------------------------------------------------------------

namespace {

void store_block(const Plane& dest, std::int64_t x0, int n, std::int64_t y, const Element* v,
                 IoCounters& io) {
    for (int i = 0; i < n; ++i) dest.store(std::uint32_t(x0 + i), std::uint32_t(y), v[i]);
    io.bytes_written += std::uint64_t(n) * bytes_per_element(dest.kind());
}

void split_block(const SplitWriteParams& p, std::int64_t x0, int n, std::int64_t y,
                 const Element* v, IoCounters& io) {
    const ScalarKind lk = p.dest[0].kind();
    for (int i = 0; i < n; ++i) {
        const auto x = std::uint32_t(x0 + i);
        const auto yy = std::uint32_t(y);
        switch (lk) {
            case ScalarKind::U8:
                for (int l = 0; l < 3; ++l)
                    p.dest[std::size_t(l)].store(x, yy, Element::of_u8(v[i].u8v[std::size_t(l)]));
                break;
            case ScalarKind::F32:
                for (int l = 0; l < 3; ++l)
                    p.dest[std::size_t(l)].store(x, yy, Element::of_f32(v[i].f32v[std::size_t(l)]));
                break;
            default:
                for (int l = 0; l < 3; ++l)
                    p.dest[std::size_t(l)].store(x, yy, Element::of_f64(v[i].f64v[std::size_t(l)]));
                break;
        }
    }
    io.bytes_written += std::uint64_t(n) * 3 * bytes_per_element(lk);
}

}  // namespace

void write_exec_block(const IOp& iop, std::int64_t x0, int n, std::int64_t y, std::int64_t z,
                      const Element* values, IoCounters& io) {
    switch (iop.id()) {
        case OpId::PerThreadWrite:
            store_block(iop.params<WriteParams>().dest, x0, n, y, values, io);
            break;
        case OpId::SplitWrite:
            split_block(iop.params<SplitWriteParams>(), x0, n, y, values, io);
            break;
        case OpId::BatchWrite: {
            const auto& bp = iop.params<BatchWriteParams>();
            if (z >= std::int64_t(bp.active_count)) return;  // inactive plane: skip the write
            if (bp.inner_id == OpId::PerThreadWrite)
                store_block(bp.planes[std::size_t(z)].dest, x0, n, y, values, io);
            else
                split_block(bp.splits[std::size_t(z)], x0, n, y, values, io);
            break;
        }
        default: assert(false && "not a write op");
    }
}

void write_exec(const IOp& iop, const ThreadPoint& thread, const Element& input) {
    IoCounters io;
    write_exec_block(iop, thread.x, 1, thread.y, thread.z, &input, io);
}

}  // namespace opfuse
