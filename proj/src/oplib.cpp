#include "opfuse/oplib.hpp"

#include <string>

namespace opfuse {

namespace {

bool any_lane_zero(ScalarKind kind, const Element& v) {
    for (int l = 0; l < lane_count(kind); ++l)
        if (lane_as_double(kind, v, l) == 0.0) return true;
    return false;
}

OpSignature compute_signature(ScalarKind in, ScalarKind out, ParamsSchema schema) {
    OpSignature sig;
    sig.kind = schema == ParamsSchema::None ? OpKind::Unary : OpKind::Binary;
    sig.input_kind = in;
    sig.output_kind = out;
    sig.params = schema;
    return sig;
}

bool is_sample_read(const IOp& op) {
    return op.id() == OpId::PerThreadRead || op.id() == OpId::CropRead ||
           op.id() == OpId::ResizeRead;
}

IOp make_sample_read(OpId id, SampleReadParams p) {
    OpSignature sig;
    sig.kind = OpKind::Read;
    sig.output_kind = p.output_kind();
    sig.params = ParamsSchema::Sample;
    const Extent3 dims{p.out_w, p.out_h, 1};
    return IOp(id, sig, std::move(p), dims);
}

}  // namespace

IOp make_arith(OpId id, ScalarKind kind, const Element& value) {
    if (id == OpId::Div && any_lane_zero(kind, value))
        fail(Errc::DivByZeroParam, "divide constant has a zero lane");
    return IOp(id, compute_signature(kind, kind, ParamsSchema::Arith), ArithParams{value});
}

IOp op_mul(const Const& c) { return make_arith(OpId::Mul, c.kind, c.value); }
IOp op_add(const Const& c) { return make_arith(OpId::Add, c.kind, c.value); }
IOp op_sub(const Const& c) { return make_arith(OpId::Sub, c.kind, c.value); }
IOp op_div(const Const& c) { return make_arith(OpId::Div, c.kind, c.value); }

IOp op_cast(ScalarKind from, ScalarKind to) {
    if (!cast_supported(from, to))
        fail(Errc::UnsupportedCast,
             std::string(kind_name(from)) + " -> " + std::string(kind_name(to)));
    return IOp(OpId::Cast, compute_signature(from, to, ParamsSchema::None), std::monostate{});
}

IOp op_static_loop(const IOp& inner, std::uint32_t repeat) {
    if (repeat < 1) fail(Errc::BadStaticLoop, "repeat must be >= 1");
    if (inner.kind() != OpKind::Unary && inner.kind() != OpKind::Binary)
        fail(Errc::BadStaticLoop, "inner op must be a compute op");
    if (*inner.input_kind() != *inner.output_kind())
        fail(Errc::BadStaticLoop, "inner op must preserve the element kind");

    StaticLoopParams p;
    p.value_kind = *inner.input_kind();
    p.repeat = repeat;
    switch (inner.id()) {
        case OpId::Mul:
        case OpId::Add:
        case OpId::Sub:
        case OpId::Div:
            p.inner_id = inner.id();
            p.inner_value = inner.params<ArithParams>().value;
            break;
        case OpId::SwapRB:
        case OpId::Cast:  // kind-preserving cast is the identity
            p.inner_id = inner.id();
            break;
        case OpId::StaticLoop: {
            // flatten: loop of a loop is one loop with the product count
            const auto& ip = inner.params<StaticLoopParams>();
            const std::uint64_t total = std::uint64_t(ip.repeat) * repeat;
            if (total > 0xffffffffu) fail(Errc::BadStaticLoop, "repeat count overflow");
            p = ip;
            p.repeat = static_cast<std::uint32_t>(total);
            break;
        }
        default:
            fail(Errc::BadStaticLoop,
                 std::string(op_name(inner.id())) + " cannot be repeated in place");
    }
    return IOp(OpId::StaticLoop,
               compute_signature(p.value_kind, p.value_kind, ParamsSchema::StaticLoop), p);
}

IOp op_read_per_thread(const Plane& source) {
    SampleReadParams p;
    p.source = source;
    p.rect_w = p.out_w = source.width();
    p.rect_h = p.out_h = source.height();
    return make_sample_read(OpId::PerThreadRead, std::move(p));
}

IOp op_write_per_thread(const Plane& dest) {
    OpSignature sig;
    sig.kind = OpKind::Write;
    sig.input_kind = dest.kind();
    sig.params = ParamsSchema::Write;
    const Extent3 dims{dest.width(), dest.height(), 1};
    return IOp(OpId::PerThreadWrite, sig, WriteParams{dest}, dims);
}

IOp op_crop(const Plane& source, const CropRect& rect) {
    if (rect.w == 0 || rect.h == 0 || std::uint64_t(rect.x0) + rect.w > source.width() ||
        std::uint64_t(rect.y0) + rect.h > source.height())
        fail(Errc::CropOutOfBounds,
             std::to_string(rect.w) + "x" + std::to_string(rect.h) + "+" +
                 std::to_string(rect.x0) + "+" + std::to_string(rect.y0) + " exceeds " +
                 std::to_string(source.width()) + "x" + std::to_string(source.height()));
    SampleReadParams p;
    p.source = source;
    p.x0 = rect.x0;
    p.y0 = rect.y0;
    p.rect_w = p.out_w = rect.w;
    p.rect_h = p.out_h = rect.h;
    return make_sample_read(OpId::CropRead, std::move(p));
}

IOp op_resize(const Plane& source, std::uint32_t target_w, std::uint32_t target_h,
              ResizeMode mode) {
    return op_resize(op_read_per_thread(source), target_w, target_h, mode);
}

IOp op_resize(const IOp& upstream_read, std::uint32_t target_w, std::uint32_t target_h,
              ResizeMode mode) {
    if (target_w == 0 || target_h == 0)
        fail(Errc::CropOutOfBounds, "resize target extents must be >= 1");
    if (!is_sample_read(upstream_read))
        fail(Errc::UnsupportedKind, "resize can only sample through a crop or plane read");
    const auto& up = upstream_read.params<SampleReadParams>();
    if (!up.post.empty() || up.resizing())
        fail(Errc::UnsupportedKind, "resize upstream must be a plain read or crop");
    SampleReadParams p = up;
    p.out_w = target_w;
    p.out_h = target_h;
    p.mode = mode;
    return make_sample_read(OpId::ResizeRead, std::move(p));
}

IOp op_color_convert(ColorOrder order, ScalarKind input_kind) {
    if (!is_packed(input_kind))
        fail(Errc::UnsupportedKind, "color conversion needs a 3-lane input, got " +
                                        std::string(kind_name(input_kind)));
    if (order == ColorOrder::SwapRB)
        return IOp(OpId::SwapRB, compute_signature(input_kind, input_kind, ParamsSchema::None),
                   std::monostate{});
    return IOp(OpId::ToGray, compute_signature(input_kind, ScalarKind::F32, ParamsSchema::None),
               std::monostate{});
}

IOp op_split_write(const std::array<Plane, 3>& dest) {
    const ScalarKind lk = dest[0].kind();
    if (is_packed(lk)) fail(Errc::UnsupportedKind, "split destinations must be scalar planes");
    for (const Plane& p : dest) {
        if (p.kind() != lk) fail(Errc::UnsupportedKind, "split destinations have mixed kinds");
        if (p.width() != dest[0].width() || p.height() != dest[0].height())
            fail(Errc::PlaneExtentMismatch, "split destinations differ in extents");
    }
    OpSignature sig;
    sig.kind = OpKind::Write;
    sig.input_kind = packed_kind(lk);
    sig.params = ParamsSchema::SplitWrite;
    const Extent3 dims{dest[0].width(), dest[0].height(), 1};
    return IOp(OpId::SplitWrite, sig, SplitWriteParams{dest}, dims);
}

IOp op_batch_read(std::vector<IOp> inner_reads, std::uint32_t active_count,
                  const Element& default_value) {
    if (inner_reads.empty()) fail(Errc::EmptyBatch, "batch read over zero planes");
    const auto n = static_cast<std::uint32_t>(inner_reads.size());
    if (active_count < 1 || active_count > n)
        fail(Errc::EmptyBatch, "active_count " + std::to_string(active_count) +
                                   " outside [1, " + std::to_string(n) + "]");
    BatchReadParams bp;
    bp.per_plane.reserve(inner_reads.size());
    std::optional<ScalarKind> out_kind;
    std::optional<Extent3> out_dims;
    for (std::size_t i = 0; i < inner_reads.size(); ++i) {
        const IOp& r = inner_reads[i];
        if (!is_sample_read(r))
            fail(Errc::InnerKindMismatch,
                 "batch inner #" + std::to_string(i) + " is not a per-plane read");
        const ScalarKind k = *r.output_kind();
        const Extent3 d = *r.dims_hint();
        if (!out_kind) { out_kind = k; out_dims = d; }
        else if (k != *out_kind)
            fail(Errc::InnerKindMismatch, "batch inner #" + std::to_string(i) + " yields " +
                                              std::string(kind_name(k)) + ", expected " +
                                              std::string(kind_name(*out_kind)));
        else if (d != *out_dims)
            fail(Errc::HeterogeneousBatch,
                 "batch inner #" + std::to_string(i) + " extents differ", static_cast<int>(i));
        bp.per_plane.push_back(r.params<SampleReadParams>());
    }
    bp.active_count = active_count;
    bp.default_value = default_value;

    OpSignature sig;
    sig.kind = OpKind::Read;
    sig.output_kind = *out_kind;
    sig.params = ParamsSchema::BatchRead;
    const Extent3 dims{out_dims->width, out_dims->height, n};
    return IOp(OpId::BatchRead, sig, std::move(bp), dims);
}

IOp op_batch_read(std::vector<IOp> inner_reads) {
    const auto n = static_cast<std::uint32_t>(inner_reads.size());
    if (n == 0) fail(Errc::EmptyBatch, "batch read over zero planes");
    return op_batch_read(std::move(inner_reads), n, Element{});
}

IOp op_batch_write(std::vector<IOp> inner_writes, std::uint32_t active_count) {
    if (inner_writes.empty()) fail(Errc::EmptyBatch, "batch write over zero planes");
    const auto n = static_cast<std::uint32_t>(inner_writes.size());
    if (active_count < 1 || active_count > n)
        fail(Errc::EmptyBatch, "active_count " + std::to_string(active_count) +
                                   " outside [1, " + std::to_string(n) + "]");
    BatchWriteParams bp;
    bp.inner_id = inner_writes.front().id();
    bp.active_count = active_count;
    std::optional<ScalarKind> in_kind;
    std::optional<Extent3> dims;
    for (std::size_t i = 0; i < inner_writes.size(); ++i) {
        const IOp& w = inner_writes[i];
        if (w.id() != bp.inner_id ||
            (w.id() != OpId::PerThreadWrite && w.id() != OpId::SplitWrite))
            fail(Errc::InnerKindMismatch,
                 "batch inner #" + std::to_string(i) + " is not a uniform per-plane write");
        if (!in_kind) { in_kind = *w.input_kind(); dims = *w.dims_hint(); }
        else if (*w.input_kind() != *in_kind)
            fail(Errc::InnerKindMismatch, "batch inner #" + std::to_string(i) + " input kind");
        else if (*w.dims_hint() != *dims)
            fail(Errc::HeterogeneousBatch,
                 "batch inner #" + std::to_string(i) + " extents differ", static_cast<int>(i));
        if (w.id() == OpId::PerThreadWrite) bp.planes.push_back(w.params<WriteParams>());
        else bp.splits.push_back(w.params<SplitWriteParams>());
    }

    OpSignature sig;
    sig.kind = OpKind::Write;
    sig.input_kind = *in_kind;
    sig.params = ParamsSchema::BatchWrite;
    const Extent3 space{dims->width, dims->height, n};
    return IOp(OpId::BatchWrite, sig, std::move(bp), space);
}

IOp op_batch_write(std::vector<IOp> inner_writes) {
    const auto n = static_cast<std::uint32_t>(inner_writes.size());
    if (n == 0) fail(Errc::EmptyBatch, "batch write over zero planes");
    return op_batch_write(std::move(inner_writes), n);
}

IOp fold_unary_into_read(const IOp& read, const IOp& unary) {
    if (!is_sample_read(read))
        fail(Errc::UnsupportedKind, "can only fold into a per-plane read");
    if (unary.kind() != OpKind::Unary)
        fail(Errc::UnsupportedKind, "only parameter-free unary ops fold into a read");
    if (*unary.input_kind() != *read.output_kind())
        fail(Errc::KindMismatch, "fold input kind does not match read output");
    SampleReadParams p = read.params<SampleReadParams>();
    p.post.push_back(FoldedUnary{unary.id(), *unary.input_kind(), *unary.output_kind()});
    return make_sample_read(read.id(), std::move(p));
}

}  // namespace opfuse
