#pragma once

#include "opfuse/ops.hpp"

namespace opfuse {

// Typed per-lane constant for the arithmetic ops; the overload picks the kind.
struct Const {
    ScalarKind kind;
    Element value;

    Const(std::uint8_t v) : kind(ScalarKind::U8), value(Element::of_u8(v)) {}
    Const(float v) : kind(ScalarKind::F32), value(Element::of_f32(v)) {}
    Const(double v) : kind(ScalarKind::F64), value(Element::of_f64(v)) {}
    Const(const std::array<std::uint8_t, 3>& v)
        : kind(ScalarKind::U8x3), value(Element::of_u8x3(v[0], v[1], v[2])) {}
    Const(const std::array<float, 3>& v)
        : kind(ScalarKind::F32x3), value(Element::of_f32x3(v[0], v[1], v[2])) {}
    Const(const std::array<double, 3>& v)
        : kind(ScalarKind::F64x3), value(Element::of_f64x3(v[0], v[1], v[2])) {}
};

struct CropRect {
    std::uint32_t x0 = 0, y0 = 0;
    std::uint32_t w = 0, h = 0;
};

// Element-wise arithmetic with per-lane constants. Values stay in the
// arithmetic kind: u8 wraps mod 256, floats follow IEEE; narrowing happens
// only in casts.
IOp op_mul(const Const& c);
IOp op_add(const Const& c);
IOp op_sub(const Const& c);
IOp op_div(const Const& c);  // throws DivByZeroParam if any lane is zero
IOp make_arith(OpId id, ScalarKind kind, const Element& value);

// Lane-count-preserving numeric conversion. Widening is exact; float -> u8
// rounds to nearest-even then clamps to [0,255].
IOp op_cast(ScalarKind from, ScalarKind to);

// Repeats `inner` `repeat` times inside one fused body without storing the
// parameters once per repetition. Nested loops flatten by multiplying counts.
IOp op_static_loop(const IOp& inner, std::uint32_t repeat);

// Identity mapping between thread points and plane elements.
IOp op_read_per_thread(const Plane& source);
IOp op_write_per_thread(const Plane& dest);

// Zero-copy crop read: (x, y) maps to source(x0+x, y0+y).
IOp op_crop(const Plane& source, const CropRect& rect);

// Resize read with half-pixel-center sampling and edge clamping. The second
// overload samples through an upstream crop/read, fusing both into one read.
IOp op_resize(const Plane& source, std::uint32_t target_w, std::uint32_t target_h,
              ResizeMode mode);
IOp op_resize(const IOp& upstream_read, std::uint32_t target_w, std::uint32_t target_h,
              ResizeMode mode);

// SwapRB permutes lanes (2,1,0); ToGrayF32 is dot((0.299,0.587,0.114), lanes).
IOp op_color_convert(ColorOrder order, ScalarKind input_kind);

// Lane i of the packed input lands in dest[i].
IOp op_split_write(const std::array<Plane, 3>& dest);

// Horizontal fusion wrappers: the z coordinate selects per-plane parameters.
// All inner reads must share output kind and extents; planes with
// z >= active_count yield default_value (reads) or skip the write (writes).
IOp op_batch_read(std::vector<IOp> inner_reads, std::uint32_t active_count,
                  const Element& default_value);
IOp op_batch_read(std::vector<IOp> inner_reads);
IOp op_batch_write(std::vector<IOp> inner_writes, std::uint32_t active_count);
IOp op_batch_write(std::vector<IOp> inner_writes);

// Fuses a unary compute op into a sample read so the value is transformed as
// it is loaded; the pipeline then has one fewer compute pass.
IOp fold_unary_into_read(const IOp& read, const IOp& unary);

}  // namespace opfuse
