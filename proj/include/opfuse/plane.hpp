#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "opfuse/errors.hpp"
#include "opfuse/scalar.hpp"

namespace opfuse {

// Logical (x, y, z) coordinates of one unit of data-parallel work. z indexes
// the batch plane.
struct ThreadPoint {
    std::int64_t x = 0;
    std::int64_t y = 0;
    std::int64_t z = 0;
};

struct Extent3 {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t batch = 1;

    bool operator==(const Extent3&) const = default;
    std::uint64_t points() const {
        return std::uint64_t(width) * height * batch;
    }
};

namespace stats {

// Process-wide instrumentation. Hot paths account in bulk (per task / per
// block), so these stay cheap enough to leave always on.
std::uint64_t live_tensor_bytes();
std::uint64_t total_allocated_bytes();
std::uint64_t elements_read();
std::uint64_t default_value_reads();
std::uint64_t chain_validations();

void add_elements_read(std::uint64_t n);
void add_default_value_reads(std::uint64_t n);
void add_chain_validation();
void add_live_bytes(std::uint64_t n);
void sub_live_bytes(std::uint64_t n);

}  // namespace stats

namespace detail {
struct TensorBuffer;
}

// A strided 2D view over a contiguous buffer of one element kind. Plane is a
// cheap value type with shared ownership of the underlying buffer; like a
// span, a const Plane handle does not make the pixels read-only. Many readers
// or one writer per buffer; concurrent writers must touch disjoint (x, y).
class Plane {
public:
    Plane() = default;

    // Zero-initialized buffer, row_stride == width.
    static Plane alloc(std::uint32_t width, std::uint32_t height, ScalarKind kind);

    // Uninitialized buffer for temporaries that are fully overwritten before
    // any read (the unfused executor's intermediates).
    static Plane alloc_uninitialized(std::uint32_t width, std::uint32_t height, ScalarKind kind);

    // Zero-copy sub-view; the result shares the buffer and keeps it alive.
    Plane view(std::uint32_t x0, std::uint32_t y0, std::uint32_t width, std::uint32_t height) const;

    bool valid() const { return static_cast<bool>(buffer_); }
    std::uint32_t width() const { return width_; }
    std::uint32_t height() const { return height_; }
    std::uint32_t row_stride() const { return row_stride_; }
    ScalarKind kind() const { return kind_; }
    Extent3 extents() const { return {width_, height_, 1}; }
    std::uint64_t payload_bytes() const {
        return std::uint64_t(width_) * height_ * bytes_per_element(kind_);
    }

    // Bounds-checked accessors; get() counts one element read.
    Element get(std::uint32_t x, std::uint32_t y) const;
    void set(std::uint32_t x, std::uint32_t y, const Element& v) const;

    // Unchecked, uncounted access for hot loops (callers account in bulk).
    const std::byte* row(std::uint32_t y) const;
    std::byte* row_mut(std::uint32_t y) const;
    Element load(std::uint32_t x, std::uint32_t y) const;
    void store(std::uint32_t x, std::uint32_t y, const Element& v) const;

    bool same_buffer(const Plane& other) const { return buffer_ == other.buffer_; }

private:
    std::shared_ptr<detail::TensorBuffer> buffer_;
    std::size_t offset_elems_ = 0;  // element offset of (0,0) inside the buffer
    std::uint32_t width_ = 0;
    std::uint32_t height_ = 0;
    std::uint32_t row_stride_ = 0;  // in elements
    ScalarKind kind_ = ScalarKind::U8;
};

// Logical content comparison (bitwise per element, stride-independent).
bool plane_equal(const Plane& a, const Plane& b);

// An ordered list of planes of one kind; the unit the batch operations and the
// tensor file format work with.
class PlaneBatch {
public:
    explicit PlaneBatch(std::vector<Plane> planes);

    const std::vector<Plane>& planes() const { return planes_; }
    const Plane& operator[](std::size_t i) const { return planes_[i]; }
    std::size_t size() const { return planes_.size(); }
    ScalarKind kind() const { return planes_.front().kind(); }

    // Present when every plane shares the same extents.
    std::optional<std::pair<std::uint32_t, std::uint32_t>> uniform_dims() const {
        return uniform_dims_;
    }

private:
    std::vector<Plane> planes_;
    std::optional<std::pair<std::uint32_t, std::uint32_t>> uniform_dims_;
};

// Free-function spellings used throughout tests and tools.
inline Plane plane_alloc(std::uint32_t w, std::uint32_t h, ScalarKind k) {
    return Plane::alloc(w, h, k);
}
inline Element plane_get(const Plane& p, std::uint32_t x, std::uint32_t y) {
    return p.get(x, y);
}

}  // namespace opfuse
