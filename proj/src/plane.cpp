#include "opfuse/plane.hpp"

#include <atomic>
#include <cstring>
#include <limits>

namespace opfuse {

namespace stats {
namespace {
std::atomic<std::uint64_t> g_live_bytes{0};
std::atomic<std::uint64_t> g_total_bytes{0};
std::atomic<std::uint64_t> g_elements_read{0};
std::atomic<std::uint64_t> g_default_reads{0};
std::atomic<std::uint64_t> g_validations{0};
}  // namespace

std::uint64_t live_tensor_bytes() { return g_live_bytes.load(std::memory_order_relaxed); }
std::uint64_t total_allocated_bytes() { return g_total_bytes.load(std::memory_order_relaxed); }
std::uint64_t elements_read() { return g_elements_read.load(std::memory_order_relaxed); }
std::uint64_t default_value_reads() { return g_default_reads.load(std::memory_order_relaxed); }
std::uint64_t chain_validations() { return g_validations.load(std::memory_order_relaxed); }

void add_elements_read(std::uint64_t n) { g_elements_read.fetch_add(n, std::memory_order_relaxed); }
void add_default_value_reads(std::uint64_t n) { g_default_reads.fetch_add(n, std::memory_order_relaxed); }
void add_chain_validation() { g_validations.fetch_add(1, std::memory_order_relaxed); }
void add_live_bytes(std::uint64_t n) {
    g_live_bytes.fetch_add(n, std::memory_order_relaxed);
    g_total_bytes.fetch_add(n, std::memory_order_relaxed);
}
void sub_live_bytes(std::uint64_t n) { g_live_bytes.fetch_sub(n, std::memory_order_relaxed); }

}  // namespace stats

namespace detail {

struct TensorBuffer {
    std::unique_ptr<std::byte[]> bytes;
    std::size_t size = 0;

    TensorBuffer(std::size_t n, bool zero) : bytes(new std::byte[n]), size(n) {
        if (zero) std::memset(bytes.get(), 0, n);
        stats::add_live_bytes(n);
    }
    ~TensorBuffer() { stats::sub_live_bytes(size); }

    TensorBuffer(const TensorBuffer&) = delete;
    TensorBuffer& operator=(const TensorBuffer&) = delete;
};

}  // namespace detail

namespace {

// Largest single allocation we accept; anything bigger is a caller bug.
constexpr std::uint64_t kMaxPlaneBytes = std::uint64_t(1) << 36;  // 64 GiB

std::size_t checked_plane_bytes(std::uint32_t w, std::uint32_t h, ScalarKind kind) {
    if (w == 0 || h == 0) fail(Errc::CapacityOverflow, "plane extents must be >= 1");
    const std::uint64_t total = std::uint64_t(w) * h * bytes_per_element(kind);
    if (total > kMaxPlaneBytes || total > std::numeric_limits<std::size_t>::max())
        fail(Errc::CapacityOverflow,
             "plane of " + std::to_string(w) + "x" + std::to_string(h) + " exceeds limits");
    return static_cast<std::size_t>(total);
}

}  // namespace

Plane Plane::alloc(std::uint32_t width, std::uint32_t height, ScalarKind kind) {
    const std::size_t bytes = checked_plane_bytes(width, height, kind);
    Plane p;
    p.buffer_ = std::make_shared<detail::TensorBuffer>(bytes, /*zero=*/true);
    p.width_ = width;
    p.height_ = height;
    p.row_stride_ = width;
    p.kind_ = kind;
    return p;
}

Plane Plane::alloc_uninitialized(std::uint32_t width, std::uint32_t height, ScalarKind kind) {
    const std::size_t bytes = checked_plane_bytes(width, height, kind);
    Plane p;
    p.buffer_ = std::make_shared<detail::TensorBuffer>(bytes, /*zero=*/false);
    p.width_ = width;
    p.height_ = height;
    p.row_stride_ = width;
    p.kind_ = kind;
    return p;
}

Plane Plane::view(std::uint32_t x0, std::uint32_t y0, std::uint32_t width,
                  std::uint32_t height) const {
    if (width == 0 || height == 0 || x0 + std::uint64_t(width) > width_ ||
        y0 + std::uint64_t(height) > height_)
        fail(Errc::BoundsError, "sub-view outside plane");
    Plane p(*this);
    p.offset_elems_ = offset_elems_ + std::size_t(y0) * row_stride_ + x0;
    p.width_ = width;
    p.height_ = height;
    return p;
}

const std::byte* Plane::row(std::uint32_t y) const {
    return buffer_->bytes.get() +
           (offset_elems_ + std::size_t(y) * row_stride_) * bytes_per_element(kind_);
}

std::byte* Plane::row_mut(std::uint32_t y) const {
    return buffer_->bytes.get() +
           (offset_elems_ + std::size_t(y) * row_stride_) * bytes_per_element(kind_);
}

Element Plane::load(std::uint32_t x, std::uint32_t y) const {
    Element e;
    const std::size_t w = bytes_per_element(kind_);
    std::memcpy(e.raw.data(), row(y) + std::size_t(x) * w, w);
    return e;
}

void Plane::store(std::uint32_t x, std::uint32_t y, const Element& v) const {
    const std::size_t w = bytes_per_element(kind_);
    std::memcpy(row_mut(y) + std::size_t(x) * w, v.raw.data(), w);
}

Element Plane::get(std::uint32_t x, std::uint32_t y) const {
    if (x >= width_ || y >= height_)
        fail(Errc::BoundsError, "get(" + std::to_string(x) + "," + std::to_string(y) + ") on " +
                                    std::to_string(width_) + "x" + std::to_string(height_));
    stats::add_elements_read(1);
    return load(x, y);
}

void Plane::set(std::uint32_t x, std::uint32_t y, const Element& v) const {
    if (x >= width_ || y >= height_)
        fail(Errc::BoundsError, "set(" + std::to_string(x) + "," + std::to_string(y) + ") on " +
                                    std::to_string(width_) + "x" + std::to_string(height_));
    store(x, y, v);
}

bool plane_equal(const Plane& a, const Plane& b) {
    if (a.width() != b.width() || a.height() != b.height() || a.kind() != b.kind()) return false;
    const std::size_t row_bytes = std::size_t(a.width()) * bytes_per_element(a.kind());
    for (std::uint32_t y = 0; y < a.height(); ++y) {
        if (std::memcmp(a.row(y), b.row(y), row_bytes) != 0) return false;
    }
    return true;
}

PlaneBatch::PlaneBatch(std::vector<Plane> planes) : planes_(std::move(planes)) {
    if (planes_.empty()) fail(Errc::EmptyBatch, "plane batch must be non-empty");
    const ScalarKind k = planes_.front().kind();
    bool uniform = true;
    for (const Plane& p : planes_) {
        if (p.kind() != k)
            fail(Errc::InnerKindMismatch, "mixed element kinds in one batch");
        uniform = uniform && p.width() == planes_.front().width() &&
                  p.height() == planes_.front().height();
    }
    if (uniform)
        uniform_dims_ = {planes_.front().width(), planes_.front().height()};
}

}  // namespace opfuse
