#pragma once

// Compile-time composition path: op structs with typed exec functions, chained
// by variadic recursion so the whole body monomorphizes and kind dispatch
// disappears. Semantics are shared with the dynamic IOp path through the
// helpers in scalar.hpp; the two routes are tested bit-identical.

#include <omp.h>

#include <cstring>
#include <type_traits>

#include "opfuse/plane.hpp"
#include "opfuse/scalar.hpp"

namespace opfuse::sc {

template <class T>
struct Vec3 {
    std::array<T, 3> v{};
};

namespace detail {

template <class T> struct kind_of;
template <> struct kind_of<std::uint8_t> { static constexpr ScalarKind value = ScalarKind::U8; };
template <> struct kind_of<float> { static constexpr ScalarKind value = ScalarKind::F32; };
template <> struct kind_of<double> { static constexpr ScalarKind value = ScalarKind::F64; };
template <> struct kind_of<Vec3<std::uint8_t>> { static constexpr ScalarKind value = ScalarKind::U8x3; };
template <> struct kind_of<Vec3<float>> { static constexpr ScalarKind value = ScalarKind::F32x3; };
template <> struct kind_of<Vec3<double>> { static constexpr ScalarKind value = ScalarKind::F64x3; };

inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) { return u8_mul(a, b); }
inline std::uint8_t add(std::uint8_t a, std::uint8_t b) { return u8_add(a, b); }
inline std::uint8_t sub(std::uint8_t a, std::uint8_t b) { return u8_sub(a, b); }
inline std::uint8_t div(std::uint8_t a, std::uint8_t b) { return u8_div(a, b); }
template <class T> T mul(T a, T b) { return a * b; }
template <class T> T add(T a, T b) { return a + b; }
template <class T> T sub(T a, T b) { return a - b; }
template <class T> T div(T a, T b) { return a / b; }

template <class T, class F>
Vec3<T> lanewise(const Vec3<T>& a, const Vec3<T>& b, F f) {
    Vec3<T> r;
    for (std::size_t l = 0; l < 3; ++l) r.v[l] = f(a.v[l], b.v[l]);
    return r;
}
template <class T> Vec3<T> mul(const Vec3<T>& a, const Vec3<T>& b) { return lanewise(a, b, [](T x, T y) { return mul(x, y); }); }
template <class T> Vec3<T> add(const Vec3<T>& a, const Vec3<T>& b) { return lanewise(a, b, [](T x, T y) { return add(x, y); }); }
template <class T> Vec3<T> sub(const Vec3<T>& a, const Vec3<T>& b) { return lanewise(a, b, [](T x, T y) { return sub(x, y); }); }
template <class T> Vec3<T> div(const Vec3<T>& a, const Vec3<T>& b) { return lanewise(a, b, [](T x, T y) { return div(x, y); }); }

// Same narrowing policy as the dynamic cast: through double, round-half-even
// clamp for u8 destinations.
template <class To> To cast_lane(double x);
template <> inline std::uint8_t cast_lane<std::uint8_t>(double x) { return round_clamp_u8(x); }
template <> inline float cast_lane<float>(double x) { return static_cast<float>(x); }
template <> inline double cast_lane<double>(double x) { return x; }

}  // namespace detail

// --- compute op structs --------------------------------------------------------

template <class T>
struct Mul { using In = T; using Out = T; T c{}; Out exec(const In& v) const { return detail::mul(v, c); } };
template <class T>
struct Add { using In = T; using Out = T; T c{}; Out exec(const In& v) const { return detail::add(v, c); } };
template <class T>
struct Sub { using In = T; using Out = T; T c{}; Out exec(const In& v) const { return detail::sub(v, c); } };
template <class T>
struct Div { using In = T; using Out = T; T c{}; Out exec(const In& v) const { return detail::div(v, c); } };

template <class From, class To>
struct Cast {
    using In = From;
    using Out = To;
    Out exec(const In& v) const {
        if constexpr (std::is_arithmetic_v<From>) {
            return detail::cast_lane<To>(static_cast<double>(v));
        } else {
            Out r;
            using LaneTo = std::remove_reference_t<decltype(std::declval<Out&>().v[0])>;
            for (std::size_t l = 0; l < 3; ++l)
                r.v[l] = detail::cast_lane<LaneTo>(static_cast<double>(v.v[l]));
            return r;
        }
    }
};

template <class T>
struct SwapRB {
    using In = Vec3<T>;
    using Out = Vec3<T>;
    Out exec(const In& x) const { return Vec3<T>{{x.v[2], x.v[1], x.v[0]}}; }
};

template <class T>
struct ToGrayF32 {
    using In = Vec3<T>;
    using Out = float;
    Out exec(const In& x) const {
        return static_cast<float>(kGrayWeightR * static_cast<double>(x.v[0]) +
                                  kGrayWeightG * static_cast<double>(x.v[1]) +
                                  kGrayWeightB * static_cast<double>(x.v[2]));
    }
};

// Repeats the inner op N times; N is a template parameter so the repetition
// costs no parameter storage and loops inside the fused body.
template <class Op, unsigned N>
struct StaticLoop {
    static_assert(N >= 1);
    static_assert(std::is_same_v<typename Op::In, typename Op::Out>);
    using In = typename Op::In;
    using Out = typename Op::Out;
    Op inner{};
    Out exec(In v) const {
        for (unsigned i = 0; i < N; ++i) v = inner.exec(v);
        return v;
    }
};

// --- chain application -----------------------------------------------------------

template <class V>
V apply_chain(const V& v) { return v; }

template <class V, class Op, class... Rest>
auto apply_chain(const V& v, const Op& op, const Rest&... rest) {
    static_assert(std::is_same_v<V, typename Op::In>,
                  "adjacent ops in a static chain must agree on the element kind");
    return apply_chain(op.exec(v), rest...);
}

// Typed zero-copy accessor over a Plane; construction checks the kind once,
// the hot loop is free of dispatch.
template <class T>
class PlaneView {
public:
    explicit PlaneView(const Plane& p) : plane_(p) {
        if (p.kind() != detail::kind_of<T>::value)
            fail(Errc::KindMismatch, "typed view over a plane of another kind");
    }

    std::uint32_t width() const { return plane_.width(); }
    std::uint32_t height() const { return plane_.height(); }

    T load(std::uint32_t x, std::uint32_t y) const {
        T t;
        std::memcpy(&t, plane_.row(y) + std::size_t(x) * sizeof(T), sizeof(T));
        return t;
    }
    void store(std::uint32_t x, std::uint32_t y, const T& t) const {
        std::memcpy(plane_.row_mut(y) + std::size_t(x) * sizeof(T), &t, sizeof(T));
    }

private:
    Plane plane_;
};

// Fused transform over typed planes. The per-element chain is fully inlined;
// the y loop parallelizes with OpenMP when workers != 1.
template <class TIn, class TOut, class... Ops>
void transform(const PlaneView<TIn>& src, const PlaneView<TOut>& dst, int workers,
               const Ops&... ops) {
    if (src.width() != dst.width() || src.height() != dst.height())
        fail(Errc::DimsMismatch, "static transform needs matching extents");
    const auto h = std::int64_t(src.height());
    const auto w = std::uint32_t(src.width());
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
    for (std::int64_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x)
            dst.store(x, std::uint32_t(y), apply_chain(src.load(x, std::uint32_t(y)), ops...));
    stats::add_elements_read(std::uint64_t(w) * std::uint64_t(h));
}

template <class TIn, class TOut, class... Ops>
void transform_serial(const PlaneView<TIn>& src, const PlaneView<TOut>& dst, const Ops&... ops) {
    if (src.width() != dst.width() || src.height() != dst.height())
        fail(Errc::DimsMismatch, "static transform needs matching extents");
    for (std::uint32_t y = 0; y < src.height(); ++y)
        for (std::uint32_t x = 0; x < src.width(); ++x)
            dst.store(x, y, apply_chain(src.load(x, y), ops...));
    stats::add_elements_read(std::uint64_t(src.width()) * src.height());
}

}  // namespace opfuse::sc
