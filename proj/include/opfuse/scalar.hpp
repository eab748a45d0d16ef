#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string_view>

#include "opfuse/errors.hpp"

namespace opfuse {

// Value-type vocabulary for everything that flows between chained operations.
// Packed x3 kinds are scalar-like: one logical element per thread point, three
// lanes addressed by index 0..2.
enum class ScalarKind : std::uint8_t {
    U8 = 0,
    F32 = 1,
    F64 = 2,
    U8x3 = 3,
    F32x3 = 4,
    F64x3 = 5,
};

inline constexpr int kScalarKindCount = 6;

constexpr std::size_t bytes_per_element(ScalarKind k) {
    switch (k) {
        case ScalarKind::U8: return 1;
        case ScalarKind::F32: return 4;
        case ScalarKind::F64: return 8;
        case ScalarKind::U8x3: return 3;
        case ScalarKind::F32x3: return 12;
        case ScalarKind::F64x3: return 24;
    }
    return 0;
}

constexpr int lane_count(ScalarKind k) {
    switch (k) {
        case ScalarKind::U8:
        case ScalarKind::F32:
        case ScalarKind::F64: return 1;
        default: return 3;
    }
}

constexpr bool is_packed(ScalarKind k) { return lane_count(k) == 3; }

// U8x3 -> U8 etc.; identity for scalar kinds.
constexpr ScalarKind lane_kind(ScalarKind k) {
    switch (k) {
        case ScalarKind::U8x3: return ScalarKind::U8;
        case ScalarKind::F32x3: return ScalarKind::F32;
        case ScalarKind::F64x3: return ScalarKind::F64;
        default: return k;
    }
}

// scalar kind -> packed 3-lane kind with the same lane type
constexpr ScalarKind packed_kind(ScalarKind lane) {
    switch (lane) {
        case ScalarKind::U8: return ScalarKind::U8x3;
        case ScalarKind::F32: return ScalarKind::F32x3;
        case ScalarKind::F64: return ScalarKind::F64x3;
        default: return lane;
    }
}

constexpr std::string_view kind_name(ScalarKind k) {
    switch (k) {
        case ScalarKind::U8: return "u8";
        case ScalarKind::F32: return "f32";
        case ScalarKind::F64: return "f64";
        case ScalarKind::U8x3: return "u8x3";
        case ScalarKind::F32x3: return "f32x3";
        case ScalarKind::F64x3: return "f64x3";
    }
    return "?";
}

// On-disk tag values are part of the tensor file format; keep them stable.
constexpr std::uint32_t kind_tag(ScalarKind k) { return static_cast<std::uint32_t>(k); }

inline ScalarKind kind_from_tag(std::uint32_t tag) {
    if (tag >= static_cast<std::uint32_t>(kScalarKindCount))
        fail(Errc::UnknownKindTag, "kind tag " + std::to_string(tag));
    return static_cast<ScalarKind>(tag);
}

// One element value. Lanes live in the exact precision of the kind that
// produced them; which union member is valid is determined by the ScalarKind
// carried alongside (in the op signature or the plane).
struct Element {
    union {
        std::uint8_t u8;
        float f32;
        double f64;
        std::array<std::uint8_t, 3> u8v;
        std::array<float, 3> f32v;
        std::array<double, 3> f64v;
        std::array<std::byte, 24> raw;
    };

    Element() : raw{} {}

    static Element of_u8(std::uint8_t x) { Element e; e.u8 = x; return e; }
    static Element of_f32(float x) { Element e; e.f32 = x; return e; }
    static Element of_f64(double x) { Element e; e.f64 = x; return e; }
    static Element of_u8x3(std::uint8_t a, std::uint8_t b, std::uint8_t c) {
        Element e; e.u8v = {a, b, c}; return e;
    }
    static Element of_f32x3(float a, float b, float c) {
        Element e; e.f32v = {a, b, c}; return e;
    }
    static Element of_f64x3(double a, double b, double c) {
        Element e; e.f64v = {a, b, c}; return e;
    }
};

static_assert(sizeof(Element) == 24);

// Bitwise equality over the lanes that `kind` defines.
inline bool element_equal(ScalarKind kind, const Element& a, const Element& b) {
    return std::memcmp(a.raw.data(), b.raw.data(), bytes_per_element(kind)) == 0;
}

// Lane access for oracles, reporting and the gray conversion. Not a hot path.
inline double lane_as_double(ScalarKind kind, const Element& e, int lane) {
    switch (kind) {
        case ScalarKind::U8: return e.u8;
        case ScalarKind::F32: return e.f32;
        case ScalarKind::F64: return e.f64;
        case ScalarKind::U8x3: return e.u8v[static_cast<std::size_t>(lane)];
        case ScalarKind::F32x3: return e.f32v[static_cast<std::size_t>(lane)];
        case ScalarKind::F64x3: return e.f64v[static_cast<std::size_t>(lane)];
    }
    return 0.0;
}

// --- shared scalar semantics -------------------------------------------------
// Both the dynamic tag-dispatched path and the statically-typed path go through
// these helpers, so the two composition routes are bit-identical by design.

// u8 arithmetic wraps mod 256; narrowing happens only in casts.
inline std::uint8_t u8_mul(std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(static_cast<unsigned>(a) * static_cast<unsigned>(b));
}
inline std::uint8_t u8_add(std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(static_cast<unsigned>(a) + static_cast<unsigned>(b));
}
inline std::uint8_t u8_sub(std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(static_cast<unsigned>(a) - static_cast<unsigned>(b));
}
inline std::uint8_t u8_div(std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(a / b);  // b != 0 enforced at op construction
}

// Narrowing float -> u8 policy: round to nearest (ties to even, the default FP
// environment), then clamp to [0,255]. NaN maps to 0.
inline std::uint8_t round_clamp_u8(double x) {
    if (std::isnan(x)) return 0;
    double r = std::nearbyint(x);
    if (r < 0.0) return 0;
    if (r > 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

std::size_t element_lanes_copy_size(ScalarKind k);  // = bytes_per_element (sanity alias)

// Lane-count-preserving numeric conversion between any two kinds. Throws
// UnsupportedCast when lane counts differ.
Element cast_element(ScalarKind from, ScalarKind to, const Element& v);

bool cast_supported(ScalarKind from, ScalarKind to);

// Gray conversion weights (dot computed in double, then rounded once to f32).
inline constexpr double kGrayWeightR = 0.299;
inline constexpr double kGrayWeightG = 0.587;
inline constexpr double kGrayWeightB = 0.114;

}  // namespace opfuse
