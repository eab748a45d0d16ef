#include "opfuse/scalar.hpp"

namespace opfuse {

std::size_t element_lanes_copy_size(ScalarKind k) { return bytes_per_element(k); }

bool cast_supported(ScalarKind from, ScalarKind to) {
    return lane_count(from) == lane_count(to);
}

namespace {

// Per-lane numeric conversion in double, with the narrowing policies applied
// once at the destination kind.
double lane_value(ScalarKind from, const Element& v, int lane) {
    return lane_as_double(from, v, lane);
}

void set_lane(ScalarKind to, Element& out, int lane, double x) {
    const auto i = static_cast<std::size_t>(lane);
    switch (to) {
        case ScalarKind::U8: out.u8 = round_clamp_u8(x); break;
        case ScalarKind::F32: out.f32 = static_cast<float>(x); break;
        case ScalarKind::F64: out.f64 = x; break;
        case ScalarKind::U8x3: out.u8v[i] = round_clamp_u8(x); break;
        case ScalarKind::F32x3: out.f32v[i] = static_cast<float>(x); break;
        case ScalarKind::F64x3: out.f64v[i] = x; break;
    }
}

}  // namespace

Element cast_element(ScalarKind from, ScalarKind to, const Element& v) {
    if (!cast_supported(from, to))
        fail(Errc::UnsupportedCast,
             std::string(kind_name(from)) + " -> " + std::string(kind_name(to)));
    if (from == to) return v;
    Element out;
    const int lanes = lane_count(from);
    for (int l = 0; l < lanes; ++l) set_lane(to, out, l, lane_value(from, v, l));
    return out;
}

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::EmptyChain: return "EmptyChain";
        case Errc::FirstNotRead: return "FirstNotRead";
        case Errc::LastNotWrite: return "LastNotWrite";
        case Errc::KindMismatch: return "KindMismatch";
        case Errc::DimsMismatch: return "DimsMismatch";
        case Errc::MissingDims: return "MissingDims";
        case Errc::ChainTooLong: return "ChainTooLong";
        case Errc::DivByZeroParam: return "DivByZeroParam";
        case Errc::UnsupportedCast: return "UnsupportedCast";
        case Errc::UnsupportedKind: return "UnsupportedKind";
        case Errc::CropOutOfBounds: return "CropOutOfBounds";
        case Errc::PlaneExtentMismatch: return "PlaneExtentMismatch";
        case Errc::EmptyBatch: return "EmptyBatch";
        case Errc::InnerKindMismatch: return "InnerKindMismatch";
        case Errc::HeterogeneousBatch: return "HeterogeneousBatch";
        case Errc::BadStaticLoop: return "BadStaticLoop";
        case Errc::BoundsError: return "BoundsError";
        case Errc::CapacityOverflow: return "CapacityOverflow";
        case Errc::BadMagic: return "BadMagic";
        case Errc::UnknownKindTag: return "UnknownKindTag";
        case Errc::TruncatedPayload: return "TruncatedPayload";
        case Errc::IoError: return "IoError";
        case Errc::EmptyIterSpace: return "EmptyIterSpace";
        case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "UnknownError";
}

}  // namespace opfuse
