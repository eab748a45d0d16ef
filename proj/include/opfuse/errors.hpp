#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace opfuse {

enum class Errc {
    // chain validation
    EmptyChain,
    FirstNotRead,
    LastNotWrite,
    KindMismatch,
    DimsMismatch,
    MissingDims,
    ChainTooLong,
    // op construction
    DivByZeroParam,
    UnsupportedCast,
    UnsupportedKind,
    CropOutOfBounds,
    PlaneExtentMismatch,
    EmptyBatch,
    InnerKindMismatch,
    HeterogeneousBatch,
    BadStaticLoop,
    // tensor
    BoundsError,
    CapacityOverflow,
    BadMagic,
    UnknownKindTag,
    TruncatedPayload,
    IoError,
    // dpp / executor
    EmptyIterSpace,
    InvalidConfig,
};

const char* errc_name(Errc code);

// Single exception type for the whole library. `position` is the chain index
// for validation errors, -1 otherwise. `provenance` is filled in by the lazy
// API so errors name the handle that caused them.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message, int position = -1)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code),
          position_(position) {}

    Errc code() const { return code_; }
    int position() const { return position_; }

    const std::string& provenance() const { return provenance_; }
    void set_provenance(std::string p) { provenance_ = std::move(p); }

private:
    Errc code_;
    int position_;
    std::string provenance_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message, int position = -1) {
    throw Error(code, message, position);
}

}  // namespace opfuse
