#pragma once

#include <string>
#include <vector>

#include "opfuse/executor.hpp"
#include "opfuse/oplib.hpp"

namespace opfuse::api {

// A deferred operation: constructing one moves no data and executes nothing.
// The wrapped op runs only when a handle chain is passed to an executor call.
class LazyHandle {
public:
    const std::string& provenance() const { return provenance_; }
    std::uint64_t uid() const { return uid_; }

    bool deferred() const { return !iop_.has_value(); }
    const IOp& iop() const { return *iop_; }
    ColorOrder deferred_color_order() const { return deferred_cvt_; }

private:
    friend LazyHandle make_handle(std::string provenance, IOp iop);
    friend LazyHandle make_deferred_cvt(ColorOrder order);

    LazyHandle() = default;

    std::optional<IOp> iop_;
    ColorOrder deferred_cvt_ = ColorOrder::SwapRB;  // used when iop_ is empty
    std::string provenance_;
    std::uint64_t uid_ = 0;
};

LazyHandle read(const Plane& source);
LazyHandle write(const Plane& dest);
LazyHandle crop(const Plane& source, const CropRect& rect);
LazyHandle resize(const Plane& source, std::uint32_t width, std::uint32_t height,
                  ResizeMode mode = ResizeMode::Bilinear);
// Collapses with an upstream crop/read handle into a single fused read.
LazyHandle resize(const LazyHandle& upstream, std::uint32_t width, std::uint32_t height,
                  ResizeMode mode = ResizeMode::Bilinear);
// The element kind is taken from the chain when the pipeline is built.
LazyHandle cvt_color(ColorOrder order);
LazyHandle multiply(const Const& c);
LazyHandle subtract(const Const& c);
LazyHandle divide(const Const& c);
LazyHandle split(const std::array<Plane, 3>& dest);

// Assembles a validated pipeline from a handle chain: resolves deferred
// kinds, collapses leading unary ops into the read, and annotates any chain
// error with the offending handle's provenance.
Pipeline build_pipeline(const std::vector<LazyHandle>& handles);

// Builds (or reuses a cached) pipeline for this exact handle chain and runs
// one fused execution. Repeat calls with the same handles skip validation.
ExecReport execute_operations(const std::vector<LazyHandle>& handles,
                              const ExecConfig& config = {});

// Horizontal + vertical fusion in one call: per-plane read and write handles
// are wrapped into batch ops around the shared compute chain, giving a single
// fused execution over all planes.
ExecReport execute_batch(const std::vector<LazyHandle>& per_plane_reads,
                         const std::vector<LazyHandle>& shared_compute,
                         const std::vector<LazyHandle>& per_plane_writes,
                         const ExecConfig& config = {});

Pipeline build_batch_pipeline(const std::vector<LazyHandle>& per_plane_reads,
                              const std::vector<LazyHandle>& shared_compute,
                              const std::vector<LazyHandle>& per_plane_writes);

}  // namespace opfuse::api
