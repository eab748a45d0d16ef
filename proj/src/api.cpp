#include "opfuse/api.hpp"

#include <atomic>
#include <mutex>
#include <unordered_map>

namespace opfuse::api {

namespace {

std::atomic<std::uint64_t> g_next_uid{1};

template <class Fn>
IOp guarded(const std::string& provenance, Fn&& fn) {
    try {
        return fn();
    } catch (Error& e) {
        e.set_provenance(provenance);
        throw;
    }
}

}  // namespace

LazyHandle make_handle(std::string provenance, IOp iop) {
    LazyHandle h;
    h.iop_ = std::move(iop);
    h.provenance_ = std::move(provenance);
    h.uid_ = g_next_uid.fetch_add(1, std::memory_order_relaxed);
    return h;
}

LazyHandle make_deferred_cvt(ColorOrder order) {
    LazyHandle h;
    h.deferred_cvt_ = order;
    h.provenance_ = "cvt_color";
    h.uid_ = g_next_uid.fetch_add(1, std::memory_order_relaxed);
    return h;
}

LazyHandle read(const Plane& source) {
    return make_handle("read", guarded("read", [&] { return op_read_per_thread(source); }));
}

LazyHandle write(const Plane& dest) {
    return make_handle("write", guarded("write", [&] { return op_write_per_thread(dest); }));
}

LazyHandle crop(const Plane& source, const CropRect& rect) {
    return make_handle("crop", guarded("crop", [&] { return op_crop(source, rect); }));
}

LazyHandle resize(const Plane& source, std::uint32_t width, std::uint32_t height,
                  ResizeMode mode) {
    return make_handle("resize",
                       guarded("resize", [&] { return op_resize(source, width, height, mode); }));
}

LazyHandle resize(const LazyHandle& upstream, std::uint32_t width, std::uint32_t height,
                  ResizeMode mode) {
    if (upstream.deferred())
        fail(Errc::UnsupportedKind, "resize upstream must be a read handle");
    return make_handle("resize", guarded("resize", [&] {
                           return op_resize(upstream.iop(), width, height, mode);
                       }));
}

LazyHandle cvt_color(ColorOrder order) { return make_deferred_cvt(order); }

LazyHandle multiply(const Const& c) {
    return make_handle("multiply", guarded("multiply", [&] { return op_mul(c); }));
}

LazyHandle subtract(const Const& c) {
    return make_handle("subtract", guarded("subtract", [&] { return op_sub(c); }));
}

LazyHandle divide(const Const& c) {
    return make_handle("divide", guarded("divide", [&] { return op_div(c); }));
}

LazyHandle split(const std::array<Plane, 3>& dest) {
    return make_handle("split", guarded("split", [&] { return op_split_write(dest); }));
}

namespace {

bool is_sample_read_id(OpId id) {
    return id == OpId::PerThreadRead || id == OpId::CropRead || id == OpId::ResizeRead;
}

// Resolve deferred color conversions against the kind flowing at their chain
// position; all other handles carry finished IOps.
std::vector<IOp> resolve_chain(const std::vector<LazyHandle>& handles) {
    std::vector<IOp> ops;
    ops.reserve(handles.size());
    std::optional<ScalarKind> current;
    for (std::size_t i = 0; i < handles.size(); ++i) {
        const LazyHandle& h = handles[i];
        if (h.deferred()) {
            if (!current) {
                Error e(Errc::KindMismatch, "cvt_color has no upstream value",
                        static_cast<int>(i));
                e.set_provenance(h.provenance());
                throw e;
            }
            IOp op = guarded(h.provenance(),
                             [&] { return op_color_convert(h.deferred_color_order(), *current); });
            current = op.output_kind();
            ops.push_back(std::move(op));
        } else {
            if (h.iop().output_kind()) current = h.iop().output_kind();
            ops.push_back(h.iop());
        }
    }
    return ops;
}

struct FoldedChain {
    std::vector<IOp> ops;
    std::size_t folded = 0;  // unary ops absorbed into the read
};

// Collapse leading unary ops into the read, so the chain the executor sees has
// one pass less per folded op (crop+resize are already one read by
// construction in resize()).
FoldedChain fold_leading_unaries(std::vector<IOp> ops) {
    FoldedChain fc;
    if (ops.empty() || ops.front().kind() != OpKind::Read || !is_sample_read_id(ops.front().id())) {
        fc.ops = std::move(ops);
        return fc;
    }
    IOp read = std::move(ops.front());
    std::size_t i = 1;
    while (i + 1 < ops.size() && ops[i].kind() == OpKind::Unary) {
        read = fold_unary_into_read(read, ops[i]);
        ++i;
        ++fc.folded;
    }
    fc.ops.push_back(std::move(read));
    for (; i < ops.size(); ++i) fc.ops.push_back(std::move(ops[i]));
    return fc;
}

std::size_t original_index(int folded_position, std::size_t folded) {
    return folded_position <= 0 ? 0 : static_cast<std::size_t>(folded_position) + folded;
}

Pipeline validate_with_provenance(FoldedChain fc, const std::vector<LazyHandle>& handles) {
    try {
        return validate_chain(std::move(fc.ops));
    } catch (Error& e) {
        const std::size_t idx = original_index(e.position(), fc.folded);
        if (idx < handles.size() && e.provenance().empty())
            e.set_provenance(handles[idx].provenance() + " (handle #" + std::to_string(idx + 1) +
                             ")");
        throw;
    }
}

struct PipelineCache {
    std::mutex mutex;
    std::unordered_map<std::string, std::shared_ptr<const Pipeline>> built;
};

PipelineCache& cache() {
    static PipelineCache c;
    return c;
}

std::string cache_key(const std::vector<LazyHandle>& handles) {
    std::string key;
    key.reserve(handles.size() * sizeof(std::uint64_t));
    for (const LazyHandle& h : handles) {
        const std::uint64_t uid = h.uid();
        key.append(reinterpret_cast<const char*>(&uid), sizeof(uid));
    }
    return key;
}

}  // namespace

Pipeline build_pipeline(const std::vector<LazyHandle>& handles) {
    if (handles.empty()) fail(Errc::EmptyChain, "no handles");
    return validate_with_provenance(fold_leading_unaries(resolve_chain(handles)), handles);
}

ExecReport execute_operations(const std::vector<LazyHandle>& handles, const ExecConfig& config) {
    const std::string key = cache_key(handles);
    std::shared_ptr<const Pipeline> pipeline;
    {
        std::lock_guard<std::mutex> lock(cache().mutex);
        auto it = cache().built.find(key);
        if (it != cache().built.end()) pipeline = it->second;
    }
    if (!pipeline) {
        pipeline = std::make_shared<const Pipeline>(build_pipeline(handles));
        std::lock_guard<std::mutex> lock(cache().mutex);
        cache().built.emplace(key, pipeline);
    }
    return execute_fused(*pipeline, config);
}

Pipeline build_batch_pipeline(const std::vector<LazyHandle>& per_plane_reads,
                              const std::vector<LazyHandle>& shared_compute,
                              const std::vector<LazyHandle>& per_plane_writes) {
    if (per_plane_reads.empty()) fail(Errc::EmptyBatch, "batch needs at least one read");
    if (per_plane_reads.size() != per_plane_writes.size())
        fail(Errc::HeterogeneousBatch, "read and write handle counts differ");

    // Resolve the shared chain against the first read's kind, then fold its
    // leading unary ops into every per-plane read so the batch keeps the
    // single-chain pass structure.
    std::vector<LazyHandle> probe;
    probe.reserve(shared_compute.size() + 1);
    probe.push_back(per_plane_reads.front());
    for (const LazyHandle& h : shared_compute) probe.push_back(h);
    std::vector<IOp> resolved = resolve_chain(probe);

    std::size_t n_fold = 0;
    while (1 + n_fold < resolved.size() && resolved[1 + n_fold].kind() == OpKind::Unary) ++n_fold;

    std::vector<IOp> inner_reads;
    inner_reads.reserve(per_plane_reads.size());
    for (std::size_t i = 0; i < per_plane_reads.size(); ++i) {
        const LazyHandle& h = per_plane_reads[i];
        if (h.deferred() || h.iop().kind() != OpKind::Read || !is_sample_read_id(h.iop().id())) {
            Error e(Errc::HeterogeneousBatch,
                    "read handle #" + std::to_string(i + 1) + " is not a per-plane read",
                    static_cast<int>(i));
            e.set_provenance(h.provenance());
            throw e;
        }
        IOp r = h.iop();
        for (std::size_t f = 0; f < n_fold; ++f)
            r = guarded(h.provenance(), [&] { return fold_unary_into_read(r, resolved[1 + f]); });
        inner_reads.push_back(std::move(r));
    }

    std::vector<IOp> inner_writes;
    inner_writes.reserve(per_plane_writes.size());
    for (std::size_t i = 0; i < per_plane_writes.size(); ++i) {
        const LazyHandle& h = per_plane_writes[i];
        if (h.deferred() || h.iop().kind() != OpKind::Write) {
            Error e(Errc::HeterogeneousBatch,
                    "write handle #" + std::to_string(i + 1) + " is not a per-plane write",
                    static_cast<int>(i));
            e.set_provenance(h.provenance());
            throw e;
        }
        inner_writes.push_back(h.iop());
    }

    std::vector<IOp> chain;
    chain.reserve(resolved.size() - n_fold + 1);
    chain.push_back(op_batch_read(std::move(inner_reads)));
    for (std::size_t i = 1 + n_fold; i < resolved.size(); ++i) chain.push_back(resolved[i]);
    chain.push_back(op_batch_write(std::move(inner_writes)));
    return validate_chain(std::move(chain));
}

ExecReport execute_batch(const std::vector<LazyHandle>& per_plane_reads,
                         const std::vector<LazyHandle>& shared_compute,
                         const std::vector<LazyHandle>& per_plane_writes,
                         const ExecConfig& config) {
    return execute_fused(build_batch_pipeline(per_plane_reads, shared_compute, per_plane_writes),
                         config);
}

}  // namespace opfuse::api
