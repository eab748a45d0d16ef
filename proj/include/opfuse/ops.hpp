#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "opfuse/plane.hpp"
#include "opfuse/scalar.hpp"

namespace opfuse {

// The four operation archetypes. A valid chain is Read, then zero or more
// Unary/Binary compute ops, then Write.
enum class OpKind : std::uint8_t { Read, Unary, Binary, Write };

enum class OpId : std::uint8_t {
    // read family
    PerThreadRead,
    CropRead,
    ResizeRead,
    BatchRead,
    // unary compute (no parameter payload)
    Cast,
    SwapRB,
    ToGray,
    // binary compute (parameter payload)
    Mul,
    Add,
    Sub,
    Div,
    StaticLoop,
    // write family
    PerThreadWrite,
    SplitWrite,
    BatchWrite,
};

const char* op_name(OpId id);

enum class ParamsSchema : std::uint8_t {
    None,        // unary compute
    Arith,       // per-lane constants
    StaticLoop,  // inner op + repeat count
    Sample,      // read-side source mapping
    BatchRead,
    Write,
    SplitWrite,
    BatchWrite,
};

// input_kind is empty iff ReadType, output_kind empty iff WriteType,
// params None iff UnaryType.
struct OpSignature {
    OpKind kind = OpKind::Unary;
    std::optional<ScalarKind> input_kind;
    std::optional<ScalarKind> output_kind;
    ParamsSchema params = ParamsSchema::None;
};

enum class ResizeMode : std::uint8_t { Nearest, Bilinear };
enum class ColorOrder : std::uint8_t { SwapRB, ToGrayF32 };

// A unary op folded behind a read: applied to every sampled value before it
// enters the compute chain. Unary ops carry no parameters, so identity plus
// kinds is the whole description.
struct FoldedUnary {
    OpId id;
    ScalarKind in;
    ScalarKind out;
};

// Unified read-side mapping: PerThreadRead is the identity rect, Crop offsets
// it, Resize scales rect -> out. Crop stays a view: only index arithmetic.
struct SampleReadParams {
    Plane source;
    std::uint32_t x0 = 0, y0 = 0;        // rect origin inside source
    std::uint32_t rect_w = 0, rect_h = 0;  // rect extents
    std::uint32_t out_w = 0, out_h = 0;    // output extents (== rect unless resizing)
    ResizeMode mode = ResizeMode::Nearest;
    std::vector<FoldedUnary> post;  // unary ops fused into the read

    bool resizing() const { return out_w != rect_w || out_h != rect_h; }
    ScalarKind output_kind() const {
        return post.empty() ? source.kind() : post.back().out;
    }
};

struct ArithParams {
    Element value;  // lanes in the op's element kind
};

struct StaticLoopParams {
    OpId inner_id = OpId::Mul;   // Mul/Add/Sub/Div/SwapRB
    ScalarKind value_kind = ScalarKind::F32;
    Element inner_value;         // unused for SwapRB
    std::uint32_t repeat = 1;
};

struct WriteParams {
    Plane dest;
};

struct SplitWriteParams {
    std::array<Plane, 3> dest;  // lane i of the input lands in dest[i]
};

struct BatchReadParams {
    std::vector<SampleReadParams> per_plane;
    std::uint32_t active_count = 0;
    Element default_value;  // returned for z >= active_count
};

struct BatchWriteParams {
    OpId inner_id = OpId::PerThreadWrite;  // PerThreadWrite or SplitWrite
    std::vector<WriteParams> planes;       // used when inner is PerThreadWrite
    std::vector<SplitWriteParams> splits;  // used when inner is SplitWrite
    std::uint32_t active_count = 0;        // z >= active_count skips the write

    std::size_t size() const {
        return inner_id == OpId::PerThreadWrite ? planes.size() : splits.size();
    }
};

using ParamsVariant =
    std::variant<std::monostate, ArithParams, StaticLoopParams, SampleReadParams,
                 BatchReadParams, WriteParams, SplitWriteParams, BatchWriteParams>;

// A runtime value pairing an operation's identity with its immutable
// parameters; the currency of the lazy API and the dynamic execution path.
class IOp {
public:
    IOp(OpId id, OpSignature sig, ParamsVariant params,
        std::optional<Extent3> dims = std::nullopt)
        : id_(id), sig_(sig), params_(std::move(params)), dims_(dims) {}

    OpId id() const { return id_; }
    const OpSignature& signature() const { return sig_; }
    OpKind kind() const { return sig_.kind; }
    std::optional<ScalarKind> input_kind() const { return sig_.input_kind; }
    std::optional<ScalarKind> output_kind() const { return sig_.output_kind; }
    const std::optional<Extent3>& dims_hint() const { return dims_; }

    template <class T>
    const T& params() const { return std::get<T>(params_); }
    const ParamsVariant& params_variant() const { return params_; }

private:
    OpId id_;
    OpSignature sig_;
    ParamsVariant params_;
    std::optional<Extent3> dims_;
};

// A validated ordered chain plus its iteration space; the fused-execution unit.
struct Pipeline {
    IOp read;
    std::vector<IOp> compute;
    IOp write;
    Extent3 iter_space;
};

// Grid inference from the read op's declared output extents.
Extent3 infer_iter_space(const IOp& read_iop);

// Accepts exactly the chains on which fused execution cannot hit a kind
// error: first Read, last Write, compute ops in between, adjacent kinds
// matching, read/write spaces compatible. Chains longer than kMaxChainLength
// are rejected outright.
inline constexpr std::size_t kMaxChainLength = 4096;
Pipeline validate_chain(std::vector<IOp> iops);

// --- per-point exec contracts -------------------------------------------------
// compute is register-to-register: pure in (input, params), no thread access.
Element compute_exec(const IOp& iop, const Element& input);
Element read_exec(const IOp& iop, const ThreadPoint& thread);
void write_exec(const IOp& iop, const ThreadPoint& thread, const Element& input);

// --- block forms used by the hot loops ---------------------------------------
// Dispatch happens once per block instead of once per element; results are
// identical to the per-point forms by construction.
struct IoCounters {
    std::uint64_t elements_read = 0;
    std::uint64_t bytes_read = 0;
    std::uint64_t bytes_written = 0;
    std::uint64_t default_reads = 0;
};

void compute_exec_block(const IOp& iop, Element* values, int n);
void read_exec_block(const IOp& iop, std::int64_t x0, int n, std::int64_t y, std::int64_t z,
                     Element* out, IoCounters& io);
void write_exec_block(const IOp& iop, std::int64_t x0, int n, std::int64_t y, std::int64_t z,
                      const Element* values, IoCounters& io);

// Sampling core shared by the read ops and their oracles' host code.
Element sample_read_at(const SampleReadParams& p, std::int64_t x, std::int64_t y,
                       std::uint64_t* elements_touched = nullptr);

}  // namespace opfuse
