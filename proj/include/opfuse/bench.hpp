#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "opfuse/executor.hpp"

namespace opfuse::bench {

struct BenchOptions {
    int repeats = 30;  // timed repeats per sweep point (>= 3)
    int warmup = 2;    // extra leading runs excluded from statistics
    int threads = 0;   // 0 = hardware default
    int coarsen = 8;
    int chunk_rows = 8;
    std::uint64_t seed = 42;  // fixes the random-input generator
};

struct BenchRecord {
    std::string experiment;
    std::string param;  // swept value
    double fused_ns = 0.0;
    double unfused_ns = 0.0;
    double speedup = 0.0;  // unfused_ns / fused_ns
    double rsd_pct = 0.0;  // max relative standard deviation of the two series
};

// The two strategies disagreed bit-wise; the harness must abort (exit 2).
class GateFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// n_ops consecutive u8 multiplies at 4096x2160: one fused pipeline versus
// n_ops single-op passes.
std::vector<BenchRecord> run_vf(const BenchOptions& opt);

// Read->Cast->Mul->Sub->Div->Write over batches of 60x120 u8 planes: one
// batched fused execution versus per-plane fused executions in a loop.
std::vector<BenchRecord> run_hf(const BenchOptions& opt);

// p multiplies then p adds at batch 50: fused both ways versus one pass per
// op per plane.
std::vector<BenchRecord> run_vf_hf(const BenchOptions& opt);

// 500 f32 multiplies split into ceil(500/per_op) passes versus one fused
// pass with all 500.
std::vector<BenchRecord> run_ipo(const BenchOptions& opt);

// 100 Mul+Add pairs over a growing 1D f32 element count.
std::vector<BenchRecord> run_datasize(const BenchOptions& opt);

// The cast chain at batch 50 across input->output kind combinations.
std::vector<BenchRecord> run_datatype(const BenchOptions& opt);

// Intermediate-memory accounting for the image-preprocessing pipeline;
// human-readable byte report goes to `info`, timed rows are returned.
std::vector<BenchRecord> run_memory(const BenchOptions& opt, std::ostream& info);

// Dispatch by CLI name (vf | hf | vf-hf | ipo | datasize | datatype | memory).
bool experiment_known(const std::string& name);
std::vector<BenchRecord> run_experiment(const std::string& name, const BenchOptions& opt,
                                        std::ostream& info);

void write_csv(std::ostream& os, const std::string& experiment, const BenchOptions& opt,
               const std::vector<BenchRecord>& records);

// ceil(total/per_op) entries of per_op instructions, remainder in the last.
std::vector<std::uint32_t> split_instructions(std::uint32_t total, std::uint32_t per_op);

}  // namespace opfuse::bench
