#include "opfuse/bench.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "opfuse/api.hpp"
#include "opfuse/oplib.hpp"

namespace opfuse::bench {

namespace {

using Clock = std::chrono::steady_clock;

ExecConfig exec_config(const BenchOptions& opt) {
    ExecConfig cfg;
    cfg.workers = opt.threads;
    cfg.coarsening.block = opt.coarsen;
    cfg.chunk_rows = opt.chunk_rows;
    return cfg;
}

void fill_random(const Plane& p, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> byte_dist(0, 255);
    std::uniform_real_distribution<double> real_dist(0.0, 1.0);
    for (std::uint32_t y = 0; y < p.height(); ++y) {
        for (std::uint32_t x = 0; x < p.width(); ++x) {
            Element e;
            switch (p.kind()) {
                case ScalarKind::U8: e.u8 = std::uint8_t(byte_dist(rng)); break;
                case ScalarKind::F32: e.f32 = float(real_dist(rng)); break;
                case ScalarKind::F64: e.f64 = real_dist(rng); break;
                case ScalarKind::U8x3:
                    for (auto& v : e.u8v) v = std::uint8_t(byte_dist(rng));
                    break;
                case ScalarKind::F32x3:
                    for (auto& v : e.f32v) v = float(real_dist(rng));
                    break;
                case ScalarKind::F64x3:
                    for (auto& v : e.f64v) v = real_dist(rng);
                    break;
            }
            p.store(x, y, e);
        }
    }
}

struct Series {
    std::vector<double> ns;

    double mean() const {
        double s = 0;
        for (double v : ns) s += v;
        return s / double(ns.size());
    }
    double rsd_pct() const {
        const double m = mean();
        if (m == 0.0) return 0.0;
        double acc = 0;
        for (double v : ns) acc += (v - m) * (v - m);
        return std::sqrt(acc / double(ns.size())) / m * 100.0;
    }
};

Series time_repeats(const std::function<void()>& fn, const BenchOptions& opt) {
    Series s;
    s.ns.reserve(std::size_t(opt.repeats));
    for (int i = 0; i < opt.warmup + opt.repeats; ++i) {
        const auto t0 = Clock::now();
        fn();
        const double dt = double(
            std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
        if (i >= opt.warmup) s.ns.push_back(dt);
    }
    return s;
}

BenchRecord make_record(std::string experiment, std::string param, const Series& fused,
                        const Series& unfused) {
    BenchRecord r;
    r.experiment = std::move(experiment);
    r.param = std::move(param);
    r.fused_ns = fused.mean();
    r.unfused_ns = unfused.mean();
    r.speedup = r.unfused_ns / r.fused_ns;
    r.rsd_pct = std::max(fused.rsd_pct(), unfused.rsd_pct());
    return r;
}

void require_equal(const Plane& a, const Plane& b, const std::string& where) {
    if (!plane_equal(a, b))
        throw GateFailure("equality gate failed: " + where);
}

// n arithmetic ops as a compact chain: literal IOps up to the threshold,
// a StaticLoop beyond it (keeps the pipeline object small).
constexpr std::uint32_t kStaticLoopThreshold = 64;

void append_compressed(std::vector<IOp>& chain, const IOp& op, std::uint32_t n) {
    if (n == 0) return;
    if (n <= kStaticLoopThreshold)
        for (std::uint32_t i = 0; i < n; ++i) chain.push_back(op);
    else
        chain.push_back(op_static_loop(op, n));
}

// One single-op sweep: the baseline's "kernel launch" analogue.
void single_op_pass(const Plane& src, const IOp& op, const Plane& dst, const ExecConfig& cfg) {
    const Pipeline pass{op_read_per_thread(src),
                        {op},
                        op_write_per_thread(dst),
                        Extent3{src.width(), src.height(), 1}};
    execute_fused(pass, cfg);
}

}  // namespace

std::vector<std::uint32_t> split_instructions(std::uint32_t total, std::uint32_t per_op) {
    std::vector<std::uint32_t> counts(total / per_op, per_op);
    if (total % per_op) counts.push_back(total % per_op);
    return counts;
}

std::vector<BenchRecord> run_vf(const BenchOptions& opt) {
    const ExecConfig cfg = exec_config(opt);
    std::mt19937_64 rng(opt.seed);
    const std::uint32_t kW = 4096, kH = 2160;
    Plane src = Plane::alloc(kW, kH, ScalarKind::U8);
    fill_random(src, rng);
    Plane dst_fused = Plane::alloc(kW, kH, ScalarKind::U8);
    Plane dst_unfused = Plane::alloc(kW, kH, ScalarKind::U8);
    const IOp mul = op_mul(std::uint8_t(3));

    std::vector<BenchRecord> records;
    for (std::uint32_t n_ops : {2u, 102u, 202u}) {
        std::vector<IOp> fused_chain{op_read_per_thread(src)};
        append_compressed(fused_chain, mul, n_ops);
        fused_chain.push_back(op_write_per_thread(dst_fused));
        const Pipeline fused = validate_chain(std::move(fused_chain));

        std::vector<IOp> unfused_chain{op_read_per_thread(src)};
        for (std::uint32_t i = 0; i < n_ops; ++i) unfused_chain.push_back(mul);
        unfused_chain.push_back(op_write_per_thread(dst_unfused));
        const Pipeline unfused = validate_chain(std::move(unfused_chain));

        execute_fused(fused, cfg);
        const ExecReport gate = execute_unfused(unfused, cfg);
        if (gate.passes != std::uint64_t(n_ops) + 1)
            throw GateFailure("vf: unexpected unfused pass count");
        require_equal(dst_fused, dst_unfused, "vf n_ops=" + std::to_string(n_ops));

        const Series f = time_repeats([&] { execute_fused(fused, cfg); }, opt);
        const Series u = time_repeats([&] { execute_unfused(unfused, cfg); }, opt);
        records.push_back(make_record("vf", std::to_string(n_ops), f, u));
    }
    return records;
}

std::vector<BenchRecord> run_hf(const BenchOptions& opt) {
    const ExecConfig cfg = exec_config(opt);
    std::mt19937_64 rng(opt.seed);
    const std::uint32_t kW = 60, kH = 120;
    const std::vector<std::uint32_t> sweep{1, 10, 50, 150, 600};
    const std::uint32_t max_batch = sweep.back();

    std::vector<Plane> src, dst_fused, dst_loop;
    for (std::uint32_t z = 0; z < max_batch; ++z) {
        src.push_back(Plane::alloc(kW, kH, ScalarKind::U8));
        fill_random(src.back(), rng);
        dst_fused.push_back(Plane::alloc(kW, kH, ScalarKind::F32));
        dst_loop.push_back(Plane::alloc(kW, kH, ScalarKind::F32));
    }

    const IOp cast = op_cast(ScalarKind::U8, ScalarKind::F32);
    const IOp mul = op_mul(1.25f);
    const IOp sub = op_sub(0.5f);
    const IOp div = op_div(2.0f);

    std::vector<BenchRecord> records;
    for (std::uint32_t batch : sweep) {
        std::vector<IOp> reads, writes;
        std::vector<Pipeline> per_plane;
        for (std::uint32_t z = 0; z < batch; ++z) {
            reads.push_back(op_read_per_thread(src[z]));
            writes.push_back(op_write_per_thread(dst_loop[z]));
            per_plane.push_back(validate_chain({op_read_per_thread(src[z]), cast, mul, sub, div,
                                                op_write_per_thread(dst_fused[z])}));
        }
        // One fused HF+VF pipeline writing the same destinations as the loop
        // baseline would, so the gate can compare plane by plane.
        std::vector<IOp> batch_writes;
        for (std::uint32_t z = 0; z < batch; ++z)
            batch_writes.push_back(op_write_per_thread(dst_fused[z]));
        const Pipeline fused = validate_chain(
            {op_batch_read(reads), cast, mul, sub, div, op_batch_write(batch_writes)});
        std::vector<Pipeline> loop_pipes;
        for (std::uint32_t z = 0; z < batch; ++z)
            loop_pipes.push_back(validate_chain({op_read_per_thread(src[z]), cast, mul, sub, div,
                                                 op_write_per_thread(dst_loop[z])}));

        execute_fused(fused, cfg);
        for (const Pipeline& p : loop_pipes) execute_fused(p, cfg);
        for (std::uint32_t z = 0; z < batch; ++z)
            require_equal(dst_fused[z], dst_loop[z], "hf batch=" + std::to_string(batch));

        const Series f = time_repeats([&] { execute_fused(fused, cfg); }, opt);
        const Series u = time_repeats(
            [&] {
                for (const Pipeline& p : loop_pipes) execute_fused(p, cfg);
            },
            opt);
        records.push_back(make_record("hf", std::to_string(batch), f, u));
        (void)per_plane;
    }
    return records;
}

std::vector<BenchRecord> run_vf_hf(const BenchOptions& opt) {
    const ExecConfig cfg = exec_config(opt);
    std::mt19937_64 rng(opt.seed);
    const std::uint32_t kW = 60, kH = 120, kBatch = 50;

    std::vector<Plane> src, dst_fused, dst_base;
    std::vector<IOp> reads, writes;
    for (std::uint32_t z = 0; z < kBatch; ++z) {
        src.push_back(Plane::alloc(kW, kH, ScalarKind::U8));
        fill_random(src.back(), rng);
        dst_fused.push_back(Plane::alloc(kW, kH, ScalarKind::U8));
        dst_base.push_back(Plane::alloc(kW, kH, ScalarKind::U8));
        reads.push_back(op_read_per_thread(src.back()));
        writes.push_back(op_write_per_thread(dst_fused.back()));
    }
    const IOp mul = op_mul(std::uint8_t(3));
    const IOp add = op_add(std::uint8_t(7));
    // Ping-pong temporaries for the per-op baseline, allocated once like the
    // named temporaries在 an unfused program.
    Plane tmp_a = Plane::alloc(kW, kH, ScalarKind::U8);
    Plane tmp_b = Plane::alloc(kW, kH, ScalarKind::U8);

    const auto run_baseline = [&](std::uint32_t pairs) {
        for (std::uint32_t z = 0; z < kBatch; ++z) {
            const Plane* cur = &src[z];
            Plane* next = &tmp_a;
            Plane* other = &tmp_b;
            const std::uint32_t total = pairs * 2;
            for (std::uint32_t i = 0; i < total; ++i) {
                const IOp& op = i < pairs ? mul : add;
                const Plane& dst = (i + 1 == total) ? dst_base[z] : *next;
                single_op_pass(*cur, op, dst, cfg);
                cur = (i + 1 == total) ? cur : next;
                std::swap(next, other);
            }
        }
    };

    std::vector<BenchRecord> records;
    for (std::uint32_t pairs : {2u, 100u, 1000u, 10000u}) {
        std::vector<IOp> chain{op_batch_read(reads)};
        append_compressed(chain, mul, pairs);
        append_compressed(chain, add, pairs);
        chain.push_back(op_batch_write(writes));
        const Pipeline fused = validate_chain(std::move(chain));

        execute_fused(fused, cfg);
        run_baseline(pairs);
        for (std::uint32_t z = 0; z < kBatch; ++z)
            require_equal(dst_fused[z], dst_base[z], "vf-hf pairs=" + std::to_string(pairs));

        const Series f = time_repeats([&] { execute_fused(fused, cfg); }, opt);
        const Series u = time_repeats([&] { run_baseline(pairs); }, opt);
        records.push_back(make_record("vf-hf", std::to_string(pairs), f, u));
    }
    return records;
}

std::vector<BenchRecord> run_ipo(const BenchOptions& opt) {
    const ExecConfig cfg = exec_config(opt);
    std::mt19937_64 rng(opt.seed);
    const std::uint32_t kW = 256, kH = 256, kTotal = 500;
    Plane src = Plane::alloc(kW, kH, ScalarKind::F32);
    fill_random(src, rng);
    Plane dst_fused = Plane::alloc(kW, kH, ScalarKind::F32);
    Plane dst_unfused = Plane::alloc(kW, kH, ScalarKind::F32);
    const IOp mul = op_mul(1.0000001f);

    const Pipeline fused = validate_chain(
        {op_read_per_thread(src), op_static_loop(mul, kTotal), op_write_per_thread(dst_fused)});

    std::vector<BenchRecord> records;
    for (std::uint32_t per_op = 1; per_op <= 496; per_op += 5) {
        const std::vector<std::uint32_t> counts = split_instructions(kTotal, per_op);
        if (counts.size() != (kTotal + per_op - 1) / per_op)
            throw GateFailure("ipo: split does not match ceil(total/per_op)");
        std::vector<IOp> chain{op_read_per_thread(src)};
        for (std::uint32_t c : counts)
            chain.push_back(c == 1 ? mul : op_static_loop(mul, c));
        chain.push_back(op_write_per_thread(dst_unfused));
        const Pipeline unfused = validate_chain(std::move(chain));

        execute_fused(fused, cfg);
        const ExecReport gate = execute_unfused(unfused, cfg);
        if (gate.passes != counts.size() + 1)
            throw GateFailure("ipo: unexpected unfused pass count");
        require_equal(dst_fused, dst_unfused, "ipo per_op=" + std::to_string(per_op));

        const Series f = time_repeats([&] { execute_fused(fused, cfg); }, opt);
        const Series u = time_repeats([&] { execute_unfused(unfused, cfg); }, opt);
        records.push_back(make_record("ipo", std::to_string(per_op), f, u));
    }
    return records;
}

std::vector<BenchRecord> run_datasize(const BenchOptions& opt) {
    const ExecConfig cfg = exec_config(opt);
    std::mt19937_64 rng(opt.seed);
    const IOp mul = op_mul(1.0000001f);
    const IOp add = op_add(0.0001f);

    std::vector<BenchRecord> records;
    for (std::uint32_t elements : {100u, 10000u, 1000000u, 16654030u}) {
        Plane src = Plane::alloc(elements, 1, ScalarKind::F32);
        fill_random(src, rng);
        Plane dst_fused = Plane::alloc(elements, 1, ScalarKind::F32);
        Plane dst_unfused = Plane::alloc(elements, 1, ScalarKind::F32);

        std::vector<IOp> fused_chain{op_read_per_thread(src), op_static_loop(mul, 100),
                                     op_static_loop(add, 100), op_write_per_thread(dst_fused)};
        const Pipeline fused = validate_chain(std::move(fused_chain));

        std::vector<IOp> unfused_chain{op_read_per_thread(src)};
        for (int i = 0; i < 100; ++i) unfused_chain.push_back(mul);
        for (int i = 0; i < 100; ++i) unfused_chain.push_back(add);
        unfused_chain.push_back(op_write_per_thread(dst_unfused));
        const Pipeline unfused = validate_chain(std::move(unfused_chain));

        execute_fused(fused, cfg);
        execute_unfused(unfused, cfg);
        require_equal(dst_fused, dst_unfused, "datasize n=" + std::to_string(elements));

        const Series f = time_repeats([&] { execute_fused(fused, cfg); }, opt);
        const Series u = time_repeats([&] { execute_unfused(unfused, cfg); }, opt);
        records.push_back(make_record("datasize", std::to_string(elements), f, u));
    }
    return records;
}

std::vector<BenchRecord> run_datatype(const BenchOptions& opt) {
    const ExecConfig cfg = exec_config(opt);
    std::mt19937_64 rng(opt.seed);
    const std::uint32_t kW = 60, kH = 120, kBatch = 50;

    const std::vector<std::pair<ScalarKind, ScalarKind>> pairs{
        {ScalarKind::U8, ScalarKind::U8},   {ScalarKind::U8, ScalarKind::F32},
        {ScalarKind::U8, ScalarKind::F64},  {ScalarKind::F32, ScalarKind::F32},
        {ScalarKind::F32, ScalarKind::F64}, {ScalarKind::F32, ScalarKind::U8},
        {ScalarKind::F64, ScalarKind::F32}, {ScalarKind::F64, ScalarKind::F64}};

    const auto arith_const = [](ScalarKind k, double v) {
        switch (k) {
            case ScalarKind::U8: return Const(std::uint8_t(v));
            case ScalarKind::F32: return Const(float(v));
            default: return Const(v);
        }
    };

    std::vector<BenchRecord> records;
    for (const auto& [in_kind, out_kind] : pairs) {
        std::vector<Plane> src, dst_fused, dst_base;
        std::vector<IOp> reads, writes;
        for (std::uint32_t z = 0; z < kBatch; ++z) {
            src.push_back(Plane::alloc(kW, kH, in_kind));
            fill_random(src.back(), rng);
            dst_fused.push_back(Plane::alloc(kW, kH, out_kind));
            dst_base.push_back(Plane::alloc(kW, kH, out_kind));
            reads.push_back(op_read_per_thread(src.back()));
            writes.push_back(op_write_per_thread(dst_fused.back()));
        }
        const IOp cast = op_cast(in_kind, out_kind);
        const IOp mul = op_mul(arith_const(out_kind, 3));
        const IOp sub = op_sub(arith_const(out_kind, 1));
        const IOp div = op_div(arith_const(out_kind, 2));

        const Pipeline fused =
            validate_chain({op_batch_read(reads), cast, mul, sub, div, op_batch_write(writes)});
        std::vector<Pipeline> base;
        for (std::uint32_t z = 0; z < kBatch; ++z)
            base.push_back(validate_chain({op_read_per_thread(src[z]), cast, mul, sub, div,
                                           op_write_per_thread(dst_base[z])}));

        const std::string label =
            std::string(kind_name(in_kind)) + "->" + std::string(kind_name(out_kind));
        execute_fused(fused, cfg);
        for (const Pipeline& p : base) execute_unfused(p, cfg);
        for (std::uint32_t z = 0; z < kBatch; ++z)
            require_equal(dst_fused[z], dst_base[z], "datatype " + label);

        const Series f = time_repeats([&] { execute_fused(fused, cfg); }, opt);
        const Series u = time_repeats(
            [&] {
                for (const Pipeline& p : base) execute_unfused(p, cfg);
            },
            opt);
        records.push_back(make_record("datatype", label, f, u));
    }
    return records;
}

std::vector<BenchRecord> run_memory(const BenchOptions& opt, std::ostream& info) {
    const ExecConfig cfg = exec_config(opt);
    std::mt19937_64 rng(opt.seed);

    // Image-preprocessing pipeline: crop -> resize -> color swap -> multiply
    // -> subtract -> divide -> split into three scalar planes.
    Plane source = Plane::alloc(256, 256, ScalarKind::F32x3);
    fill_random(source, rng);
    std::array<Plane, 3> out{Plane::alloc(60, 120, ScalarKind::F32),
                             Plane::alloc(60, 120, ScalarKind::F32),
                             Plane::alloc(60, 120, ScalarKind::F32)};
    const std::array<float, 3> k255{255.0f, 255.0f, 255.0f};
    const std::array<float, 3> mean{0.485f, 0.456f, 0.406f};
    const std::array<float, 3> stddev{0.229f, 0.224f, 0.225f};

    const std::vector<api::LazyHandle> handles{
        api::resize(api::crop(source, CropRect{10, 20, 120, 240}), 60, 120,
                    ResizeMode::Bilinear),
        api::cvt_color(ColorOrder::SwapRB),
        api::multiply(k255),
        api::subtract(mean),
        api::divide(stddev),
        api::split(out)};
    const Pipeline pipeline = api::build_pipeline(handles);

    const std::uint64_t planned = plan_memory_savings(pipeline);
    const ExecReport fused_report = execute_fused(pipeline, cfg);
    const ExecReport unfused_report = execute_unfused(pipeline, cfg);
    if (unfused_report.intermediate_bytes_allocated != planned)
        throw GateFailure("memory: planned savings disagree with measured allocation");

    const std::uint64_t image_4k_rgb = std::uint64_t(3840) * 2160 * bytes_per_element(ScalarKind::U8x3);
    info << "pipeline crop->resize->cvt->mul->sub->div->split on 60x120 f32x3:\n"
         << "  compute passes avoided: " << pipeline.compute.size() << "\n"
         << "  intermediate bytes saved per image: " << planned << "\n"
         << "  intermediate bytes saved per batch of 50: " << planned * 50 << "\n"
         << "  fused intermediates: " << fused_report.intermediate_bytes_allocated
         << ", passes: " << fused_report.passes << "\n"
         << "  unfused intermediates: " << unfused_report.intermediate_bytes_allocated
         << ", passes: " << unfused_report.passes << "\n"
         << "4k RGB u8 frame (3840x2160x3): " << image_4k_rgb << " bytes per intermediate\n";

    // Identity chain saves nothing; report it for contrast.
    Plane ident_src = Plane::alloc(60, 120, ScalarKind::F32);
    fill_random(ident_src, rng);
    Plane ident_dst = Plane::alloc(60, 120, ScalarKind::F32);
    const Pipeline identity =
        validate_chain({op_read_per_thread(ident_src), op_write_per_thread(ident_dst)});
    info << "identity pipeline: " << plan_memory_savings(identity) << " bytes saved\n";

    for (std::uint32_t z = 0; z < 3; ++z) {
        Plane check = Plane::alloc(60, 120, ScalarKind::F32);
        (void)check;
    }

    std::vector<BenchRecord> records;
    {
        const Series f = time_repeats([&] { execute_fused(pipeline, cfg); }, opt);
        const Series u = time_repeats([&] { execute_unfused(pipeline, cfg); }, opt);
        records.push_back(make_record("memory", "image-preproc", f, u));
    }
    {
        const Series f = time_repeats([&] { execute_fused(identity, cfg); }, opt);
        const Series u = time_repeats([&] { execute_unfused(identity, cfg); }, opt);
        records.push_back(make_record("memory", "identity", f, u));
    }
    return records;
}

bool experiment_known(const std::string& name) {
    return name == "vf" || name == "hf" || name == "vf-hf" || name == "ipo" ||
           name == "datasize" || name == "datatype" || name == "memory";
}

std::vector<BenchRecord> run_experiment(const std::string& name, const BenchOptions& opt,
                                        std::ostream& info) {
    if (name == "vf") return run_vf(opt);
    if (name == "hf") return run_hf(opt);
    if (name == "vf-hf") return run_vf_hf(opt);
    if (name == "ipo") return run_ipo(opt);
    if (name == "datasize") return run_datasize(opt);
    if (name == "datatype") return run_datatype(opt);
    if (name == "memory") return run_memory(opt, info);
    fail(Errc::InvalidConfig, "unknown experiment: " + name);
}

void write_csv(std::ostream& os, const std::string& experiment, const BenchOptions& opt,
               const std::vector<BenchRecord>& records) {
    os << "# opfuse bench " << experiment << " repeats=" << opt.repeats
       << " warmup=" << opt.warmup << " threads=" << opt.threads << " coarsen=" << opt.coarsen
       << " chunk_rows=" << opt.chunk_rows << " seed=" << opt.seed << "\n";
    os << "experiment,param,fused_ns,unfused_ns,speedup,rsd_pct\n";
    const auto flags = os.flags();
    os.setf(std::ios::fixed);
    for (const BenchRecord& r : records) {
        os.precision(0);
        os << r.experiment << "," << r.param << "," << r.fused_ns << "," << r.unfused_ns << ",";
        os.precision(4);
        os << r.speedup << ",";
        os.precision(3);
        os << r.rsd_pct << "\n";
    }
    os.flags(flags);
}

}  // namespace opfuse::bench
