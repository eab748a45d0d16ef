#include "opfuse/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace opfuse {

namespace {

constexpr char kMagic[4] = {'F', 'K', 'T', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    const std::byte b[4] = {std::byte(v & 0xff), std::byte((v >> 8) & 0xff),
                            std::byte((v >> 16) & 0xff), std::byte((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        fail(Errc::TruncatedPayload, "unexpected end of file in header");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}

// Elements are 1/4/8-byte lanes; byte-swap lanes on big-endian hosts so the
// file stays little-endian everywhere.
void swap_lanes_if_needed(std::byte* data, std::size_t count, ScalarKind kind) {
    if constexpr (std::endian::native == std::endian::little) {
        (void)data; (void)count; (void)kind;
        return;
    } else {
        const std::size_t lane_bytes = bytes_per_element(lane_kind(kind));
        if (lane_bytes == 1) return;
        const std::size_t lanes = count * static_cast<std::size_t>(lane_count(kind));
        for (std::size_t i = 0; i < lanes; ++i) {
            std::byte* p = data + i * lane_bytes;
            for (std::size_t a = 0, b = lane_bytes - 1; a < b; ++a, --b) std::swap(p[a], p[b]);
        }
    }
}

void write_plane_payload(std::ostream& os, const Plane& p) {
    const std::size_t row_bytes = std::size_t(p.width()) * bytes_per_element(p.kind());
    std::vector<std::byte> row(row_bytes);
    for (std::uint32_t y = 0; y < p.height(); ++y) {
        std::memcpy(row.data(), p.row(y), row_bytes);
        swap_lanes_if_needed(row.data(), p.width(), p.kind());
        os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row_bytes));
    }
}

void write_file(const std::vector<Plane>& planes, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(Errc::IoError, "cannot open for writing: " + path);
    os.write(kMagic, 4);
    put_u32(os, static_cast<std::uint32_t>(planes.size()));
    for (const Plane& p : planes) {
        put_u32(os, kind_tag(p.kind()));
        put_u32(os, p.width());
        put_u32(os, p.height());
        write_plane_payload(os, p);
    }
    if (!os) fail(Errc::IoError, "write failed: " + path);
}

}  // namespace

void tensor_write_file(const PlaneBatch& batch, const std::string& path) {
    write_file(batch.planes(), path);
}

void tensor_write_file(const Plane& plane, const std::string& path) {
    write_file({plane}, path);
}

PlaneBatch tensor_read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(Errc::IoError, "cannot open for reading: " + path);
    char magic[4];
    if (!is.read(magic, 4)) fail(Errc::TruncatedPayload, "file shorter than magic");
    if (std::memcmp(magic, kMagic, 4) != 0) fail(Errc::BadMagic, path);
    const std::uint32_t count = get_u32(is);
    if (count == 0) fail(Errc::EmptyBatch, "file declares zero planes");
    std::vector<Plane> planes;
    planes.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const ScalarKind kind = kind_from_tag(get_u32(is));
        const std::uint32_t w = get_u32(is);
        const std::uint32_t h = get_u32(is);
        Plane p = Plane::alloc_uninitialized(w, h, kind);
        const std::size_t row_bytes = std::size_t(w) * bytes_per_element(kind);
        for (std::uint32_t y = 0; y < h; ++y) {
            if (!is.read(reinterpret_cast<char*>(p.row_mut(y)),
                         static_cast<std::streamsize>(row_bytes)))
                fail(Errc::TruncatedPayload, "plane " + std::to_string(i) + " payload");
            swap_lanes_if_needed(p.row_mut(y), w, kind);
        }
        planes.push_back(std::move(p));
    }
    return PlaneBatch(std::move(planes));
}

void write_ppm(const Plane& plane, const std::string& path) {
    if (plane.kind() != ScalarKind::U8x3)
        fail(Errc::UnsupportedKind, "PPM export needs a u8x3 plane");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(Errc::IoError, "cannot open for writing: " + path);
    os << "P6\n" << plane.width() << " " << plane.height() << "\n255\n";
    const std::size_t row_bytes = std::size_t(plane.width()) * 3;
    for (std::uint32_t y = 0; y < plane.height(); ++y)
        os.write(reinterpret_cast<const char*>(plane.row(y)),
                 static_cast<std::streamsize>(row_bytes));
    if (!os) fail(Errc::IoError, "write failed: " + path);
}

}  // namespace opfuse
