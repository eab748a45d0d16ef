#pragma once

#include <string>

#include "opfuse/plane.hpp"

namespace opfuse {

// On-disk tensor container, little-endian regardless of host:
//   magic "FKT1" | u32 plane_count |
//   per plane: u32 kind_tag | u32 width | u32 height | payload
// Payload is width*height elements, row-major, row_stride == width.
void tensor_write_file(const PlaneBatch& batch, const std::string& path);
void tensor_write_file(const Plane& plane, const std::string& path);
PlaneBatch tensor_read_file(const std::string& path);

// P6 export of a U8x3 plane for human inspection.
void write_ppm(const Plane& plane, const std::string& path);

}  // namespace opfuse
