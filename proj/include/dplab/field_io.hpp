#pragma once

// Field serialization. The text format is human readable and round-trips
// exactly (17 significant digits); the binary format is a raw little-endian dump.
//
// text:    "dplab-field 1" / dim nx nt / x0 y0 t0 radius time_length / values...
// binary:  "DPLF" u32 version, i32 dim nx nt, f64 x0 y0 t0 radius time_length, f64 values...

#include <iosfwd>
#include <string>

#include "dplab/mesh.hpp"

namespace dplab {

enum class FieldFormat { text, binary };

void write_field(std::ostream& os, const Field& f, FieldFormat format = FieldFormat::text);
/// Detects the format from the leading bytes. Throws Io on malformed input.
Field read_field(std::istream& is);

void save_field(const std::string& path, const Field& f, FieldFormat format = FieldFormat::text);
Field load_field(const std::string& path);

}  // namespace dplab
