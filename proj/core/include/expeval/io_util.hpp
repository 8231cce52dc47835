#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace expeval::io {

/// Container framing shared by all binary file formats: a little-endian
/// uint32 header length followed by the JSON header bytes, then the payload.
void write_header(std::ostream& out, const std::string& json);
std::string read_header(std::istream& in, const std::string& path);

void write_f32le(std::ostream& out, const std::vector<float>& values);
std::vector<float> read_f32le(std::istream& in, size_t count, const std::string& path);

void write_f64le(std::ostream& out, const std::vector<double>& values);
std::vector<double> read_f64le(std::istream& in, size_t count, const std::string& path);

}  // namespace expeval::io
