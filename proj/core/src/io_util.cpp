#include "expeval/io_util.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "expeval/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts need byte swaps");

namespace expeval::io {

void write_header(std::ostream& out, const std::string& json) {
  uint32_t len = static_cast<uint32_t>(json.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(json.data(), static_cast<std::streamsize>(json.size()));
}

std::string read_header(std::istream& in, const std::string& path) {
  uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  if (!in) throw FormatError(path + ": truncated header length");
  std::string json(len, '\0');
  in.read(json.data(), static_cast<std::streamsize>(len));
  if (!in) throw FormatError(path + ": truncated JSON header");
  return json;
}

void write_f32le(std::ostream& out, const std::vector<float>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
}

std::vector<float> read_f32le(std::istream& in, size_t count, const std::string& path) {
  std::vector<float> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<size_t>(in.gcount()) != count * sizeof(float)) {
    throw FormatError(path + ": payload length mismatch (expected " +
                      std::to_string(count * sizeof(float)) + " bytes, got " +
                      std::to_string(in.gcount()) + ")");
  }
  // Trailing bytes also mean the file disagrees with its header.
  char extra;
  if (in.read(&extra, 1)) {
    throw FormatError(path + ": payload length mismatch (trailing bytes after " +
                      std::to_string(count * sizeof(float)) + " expected bytes)");
  }
  return values;
}

void write_f64le(std::ostream& out, const std::vector<double>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> read_f64le(std::istream& in, size_t count, const std::string& path) {
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<size_t>(in.gcount()) != count * sizeof(double)) {
    throw FormatError(path + ": payload length mismatch (expected " +
                      std::to_string(count * sizeof(double)) + " bytes, got " +
                      std::to_string(in.gcount()) + ")");
  }
  return values;
}

}  // namespace expeval::io
