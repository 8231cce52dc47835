#include "expeval/archive.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "expeval/errors.hpp"
#include "expeval/io_util.hpp"

namespace expeval {

using nlohmann::ordered_json;

int ExplanationArchive::map_size() const {
  int n = 1;
  for (int d : map_shape) n *= d;
  return n;
}

ExplanationMap ExplanationArchive::map(int index) const {
  if (index < 0 || index >= sample_count()) {
    throw ConfigError("archive: map index " + std::to_string(index) + " out of range");
  }
  int n = map_size();
  std::vector<double> values(static_cast<size_t>(n));
  const float* src = payload.data() + static_cast<ptrdiff_t>(index) * n;
  for (int i = 0; i < n; ++i) values[static_cast<size_t>(i)] = src[i];
  ExplanationMap m;
  m.values = Tensor(map_shape, std::move(values));
  m.method = method;
  m.model_id = model_id;
  m.sample_id = sample_ids[static_cast<size_t>(index)];
  m.predicted_class = predicted_classes[static_cast<size_t>(index)];
  return m;
}

ExplanationArchive ExplanationArchive::from_maps(const std::vector<ExplanationMap>& maps,
                                                 const std::string& model_id, uint64_t seed) {
  ExplanationArchive a;
  a.model_id = model_id;
  a.seed = seed;
  if (maps.empty()) return a;
  a.map_shape = maps.front().values.shape();
  a.method = maps.front().method;
  int n = maps.front().values.size();
  a.payload.reserve(maps.size() * static_cast<size_t>(n));
  for (const ExplanationMap& m : maps) {
    if (m.values.shape() != a.map_shape) {
      throw ShapeError("archive: inconsistent map shape for sample '" + m.sample_id + "'");
    }
    a.sample_ids.push_back(m.sample_id);
    a.predicted_classes.push_back(m.predicted_class);
    for (int i = 0; i < n; ++i) a.payload.push_back(static_cast<float>(m.values[i]));
  }
  return a;
}

void write_archive(const ExplanationArchive& archive, const std::string& path) {
  size_t expected = static_cast<size_t>(archive.sample_count()) *
                    static_cast<size_t>(archive.sample_count() ? archive.map_size() : 0);
  if (archive.payload.size() != expected) {
    throw FormatError("archive: payload length " + std::to_string(archive.payload.size()) +
                      " does not match " + std::to_string(expected) + " expected values");
  }
  ordered_json header;
  header["magic"] = "XTA1";
  header["dtype"] = "f32le";
  header["map_shape"] = archive.map_shape;
  header["method"] = method_name(archive.method);
  header["model_id"] = archive.model_id;
  header["sample_ids"] = archive.sample_ids;
  header["predicted_classes"] = archive.predicted_classes;
  header["created"] = archive.created;
  header["seed"] = archive.seed;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("archive: cannot open " + path + " for writing");
  io::write_header(out, header.dump());
  io::write_f32le(out, archive.payload);
  if (!out) throw FormatError("archive: write failed for " + path);
}

ExplanationArchive read_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("archive: cannot open " + path);
  ordered_json header;
  try {
    header = ordered_json::parse(io::read_header(in, path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("archive: bad JSON header in " + path + ": " + e.what());
  }
  if (header.value("magic", "") != std::string("XTA1")) {
    throw FormatError("archive: magic mismatch in " + path + " (expected XTA1)");
  }
  if (header.value("dtype", "") != std::string("f32le")) {
    throw FormatError("archive: unsupported dtype '" + header.value("dtype", "") + "' in " + path);
  }
  ExplanationArchive a;
  a.map_shape = header.at("map_shape").get<std::vector<int>>();
  a.method = parse_method(header.at("method").get<std::string>());
  a.model_id = header.value("model_id", "");
  a.sample_ids = header.at("sample_ids").get<std::vector<std::string>>();
  a.predicted_classes = header.at("predicted_classes").get<std::vector<int>>();
  a.created = header.value("created", "");
  a.seed = header.value("seed", 0ULL);
  if (a.predicted_classes.size() != a.sample_ids.size()) {
    throw FormatError("archive: predicted_classes/sample_ids length mismatch in " + path);
  }
  size_t expected = static_cast<size_t>(a.sample_count()) * static_cast<size_t>(a.map_size());
  a.payload = io::read_f32le(in, expected, path);
  return a;
}

}  // namespace expeval
