#include "expeval/model_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "expeval/errors.hpp"
#include "expeval/io_util.hpp"

namespace expeval {

using nlohmann::ordered_json;

void save_model(const Model& model, const std::string& path, const std::string& provenance) {
  ordered_json header;
  header["magic"] = "XTM1";
  header["dtype"] = "f64le";
  header["architecture_id"] = model.architecture_id();
  Shape3 s = model.input_shape();
  header["input_shape"] = {s.c, s.h, s.w};
  header["seed"] = model.seed();
  header["model_id"] = model.model_id;
  header["provenance"] = provenance;
  ordered_json layer_blocks = ordered_json::array();
  for (int li = 0; li < model.layer_count(); ++li) {
    ordered_json blocks = ordered_json::array();
    for (const Tensor& p : model.params(li)) blocks.push_back(p.shape());
    layer_blocks.push_back(blocks);
  }
  header["param_blocks"] = layer_blocks;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("model: cannot open " + path + " for writing");
  io::write_header(out, header.dump());
  for (int li = 0; li < model.layer_count(); ++li) {
    for (const Tensor& p : model.params(li)) io::write_f64le(out, p.values());
  }
  if (!out) throw FormatError("model: write failed for " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("model: cannot open " + path);
  ordered_json header;
  try {
    header = ordered_json::parse(io::read_header(in, path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model: bad JSON header in " + path + ": " + e.what());
  }
  if (header.value("magic", "") != std::string("XTM1")) {
    throw FormatError("model: magic mismatch in " + path + " (expected XTM1)");
  }
  auto shape = header.at("input_shape").get<std::vector<int>>();
  if (shape.size() != 3) throw FormatError("model: bad input_shape in " + path);
  Model model(header.at("architecture_id").get<std::string>(), {shape[0], shape[1], shape[2]},
              header.at("seed").get<uint64_t>());
  model.model_id = header.value("model_id", "");

  auto layer_blocks = header.at("param_blocks");
  if (static_cast<int>(layer_blocks.size()) != model.layer_count()) {
    throw FormatError("model: header layer count disagrees with architecture in " + path);
  }
  for (int li = 0; li < model.layer_count(); ++li) {
    auto& params = model.params(li);
    auto blocks = layer_blocks[static_cast<size_t>(li)];
    if (blocks.size() != params.size()) {
      throw FormatError("model: parameter block count mismatch at layer " + std::to_string(li) +
                        " in " + path);
    }
    for (size_t pi = 0; pi < params.size(); ++pi) {
      auto pshape = blocks[pi].get<std::vector<int>>();
      if (pshape != params[pi].shape()) {
        throw FormatError("model: parameter shape mismatch at layer " + std::to_string(li) +
                          " in " + path);
      }
      params[pi] =
          Tensor(pshape, io::read_f64le(in, static_cast<size_t>(params[pi].size()), path));
    }
  }
  return model;
}

void save_dataset(const LabeledDataset& data, const std::string& path) {
  ordered_json header;
  header["magic"] = "XTD1";
  header["dtype"] = "f64le";
  header["image_shape"] = data.images.shape();
  header["labels"] = data.labels;
  header["sample_ids"] = data.sample_ids;
  header["class_count"] = data.class_count;
  header["corruption_mask"] = data.corruption_mask;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("dataset: cannot open " + path + " for writing");
  io::write_header(out, header.dump());
  io::write_f64le(out, data.images.values());
  if (!out) throw FormatError("dataset: write failed for " + path);
}

LabeledDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("dataset: cannot open " + path);
  ordered_json header;
  try {
    header = ordered_json::parse(io::read_header(in, path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("dataset: bad JSON header in " + path + ": " + e.what());
  }
  if (header.value("magic", "") != std::string("XTD1")) {
    throw FormatError("dataset: magic mismatch in " + path + " (expected XTD1)");
  }
  LabeledDataset data;
  auto shape = header.at("image_shape").get<std::vector<int>>();
  data.labels = header.at("labels").get<std::vector<int>>();
  data.sample_ids = header.at("sample_ids").get<std::vector<std::string>>();
  data.class_count = header.at("class_count").get<int>();
  data.corruption_mask = header.value("corruption_mask", std::vector<uint8_t>{});
  data.images =
      Tensor(shape, io::read_f64le(in, static_cast<size_t>(Tensor::shape_size(shape)), path));
  return data;
}

}  // namespace expeval
