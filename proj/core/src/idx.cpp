#include <cstdint>
#include <fstream>
#include <vector>

#include "expeval/dataset.hpp"
#include "expeval/errors.hpp"

namespace expeval {

namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

uint32_t read_be32(std::ifstream& in, const std::string& path, long offset) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) {
    throw FormatError("idx: " + path + " truncated at offset " + std::to_string(offset));
  }
  return (static_cast<uint32_t>(buf[0]) << 24) | (static_cast<uint32_t>(buf[1]) << 16) |
         (static_cast<uint32_t>(buf[2]) << 8) | static_cast<uint32_t>(buf[3]);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path,
                        int limit) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw FormatError("idx: cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw FormatError("idx: cannot open " + labels_path);

  uint32_t magic = read_be32(img, images_path, 0);
  if (magic != kImagesMagic) {
    throw FormatError("idx: bad magic in " + images_path + " at offset 0 (expected 0x00000803)");
  }
  uint32_t n_images = read_be32(img, images_path, 4);
  uint32_t rows = read_be32(img, images_path, 8);
  uint32_t cols = read_be32(img, images_path, 12);

  magic = read_be32(lab, labels_path, 0);
  if (magic != kLabelsMagic) {
    throw FormatError("idx: bad magic in " + labels_path + " at offset 0 (expected 0x00000801)");
  }
  uint32_t n_labels = read_be32(lab, labels_path, 4);
  if (n_images != n_labels) {
    throw FormatError("idx: image count " + std::to_string(n_images) +
                      " does not match label count " + std::to_string(n_labels));
  }

  int n = static_cast<int>(n_images);
  if (limit >= 0 && limit < n) n = limit;

  int h = static_cast<int>(rows);
  int w = static_cast<int>(cols);
  LabeledDataset data;
  // limit == 0 keeps the shape metadata via a single zeroed placeholder row;
  // size() is driven by the label vector.
  data.images = Tensor({std::max(n, 1), 1, h, w});
  data.labels.resize(static_cast<size_t>(n));
  data.sample_ids.resize(static_cast<size_t>(n));

  std::vector<unsigned char> row(static_cast<size_t>(h) * w);
  for (int i = 0; i < n; ++i) {
    img.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!img) {
      throw FormatError("idx: " + images_path + " truncated in pixel data of sample " +
                        std::to_string(i));
    }
    double* dst = data.images.data() + static_cast<ptrdiff_t>(i) * h * w;
    for (size_t p = 0; p < row.size(); ++p) dst[p] = row[p] / 255.0;
    char label = 0;
    lab.read(&label, 1);
    if (!lab) {
      throw FormatError("idx: " + labels_path + " truncated at label " + std::to_string(i));
    }
    data.labels[static_cast<size_t>(i)] = static_cast<unsigned char>(label);
    data.sample_ids[static_cast<size_t>(i)] = "idx" + std::to_string(i);
  }
  int max_label = 0;
  for (int y : data.labels) max_label = std::max(max_label, y);
  data.class_count = n > 0 ? max_label + 1 : 10;
  return data;
}

}  // namespace expeval
