#pragma once

#include <string>

#include "expeval/dataset.hpp"
#include "expeval/model.hpp"

namespace expeval {

/// Container with a JSON header (architecture, seed, provenance) followed by
/// raw little-endian float64 parameter blocks in declaration order.
void save_model(const Model& model, const std::string& path,
                const std::string& provenance = "");
Model load_model(const std::string& path);

/// Same container idea for datasets: JSON header + float64 image payload.
void save_dataset(const LabeledDataset& data, const std::string& path);
LabeledDataset load_dataset(const std::string& path);

}  // namespace expeval
