#include "expeval/ensemble_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expeval/errors.hpp"
#include "expeval/model_io.hpp"

namespace expeval {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

void save_ensemble(const FoldEnsemble& ensemble, const RunConfig& config,
                   const std::string& dir) {
  fs::create_directories(dir);
  ordered_json manifest;
  manifest["magic"] = "XTE1";
  manifest["k"] = ensemble.k;
  std::vector<std::string> model_files;
  for (int i = 0; i < ensemble.k; ++i) {
    std::string name = "fold" + std::to_string(i) + ".xtm";
    save_model(ensemble.models[static_cast<size_t>(i)], (fs::path(dir) / name).string(),
               "fold " + std::to_string(i) + " of " + std::to_string(ensemble.k));
    model_files.push_back(name);
  }
  manifest["model_files"] = model_files;
  manifest["accuracies"] = ensemble.accuracies;
  manifest["blocks"] = ensemble.blocks;
  manifest["run_config"] = ordered_json::parse(run_config_to_json(config));

  std::ofstream out((fs::path(dir) / "manifest.json").string());
  if (!out) throw FormatError("ensemble: cannot write manifest in " + dir);
  out << manifest.dump(2) << '\n';
}

LoadedEnsemble load_ensemble(const std::string& dir) {
  std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  std::ifstream in(manifest_path);
  if (!in) throw FormatError("ensemble: cannot open " + manifest_path);
  ordered_json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("ensemble: bad manifest " + manifest_path + ": " + e.what());
  }
  if (manifest.value("magic", "") != std::string("XTE1")) {
    throw FormatError("ensemble: magic mismatch in " + manifest_path + " (expected XTE1)");
  }
  LoadedEnsemble loaded;
  try {
    loaded.ensemble.k = manifest.at("k").get<int>();
    loaded.ensemble.accuracies = manifest.at("accuracies").get<std::vector<double>>();
    loaded.ensemble.blocks = manifest.at("blocks").get<std::vector<std::vector<int>>>();
    loaded.config = parse_run_config(manifest.at("run_config").dump());
    for (const auto& name : manifest.at("model_files").get<std::vector<std::string>>()) {
      loaded.ensemble.models.push_back(load_model((fs::path(dir) / name).string()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("ensemble: missing or mistyped manifest field in " + manifest_path + ": " +
                      e.what());
  }
  if (static_cast<int>(loaded.ensemble.models.size()) != loaded.ensemble.k ||
      static_cast<int>(loaded.ensemble.blocks.size()) != loaded.ensemble.k) {
    throw FormatError("ensemble: manifest k disagrees with model/block counts in " +
                      manifest_path);
  }
  return loaded;
}

}  // namespace expeval
