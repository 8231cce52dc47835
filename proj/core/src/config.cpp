#include "expeval/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expeval/errors.hpp"
#include "expeval/model_io.hpp"

namespace expeval {

using nlohmann::ordered_json;

std::string DatasetSpec::describe() const {
  std::ostringstream out;
  if (source == "shapes") {
    out << "shapes(n=" << n << ",size=" << size << ",classes=" << classes << ")";
  } else if (source == "idx") {
    out << "idx(" << images_path << "," << labels_path << ",limit=" << limit << ")";
  } else {
    out << "file(" << path << ")";
  }
  return out.str();
}

namespace {

void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) {
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

ordered_json dataset_to_json(const DatasetSpec& spec) {
  ordered_json j;
  j["source"] = spec.source;
  if (spec.source == "shapes") {
    j["n"] = spec.n;
    j["size"] = spec.size;
    j["classes"] = spec.classes;
  } else if (spec.source == "idx") {
    j["images_path"] = spec.images_path;
    j["labels_path"] = spec.labels_path;
    j["limit"] = spec.limit;
  } else {
    j["path"] = spec.path;
  }
  return j;
}

DatasetSpec dataset_from_json(const ordered_json& j) {
  DatasetSpec spec;
  reject_unknown_keys(
      j, {"source", "n", "size", "classes", "images_path", "labels_path", "limit", "path"},
      "dataset");
  spec.source = j.value("source", spec.source);
  if (spec.source != "shapes" && spec.source != "idx" && spec.source != "file") {
    throw ConfigError("config: dataset source must be shapes, idx, or file, got '" + spec.source +
                      "'");
  }
  spec.n = j.value("n", spec.n);
  spec.size = j.value("size", spec.size);
  spec.classes = j.value("classes", spec.classes);
  spec.images_path = j.value("images_path", spec.images_path);
  spec.labels_path = j.value("labels_path", spec.labels_path);
  spec.limit = j.value("limit", spec.limit);
  spec.path = j.value("path", spec.path);
  return spec;
}

std::string correlation_name(CorrelationKind kind) {
  return kind == CorrelationKind::Pearson ? "pearson" : "spearman";
}

CorrelationKind parse_correlation(const std::string& name) {
  if (name == "pearson") return CorrelationKind::Pearson;
  if (name == "spearman") return CorrelationKind::Spearman;
  throw ConfigError("config: correlation must be pearson or spearman, got '" + name + "'");
}

}  // namespace

ordered_json run_config_to_json_obj(const RunConfig& cfg) {
  ordered_json j;
  j["dataset"] = dataset_to_json(cfg.dataset);
  j["architecture"] = cfg.architecture;
  j["method"] = method_name(cfg.method);
  j["distance"] = distance_name(cfg.distance);
  j["dice_threshold"] = cfg.distance.dice_threshold;
  j["k"] = cfg.ensemble.k;
  j["epochs"] = cfg.ensemble.train.epochs;
  j["batch_size"] = cfg.ensemble.train.batch_size;
  j["learning_rate"] = cfg.ensemble.train.learning_rate;
  j["momentum"] = cfg.ensemble.train.momentum;
  j["accuracy_tolerance"] = cfg.ensemble.accuracy_tolerance;
  j["strict_accuracy"] = cfg.ensemble.strict_accuracy;
  j["ig_steps"] = cfg.attribution.ig_steps;
  j["ig_baseline"] = cfg.attribution.ig_baseline;
  j["sg_samples"] = cfg.attribution.sg_samples;
  j["sg_sigma"] = cfg.attribution.sg_sigma;
  j["fidelity_subset_fraction"] = cfg.fidelity.subset_fraction;
  j["fidelity_num_subsets"] = cfg.fidelity.num_subsets;
  j["fidelity_baseline"] = cfg.fidelity.baseline;
  j["fidelity_correlation"] = correlation_name(cfg.fidelity.correlation);
  j["fidelity_use_softmax"] = cfg.fidelity.use_softmax;
  j["stability_radius"] = cfg.stability.radius;
  j["stability_num_neighbors"] = cfg.stability.num_neighbors;
  j["stability_distance"] = distance_name(cfg.stability.inner_distance);
  if (cfg.degradation) {
    ordered_json d;
    d["kind"] = degradation_name(cfg.degradation->kind);
    d["level"] = cfg.degradation->level;
    d["noise_sigma"] = cfg.degradation->noise_sigma;
    d["random_layer_order"] = cfg.degradation->random_layer_order;
    j["degradation"] = d;
  } else {
    j["degradation"] = nullptr;
  }
  j["test_fraction"] = cfg.test_fraction;
  j["seed"] = cfg.seed;
  j["metric_sample_limit"] = cfg.metric_sample_limit;
  j["output_dir"] = cfg.output_dir;
  return j;
}

RunConfig run_config_from_json_obj(const ordered_json& j) {
  RunConfig cfg;
  reject_unknown_keys(
      j,
      {"dataset",           "architecture",
       "method",            "distance",
       "dice_threshold",    "k",
       "epochs",            "batch_size",
       "learning_rate",     "momentum",
       "accuracy_tolerance", "strict_accuracy",
       "ig_steps",          "ig_baseline",
       "sg_samples",        "sg_sigma",
       "fidelity_subset_fraction", "fidelity_num_subsets",
       "fidelity_baseline", "fidelity_correlation",
       "fidelity_use_softmax", "stability_radius",
       "stability_num_neighbors", "stability_distance",
       "degradation",       "test_fraction",
       "seed",              "metric_sample_limit",
       "output_dir"},
      "run config");
  if (j.contains("dataset")) cfg.dataset = dataset_from_json(j.at("dataset"));
  cfg.architecture = j.value("architecture", cfg.architecture);
  if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
  if (j.contains("distance")) cfg.distance = parse_distance(j.at("distance").get<std::string>());
  cfg.distance.dice_threshold = j.value("dice_threshold", cfg.distance.dice_threshold);
  cfg.ensemble.k = j.value("k", cfg.ensemble.k);
  cfg.ensemble.train.epochs = j.value("epochs", cfg.ensemble.train.epochs);
  cfg.ensemble.train.batch_size = j.value("batch_size", cfg.ensemble.train.batch_size);
  cfg.ensemble.train.learning_rate = j.value("learning_rate", cfg.ensemble.train.learning_rate);
  cfg.ensemble.train.momentum = j.value("momentum", cfg.ensemble.train.momentum);
  cfg.ensemble.accuracy_tolerance =
      j.value("accuracy_tolerance", cfg.ensemble.accuracy_tolerance);
  cfg.ensemble.strict_accuracy = j.value("strict_accuracy", cfg.ensemble.strict_accuracy);
  cfg.attribution.ig_steps = j.value("ig_steps", cfg.attribution.ig_steps);
  cfg.attribution.ig_baseline = j.value("ig_baseline", cfg.attribution.ig_baseline);
  cfg.attribution.sg_samples = j.value("sg_samples", cfg.attribution.sg_samples);
  cfg.attribution.sg_sigma = j.value("sg_sigma", cfg.attribution.sg_sigma);
  cfg.fidelity.subset_fraction =
      j.value("fidelity_subset_fraction", cfg.fidelity.subset_fraction);
  cfg.fidelity.num_subsets = j.value("fidelity_num_subsets", cfg.fidelity.num_subsets);
  cfg.fidelity.baseline = j.value("fidelity_baseline", cfg.fidelity.baseline);
  if (j.contains("fidelity_correlation")) {
    cfg.fidelity.correlation = parse_correlation(j.at("fidelity_correlation").get<std::string>());
  }
  cfg.fidelity.use_softmax = j.value("fidelity_use_softmax", cfg.fidelity.use_softmax);
  cfg.stability.radius = j.value("stability_radius", cfg.stability.radius);
  cfg.stability.num_neighbors = j.value("stability_num_neighbors", cfg.stability.num_neighbors);
  if (j.contains("stability_distance")) {
    cfg.stability.inner_distance = parse_distance(j.at("stability_distance").get<std::string>());
  }
  if (j.contains("degradation") && !j.at("degradation").is_null()) {
    const ordered_json& d = j.at("degradation");
    reject_unknown_keys(d, {"kind", "level", "noise_sigma", "random_layer_order"}, "degradation");
    DegradationSpec spec;
    spec.kind = parse_degradation(d.at("kind").get<std::string>());
    spec.level = d.at("level").get<double>();
    spec.noise_sigma = d.value("noise_sigma", spec.noise_sigma);
    spec.random_layer_order = d.value("random_layer_order", spec.random_layer_order);
    cfg.degradation = spec;
  }
  cfg.test_fraction = j.value("test_fraction", cfg.test_fraction);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.metric_sample_limit = j.value("metric_sample_limit", cfg.metric_sample_limit);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  if (cfg.ensemble.k < 2) throw ConfigError("config: k must be at least 2");
  if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0) {
    throw ConfigError("config: test_fraction must lie in (0, 1)");
  }
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  return run_config_to_json_obj(cfg).dump(2);
}

RunConfig parse_run_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    return run_config_from_json_obj(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad field type: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

LabeledDataset load_spec_dataset(const DatasetSpec& spec, uint64_t seed) {
  if (spec.source == "shapes") {
    return gen_shapes(spec.n, spec.size, spec.classes, seed);
  }
  if (spec.source == "idx") {
    return load_idx(spec.images_path, spec.labels_path, spec.limit);
  }
  return load_dataset(spec.path);
}

}  // namespace expeval
