#include "expeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "expeval/errors.hpp"

namespace expeval {

using nlohmann::ordered_json;

SeparationHistograms make_histograms(const SeparationSets& sets, int bins) {
  if (bins <= 0) throw ConfigError("histograms: bin count must be positive");
  SeparationHistograms h;
  h.s_equal_bins.assign(static_cast<size_t>(bins), 0);
  h.s_diff_bins.assign(static_cast<size_t>(bins), 0);
  double max_d = 0.0;
  for (double d : sets.s_equal) max_d = std::max(max_d, d);
  for (double d : sets.s_diff) max_d = std::max(max_d, d);
  h.max_distance = max_d;
  if (max_d <= 0.0) {
    // All distances zero: everything lands in the first bin.
    h.bin_width = 0.0;
    h.s_equal_bins[0] = static_cast<int>(sets.s_equal.size());
    h.s_diff_bins[0] = static_cast<int>(sets.s_diff.size());
    return h;
  }
  h.bin_width = max_d / bins;
  auto drop = [&](std::vector<int>& counts, double d) {
    int b = static_cast<int>(d / h.bin_width);
    b = std::clamp(b, 0, bins - 1);  // d == max lands in the last bin
    ++counts[static_cast<size_t>(b)];
  };
  for (double d : sets.s_equal) drop(h.s_equal_bins, d);
  for (double d : sets.s_diff) drop(h.s_diff_bins, d);
  return h;
}

std::string report_to_json(const MetricReport& r) {
  ordered_json j;
  j["dataset"] = r.dataset;
  j["arch"] = r.arch;
  j["method"] = method_name(r.method);
  j["distance_kind"] = distance_name(r.distance_kind);
  j["k"] = r.k;
  j["seeds"] = r.seeds;
  j["accuracies"] = r.accuracies;
  j["reco"] = r.reco;
  j["reco_auc"] = r.reco_auc;
  j["best_gamma"] = r.best_gamma;
  j["mege"] = r.mege;
  j["mu_f_mean"] = r.mu_f_mean;
  j["s_avg_mean"] = r.s_avg_mean;
  j["skipped_pairs"] = r.skipped_pairs;
  ordered_json hist;
  hist["s_equal_bins"] = r.histograms.s_equal_bins;
  hist["s_diff_bins"] = r.histograms.s_diff_bins;
  hist["bin_width"] = r.histograms.bin_width;
  hist["max_distance"] = r.histograms.max_distance;
  j["histograms"] = hist;
  j["degradation"] = r.degradation;
  j["degradation_level"] = r.degradation_level;
  j["run_config"] = ordered_json::parse(run_config_to_json(r.run_config));
  return j.dump(2);
}

MetricReport parse_report(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: invalid JSON: ") + e.what());
  }
  MetricReport r;
  try {
    r.dataset = j.at("dataset").get<std::string>();
    r.arch = j.at("arch").get<std::string>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.distance_kind = parse_distance(j.at("distance_kind").get<std::string>());
    r.k = j.at("k").get<int>();
    r.seeds = j.at("seeds").get<std::vector<uint64_t>>();
    r.accuracies = j.at("accuracies").get<std::vector<double>>();
    r.reco = j.at("reco").get<double>();
    r.reco_auc = j.at("reco_auc").get<double>();
    r.best_gamma = j.at("best_gamma").get<double>();
    r.mege = j.at("mege").get<double>();
    r.mu_f_mean = j.at("mu_f_mean").get<double>();
    r.s_avg_mean = j.at("s_avg_mean").get<double>();
    r.skipped_pairs = j.at("skipped_pairs").get<int>();
    const ordered_json& hist = j.at("histograms");
    r.histograms.s_equal_bins = hist.at("s_equal_bins").get<std::vector<int>>();
    r.histograms.s_diff_bins = hist.at("s_diff_bins").get<std::vector<int>>();
    r.histograms.bin_width = hist.at("bin_width").get<double>();
    r.histograms.max_distance = hist.at("max_distance").get<double>();
    r.degradation = j.value("degradation", std::string("none"));
    r.degradation_level = j.value("degradation_level", 0.0);
    r.run_config = parse_run_config(j.at("run_config").dump());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: missing or mistyped field: ") + e.what());
  }
  return r;
}

void save_report(const MetricReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("report: cannot open " + path + " for writing");
  out << report_to_json(report) << '\n';
  if (!out) throw FormatError("report: write failed for " + path);
}

MetricReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("report: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str());
}

namespace {

void sort_reports(std::vector<MetricReport>& reports) {
  std::sort(reports.begin(), reports.end(), [](const MetricReport& a, const MetricReport& b) {
    if (a.method != b.method) return method_name(a.method) < method_name(b.method);
    if (a.degradation != b.degradation) return a.degradation < b.degradation;
    return a.degradation_level < b.degradation_level;
  });
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

}  // namespace

std::string reports_to_csv(std::vector<MetricReport> reports) {
  sort_reports(reports);
  std::ostringstream out;
  out << "method,distance,degradation,level,reco,reco_auc,mege,mu_f_mean,s_avg_mean,"
         "skipped_pairs,accuracy_mean,accuracy_spread\n";
  for (const MetricReport& r : reports) {
    double acc_mean = 0.0, acc_min = 0.0, acc_max = 0.0;
    if (!r.accuracies.empty()) {
      acc_min = *std::min_element(r.accuracies.begin(), r.accuracies.end());
      acc_max = *std::max_element(r.accuracies.begin(), r.accuracies.end());
      for (double a : r.accuracies) acc_mean += a;
      acc_mean /= static_cast<double>(r.accuracies.size());
    }
    out << method_name(r.method) << ',' << distance_name(r.distance_kind) << ','
        << r.degradation << ',' << fmt(r.degradation_level) << ',' << fmt(r.reco) << ','
        << fmt(r.reco_auc) << ',' << fmt(r.mege) << ',' << fmt(r.mu_f_mean) << ','
        << fmt(r.s_avg_mean) << ',' << r.skipped_pairs << ',' << fmt(acc_mean) << ','
        << fmt(acc_max - acc_min) << '\n';
  }
  return out.str();
}

std::string reports_to_histogram_csv(std::vector<MetricReport> reports) {
  sort_reports(reports);
  std::ostringstream out;
  out << "method,degradation,level,set,bin_low,bin_high,count\n";
  for (const MetricReport& r : reports) {
    auto emit = [&](const char* set_name, const std::vector<int>& bins) {
      for (size_t b = 0; b < bins.size(); ++b) {
        double lo = r.histograms.bin_width * static_cast<double>(b);
        double hi = r.histograms.bin_width * static_cast<double>(b + 1);
        out << method_name(r.method) << ',' << r.degradation << ','
            << fmt(r.degradation_level) << ',' << set_name << ',' << fmt(lo) << ',' << fmt(hi)
            << ',' << bins[b] << '\n';
      }
    };
    emit("s_equal", r.histograms.s_equal_bins);
    emit("s_diff", r.histograms.s_diff_bins);
  }
  return out.str();
}

}  // namespace expeval
