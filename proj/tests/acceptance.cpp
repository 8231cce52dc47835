// Acceptance gate: one pass/fail line per criterion. Criteria 1-7 and 9-10
// are property/oracle checks; criterion 8 trains full fold ensembles and
// dominates the runtime.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "expeval/archive.hpp"
#include "expeval/attribution.hpp"
#include "expeval/cross_training.hpp"
#include "expeval/dataset.hpp"
#include "expeval/degradation.hpp"
#include "expeval/distance.hpp"
#include "expeval/errors.hpp"
#include "expeval/metrics.hpp"
#include "expeval/model.hpp"
#include "expeval/pipeline.hpp"
#include "expeval/rng.hpp"
#include "expeval/sanity.hpp"

using namespace expeval;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Tensor random_input(Shape3 s, uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Tensor x({s.c, s.h, s.w});
  Rng rng(seed);
  for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo, hi);
  return x;
}

void make_nonnegative(Model& model) {
  for (int li = 0; li < model.layer_count(); ++li) {
    for (Tensor& p : model.params(li)) {
      for (int i = 0; i < p.size(); ++i) p[i] = std::fabs(p[i]);
    }
  }
}

// ---------------------------------------------------------------- criterion 1
bool gradient_correctness() {
  Clock::time_point start = Clock::now();
  const char* archs[] = {
      "flatten|dense:3",
      "conv:3:3|relu|flatten|dense:2",
      "conv:2:3|relu|avgpool:2|conv:3:2|relu|flatten|dense:3",
      "conv:4:3|relu|avgpool:2|flatten|dense:4",
  };
  int pairs = 0;
  for (uint64_t seed = 1; pairs < 100; ++seed) {
    const char* arch = archs[seed % 4];
    Model model(arch, {1, 8, 8}, seed);
    Tensor x = random_input({1, 8, 8}, seed * 131 + 7);
    int cls = static_cast<int>(seed) % model.class_count();
    Tensor grad = grad_wrt_input(model, x, cls);
    for (int i = 0; i < x.size(); i += 5) {
      double orig = x[i];
      const double h = 1e-5;
      x[i] = orig + h;
      double up = forward(model, x).logits()[cls];
      x[i] = orig - h;
      double down = forward(model, x).logits()[cls];
      x[i] = orig;
      double fd = (up - down) / (2.0 * h);
      if (std::fabs(grad[i] - fd) > 1e-4 * std::max(1.0, std::fabs(fd))) {
        std::printf("  mismatch: seed=%llu i=%d analytic=%g fd=%g\n",
                    static_cast<unsigned long long>(seed), i, grad[i], fd);
        return false;
      }
    }
    ++pairs;
  }
  return seconds_since(start) < 60.0;
}

// ---------------------------------------------------------------- criterion 2
bool ig_completeness() {
  AttributionConfig cfg;
  cfg.ig_steps = 60;
  int cases = 0;
  for (uint64_t seed = 1; cases < 50; ++seed) {
    Model model(seed % 2 ? "conv:2:3|relu|flatten|dense:2"
                         : "conv:3:3|relu|avgpool:2|flatten|dense:2",
                {1, 8, 8}, seed);
    // Non-negative parameters and input keep every attribution non-negative,
    // so the stored |phi| map sums to the signed total.
    make_nonnegative(model);
    Tensor x = random_input({1, 8, 8}, seed + 900);
    for (int cls = 0; cls < 2 && cases < 50; ++cls, ++cases) {
      Tensor zero(x.shape(), 0.0);
      double target = forward(model, x).logits()[cls] - forward(model, zero).logits()[cls];
      double total = integrated_gradients(model, x, cls, cfg).values.sum();
      if (std::fabs(total - target) > 5e-2 * std::max(1.0, std::fabs(target))) {
        std::printf("  completeness gap: seed=%llu cls=%d sum=%g target=%g\n",
                    static_cast<unsigned long long>(seed), cls, total, target);
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------- criterion 3
bool linear_collapses() {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Model model("flatten|dense:3", {1, 6, 6}, seed);
    Tensor x = random_input({1, 6, 6}, seed + 40, -1.0, 1.0);
    for (int cls = 0; cls < 3; ++cls) {
      ExplanationMap sm = saliency(model, x, cls);
      ExplanationMap sg = smoothgrad(model, x, cls, {});
      ExplanationMap gi = gradient_input(model, x, cls);
      ExplanationMap ig = integrated_gradients(model, x, cls, {});
      for (int p = 0; p < 36; ++p) {
        if (std::fabs(sm.values[p] - sg.values[p]) > 1e-9) return false;
        if (std::fabs(gi.values[p] - ig.values[p]) > 1e-9) return false;
      }
    }
  }
  // Fidelity of GI on a linear no-bias model with non-negative weights and
  // input: the masked-logit drop equals the attribution mass exactly.
  Model model("flatten|dense:2", {1, 6, 6}, 11);
  make_nonnegative(model);
  model.params(1)[1] = Tensor({2}, 0.0);
  Tensor x = random_input({1, 6, 6}, 12, 0.1, 1.0);
  ExplanationMap gi = gradient_input(model, x, 0);
  FidelityConfig fcfg;
  fcfg.seed = 3;
  double mu = fidelity_mu(model, x, gi, fcfg);
  if (std::fabs(mu - 1.0) > 1e-12) {
    std::printf("  fidelity on linear GI: %.17g\n", mu);
    return false;
  }
  return true;
}

// ---------------------------------------------------------------- criterion 4
double brute_reco(const std::vector<double>& eq, const std::vector<double>& df) {
  std::vector<double> gammas = eq;
  gammas.insert(gammas.end(), df.begin(), df.end());
  double best = -2.0;
  for (double g : gammas) {
    int eb = 0, db = 0, ea = 0, da = 0;
    for (double d : eq) {
      eb += d < g;
      ea += d > g;
    }
    for (double d : df) {
      db += d < g;
      da += d > g;
    }
    double tpr = (eb + db) > 0 ? static_cast<double>(eb) / (eb + db) : 0.0;
    double tnr = (ea + da) > 0 ? static_cast<double>(da) / (ea + da) : 0.0;
    best = std::max(best, tpr + tnr - 1.0);
  }
  return std::clamp(best, 0.0, 1.0);
}

bool reco_enumeration() {
  auto run = [](std::vector<double> eq, std::vector<double> df) {
    SeparationSets s;
    s.s_equal = std::move(eq);
    s.s_diff = std::move(df);
    return reco(s).reco;
  };
  if (std::fabs(run({0.2, 0.4}, {0.3, 0.5}) - 0.5) > 1e-15) return false;
  if (std::fabs(run({0.1, 0.2}, {0.3, 0.4}) - 1.0) > 1e-15) return false;

  Rng rng(0xbeef);
  for (int trial = 0; trial < 200; ++trial) {
    int ne = 1 + rng.uniform_int(6);
    int nd = 1 + rng.uniform_int(6);
    std::vector<double> eq, df;
    for (int i = 0; i < ne; ++i) eq.push_back(rng.uniform_int(8) * 0.125);
    for (int i = 0; i < nd; ++i) df.push_back(rng.uniform_int(8) * 0.125);
    double expected = brute_reco(eq, df);
    if (std::fabs(run(eq, df) - expected) > 1e-12) {
      std::printf("  trial %d: got %g expected %g\n", trial, run(eq, df), expected);
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------- criterion 5
bool appendix_counterexample() {
  Clock::time_point start = Clock::now();
  CounterexampleResult r = appendix_counterexample_oracle(0.2, 0.8, 0.05, 0.05, 10000, 1);
  bool ok = std::fabs(r.kl_consistent - r.kl_inconsistent) <= 1e-9 &&
            std::fabs(r.w1_consistent - r.w1_inconsistent) <=
                0.02 * std::max(r.w1_consistent, r.w1_inconsistent) &&
            r.reco_consistent >= 0.95 && r.reco_inconsistent <= 0.05;
  if (!ok) {
    std::printf("  kl %g/%g w1 %g/%g reco %g/%g\n", r.kl_consistent, r.kl_inconsistent,
                r.w1_consistent, r.w1_inconsistent, r.reco_consistent, r.reco_inconsistent);
  }
  return ok && seconds_since(start) < 10.0;
}

// ---------------------------------------------------------------- criterion 6
bool distance_sanity_suite() {
  std::vector<double> sigmas;
  for (int i = 1; i <= 10; ++i) sigmas.push_back(0.05 * i);
  Tensor base = sanity_mask(32, 0.5);
  for (const char* name : {"spearman_abs", "l1", "l2", "ssim", "dice"}) {
    DistanceKind kind = parse_distance(name);
    SanityReport spatial = sanity_spatial(kind, 32, 100);
    SanityReport noise = sanity_noise(kind, base, sigmas, 50, 17);
    if (!spatial.passed || spatial.spearman_vs_index < 0.99 || !noise.passed ||
        noise.spearman_vs_index < 0.95) {
      std::printf("  %s: spatial %.4f noise %.4f\n", name, spatial.spearman_vs_index,
                  noise.spearman_vs_index);
      return false;
    }
  }
  DistanceFn constant = [](const Tensor&, const Tensor&) { return 0.5; };
  if (sanity_spatial(constant, 32, 100).passed) return false;
  if (sanity_noise(constant, base, sigmas, 50, 17).passed) return false;
  return true;
}

// ---------------------------------------------------------------- criterion 7
bool algorithm1_oracle() {
  Rng rng(0x5eed);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 6 + rng.uniform_int(15);
    int k = 2 + rng.uniform_int(2);
    int classes = 2 + rng.uniform_int(2);
    LabeledDataset data;
    data.class_count = classes;
    data.images = Tensor({n, 1, 1, 1});
    for (int i = 0; i < n; ++i) {
      data.labels.push_back(rng.uniform_int(classes));
      data.sample_ids.push_back("a" + std::to_string(i));
    }

    FoldEnsemble ensemble;
    ensemble.k = k;
    ensemble.models.resize(static_cast<size_t>(k));
    ensemble.blocks = partition(data, k, rng.next_u64(), false);

    std::vector<std::vector<ExplanationMap>> maps(
        static_cast<size_t>(k), std::vector<ExplanationMap>(static_cast<size_t>(n)));
    for (int m = 0; m < k; ++m) {
      for (int s = 0; s < n; ++s) {
        ExplanationMap& e = maps[static_cast<size_t>(m)][static_cast<size_t>(s)];
        e.values = Tensor({2, 2}, std::vector<double>{rng.uniform(), rng.uniform(),
                                                      rng.uniform(), rng.uniform()});
        e.predicted_class = rng.uniform_int(classes);
        e.sample_id = data.sample_ids[static_cast<size_t>(s)];
      }
    }
    SeparationSets got =
        build_separation_sets(ensemble, data, maps, DistanceKind{DistanceId::L1});

    std::vector<double> naive_eq, naive_df;
    int naive_skipped = 0;
    for (int s = 0; s < n; ++s) {
      int held = -1;
      for (int b = 0; b < k; ++b) {
        for (int idx : ensemble.blocks[static_cast<size_t>(b)]) {
          if (idx == s) held = b;
        }
      }
      for (int m = 0; m < k; ++m) {
        if (m == held) continue;
        bool mc = maps[static_cast<size_t>(m)][static_cast<size_t>(s)].predicted_class ==
                  data.labels[static_cast<size_t>(s)];
        bool hc = maps[static_cast<size_t>(held)][static_cast<size_t>(s)].predicted_class ==
                  data.labels[static_cast<size_t>(s)];
        if (!mc && !hc) {
          ++naive_skipped;
          continue;
        }
        double d = 0.0;
        for (int i = 0; i < 4; ++i) {
          d += std::fabs(maps[static_cast<size_t>(m)][static_cast<size_t>(s)].values[i] -
                         maps[static_cast<size_t>(held)][static_cast<size_t>(s)].values[i]);
        }
        (mc && hc ? naive_eq : naive_df).push_back(d);
      }
    }
    auto sorted = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v;
    };
    if (sorted(got.s_equal) != sorted(naive_eq) || sorted(got.s_diff) != sorted(naive_df) ||
        got.skipped_pairs != naive_skipped) {
      std::printf("  trial %d disagrees\n", trial);
      return false;
    }
  }
  return true;
}

// ------------------------------------------------------------- criteria 8 & 9
struct EnsembleRun {
  FoldEnsemble ensemble;
  double reco_value = 0.0;
  double mege_value = 0.0;
};

EnsembleRun score_sets(FoldEnsemble ensemble, const LabeledDataset& train_set) {
  EnsembleRun out;
  SeparationSets sets = build_separation_sets(ensemble, train_set, Method::SM,
                                              DistanceKind{DistanceId::SpearmanAbs});
  out.reco_value = reco(sets).reco;
  out.mege_value = mege(sets).mege;
  out.ensemble = std::move(ensemble);
  return out;
}

bool directional_degradation(bool& spread_ok) {
  Clock::time_point start = Clock::now();
  int reco_wins = 0;
  double sum_normal = 0.0, sum_invert = 0.0, sum_randomize = 0.0;
  spread_ok = true;

  // A dense-dominated net at full convergence: its remaining errors sit on
  // genuinely ambiguous samples, where explanation disagreement is real signal
  // rather than background-noise flukes.
  const std::string arch = "flatten|dense:64|relu|dense:4";

  for (uint64_t seed = 1; seed <= 3; ++seed) {
    LabeledDataset full = gen_shapes(4000, 16, 4, seed);
    TrainTestSplit split = split_train_test(full, 0.2, seed);

    EnsembleConfig cfg;
    cfg.k = 5;
    cfg.train.seed = seed;
    cfg.train.epochs = 40;

    // Normal ensemble.
    FoldEnsemble normal = train_ensemble(split.train, split.test, arch, cfg);
    double lo = *std::min_element(normal.accuracies.begin(), normal.accuracies.end());
    double hi = *std::max_element(normal.accuracies.begin(), normal.accuracies.end());
    if (hi - lo > 0.03) spread_ok = false;
    EnsembleRun normal_run = score_sets(normal, split.train);

    // 30% inverted labels; scored against the labels it was trained on.
    DegradationSpec inv;
    inv.kind = DegradationKind::InvertLabels;
    inv.level = 0.3;
    inv.seed = seed;
    LabeledDataset bad_train = invert_labels(split.train, inv);
    FoldEnsemble inverted = train_ensemble(bad_train, split.test, arch, cfg);
    EnsembleRun invert_run = score_sets(inverted, bad_train);

    // 30% of layers randomized, applied post-training to the normal ensemble.
    DegradationSpec rnd;
    rnd.kind = DegradationKind::RandomizeWeights;
    rnd.level = 0.3;
    FoldEnsemble randomized = normal_run.ensemble;
    for (int i = 0; i < randomized.k; ++i) {
      rnd.seed = Rng::derive(seed, static_cast<uint64_t>(i));
      std::string id = randomized.models[static_cast<size_t>(i)].model_id;
      randomized.models[static_cast<size_t>(i)] =
          randomize_weights(randomized.models[static_cast<size_t>(i)], rnd);
      randomized.models[static_cast<size_t>(i)].model_id = id;
    }
    EnsembleRun randomize_run = score_sets(std::move(randomized), split.train);

    std::printf(
        "  seed %llu: reco %.3f/%.3f mege %.3f/%.3f/%.3f acc-spread %.3f (%.0fs)\n",
        static_cast<unsigned long long>(seed), normal_run.reco_value, invert_run.reco_value,
        normal_run.mege_value, invert_run.mege_value, randomize_run.mege_value, hi - lo,
        seconds_since(start));

    if (normal_run.reco_value > invert_run.reco_value) ++reco_wins;
    sum_normal += normal_run.mege_value;
    sum_invert += invert_run.mege_value;
    sum_randomize += randomize_run.mege_value;
  }
  bool ok = sum_normal > sum_invert && sum_normal > sum_randomize && reco_wins >= 2;
  return ok && seconds_since(start) < 1800.0;
}

bool strict_mode_aborts() {
  LabeledDataset data = gen_shapes(150, 12, 2, 77);
  TrainTestSplit split = split_train_test(data, 0.2, 77);
  EnsembleConfig cfg;
  cfg.k = 3;
  cfg.train.epochs = 2;
  cfg.train.seed = 77;
  cfg.strict_accuracy = true;
  cfg.accuracy_tolerance = -1.0;  // any spread violates: forces the abort path
  try {
    train_ensemble(split.train, split.test, "flatten|dense:2", cfg);
  } catch (const ConfigError& e) {
    return std::string(e.what()).find("spread") != std::string::npos;
  }
  return false;
}

// --------------------------------------------------------------- criterion 10
bool determinism_and_formats() {
  RunConfig cfg;
  cfg.dataset.n = 300;
  cfg.dataset.size = 12;
  cfg.dataset.classes = 3;
  cfg.architecture = "conv:4:3|relu|avgpool:2|flatten|dense:3";
  cfg.ensemble.k = 3;
  cfg.ensemble.train.epochs = 3;
  cfg.seed = 21;
  cfg.metric_sample_limit = 6;

  RunResult a = evaluate_run(cfg);
  RunConfig reparsed = parse_run_config(run_config_to_json(cfg));
  RunResult b = evaluate_run(reparsed);
  if (report_to_json(a.report) != report_to_json(b.report)) {
    std::printf("  reports differ between reruns\n");
    return false;
  }

  // Archive round trip, bit-exact.
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "expeval_acceptance";
  fs::create_directories(dir);
  ExplanationArchive archive =
      ExplanationArchive::from_maps(a.explanations[0], a.ensemble.models[0].model_id, cfg.seed);
  std::string apath = (dir / "fold0.xta").string();
  write_archive(archive, apath);
  ExplanationArchive back = read_archive(apath);
  bool archive_ok = back.payload == archive.payload && back.sample_ids == archive.sample_ids &&
                    back.map_shape == archive.map_shape;

  // IDX byte-level fixture round trip.
  auto put_be32 = [](std::ofstream& out, uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(buf), 4);
  };
  std::string ipath = (dir / "img.idx").string();
  std::string lpath = (dir / "lab.idx").string();
  {
    std::ofstream img(ipath, std::ios::binary);
    put_be32(img, 0x00000803);
    put_be32(img, 2);
    put_be32(img, 3);
    put_be32(img, 3);
    for (int i = 0; i < 18; ++i) img.put(static_cast<char>(i * 14));
    std::ofstream lab(lpath, std::ios::binary);
    put_be32(lab, 0x00000801);
    put_be32(lab, 2);
    lab.put(4);
    lab.put(1);
  }
  LabeledDataset idx = load_idx(ipath, lpath);
  bool idx_ok = idx.size() == 2 && idx.labels == std::vector<int>{4, 1} &&
                idx.images.shape() == std::vector<int>{2, 1, 3, 3} &&
                idx.images[1] == 14.0 / 255.0 && idx.images[17] == (17 * 14) / 255.0;
  fs::remove_all(dir);
  return archive_ok && idx_ok;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    bool passed;
  };
  std::vector<Criterion> results;
  bool spread_ok = false;

  results.push_back({"1 gradient correctness (100 pairs vs central differences)",
                     gradient_correctness()});
  results.push_back({"2 integrated-gradients completeness (50 ReLU cases, m=60)",
                     ig_completeness()});
  results.push_back({"3 linear-model collapses (SM==SG, GI==IG, fidelity==1)",
                     linear_collapses()});
  results.push_back({"4 reco hand cases + 200-multiset brute-force agreement",
                     reco_enumeration()});
  results.push_back({"5 mirrored-distribution counterexample (KL/W1 blind, reco separates)",
                     appendix_counterexample()});
  results.push_back({"6 distance sanity suite (5 kinds spatial+noise, negative control)",
                     distance_sanity_suite()});
  results.push_back({"7 separation-set routing vs naive oracle (50 instances)",
                     algorithm1_oracle()});
  bool criterion8 = false;
  try {
    criterion8 = directional_degradation(spread_ok);
  } catch (const std::exception& e) {
    std::printf("  criterion 8 raised: %s\n", e.what());
  }
  results.push_back({"8 directional degradation (MeGe/reco fall with damage, 3 seeds)",
                     criterion8});
  results.push_back({"9 ensemble protocol (fold accuracy spread <= 3 pts, strict abort)",
                     spread_ok && strict_mode_aborts()});
  results.push_back({"10 determinism and formats (bit-exact rerun, archive+idx round trips)",
                     determinism_and_formats()});

  bool all = true;
  for (const Criterion& c : results) {
    std::printf("criterion %s: %s\n", c.name, c.passed ? "PASS" : "FAIL");
    all = all && c.passed;
  }
  return all ? 0 : 1;
}
