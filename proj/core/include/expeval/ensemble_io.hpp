#pragma once

#include <string>

#include "expeval/config.hpp"
#include "expeval/cross_training.hpp"

namespace expeval {

/// Writes manifest.json plus one model container per fold into `dir`.
/// The manifest records the block partition, per-fold accuracies, and the
/// full RunConfig (including any degradation spec) for provenance.
void save_ensemble(const FoldEnsemble& ensemble, const RunConfig& config,
                   const std::string& dir);

struct LoadedEnsemble {
  FoldEnsemble ensemble;
  RunConfig config;
};

LoadedEnsemble load_ensemble(const std::string& dir);

}  // namespace expeval
