// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "spamnet/campaigns.hpp"
#include "spamnet/eval.hpp"
#include "spamnet/features.hpp"
#include "spamnet/occ.hpp"

namespace spamnet {

/// Every knob of a run, serializable as `key = value` lines.
///
/// Text format: one `key = value` per line, `#` starts a comment, blank
/// lines are ignored. Lists (nu_grid, gamma_grid, kernel_grid) are comma
/// separated. Unknown keys are rejected.
struct RunConfig {
    ClusteringParams clustering;
    TrainConfig train;
    FeatureMode mode = FeatureMode::HmpsOsn2;
    std::size_t max_levels = 0;  // 0: number of distinct users
    std::uint64_t seed = 7;
    std::size_t workers = 1;
    std::size_t folds = 3;
    bool feedback = true;
    bool population_reference = true;
    double holdout = 0.2;
    std::size_t repeats = 50;
    std::size_t smote_k = 5;
    std::map<std::string, std::string> paths;  // io paths, written as path.<name>

    /// Sets one key. Throws std::invalid_argument on unknown keys or values
    /// that do not parse.
    void set(std::string_view key, std::string_view value);
    /// Applies every line of a config text on top of the current values.
    void apply_text(std::string_view text);
    std::string to_text() const;

    /// Throws std::invalid_argument when any value is out of range.
    void check() const;

    PipelineConfig pipeline() const;
};

}  // namespace spamnet
