// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spamnet/campaigns.hpp"
#include "spamnet/corpus.hpp"
#include "spamnet/features.hpp"
#include "spamnet/feedback.hpp"
#include "spamnet/hin.hpp"

namespace spamnet {

// ---- metrics ---------------------------------------------------------------

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

enum class Setting { Setting1, Setting2 };
std::string_view to_string(Setting s);

struct MetricsReport {
    Setting setting = Setting::Setting2;
    std::string config;  // free-form description of the run
    double precision = 0.0;  // 0 when nothing was predicted positive
    double recall = 0.0;     // 0 when there are no positives
    double f1 = 0.0;         // 0 when precision + recall is 0
    std::optional<double> auc;
    double accuracy = 0.0;
    ConfusionCounts counts;
    std::size_t runs = 1;  // folds or repeats averaged into this report

    std::string to_json() const;
};

/// Counts from parallel label/prediction vectors (true = spammer).
ConfusionCounts confusion(const std::vector<bool>& truth, const std::vector<bool>& predicted);

/// Rank-statistic AUC with ties counted half; absent unless both classes
/// occur. Scores may be -inf (ranked lowest).
std::optional<double> auc(const std::vector<std::pair<double, bool>>& scores_with_labels);

MetricsReport metrics(const ConfusionCounts& counts, const std::vector<std::pair<double, bool>>& scores_with_labels);

// ---- SMOTE -----------------------------------------------------------------

struct SmoteSample {
    std::vector<double> values;
    std::size_t parent = 0;
    std::size_t neighbor = 0;
    double gap = 0.0;  // interpolation coefficient in (0, 1)
};

/// round(ratio·n) synthetic points. The t-th point takes its parent from a
/// seeded permutation (cycled), and a uniformly chosen one of the parent's k
/// nearest neighbours (Euclidean, ties by index). Throws
/// std::invalid_argument when n <= k, k == 0, or ratio < 0.
std::vector<SmoteSample> smote_detailed(std::span<const std::vector<double>> rows, double ratio, std::size_t k,
                                        std::uint64_t seed);

/// Training rows followed by their synthetic points.
std::vector<std::vector<double>> smote(std::span<const std::vector<double>> rows, double ratio, std::size_t k,
                                       std::uint64_t seed);

/// FeatureVector form; synthetic vectors get user ids "smote:<index>" and the
/// campaign id of their parent.
std::vector<FeatureVector> smote(const std::vector<FeatureVector>& training, double ratio, std::size_t k,
                                 std::uint64_t seed);

// ---- pipeline ----------------------------------------------------------------

struct SmoteOptions {
    double ratio = 0.0;
    std::size_t k = 5;
    /// Oversample from all labeled spammers, held-out ones included. This
    /// leaks test points into training and exists only for comparison.
    bool before_split = false;
};

struct PipelineConfig {
    FeatureOptions features;
    FeedbackOptions feedback;
    std::optional<SmoteOptions> smote;
    std::uint64_t seed = 7;
};

/// Spammer-independent pieces of the pipeline, computed once per corpus.
struct PipelineInputs {
    const Corpus* corpus = nullptr;
    std::vector<Campaign> campaigns;  // unfiltered
    std::vector<CampaignTree> trees;  // same order as campaigns
    HitsScores hits;
};

PipelineInputs prepare_inputs(const Corpus& corpus, std::vector<Campaign> campaigns, const PipelineConfig& cfg,
                              std::size_t workers = 1);

struct PipelineResult {
    std::vector<Campaign> campaigns;  // relabelled and filtered
    std::vector<HmpsScore> scores;
    std::vector<FeatureVector> features;
    EnsembleState state;
    std::vector<Prediction> predictions;
};

/// HMPS against `known_spammers`, feature assembly, then the feedback loop.
/// `leak` holds extra spammers used only as SMOTE parents in before-split
/// mode.
PipelineResult run_pipeline(const PipelineInputs& inputs, const std::set<std::string>& known_spammers,
                            const PipelineConfig& cfg, std::size_t workers = 1,
                            const std::set<std::string>& leak = {});

// ---- experimental settings -------------------------------------------------

/// Suspended users that appear in at least one campaign.
std::vector<std::string> setting1_universe(const PipelineInputs& inputs);

struct Setting1Result {
    MetricsReport report;
    std::vector<std::pair<std::string, bool>> recovered;  // held-out user, hit
};

/// Leave-one-out over suspended users: each one is removed from the known
/// spammers, the pipeline reruns, and a hit is an aggregate spammer label.
/// Folds run in parallel.
Setting1Result setting1_loo(const PipelineInputs& inputs, const PipelineConfig& cfg, std::size_t workers = 1);

/// Repeated stratified holdout over annotated users in campaigns. Known
/// spammers for each repeat are suspended users plus training-split
/// annotated spammers, minus the test split. Reports are averaged; AUC over
/// the repeats where it is defined.
MetricsReport setting2_holdout(const PipelineInputs& inputs, const PipelineConfig& cfg, double holdout_frac,
                               std::size_t repeats, std::size_t workers = 1);

struct AblationRow {
    std::string variant;              // feedback | no_feedback | smote | smote_before_split
    std::optional<double> smote_ratio;
    MetricsReport report;
};

inline constexpr double kSmoteRatios[] = {0.20, 0.30, 0.50, 0.75, 1.0};

/// Feedback, no feedback, and SMOTE (no feedback) at every ratio, all under
/// setting 2 with identical features and grids. `before_split` adds the
/// leakage-prone SMOTE rows.
std::vector<AblationRow> ablation_suite(const PipelineInputs& inputs, const PipelineConfig& cfg, double holdout_frac,
                                        std::size_t repeats, std::size_t workers = 1, bool before_split = false);

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);
std::string ablation_json(const std::vector<AblationRow>& rows);

}  // namespace spamnet
