// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spamnet/campaigns.hpp"
#include "spamnet/features.hpp"
#include "spamnet/occ.hpp"

namespace spamnet {

struct TransferRecord {
    std::string user_id;
    int from_campaign = 0;
    int to_campaign = 0;
    std::size_t level = 0;
    double score = 0.0;
};

struct CampaignState {
    int campaign_id = 0;
    std::vector<std::string> users;  // sorted
    std::set<std::string> original_training;
    std::set<std::string> training_set;
    std::set<std::string> unknown_set;
    std::map<std::string, FeatureVector> features;

    std::optional<OneClassModel> model;
    std::optional<TrainConfig> model_config;  // grid point chosen for `model`
    std::optional<double> t_max;
    std::size_t fitted_on = 0;  // training_set size the model was fit on

    bool deferred() const { return training_set.size() < 2; }
    bool model_current() const { return model && fitted_on == training_set.size(); }
};

struct EnsembleState {
    std::size_t level = 0;
    std::vector<CampaignState> campaigns;  // ascending campaign_id
    std::vector<TransferRecord> log;
    std::vector<std::string> warnings;
    bool converged = false;
};

/// Hook that may add synthetic rows to a campaign's training matrix before
/// fitting (used for the oversampling comparison).
using TrainingAugmenter =
    std::function<std::vector<std::vector<double>>(int campaign_id, const std::vector<std::vector<double>>& rows)>;

struct FeedbackOptions {
    TrainConfig train;
    std::size_t folds = 3;
    /// 0 means "number of distinct users".
    std::size_t max_levels = 0;
    bool feedback = true;
    /// Standardize and draw grid-search background from all of the
    /// campaign's users rather than the training rows alone.
    bool population_reference = true;
    std::size_t workers = 1;
    TrainingAugmenter augment;
};

/// Level-0 state: training sets are the campaign spammers, everyone else is
/// unknown. Campaigns without spammers are dropped with a warning; campaigns
/// with a single spammer stay deferred until feedback gives them a second.
EnsembleState init(const std::vector<Campaign>& campaigns, const std::vector<FeatureVector>& feature_vectors);

/// One synchronous level: every trainable campaign fits on its level-start
/// training set, sets T_max to the highest training score, and selects
/// unknowns scoring at least T_max. Each selected user then joins the
/// training set of every other campaign where it is still unknown. Returns
/// the number of distinct cross-campaign additions.
std::pair<EnsembleState, std::size_t> run_level(const EnsembleState& state, const FeedbackOptions& opts);

/// Repeats run_level until a level adds nobody or max_levels is reached,
/// then refits any campaign whose training set changed after its last fit.
EnsembleState run_until_convergence(EnsembleState state, const FeedbackOptions& opts);

/// Fits (or refits) every trainable campaign whose model is stale.
void fit_models(EnsembleState& state, const FeedbackOptions& opts);

enum class PredictionSource { Training, Feedback, Predicted, Unscored };
std::string_view to_string(PredictionSource s);

struct Prediction {
    std::optional<int> campaign_id;  // nullopt: aggregate row across campaigns
    std::string user_id;
    std::optional<double> score;     // absent when no model covers the user
    bool spammer = false;
    PredictionSource source = PredictionSource::Unscored;
};

/// Per-campaign rows (campaign order, then user id) followed by one
/// aggregate row per user: maximum score, spammer if any campaign says so.
std::vector<Prediction> predict_all(const EnsembleState& state);

/// Aggregate rows only, keyed by user id.
std::map<std::string, Prediction> aggregate_predictions(const std::vector<Prediction>& predictions);

/// predictions.csv: campaign_id,user_id,score,label,source (aggregate rows
/// use campaign_id "all"; unscored rows leave score empty).
void write_predictions_csv(std::ostream& out, const std::vector<Prediction>& predictions);
void write_feedback_log_jsonl(std::ostream& out, const std::vector<TransferRecord>& log);

}  // namespace spamnet
