// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spamnet/campaigns.hpp"
#include "spamnet/corpus.hpp"
#include "spamnet/hmps.hpp"

namespace spamnet {

enum class FeatureMode { Hmps, HmpsOsn2 };

std::string_view to_string(FeatureMode mode);
/// Accepts "hmps" and "hmps+osn2" (case-insensitive, '_' for '+'); throws
/// std::invalid_argument otherwise.
FeatureMode parse_feature_mode(std::string_view s);

struct FeatureVector {
    int campaign_id = 0;
    std::string user_id;
    std::vector<double> values;
    bool standardized = false;
};

struct HubAuthority {
    double hub = 0.0;
    double authority = 0.0;
};

using HitsScores = std::map<std::string, HubAuthority>;

/// Mutual-reinforcement power iteration on the follower graph (follower ->
/// followee), L2-normalizing both vectors every step. Starts from hub = 1.
/// Stops once neither vector moves more than `tol` (max-abs) or after
/// `iters` steps. Users absent from the edge list are not in the map.
HitsScores hits_scores(const std::vector<FollowerEdge>& edges, std::size_t iters = 1000, double tol = 1e-12);

struct Osn2Features {
    double authority = 0.0;
    double hub = 0.0;
    double frac_tweets_with_urls = 0.0;
    double avg_urls_per_tweet = 0.0;
    double avg_urls_per_word = 0.0;
    double avg_hashtags_per_word = 0.0;
    double avg_hashtags_per_tweet = 0.0;

    std::vector<double> as_vector() const;
};

/// Ratios over all of the user's tweets. Zero denominators give 0.
Osn2Features osn2_features(const Corpus& corpus, std::string_view user_id, const HitsScores& hits,
                           const TokenizerOptions& tokenizer = {});

struct FeatureOptions {
    FeatureMode mode = FeatureMode::HmpsOsn2;
    std::size_t hits_iters = 1000;
    double hits_tol = 1e-12;
    TokenizerOptions tokenizer;
};

/// Column names for a mode: "hmps" then the OSN2 columns.
std::vector<std::string> feature_names(FeatureMode mode);

/// One raw (unstandardized) vector per HMPS score, same order.
std::vector<FeatureVector> assemble(const std::vector<HmpsScore>& tree_scores, const Corpus& corpus,
                                    const FeatureOptions& opts, std::size_t workers = 1);
/// Same, reusing HITS scores computed by the caller (ignored in hmps mode).
std::vector<FeatureVector> assemble(const std::vector<HmpsScore>& tree_scores, const Corpus& corpus,
                                    const FeatureOptions& opts, const HitsScores& hits, std::size_t workers = 1);

/// Per-column z-scoring with statistics from a training set. Columns with
/// zero spread keep scale 1.
class Standardizer {
public:
    Standardizer() = default;
    Standardizer(std::vector<double> mean, std::vector<double> scale);

    static Standardizer fit(std::span<const std::vector<double>> rows);

    std::vector<double> apply(std::span<const double> x) const;
    FeatureVector apply(const FeatureVector& v) const;

    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& scale() const { return scale_; }
    std::size_t dim() const { return mean_.size(); }

private:
    std::vector<double> mean_;
    std::vector<double> scale_;
};

/// features.csv: campaign_id,user_id,<feature columns>
void write_features_csv(std::ostream& out, const std::vector<FeatureVector>& vectors,
                        const std::vector<std::string>& names);
std::vector<FeatureVector> read_features_csv(std::istream& in, std::vector<std::string>* names = nullptr);

}  // namespace spamnet
