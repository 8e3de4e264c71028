// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "spamnet/corpus.hpp"

namespace spamnet {

/// Planted-campaign generator settings.
///
/// Each campaign owns a disjoint unigram signature, its own phones and URLs,
/// and a set of user slots. A fraction of distinct users fill slots in two
/// campaigns. Spammers post more, favour the campaign's first phone and URL,
/// attach more URLs and hashtags, and follow more accounts.
struct SynthConfig {
    std::size_t n_campaigns = 20;
    std::size_t users_per_campaign = 50;
    std::size_t phones_per_campaign = 3;
    std::size_t urls_per_campaign = 2;
    std::size_t tweets_per_user = 4;
    double overlap_fraction = 0.21;  // distinct users present in two campaigns
    double spammer_fraction = 0.3;          // of single-campaign users
    double overlap_spammer_fraction = 0.7;  // of users spanning two campaigns
    double suspended_fraction = 0.15;  // of spammers; at least one per campaign
    double annotated_fraction = 0.3;   // of non-suspended users
    std::size_t vocab_size = 2000;
    std::size_t signature_size = 30;
    std::size_t words_per_tweet = 12;
    double noise_word_rate = 0.25;  // share of each tweet's words drawn outside the signature
    double spammer_affinity = 0.7;  // chance a spammer tweet uses the first phone/URL
    double spammer_volume = 2.0;    // tweet multiplier for spammers
    double spammer_url_rate = 0.8;
    double benign_url_rate = 0.3;
    double spammer_hashtags = 1.5;  // mean hashtags per tweet
    double benign_hashtags = 0.3;
    std::size_t spammer_follows = 12;
    std::size_t benign_follows = 4;
    double spammer_follow_affinity = 0.5;  // chance a spammer follow targets another spammer
    std::uint64_t seed = 7;

    /// Throws std::invalid_argument on non-positive counts, fractions
    /// outside [0,1], or a vocabulary too small for disjoint signatures.
    void check() const;
};

struct PlantedCampaign {
    int campaign_id = 0;
    std::vector<std::string> phones;  // normalized
    std::vector<std::string> urls;    // normalized
    std::vector<std::string> users;   // sorted
    std::vector<std::string> signature;
};

struct SynthTruth {
    std::vector<PlantedCampaign> campaigns;
    std::set<std::string> spammers;
    std::set<std::string> suspended;
    std::set<std::string> overlap_users;

    /// Planted campaign index of every phone.
    std::map<std::string, int> phone_assignment() const;
    std::string to_json(const SynthConfig& cfg) const;
};

struct SynthCorpus {
    std::vector<TweetRecord> tweets;
    std::vector<UserRecord> users;
    std::vector<FollowerEdge> edges;
    SynthTruth truth;

    Corpus corpus() const { return Corpus(tweets, users, edges); }
};

SynthCorpus generate(const SynthConfig& cfg);

/// tweets.jsonl, users.jsonl, edges.csv, truth.json under `dir` (created).
void write_synth(const SynthCorpus& data, const SynthConfig& cfg, const std::filesystem::path& dir);

}  // namespace spamnet
