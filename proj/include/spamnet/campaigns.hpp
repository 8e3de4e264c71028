// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spamnet/corpus.hpp"

namespace spamnet {

/// Unigram extraction rule shared by campaign signatures and word counts.
///
/// Text is split on whitespace. Each piece is lowercased (ASCII) and stripped
/// of ASCII punctuation; empty results are dropped. Pieces that look like
/// URLs (contain "://") are skipped when `skip_urls` is set. No stemming and
/// no stopword removal.
struct TokenizerOptions {
    bool lowercase = true;
    bool strip_punctuation = true;
    bool skip_urls = true;
};

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& opts = {});

struct ClusteringParams {
    std::size_t top_k = 30;
    std::size_t min_common = 5;
    double jaccard_threshold = 0.7;
    TokenizerOptions tokenizer;

    /// Throws std::invalid_argument unless top_k >= min_common >= 1 and the
    /// threshold lies in (0, 1].
    void check() const;
};

struct PhoneDocument {
    std::string phone;
    std::vector<std::string> tweet_ids;  // retained tweets, corpus order
    std::set<std::string> signature;
};

struct Campaign {
    int campaign_id = 0;
    std::set<std::string> phones;
    std::set<std::string> tweet_ids;
    std::set<std::string> users;
    std::set<std::string> urls;
    std::set<std::string> spammers;
};

/// |a ∩ b| / |a ∪ b|, and 1.0 when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// One document per phone: top-k unigram signature (raw token counts, ties
/// broken lexicographically) and the tweets sharing at least min_common
/// unigrams with it.
std::vector<PhoneDocument> build_phone_documents(const Corpus& corpus, const ClusteringParams& params,
                                                 std::size_t workers = 1);

/// Single-link merging: documents whose signatures have Jaccard strictly
/// above the threshold end up in the same campaign. Campaign ids follow the
/// order (-|users|, smallest phone).
std::vector<Campaign> merge_into_campaigns(const std::vector<PhoneDocument>& docs,
                                           const ClusteringParams& params, const Corpus& corpus,
                                           std::size_t workers = 1);

std::vector<Campaign> filter_campaigns_with_spammers(const std::vector<Campaign>& campaigns);

/// Replaces each campaign's spammer set with `known ∩ users`.
std::vector<Campaign> relabel_spammers(const std::vector<Campaign>& campaigns,
                                       const std::set<std::string>& known);

/// Suspended users of the corpus.
std::set<std::string> suspended_users(const Corpus& corpus);

/// Mean silhouette of the documents under distance 1 - jaccard(signatures),
/// clustered by the campaign holding each document's phone. Singleton
/// clusters contribute 0.
double silhouette_check(const std::vector<PhoneDocument>& docs, const std::vector<Campaign>& campaigns);

/// Steps 1-5 in one call (no spammer filtering).
std::vector<Campaign> identify_campaigns(const Corpus& corpus, const ClusteringParams& params,
                                         std::size_t workers = 1);

/// campaigns.jsonl: campaign_id, phones, users, urls, tweet_count,
/// spammer_count, plus tweet_ids so later stages can rebuild from the file.
void write_campaigns_jsonl(std::ostream& out, const std::vector<Campaign>& campaigns);
/// Reads campaigns.jsonl; spammers are recomputed from the corpus.
std::vector<Campaign> read_campaigns_jsonl(std::istream& in, const Corpus& corpus);

}  // namespace spamnet
