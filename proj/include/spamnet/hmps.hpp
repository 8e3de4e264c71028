// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "spamnet/hin.hpp"

namespace spamnet {

/// User-to-user path through token and campaign nodes. `nodes` holds node
/// ids (see CampaignTree::*_node_id); length() is the number of relations.
struct MetaPath {
    std::vector<std::string> nodes;

    std::size_t length() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    bool operator==(const MetaPath&) const = default;
};

struct PairScore {
    std::string user_a;
    std::string user_b;
    double value = 0.0;
    MetaPath witness_path;  // empty when no path exists
};

struct HmpsScore {
    int campaign_id = 0;
    std::string user_id;
    double value = 0.0;
};

struct ScoredPath {
    MetaPath path;
    double product = 0.0;
};

/// Max-product meta-path similarity between two users of one tree.
///
/// For every parent i of u and parent j of s: a shared parent contributes
/// W(u,i)·W(s,i); distinct parents contribute W(u,i)·W(s,j)·W(i,root)·W(j,root).
/// On equal values the length-2 path is kept as witness.
PairScore pair_score(const CampaignTree& tree, std::string_view u, std::string_view s);

/// Sum of pair_score(u, s) over the tree's spammers s, skipping s == u.
HmpsScore hmps(const CampaignTree& tree, std::string_view u);

/// Exhaustive depth-first enumeration of user-token-user and
/// user-token-root-token-user paths, with their weight products. Independent
/// of pair_score; used as its oracle.
std::vector<ScoredPath> enumerate_meta_paths(const CampaignTree& tree, std::string_view u, std::string_view s,
                                             std::size_t max_len = 4);

/// HMPS of every user in the tree, ordered by user id. Trees without
/// spammers score every user 0.
std::vector<HmpsScore> score_all(const CampaignTree& tree, std::size_t workers = 1);

std::vector<HmpsScore> score_trees(const std::vector<CampaignTree>& trees, std::size_t workers = 1);

/// scores.csv: campaign_id,user_id,hmps
void write_scores_csv(std::ostream& out, const std::vector<HmpsScore>& scores);
std::vector<HmpsScore> read_scores_csv(std::istream& in);

}  // namespace spamnet
