// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spamnet/campaigns.hpp"
#include "spamnet/corpus.hpp"

namespace spamnet {

enum class NodeKind { User, Phone, Url, CampaignNode };

std::string_view to_string(NodeKind kind);

/// Action token (phone or URL) as it appears inside one campaign.
struct TokenRef {
    NodeKind kind = NodeKind::Phone;
    std::string value;

    auto operator<=>(const TokenRef&) const = default;
};

/// Weighted edge from a user or the campaign root to a token node.
struct TokenEdge {
    std::size_t token = 0;  // index into CampaignTree::tokens()
    double weight = 0.0;
};

struct UserEdge {
    std::size_t user = 0;  // index into CampaignTree::users()
    double weight = 0.0;
};

struct TreeUser {
    std::string user_id;
    std::vector<TokenEdge> parents;  // ascending token index
};

struct TreeToken {
    TokenRef ref;
    double root_weight = 0.0;       // W(Camp, token)
    std::vector<UserEdge> children;  // ascending user index
};

/// Per-campaign hierarchy: campaign root, token intermediates, user leaves.
///
/// Users are sorted by id; tokens are phones (sorted) followed by URLs
/// (sorted). Every user-token weight is that user's share of the token's
/// tweets in the campaign, and every token-root weight is the token's share
/// of all tweet-token incidences in the campaign.
class CampaignTree {
public:
    /// user_token_counts[u] lists (token index, tweet count) pairs. Counts
    /// must be positive; each token needs at least one user.
    static CampaignTree from_counts(int campaign_id, std::vector<std::string> users,
                                    std::vector<TokenRef> tokens,
                                    const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& user_token_counts,
                                    const std::set<std::string>& spammers);

    int campaign_id() const { return campaign_id_; }
    const std::vector<TreeUser>& users() const { return users_; }
    const std::vector<TreeToken>& tokens() const { return tokens_; }
    const std::set<std::string>& spammers() const { return spammers_; }

    std::optional<std::size_t> user_index(std::string_view user_id) const;
    std::optional<std::size_t> token_index(const TokenRef& ref) const;
    /// W(user, token), or 0 when the user never used the token.
    double user_token_weight(std::size_t user, std::size_t token) const;
    bool is_spammer(std::size_t user) const { return spammers_.contains(users_[user].user_id); }

    /// Same structure with a different spammer set (restricted to tree users).
    CampaignTree with_spammers(const std::set<std::string>& spammers) const;

    std::string user_node_id(std::size_t user) const;
    std::string token_node_id(std::size_t token) const;
    std::string root_node_id() const;

    /// Debug dump: nodes with kinds and weighted edges.
    void write_json(std::ostream& out) const;

private:
    int campaign_id_ = 0;
    std::vector<TreeUser> users_;
    std::vector<TreeToken> tokens_;
    std::set<std::string> spammers_;
};

/// count(user's campaign tweets containing token) / count(campaign tweets
/// containing token).
double weight_user_token(const Corpus& corpus, const Campaign& campaign, std::string_view user_id,
                         const TokenRef& token);

/// count(campaign tweets containing token) / total tweet-token incidences of
/// the campaign.
double weight_campaign_token(const Corpus& corpus, const Campaign& campaign, const TokenRef& token);

CampaignTree build_tree(const Corpus& corpus, const Campaign& campaign);

std::vector<CampaignTree> build_trees(const Corpus& corpus, const std::vector<Campaign>& campaigns,
                                      std::size_t workers = 1);

}  // namespace spamnet
