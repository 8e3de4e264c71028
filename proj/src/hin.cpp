// SPDX-License-Identifier: Apache-2.0
#include "spamnet/hin.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "spamnet/common.hpp"

namespace spamnet {

namespace {

std::vector<TokenRef> tokens_of(const TweetRecord& t) {
    std::vector<TokenRef> out;
    for (const auto& p : t.phones) out.push_back({NodeKind::Phone, p});
    for (const auto& u : t.urls) out.push_back({NodeKind::Url, u});
    return out;
}

bool contains_token(const TweetRecord& t, const TokenRef& ref) {
    const auto& list = ref.kind == NodeKind::Phone ? t.phones : t.urls;
    return std::find(list.begin(), list.end(), ref.value) != list.end();
}

}  // namespace

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::User: return "user";
        case NodeKind::Phone: return "phone";
        case NodeKind::Url: return "url";
        case NodeKind::CampaignNode: return "campaign";
    }
    return "?";
}

CampaignTree CampaignTree::from_counts(
    int campaign_id, std::vector<std::string> users, std::vector<TokenRef> tokens,
    const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& user_token_counts,
    const std::set<std::string>& spammers) {
    if (users.size() != user_token_counts.size()) throw Error("tree: one count list per user required");
    if (users.empty() || tokens.empty()) throw Error("tree: campaign has no users or tokens");

    std::vector<std::size_t> token_total(tokens.size(), 0);
    for (const auto& row : user_token_counts) {
        for (const auto& [t, n] : row) {
            if (t >= tokens.size()) throw Error("tree: token index out of range");
            if (n == 0) throw Error("tree: user-token counts must be positive");
            token_total[t] += n;
        }
    }
    std::size_t grand_total = 0;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (token_total[t] == 0) throw Error("tree: token " + tokens[t].value + " has no users");
        grand_total += token_total[t];
    }

    CampaignTree tree;
    tree.campaign_id_ = campaign_id;
    tree.tokens_.resize(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        tree.tokens_[t].ref = std::move(tokens[t]);
        tree.tokens_[t].root_weight = static_cast<double>(token_total[t]) / static_cast<double>(grand_total);
    }
    tree.users_.resize(users.size());
    for (std::size_t u = 0; u < users.size(); ++u) {
        auto& node = tree.users_[u];
        node.user_id = std::move(users[u]);
        if (user_token_counts[u].empty()) throw Error("tree: user " + node.user_id + " has no tokens");
        std::map<std::size_t, std::size_t> merged;
        for (const auto& [t, n] : user_token_counts[u]) merged[t] += n;
        for (const auto& [t, n] : merged) {
            const double w = static_cast<double>(n) / static_cast<double>(token_total[t]);
            node.parents.push_back({t, w});
            tree.tokens_[t].children.push_back({u, w});
        }
    }
    for (std::size_t u = 1; u < tree.users_.size(); ++u) {
        if (!(tree.users_[u - 1].user_id < tree.users_[u].user_id)) {
            throw Error("tree: users must be unique and sorted");
        }
    }
    for (const auto& s : spammers) {
        if (tree.user_index(s)) tree.spammers_.insert(s);
    }
    return tree;
}

std::optional<std::size_t> CampaignTree::user_index(std::string_view user_id) const {
    auto it = std::lower_bound(users_.begin(), users_.end(), user_id,
                               [](const TreeUser& a, std::string_view b) { return a.user_id < b; });
    if (it == users_.end() || it->user_id != user_id) return std::nullopt;
    return static_cast<std::size_t>(it - users_.begin());
}

std::optional<std::size_t> CampaignTree::token_index(const TokenRef& ref) const {
    for (std::size_t t = 0; t < tokens_.size(); ++t) {
        if (tokens_[t].ref == ref) return t;
    }
    return std::nullopt;
}

double CampaignTree::user_token_weight(std::size_t user, std::size_t token) const {
    for (const auto& e : users_[user].parents) {
        if (e.token == token) return e.weight;
    }
    return 0.0;
}

CampaignTree CampaignTree::with_spammers(const std::set<std::string>& spammers) const {
    CampaignTree copy = *this;
    copy.spammers_.clear();
    for (const auto& s : spammers) {
        if (user_index(s)) copy.spammers_.insert(s);
    }
    return copy;
}

std::string CampaignTree::user_node_id(std::size_t user) const { return "user:" + users_[user].user_id; }

std::string CampaignTree::token_node_id(std::size_t token) const {
    return std::string(to_string(tokens_[token].ref.kind)) + ":" + tokens_[token].ref.value;
}

std::string CampaignTree::root_node_id() const { return "campaign:" + std::to_string(campaign_id_); }

void CampaignTree::write_json(std::ostream& out) const {
    using json = nlohmann::ordered_json;
    json doc;
    doc["campaign_id"] = campaign_id_;
    json nodes = json::array();
    nodes.push_back({{"id", root_node_id()}, {"kind", "campaign"}});
    for (std::size_t t = 0; t < tokens_.size(); ++t) {
        nodes.push_back({{"id", token_node_id(t)}, {"kind", std::string(to_string(tokens_[t].ref.kind))}});
    }
    for (std::size_t u = 0; u < users_.size(); ++u) {
        json n = {{"id", user_node_id(u)}, {"kind", "user"}, {"spammer", is_spammer(u)}};
        nodes.push_back(std::move(n));
    }
    doc["nodes"] = std::move(nodes);
    json edges = json::array();
    for (std::size_t t = 0; t < tokens_.size(); ++t) {
        edges.push_back({{"from", token_node_id(t)}, {"to", root_node_id()}, {"weight", tokens_[t].root_weight}});
    }
    for (std::size_t u = 0; u < users_.size(); ++u) {
        for (const auto& e : users_[u].parents) {
            edges.push_back({{"from", user_node_id(u)}, {"to", token_node_id(e.token)}, {"weight", e.weight}});
        }
    }
    doc["edges"] = std::move(edges);
    out << doc.dump(2) << '\n';
}

double weight_user_token(const Corpus& corpus, const Campaign& campaign, std::string_view user_id,
                         const TokenRef& token) {
    std::size_t mine = 0;
    std::size_t all = 0;
    for (const auto& tid : campaign.tweet_ids) {
        const auto& t = corpus.tweet(tid);
        if (!contains_token(t, token)) continue;
        ++all;
        if (t.user_id == user_id) ++mine;
    }
    if (all == 0) throw Error("token " + token.value + " occurs in no campaign tweet");
    return static_cast<double>(mine) / static_cast<double>(all);
}

double weight_campaign_token(const Corpus& corpus, const Campaign& campaign, const TokenRef& token) {
    std::size_t mine = 0;
    std::size_t all = 0;
    for (const auto& tid : campaign.tweet_ids) {
        const auto& t = corpus.tweet(tid);
        for (const auto& ref : tokens_of(t)) {
            ++all;
            if (ref == token) ++mine;
        }
    }
    if (all == 0) throw Error("campaign " + std::to_string(campaign.campaign_id) + " has no tokens");
    return static_cast<double>(mine) / static_cast<double>(all);
}

CampaignTree build_tree(const Corpus& corpus, const Campaign& campaign) {
    if (campaign.tweet_ids.empty()) {
        throw Error("campaign " + std::to_string(campaign.campaign_id) + " has no tweets");
    }
    std::map<std::string, std::map<TokenRef, std::size_t>> counts;
    std::set<TokenRef> used;
    for (const auto& tid : campaign.tweet_ids) {
        const auto& t = corpus.tweet(tid);
        for (auto& ref : tokens_of(t)) {
            ++counts[t.user_id][ref];
            used.insert(std::move(ref));
        }
    }
    // NodeKind::Phone sorts before NodeKind::Url, so phones come first.
    std::vector<TokenRef> tokens(used.begin(), used.end());
    std::map<TokenRef, std::size_t> token_pos;
    for (std::size_t i = 0; i < tokens.size(); ++i) token_pos[tokens[i]] = i;

    std::vector<std::string> users;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rows;
    for (const auto& [user, per_token] : counts) {
        users.push_back(user);
        auto& row = rows.emplace_back();
        for (const auto& [ref, n] : per_token) row.emplace_back(token_pos[ref], n);
    }
    return CampaignTree::from_counts(campaign.campaign_id, std::move(users), std::move(tokens), rows,
                                     campaign.spammers);
}

std::vector<CampaignTree> build_trees(const Corpus& corpus, const std::vector<Campaign>& campaigns,
                                      std::size_t workers) {
    std::vector<std::optional<CampaignTree>> slots(campaigns.size());
    parallel_for(campaigns.size(), workers, [&](std::size_t i) { slots[i] = build_tree(corpus, campaigns[i]); });
    std::vector<CampaignTree> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace spamnet
