// SPDX-License-Identifier: Apache-2.0
#include "spamnet/hmps.hpp"

#include <functional>
#include <sstream>

#include "spamnet/common.hpp"

namespace spamnet {

namespace {

std::size_t require_user(const CampaignTree& tree, std::string_view id) {
    auto idx = tree.user_index(id);
    if (!idx) {
        throw Error("user " + std::string(id) + " is not in campaign " + std::to_string(tree.campaign_id()));
    }
    return *idx;
}

}  // namespace

PairScore pair_score(const CampaignTree& tree, std::string_view u, std::string_view s) {
    if (u == s) throw Error("self-similarity undefined for user " + std::string(u));
    const auto ui = require_user(tree, u);
    const auto si = require_user(tree, s);

    PairScore out{std::string(u), std::string(s), 0.0, {}};
    const auto& tokens = tree.tokens();
    bool have = false;
    bool witness_short = false;
    std::size_t best_i = 0, best_j = 0;
    for (const auto& pi : tree.users()[ui].parents) {
        for (const auto& pj : tree.users()[si].parents) {
            const bool shared = pi.token == pj.token;
            // grouped so that swapping u and s gives the bitwise same product
            const double leaves = pi.weight * pj.weight;
            const double candidate =
                shared ? leaves : leaves * (tokens[pi.token].root_weight * tokens[pj.token].root_weight);
            const bool better = !have || candidate > out.value ||
                                (candidate == out.value && shared && !witness_short);
            if (better) {
                have = true;
                out.value = candidate;
                witness_short = shared;
                best_i = pi.token;
                best_j = pj.token;
            }
        }
    }
    if (have) {
        auto& nodes = out.witness_path.nodes;
        nodes.push_back(tree.user_node_id(ui));
        nodes.push_back(tree.token_node_id(best_i));
        if (!witness_short) {
            nodes.push_back(tree.root_node_id());
            nodes.push_back(tree.token_node_id(best_j));
        }
        nodes.push_back(tree.user_node_id(si));
    }
    return out;
}

HmpsScore hmps(const CampaignTree& tree, std::string_view u) {
    if (tree.spammers().empty()) {
        throw Error("campaign " + std::to_string(tree.campaign_id()) + " has no known spammers");
    }
    require_user(tree, u);
    HmpsScore out{tree.campaign_id(), std::string(u), 0.0};
    for (const auto& s : tree.spammers()) {
        if (s == u) continue;
        out.value += pair_score(tree, u, s).value;
    }
    return out;
}

std::vector<ScoredPath> enumerate_meta_paths(const CampaignTree& tree, std::string_view u, std::string_view s,
                                             std::size_t max_len) {
    if (u == s) throw Error("self-similarity undefined for user " + std::string(u));
    const auto ui = require_user(tree, u);
    const auto si = require_user(tree, s);

    // Generic typed graph: users [0, U), tokens [U, U+T), root U+T.
    const std::size_t n_users = tree.users().size();
    const std::size_t n_tokens = tree.tokens().size();
    const std::size_t root = n_users + n_tokens;
    struct Edge {
        std::size_t to;
        double w;
    };
    std::vector<std::vector<Edge>> adj(root + 1);
    for (std::size_t t = 0; t < n_tokens; ++t) {
        const auto& tok = tree.tokens()[t];
        adj[n_users + t].push_back({root, tok.root_weight});
        adj[root].push_back({n_users + t, tok.root_weight});
        for (const auto& c : tok.children) {
            adj[n_users + t].push_back({c.user, c.weight});
            adj[c.user].push_back({n_users + t, c.weight});
        }
    }
    auto node_id = [&](std::size_t v) {
        if (v < n_users) return tree.user_node_id(v);
        if (v < root) return tree.token_node_id(v - n_users);
        return tree.root_node_id();
    };

    std::vector<ScoredPath> out;
    std::vector<std::size_t> stack{ui};
    std::vector<char> on_path(root + 1, 0);
    on_path[ui] = 1;
    std::function<void(std::size_t, double)> walk = [&](std::size_t v, double product) {
        if (stack.size() - 1 >= max_len) return;
        for (const auto& e : adj[v]) {
            if (on_path[e.to]) continue;
            const double p = product * e.w;
            if (e.to == si) {
                ScoredPath sp;
                for (auto x : stack) sp.path.nodes.push_back(node_id(x));
                sp.path.nodes.push_back(node_id(si));
                sp.product = p;
                out.push_back(std::move(sp));
                continue;
            }
            if (e.to < n_users) continue;  // intermediates must be tokens or the root
            on_path[e.to] = 1;
            stack.push_back(e.to);
            walk(e.to, p);
            stack.pop_back();
            on_path[e.to] = 0;
        }
    };
    walk(ui, 1.0);
    return out;
}

std::vector<HmpsScore> score_all(const CampaignTree& tree, std::size_t workers) {
    const auto& users = tree.users();
    std::vector<HmpsScore> out(users.size());
    parallel_for(users.size(), workers, [&](std::size_t i) {
        if (tree.spammers().empty()) {
            out[i] = {tree.campaign_id(), users[i].user_id, 0.0};
        } else {
            out[i] = hmps(tree, users[i].user_id);
        }
    });
    return out;
}

std::vector<HmpsScore> score_trees(const std::vector<CampaignTree>& trees, std::size_t workers) {
    std::vector<std::vector<HmpsScore>> per_tree(trees.size());
    parallel_for(trees.size(), workers, [&](std::size_t i) { per_tree[i] = score_all(trees[i]); });
    std::vector<HmpsScore> out;
    for (auto& v : per_tree) out.insert(out.end(), v.begin(), v.end());
    return out;
}

void write_scores_csv(std::ostream& out, const std::vector<HmpsScore>& scores) {
    out << "campaign_id,user_id,hmps\n";
    for (const auto& s : scores) out << s.campaign_id << ',' << s.user_id << ',' << format_double(s.value) << '\n';
}

std::vector<HmpsScore> read_scores_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("campaign_id,user_id,hmps", 0) != 0) {
        throw DataError("scores: expected header campaign_id,user_id,hmps");
    }
    std::vector<HmpsScore> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cid, uid, val;
        if (!std::getline(ss, cid, ',') || !std::getline(ss, uid, ',') || !std::getline(ss, val)) {
            throw DataError("scores line " + std::to_string(line_no) + ": expected 3 columns");
        }
        try {
            out.push_back({std::stoi(cid), uid, parse_double(val)});
        } catch (const std::exception& e) {
            throw DataError("scores line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace spamnet
