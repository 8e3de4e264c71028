// SPDX-License-Identifier: Apache-2.0
// Fixture builders and independent oracles shared by the unit tests. The
// oracles are written from the definitions, not from the library code.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spamnet/campaigns.hpp"
#include "spamnet/common.hpp"
#include "spamnet/corpus.hpp"
#include "spamnet/hin.hpp"

namespace spamnet::testing {

inline TweetRecord tweet(std::string id, std::string user, std::string text, std::vector<std::string> phones = {},
                         std::vector<std::string> urls = {}, std::vector<std::string> hashtags = {}) {
    TweetRecord t;
    t.tweet_id = std::move(id);
    t.user_id = std::move(user);
    t.text = std::move(text);
    t.created_at = "2014-03-01T00:00:00Z";
    t.phones = std::move(phones);
    t.urls = std::move(urls);
    t.hashtags = std::move(hashtags);
    return t;
}

inline UserRecord user(std::string id, bool suspended = false) {
    UserRecord u;
    u.user_id = std::move(id);
    u.suspended = suspended;
    return u;
}

// Random campaign tree with at most `max_nodes` nodes (users + tokens + root).
inline CampaignTree random_tree(std::uint64_t seed, std::size_t max_nodes = 60) {
    Rng rng(seed);
    const std::size_t n_tokens = 1 + rng.below(std::min<std::size_t>(12, max_nodes / 3));
    const std::size_t n_users = 2 + rng.below(max_nodes - 2 - n_tokens);
    std::vector<std::string> users;
    for (std::size_t i = 0; i < n_users; ++i) users.push_back("u" + std::to_string(100 + i));
    std::vector<TokenRef> tokens;
    for (std::size_t t = 0; t < n_tokens; ++t) {
        tokens.push_back({rng.bernoulli(0.5) ? NodeKind::Phone : NodeKind::Url, "k" + std::to_string(t)});
    }
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> counts(n_users);
    std::vector<bool> used(n_tokens, false);
    for (std::size_t i = 0; i < n_users; ++i) {
        std::set<std::size_t> mine;
        const std::size_t k = 1 + rng.below(std::min<std::size_t>(3, n_tokens));
        while (mine.size() < k) mine.insert(rng.below(n_tokens));
        for (auto t : mine) {
            counts[i].emplace_back(t, 1 + rng.below(4));
            used[t] = true;
        }
    }
    // every token needs a user
    for (std::size_t t = 0; t < n_tokens; ++t) {
        if (!used[t]) counts[rng.below(n_users)].emplace_back(t, 1);
    }
    for (auto& row : counts) {
        std::sort(row.begin(), row.end());
        // merge duplicate token entries added above
        std::vector<std::pair<std::size_t, std::size_t>> merged;
        for (const auto& e : row) {
            if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
            else merged.push_back(e);
        }
        row = std::move(merged);
    }
    std::set<std::string> spammers;
    for (const auto& u : users) {
        if (rng.bernoulli(0.3)) spammers.insert(u);
    }
    if (spammers.empty()) spammers.insert(users[rng.below(n_users)]);
    return CampaignTree::from_counts(static_cast<int>(seed % 1000), users, tokens, counts, spammers);
}

// Brute-force max-product over simple paths of length <= 4 whose interior
// nodes are not users, computed on the tree's serialized JSON form.
class OracleTree {
public:
    explicit OracleTree(const CampaignTree& tree) {
        std::ostringstream os;
        tree.write_json(os);
        const auto doc = nlohmann::json::parse(os.str());
        for (const auto& n : doc["nodes"]) kind_[n["id"]] = n["kind"];
        for (const auto& e : doc["edges"]) {
            adj_[e["from"]].emplace_back(e["to"], e["weight"]);
            adj_[e["to"]].emplace_back(e["from"], e["weight"]);
        }
    }

    double pair_score(const std::string& u, const std::string& s) const {
        const std::string src = "user:" + u, dst = "user:" + s;
        double best = 0.0;
        std::set<std::string> seen{src};
        std::function<void(const std::string&, double, int)> dfs = [&](const std::string& v, double p, int len) {
            if (len == 4) return;
            auto it = adj_.find(v);
            if (it == adj_.end()) return;
            for (const auto& [w, wt] : it->second) {
                if (seen.count(w)) continue;
                if (w == dst) {
                    best = std::max(best, p * wt);
                    continue;
                }
                if (kind_.at(w) == "user") continue;
                seen.insert(w);
                dfs(w, p * wt, len + 1);
                seen.erase(w);
            }
        };
        dfs(src, 1.0, 0);
        return best;
    }

private:
    std::map<std::string, std::string> kind_;
    std::map<std::string, std::vector<std::pair<std::string, double>>> adj_;
};

inline double oracle_pair_score(const CampaignTree& tree, const std::string& u, const std::string& s) {
    return OracleTree(tree).pair_score(u, s);
}

// HITS by dense power iteration on A^T A from the all-ones hub start.
inline std::map<std::string, std::pair<double, double>> oracle_hits(const std::vector<FollowerEdge>& edges) {
    std::set<std::string> names_set;
    for (const auto& e : edges) {
        names_set.insert(e.follower);
        names_set.insert(e.followee);
    }
    std::vector<std::string> names(names_set.begin(), names_set.end());
    const std::size_t n = names.size();
    auto pos = [&](const std::string& x) {
        return static_cast<std::size_t>(std::lower_bound(names.begin(), names.end(), x) - names.begin());
    };
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (const auto& e : edges) A[pos(e.follower)][pos(e.followee)] = 1.0;
    auto normalize = [](std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        s = std::sqrt(s);
        if (s > 0) for (double& x : v) x /= s;
    };
    auto mul_t = [&](const std::vector<double>& h) {
        std::vector<double> a(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a[j] += A[i][j] * h[i];
        return a;
    };
    auto mul = [&](const std::vector<double>& a) {
        std::vector<double> h(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) h[i] += A[i][j] * a[j];
        return h;
    };
    std::vector<double> hub(n, 1.0), auth;
    for (int it = 0; it < 200000; ++it) {
        auto a = mul_t(hub);
        normalize(a);
        auto h = mul(a);
        normalize(h);
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(h[i] - hub[i]));
        hub = h;
        auth = a;
        if (d < 1e-15) break;
    }
    std::map<std::string, std::pair<double, double>> out;
    for (std::size_t i = 0; i < n; ++i) out[names[i]] = {hub[i], auth[i]};
    return out;
}

// Adjusted Rand Index by pair counting.
template <typename L1, typename L2>
double adjusted_rand_index(const std::vector<L1>& a, const std::vector<L2>& b) {
    const std::size_t n = a.size();
    std::map<std::pair<L1, L2>, double> joint;
    std::map<L1, double> ra;
    std::map<L2, double> rb;
    for (std::size_t i = 0; i < n; ++i) {
        joint[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    auto c2 = [](double x) { return x * (x - 1) / 2.0; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, v] : joint) sum_ij += c2(v);
    for (const auto& [k, v] : ra) sum_a += c2(v);
    for (const auto& [k, v] : rb) sum_b += c2(v);
    const double expected = sum_a * sum_b / c2(static_cast<double>(n));
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_ij - expected) / (max_index - expected);
}

// Mean silhouette with distance 1 - Jaccard, straight from the definition.
inline double oracle_silhouette(const std::vector<std::set<std::string>>& docs, const std::vector<int>& labels) {
    auto dist = [&](std::size_t i, std::size_t j) {
        std::size_t inter = 0;
        for (const auto& w : docs[i]) inter += docs[j].count(w);
        const double uni = static_cast<double>(docs[i].size() + docs[j].size() - inter);
        return uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / uni;
    };
    const std::size_t n = docs.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::map<int, std::vector<double>> d;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d[labels[j]].push_back(dist(i, j));
        if (!d.count(labels[i])) continue;
        auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
        const double a = mean(d[labels[i]]);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [l, v] : d)
            if (l != labels[i]) b = std::min(b, mean(v));
        const double m = std::max(a, b);
        total += m > 0 ? (b - a) / m : 0.0;
    }
    return total / n;
}

// min 1/2 a'Qa  s.t. 0 <= a <= 1, sum a = total, by projected gradient with
// bisection projection. Returns alpha.
inline std::vector<double> oracle_box_simplex_qp(const std::vector<double>& q, std::size_t n, double total,
                                                 std::size_t iters = 200000) {
    auto project = [&](std::vector<double> v) {
        double lo = -1e6, hi = 1e6;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            double s = 0.0;
            for (double x : v) s += std::clamp(x - mid, 0.0, 1.0);
            if (s > total) lo = mid;
            else hi = mid;
        }
        const double t = 0.5 * (lo + hi);
        for (double& x : v) x = std::clamp(x - t, 0.0, 1.0);
        return v;
    };
    double lmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += std::abs(q[i * n + j]);
        lmax = std::max(lmax, row);
    }
    const double step = 1.0 / std::max(lmax, 1e-12);
    std::vector<double> a(n, total / static_cast<double>(n));
    for (std::size_t it = 0; it < iters; ++it) {
        std::vector<double> g(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) g[i] += q[i * n + j] * a[j];
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = a[i] - step * g[i];
        next = project(next);
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(next[i] - a[i]));
        a = std::move(next);
        if (d < 1e-13) break;
    }
    return a;
}

inline double quad_objective(const std::vector<double>& q, std::size_t n, const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s += a[i] * q[i * n + j] * a[j];
    return 0.5 * s;
}

}  // namespace spamnet::testing
