// SPDX-License-Identifier: Apache-2.0
#include "spamnet/campaigns.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "spamnet/common.hpp"

namespace spamnet {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& opts) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j == i) break;
        std::string_view piece = text.substr(i, j - i);
        i = j;
        if (opts.skip_urls && piece.find("://") != std::string_view::npos) continue;
        std::string tok;
        tok.reserve(piece.size());
        for (char c : piece) {
            const auto uc = static_cast<unsigned char>(c);
            if (opts.strip_punctuation && uc < 0x80 && std::ispunct(uc)) continue;
            tok.push_back(opts.lowercase && uc < 0x80 ? static_cast<char>(std::tolower(uc)) : c);
        }
        if (!tok.empty()) out.push_back(std::move(tok));
    }
    return out;
}

void ClusteringParams::check() const {
    if (min_common < 1 || top_k < min_common) {
        throw std::invalid_argument("clustering params require top_k >= min_common >= 1");
    }
    if (!(jaccard_threshold > 0.0 && jaccard_threshold <= 1.0)) {
        throw std::invalid_argument("jaccard_threshold must lie in (0, 1]");
    }
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t common = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

std::vector<PhoneDocument> build_phone_documents(const Corpus& corpus, const ClusteringParams& params,
                                                 std::size_t workers) {
    params.check();
    const auto& index = corpus.phone_index();
    std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> entries;
    for (const auto& kv : index) entries.push_back(&kv);

    std::vector<PhoneDocument> docs(entries.size());
    parallel_for(entries.size(), workers, [&](std::size_t d) {
        const auto& [phone, positions] = *entries[d];
        std::vector<std::vector<std::string>> unigrams;
        unigrams.reserve(positions.size());
        std::map<std::string, std::size_t> counts;
        for (auto pos : positions) {
            unigrams.push_back(tokenize(corpus.tweets()[pos].text, params.tokenizer));
            for (const auto& u : unigrams.back()) ++counts[u];
        }
        std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
        // map order is lexicographic; stable sort keeps that order within a count.
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        PhoneDocument doc;
        doc.phone = phone;
        for (std::size_t k = 0; k < ranked.size() && k < params.top_k; ++k) doc.signature.insert(ranked[k].first);
        for (std::size_t t = 0; t < positions.size(); ++t) {
            std::set<std::string> distinct(unigrams[t].begin(), unigrams[t].end());
            std::size_t shared = 0;
            for (const auto& u : distinct) shared += doc.signature.count(u);
            if (shared >= params.min_common) doc.tweet_ids.push_back(corpus.tweets()[positions[t]].tweet_id);
        }
        docs[d] = std::move(doc);
    });
    return docs;
}

std::vector<Campaign> merge_into_campaigns(const std::vector<PhoneDocument>& docs,
                                           const ClusteringParams& params, const Corpus& corpus,
                                           std::size_t workers) {
    params.check();
    const std::size_t n = docs.size();

    // Any pair above a positive threshold shares at least one unigram, so an
    // inverted index bounds the candidate pairs.
    std::map<std::string, std::vector<std::size_t>> postings;
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& u : docs[i].signature) postings[u].push_back(i);
    }
    std::vector<std::vector<std::size_t>> neighbours(n);
    parallel_for(n, workers, [&](std::size_t i) {
        std::set<std::size_t> candidates;
        for (const auto& u : docs[i].signature) {
            for (auto j : postings[u]) {
                if (j > i) candidates.insert(j);
            }
        }
        for (auto j : candidates) {
            if (jaccard(docs[i].signature, docs[j].signature) > params.jaccard_threshold) {
                neighbours[i].push_back(j);
            }
        }
    });
    // Empty signatures match each other (jaccard 1.0) but share no postings.
    std::vector<std::size_t> empties;
    for (std::size_t i = 0; i < n; ++i) {
        if (docs[i].signature.empty()) empties.push_back(i);
    }
    DisjointSets sets(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto j : neighbours[i]) sets.unite(i, j);
    }
    for (std::size_t k = 1; k < empties.size(); ++k) sets.unite(empties[0], empties[k]);

    std::map<std::size_t, Campaign> by_root;
    for (std::size_t i = 0; i < n; ++i) {
        auto& c = by_root[sets.find(i)];
        c.phones.insert(docs[i].phone);
        for (const auto& tid : docs[i].tweet_ids) {
            const auto& t = corpus.tweet(tid);
            c.tweet_ids.insert(tid);
            c.users.insert(t.user_id);
            c.urls.insert(t.urls.begin(), t.urls.end());
        }
    }
    std::vector<Campaign> out;
    out.reserve(by_root.size());
    for (auto& [root, c] : by_root) {
        for (const auto& u : c.users) {
            if (corpus.user(u).suspended) c.spammers.insert(u);
        }
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const Campaign& a, const Campaign& b) {
        if (a.users.size() != b.users.size()) return a.users.size() > b.users.size();
        return *a.phones.begin() < *b.phones.begin();
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].campaign_id = static_cast<int>(i);
    return out;
}

std::vector<Campaign> filter_campaigns_with_spammers(const std::vector<Campaign>& campaigns) {
    std::vector<Campaign> out;
    std::copy_if(campaigns.begin(), campaigns.end(), std::back_inserter(out),
                 [](const Campaign& c) { return !c.spammers.empty(); });
    return out;
}

std::vector<Campaign> relabel_spammers(const std::vector<Campaign>& campaigns,
                                       const std::set<std::string>& known) {
    std::vector<Campaign> out = campaigns;
    for (auto& c : out) {
        c.spammers.clear();
        for (const auto& u : c.users) {
            if (known.contains(u)) c.spammers.insert(u);
        }
    }
    return out;
}

std::set<std::string> suspended_users(const Corpus& corpus) {
    std::set<std::string> out;
    for (const auto& u : corpus.users()) {
        if (u.suspended) out.insert(u.user_id);
    }
    return out;
}

double silhouette_check(const std::vector<PhoneDocument>& docs, const std::vector<Campaign>& campaigns) {
    std::map<std::string, std::size_t> label_of;
    for (std::size_t c = 0; c < campaigns.size(); ++c) {
        for (const auto& p : campaigns[c].phones) label_of[p] = c;
    }
    std::vector<std::size_t> labels;
    std::set<std::size_t> distinct;
    for (const auto& d : docs) {
        auto it = label_of.find(d.phone);
        if (it == label_of.end()) throw Error("silhouette: phone " + d.phone + " has no campaign");
        labels.push_back(it->second);
        distinct.insert(it->second);
    }
    if (distinct.size() < 2) throw Error("silhouette undefined for fewer than 2 campaigns");

    const std::size_t n = docs.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::map<std::size_t, std::pair<double, std::size_t>> sums;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            auto& s = sums[labels[j]];
            s.first += 1.0 - jaccard(docs[i].signature, docs[j].signature);
            s.second += 1;
        }
        auto own = sums.find(labels[i]);
        if (own == sums.end()) continue;  // singleton cluster: s(i) = 0
        const double a = own->second.first / static_cast<double>(own->second.second);
        double b = INFINITY;
        for (const auto& [label, s] : sums) {
            if (label != labels[i]) b = std::min(b, s.first / static_cast<double>(s.second));
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

std::vector<Campaign> identify_campaigns(const Corpus& corpus, const ClusteringParams& params,
                                         std::size_t workers) {
    return merge_into_campaigns(build_phone_documents(corpus, params, workers), params, corpus, workers);
}

void write_campaigns_jsonl(std::ostream& out, const std::vector<Campaign>& campaigns) {
    using json = nlohmann::ordered_json;
    for (const auto& c : campaigns) {
        json obj;
        obj["campaign_id"] = c.campaign_id;
        obj["phones"] = c.phones;
        obj["users"] = c.users;
        obj["urls"] = c.urls;
        obj["tweet_count"] = c.tweet_ids.size();
        obj["spammer_count"] = c.spammers.size();
        obj["tweet_ids"] = c.tweet_ids;
        out << obj.dump() << '\n';
    }
}

std::vector<Campaign> read_campaigns_jsonl(std::istream& in, const Corpus& corpus) {
    using json = nlohmann::json;
    std::vector<Campaign> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        try {
            auto obj = json::parse(line);
            Campaign c;
            c.campaign_id = obj.at("campaign_id").get<int>();
            for (const auto& p : obj.at("phones")) c.phones.insert(p.get<std::string>());
            for (const auto& u : obj.at("urls")) c.urls.insert(u.get<std::string>());
            for (const auto& t : obj.at("tweet_ids")) {
                const auto& tweet = corpus.tweet(t.get<std::string>());
                c.tweet_ids.insert(tweet.tweet_id);
                c.users.insert(tweet.user_id);
            }
            for (const auto& u : c.users) {
                if (corpus.user(u).suspended) c.spammers.insert(u);
            }
            out.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw DataError("campaigns line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw DataError("campaigns line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace spamnet
