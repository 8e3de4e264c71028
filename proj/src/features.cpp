// SPDX-License-Identifier: Apache-2.0
#include "spamnet/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spamnet/common.hpp"

namespace spamnet {

namespace {

void l2_normalize(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    if (s <= 0.0) return;
    const double norm = std::sqrt(s);
    for (double& x : v) x /= norm;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string_view to_string(FeatureMode mode) {
    return mode == FeatureMode::Hmps ? "hmps" : "hmps+osn2";
}

FeatureMode parse_feature_mode(std::string_view s) {
    std::string norm;
    for (char c : s) norm.push_back(c == '_' ? '+' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (norm == "hmps") return FeatureMode::Hmps;
    if (norm == "hmps+osn2") return FeatureMode::HmpsOsn2;
    throw std::invalid_argument("unknown feature mode '" + std::string(s) + "'");
}

HitsScores hits_scores(const std::vector<FollowerEdge>& edges, std::size_t iters, double tol) {
    std::map<std::string, std::size_t> index;
    for (const auto& e : edges) {
        index.emplace(e.follower, 0);
        index.emplace(e.followee, 0);
    }
    std::vector<std::string> names;
    for (auto& [name, pos] : index) {
        pos = names.size();
        names.push_back(name);
    }
    std::vector<std::pair<std::size_t, std::size_t>> links;
    links.reserve(edges.size());
    for (const auto& e : edges) links.emplace_back(index[e.follower], index[e.followee]);

    const std::size_t n = names.size();
    std::vector<double> hub(n, 1.0), auth(n, 0.0);
    for (std::size_t it = 0; it < iters; ++it) {
        std::vector<double> next_auth(n, 0.0), next_hub(n, 0.0);
        for (const auto& [from, to] : links) next_auth[to] += hub[from];
        l2_normalize(next_auth);
        for (const auto& [from, to] : links) next_hub[from] += next_auth[to];
        l2_normalize(next_hub);
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            delta = std::max({delta, std::abs(next_auth[i] - auth[i]), std::abs(next_hub[i] - hub[i])});
        }
        auth = std::move(next_auth);
        hub = std::move(next_hub);
        if (delta <= tol) break;
    }
    HitsScores out;
    for (std::size_t i = 0; i < n; ++i) out[names[i]] = {hub[i], auth[i]};
    return out;
}

std::vector<double> Osn2Features::as_vector() const {
    return {authority,         hub,
            frac_tweets_with_urls, avg_urls_per_tweet,
            avg_urls_per_word,     avg_hashtags_per_word,
            avg_hashtags_per_tweet};
}

Osn2Features osn2_features(const Corpus& corpus, std::string_view user_id, const HitsScores& hits,
                           const TokenizerOptions& tokenizer) {
    Osn2Features f;
    if (auto it = hits.find(std::string(user_id)); it != hits.end()) {
        f.authority = it->second.authority;
        f.hub = it->second.hub;
    }
    const auto& positions = corpus.tweets_of(user_id);
    double tweets = 0, with_urls = 0, urls = 0, hashtags = 0, words = 0;
    for (auto pos : positions) {
        const auto& t = corpus.tweets()[pos];
        tweets += 1;
        if (!t.urls.empty()) with_urls += 1;
        urls += static_cast<double>(t.urls.size());
        hashtags += static_cast<double>(t.hashtags.size());
        words += static_cast<double>(tokenize(t.text, tokenizer).size());
    }
    f.frac_tweets_with_urls = ratio(with_urls, tweets);
    f.avg_urls_per_tweet = ratio(urls, tweets);
    f.avg_urls_per_word = ratio(urls, words);
    f.avg_hashtags_per_word = ratio(hashtags, words);
    f.avg_hashtags_per_tweet = ratio(hashtags, tweets);
    return f;
}

std::vector<std::string> feature_names(FeatureMode mode) {
    std::vector<std::string> names{"hmps"};
    if (mode == FeatureMode::HmpsOsn2) {
        for (const char* n : {"authority", "hub", "frac_tweets_with_urls", "avg_urls_per_tweet",
                              "avg_urls_per_word", "avg_hashtags_per_word", "avg_hashtags_per_tweet"}) {
            names.emplace_back(n);
        }
    }
    return names;
}

std::vector<FeatureVector> assemble(const std::vector<HmpsScore>& tree_scores, const Corpus& corpus,
                                    const FeatureOptions& opts, std::size_t workers) {
    if (opts.mode != FeatureMode::Hmps && opts.mode != FeatureMode::HmpsOsn2) {
        throw std::invalid_argument("unknown feature mode");
    }
    HitsScores hits;
    if (opts.mode == FeatureMode::HmpsOsn2) hits = hits_scores(corpus.follower_edges(), opts.hits_iters, opts.hits_tol);
    return assemble(tree_scores, corpus, opts, hits, workers);
}

std::vector<FeatureVector> assemble(const std::vector<HmpsScore>& tree_scores, const Corpus& corpus,
                                    const FeatureOptions& opts, const HitsScores& hits, std::size_t workers) {
    if (opts.mode != FeatureMode::Hmps && opts.mode != FeatureMode::HmpsOsn2) {
        throw std::invalid_argument("unknown feature mode");
    }
    std::vector<FeatureVector> out(tree_scores.size());
    parallel_for(tree_scores.size(), workers, [&](std::size_t i) {
        const auto& s = tree_scores[i];
        FeatureVector v{s.campaign_id, s.user_id, {s.value}, false};
        if (opts.mode == FeatureMode::HmpsOsn2) {
            auto osn2 = osn2_features(corpus, s.user_id, hits, opts.tokenizer).as_vector();
            v.values.insert(v.values.end(), osn2.begin(), osn2.end());
        }
        for (double x : v.values) {
            if (!std::isfinite(x)) throw Error("non-finite feature for user " + s.user_id);
        }
        out[i] = std::move(v);
    });
    return out;
}

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
    if (mean_.size() != scale_.size()) throw std::invalid_argument("standardizer: dimension mismatch");
}

Standardizer Standardizer::fit(std::span<const std::vector<double>> rows) {
    if (rows.empty()) throw std::invalid_argument("standardizer: no rows");
    const std::size_t d = rows.front().size();
    std::vector<double> mean(d, 0.0), scale(d, 0.0);
    for (const auto& r : rows) {
        if (r.size() != d) throw std::invalid_argument("standardizer: ragged rows");
        for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    }
    const double n = static_cast<double>(rows.size());
    for (auto& m : mean) m /= n;
    for (const auto& r : rows) {
        for (std::size_t j = 0; j < d; ++j) scale[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        scale[j] = std::sqrt(scale[j] / n);
        // Relative cutoff: sums of equal values can leave rounding residue.
        if (!(scale[j] > 1e-12 * std::max(1.0, std::abs(mean[j])))) scale[j] = 1.0;
    }
    return Standardizer(std::move(mean), std::move(scale));
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    if (x.size() != mean_.size()) throw std::invalid_argument("standardizer: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean_[j]) / scale_[j];
    return out;
}

FeatureVector Standardizer::apply(const FeatureVector& v) const {
    FeatureVector out = v;
    out.values = apply(std::span<const double>(v.values));
    out.standardized = true;
    return out;
}

void write_features_csv(std::ostream& out, const std::vector<FeatureVector>& vectors,
                        const std::vector<std::string>& names) {
    out << "campaign_id,user_id";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (const auto& v : vectors) {
        if (v.values.size() != names.size()) throw Error("features: vector width does not match header");
        out << v.campaign_id << ',' << v.user_id;
        for (double x : v.values) out << ',' << format_double(x);
        out << '\n';
    }
}

std::vector<FeatureVector> read_features_csv(std::istream& in, std::vector<std::string>* names) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("features: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "campaign_id" || header[1] != "user_id") {
        throw DataError("features: expected header campaign_id,user_id,...");
    }
    if (names) names->assign(header.begin() + 2, header.end());
    std::vector<FeatureVector> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw DataError("features line " + std::to_string(line_no) + ": wrong column count");
        }
        FeatureVector v;
        try {
            v.campaign_id = std::stoi(cells[0]);
            v.user_id = cells[1];
            for (std::size_t j = 2; j < cells.size(); ++j) v.values.push_back(parse_double(cells[j]));
        } catch (const std::exception& e) {
            throw DataError("features line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace spamnet
