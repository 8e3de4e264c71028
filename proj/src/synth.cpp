// SPDX-License-Identifier: Apache-2.0
#include "spamnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "spamnet/common.hpp"

namespace spamnet {

namespace {

constexpr std::size_t kHashtagPool = 40;

// Letters only, so generated words never look like phone numbers.
std::string letters(std::size_t i, std::size_t width) {
    std::string s(width, 'a');
    for (std::size_t p = width; p-- > 0;) {
        s[p] = static_cast<char>('a' + i % 26);
        i /= 26;
    }
    return s;
}

std::string word(std::size_t i) { return "q" + letters(i, 3); }
std::string hashtag(std::size_t i) { return "h" + letters(i, 2); }

std::string phone(std::size_t campaign, std::size_t p) {
    std::string digits = std::to_string(1000000 + campaign * 100 + p);
    return "+1800" + digits;
}

std::string url(std::size_t campaign, std::size_t u) {
    return "http://" + letters(campaign, 3) + "-promo.example.com/" + letters(u, 2);
}

std::string timestamp(std::size_t i) {
    const std::size_t day = 1 + (i / 86400) % 28, sec = i % 86400;
    char buf[32];
    std::snprintf(buf, sizeof buf, "2014-03-%02zuT%02zu:%02zu:%02zuZ", day, sec / 3600, (sec / 60) % 60, sec % 60);
    return buf;
}

std::string user_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "u%05zu", i);
    return buf;
}

std::string tweet_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%07zu", i);
    return buf;
}

// Poisson draw by inversion; means here are small.
std::size_t poisson(Rng& rng, double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    double p = rng.uniform_open();
    std::size_t k = 0;
    while (p > limit) {
        p *= rng.uniform_open();
        ++k;
    }
    return k;
}

void check_fraction(double f, const char* name) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument(std::string("synth: ") + name + " must be in [0,1]");
}

}  // namespace

void SynthConfig::check() const {
    if (n_campaigns == 0 || users_per_campaign == 0 || phones_per_campaign == 0 || urls_per_campaign == 0 ||
        tweets_per_user == 0 || signature_size == 0 || words_per_tweet == 0) {
        throw std::invalid_argument("synth: counts must be positive");
    }
    check_fraction(overlap_fraction, "overlap_fraction");
    check_fraction(spammer_fraction, "spammer_fraction");
    check_fraction(overlap_spammer_fraction, "overlap_spammer_fraction");
    check_fraction(suspended_fraction, "suspended_fraction");
    check_fraction(annotated_fraction, "annotated_fraction");
    check_fraction(noise_word_rate, "noise_word_rate");
    check_fraction(spammer_affinity, "spammer_affinity");
    check_fraction(spammer_url_rate, "spammer_url_rate");
    check_fraction(benign_url_rate, "benign_url_rate");
    check_fraction(spammer_follow_affinity, "spammer_follow_affinity");
    if (spammer_volume < 1.0) throw std::invalid_argument("synth: spammer_volume must be >= 1");
    if (spammer_hashtags < 0.0 || benign_hashtags < 0.0) throw std::invalid_argument("synth: hashtag rates must be >= 0");
    if (vocab_size > 26 * 26 * 26) throw std::invalid_argument("synth: vocab_size above 17576");
    if (vocab_size <= n_campaigns * signature_size) {
        throw std::invalid_argument("synth: vocab_size too small for disjoint signatures plus noise words");
    }
    if (n_campaigns < 2 && overlap_fraction > 0.0) throw std::invalid_argument("synth: overlap needs two campaigns");
    if (n_campaigns * 100 + phones_per_campaign > 9000000) throw std::invalid_argument("synth: too many phones");
}

std::map<std::string, int> SynthTruth::phone_assignment() const {
    std::map<std::string, int> out;
    for (const auto& c : campaigns) {
        for (const auto& p : c.phones) out[p] = c.campaign_id;
    }
    return out;
}

std::string SynthTruth::to_json(const SynthConfig& cfg) const {
    nlohmann::ordered_json j;
    nlohmann::ordered_json c;
    c["n_campaigns"] = cfg.n_campaigns;
    c["users_per_campaign"] = cfg.users_per_campaign;
    c["phones_per_campaign"] = cfg.phones_per_campaign;
    c["urls_per_campaign"] = cfg.urls_per_campaign;
    c["tweets_per_user"] = cfg.tweets_per_user;
    c["overlap_fraction"] = cfg.overlap_fraction;
    c["spammer_fraction"] = cfg.spammer_fraction;
    c["overlap_spammer_fraction"] = cfg.overlap_spammer_fraction;
    c["suspended_fraction"] = cfg.suspended_fraction;
    c["annotated_fraction"] = cfg.annotated_fraction;
    c["vocab_size"] = cfg.vocab_size;
    c["signature_size"] = cfg.signature_size;
    c["words_per_tweet"] = cfg.words_per_tweet;
    c["noise_word_rate"] = cfg.noise_word_rate;
    c["spammer_affinity"] = cfg.spammer_affinity;
    c["spammer_volume"] = cfg.spammer_volume;
    c["spammer_url_rate"] = cfg.spammer_url_rate;
    c["benign_url_rate"] = cfg.benign_url_rate;
    c["spammer_hashtags"] = cfg.spammer_hashtags;
    c["benign_hashtags"] = cfg.benign_hashtags;
    c["spammer_follows"] = cfg.spammer_follows;
    c["benign_follows"] = cfg.benign_follows;
    c["spammer_follow_affinity"] = cfg.spammer_follow_affinity;
    c["seed"] = cfg.seed;
    j["config"] = std::move(c);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& pc : campaigns) {
        nlohmann::ordered_json e;
        e["campaign_id"] = pc.campaign_id;
        e["phones"] = pc.phones;
        e["urls"] = pc.urls;
        e["users"] = pc.users;
        e["signature"] = pc.signature;
        arr.push_back(std::move(e));
    }
    j["campaigns"] = std::move(arr);
    j["spammers"] = std::vector<std::string>(spammers.begin(), spammers.end());
    j["suspended"] = std::vector<std::string>(suspended.begin(), suspended.end());
    j["overlap_users"] = std::vector<std::string>(overlap_users.begin(), overlap_users.end());
    return j.dump(2);
}

SynthCorpus generate(const SynthConfig& cfg) {
    cfg.check();
    Rng rng(cfg.seed);
    const std::size_t C = cfg.n_campaigns;
    const std::size_t slots = C * cfg.users_per_campaign;
    const auto distinct = static_cast<std::size_t>(std::llround(static_cast<double>(slots) / (1.0 + cfg.overlap_fraction)));
    const std::size_t overlap = slots - distinct;
    if (overlap > distinct) throw std::invalid_argument("synth: overlap_fraction too large");

    // Overlap users 0..overlap-1 take two campaigns each; pairs rotate so
    // every campaign links to many others.
    std::vector<std::vector<std::size_t>> members(C);
    for (std::size_t j = 0; j < overlap; ++j) {
        const std::size_t a = j % C;
        const std::size_t b = (a + 1 + (j / C) % (C - 1)) % C;
        members[a].push_back(j);
        members[b].push_back(j);
    }
    std::size_t next_user = overlap;
    for (std::size_t c = 0; c < C; ++c) {
        if (members[c].size() > cfg.users_per_campaign) throw std::invalid_argument("synth: overlap_fraction too large");
        while (members[c].size() < cfg.users_per_campaign) members[c].push_back(next_user++);
    }
    if (next_user != distinct) throw std::logic_error("synth: slot accounting");

    std::vector<char> spammer(distinct, 0), suspended(distinct, 0);
    for (std::size_t u = 0; u < distinct; ++u) spammer[u] = rng.bernoulli(u < overlap ? cfg.overlap_spammer_fraction : cfg.spammer_fraction);
    for (std::size_t c = 0; c < C; ++c) {
        // Every campaign gets at least one spammer.
        if (std::none_of(members[c].begin(), members[c].end(), [&](std::size_t u) { return spammer[u] != 0; })) {
            spammer[members[c][rng.below(members[c].size())]] = 1;
        }
    }
    for (std::size_t u = 0; u < distinct; ++u) {
        if (spammer[u]) suspended[u] = rng.bernoulli(cfg.suspended_fraction);
    }
    for (std::size_t c = 0; c < C; ++c) {
        std::vector<std::size_t> spam;
        for (auto u : members[c]) {
            if (spammer[u]) spam.push_back(u);
        }
        if (std::none_of(spam.begin(), spam.end(), [&](std::size_t u) { return suspended[u] != 0; })) {
            suspended[spam[rng.below(spam.size())]] = 1;
        }
    }

    SynthCorpus out;
    // Signatures: a seeded permutation of the vocabulary, carved into blocks.
    std::vector<std::size_t> vocab(cfg.vocab_size);
    std::iota(vocab.begin(), vocab.end(), 0);
    rng.shuffle(vocab);
    const std::size_t noise_begin = C * cfg.signature_size;

    for (std::size_t c = 0; c < C; ++c) {
        PlantedCampaign pc;
        pc.campaign_id = static_cast<int>(c);
        for (std::size_t p = 0; p < cfg.phones_per_campaign; ++p) pc.phones.push_back(*normalize_phone(phone(c, p)));
        for (std::size_t p = 0; p < cfg.urls_per_campaign; ++p) pc.urls.push_back(*normalize_url(url(c, p)));
        for (std::size_t w = 0; w < cfg.signature_size; ++w) pc.signature.push_back(word(vocab[c * cfg.signature_size + w]));
        for (auto u : members[c]) pc.users.push_back(user_name(u));
        std::sort(pc.users.begin(), pc.users.end());
        out.truth.campaigns.push_back(std::move(pc));
    }

    const auto noise_words = static_cast<std::size_t>(std::llround(cfg.noise_word_rate * static_cast<double>(cfg.words_per_tweet)));
    const std::size_t sig_words = std::min(cfg.signature_size, cfg.words_per_tweet - std::min(noise_words, cfg.words_per_tweet));
    std::size_t tweet_no = 0;
    for (std::size_t c = 0; c < C; ++c) {
        const auto& pc = out.truth.campaigns[c];
        for (auto u : members[c]) {
            const bool spam = spammer[u] != 0;
            const std::size_t count = spam
                ? static_cast<std::size_t>(std::llround(cfg.spammer_volume * static_cast<double>(cfg.tweets_per_user)))
                : cfg.tweets_per_user;
            for (std::size_t t = 0; t < count; ++t) {
                TweetRecord tw;
                tw.tweet_id = tweet_name(tweet_no);
                tw.user_id = user_name(u);
                tw.created_at = timestamp(tweet_no);
                ++tweet_no;

                std::vector<std::size_t> sig(cfg.signature_size);
                std::iota(sig.begin(), sig.end(), 0);
                rng.shuffle(sig);
                std::vector<std::string> words;
                for (std::size_t w = 0; w < sig_words; ++w) words.push_back(pc.signature[sig[w]]);
                for (std::size_t w = 0; w < noise_words; ++w) {
                    words.push_back(word(vocab[noise_begin + rng.below(cfg.vocab_size - noise_begin)]));
                }
                rng.shuffle(words);

                const bool favoured = spam && rng.bernoulli(cfg.spammer_affinity);
                const std::size_t ph = favoured ? 0 : rng.below(pc.phones.size());
                tw.phones.push_back(pc.phones[ph]);
                std::string text;
                for (const auto& w : words) text += w + ' ';
                text += pc.phones[ph];
                if (rng.bernoulli(spam ? cfg.spammer_url_rate : cfg.benign_url_rate)) {
                    const std::size_t ui = favoured ? 0 : rng.below(pc.urls.size());
                    tw.urls.push_back(pc.urls[ui]);
                    text += ' ' + pc.urls[ui];
                }
                const std::size_t tags = poisson(rng, spam ? cfg.spammer_hashtags : cfg.benign_hashtags);
                for (std::size_t h = 0; h < tags; ++h) {
                    std::string tag = hashtag(rng.below(kHashtagPool));
                    if (std::find(tw.hashtags.begin(), tw.hashtags.end(), tag) != tw.hashtags.end()) continue;
                    text += " #" + tag;
                    tw.hashtags.push_back(std::move(tag));
                }
                tw.text = std::move(text);
                out.tweets.push_back(std::move(tw));
            }
        }
    }

    std::vector<std::size_t> spammer_ids;
    for (std::size_t u = 0; u < distinct; ++u) {
        if (spammer[u]) spammer_ids.push_back(u);
    }
    std::set<FollowerEdge> edges;
    for (std::size_t u = 0; u < distinct; ++u) {
        const std::size_t want = std::min(spammer[u] ? cfg.spammer_follows : cfg.benign_follows, distinct - 1);
        const bool ring = spammer[u] && spammer_ids.size() > want + 1;
        std::set<std::size_t> chosen;
        while (chosen.size() < want) {
            const std::size_t v = ring && rng.bernoulli(cfg.spammer_follow_affinity)
                                      ? spammer_ids[rng.below(spammer_ids.size())]
                                      : rng.below(distinct);
            if (v != u) chosen.insert(v);
        }
        for (auto v : chosen) edges.insert({user_name(u), user_name(v)});
    }
    out.edges.assign(edges.begin(), edges.end());

    std::map<std::string, std::pair<long long, long long>> degree;
    for (const auto& e : out.edges) {
        degree[e.followee].first++;
        degree[e.follower].second++;
    }
    for (std::size_t u = 0; u < distinct; ++u) {
        UserRecord r;
        r.user_id = user_name(u);
        r.followers_count = degree[r.user_id].first;
        r.friends_count = degree[r.user_id].second;
        r.suspended = suspended[u] != 0;
        if (!r.suspended && rng.bernoulli(cfg.annotated_fraction)) {
            r.annotated_label = spammer[u] ? AnnotatedLabel::Spammer : AnnotatedLabel::Benign;
        }
        if (spammer[u]) out.truth.spammers.insert(r.user_id);
        if (r.suspended) out.truth.suspended.insert(r.user_id);
        if (u < overlap) out.truth.overlap_users.insert(r.user_id);
        out.users.push_back(std::move(r));
    }
    return out;
}

void write_synth(const SynthCorpus& data, const SynthConfig& cfg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw Error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("tweets.jsonl");
        for (const auto& t : data.tweets) f << to_json_line(t) << '\n';
    }
    {
        auto f = open("users.jsonl");
        for (const auto& u : data.users) f << to_json_line(u) << '\n';
    }
    {
        auto f = open("edges.csv");
        f << "follower,followee\n";
        for (const auto& e : data.edges) f << e.follower << ',' << e.followee << '\n';
    }
    {
        auto f = open("truth.json");
        f << data.truth.to_json(cfg) << '\n';
    }
}

}  // namespace spamnet
