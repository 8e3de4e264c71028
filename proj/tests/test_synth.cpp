// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spamnet/campaigns.hpp"
#include "spamnet/synth.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace spamnet;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::map<std::string, int> campaigns_per_user(const SynthTruth& t) {
    std::map<std::string, int> n;
    for (const auto& c : t.campaigns)
        for (const auto& u : c.users) n[u] += 1;
    return n;
}

}  // namespace

TEST(Synth, NoOverlapMeansOneCampaignEach) {
    SynthConfig sc;
    sc.overlap_fraction = 0.0;
    sc.n_campaigns = 5;
    sc.users_per_campaign = 20;
    auto data = generate(sc);
    for (const auto& [u, n] : campaigns_per_user(data.truth)) EXPECT_EQ(n, 1) << u;
    EXPECT_TRUE(data.truth.overlap_users.empty());
}

TEST(Synth, ByteIdenticalRerun) {
    SynthConfig sc;
    sc.n_campaigns = 4;
    sc.users_per_campaign = 12;
    auto base = fs::temp_directory_path() / "spamnet_synth_rerun";
    fs::remove_all(base);
    write_synth(generate(sc), sc, base / "a");
    write_synth(generate(sc), sc, base / "b");
    for (const char* f : {"tweets.jsonl", "users.jsonl", "edges.csv", "truth.json"}) {
        EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
        EXPECT_FALSE(slurp(base / "a" / f).empty()) << f;
    }
    // and the files load back as a clean corpus
    auto c = load_corpus(base / "a" / "tweets.jsonl", base / "a" / "users.jsonl", base / "a" / "edges.csv");
    EXPECT_TRUE(c.warnings().empty());
    sc.seed = 8;
    write_synth(generate(sc), sc, base / "c");
    EXPECT_NE(slurp(base / "a" / "tweets.jsonl"), slurp(base / "c" / "tweets.jsonl"));
}

TEST(Synth, ValidCorpusWithoutWarnings) {
    auto data = generate(SynthConfig{});
    auto c = data.corpus();
    EXPECT_TRUE(c.warnings().empty());
    EXPECT_NO_THROW(c.validate());
    for (const auto& u : data.truth.suspended) EXPECT_TRUE(data.truth.spammers.contains(u));
    for (const auto& camp : data.truth.campaigns) {
        bool any = false;
        for (const auto& u : camp.users) any = any || data.truth.suspended.contains(u);
        EXPECT_TRUE(any) << "campaign " << camp.campaign_id << " has no suspended user";
    }
}

TEST(Synth, RealizedOverlapNearTarget) {
    SynthConfig sc;
    sc.n_campaigns = 30;
    sc.users_per_campaign = 50;
    auto data = generate(sc);
    const auto per_user = campaigns_per_user(data.truth);
    ASSERT_GE(per_user.size(), 1000u);
    std::size_t multi = 0;
    for (const auto& [u, n] : per_user) multi += n >= 2;
    const double realized = static_cast<double>(multi) / per_user.size();
    EXPECT_NEAR(realized, sc.overlap_fraction, 0.03);
}

TEST(Synth, PlantedSignaturesDistinctAndAffinity) {
    auto data = generate(SynthConfig{});
    std::set<std::string> seen;
    for (const auto& c : data.truth.campaigns) {
        for (const auto& w : c.signature) EXPECT_TRUE(seen.insert(w).second) << w;
    }
    // spammers share the lead phone more often than benign users do
    auto corpus = data.corpus();
    double sp_hits = 0, sp_total = 0, bn_hits = 0, bn_total = 0;
    const auto assignment = data.truth.phone_assignment();
    for (const auto& t : corpus.tweets()) {
        if (t.phones.empty()) continue;
        const int cid = assignment.at(t.phones[0]);
        const bool lead = t.phones[0] == data.truth.campaigns[cid].phones[0];
        if (data.truth.spammers.contains(t.user_id)) {
            sp_total += 1;
            sp_hits += lead;
        } else {
            bn_total += 1;
            bn_hits += lead;
        }
    }
    EXPECT_GT(sp_hits / sp_total, bn_hits / bn_total);
}

TEST(Synth, CampaignRecoveryAdjustedRand) {
    auto data = generate(SynthConfig{});
    auto corpus = data.corpus();
    auto campaigns = identify_campaigns(corpus, ClusteringParams{});
    std::map<std::string, int> found;
    for (const auto& c : campaigns)
        for (const auto& p : c.phones) found[p] = c.campaign_id;
    std::vector<int> truth_labels, found_labels;
    for (const auto& [phone, cid] : data.truth.phone_assignment()) {
        truth_labels.push_back(cid);
        found_labels.push_back(found.count(phone) ? found[phone] : -1 - static_cast<int>(truth_labels.size()));
    }
    EXPECT_GE(spamnet::testing::adjusted_rand_index(truth_labels, found_labels), 0.95);
}

TEST(Synth, ConfigValidation) {
    SynthConfig sc;
    sc.overlap_fraction = 1.5;
    EXPECT_THROW(sc.check(), std::invalid_argument);
    SynthConfig tiny;
    tiny.vocab_size = 50;
    EXPECT_THROW(generate(tiny), std::invalid_argument);
    SynthConfig zero;
    zero.users_per_campaign = 0;
    EXPECT_THROW(zero.check(), std::invalid_argument);
}
