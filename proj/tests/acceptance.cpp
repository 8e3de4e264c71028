// SPDX-License-Identifier: Apache-2.0
// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "spamnet/config.hpp"
#include "spamnet/eval.hpp"
#include "spamnet/synth.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace spamnet;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// The fixed-seed benchmark, built the same way as `spamnet pipeline --seed 7`.
struct Benchmark {
    RunConfig run;
    SynthCorpus data;
    Corpus corpus;
    PipelineConfig cfg;
    PipelineInputs inputs;
};

Benchmark& benchmark() {
    static Benchmark b = [] {
        Benchmark x;
        SynthConfig sc;
        sc.seed = x.run.seed;
        x.data = generate(sc);
        x.corpus = x.data.corpus();
        x.cfg = x.run.pipeline();
        x.inputs = prepare_inputs(x.corpus, identify_campaigns(x.corpus, x.run.clustering), x.cfg);
        return x;
    }();
    return b;
}

Outcome hmps_oracle() {
    Clock clock;
    std::size_t pairs = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto tree = spamnet::testing::random_tree(seed, 60);
        const spamnet::testing::OracleTree oracle(tree);
        for (const auto& user : tree.users()) {
            const auto& u = user.user_id;
            double oracle_sum = 0.0;
            for (const auto& s : tree.spammers()) {
                if (s == u) continue;
                double best = 0.0;
                for (const auto& p : enumerate_meta_paths(tree, u, s)) best = std::max(best, p.product);
                const double v = pair_score(tree, u, s).value;
                worst = std::max(worst, std::abs(v - best));
                oracle_sum += oracle.pair_score(u, s);
                ++pairs;
            }
            worst = std::max(worst, std::abs(hmps(tree, u).value - oracle_sum));
        }
    }
    const double t = clock.seconds();
    return {worst <= 1e-9 && t < 5.0,
            std::to_string(pairs) + " pairs, max error " + fmt(worst) + ", " + fmt(t) + " s"};
}

Outcome campaign_recovery() {
    Clock clock;
    SynthConfig sc;
    auto data = generate(sc);
    auto corpus = data.corpus();
    auto campaigns = identify_campaigns(corpus, ClusteringParams{});
    std::map<std::string, int> found;
    for (const auto& c : campaigns)
        for (const auto& p : c.phones) found[p] = c.campaign_id;
    std::vector<int> truth, got;
    for (const auto& [phone, cid] : data.truth.phone_assignment()) {
        truth.push_back(cid);
        // unrecovered phones count as singletons
        got.push_back(found.count(phone) ? found[phone] : -1 - static_cast<int>(truth.size()));
    }
    const double ari = spamnet::testing::adjusted_rand_index(truth, got);
    const double t = clock.seconds();
    return {ari >= 0.95 && t < 10.0, "ARI " + fmt(ari) + " over " + std::to_string(truth.size()) + " phones, " +
                                         std::to_string(campaigns.size()) + " campaigns, " + fmt(t) + " s"};
}

Outcome weight_normalization() {
    auto& b = benchmark();
    std::vector<const CampaignTree*> trees;
    for (const auto& t : b.inputs.trees) trees.push_back(&t);
    std::vector<CampaignTree> random;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) random.push_back(spamnet::testing::random_tree(seed, 60));
    for (const auto& t : random) trees.push_back(&t);
    double worst = 0.0;
    for (const auto* t : trees) {
        double root = 0.0;
        for (const auto& tok : t->tokens()) {
            root += tok.root_weight;
            double users = 0.0;
            for (const auto& ch : tok.children) users += ch.weight;
            worst = std::max(worst, std::abs(users - 1.0));
        }
        worst = std::max(worst, std::abs(root - 1.0));
    }
    return {worst <= 1e-12, std::to_string(trees.size()) + " trees, max deviation " + fmt(worst)};
}

Outcome nu_property() {
    // two well separated clusters
    Rng rng(2024);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 200; ++i) {
        const double cx = i % 2 ? 4.0 : -4.0;
        rows.push_back({cx + rng.uniform() - 0.5, cx + rng.uniform() - 0.5, rng.uniform()});
    }
    const TrainConfig defaults;
    double worst_slack = -1.0;
    std::size_t fits = 0;
    for (auto kernel : defaults.kernel_grid) {
        for (double nu : defaults.nu_grid) {
            for (double gamma : defaults.gamma_grid) {
                TrainConfig c = defaults;
                c.kernel = kernel;
                c.kernel_grid = {kernel};
                c.nu_grid = {nu};
                c.gamma_grid = {gamma};
                auto m = fit(rows, c);
                std::size_t neg = 0;
                for (const auto& r : rows) neg += m.score(r) < 0.0;
                worst_slack = std::max(worst_slack, static_cast<double>(neg) / rows.size() - nu);
                ++fits;
                if (kernel == KernelKind::Linear) break;  // gamma unused
            }
        }
    }
    return {worst_slack <= 0.05, std::to_string(fits) + " fits, max (rejected - nu) " + fmt(worst_slack)};
}

Outcome feedback_behaviour() {
    auto& b = benchmark();
    const auto known = suspended_users(b.corpus);
    auto res = run_pipeline(b.inputs, known, b.cfg);

    // (a) monotone growth, (b) termination with zero transfers
    auto state = init(res.campaigns, res.features);
    bool monotone = true;
    std::size_t levels = 0, last = 1;
    while (last != 0 && levels <= 10000) {
        auto [next, transfers] = run_level(state, b.cfg.feedback);
        for (std::size_t i = 0; i < state.campaigns.size(); ++i) {
            const auto& before = state.campaigns[i].training_set;
            const auto& after = next.campaigns[i].training_set;
            monotone = monotone && std::includes(after.begin(), after.end(), before.begin(), before.end());
        }
        state = std::move(next);
        last = transfers;
        ++levels;
    }
    const bool terminated = res.state.converged && last == 0 && levels == res.state.level;

    // (c) directional: feedback beats no feedback under setting 2
    PipelineConfig with = b.cfg, without = b.cfg;
    with.smote.reset();
    without.smote.reset();
    without.feedback.feedback = false;
    const auto f_with = setting2_holdout(b.inputs, with, b.run.holdout, b.run.repeats);
    const auto f_without = setting2_holdout(b.inputs, without, b.run.holdout, b.run.repeats);
    const bool better = f_with.f1 > f_without.f1;

    // (d) no overlap: the loop has nothing to transfer
    SynthConfig sc;
    sc.overlap_fraction = 0.0;
    auto corpus0 = generate(sc).corpus();
    auto inputs0 = prepare_inputs(corpus0, identify_campaigns(corpus0, b.run.clustering), b.cfg);
    auto r_with = run_pipeline(inputs0, suspended_users(corpus0), with);
    auto r_without = run_pipeline(inputs0, suspended_users(corpus0), without);
    std::ostringstream pa, pb;
    write_predictions_csv(pa, r_with.predictions);
    write_predictions_csv(pb, r_without.predictions);
    const bool neutral = pa.str() == pb.str();

    std::string detail = std::string("(a) ") + (monotone ? "ok" : "FAIL") + ", (b) " +
                         (terminated ? "ok" : "FAIL") + " after " + std::to_string(levels) + " levels, (c) F1 " +
                         fmt(f_with.f1) + " vs " + fmt(f_without.f1) + " over " + std::to_string(b.run.repeats) +
                         " repeats, (d) " + (neutral ? "identical" : "DIFFERENT");
    return {monotone && terminated && better && neutral, detail};
}

Outcome smote_correctness() {
    double worst_resid = 0.0;
    bool gaps_ok = true;
    std::size_t samples = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        std::vector<std::vector<double>> rows(25, std::vector<double>(8));
        for (auto& r : rows)
            for (auto& x : r) x = rng.uniform() * 10 - 5;
        for (double ratio : kSmoteRatios) {
            for (const auto& s : smote_detailed(rows, ratio, 5, seed)) {
                const auto& p = rows[s.parent];
                const auto& q = rows[s.neighbor];
                double dd = 0, dx = 0;
                for (std::size_t j = 0; j < p.size(); ++j) {
                    dd += (q[j] - p[j]) * (q[j] - p[j]);
                    dx += (s.values[j] - p[j]) * (q[j] - p[j]);
                }
                const double t = dx / dd;
                for (std::size_t j = 0; j < p.size(); ++j)
                    worst_resid = std::max(worst_resid, std::abs(s.values[j] - p[j] - t * (q[j] - p[j])));
                gaps_ok = gaps_ok && s.gap > 0.0 && s.gap < 1.0 && t > 0.0 && t < 1.0;
                ++samples;
            }
        }
    }
    auto& b = benchmark();
    auto rows = ablation_suite(b.inputs, b.cfg, b.run.holdout, 2);
    std::vector<double> ratios;
    for (const auto& r : rows)
        if (r.variant == "smote" && r.smote_ratio) ratios.push_back(*r.smote_ratio);
    const bool all_ratios = ratios == std::vector<double>(std::begin(kSmoteRatios), std::end(kSmoteRatios));
    return {worst_resid < 1e-12 && gaps_ok && all_ratios,
            std::to_string(samples) + " samples, max residual " + fmt(worst_resid) + ", ablation ratios " +
                (all_ratios ? "0.2/0.3/0.5/0.75/1.0" : "INCOMPLETE")};
}

Outcome metric_goldens() {
    struct G {
        ConfusionCounts c;
        double p, r, f1;
    };
    const std::vector<G> goldens{
        {{9, 1, 0, 1}, 0.9, 0.9, 0.9},    {{0, 0, 5, 5}, 0.0, 0.0, 0.0}, {{4, 4, 2, 0}, 0.5, 1.0, 2.0 / 3.0},
        {{3, 1, 3, 3}, 0.75, 0.5, 0.6},   {{10, 0, 10, 0}, 1.0, 1.0, 1.0},
    };
    std::size_t ok = 0;
    for (const auto& g : goldens) {
        auto m = metrics(g.c, {});
        ok += std::abs(m.precision - g.p) < 1e-15 && std::abs(m.recall - g.r) < 1e-15 && std::abs(m.f1 - g.f1) < 1e-15;
    }
    auto scored = [](std::vector<double> pos, std::vector<double> neg) {
        std::vector<std::pair<double, bool>> v;
        for (double x : pos) v.emplace_back(x, true);
        for (double x : neg) v.emplace_back(x, false);
        return *auc(v);
    };
    const double perfect = scored({0.9, 0.8}, {0.2, 0.1}), reversed = scored({0.1, 0.2}, {0.8, 0.9}),
                 tied = scored({0.5, 0.5}, {0.5, 0.5});
    const bool auc_ok = perfect == 1.0 && reversed == 0.0 && tied == 0.5;
    return {ok == goldens.size() && auc_ok, std::to_string(ok) + "/5 confusion goldens, AUC " + fmt(perfect) + "/" +
                                                fmt(reversed) + "/" + fmt(tied)};
}

Outcome hits_oracle() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed * 7919);
        std::vector<FollowerEdge> edges;
        for (int a = 0; a < 10; ++a)
            for (int c = 0; c < 10; ++c)
                if (a != c && rng.bernoulli(0.3)) edges.push_back({"n" + std::to_string(a), "n" + std::to_string(c)});
        auto got = hits_scores(edges);
        for (const auto& [name, ha] : spamnet::testing::oracle_hits(edges)) {
            worst = std::max(worst, std::abs(got.at(name).hub - ha.first));
            worst = std::max(worst, std::abs(got.at(name).authority - ha.second));
        }
    }
    auto single = hits_scores({{"a", "b"}});
    const bool exact = single.at("a").hub == 1.0 && single.at("b").authority == 1.0;
    return {worst <= 1e-8 && exact, "max error " + fmt(worst) + ", single edge " + (exact ? "exact" : "INEXACT")};
}

Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / "spamnet_acceptance_determinism";
    fs::remove_all(base);
    std::string outputs[2];
    const int workers[2] = {1, 8};
    for (int i = 0; i < 2; ++i) {
        const fs::path out = base / ("w" + std::to_string(workers[i]));
        const std::string cmd = std::string("\"") + SPAMNET_CLI_PATH + "\" pipeline --seed 7 --workers " +
                                std::to_string(workers[i]) + " --out \"" + out.string() + "\" > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) return {false, "pipeline run failed: " + cmd};
        outputs[i] = slurp(out / "predictions.csv");
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    fs::remove_all(base);
    return {same, "predictions.csv " + std::to_string(outputs[0].size()) + " bytes, " +
                      (same ? "identical" : "DIFFERENT") + " at 1 and 8 workers"};
}

Outcome setting1_regression() {
    std::ifstream f(fs::path(SPAMNET_TEST_DATA_DIR) / "setting1_baseline.json");
    if (!f) return {false, "missing baseline file"};
    const auto j = nlohmann::json::parse(f);
    const double baseline = j.at("accuracy").get<double>();
    const double tolerance = j.at("tolerance").get<double>();
    auto& b = benchmark();
    auto r = setting1_loo(b.inputs, b.cfg, 1);
    const double acc = r.report.accuracy;
    return {acc >= baseline - tolerance, "accuracy " + fmt(acc) + " over " + std::to_string(r.recovered.size()) +
                                             " held-out users, baseline " + fmt(baseline)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"HMPS matches path enumeration and oracle", hmps_oracle},
        {"campaign recovery", campaign_recovery},
        {"tree weight normalization", weight_normalization},
        {"one-class nu property", nu_property},
        {"feedback loop behaviour", feedback_behaviour},
        {"SMOTE correctness and ratios", smote_correctness},
        {"metric goldens", metric_goldens},
        {"HITS oracle", hits_oracle},
        {"pipeline determinism across workers", determinism},
        {"setting 1 regression", setting1_regression},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first
                  << "  [" << o.detail << "]" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
