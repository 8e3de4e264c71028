// SPDX-License-Identifier: Apache-2.0
#include "spamnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "spamnet/common.hpp"
#include "spamnet/hmps.hpp"

namespace spamnet {

namespace {

double safe_div(double a, double b) { return b > 0.0 ? a / b : 0.0; }

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return s;
}

nlohmann::ordered_json report_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["setting"] = to_string(r.setting);
    j["config"] = r.config;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["auc"] = r.auc ? nlohmann::ordered_json(*r.auc) : nlohmann::ordered_json(nullptr);
    j["accuracy"] = r.accuracy;
    j["tp"] = r.counts.tp;
    j["fp"] = r.counts.fp;
    j["tn"] = r.counts.tn;
    j["fn"] = r.counts.fn;
    j["runs"] = r.runs;
    return j;
}

// Adds round(ratio·|pool|) SMOTE points drawn from `pool` to `rows`.
std::vector<std::vector<double>> oversample(std::vector<std::vector<double>> rows,
                                            const std::vector<std::vector<double>>& pool, const SmoteOptions& opt,
                                            std::uint64_t seed) {
    if (pool.size() < 2 || opt.ratio <= 0.0) return rows;
    const std::size_t k = std::min(opt.k, pool.size() - 1);
    for (auto& s : smote_detailed(pool, opt.ratio, k, seed)) rows.push_back(std::move(s.values));
    return rows;
}

}  // namespace

std::string_view to_string(Setting s) { return s == Setting::Setting1 ? "setting1" : "setting2"; }

std::string MetricsReport::to_json() const { return report_json(*this).dump(2); }

ConfusionCounts confusion(const std::vector<bool>& truth, const std::vector<bool>& predicted) {
    if (truth.size() != predicted.size()) throw std::invalid_argument("confusion: length mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i]) {
            predicted[i] ? ++c.tp : ++c.fn;
        } else {
            predicted[i] ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

std::optional<double> auc(const std::vector<std::pair<double, bool>>& scores_with_labels) {
    std::vector<std::pair<double, bool>> v = scores_with_labels;
    for (const auto& [s, l] : v) {
        if (std::isnan(s)) throw std::invalid_argument("auc: NaN score");
    }
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double pos = 0, neg = 0, rank_sum = 0;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j].first == v[i].first) ++j;
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;  // average 1-based rank
        for (std::size_t t = i; t < j; ++t) {
            if (v[t].second) {
                pos += 1;
                rank_sum += mid;
            } else {
                neg += 1;
            }
        }
        i = j;
    }
    if (pos == 0 || neg == 0) return std::nullopt;
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

MetricsReport metrics(const ConfusionCounts& c, const std::vector<std::pair<double, bool>>& scores_with_labels) {
    MetricsReport r;
    r.counts = c;
    r.precision = safe_div(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    r.recall = safe_div(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    r.f1 = safe_div(2.0 * r.precision * r.recall, r.precision + r.recall);
    r.accuracy = safe_div(static_cast<double>(c.tp + c.tn), static_cast<double>(c.total()));
    r.auc = auc(scores_with_labels);
    return r;
}

std::vector<SmoteSample> smote_detailed(std::span<const std::vector<double>> rows, double ratio, std::size_t k,
                                        std::uint64_t seed) {
    if (!(ratio >= 0.0) || !std::isfinite(ratio)) throw std::invalid_argument("smote: ratio must be >= 0");
    if (k == 0) throw std::invalid_argument("smote: k must be positive");
    const std::size_t n = rows.size();
    if (n <= k) throw std::invalid_argument("smote: need more than k training samples");
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw std::invalid_argument("smote: ragged rows");
    }
    const auto m = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    if (m == 0) return {};

    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> d;
        d.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) d.emplace_back(sq_dist(rows[i], rows[j]), j);
        }
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
        for (std::size_t t = 0; t < k; ++t) neighbours[i].push_back(d[t].second);
    }

    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<SmoteSample> out;
    out.reserve(m);
    for (std::size_t t = 0; t < m; ++t) {
        SmoteSample s;
        s.parent = order[t % n];
        s.neighbor = neighbours[s.parent][rng.below(k)];
        s.gap = rng.uniform_open();
        const auto& x = rows[s.parent];
        const auto& nn = rows[s.neighbor];
        s.values.resize(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) s.values[j] = x[j] + s.gap * (nn[j] - x[j]);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::vector<double>> smote(std::span<const std::vector<double>> rows, double ratio, std::size_t k,
                                       std::uint64_t seed) {
    std::vector<std::vector<double>> out(rows.begin(), rows.end());
    for (auto& s : smote_detailed(rows, ratio, k, seed)) out.push_back(std::move(s.values));
    return out;
}

std::vector<FeatureVector> smote(const std::vector<FeatureVector>& training, double ratio, std::size_t k,
                                 std::uint64_t seed) {
    std::vector<std::vector<double>> rows;
    rows.reserve(training.size());
    for (const auto& v : training) rows.push_back(v.values);
    std::vector<FeatureVector> out = training;
    std::size_t idx = 0;
    for (auto& s : smote_detailed(rows, ratio, k, seed)) {
        out.push_back({training[s.parent].campaign_id, "smote:" + std::to_string(idx++), std::move(s.values), false});
    }
    return out;
}

PipelineInputs prepare_inputs(const Corpus& corpus, std::vector<Campaign> campaigns, const PipelineConfig& cfg,
                              std::size_t workers) {
    PipelineInputs in;
    in.corpus = &corpus;
    in.campaigns = std::move(campaigns);
    in.trees = build_trees(corpus, in.campaigns, workers);
    if (cfg.features.mode == FeatureMode::HmpsOsn2) {
        in.hits = hits_scores(corpus.follower_edges(), cfg.features.hits_iters, cfg.features.hits_tol);
    }
    return in;
}

PipelineResult run_pipeline(const PipelineInputs& inputs, const std::set<std::string>& known_spammers,
                            const PipelineConfig& cfg, std::size_t workers, const std::set<std::string>& leak) {
    if (!inputs.corpus) throw std::invalid_argument("run_pipeline: inputs not prepared");
    PipelineResult out;
    auto relabelled = relabel_spammers(inputs.campaigns, known_spammers);
    std::vector<CampaignTree> trees;
    for (std::size_t i = 0; i < relabelled.size(); ++i) {
        if (relabelled[i].spammers.empty()) continue;
        out.campaigns.push_back(relabelled[i]);
        trees.push_back(inputs.trees[i].with_spammers(relabelled[i].spammers));
    }
    out.scores = score_trees(trees, workers);
    out.features = assemble(out.scores, *inputs.corpus, cfg.features, inputs.hits, workers);

    FeedbackOptions fb = cfg.feedback;
    fb.workers = workers;
    if (cfg.smote && cfg.smote->ratio > 0.0) {
        const SmoteOptions opt = *cfg.smote;
        std::map<int, std::vector<std::vector<double>>> leaked;
        if (opt.before_split) {
            for (const auto& v : out.features) {
                if (leak.contains(v.user_id)) leaked[v.campaign_id].push_back(v.values);
            }
        }
        const std::uint64_t seed = cfg.seed;
        fb.augment = [opt, leaked = std::move(leaked), seed](int campaign_id,
                                                              const std::vector<std::vector<double>>& rows) {
            auto pool = rows;
            if (auto it = leaked.find(campaign_id); it != leaked.end()) {
                pool.insert(pool.end(), it->second.begin(), it->second.end());
            }
            return oversample(rows, pool, opt, derive_seed(seed, 0x5107E000ULL + static_cast<std::uint64_t>(campaign_id)));
        };
    }
    out.state = run_until_convergence(init(out.campaigns, out.features), fb);
    out.predictions = predict_all(out.state);
    return out;
}

std::vector<std::string> setting1_universe(const PipelineInputs& inputs) {
    const auto suspended = suspended_users(*inputs.corpus);
    std::set<std::string> in_campaigns;
    for (const auto& c : inputs.campaigns) {
        for (const auto& u : c.users) {
            if (suspended.contains(u)) in_campaigns.insert(u);
        }
    }
    return {in_campaigns.begin(), in_campaigns.end()};
}

Setting1Result setting1_loo(const PipelineInputs& inputs, const PipelineConfig& cfg, std::size_t workers) {
    const auto universe = setting1_universe(inputs);
    if (universe.size() < 2) throw DataError("setting 1 needs at least 2 suspended users in campaigns");
    const auto suspended = suspended_users(*inputs.corpus);

    std::vector<char> hit(universe.size(), 0);
    parallel_for(universe.size(), workers, [&](std::size_t i) {
        auto known = suspended;
        known.erase(universe[i]);
        auto result = run_pipeline(inputs, known, cfg, 1);
        auto agg = aggregate_predictions(result.predictions);
        auto it = agg.find(universe[i]);
        hit[i] = it != agg.end() && it->second.spammer;
    });

    Setting1Result out;
    ConfusionCounts c;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        out.recovered.emplace_back(universe[i], hit[i] != 0);
        hit[i] ? ++c.tp : ++c.fn;
    }
    out.report = metrics(c, {});
    out.report.setting = Setting::Setting1;
    out.report.accuracy = out.report.recall;  // fraction of held-out spammers recovered
    out.report.runs = universe.size();
    out.report.config = std::string("loo mode=") + std::string(to_string(cfg.features.mode)) +
                        (cfg.feedback.feedback ? " feedback" : " no_feedback");
    return out;
}

MetricsReport setting2_holdout(const PipelineInputs& inputs, const PipelineConfig& cfg, double holdout_frac,
                               std::size_t repeats, std::size_t workers) {
    if (!(holdout_frac > 0.0 && holdout_frac < 1.0)) throw std::invalid_argument("holdout fraction must be in (0,1)");
    if (repeats == 0) throw std::invalid_argument("repeats must be positive");

    std::set<std::string> in_campaigns;
    for (const auto& c : inputs.campaigns) in_campaigns.insert(c.users.begin(), c.users.end());
    std::vector<std::string> pos, neg;
    for (const auto& u : inputs.corpus->users()) {
        if (!u.annotated_label || !in_campaigns.contains(u.user_id)) continue;
        (*u.annotated_label == AnnotatedLabel::Spammer ? pos : neg).push_back(u.user_id);
    }
    if (pos.empty() && neg.empty()) throw DataError("setting 2 needs annotated users in campaigns");
    const auto suspended = suspended_users(*inputs.corpus);

    std::vector<MetricsReport> reports(repeats);
    parallel_for(repeats, workers, [&](std::size_t r) {
        Rng rng(derive_seed(cfg.seed, 0x2000 + r));
        auto p = pos;
        auto n = neg;
        rng.shuffle(p);
        rng.shuffle(n);
        const auto take = [&](std::size_t size) {
            return static_cast<std::size_t>(std::llround(holdout_frac * static_cast<double>(size)));
        };
        std::set<std::string> test_pos(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(take(p.size())));
        std::set<std::string> test_neg(n.begin(), n.begin() + static_cast<std::ptrdiff_t>(take(n.size())));
        if (test_pos.empty() && test_neg.empty()) {
            if (!p.empty()) test_pos.insert(p.front());
            else test_neg.insert(n.front());
        }

        std::set<std::string> known = suspended;
        known.insert(p.begin(), p.end());
        for (const auto& u : test_pos) known.erase(u);
        for (const auto& u : test_neg) known.erase(u);

        auto result = run_pipeline(inputs, known, cfg, 1, test_pos);
        auto agg = aggregate_predictions(result.predictions);
        std::vector<bool> truth, predicted;
        std::vector<std::pair<double, bool>> scored;
        auto record = [&](const std::string& u, bool label) {
            auto it = agg.find(u);
            const bool spam = it != agg.end() && it->second.spammer;
            double s = -std::numeric_limits<double>::infinity();
            if (it != agg.end() && it->second.score) s = *it->second.score;
            truth.push_back(label);
            predicted.push_back(spam);
            scored.emplace_back(s, label);
        };
        for (const auto& u : test_pos) record(u, true);
        for (const auto& u : test_neg) record(u, false);
        reports[r] = metrics(confusion(truth, predicted), scored);
    });

    MetricsReport avg;
    avg.setting = Setting::Setting2;
    avg.runs = repeats;
    double auc_sum = 0.0;
    std::size_t auc_n = 0;
    for (const auto& r : reports) {
        avg.precision += r.precision;
        avg.recall += r.recall;
        avg.f1 += r.f1;
        avg.accuracy += r.accuracy;
        avg.counts.tp += r.counts.tp;
        avg.counts.fp += r.counts.fp;
        avg.counts.tn += r.counts.tn;
        avg.counts.fn += r.counts.fn;
        if (r.auc) {
            auc_sum += *r.auc;
            ++auc_n;
        }
    }
    const auto k = static_cast<double>(repeats);
    avg.precision /= k;
    avg.recall /= k;
    avg.f1 /= k;
    avg.accuracy /= k;
    if (auc_n > 0) avg.auc = auc_sum / static_cast<double>(auc_n);
    avg.config = "holdout=" + format_double(holdout_frac) + " repeats=" + std::to_string(repeats) +
                 " mode=" + std::string(to_string(cfg.features.mode)) +
                 (cfg.feedback.feedback ? " feedback" : " no_feedback");
    if (cfg.smote && cfg.smote->ratio > 0.0) {
        avg.config += " smote_ratio=" + format_double(cfg.smote->ratio) + " k=" + std::to_string(cfg.smote->k);
        if (cfg.smote->before_split) avg.config += " before_split";
    }
    return avg;
}

std::vector<AblationRow> ablation_suite(const PipelineInputs& inputs, const PipelineConfig& cfg, double holdout_frac,
                                        std::size_t repeats, std::size_t workers, bool before_split) {
    std::vector<AblationRow> rows;
    auto run = [&](std::string variant, bool feedback, std::optional<SmoteOptions> sm) {
        PipelineConfig c = cfg;
        c.feedback.feedback = feedback;
        c.smote = sm;
        std::optional<double> ratio;
        if (sm) ratio = sm->ratio;
        rows.push_back({std::move(variant), ratio, setting2_holdout(inputs, c, holdout_frac, repeats, workers)});
    };
    run("feedback", true, std::nullopt);
    run("no_feedback", false, std::nullopt);
    const std::size_t k = cfg.smote ? cfg.smote->k : 5;
    for (double r : kSmoteRatios) run("smote", false, SmoteOptions{r, k, false});
    if (before_split) {
        for (double r : kSmoteRatios) run("smote_before_split", false, SmoteOptions{r, k, true});
    }
    return rows;
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
    out << "variant,smote_ratio,precision,recall,f1,auc,accuracy\n";
    for (const auto& r : rows) {
        out << r.variant << ',' << (r.smote_ratio ? format_double(*r.smote_ratio) : std::string()) << ','
            << format_double(r.report.precision) << ',' << format_double(r.report.recall) << ','
            << format_double(r.report.f1) << ',' << (r.report.auc ? format_double(*r.report.auc) : std::string())
            << ',' << format_double(r.report.accuracy) << '\n';
    }
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["variant"] = r.variant;
        j["smote_ratio"] = r.smote_ratio ? nlohmann::ordered_json(*r.smote_ratio) : nlohmann::ordered_json(nullptr);
        j["metrics"] = report_json(r.report);
        arr.push_back(std::move(j));
    }
    nlohmann::ordered_json doc;
    doc["ablation"] = std::move(arr);
    return doc.dump(2);
}

}  // namespace spamnet
