// SPDX-License-Identifier: Apache-2.0
#include "spamnet/feedback.hpp"

#include <algorithm>

#include "json.hpp"
#include "spamnet/common.hpp"

namespace spamnet {

namespace {

struct Selection {
    std::vector<std::pair<std::string, double>> users;  // sorted by user id
};

std::vector<std::vector<double>> training_rows(const CampaignState& c) {
    std::vector<std::vector<double>> rows;
    rows.reserve(c.training_set.size());
    for (const auto& u : c.training_set) rows.push_back(c.features.at(u).values);
    return rows;
}

void fit_one(CampaignState& c, const FeedbackOptions& opts) {
    if (c.deferred()) {
        c.model.reset();
        c.model_config.reset();
        c.t_max.reset();
        return;
    }
    if (c.model_current()) return;
    auto rows = training_rows(c);
    const auto original = rows;
    if (opts.augment) rows = opts.augment(c.campaign_id, rows);
    std::vector<std::vector<double>> population;
    if (opts.population_reference) {
        population.reserve(c.users.size());
        for (const auto& u : c.users) population.push_back(c.features.at(u).values);
    }
    const std::span<const std::vector<double>> target(rows), reference(population);
    auto chosen = grid_search(target, opts.train, opts.folds, reference);
    c.model = fit(target, chosen, reference);
    c.model_config = std::move(chosen);
    c.fitted_on = c.training_set.size();
    double t = -std::numeric_limits<double>::infinity();
    for (const auto& r : original) t = std::max(t, c.model->score(r));
    c.t_max = t;
}

PredictionSource rank_merge(PredictionSource a, PredictionSource b) {
    return static_cast<int>(a) < static_cast<int>(b) ? a : b;
}

}  // namespace

std::string_view to_string(PredictionSource s) {
    switch (s) {
        case PredictionSource::Training: return "training";
        case PredictionSource::Feedback: return "feedback";
        case PredictionSource::Predicted: return "predicted";
        case PredictionSource::Unscored: return "unscored";
    }
    return "?";
}

EnsembleState init(const std::vector<Campaign>& campaigns, const std::vector<FeatureVector>& feature_vectors) {
    std::map<std::pair<int, std::string>, const FeatureVector*> by_key;
    for (const auto& v : feature_vectors) by_key[{v.campaign_id, v.user_id}] = &v;

    EnsembleState state;
    std::optional<std::size_t> dim;
    for (const auto& c : campaigns) {
        if (c.spammers.empty()) {
            state.warnings.push_back("campaign " + std::to_string(c.campaign_id) +
                                     " has no known spammers; excluded");
            continue;
        }
        CampaignState slot;
        slot.campaign_id = c.campaign_id;
        slot.users.assign(c.users.begin(), c.users.end());
        for (const auto& u : slot.users) {
            auto it = by_key.find({c.campaign_id, u});
            if (it == by_key.end()) {
                throw Error("no feature vector for user " + u + " in campaign " + std::to_string(c.campaign_id));
            }
            if (!dim) dim = it->second->values.size();
            if (it->second->values.size() != *dim) throw Error("feature vectors differ in dimension");
            slot.features.emplace(u, *it->second);
            if (c.spammers.contains(u)) {
                slot.training_set.insert(u);
            } else {
                slot.unknown_set.insert(u);
            }
        }
        slot.original_training = slot.training_set;
        state.campaigns.push_back(std::move(slot));
    }
    std::sort(state.campaigns.begin(), state.campaigns.end(),
              [](const CampaignState& a, const CampaignState& b) { return a.campaign_id < b.campaign_id; });
    return state;
}

void fit_models(EnsembleState& state, const FeedbackOptions& opts) {
    parallel_for(state.campaigns.size(), opts.workers, [&](std::size_t i) { fit_one(state.campaigns[i], opts); });
}

std::pair<EnsembleState, std::size_t> run_level(const EnsembleState& state, const FeedbackOptions& opts) {
    EnsembleState next = state;
    next.level = state.level + 1;
    fit_models(next, opts);

    std::vector<Selection> selected(next.campaigns.size());
    parallel_for(next.campaigns.size(), opts.workers, [&](std::size_t i) {
        const auto& c = next.campaigns[i];
        if (!c.model) return;
        for (const auto& u : state.campaigns[i].unknown_set) {
            const double s = c.model->score(c.features.at(u));
            if (s >= *c.t_max) selected[i].users.emplace_back(u, s);
        }
    });
    if (!opts.feedback) return {std::move(next), 0};

    std::map<std::string, std::vector<std::size_t>> membership;
    for (std::size_t i = 0; i < state.campaigns.size(); ++i) {
        for (const auto& u : state.campaigns[i].users) membership[u].push_back(i);
    }
    std::size_t transfers = 0;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        for (const auto& [user, s] : selected[i].users) {
            for (auto d : membership[user]) {
                if (d == i || !state.campaigns[d].unknown_set.contains(user)) continue;
                next.log.push_back({user, state.campaigns[i].campaign_id, state.campaigns[d].campaign_id, next.level, s});
                auto& target = next.campaigns[d];
                if (target.training_set.insert(user).second) {
                    target.unknown_set.erase(user);
                    ++transfers;
                }
            }
        }
    }
    return {std::move(next), transfers};
}

EnsembleState run_until_convergence(EnsembleState state, const FeedbackOptions& opts) {
    std::size_t max_levels = opts.max_levels;
    if (max_levels == 0) {
        std::set<std::string> users;
        for (const auto& c : state.campaigns) users.insert(c.users.begin(), c.users.end());
        max_levels = std::max<std::size_t>(1, users.size());
    }
    for (;;) {
        auto [next, transfers] = run_level(state, opts);
        state = std::move(next);
        if (transfers == 0) {
            state.converged = true;
            break;
        }
        if (state.level >= max_levels) break;
    }
    fit_models(state, opts);
    return state;
}

std::vector<Prediction> predict_all(const EnsembleState& state) {
    std::vector<Prediction> rows;
    for (const auto& c : state.campaigns) {
        for (const auto& u : c.users) {
            Prediction p;
            p.campaign_id = c.campaign_id;
            p.user_id = u;
            if (c.model) p.score = c.model->score(c.features.at(u));
            if (c.training_set.contains(u)) {
                p.spammer = true;
                p.source = c.original_training.contains(u) ? PredictionSource::Training : PredictionSource::Feedback;
            } else if (p.score) {
                p.spammer = *p.score >= 0.0;
                p.source = PredictionSource::Predicted;
            } else {
                p.source = PredictionSource::Unscored;
            }
            rows.push_back(std::move(p));
        }
    }
    auto agg = aggregate_predictions(rows);
    for (auto& [u, p] : agg) rows.push_back(std::move(p));
    return rows;
}

std::map<std::string, Prediction> aggregate_predictions(const std::vector<Prediction>& predictions) {
    std::map<std::string, Prediction> agg;
    for (const auto& p : predictions) {
        if (!p.campaign_id) continue;
        auto [it, fresh] = agg.try_emplace(p.user_id);
        auto& a = it->second;
        if (fresh) {
            a.user_id = p.user_id;
            a.source = p.source;
        } else {
            a.source = rank_merge(a.source, p.source);
        }
        a.spammer = a.spammer || p.spammer;
        if (p.score && (!a.score || *p.score > *a.score)) a.score = p.score;
    }
    return agg;
}

void write_predictions_csv(std::ostream& out, const std::vector<Prediction>& predictions) {
    out << "campaign_id,user_id,score,label,source\n";
    for (const auto& p : predictions) {
        out << (p.campaign_id ? std::to_string(*p.campaign_id) : std::string("all")) << ',' << p.user_id << ','
            << (p.score ? format_double(*p.score) : std::string()) << ',' << (p.spammer ? "spammer" : "benign") << ','
            << to_string(p.source) << '\n';
    }
}

void write_feedback_log_jsonl(std::ostream& out, const std::vector<TransferRecord>& log) {
    for (const auto& r : log) {
        nlohmann::ordered_json j;
        j["level"] = r.level;
        j["user_id"] = r.user_id;
        j["from_campaign"] = r.from_campaign;
        j["to_campaign"] = r.to_campaign;
        j["score"] = r.score;
        out << j.dump() << '\n';
    }
}

}  // namespace spamnet
