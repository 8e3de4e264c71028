// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "spamnet/common.hpp"
#include "spamnet/config.hpp"
#include "spamnet/eval.hpp"
#include "spamnet/synth.hpp"

namespace py = pybind11;
using namespace spamnet;

namespace {

RunConfig make_config(const std::map<std::string, std::string>& overrides) {
    RunConfig cfg;
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    cfg.check();
    return cfg;
}

py::dict report_dict(const MetricsReport& r) {
    py::dict d;
    d["setting"] = std::string(to_string(r.setting));
    d["config"] = r.config;
    d["precision"] = r.precision;
    d["recall"] = r.recall;
    d["f1"] = r.f1;
    d["auc"] = r.auc ? py::object(py::float_(*r.auc)) : py::object(py::none());
    d["accuracy"] = r.accuracy;
    d["tp"] = r.counts.tp;
    d["fp"] = r.counts.fp;
    d["tn"] = r.counts.tn;
    d["fn"] = r.counts.fn;
    d["runs"] = r.runs;
    return d;
}

py::dict campaign_dict(const Campaign& c) {
    py::dict d;
    d["campaign_id"] = c.campaign_id;
    d["phones"] = c.phones;
    d["urls"] = c.urls;
    d["users"] = c.users;
    d["spammers"] = c.spammers;
    d["tweets"] = c.tweet_ids.size();
    return d;
}

// Everything below the corpus is recomputed per call; the corpus must outlive
// the inputs because they hold a pointer to it.
PipelineInputs inputs_for(const Corpus& corpus, const RunConfig& cfg) {
    return prepare_inputs(corpus, identify_campaigns(corpus, cfg.clustering, cfg.workers), cfg.pipeline(),
                          cfg.workers);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Phone-number spam campaign detection";

    py::register_exception<spamnet::Error>(m, "SpamnetError", PyExc_RuntimeError);

    py::class_<Corpus, std::shared_ptr<Corpus>>(m, "Corpus")
        .def_property_readonly("num_tweets", [](const Corpus& c) { return c.tweets().size(); })
        .def_property_readonly("num_users", [](const Corpus& c) { return c.users().size(); })
        .def_property_readonly("num_edges", [](const Corpus& c) { return c.follower_edges().size(); })
        .def_property_readonly("warnings", &Corpus::warnings)
        .def("suspended_users", [](const Corpus& c) { return suspended_users(c); })
        .def("__repr__", [](const Corpus& c) {
            return "<Corpus tweets=" + std::to_string(c.tweets().size()) +
                   " users=" + std::to_string(c.users().size()) + ">";
        });

    m.def(
        "load_corpus",
        [](const std::filesystem::path& tweets, const std::filesystem::path& users,
           std::optional<std::filesystem::path> edges) {
            return std::make_shared<Corpus>(load_corpus(tweets, users, edges));
        },
        py::arg("tweets"), py::arg("users"), py::arg("edges") = std::nullopt);

    m.def(
        "generate_synth",
        [](std::uint64_t seed, std::size_t n_campaigns, std::size_t users_per_campaign, double overlap_fraction,
           std::optional<std::filesystem::path> out_dir) {
            SynthConfig sc;
            sc.seed = seed;
            sc.n_campaigns = n_campaigns;
            sc.users_per_campaign = users_per_campaign;
            sc.overlap_fraction = overlap_fraction;
            sc.check();
            auto data = generate(sc);
            if (out_dir) write_synth(data, sc, *out_dir);
            return std::make_shared<Corpus>(data.corpus());
        },
        py::arg("seed") = 7, py::arg("n_campaigns") = 20, py::arg("users_per_campaign") = 50,
        py::arg("overlap_fraction") = 0.21, py::arg("out_dir") = std::nullopt);

    m.def(
        "identify_campaigns",
        [](const Corpus& corpus, const std::map<std::string, std::string>& config) {
            const auto cfg = make_config(config);
            py::list out;
            for (const auto& c : identify_campaigns(corpus, cfg.clustering, cfg.workers)) out.append(campaign_dict(c));
            return out;
        },
        py::arg("corpus"), py::arg("config") = std::map<std::string, std::string>{});

    m.def(
        "run_pipeline",
        [](const Corpus& corpus, const std::map<std::string, std::string>& config) {
            const auto cfg = make_config(config);
            std::vector<Prediction> predictions;
            {
                py::gil_scoped_release release;
                const auto inputs = inputs_for(corpus, cfg);
                predictions = run_pipeline(inputs, suspended_users(corpus), cfg.pipeline(), cfg.workers).predictions;
            }
            py::list out;
            for (const auto& p : predictions) {
                py::dict d;
                d["campaign_id"] = p.campaign_id ? py::object(py::int_(*p.campaign_id)) : py::object(py::none());
                d["user_id"] = p.user_id;
                d["score"] = p.score ? py::object(py::float_(*p.score)) : py::object(py::none());
                d["spammer"] = p.spammer;
                d["source"] = std::string(to_string(p.source));
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("corpus"), py::arg("config") = std::map<std::string, std::string>{});

    m.def(
        "evaluate",
        [](const Corpus& corpus, const std::string& setting, const std::map<std::string, std::string>& config) {
            const auto cfg = make_config(config);
            MetricsReport report;
            {
                py::gil_scoped_release release;
                const auto inputs = inputs_for(corpus, cfg);
                if (setting == "setting1") {
                    report = setting1_loo(inputs, cfg.pipeline(), cfg.workers).report;
                } else if (setting == "setting2") {
                    report = setting2_holdout(inputs, cfg.pipeline(), cfg.holdout, cfg.repeats, cfg.workers);
                } else {
                    throw std::invalid_argument("unknown setting '" + setting + "' (setting1|setting2)");
                }
            }
            return report_dict(report);
        },
        py::arg("corpus"), py::arg("setting"), py::arg("config") = std::map<std::string, std::string>{});

    m.def(
        "ablation",
        [](const Corpus& corpus, const std::map<std::string, std::string>& config) {
            const auto cfg = make_config(config);
            std::vector<AblationRow> rows;
            {
                py::gil_scoped_release release;
                const auto inputs = inputs_for(corpus, cfg);
                rows = ablation_suite(inputs, cfg.pipeline(), cfg.holdout, cfg.repeats, cfg.workers);
            }
            py::list out;
            for (const auto& r : rows) {
                auto d = report_dict(r.report);
                d["variant"] = r.variant;
                d["smote_ratio"] = r.smote_ratio ? py::object(py::float_(*r.smote_ratio)) : py::object(py::none());
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("corpus"), py::arg("config") = std::map<std::string, std::string>{});

    m.def(
        "metrics",
        [](std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
            return report_dict(metrics(ConfusionCounts{tp, fp, tn, fn}, {}));
        },
        py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));

    m.def(
        "auc",
        [](const std::vector<double>& scores, const std::vector<bool>& labels) {
            if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
            std::vector<std::pair<double, bool>> v;
            for (std::size_t i = 0; i < scores.size(); ++i) v.emplace_back(scores[i], labels[i]);
            return auc(v);
        },
        py::arg("scores"), py::arg("labels"));

    m.def(
        "smote",
        [](const std::vector<std::vector<double>>& rows, double ratio, std::size_t k, std::uint64_t seed) {
            return smote(rows, ratio, k, seed);
        },
        py::arg("rows"), py::arg("ratio"), py::arg("k") = 5, py::arg("seed") = 7);

    m.def(
        "hits",
        [](const std::vector<std::pair<std::string, std::string>>& edges) {
            std::vector<FollowerEdge> fe;
            for (const auto& [a, b] : edges) fe.push_back({a, b});
            std::map<std::string, std::pair<double, double>> out;
            for (const auto& [name, s] : hits_scores(fe)) out[name] = {s.hub, s.authority};
            return out;
        },
        py::arg("edges"));
}
