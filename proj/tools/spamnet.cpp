// SPDX-License-Identifier: Apache-2.0
// spamnet command-line driver. Every stage reads the previous stage's files
// and writes its own into --out together with run_config.txt and
// manifest.json.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spamnet/campaigns.hpp"
#include "spamnet/common.hpp"
#include "spamnet/config.hpp"
#include "spamnet/corpus.hpp"
#include "spamnet/eval.hpp"
#include "spamnet/features.hpp"
#include "spamnet/feedback.hpp"
#include "spamnet/hin.hpp"
#include "spamnet/hmps.hpp"
#include "spamnet/synth.hpp"

namespace fs = std::filesystem;
using namespace spamnet;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOpts {
    std::string out;
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::size_t> top_unigrams;
    std::optional<std::size_t> min_common;
    std::optional<double> jaccard_threshold;
    std::optional<std::string> mode;
    std::optional<std::size_t> max_levels;
    std::optional<std::string> kernel;
    std::optional<std::size_t> repeats;
    std::optional<double> holdout;
    bool no_feedback = false;
    // inputs
    std::string corpus_dir;
    std::string tweets, users, edges;
    std::string campaigns, scores, features;
};

void add_common(CLI::App* app, CommonOpts& o, bool needs_out = true) {
    auto* out = app->add_option("--out", o.out, "Output directory");
    if (needs_out) out->required();
    app->add_option("--config", o.config_file, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--seed", o.seed, "Seed (default 7)");
    app->add_option("--workers", o.workers, "Worker threads; outputs do not depend on it");
}

void add_corpus(CLI::App* app, CommonOpts& o) {
    app->add_option("--corpus", o.corpus_dir, "Directory holding tweets.jsonl, users.jsonl, edges.csv");
    app->add_option("--tweets", o.tweets, "tweets.jsonl");
    app->add_option("--users", o.users, "users.jsonl");
    app->add_option("--edges", o.edges, "edges.csv (follower,followee)");
}

void add_clustering(CLI::App* app, CommonOpts& o) {
    app->add_option("--top-unigrams", o.top_unigrams, "Signature size per phone (default 30)");
    app->add_option("--min-common", o.min_common, "Shared unigrams needed to keep a tweet (default 5)");
    app->add_option("--jaccard-threshold", o.jaccard_threshold, "Merge when Jaccard is strictly above (default 0.7)");
}

void add_training(CLI::App* app, CommonOpts& o) {
    app->add_option("--mode", o.mode, "hmps or hmps+osn2 (default)");
    app->add_option("--max-levels", o.max_levels, "Feedback level cap (default: number of users)");
    app->add_option("--kernel", o.kernel, "Restrict grid search to one kernel: rbf or linear");
    app->add_flag("--no-feedback", o.no_feedback, "Single pass without cross-campaign transfers");
}

RunConfig resolve(const CommonOpts& o) {
    RunConfig cfg;
    if (!o.config_file.empty()) {
        std::ifstream f(o.config_file);
        std::stringstream ss;
        ss << f.rdbuf();
        cfg.apply_text(ss.str());
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.workers) cfg.workers = *o.workers;
    if (o.top_unigrams) cfg.clustering.top_k = *o.top_unigrams;
    if (o.min_common) cfg.clustering.min_common = *o.min_common;
    if (o.jaccard_threshold) cfg.clustering.jaccard_threshold = *o.jaccard_threshold;
    if (o.mode) cfg.mode = parse_feature_mode(*o.mode);
    if (o.max_levels) cfg.max_levels = *o.max_levels;
    if (o.kernel) {
        cfg.train.kernel = parse_kernel(*o.kernel);
        cfg.train.kernel_grid = {cfg.train.kernel};
    }
    if (o.repeats) cfg.repeats = *o.repeats;
    if (o.holdout) cfg.holdout = *o.holdout;
    if (o.no_feedback) cfg.feedback = false;
    if (cfg.workers == 0) cfg.workers = 1;
    cfg.check();
    return cfg;
}

std::string pick(const std::string& explicit_path, const std::string& dir, const char* name) {
    if (!explicit_path.empty()) return explicit_path;
    if (!dir.empty()) return (fs::path(dir) / name).string();
    return {};
}

Corpus load(const CommonOpts& o, RunConfig& cfg) {
    const auto tweets = pick(o.tweets, o.corpus_dir, "tweets.jsonl");
    const auto users = pick(o.users, o.corpus_dir, "users.jsonl");
    auto edges = pick(o.edges, o.corpus_dir, "edges.csv");
    if (tweets.empty() || users.empty()) throw UsageError("need --corpus or both --tweets and --users");
    std::optional<fs::path> edge_path;
    if (!edges.empty() && (fs::exists(edges) || !o.edges.empty())) edge_path = edges;
    cfg.paths["tweets"] = tweets;
    cfg.paths["users"] = users;
    if (edge_path) cfg.paths["edges"] = edge_path->string();
    auto corpus = load_corpus(tweets, users, edge_path);
    for (const auto& w : corpus.warnings()) std::cerr << "warning: " << w << '\n';
    return corpus;
}

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    return f;
}

// Lists every regular file under `dir` (except the manifest itself) with
// its size; no timestamps so reruns compare byte-for-byte.
void write_manifest(const fs::path& dir, const std::string& command) {
    std::vector<std::pair<std::string, std::uintmax_t>> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), dir).generic_string();
        if (rel == "manifest.json") continue;
        files.emplace_back(rel, e.file_size());
    }
    std::sort(files.begin(), files.end());
    nlohmann::ordered_json j;
    j["command"] = command;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [name, size] : files) arr.push_back({{"path", name}, {"bytes", size}});
    j["files"] = std::move(arr);
    auto f = open_out(dir / "manifest.json");
    f << j.dump(2) << '\n';
}

void write_config(const fs::path& dir, const RunConfig& cfg) {
    auto f = open_out(dir / "run_config.txt");
    f << cfg.to_text();
}

std::vector<Campaign> load_or_identify_campaigns(const CommonOpts& o, const Corpus& corpus, RunConfig& cfg) {
    if (!o.campaigns.empty()) {
        cfg.paths["campaigns"] = o.campaigns;
        std::ifstream f(o.campaigns);
        if (!f) throw DataError("cannot read " + o.campaigns);
        return read_campaigns_jsonl(f, corpus);
    }
    return identify_campaigns(corpus, cfg.clustering, cfg.workers);
}

// ---- stages ------------------------------------------------------------------

void stage_campaigns(const Corpus& corpus, const RunConfig& cfg, const fs::path& out, std::vector<Campaign>& campaigns) {
    const auto docs = build_phone_documents(corpus, cfg.clustering, cfg.workers);
    campaigns = merge_into_campaigns(docs, cfg.clustering, corpus, cfg.workers);
    {
        auto f = open_out(out / "campaigns.jsonl");
        write_campaigns_jsonl(f, campaigns);
    }
    nlohmann::ordered_json s;
    s["phone_documents"] = docs.size();
    s["campaigns"] = campaigns.size();
    s["campaigns_with_spammers"] = filter_campaigns_with_spammers(campaigns).size();
    if (campaigns.size() >= 2) s["silhouette"] = silhouette_check(docs, campaigns);
    else s["silhouette"] = nullptr;
    auto f = open_out(out / "campaigns_summary.json");
    f << s.dump(2) << '\n';
}

std::vector<HmpsScore> stage_hmps(const Corpus& corpus, const std::vector<Campaign>& campaigns, const RunConfig& cfg,
                                  const fs::path& out, bool dump_trees) {
    const auto kept = filter_campaigns_with_spammers(campaigns);
    const auto trees = build_trees(corpus, kept, cfg.workers);
    auto scores = score_trees(trees, cfg.workers);
    auto f = open_out(out / "scores.csv");
    write_scores_csv(f, scores);
    if (dump_trees) {
        for (const auto& t : trees) {
            auto tf = open_out(out / "trees" / ("campaign_" + std::to_string(t.campaign_id()) + ".json"));
            t.write_json(tf);
        }
    }
    return scores;
}

std::vector<FeatureVector> stage_features(const Corpus& corpus, const std::vector<HmpsScore>& scores,
                                          const RunConfig& cfg, const fs::path& out) {
    FeatureOptions fo = cfg.pipeline().features;
    auto vectors = assemble(scores, corpus, fo, cfg.workers);
    auto f = open_out(out / "features.csv");
    write_features_csv(f, vectors, feature_names(cfg.mode));
    return vectors;
}

void stage_train(const std::vector<Campaign>& campaigns, const std::vector<FeatureVector>& vectors,
                 const RunConfig& cfg, const fs::path& out) {
    auto fb = cfg.pipeline().feedback;
    fb.workers = cfg.workers;
    auto state = init(filter_campaigns_with_spammers(campaigns), vectors);
    for (const auto& w : state.warnings) std::cerr << "warning: " << w << '\n';
    state = run_until_convergence(std::move(state), fb);
    {
        auto f = open_out(out / "predictions.csv");
        write_predictions_csv(f, predict_all(state));
    }
    {
        auto f = open_out(out / "feedback_log.jsonl");
        write_feedback_log_jsonl(f, state.log);
    }
    nlohmann::ordered_json s;
    s["levels"] = state.level;
    s["converged"] = state.converged;
    s["transfers"] = state.log.size();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : state.campaigns) {
        nlohmann::ordered_json e;
        e["campaign_id"] = c.campaign_id;
        e["users"] = c.users.size();
        e["original_training"] = c.original_training.size();
        e["training"] = c.training_set.size();
        e["model"] = c.model ? nlohmann::ordered_json(std::string(model_kind_name(c.model->kind)))
                             : nlohmann::ordered_json(nullptr);
        e["t_max"] = c.t_max ? nlohmann::ordered_json(*c.t_max) : nlohmann::ordered_json(nullptr);
        arr.push_back(std::move(e));
        if (c.model) {
            auto mf = open_out(out / "models" / ("campaign_" + std::to_string(c.campaign_id) + ".json"));
            mf << c.model->to_json(c.model_config ? &*c.model_config : nullptr) << '\n';
        }
    }
    s["campaigns"] = std::move(arr);
    s["warnings"] = state.warnings;
    auto f = open_out(out / "train_summary.json");
    f << s.dump(2) << '\n';
}

void stage_eval(const std::string& which, const Corpus& corpus, std::vector<Campaign> campaigns, const RunConfig& cfg,
                const fs::path& out, bool before_split) {
    const auto pc = cfg.pipeline();
    const auto inputs = prepare_inputs(corpus, std::move(campaigns), pc, cfg.workers);
    nlohmann::ordered_json doc;
    if (which == "setting1" || which == "all") {
        auto r = setting1_loo(inputs, pc, cfg.workers);
        doc["setting1"] = nlohmann::ordered_json::parse(r.report.to_json());
        auto f = open_out(out / "setting1_heldout.csv");
        f << "user_id,recovered\n";
        for (const auto& [u, hit] : r.recovered) f << u << ',' << (hit ? 1 : 0) << '\n';
    }
    if (which == "setting2" || which == "all") {
        auto r = setting2_holdout(inputs, pc, cfg.holdout, cfg.repeats, cfg.workers);
        doc["setting2"] = nlohmann::ordered_json::parse(r.to_json());
    }
    if (which == "ablation" || which == "all") {
        auto rows = ablation_suite(inputs, pc, cfg.holdout, cfg.repeats, cfg.workers, before_split);
        auto f = open_out(out / "ablation.csv");
        write_ablation_csv(f, rows);
        doc["ablation"] = nlohmann::ordered_json::parse(ablation_json(rows))["ablation"];
        write_ablation_csv(std::cout, rows);
    }
    auto f = open_out(out / "metrics.json");
    f << doc.dump(2) << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"Phone-number spam campaign detection: campaigns, HMPS features, one-class models with feedback"};
    app.require_subcommand(1);
    CommonOpts o;

    SynthConfig sc;
    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    add_common(synth, o);
    synth->add_option("--campaigns", sc.n_campaigns, "Planted campaigns");
    synth->add_option("--users-per-campaign", sc.users_per_campaign, "User slots per campaign");
    synth->add_option("--phones-per-campaign", sc.phones_per_campaign, "Phone numbers per campaign");
    synth->add_option("--urls-per-campaign", sc.urls_per_campaign, "URLs per campaign");
    synth->add_option("--tweets-per-user", sc.tweets_per_user, "Tweets per benign user in each campaign");
    synth->add_option("--overlap", sc.overlap_fraction, "Fraction of users in two campaigns");
    synth->add_option("--spammer-fraction", sc.spammer_fraction, "Spammers among single-campaign users");
    synth->add_option("--overlap-spammer-fraction", sc.overlap_spammer_fraction, "Spammers among users in two campaigns");
    synth->add_option("--suspended-fraction", sc.suspended_fraction, "Suspended share of spammers (at least one per campaign)");
    synth->add_option("--annotated-fraction", sc.annotated_fraction, "Annotated share of non-suspended users");
    synth->add_option("--vocab-size", sc.vocab_size, "Vocabulary size");
    synth->add_option("--signature-size", sc.signature_size, "Words in each campaign template");

    auto* camp = app.add_subcommand("campaigns", "Group phone numbers into campaigns -> campaigns.jsonl");
    add_common(camp, o);
    add_corpus(camp, o);
    add_clustering(camp, o);

    bool dump_trees = false;
    auto* hm = app.add_subcommand("hmps", "Build campaign trees and score users -> scores.csv");
    add_common(hm, o);
    add_corpus(hm, o);
    hm->add_option("--campaigns", o.campaigns, "campaigns.jsonl")->required();
    hm->add_flag("--dump-trees", dump_trees, "Also write trees/campaign_<id>.json");

    auto* feat = app.add_subcommand("features", "Assemble feature vectors -> features.csv");
    add_common(feat, o);
    add_corpus(feat, o);
    feat->add_option("--scores", o.scores, "scores.csv")->required();
    feat->add_option("--mode", o.mode, "hmps or hmps+osn2 (default)");

    auto* train = app.add_subcommand("train", "Feedback loop -> predictions.csv, feedback_log.jsonl");
    add_common(train, o);
    add_corpus(train, o);
    train->add_option("--campaigns", o.campaigns, "campaigns.jsonl")->required();
    train->add_option("--features", o.features, "features.csv")->required();
    add_training(train, o);

    std::string which;
    bool before_split = false;
    auto* ev = app.add_subcommand("eval", "Experimental settings -> metrics.json");
    add_common(ev, o);
    add_corpus(ev, o);
    ev->add_option("setting", which, "setting1, setting2 or ablation")
        ->required()
        ->check(CLI::IsMember({"setting1", "setting2", "ablation"}));
    ev->add_option("--campaigns", o.campaigns, "campaigns.jsonl (recomputed when absent)");
    add_clustering(ev, o);
    add_training(ev, o);
    ev->add_option("--repeats", o.repeats, "Holdout repeats (default 50)");
    ev->add_option("--holdout", o.holdout, "Holdout fraction (default 0.2)");
    ev->add_flag("--before-split", before_split, "Ablation: add oversample-before-split rows (leaks test points)");

    bool with_eval = false;
    auto* pipe = app.add_subcommand("pipeline", "All stages; generates the synthetic benchmark without inputs");
    add_common(pipe, o);
    add_corpus(pipe, o);
    add_clustering(pipe, o);
    add_training(pipe, o);
    pipe->add_flag("--eval", with_eval, "Also run setting1, setting2 and the ablation");
    pipe->add_option("--repeats", o.repeats, "Holdout repeats (default 50)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    RunConfig cfg = resolve(o);
    const fs::path out = o.out;
    fs::create_directories(out);
    const std::string command = app.get_subcommands().front()->get_name();

    if (*synth) {
        if (o.seed) sc.seed = *o.seed;
        else sc.seed = cfg.seed;
        auto data = generate(sc);
        write_synth(data, sc, out);
        cfg.seed = sc.seed;
    } else if (*camp) {
        auto corpus = load(o, cfg);
        std::vector<Campaign> campaigns;
        stage_campaigns(corpus, cfg, out, campaigns);
    } else if (*hm) {
        auto corpus = load(o, cfg);
        auto campaigns = load_or_identify_campaigns(o, corpus, cfg);
        stage_hmps(corpus, campaigns, cfg, out, dump_trees);
    } else if (*feat) {
        auto corpus = load(o, cfg);
        cfg.paths["scores"] = o.scores;
        std::ifstream f(o.scores);
        if (!f) throw DataError("cannot read " + o.scores);
        stage_features(corpus, read_scores_csv(f), cfg, out);
    } else if (*train) {
        auto corpus = load(o, cfg);
        auto campaigns = load_or_identify_campaigns(o, corpus, cfg);
        cfg.paths["features"] = o.features;
        std::ifstream f(o.features);
        if (!f) throw DataError("cannot read " + o.features);
        std::vector<std::string> names;
        auto vectors = read_features_csv(f, &names);
        if (names != feature_names(cfg.mode)) {
            // The file decides the feature set; keep the recorded mode honest.
            if (names == feature_names(FeatureMode::Hmps)) cfg.mode = FeatureMode::Hmps;
            else if (names == feature_names(FeatureMode::HmpsOsn2)) cfg.mode = FeatureMode::HmpsOsn2;
            else throw DataError("features.csv: unexpected columns");
        }
        stage_train(campaigns, vectors, cfg, out);
    } else if (*ev) {
        auto corpus = load(o, cfg);
        auto campaigns = load_or_identify_campaigns(o, corpus, cfg);
        stage_eval(which, corpus, std::move(campaigns), cfg, out, before_split);
    } else if (*pipe) {
        CommonOpts in = o;
        if (o.corpus_dir.empty() && o.tweets.empty()) {
            SynthConfig def;
            def.seed = cfg.seed;
            write_synth(generate(def), def, out / "corpus");
            in.corpus_dir = (out / "corpus").string();
        }
        auto corpus = load(in, cfg);
        std::vector<Campaign> campaigns;
        stage_campaigns(corpus, cfg, out, campaigns);
        auto scores = stage_hmps(corpus, campaigns, cfg, out, false);
        auto vectors = stage_features(corpus, scores, cfg, out);
        stage_train(campaigns, vectors, cfg, out);
        if (with_eval) stage_eval("all", corpus, campaigns, cfg, out, false);
    }
    write_config(out, cfg);
    write_manifest(out, command);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const spamnet::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
