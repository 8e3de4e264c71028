// SPDX-License-Identifier: Apache-2.0
#include "spamnet/config.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include "spamnet/common.hpp"

namespace spamnet {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_uint(std::string_view key, std::string_view v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw std::invalid_argument("config: '" + std::string(key) + "' expects a non-negative integer, got '" +
                                    std::string(v) + "'");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view v) {
    try {
        return parse_double(v);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: '" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
    }
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: '" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'");
}

std::vector<std::string_view> split_list(std::string_view v) {
    std::vector<std::string_view> out;
    while (true) {
        const auto comma = v.find(',');
        out.push_back(trim(v.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<double> parse_reals(std::string_view key, std::string_view v) {
    std::vector<double> out;
    for (auto item : split_list(v)) out.push_back(parse_real(key, item));
    return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F fmt) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += fmt(xs[i]);
    }
    return s;
}

std::string_view kernel_key(KernelKind k) { return k == KernelKind::Linear ? "linear" : "rbf"; }

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "top_unigrams") clustering.top_k = parse_uint<std::size_t>(key, value);
    else if (key == "min_common") clustering.min_common = parse_uint<std::size_t>(key, value);
    else if (key == "jaccard_threshold") clustering.jaccard_threshold = parse_real(key, value);
    else if (key == "mode") mode = parse_feature_mode(value);
    else if (key == "max_levels") max_levels = parse_uint<std::size_t>(key, value);
    else if (key == "seed") seed = parse_uint<std::uint64_t>(key, value);
    else if (key == "workers") workers = parse_uint<std::size_t>(key, value);
    else if (key == "kernel") train.kernel = parse_kernel(value);
    else if (key == "kernel_grid") {
        train.kernel_grid.clear();
        for (auto item : split_list(value)) train.kernel_grid.push_back(parse_kernel(item));
    } else if (key == "nu_grid") train.nu_grid = parse_reals(key, value);
    else if (key == "gamma_grid") train.gamma_grid = parse_reals(key, value);
    else if (key == "max_iter") train.max_iter = parse_uint<std::size_t>(key, value);
    else if (key == "tolerance") train.tolerance = parse_real(key, value);
    else if (key == "standardize") train.standardize = parse_bool(key, value);
    else if (key == "background_samples") train.background_samples = parse_uint<std::size_t>(key, value);
    else if (key == "folds") folds = parse_uint<std::size_t>(key, value);
    else if (key == "feedback") feedback = parse_bool(key, value);
    else if (key == "population_reference") population_reference = parse_bool(key, value);
    else if (key == "holdout") holdout = parse_real(key, value);
    else if (key == "repeats") repeats = parse_uint<std::size_t>(key, value);
    else if (key == "smote_k") smote_k = parse_uint<std::size_t>(key, value);
    else if (key.starts_with("path.") && key.size() > 5) paths[std::string(key.substr(5))] = std::string(value);
    else throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
}

void RunConfig::apply_text(std::string_view text) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        set(trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

std::string RunConfig::to_text() const {
    std::ostringstream o;
    o << "top_unigrams = " << clustering.top_k << '\n'
      << "min_common = " << clustering.min_common << '\n'
      << "jaccard_threshold = " << format_double(clustering.jaccard_threshold) << '\n'
      << "mode = " << to_string(mode) << '\n'
      << "max_levels = " << max_levels << '\n'
      << "seed = " << seed << '\n'
      << "kernel = " << kernel_key(train.kernel) << '\n'
      << "kernel_grid = " << join(train.kernel_grid, [](KernelKind k) { return std::string(kernel_key(k)); }) << '\n'
      << "nu_grid = " << join(train.nu_grid, format_double) << '\n'
      << "gamma_grid = " << join(train.gamma_grid, format_double) << '\n'
      << "max_iter = " << train.max_iter << '\n'
      << "tolerance = " << format_double(train.tolerance) << '\n'
      << "standardize = " << (train.standardize ? "true" : "false") << '\n'
      << "background_samples = " << train.background_samples << '\n'
      << "folds = " << folds << '\n'
      << "feedback = " << (feedback ? "true" : "false") << '\n'
      << "population_reference = " << (population_reference ? "true" : "false") << '\n'
      << "holdout = " << format_double(holdout) << '\n'
      << "repeats = " << repeats << '\n'
      << "smote_k = " << smote_k << '\n';
    for (const auto& [k, v] : paths) o << "path." << k << " = " << v << '\n';
    return o.str();
}

void RunConfig::check() const {
    clustering.check();
    train.check();
    if (folds == 0) throw std::invalid_argument("config: folds must be positive");
    if (!(holdout > 0.0 && holdout < 1.0)) throw std::invalid_argument("config: holdout must be in (0,1)");
    if (repeats == 0) throw std::invalid_argument("config: repeats must be positive");
    if (smote_k == 0) throw std::invalid_argument("config: smote_k must be positive");
}

PipelineConfig RunConfig::pipeline() const {
    PipelineConfig p;
    p.features.mode = mode;
    p.features.tokenizer = clustering.tokenizer;
    p.feedback.train = train;
    p.feedback.train.seed = seed;
    p.feedback.folds = folds;
    p.feedback.max_levels = max_levels;
    p.feedback.feedback = feedback;
    p.feedback.population_reference = population_reference;
    p.seed = seed;
    p.smote = SmoteOptions{0.0, smote_k, false};
    return p;
}

}  // namespace spamnet
