// SPDX-License-Identifier: Apache-2.0
#include "spamnet/occ.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "spamnet/common.hpp"

namespace spamnet {

namespace {

constexpr double kTau = 1e-12;

double kernel(KernelKind kind, double gamma, std::span<const double> a, std::span<const double> b) {
    if (kind == KernelKind::Linear) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
        return s;
    }
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

std::vector<std::vector<double>> as_rows(const std::vector<FeatureVector>& vs) {
    std::vector<std::vector<double>> rows;
    rows.reserve(vs.size());
    for (const auto& v : vs) rows.push_back(v.values);
    return rows;
}

}  // namespace

std::string_view model_kind_name(KernelKind kind) {
    return kind == KernelKind::Linear ? "linear_nu_ocsvm" : "rbf_nu_ocsvm";
}

KernelKind parse_kernel(std::string_view s) {
    if (s == "linear" || s == "linear_nu_ocsvm") return KernelKind::Linear;
    if (s == "rbf" || s == "rbf_nu_ocsvm") return KernelKind::Rbf;
    throw std::invalid_argument("unknown kernel '" + std::string(s) + "'");
}

void TrainConfig::check() const {
    if (nu_grid.empty() || gamma_grid.empty()) throw std::invalid_argument("train config: grids must be nonempty");
    for (double nu : nu_grid) {
        if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("train config: nu must lie in (0, 1]");
    }
    for (double g : gamma_grid) {
        if (!(g > 0.0)) throw std::invalid_argument("train config: gamma must be positive");
    }
    if (!(tolerance > 0.0)) throw std::invalid_argument("train config: tolerance must be positive");
    if (max_iter == 0) throw std::invalid_argument("train config: max_iter must be positive");
}

OneClassDual solve_one_class_dual(std::span<const double> q, std::size_t n, double nu, double tol,
                                  std::size_t max_iter) {
    if (n == 0 || q.size() != n * n) throw std::invalid_argument("dual: kernel matrix must be n x n");
    auto Q = [&](std::size_t i, std::size_t j) { return q[i * n + j]; };

    OneClassDual out;
    auto& alpha = out.alpha;
    alpha.assign(n, 0.0);
    const double total = nu * static_cast<double>(n);
    const auto whole = static_cast<std::size_t>(std::floor(total));
    for (std::size_t i = 0; i < whole && i < n; ++i) alpha[i] = 1.0;
    if (whole < n) alpha[whole] = total - static_cast<double>(whole);

    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0.0) continue;
        for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * alpha[i];
    }

    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (alpha[t] < 1.0 && -grad[t] >= gmax) {
                gmax = -grad[t];
                i = t;
            }
        }
        if (i == n) break;
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (alpha[t] <= 0.0) continue;
            gmax2 = std::max(gmax2, grad[t]);
            const double b = gmax + grad[t];
            if (b > 0.0) {
                double a = Q(i, i) + Q(t, t) - 2.0 * Q(i, t);
                if (a <= 0.0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj <= best) {
                    best = obj;
                    j = t;
                }
            }
        }
        if (gmax + gmax2 < tol || j == n) break;

        double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
        if (quad <= 0.0) quad = kTau;
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        const double delta = (grad[i] - grad[j]) / quad;
        const double sum = old_i + old_j;
        double ai = old_i - delta;
        double aj = old_j + delta;
        if (sum > 1.0) {
            if (ai > 1.0) {
                ai = 1.0;
                aj = sum - 1.0;
            }
        } else if (aj < 0.0) {
            aj = 0.0;
            ai = sum;
        }
        if (sum > 1.0) {
            if (aj > 1.0) {
                aj = 1.0;
                ai = sum - 1.0;
            }
        } else if (ai < 0.0) {
            ai = 0.0;
            aj = sum;
        }
        alpha[i] = ai;
        alpha[j] = aj;
        const double di = ai - old_i;
        const double dj = aj - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * di + Q(t, j) * dj;
    }
    out.iterations = iter;

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t nr_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] >= 1.0) {
            lb = std::max(lb, grad[t]);
        } else if (alpha[t] <= 0.0) {
            ub = std::min(ub, grad[t]);
        } else {
            sum_free += grad[t];
            ++nr_free;
        }
    }
    out.rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : (ub + lb) / 2.0;
    double obj = 0.0;
    for (std::size_t t = 0; t < n; ++t) obj += alpha[t] * grad[t];
    out.objective = obj / 2.0;
    return out;
}

double OneClassModel::score(std::span<const double> x) const {
    if (x.size() != feature_dim) {
        throw std::invalid_argument("score: expected " + std::to_string(feature_dim) + " features, got " +
                                    std::to_string(x.size()));
    }
    std::vector<double> z = standardizer ? standardizer->apply(x) : std::vector<double>(x.begin(), x.end());
    double s = 0.0;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) {
        s += coefficients[i] * kernel(kind, gamma, support_vectors[i], z);
    }
    return s - rho;
}

std::string OneClassModel::to_json(const TrainConfig* cfg) const {
    nlohmann::ordered_json j;
    j["kind"] = std::string(model_kind_name(kind));
    j["nu"] = nu;
    j["gamma"] = gamma;
    j["rho"] = rho;
    j["feature_dim"] = feature_dim;
    j["training_size"] = training_size;
    j["support_vectors"] = support_vectors;
    j["coefficients"] = coefficients;
    if (standardizer) {
        j["standardization"] = {{"mean", standardizer->mean()}, {"scale", standardizer->scale()}};
    } else {
        j["standardization"] = nullptr;
    }
    if (cfg) {
        std::vector<std::string> kernels;
        for (auto k : cfg->kernel_grid) kernels.emplace_back(k == KernelKind::Linear ? "linear" : "rbf");
        j["config"] = {{"kernel", cfg->kernel == KernelKind::Linear ? "linear" : "rbf"},
                       {"kernel_grid", kernels},
                       {"nu_grid", cfg->nu_grid},
                       {"gamma_grid", cfg->gamma_grid},
                       {"seed", cfg->seed},
                       {"max_iter", cfg->max_iter},
                       {"tolerance", cfg->tolerance},
                       {"standardize", cfg->standardize},
                       {"folds", cfg->folds},
                       {"background_samples", cfg->background_samples}};
    }
    return j.dump(2);
}

OneClassModel OneClassModel::from_json(std::string_view text) {
    try {
        auto j = nlohmann::json::parse(text);
        OneClassModel m;
        m.kind = parse_kernel(j.at("kind").get<std::string>());
        m.nu = j.at("nu").get<double>();
        m.gamma = j.at("gamma").get<double>();
        m.rho = j.at("rho").get<double>();
        m.feature_dim = j.at("feature_dim").get<std::size_t>();
        m.training_size = j.value("training_size", std::size_t{0});
        m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
        m.coefficients = j.at("coefficients").get<std::vector<double>>();
        if (const auto& st = j.at("standardization"); !st.is_null()) {
            m.standardizer = Standardizer(st.at("mean").get<std::vector<double>>(),
                                          st.at("scale").get<std::vector<double>>());
        }
        if (m.support_vectors.size() != m.coefficients.size()) throw DataError("model: coefficient count mismatch");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model: ") + e.what());
    }
}

OneClassModel fit(std::span<const std::vector<double>> target, const TrainConfig& cfg,
                  std::span<const std::vector<double>> reference) {
    cfg.check();
    if (target.size() < 2) throw Error("insufficient training samples: need at least 2, got " + std::to_string(target.size()));
    const std::size_t d = target.front().size();
    for (const auto& r : target) {
        if (r.size() != d) throw std::invalid_argument("fit: ragged training rows");
    }

    OneClassModel m;
    m.kind = cfg.kernel;
    m.nu = cfg.nu_grid.front();
    m.gamma = cfg.gamma_grid.front();
    m.feature_dim = d;
    m.training_size = target.size();

    std::vector<std::vector<double>> z;
    z.reserve(target.size());
    if (cfg.standardize) {
        m.standardizer = Standardizer::fit(reference.empty() ? target : reference);
        for (const auto& r : target) z.push_back(m.standardizer->apply(r));
    } else {
        z.assign(target.begin(), target.end());
    }

    const std::size_t n = z.size();
    std::vector<double> q(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            q[i * n + j] = q[j * n + i] = kernel(m.kind, m.gamma, z[i], z[j]);
        }
    }
    auto dual = solve_one_class_dual(q, n, m.nu, cfg.tolerance, cfg.max_iter);
    for (std::size_t i = 0; i < n; ++i) {
        if (dual.alpha[i] > 0.0) {
            m.support_vectors.push_back(z[i]);
            m.coefficients.push_back(dual.alpha[i]);
        }
    }
    // Free support vectors lie on the boundary. Taking ρ as their smallest
    // decision value, evaluated exactly as score() will, keeps them at
    // score >= 0 instead of a rounding-dependent ±1e-12.
    m.rho = 0.0;
    double rho = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (dual.alpha[i] > 0.0 && dual.alpha[i] < 1.0) rho = std::min(rho, m.score(target[i]));
    }
    m.rho = std::isfinite(rho) ? rho : dual.rho;
    return m;
}

OneClassModel fit(const std::vector<FeatureVector>& target, const TrainConfig& cfg) {
    const auto rows = as_rows(target);
    return fit(std::span<const std::vector<double>>(rows), cfg);
}

double score(const OneClassModel& model, const FeatureVector& x) { return model.score(x); }

std::vector<GridPoint> evaluate_grid(std::span<const std::vector<double>> target, const TrainConfig& cfg,
                                     std::size_t folds, std::span<const std::vector<double>> reference) {
    cfg.check();
    const std::size_t n = target.size();
    if (n < 2) throw Error("insufficient training samples: need at least 2, got " + std::to_string(n));
    const std::size_t d = target.front().size();

    std::size_t k = std::min(folds, n);
    if (n < 3 || k < 2) k = 0;  // in-sample acceptance
    std::vector<std::size_t> fold_of(n, 0);
    if (k > 0) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(derive_seed(cfg.seed, 1));
        rng.shuffle(perm);
        for (std::size_t p = 0; p < n; ++p) fold_of[perm[p]] = p % k;
    }

    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    const auto box_rows = reference.empty() ? target : reference;
    for (const auto& r : box_rows) {
        if (r.size() != d) throw std::invalid_argument("evaluate_grid: rows differ in dimension");
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], r[j]);
            hi[j] = std::max(hi[j], r[j]);
        }
    }
    std::vector<double> spread(d, 0.0);
    if (reference.empty()) spread = Standardizer::fit(target).scale();
    std::vector<std::vector<double>> background(cfg.background_samples, std::vector<double>(d));
    {
        Rng rng(derive_seed(cfg.seed, 2));
        for (auto& p : background) {
            for (std::size_t j = 0; j < d; ++j) {
                const double a = lo[j] - spread[j];
                const double b = hi[j] + spread[j];
                p[j] = a + (b - a) * rng.uniform();
            }
        }
    }

    std::vector<KernelKind> kernels = cfg.kernel_grid;
    if (kernels.empty()) kernels.push_back(cfg.kernel);
    std::vector<GridPoint> out;
    for (KernelKind kind : kernels) {
        const std::vector<double> gammas =
            kind == KernelKind::Linear ? std::vector<double>{cfg.gamma_grid.front()} : cfg.gamma_grid;
        for (double nu : cfg.nu_grid) {
            for (double gamma : gammas) {
                TrainConfig point = cfg;
                point.kernel = kind;
                point.nu_grid = {nu};
                point.gamma_grid = {gamma};
                GridPoint gp{kind, nu, gamma, 0.0, 0.0};

                const auto full = fit(target, point, reference);
                std::size_t accepted = 0;
                if (k == 0) {
                    for (const auto& r : target) accepted += full.accepts(r) ? 1 : 0;
                } else {
                    for (std::size_t f = 0; f < k; ++f) {
                        std::vector<std::vector<double>> train;
                        for (std::size_t i = 0; i < n; ++i) {
                            if (fold_of[i] != f) train.push_back(target[i]);
                        }
                        const auto m = fit(std::span<const std::vector<double>>(train), point, reference);
                        for (std::size_t i = 0; i < n; ++i) {
                            if (fold_of[i] == f && m.accepts(target[i])) ++accepted;
                        }
                    }
                }
                gp.acceptance = static_cast<double>(accepted) / static_cast<double>(n);
                if (!background.empty()) {
                    std::size_t bg = 0;
                    for (const auto& p : background) bg += full.accepts(p) ? 1 : 0;
                    gp.background_acceptance = static_cast<double>(bg) / static_cast<double>(background.size());
                }
                out.push_back(gp);
            }
        }
    }
    return out;
}

TrainConfig grid_search(std::span<const std::vector<double>> target, const TrainConfig& cfg, std::size_t folds,
                        std::span<const std::vector<double>> reference) {
    TrainConfig best = cfg;
    const bool one_kernel = cfg.kernel_grid.size() <= 1;
    const KernelKind only = cfg.kernel_grid.empty() ? cfg.kernel : cfg.kernel_grid.front();
    if (one_kernel && cfg.nu_grid.size() == 1 && (cfg.gamma_grid.size() == 1 || only == KernelKind::Linear)) {
        best.kernel = only;
        best.kernel_grid = {only};
        best.gamma_grid = {cfg.gamma_grid.front()};
        return best;
    }
    const auto points = evaluate_grid(target, cfg, folds, reference);
    std::size_t pick = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].objective() > points[pick].objective()) pick = i;
    }
    best.kernel = points[pick].kernel;
    best.kernel_grid = {points[pick].kernel};
    best.nu_grid = {points[pick].nu};
    best.gamma_grid = {points[pick].gamma};
    return best;
}

TrainConfig grid_search(const std::vector<FeatureVector>& target, const TrainConfig& cfg, std::size_t folds) {
    const auto rows = as_rows(target);
    return grid_search(std::span<const std::vector<double>>(rows), cfg, folds);
}

}  // namespace spamnet
