// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "spamnet/occ.hpp"
#include "support.hpp"

using namespace spamnet;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows blob(std::uint64_t seed, std::size_t n, std::vector<double> centre, double spread) {
    Rng rng(seed);
    Rows out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r = centre;
        for (auto& x : r) {
            // Box-Muller
            const double u1 = rng.uniform_open(), u2 = rng.uniform();
            x += spread * std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
        }
        out.push_back(r);
    }
    return out;
}

TrainConfig single(KernelKind k, double nu, double gamma, bool standardize = true) {
    TrainConfig c;
    c.kernel = k;
    c.kernel_grid = {k};
    c.nu_grid = {nu};
    c.gamma_grid = {gamma};
    c.standardize = standardize;
    return c;
}

double rbf(const std::vector<double>& a, const std::vector<double>& b, double g) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-g * d);
}

}  // namespace

TEST(Occ, NuPropertyBoundsTrainingRejections) {
    auto rows = blob(1, 200, {0.0, 0.0}, 1.0);
    for (double nu : TrainConfig{}.nu_grid) {
        for (auto k : {KernelKind::Rbf, KernelKind::Linear}) {
            auto m = fit(rows, single(k, nu, 0.5));
            std::size_t neg = 0;
            for (const auto& r : rows) neg += m.score(r) < 0.0;
            EXPECT_LE(static_cast<double>(neg) / rows.size(), nu + 0.05) << "nu " << nu;
        }
    }
    auto hundred = blob(2, 100, {3.0, -1.0}, 0.5);
    auto m = fit(hundred, single(KernelKind::Rbf, 0.1, 1.0));
    std::size_t neg = 0;
    for (const auto& r : hundred) neg += m.score(r) < 0.0;
    EXPECT_LE(neg, 10u);
}

TEST(Occ, IdenticalPairBothAccepted) {
    Rows rows{{1.0, 2.0}, {1.0, 2.0}};
    for (auto k : {KernelKind::Rbf, KernelKind::Linear}) {
        auto m = fit(rows, single(k, 0.1, 1.0));
        EXPECT_GE(m.score(rows[0]), 0.0);
        EXPECT_GE(m.score(rows[1]), 0.0);
    }
}

TEST(Occ, DualMatchesGenericSolver) {
    auto rows = blob(3, 25, {0.0, 0.0}, 0.3);
    const double gamma = 1.0;
    const std::size_t n = rows.size();
    std::vector<double> q(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q[i * n + j] = rbf(rows[i], rows[j], gamma);
    for (double nu : {0.1, 0.3}) {
        auto dual = solve_one_class_dual(q, n, nu, 1e-10, 1000000);
        auto ref = spamnet::testing::oracle_box_simplex_qp(q, n, nu * n);
        const double mine = spamnet::testing::quad_objective(q, n, dual.alpha);
        const double theirs = spamnet::testing::quad_objective(q, n, ref);
        EXPECT_NEAR(mine, theirs, 1e-7 * std::max(1.0, std::abs(theirs)));
        EXPECT_LE(mine, theirs + 1e-9);
        double sum = 0;
        for (double a : dual.alpha) {
            EXPECT_GE(a, 0.0);
            EXPECT_LE(a, 1.0);
            sum += a;
        }
        EXPECT_NEAR(sum, nu * n, 1e-9);
    }
}

TEST(Occ, FarOutlierRejectedAndCentroidAccepted) {
    auto rows = blob(4, 40, {0.0, 0.0}, 0.2);
    const double nu = 0.2, gamma = 0.1;
    auto m = fit(rows, single(KernelKind::Rbf, nu, gamma));
    const std::vector<double> centre{0.0, 0.0}, far{10.0, 10.0};
    EXPECT_GT(m.score(centre), 0.0);
    EXPECT_LT(m.score(far), 0.0);
    // The generic solver agrees on both signs.
    const std::size_t n = rows.size();
    auto s = Standardizer::fit(rows);
    Rows z;
    for (const auto& r : rows) z.push_back(s.apply(r));
    std::vector<double> q(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q[i * n + j] = rbf(z[i], z[j], gamma);
    auto alpha = spamnet::testing::oracle_box_simplex_qp(q, n, nu * n);
    auto f = [&](const std::vector<double>& x) {
        double v = 0;
        for (std::size_t i = 0; i < n; ++i) v += alpha[i] * rbf(z[i], x, gamma);
        return v;
    };
    double rho = 1e300;
    for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > 1e-6 && alpha[i] < 1 - 1e-6) rho = std::min(rho, f(z[i]));
    EXPECT_GT(f(s.apply(centre)) - rho, 0.0);
    EXPECT_LT(f(s.apply(far)) - rho, 0.0);
}

TEST(Occ, FreeSupportVectorsOnBoundary) {
    auto rows = blob(5, 60, {1.0, 1.0}, 1.0);
    auto cfg = single(KernelKind::Rbf, 0.2, 0.5);
    auto m = fit(rows, cfg);
    // Rebuild the dual to locate the free support vectors.
    auto s = *m.standardizer;
    const std::size_t n = rows.size();
    std::vector<double> q(n * n);
    Rows z;
    for (const auto& r : rows) z.push_back(s.apply(r));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q[i * n + j] = rbf(z[i], z[j], 0.5);
    auto dual = solve_one_class_dual(q, n, 0.2, cfg.tolerance, cfg.max_iter);
    std::size_t free = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (dual.alpha[i] > 0.0 && dual.alpha[i] < 1.0) {
            ++free;
            EXPECT_NEAR(m.score(rows[i]), 0.0, 1e-6);
            EXPECT_GE(m.score(rows[i]), 0.0);
        }
    }
    EXPECT_GT(free, 0u);
}

TEST(Occ, DeterministicAndSerializable) {
    auto rows = blob(6, 30, {0.0, 5.0, -1.0}, 1.0);
    auto cfg = single(KernelKind::Rbf, 0.1, 0.5);
    auto a = fit(rows, cfg);
    auto b = fit(rows, cfg);
    EXPECT_EQ(a.to_json(&cfg), b.to_json(&cfg));
    auto back = OneClassModel::from_json(a.to_json(&cfg));
    for (const auto& r : blob(7, 20, {0.0, 5.0, -1.0}, 2.0)) {
        EXPECT_EQ(a.score(r), a.score(r));
        EXPECT_NEAR(back.score(r), a.score(r), 1e-12);
    }
}

TEST(Occ, StandardizingMatchesPrestandardizedFit) {
    auto rows = blob(8, 50, {10.0, -4.0}, 3.0);
    auto probes = blob(9, 40, {10.0, -4.0}, 5.0);
    auto s = Standardizer::fit(rows);
    Rows z;
    for (const auto& r : rows) z.push_back(s.apply(r));
    auto m1 = fit(rows, single(KernelKind::Rbf, 0.1, 0.5, true));
    auto m2 = fit(z, single(KernelKind::Rbf, 0.1, 0.5, false));
    for (const auto& p : probes) EXPECT_EQ(m1.accepts(p), m2.accepts(s.apply(p)));
}

TEST(Occ, Errors) {
    EXPECT_THROW(fit(Rows{{1.0}}, single(KernelKind::Rbf, 0.1, 1.0)), Error);
    auto m = fit(Rows{{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, single(KernelKind::Rbf, 0.1, 1.0));
    EXPECT_THROW(m.score(std::vector<double>{1.0}), std::invalid_argument);
    TrainConfig bad;
    bad.nu_grid.clear();
    EXPECT_THROW(bad.check(), std::invalid_argument);
}

TEST(GridSearch, SinglePointGrid) {
    auto rows = blob(10, 20, {0.0, 0.0}, 1.0);
    auto best = grid_search(rows, single(KernelKind::Rbf, 0.2, 2.0), 3);
    EXPECT_EQ(best.nu_grid, std::vector<double>{0.2});
    EXPECT_EQ(best.gamma_grid, std::vector<double>{2.0});
    EXPECT_EQ(best.kernel, KernelKind::Rbf);
}

TEST(GridSearch, DegenerateDataPicksSmallestNu) {
    Rows rows(10, std::vector<double>{1.0, 1.0});
    TrainConfig cfg;
    cfg.kernel_grid = {KernelKind::Rbf};
    auto best = grid_search(rows, cfg, 3);
    EXPECT_EQ(best.nu_grid.front(), 0.05);
}

TEST(GridSearch, ChosenPointRejectsMoreBackgroundThanWorst) {
    auto rows = blob(11, 30, {-3.0, -3.0}, 0.4);
    auto other = blob(12, 30, {3.0, 3.0}, 0.4);
    rows.insert(rows.end(), other.begin(), other.end());
    TrainConfig cfg;
    cfg.kernel_grid = {KernelKind::Rbf};
    auto grid = evaluate_grid(rows, cfg, 3);
    ASSERT_EQ(grid.size(), cfg.nu_grid.size() * cfg.gamma_grid.size());
    auto best = grid_search(rows, cfg, 3);
    const GridPoint* chosen = nullptr;
    double worst_bg = 0.0, best_obj = -1e9;
    for (const auto& g : grid) {
        worst_bg = std::max(worst_bg, g.background_acceptance);
        best_obj = std::max(best_obj, g.objective());
        if (g.nu == best.nu_grid.front() && g.gamma == best.gamma_grid.front()) chosen = &g;
    }
    ASSERT_NE(chosen, nullptr);
    EXPECT_EQ(chosen->objective(), best_obj);
    EXPECT_LT(chosen->background_acceptance, worst_bg);
}

TEST(GridSearch, Deterministic) {
    auto rows = blob(13, 25, {0.0, 1.0}, 1.0);
    auto a = grid_search(rows, TrainConfig{}, 3);
    auto b = grid_search(rows, TrainConfig{}, 3);
    EXPECT_EQ(a.kernel, b.kernel);
    EXPECT_EQ(a.nu_grid, b.nu_grid);
    EXPECT_EQ(a.gamma_grid, b.gamma_grid);
}
