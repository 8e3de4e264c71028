// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spamnet/features.hpp"

namespace spamnet {

enum class KernelKind { Linear, Rbf };

std::string_view model_kind_name(KernelKind kind);  // "linear_nu_ocsvm" / "rbf_nu_ocsvm"
KernelKind parse_kernel(std::string_view s);         // "linear"/"rbf" or the model kind names

struct TrainConfig {
    KernelKind kernel = KernelKind::Rbf;  // used by fit()
    /// Kernels tried by grid_search, outermost grid axis. Empty means
    /// {kernel}.
    std::vector<KernelKind> kernel_grid{KernelKind::Rbf, KernelKind::Linear};
    std::vector<double> nu_grid{0.05, 0.1, 0.2, 0.3};
    std::vector<double> gamma_grid{0.1, 0.5, 1.0, 2.0};
    std::uint64_t seed = 7;
    std::size_t max_iter = 100000;
    double tolerance = 1e-9;
    bool standardize = true;
    std::size_t folds = 3;
    std::size_t background_samples = 256;

    /// Throws std::invalid_argument on empty grids or out-of-range values.
    void check() const;
};

/// Solution of the ν-one-class dual
///   min ½ αᵀQα  s.t.  0 ≤ α_i ≤ 1,  Σα_i = ν·n
/// with decision function f(x) = Σ α_i K(x_i, x) − ρ.
struct OneClassDual {
    std::vector<double> alpha;
    double rho = 0.0;
    double objective = 0.0;
    std::size_t iterations = 0;
};

/// SMO with second-order working-set selection. `q` is the n×n kernel
/// matrix in row-major order.
OneClassDual solve_one_class_dual(std::span<const double> q, std::size_t n, double nu, double tol,
                                  std::size_t max_iter);

class OneClassModel {
public:
    KernelKind kind = KernelKind::Rbf;
    double nu = 0.1;
    double gamma = 1.0;
    double rho = 0.0;
    std::size_t feature_dim = 0;
    std::vector<std::vector<double>> support_vectors;  // in standardized space
    std::vector<double> coefficients;
    std::optional<Standardizer> standardizer;
    std::size_t training_size = 0;

    /// Signed margin value; positive inside the target region.
    double score(std::span<const double> x) const;
    double score(const FeatureVector& v) const { return score(std::span<const double>(v.values)); }
    bool accepts(std::span<const double> x) const { return score(x) >= 0.0; }

    std::string to_json(const TrainConfig* cfg = nullptr) const;
    static OneClassModel from_json(std::string_view text);
};

/// Fits with the first ν and γ of the config grids. Deterministic.
///
/// `reference` is an optional unlabeled sample from the same population
/// (e.g. every user of the campaign). When given, standardization
/// statistics come from it instead of from the target rows, which keeps the
/// kernel scale meaningful for very small target sets.
OneClassModel fit(std::span<const std::vector<double>> target, const TrainConfig& cfg,
                  std::span<const std::vector<double>> reference = {});
OneClassModel fit(const std::vector<FeatureVector>& target, const TrainConfig& cfg);

double score(const OneClassModel& model, const FeatureVector& x);

struct GridPoint {
    KernelKind kernel = KernelKind::Rbf;
    double nu = 0.0;
    double gamma = 0.0;
    double acceptance = 0.0;             // held-out target acceptance
    double background_acceptance = 0.0;  // uniform background acceptance
    double objective() const { return acceptance - background_acceptance; }
};

/// Every grid point with its criterion terms, in grid order (kernel, then
/// ν, then γ; the linear kernel ignores γ and takes only the first).
///
/// Acceptance is k-fold (k = min(folds, n)) acceptance of held-out target
/// points; with n == 2 it falls back to in-sample acceptance. Background is
/// `background_samples` uniform points in the target bounding box widened by
/// one standard deviation per side. With a non-empty `reference`, models
/// standardize with reference statistics and the box is the reference
/// bounding box instead.
std::vector<GridPoint> evaluate_grid(std::span<const std::vector<double>> target, const TrainConfig& cfg,
                                     std::size_t folds, std::span<const std::vector<double>> reference = {});

/// Best (kernel, ν, γ) by acceptance minus background acceptance, first in
/// grid order on ties. Returns cfg with the chosen kernel and singleton
/// grids.
TrainConfig grid_search(std::span<const std::vector<double>> target, const TrainConfig& cfg, std::size_t folds,
                        std::span<const std::vector<double>> reference = {});
TrainConfig grid_search(const std::vector<FeatureVector>& target, const TrainConfig& cfg, std::size_t folds);

}  // namespace spamnet
