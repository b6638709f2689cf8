#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tvmort/dataio.hpp"
#include "tvmort/factor_classic.hpp"
#include "tvmort/kernel_weights.hpp"
#include "tvmort/types.hpp"

namespace tvmort {

/// Time-varying loadings fit from localized PCA plus per-year factor
/// re-estimation.
struct TvFit {
    int R = 1;
    std::vector<Matrix> loadings;  // T entries, each N x R; columns sum to one
    Matrix factors;                // T x R, second-stage estimates
    Vector age_means;              // N
    KernelSpec kernel;
    Vector eigen_shares_at_center;  // individual eigenvalue shares at r = ceil(T/2)
    std::vector<int> ages;
    std::vector<int> years;
    std::vector<std::string> warnings;

    Eigen::Index num_ages() const { return age_means.size(); }
    Eigen::Index num_years() const { return factors.rows(); }

    /// Loading of one factor as an N x T matrix (ages by years).
    Matrix loading_path(int factor = 0) const;

    /// a_x + b_{x,t}' k_t, N x T.
    Matrix fitted() const;
};

struct TvOptions {
    std::optional<KernelSpec> kernel;  // default: Epanechnikov, Silverman bandwidth, corrected
    FactorCount count;
    unsigned threads = 1;  // 0 = hardware concurrency
};

/// Kernel-weighted PCA problem at one centre r.
struct LocalPca {
    Matrix weighted_factors;  // T x R, sqrt(T) times leading eigenvectors (zero off-window)
    Matrix loadings;          // N x R
    Vector eigenvalues;       // nonincreasing, of the weighted T x T Gram matrix
};

/// Precomputes the centred data and its year Gram matrix so that many
/// centres can be solved cheaply; at() is const and thread-safe.
class LocalPcaSolver {
public:
    explicit LocalPcaSolver(const MortalityPanel& panel);

    /// Raw eigen-solution at centre r (1-based): loadings carry the sign the
    /// eigen solver returned and are not normalised.
    LocalPca at(Eigen::Index r, const KernelSpec& kernel, int R) const;

    const Matrix& centered() const noexcept { return centered_; }

private:
    Matrix centered_;  // N x T
    Matrix gram_;      // T x T
};

KernelSpec default_kernel(Eigen::Index T, Eigen::Index N);

/// Single-centre solution with the sign rule and sum-to-one scaling
/// applied to the loadings.
LocalPca localized_pca_at(const MortalityPanel& panel, Eigen::Index r, const KernelSpec& kernel,
                          int R);

/// Makes every loading column sum positive. Columns whose sum is
/// numerically zero take the sign that best matches the previous centre.
void align_signs(std::vector<Matrix>& loadings);

/// k_t = (B_t' B_t)^-1 B_t' (ln m_t - a), one least-squares fit per year.
Matrix stage2_factors(const Matrix& centered, const std::vector<Matrix>& loadings);
Matrix stage2_factors(const MortalityPanel& panel, const std::vector<Matrix>& loadings);

TvFit fit_tv(const MortalityPanel& panel, const TvOptions& options = {});

}  // namespace tvmort
