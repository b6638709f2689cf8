#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tvmort/dataio.hpp"
#include "tvmort/types.hpp"

namespace tvmort {

/// Either a fixed factor count or the cumulative-eigenvalue cutoff used to
/// pick one.
struct FactorCount {
    std::optional<int> fixed;
    double cutoff = 0.9;
};

/// Time-invariant loadings fit (Lee-Carter when R = 1).
struct ClassicFit {
    int R = 1;
    Matrix loadings;             // N x R, each column sums to one
    Matrix factors;              // T x R
    Vector age_means;            // N
    Vector eigenvalues;          // min(N, T), nonincreasing
    Vector explained_ratio;      // cumulative eigenvalue shares
    Matrix orthonormal_factors;  // T x R with K'K / T = I, before rescaling
    Vector column_scale;         // factors = orthonormal_factors * diag(column_scale)
    std::vector<int> ages;
    std::vector<int> years;
    std::vector<std::string> warnings;

    /// a_x + B k_t for every year, N x T.
    Matrix fitted() const;
};

/// Smallest R whose leading eigenvalues account for at least `cutoff` of
/// the total.
int select_num_factors(const Vector& eigenvalues, double cutoff = 0.9);

ClassicFit fit_classic(const MortalityPanel& panel, FactorCount count = {});

struct RollingLoadings {
    std::vector<int> start_years;
    std::vector<int> ages;
    std::vector<Matrix> loadings;  // one N x R matrix per window
};

/// One classic fit per contiguous window of `window_length` years.
RollingLoadings rolling_window_loadings(const MortalityPanel& panel, Eigen::Index window_length,
                                        int R = 1, unsigned threads = 1);

namespace detail {

/// Gram matrix X'X of the columns of X.
Matrix column_gram(const Matrix& X);

struct EigenPairs {
    Vector values;   // all eigenvalues, nonincreasing, clipped at zero
    Matrix vectors;  // leading R eigenvectors as columns
};

/// Leading R eigenpairs of a symmetric positive semi-definite matrix.
EigenPairs leading_eigen(const Matrix& symmetric, int R);

/// Flips each factor so its OLS slope on time is nonpositive; a zero slope
/// is broken by a nonnegative first element. Loadings flip alongside.
void orient_by_trend(Matrix& factors, Matrix& loadings);

/// Rescales each loading column to sum to one, multiplying the factor
/// column by the same amount. Columns whose sum is numerically zero are
/// scaled to unit Euclidean norm instead; their indices are returned.
std::vector<int> normalize_sum_to_one(Matrix& loadings, Matrix* factors, Vector* scale);

}  // namespace detail

}  // namespace tvmort
