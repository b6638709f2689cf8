#include "tvmort/factor_classic.hpp"

#include <cmath>

#include "tvmort/error.hpp"
#include "tvmort/parallel.hpp"
#include "tvmort/simd/kernels.hpp"

namespace tvmort {

namespace detail {

Matrix column_gram(const Matrix& X) {
    const Eigen::Index n = X.cols();
    const auto len = static_cast<std::size_t>(X.rows());
    const auto& k = simd::active();
    Matrix G(n, n);
    for (Eigen::Index s = 0; s < n; ++s) {
        for (Eigen::Index t = 0; t <= s; ++t) {
            const double v = k.dot(X.col(s).data(), X.col(t).data(), len);
            G(s, t) = v;
            G(t, s) = v;
        }
    }
    return G;
}

EigenPairs leading_eigen(const Matrix& symmetric, int R) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric);
    if (es.info() != Eigen::Success) throw EstimationError("eigendecomposition failed");
    EigenPairs out;
    out.values = es.eigenvalues().reverse().cwiseMax(0.0);
    out.vectors = es.eigenvectors().rightCols(R).rowwise().reverse();
    return out;
}

void orient_by_trend(Matrix& factors, Matrix& loadings) {
    const Eigen::Index T = factors.rows();
    const double tbar = 0.5 * double(T + 1);
    for (Eigen::Index c = 0; c < factors.cols(); ++c) {
        double slope = 0.0, scale = 0.0;
        for (Eigen::Index t = 0; t < T; ++t) {
            slope += (double(t + 1) - tbar) * factors(t, c);
            scale += std::abs(factors(t, c));
        }
        bool flip = slope > 1e-12 * scale * double(T);
        if (std::abs(slope) <= 1e-12 * scale * double(T)) flip = factors(0, c) < 0.0;
        if (flip) {
            factors.col(c) *= -1.0;
            loadings.col(c) *= -1.0;
        }
    }
}

std::vector<int> normalize_sum_to_one(Matrix& loadings, Matrix* factors, Vector* scale) {
    std::vector<int> fallback;
    if (scale) scale->setOnes(loadings.cols());
    for (Eigen::Index c = 0; c < loadings.cols(); ++c) {
        const double s = loadings.col(c).sum();
        const double l1 = loadings.col(c).cwiseAbs().sum();
        double d = s;
        if (!(std::abs(s) > 1e-8 * l1)) {
            d = loadings.col(c).norm();
            fallback.push_back(static_cast<int>(c));
            if (d == 0.0) continue;
        }
        loadings.col(c) /= d;
        if (factors) factors->col(c) *= d;
        if (scale) (*scale)(c) = d;
    }
    return fallback;
}

}  // namespace detail

Matrix ClassicFit::fitted() const {
    return (loadings * factors.transpose()).colwise() + age_means;
}

int select_num_factors(const Vector& eigenvalues, double cutoff) {
    if (!(cutoff > 0.0 && cutoff < 1.0)) throw ArgumentError("cutoff must lie in (0, 1)");
    if (eigenvalues.size() == 0) throw ArgumentError("empty spectrum");
    if ((eigenvalues.array() < 0.0).any()) throw ArgumentError("eigenvalues must be nonnegative");
    const double total = eigenvalues.sum();
    if (!(total > 0.0)) throw DataError("all-zero spectrum; data has no variation");
    double acc = 0.0;
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
        acc += eigenvalues(k);
        // Relative slack absorbs rounding in shares that hit the cutoff exactly.
        if (acc / total >= cutoff - 1e-12) return static_cast<int>(k + 1);
    }
    return static_cast<int>(eigenvalues.size());
}

ClassicFit fit_classic(const MortalityPanel& panel, FactorCount count) {
    const Eigen::Index N = panel.num_ages(), T = panel.num_years();
    if (T < 3) throw ArgumentError("fit_classic needs at least 3 years");
    const Matrix X = panel.centered();  // N x T
    const bool time_gram = T <= N;
    // Both Gram matrices share their nonzero spectrum; decompose the smaller.
    const Matrix G = time_gram ? detail::column_gram(X) : detail::column_gram(X.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    if (es.info() != Eigen::Success) throw EstimationError("eigendecomposition failed");
    Vector values = es.eigenvalues().reverse().cwiseMax(0.0);

    ClassicFit fit;
    fit.R = count.fixed ? *count.fixed : select_num_factors(values, count.cutoff);
    const int R = fit.R;
    if (R < 1 || R > std::min(N, T)) {
        throw ArgumentError("factor count " + std::to_string(R) + " outside [1, min(N, T)]");
    }
    if (!(values(R - 1) > 1e-13 * values(0))) {
        throw RankError("centered data has rank below the requested " + std::to_string(R) +
                        " factors");
    }
    const Matrix V = es.eigenvectors().rightCols(R).rowwise().reverse();
    const double sqrtT = std::sqrt(double(T));
    Matrix K(T, R);
    if (time_gram) {
        K = sqrtT * V;
    } else {
        // Eigenvectors of X'X from those of XX': X'u / sqrt(lambda).
        K = X.transpose() * V;
        for (int c = 0; c < R; ++c) K.col(c) *= sqrtT / std::sqrt(values(c));
    }
    Matrix B = X * K / double(T);
    detail::orient_by_trend(K, B);

    fit.orthonormal_factors = K;
    for (int c : detail::normalize_sum_to_one(B, &K, &fit.column_scale)) {
        fit.warnings.push_back("loading column " + std::to_string(c + 1) +
                               " sums to ~0; scaled to unit norm instead");
    }
    fit.loadings = std::move(B);
    fit.factors = std::move(K);
    fit.age_means = panel.age_means();
    fit.eigenvalues = values.head(std::min(N, T));
    fit.explained_ratio = Vector(fit.eigenvalues.size());
    const double total = fit.eigenvalues.sum();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < fit.eigenvalues.size(); ++k) {
        acc += fit.eigenvalues(k);
        fit.explained_ratio(k) = total > 0.0 ? acc / total : 0.0;
    }
    fit.ages = panel.ages();
    fit.years = panel.years();
    return fit;
}

RollingLoadings rolling_window_loadings(const MortalityPanel& panel, Eigen::Index window_length,
                                        int R, unsigned threads) {
    const Eigen::Index T = panel.num_years();
    if (window_length < 3) throw ArgumentError("rolling window must span at least 3 years");
    if (window_length > T) throw ArgumentError("rolling window longer than the panel");
    const Eigen::Index W = T - window_length + 1;
    RollingLoadings out;
    out.ages = panel.ages();
    out.start_years.resize(W);
    out.loadings.resize(W);
    parallel_for(static_cast<std::size_t>(W), threads, [&](std::size_t w) {
        const auto sub = panel.slice_years(static_cast<Eigen::Index>(w), window_length);
        out.loadings[w] = fit_classic(sub, FactorCount{R, 0.9}).loadings;
        out.start_years[w] = sub.years().front();
    });
    return out;
}

}  // namespace tvmort
