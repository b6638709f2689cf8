#include "tvmort/factor_tv.hpp"

#include <cmath>

#include "tvmort/error.hpp"
#include "tvmort/parallel.hpp"
#include "tvmort/simd/kernels.hpp"

namespace tvmort {

Matrix TvFit::loading_path(int factor) const {
    if (factor < 0 || factor >= R) throw ArgumentError("factor index out of range");
    const Eigen::Index T = num_years();
    Matrix out(num_ages(), T);
    for (Eigen::Index t = 0; t < T; ++t) out.col(t) = loadings[t].col(factor);
    return out;
}

Matrix TvFit::fitted() const {
    const Eigen::Index T = num_years();
    Matrix out(num_ages(), T);
    for (Eigen::Index t = 0; t < T; ++t)
        out.col(t) = age_means + loadings[t] * factors.row(t).transpose();
    return out;
}

LocalPcaSolver::LocalPcaSolver(const MortalityPanel& panel)
    : centered_(panel.centered()), gram_(detail::column_gram(centered_)) {}

LocalPca LocalPcaSolver::at(Eigen::Index r, const KernelSpec& kernel, int R) const {
    const Eigen::Index N = centered_.rows(), T = centered_.cols();
    if (R < 1) throw ArgumentError("factor count must be positive");
    if (r < 1 || r > T) throw ArgumentError("centre r out of range");
    const Vector w = weight_vector(r, T, kernel, R + 1);

    // Zero-weight years contribute zero rows to the weighted data, so the
    // leading eigenvectors live on the kernel window alone.
    std::vector<Eigen::Index> window;
    for (Eigen::Index t = 0; t < T; ++t)
        if (w(t) > 0.0) window.push_back(t);
    const auto W = static_cast<Eigen::Index>(window.size());
    Vector root(W);
    for (Eigen::Index i = 0; i < W; ++i) root(i) = std::sqrt(w(window[i]));
    Matrix S(W, W);
    for (Eigen::Index i = 0; i < W; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = root(i) * root(j) * gram_(window[i], window[j]);
            S(i, j) = v;
            S(j, i) = v;
        }
    const auto eig = detail::leading_eigen(S, R);

    LocalPca out;
    out.eigenvalues = Vector::Zero(T);
    out.eigenvalues.head(W) = eig.values;
    out.weighted_factors = Matrix::Zero(T, R);
    out.loadings = Matrix::Zero(N, R);
    const double sqrtT = std::sqrt(double(T));
    const auto& k = simd::active();
    for (int c = 0; c < R; ++c) {
        double* b = out.loadings.col(c).data();
        for (Eigen::Index i = 0; i < W; ++i) {
            const double kt = sqrtT * eig.vectors(i, c);
            out.weighted_factors(window[i], c) = kt;
            k.axpy(root(i) * kt / double(T), centered_.col(window[i]).data(), b,
                   static_cast<std::size_t>(N));
        }
    }
    return out;
}

KernelSpec default_kernel(Eigen::Index T, Eigen::Index N) {
    return KernelSpec{KernelFamily::epanechnikov, silverman_bandwidth(T, N), true};
}

void align_signs(std::vector<Matrix>& loadings) {
    for (std::size_t r = 0; r < loadings.size(); ++r) {
        Matrix& B = loadings[r];
        for (Eigen::Index c = 0; c < B.cols(); ++c) {
            const double s = B.col(c).sum();
            const double l1 = B.col(c).cwiseAbs().sum();
            bool flip = s < 0.0;
            if (std::abs(s) <= 1e-12 * l1) {
                flip = r > 0 && B.col(c).dot(loadings[r - 1].col(c)) < 0.0;
            }
            if (flip) B.col(c) *= -1.0;
        }
    }
}

Matrix stage2_factors(const Matrix& centered, const std::vector<Matrix>& loadings) {
    const Eigen::Index N = centered.rows(), T = centered.cols();
    if (static_cast<Eigen::Index>(loadings.size()) != T) {
        throw ArgumentError("need one loading matrix per year");
    }
    const Eigen::Index R = loadings.empty() ? 0 : loadings.front().cols();
    Matrix K(T, R);
    const auto& k = simd::active();
    const auto n = static_cast<std::size_t>(N);
    for (Eigen::Index t = 0; t < T; ++t) {
        const Matrix& B = loadings[t];
        if (B.rows() != N || B.cols() != R) throw ArgumentError("loading matrix shape mismatch");
        if (R == 1) {
            const double* b = B.col(0).data();
            const double bb = k.dot(b, b, n);
            if (!(bb > 0.0)) {
                throw RankError("zero loadings at year index " + std::to_string(t + 1));
            }
            K(t, 0) = k.dot(b, centered.col(t).data(), n) / bb;
            continue;
        }
        Matrix BtB(R, R);
        Vector rhs(R);
        for (Eigen::Index i = 0; i < R; ++i) {
            rhs(i) = k.dot(B.col(i).data(), centered.col(t).data(), n);
            for (Eigen::Index j = 0; j <= i; ++j) {
                BtB(i, j) = k.dot(B.col(i).data(), B.col(j).data(), n);
                BtB(j, i) = BtB(i, j);
            }
        }
        Eigen::LDLT<Matrix> ldlt(BtB);
        const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
        const double dmin = ldlt.vectorD().cwiseAbs().minCoeff();
        if (ldlt.info() != Eigen::Success || !(dmin > 1e-12 * dmax)) {
            throw RankError("singular loading normal matrix at year index " +
                            std::to_string(t + 1));
        }
        K.row(t) = ldlt.solve(rhs).transpose();
    }
    return K;
}

Matrix stage2_factors(const MortalityPanel& panel, const std::vector<Matrix>& loadings) {
    return stage2_factors(panel.centered(), loadings);
}

LocalPca localized_pca_at(const MortalityPanel& panel, Eigen::Index r, const KernelSpec& kernel,
                          int R) {
    LocalPcaSolver solver(panel);
    LocalPca out = solver.at(r, kernel, R);
    std::vector<Matrix> one{out.loadings};
    align_signs(one);
    Matrix K = out.weighted_factors;
    // Flip the factors to match, then rescale.
    for (Eigen::Index c = 0; c < one[0].cols(); ++c)
        if (one[0].col(c).dot(out.loadings.col(c)) < 0.0) K.col(c) *= -1.0;
    detail::normalize_sum_to_one(one[0], &K, nullptr);
    out.loadings = std::move(one[0]);
    out.weighted_factors = std::move(K);
    return out;
}

TvFit fit_tv(const MortalityPanel& panel, const TvOptions& options) {
    const Eigen::Index N = panel.num_ages(), T = panel.num_years();
    if (T < 3) throw ArgumentError("fit_tv needs at least 3 years");
    TvFit fit;
    fit.kernel = options.kernel ? *options.kernel : default_kernel(T, N);
    const LocalPcaSolver solver(panel);

    // Factor count and reported shares come from the centre of the sample.
    const Eigen::Index centre = (T + 1) / 2;
    {
        const int probe_R = options.count.fixed ? *options.count.fixed : 1;
        const LocalPca mid = solver.at(centre, fit.kernel, probe_R);
        const double total = mid.eigenvalues.sum();
        if (!(total > 0.0)) throw DataError("all-zero spectrum; data has no variation");
        fit.eigen_shares_at_center = mid.eigenvalues / total;
        fit.R = options.count.fixed ? *options.count.fixed
                                    : select_num_factors(mid.eigenvalues, options.count.cutoff);
    }
    if (fit.R < 1 || fit.R > std::min(N, T)) throw ArgumentError("factor count out of range");

    fit.loadings.resize(T);
    parallel_for(static_cast<std::size_t>(T), options.threads, [&](std::size_t i) {
        fit.loadings[i] = solver.at(static_cast<Eigen::Index>(i) + 1, fit.kernel, fit.R).loadings;
    });

    align_signs(fit.loadings);
    for (Eigen::Index t = 0; t < T; ++t) {
        for (int c : detail::normalize_sum_to_one(fit.loadings[t], nullptr, nullptr)) {
            fit.warnings.push_back("year " + std::to_string(panel.years()[t]) + ": loading column " +
                                   std::to_string(c + 1) +
                                   " sums to ~0; scaled to unit norm instead");
        }
    }
    fit.factors = stage2_factors(solver.centered(), fit.loadings);
    fit.age_means = panel.age_means();
    fit.ages = panel.ages();
    fit.years = panel.years();
    return fit;
}

}  // namespace tvmort
