#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "tvmort/error.hpp"
#include "tvmort/local_linear.hpp"
#include "tvmort/philox.hpp"

using namespace tvmort;

namespace {

// Weighted least squares via the 2x2 normal equations, for the last point + 1.
double wls_oracle(const std::vector<double>& y, double lambda) {
    const double n = double(y.size()), t0 = n + 1;
    long double S0 = 0, S1 = 0, S2 = 0, Y0 = 0, Y1 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double u = (double(i + 1) - t0) / lambda;
        const double w = std::abs(u) <= 1 ? 0.75 * (1 - u * u) : 0.0;
        const double x = double(i + 1);
        S0 += w;
        S1 += w * x;
        S2 += w * x * x;
        Y0 += w * y[i];
        Y1 += w * x * y[i];
    }
    const long double det = S0 * S2 - S1 * S1;
    const long double b = (S0 * Y1 - S1 * Y0) / det;
    const long double a = (Y0 - b * S1) / S0;
    return double(a + b * t0);
}

}  // namespace

TEST(LocalLinear, LinesAreExact) {
    std::vector<double> path;
    for (int t = 1; t <= 60; ++t) path.push_back(2.0 + 0.1 * t);
    for (double lambda : {3.0, 7.5, 20.0, 100.0}) {
        const Vector e = extrapolate_path(path, 25, LocalLinearSpec{lambda});
        for (int h = 1; h <= 25; ++h) EXPECT_NEAR(e(h - 1), 2.0 + 0.1 * (60 + h), 1e-10);
    }
}

TEST(LocalLinear, ConstantPath) {
    std::vector<double> path(30, -0.37);
    EXPECT_NEAR(local_linear_extrapolate(path, LocalLinearSpec{6.0}), -0.37, 1e-14);
}

TEST(LocalLinear, LinearThenFlat) {
    std::vector<double> path;
    for (int t = 1; t <= 40; ++t) path.push_back(t <= 25 ? 0.1 * t : 2.5);
    // Window of 10 sees only the flat tail.
    const double v = local_linear_extrapolate(path, LocalLinearSpec{10.0});
    EXPECT_NEAR(v, 2.5, 1e-12);
    EXPECT_NEAR(v, wls_oracle(path, 10.0), 1e-12);
    // A wider window mixes in the ramp; compare with the oracle.
    EXPECT_NEAR(local_linear_extrapolate(path, LocalLinearSpec{25.0}), wls_oracle(path, 25.0), 1e-10);
}

TEST(LocalLinear, MatchesOracleOnNoise) {
    Philox4x64 rng(4);
    std::vector<double> path(50);
    for (auto& v : path) v = rng.normal();
    for (double lambda : {4.0, 12.5, 40.0})
        EXPECT_NEAR(local_linear_extrapolate(path, LocalLinearSpec{lambda}), wls_oracle(path, lambda), 1e-10);
}

TEST(LocalLinear, DegenerateWindow) {
    std::vector<double> path(10, 1.0);
    // lambda = 1.5 leaves only t = n with positive weight.
    EXPECT_THROW(local_linear_extrapolate(path, LocalLinearSpec{1.5}), DegenerateWindowError);
    std::vector<double> one{1.0};
    EXPECT_THROW(local_linear_extrapolate(one, LocalLinearSpec{5.0}), DegenerateWindowError);
}

TEST(SelectLambda, LinearPathsTieToSmallest) {
    Matrix paths(3, 50);
    for (int t = 0; t < 50; ++t) paths.col(t) << 0.01 * t, 1 - 0.02 * t, 0.5;
    const auto sel = select_lambda(paths);
    EXPECT_DOUBLE_EQ(sel.lambda, sel.candidates.front());
    for (double e : sel.errors) EXPECT_LT(e, 1e-20);
}

TEST(SelectLambda, NoisyConstantPrefersWide) {
    Philox4x64 rng(12);
    Matrix paths(20, 60);
    for (Eigen::Index i = 0; i < paths.size(); ++i) paths.data()[i] = 0.3 + 0.05 * rng.normal();
    const auto sel = select_lambda(paths);
    EXPECT_GE(sel.lambda, 0.3 * 60);
    // Narrowest feasible candidate is worse than the chosen one.
    double narrow = NAN;
    for (double e : sel.errors)
        if (std::isfinite(e)) { narrow = e; break; }
    const auto it = std::find(sel.candidates.begin(), sel.candidates.end(), sel.lambda);
    EXPECT_LT(sel.errors[it - sel.candidates.begin()], narrow);
}

TEST(SelectLambda, ValidationTooLong) {
    LambdaGrid g;
    g.validation = 50;
    EXPECT_THROW(select_lambda(Matrix::Random(2, 50), g), ArgumentError);
}

TEST(ExtrapolatePaths, RowWise) {
    Matrix paths = Matrix::Random(4, 30);
    const Matrix e = extrapolate_paths(paths, 5, LocalLinearSpec{9.0}, 2);
    for (Eigen::Index i = 0; i < 4; ++i) {
        Vector r = paths.row(i).transpose();
        const Vector one = extrapolate_path(std::span<const double>(r.data(), 30), 5, LocalLinearSpec{9.0});
        EXPECT_LT((e.row(i).transpose() - one).cwiseAbs().maxCoeff(), 1e-15);
    }
}
