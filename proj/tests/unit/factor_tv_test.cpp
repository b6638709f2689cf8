#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tvmort/error.hpp"
#include "tvmort/factor_classic.hpp"
#include "tvmort/factor_tv.hpp"
#include "tvmort/sim.hpp"

using namespace tvmort;

namespace {

Matrix rank1_panel(Eigen::Index N, Eigen::Index T, Vector* b_out = nullptr) {
    const Vector b = test::unit_sum_loadings(N, 21);
    const Vector k = test::trending_factor(T, 22);
    if (b_out) *b_out = b;
    return (b * k.transpose()).colwise() + Vector::LinSpaced(N, -7.0, -2.0);
}

sim::Simulated dgp(sim::Dgp kind, std::uint64_t seed, Eigen::Index N = 60, Eigen::Index T = 80) {
    sim::DgpSpec s;
    s.kind = kind;
    s.N = N;
    s.T = T;
    s.seed = seed;
    return sim::generate(s);
}

double mse(const Matrix& a, const Matrix& b) { return (a - b).squaredNorm() / double(a.size()); }

}  // namespace

TEST(FitTv, ConstantLoadingsRecovered) {
    Vector b;
    const auto p = test::panel_from(rank1_panel(15, 40, &b));
    const auto fit = fit_tv(p);
    ASSERT_EQ(fit.R, 1);
    for (Eigen::Index t = 0; t < 40; ++t) {
        EXPECT_NEAR(fit.loadings[t].col(0).sum(), 1.0, 1e-10);
        EXPECT_LT(test::max_abs(fit.loadings[t].col(0) - b), 1e-8) << "t=" << t;
    }
    for (Eigen::Index r : {1, 10, 20, 40}) {
        const auto lp = localized_pca_at(p, r, fit.kernel, 1);
        EXPECT_LT(test::max_abs(lp.loadings.col(0) - b), 1e-8);
    }
}

TEST(FitTv, UniformWideKernelEqualsClassic) {
    Matrix x = Matrix::Random(10, 30);
    const auto p = test::panel_from(x);
    TvOptions o;
    o.kernel = KernelSpec{KernelFamily::uniform, 1.0, false};
    o.count = FactorCount{1, 0.9};
    const auto tv = fit_tv(p, o);
    const auto cl = fit_classic(p, FactorCount{1, 0.9});
    for (const auto& B : tv.loadings) EXPECT_LT(test::max_abs(B - cl.loadings), 1e-10);
    EXPECT_LT(test::max_abs(tv.factors - cl.factors), 1e-10);
}

TEST(FitTv, TimeReversalSymmetry) {
    const auto g = dgp(sim::Dgp::dgp3, 3, 20, 50);
    const Matrix& x = g.panel.log_rates();
    const Matrix xr = x.rowwise().reverse();
    TvOptions o;
    o.count = FactorCount{1, 0.9};
    const auto f = fit_tv(test::panel_from(x), o);
    const auto r = fit_tv(test::panel_from(xr), o);
    for (Eigen::Index t = 0; t < 50; ++t)
        EXPECT_LT(test::max_abs(f.loadings[t] - r.loadings[49 - t]), 1e-8) << t;
}

TEST(FitTv, PerYearSumToOneAndFinite) {
    const auto g = dgp(sim::Dgp::dgp3, 4);
    TvOptions o;
    o.count = FactorCount{2, 0.9};
    const auto fit = fit_tv(g.panel, o);
    for (const auto& B : fit.loadings) {
        EXPECT_TRUE(B.allFinite());
        for (int c = 0; c < 2; ++c) EXPECT_NEAR(B.col(c).sum(), 1.0, 1e-10);
    }
    EXPECT_TRUE(fit.factors.allFinite());
}

TEST(LocalPca, WeightedFactorsOrthonormal) {
    const auto g = dgp(sim::Dgp::dgp2, 5);
    const LocalPcaSolver solver(g.panel);
    const KernelSpec k = default_kernel(80, 60);
    for (Eigen::Index r : {1, 40, 80}) {
        const auto lp = solver.at(r, k, 2);
        const Matrix KK = lp.weighted_factors.transpose() * lp.weighted_factors / 80.0;
        EXPECT_LT(test::max_abs(KK - Matrix::Identity(2, 2)), 1e-10);
    }
}

TEST(FitTv, BreakRecoveredAwayFromBreak) {
    const auto g = dgp(sim::Dgp::dgp2, 6, 60, 100);
    const auto p = g.panel.with_age_means(Vector::Zero(60));
    TvOptions o;
    o.count = FactorCount{1, 0.9};
    const auto fit = fit_tv(p, o);
    // Relative loading error far from the break, against the size of the jump.
    const double jump = (g.loadings.col(99) - g.loadings.col(0)).norm();
    EXPECT_LT((fit.loadings[10].col(0) - g.loadings.col(10)).norm(), 0.1 * jump);
    EXPECT_LT((fit.loadings[89].col(0) - g.loadings.col(89)).norm(), 0.1 * jump);
}

TEST(FitTv, InSampleBeatsClassicWhenLoadingsVary) {
    for (auto kind : {sim::Dgp::dgp2, sim::Dgp::dgp3}) {
        const auto g = dgp(kind, 7);
        TvOptions o;
        o.count = FactorCount{1, 0.9};
        const auto tv = fit_tv(g.panel, o);
        const auto cl = fit_classic(g.panel, FactorCount{1, 0.9});
        EXPECT_LT(mse(tv.fitted(), g.panel.log_rates()), mse(cl.fitted(), g.panel.log_rates()));
    }
}

TEST(AlignSigns, SmoothAndInvariant) {
    const auto g = dgp(sim::Dgp::dgp3, 8);
    const LocalPcaSolver solver(g.panel);
    const KernelSpec k = default_kernel(80, 60);
    std::vector<Matrix> raw;
    for (Eigen::Index r = 1; r <= 80; ++r) {
        Matrix B = solver.at(r, k, 1).loadings;
        if (r % 2) B *= -1.0;  // alternate signs
        raw.push_back(B);
    }
    std::vector<Matrix> a = raw;
    align_signs(a);
    double max_step = 0.0, scale = 0.0;
    for (std::size_t t = 1; t < a.size(); ++t) {
        max_step = std::max(max_step, (a[t] - a[t - 1]).norm());
        scale = std::max(scale, a[t].norm());
    }
    EXPECT_LT(max_step, 0.2 * scale);

    std::vector<Matrix> again = a;
    align_signs(again);
    for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(again[t], a[t]);

    std::vector<Matrix> flipped = raw;
    for (auto& B : flipped) B *= -1.0;
    align_signs(flipped);
    for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(flipped[t], a[t]);
}

TEST(Stage2, ScalarFormula) {
    Matrix c = Matrix::Random(6, 4);
    std::vector<Matrix> L;
    for (int t = 0; t < 4; ++t) L.push_back(Matrix::Random(6, 1));
    const Matrix K = stage2_factors(c, L);
    for (int t = 0; t < 4; ++t) {
        const double oracle = L[t].col(0).dot(c.col(t)) / L[t].col(0).squaredNorm();
        EXPECT_NEAR(K(t, 0), oracle, 1e-14);
    }
}

TEST(Stage2, ExactRecovery) {
    const Eigen::Index N = 9, T = 12;
    std::vector<Matrix> L;
    Matrix X(N, T), Ktrue(T, 2);
    for (Eigen::Index t = 0; t < T; ++t) {
        Matrix B(N, 2);
        B.col(0) = test::unit_sum_loadings(N, 100 + t);
        B.col(1) = test::unit_sum_loadings(N, 200 + t);
        Ktrue.row(t) << double(t) - 3.0, 0.5 * double(t * t) - 10.0;
        X.col(t) = B * Ktrue.row(t).transpose();
        L.push_back(B);
    }
    EXPECT_LT(test::max_abs(stage2_factors(X, L) - Ktrue), 1e-10);
}

TEST(Stage2, ZeroLoadingsRankError) {
    std::vector<Matrix> L(3, Matrix::Ones(4, 1));
    L[1].setZero();
    EXPECT_THROW(stage2_factors(Matrix::Random(4, 3), L), RankError);
}
