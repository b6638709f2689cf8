#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tvmort/error.hpp"
#include "tvmort/forecast.hpp"
#include "tvmort/sim.hpp"

using namespace tvmort;

namespace {

TvFit tv_for(sim::Dgp kind, std::uint64_t seed, Eigen::Index T = 60) {
    sim::DgpSpec s;
    s.kind = kind;
    s.N = 30;
    s.T = T;
    s.seed = seed;
    TvOptions o;
    o.count = FactorCount{1, 0.9};
    return fit_tv(sim::generate(s).panel, o);
}

// A TvFit whose loadings are exactly linear in t.
TvFit linear_tv(Eigen::Index N, Eigen::Index T) {
    TvFit f;
    f.R = 1;
    f.age_means = Vector::LinSpaced(N, -6, -1);
    f.factors = Matrix(T, 1);
    for (Eigen::Index t = 0; t < T; ++t) {
        Matrix B(N, 1);
        for (Eigen::Index i = 0; i < N; ++i) B(i, 0) = 1.0 / double(N) + 1e-4 * double(i - N / 2) * double(t);
        f.loadings.push_back(B);
        f.factors(t, 0) = -0.5 * double(t);
    }
    f.ages = test::range(0, int(N));
    f.years = test::range(1, int(T));
    return f;
}

ForecastOptions opts(int H, std::optional<double> lambda = std::nullopt) {
    ForecastOptions o;
    o.horizon = H;
    o.lambda = lambda;
    return o;
}

void expect_identical(const MortalityForecast& a, const MortalityForecast& b) {
    EXPECT_EQ(a.predicted, b.predicted);
    ASSERT_EQ(a.loadings_used.size(), b.loadings_used.size());
    for (std::size_t f = 0; f < a.loadings_used.size(); ++f) EXPECT_EQ(a.loadings_used[f], b.loadings_used[f]);
    EXPECT_EQ(a.lower(), b.lower());
    EXPECT_EQ(a.upper(), b.upper());
}

}  // namespace

TEST(ForecastClassic, ReconstructionAndLinearity) {
    sim::DgpSpec s;
    s.N = 20;
    s.T = 50;
    s.seed = 3;
    const auto fit = fit_classic(sim::generate(s).panel, FactorCount{1, 0.9});
    auto fs = forecast_factors(fit.factors, 5);
    const auto f = forecast_classic(fit, fs);
    EXPECT_LT(test::max_abs(f.predicted - f.reconstruct()), 1e-14);
    for (int h = 0; h < 5; ++h) {
        const Vector oracle = fit.age_means + fit.loadings.col(0) * fs.forecasts[0].point(h);
        EXPECT_LT(test::max_abs(f.predicted.col(h) - oracle), 1e-13);
    }
    auto doubled = fs;
    doubled.forecasts[0].point *= 2.0;
    const auto g = forecast_classic(fit, doubled);
    const Matrix da = f.predicted.colwise() - fit.age_means;
    const Matrix db = g.predicted.colwise() - fit.age_means;
    EXPECT_LT(test::max_abs(db - 2.0 * da), 1e-13);
    EXPECT_EQ(f.method_name(), "classic");
}

TEST(ForecastTv, NaiveUsesLastLoading) {
    const auto fit = tv_for(sim::Dgp::dgp3, 4);
    const auto f = forecast_tv_naive(fit, opts(7));
    for (int h = 0; h < 7; ++h) EXPECT_EQ(Vector(f.loading(0, h)), Vector(fit.loadings.back().col(0)));
    EXPECT_LT(test::max_abs(f.predicted - f.reconstruct()), 1e-14);
    EXPECT_EQ(f.years.front(), fit.years.back() + 1);
}

TEST(ForecastTv, HybridDegeneracies) {
    const auto fit = tv_for(sim::Dgp::dgp3, 5);
    const int H = 9;
    const auto o = opts(H);
    const auto fs = forecast_factors(fit.factors, H, o.level, o.arima);
    const auto naive = forecast_tv_naive(fit, fs);
    const auto local = forecast_tv_local(fit, fs, o);
    expect_identical(forecast_tv_hybrid(fit, 0, fs, o), naive);
    expect_identical(forecast_tv_hybrid(fit, H, fs, o), local);
    EXPECT_THROW(forecast_tv_hybrid(fit, H + 1, fs, o), ArgumentError);

    const int k = 4;
    const auto hyb = forecast_tv_hybrid(fit, k, fs, o);
    EXPECT_EQ(hyb.method_name(), "hybrid:4");
    for (int h = 0; h < k; ++h) EXPECT_EQ(Vector(hyb.loading(0, h)), Vector(local.loading(0, h)));
    for (int h = k; h < H; ++h) EXPECT_EQ(Vector(hyb.loading(0, h)), Vector(local.loading(0, k - 1)));
    // Shared factor forecast across methods.
    EXPECT_EQ(hyb.factor_forecast.points(), naive.factor_forecast.points());
    EXPECT_EQ(local.factor_forecast.points(), naive.factor_forecast.points());
}

TEST(ForecastTv, LocalContinuesLinearLoadings) {
    const auto fit = linear_tv(8, 40);
    const auto f = forecast_tv_local(fit, opts(12, 6.0));
    for (int h = 0; h < 12; ++h) {
        for (Eigen::Index i = 0; i < 8; ++i) {
            const double oracle = 1.0 / 8.0 + 1e-4 * double(i - 4) * double(40 + h);
            EXPECT_NEAR(f.loading(0, h)(i), oracle, 1e-12);
        }
    }
    ASSERT_TRUE(f.lambda.has_value());
    EXPECT_DOUBLE_EQ(*f.lambda, 6.0);
}

TEST(ForecastTv, ExtrapolatedLoadingsNotRenormalised) {
    TvFit fit = linear_tv(8, 40);
    // Make the loading sum drift over time.
    for (Eigen::Index t = 0; t < 40; ++t) fit.loadings[t](0, 0) += 0.001 * double(t);
    const auto f = forecast_tv_local(fit, opts(3, 8.0));
    EXPECT_GT(std::abs(f.loading(0, 0).sum() - 1.0), 1e-4);
}

TEST(ForecastTv, IntervalsBracketPoint) {
    const auto fit = tv_for(sim::Dgp::dgp1, 6);
    const auto f = forecast_tv_naive(fit, opts(5));
    EXPECT_TRUE((f.lower().array() <= f.predicted.array() + 1e-12).all());
    EXPECT_TRUE((f.upper().array() >= f.predicted.array() - 1e-12).all());
}

TEST(Mspe, Identities) {
    Matrix a = Matrix::Random(6, 4), b = Matrix::Random(6, 4);
    const auto m = mspe(a, b);
    EXPECT_NEAR(m.overall, m.by_year.mean(), 1e-15);
    EXPECT_NEAR(m.overall, m.by_age.mean(), 1e-15);
    EXPECT_NEAR(m.overall, (a - b).squaredNorm() / 24.0, 1e-15);
    const auto z = mspe(a, a);
    EXPECT_EQ(z.overall, 0.0);
    EXPECT_EQ(z.by_year.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(z.by_age.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(mspe(a, Matrix::Random(5, 4)), ArgumentError);
}

TEST(Mspe, AgainstPanel) {
    sim::DgpSpec s;
    s.N = 10;
    s.T = 40;
    s.seed = 8;
    const auto p = sim::generate(s).panel;
    const auto sp = split_panel(p, 30);
    const auto fit = fit_classic(sp.train, FactorCount{1, 0.9});
    const auto f = forecast_classic(fit, opts(10));
    const auto m = mspe(f, sp.holdout);
    EXPECT_NEAR(m.overall, (f.predicted - sp.holdout.log_rates()).squaredNorm() / 100.0, 1e-14);
    EXPECT_THROW(mspe(forecast_classic(fit, opts(11)), sp.holdout), ArgumentError);
}

TEST(Boundary, CurveShapeAndArgmin) {
    sim::DgpSpec s;
    s.kind = sim::Dgp::dgp3;
    s.N = 20;
    s.T = 60;
    s.seed = 9;
    const auto p = sim::generate(s).panel;
    const auto sp = split_panel(p, 50);
    TvOptions o;
    o.count = FactorCount{1, 0.9};
    const auto fit = fit_tv(sp.train, o);
    const auto est = estimate_boundary(fit, sp.holdout);
    ASSERT_EQ(est.ssr_curve.size(), 11u);
    EXPECT_EQ(est.T0, 50);
    EXPECT_EQ(est.validation, 10);
    for (double v : est.ssr_curve) EXPECT_GE(v, est.ssr_curve[est.k_hat]);
    for (int k = 0; k < est.k_hat; ++k) EXPECT_GT(est.ssr_curve[k], est.ssr_curve[est.k_hat]);
}

TEST(Boundary, FrozenLoadingsGiveZero) {
    // Constant true loadings throughout, exact factors supplied.
    const Eigen::Index N = 12, T = 50, V = 10;
    const Vector b = test::unit_sum_loadings(N, 1);
    Matrix x(N, T + V);
    Philox4x64 rng(2);
    Vector k(T + V);
    double level = 0;
    for (Eigen::Index t = 0; t < T + V; ++t) {
        level += -0.5 + 0.3 * rng.normal();
        k(t) = level;
    }
    for (Eigen::Index t = 0; t < T + V; ++t) x.col(t) = b * k(t);
    const auto p = test::panel_from(x).with_age_means(Vector::Zero(N));
    const auto train = p.slice_years(0, T).with_age_means(Vector::Zero(N));
    const auto val = p.slice_years(T, V);
    const auto fit = fit_tv(train);
    BoundaryOptions bo;
    bo.validation_factors = Matrix(k.tail(V));
    const auto est = estimate_boundary(fit, val, bo);
    EXPECT_EQ(est.k_hat, 0);
}

TEST(Boundary, RejectsNonAdjacentValidation) {
    const auto fit = tv_for(sim::Dgp::dgp1, 10, 40);
    const auto other = test::panel_from(Matrix::Random(30, 5), 100);
    EXPECT_THROW(estimate_boundary(fit, other), ArgumentError);
}
