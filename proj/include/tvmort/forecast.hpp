#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tvmort/arima.hpp"
#include "tvmort/dataio.hpp"
#include "tvmort/factor_classic.hpp"
#include "tvmort/factor_tv.hpp"
#include "tvmort/local_linear.hpp"
#include "tvmort/types.hpp"

namespace tvmort {

enum class ForecastMethod { classic, tv_naive, tv_local, tv_hybrid };

/// ARIMA models and forecasts for every factor column.
struct FactorForecastSet {
    std::vector<ArimaModel> models;
    std::vector<FactorForecast> forecasts;

    int horizon() const { return forecasts.empty() ? 0 : forecasts.front().horizon; }
    /// H x R matrix of point forecasts.
    Matrix points() const;
};

/// Selects and fits an ARIMA per column of `factors` (T x R) and forecasts H
/// steps ahead.
FactorForecastSet forecast_factors(const Matrix& factors, int H, double level = 0.8,
                                   const ArimaGrid& grid = {});

struct MortalityForecast {
    ForecastMethod method = ForecastMethod::classic;
    int hybrid_k = 0;
    int horizon = 0;
    std::vector<int> ages;
    std::vector<int> years;  // forecast years
    Vector age_means;
    Matrix predicted;  // N x H log rates
    FactorForecastSet factor_forecast;
    /// Per factor: N x H for tv methods, N x 1 for classic.
    std::vector<Matrix> loadings_used;
    std::optional<double> lambda;  // local-regression window, when used

    std::string method_name() const;

    /// Loading of factor f used at step h (0-based).
    auto loading(int f, Eigen::Index h) const {
        const Matrix& L = loadings_used[f];
        return L.col(L.cols() == 1 ? 0 : h);
    }

    /// a_x + sum_f b_f(x, h) k_f(h) from the stored parts.
    Matrix reconstruct() const;

    /// Bounds from the factor intervals alone: a_x + b * [lower, upper],
    /// taking the smaller/larger end per factor.
    Matrix lower() const;
    Matrix upper() const;
};

struct ForecastOptions {
    int horizon = 1;
    double level = 0.8;
    ArimaGrid arima;
    std::optional<double> lambda;  // local regression window; selected when absent
    LambdaGrid lambda_grid;
    unsigned threads = 1;
};

MortalityForecast forecast_classic(const ClassicFit& fit, const ForecastOptions& opts);
MortalityForecast forecast_classic(const ClassicFit& fit, const FactorForecastSet& factors);

MortalityForecast forecast_tv_naive(const TvFit& fit, const ForecastOptions& opts);
MortalityForecast forecast_tv_naive(const TvFit& fit, const FactorForecastSet& factors);

MortalityForecast forecast_tv_local(const TvFit& fit, const ForecastOptions& opts);
MortalityForecast forecast_tv_local(const TvFit& fit, const FactorForecastSet& factors,
                                    const ForecastOptions& opts);

/// Local-regression loadings for h <= k, then frozen at the value for h = k
/// (at the last in-sample loading when k = 0). Requires 0 <= k <= H.
MortalityForecast forecast_tv_hybrid(const TvFit& fit, int k, const ForecastOptions& opts);
MortalityForecast forecast_tv_hybrid(const TvFit& fit, int k, const FactorForecastSet& factors,
                                     const ForecastOptions& opts);

/// Lambda actually used for a tv fit: opts.lambda or select_lambda over the
/// pooled loading paths of every factor.
double resolve_lambda(const TvFit& fit, const ForecastOptions& opts);

struct BoundaryOptions {
    ForecastOptions forecast;  // horizon is ignored; level and grids are used
    /// Validation-period factors (V x R). When absent, ARIMA forecasts from
    /// the training factors are used.
    std::optional<Matrix> validation_factors;
};

struct BoundaryEstimate {
    int k_hat = 0;
    std::vector<double> ssr_curve;  // SSR(k) for k = 0..V
    Eigen::Index T0 = 0;           // training length
    Eigen::Index validation = 0;   // V = T - T0
    double lambda = 0.0;
};

/// Least-squares choice of the split between local-regression and frozen
/// loadings over a validation panel that directly follows the training fit.
BoundaryEstimate estimate_boundary(const TvFit& train_fit, const MortalityPanel& validation,
                                   const BoundaryOptions& opts = {});

struct Mspe {
    double overall = 0.0;
    Vector by_year;  // H, averaged over ages
    Vector by_age;   // N, averaged over years
};

/// (1 / NT) sum (ln m - fitted)^2 over the fit's own panel.
double mse_in_sample(const ClassicFit& fit, const MortalityPanel& panel);
double mse_in_sample(const TvFit& fit, const MortalityPanel& panel);

/// Compares predictions with the first H years of `actual`.
Mspe mspe(const MortalityForecast& forecast, const MortalityPanel& actual);
Mspe mspe(const Matrix& predicted, const Matrix& actual);

std::string method_name(ForecastMethod method, int hybrid_k = 0);

}  // namespace tvmort
