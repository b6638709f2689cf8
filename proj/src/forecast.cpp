#include "tvmort/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvmort/error.hpp"
#include "tvmort/parallel.hpp"

namespace tvmort {
namespace {

void check_horizon(int H) {
    if (H < 1) throw ArgumentError("forecast horizon must be at least 1");
}

std::vector<int> forecast_years(const std::vector<int>& years, int H) {
    std::vector<int> out(H);
    for (int h = 0; h < H; ++h) out[h] = years.back() + h + 1;
    return out;
}

void check_factor_set(const FactorForecastSet& fs, Eigen::Index R) {
    if (static_cast<Eigen::Index>(fs.forecasts.size()) != R || R == 0) {
        throw ArgumentError("factor forecast count does not match the fit");
    }
    check_horizon(fs.horizon());
}

// Shared assembly so every method combines loadings and factors with the
// same arithmetic.
MortalityForecast assemble(ForecastMethod method, int k, const Vector& a,
                           const std::vector<int>& ages, const std::vector<int>& years,
                           const FactorForecastSet& fs, std::vector<Matrix> loadings) {
    MortalityForecast out;
    out.method = method;
    out.hybrid_k = k;
    out.horizon = fs.horizon();
    out.ages = ages;
    out.years = forecast_years(years, out.horizon);
    out.age_means = a;
    out.factor_forecast = fs;
    out.loadings_used = std::move(loadings);
    out.predicted = out.reconstruct();
    return out;
}

Matrix frozen(const Matrix& B_T, int f, int H) {
    return B_T.col(f).replicate(1, H);
}

}  // namespace

Matrix FactorForecastSet::points() const {
    const int H = horizon();
    Matrix out(H, static_cast<Eigen::Index>(forecasts.size()));
    for (std::size_t f = 0; f < forecasts.size(); ++f) out.col(f) = forecasts[f].point;
    return out;
}

FactorForecastSet forecast_factors(const Matrix& factors, int H, double level,
                                   const ArimaGrid& grid) {
    check_horizon(H);
    FactorForecastSet out;
    for (Eigen::Index f = 0; f < factors.cols(); ++f) {
        const Vector series = factors.col(f);
        const std::span<const double> s(series.data(), static_cast<std::size_t>(series.size()));
        out.models.push_back(select_arima(s, grid));
        out.forecasts.push_back(forecast_arima(out.models.back(), s, H, level));
    }
    return out;
}

std::string method_name(ForecastMethod method, int hybrid_k) {
    switch (method) {
        case ForecastMethod::classic: return "classic";
        case ForecastMethod::tv_naive: return "naive";
        case ForecastMethod::tv_local: return "local";
        case ForecastMethod::tv_hybrid: return "hybrid:" + std::to_string(hybrid_k);
    }
    return "unknown";
}

std::string MortalityForecast::method_name() const { return tvmort::method_name(method, hybrid_k); }

Matrix MortalityForecast::reconstruct() const {
    const Eigen::Index N = age_means.size();
    Matrix out(N, horizon);
    for (Eigen::Index h = 0; h < horizon; ++h) {
        out.col(h) = age_means;
        for (std::size_t f = 0; f < loadings_used.size(); ++f)
            out.col(h) += loading(int(f), h) * factor_forecast.forecasts[f].point(h);
    }
    return out;
}

Matrix MortalityForecast::lower() const {
    const Eigen::Index N = age_means.size();
    Matrix out(N, horizon);
    for (Eigen::Index h = 0; h < horizon; ++h) {
        out.col(h) = age_means;
        for (std::size_t f = 0; f < loadings_used.size(); ++f) {
            const auto& ff = factor_forecast.forecasts[f];
            out.col(h) += (loading(int(f), h) * ff.lower(h))
                              .cwiseMin(loading(int(f), h) * ff.upper(h));
        }
    }
    return out;
}

Matrix MortalityForecast::upper() const {
    const Eigen::Index N = age_means.size();
    Matrix out(N, horizon);
    for (Eigen::Index h = 0; h < horizon; ++h) {
        out.col(h) = age_means;
        for (std::size_t f = 0; f < loadings_used.size(); ++f) {
            const auto& ff = factor_forecast.forecasts[f];
            out.col(h) += (loading(int(f), h) * ff.lower(h))
                              .cwiseMax(loading(int(f), h) * ff.upper(h));
        }
    }
    return out;
}

MortalityForecast forecast_classic(const ClassicFit& fit, const FactorForecastSet& factors) {
    check_factor_set(factors, fit.R);
    std::vector<Matrix> L;
    for (int f = 0; f < fit.R; ++f) L.push_back(fit.loadings.col(f));
    return assemble(ForecastMethod::classic, 0, fit.age_means, fit.ages, fit.years, factors,
                    std::move(L));
}

MortalityForecast forecast_classic(const ClassicFit& fit, const ForecastOptions& opts) {
    return forecast_classic(fit, forecast_factors(fit.factors, opts.horizon, opts.level, opts.arima));
}

MortalityForecast forecast_tv_naive(const TvFit& fit, const FactorForecastSet& factors) {
    check_factor_set(factors, fit.R);
    const int H = factors.horizon();
    std::vector<Matrix> L;
    for (int f = 0; f < fit.R; ++f) L.push_back(frozen(fit.loadings.back(), f, H));
    return assemble(ForecastMethod::tv_naive, 0, fit.age_means, fit.ages, fit.years, factors,
                    std::move(L));
}

MortalityForecast forecast_tv_naive(const TvFit& fit, const ForecastOptions& opts) {
    return forecast_tv_naive(fit,
                             forecast_factors(fit.factors, opts.horizon, opts.level, opts.arima));
}

double resolve_lambda(const TvFit& fit, const ForecastOptions& opts) {
    if (opts.lambda) {
        if (!(*opts.lambda > 0.0)) throw ArgumentError("lambda must be positive");
        return *opts.lambda;
    }
    // Loading paths of all factors are pooled for one common window.
    const Eigen::Index N = fit.num_ages(), T = fit.num_years();
    Matrix pooled(N * fit.R, T);
    for (int f = 0; f < fit.R; ++f) pooled.middleRows(f * N, N) = fit.loading_path(f);
    return select_lambda(pooled, opts.lambda_grid, opts.threads).lambda;
}

MortalityForecast forecast_tv_hybrid(const TvFit& fit, int k, const FactorForecastSet& factors,
                                     const ForecastOptions& opts) {
    check_factor_set(factors, fit.R);
    const int H = factors.horizon();
    if (k < 0 || k > H) {
        throw ArgumentError("hybrid boundary k=" + std::to_string(k) + " outside [0, " +
                            std::to_string(H) + "]");
    }
    if (k == 0) {
        auto out = forecast_tv_naive(fit, factors);
        out.method = ForecastMethod::tv_hybrid;
        return out;
    }
    const double lambda = resolve_lambda(fit, opts);
    const LocalLinearSpec spec{lambda, opts.lambda_grid.family};
    std::vector<Matrix> L;
    for (int f = 0; f < fit.R; ++f) {
        Matrix ext = extrapolate_paths(fit.loading_path(f), k, spec, opts.threads);
        Matrix full(ext.rows(), H);
        full.leftCols(k) = ext;
        for (int h = k; h < H; ++h) full.col(h) = ext.col(k - 1);
        L.push_back(std::move(full));
    }
    auto out = assemble(ForecastMethod::tv_hybrid, k, fit.age_means, fit.ages, fit.years, factors,
                        std::move(L));
    out.lambda = lambda;
    return out;
}

MortalityForecast forecast_tv_hybrid(const TvFit& fit, int k, const ForecastOptions& opts) {
    return forecast_tv_hybrid(
        fit, k, forecast_factors(fit.factors, opts.horizon, opts.level, opts.arima), opts);
}

MortalityForecast forecast_tv_local(const TvFit& fit, const FactorForecastSet& factors,
                                    const ForecastOptions& opts) {
    auto out = forecast_tv_hybrid(fit, factors.horizon(), factors, opts);
    out.method = ForecastMethod::tv_local;
    out.hybrid_k = 0;
    return out;
}

MortalityForecast forecast_tv_local(const TvFit& fit, const ForecastOptions& opts) {
    return forecast_tv_local(
        fit, forecast_factors(fit.factors, opts.horizon, opts.level, opts.arima), opts);
}

BoundaryEstimate estimate_boundary(const TvFit& fit, const MortalityPanel& validation,
                                   const BoundaryOptions& opts) {
    const Eigen::Index T0 = fit.num_years();
    const Eigen::Index V = validation.num_years();
    if (V < 2) throw ArgumentError("validation period needs at least 2 years");
    if (validation.ages() != fit.ages) throw ArgumentError("validation ages differ from the fit");
    if (validation.years().front() != fit.years.back() + 1) {
        throw ArgumentError("validation years must directly follow the training years");
    }

    Matrix kv;
    if (opts.validation_factors) {
        kv = *opts.validation_factors;
        if (kv.rows() != V || kv.cols() != fit.R) {
            throw ArgumentError("validation factors must be V x R");
        }
    } else {
        kv = forecast_factors(fit.factors, int(V), opts.forecast.level, opts.forecast.arima)
                 .points();
    }

    BoundaryEstimate est;
    est.T0 = T0;
    est.validation = V;
    est.lambda = resolve_lambda(fit, opts.forecast);
    const LocalLinearSpec spec{est.lambda, opts.forecast.lambda_grid.family};

    // Local-regression loadings over the whole validation period, shared by
    // every k.
    std::vector<Matrix> ext(fit.R);
    for (int f = 0; f < fit.R; ++f)
        ext[f] = extrapolate_paths(fit.loading_path(f), int(V), spec, opts.forecast.threads);

    const Matrix& actual = validation.log_rates();
    est.ssr_curve.assign(static_cast<std::size_t>(V + 1), 0.0);
    parallel_for(static_cast<std::size_t>(V + 1), opts.forecast.threads, [&](std::size_t kk) {
        const auto k = static_cast<Eigen::Index>(kk);
        double ssr = 0.0;
        for (Eigen::Index h = 0; h < V; ++h) {
            Vector pred = fit.age_means;
            for (int f = 0; f < fit.R; ++f) {
                const Matrix& e = ext[f];
                // Steps 1..k use the local fit; later steps freeze the loading
                // of step k, or the last in-sample loading when k = 0.
                const auto b = h < k ? e.col(h)
                               : k == 0 ? fit.loadings.back().col(f)
                                        : e.col(k - 1);
                pred += b * kv(h, f);
            }
            ssr += (actual.col(h) - pred).squaredNorm();
        }
        est.ssr_curve[kk] = ssr;
    });
    est.k_hat = 0;
    for (std::size_t k = 1; k < est.ssr_curve.size(); ++k)
        if (est.ssr_curve[k] < est.ssr_curve[est.k_hat]) est.k_hat = int(k);
    return est;
}

double mse_in_sample(const ClassicFit& fit, const MortalityPanel& panel) {
    const Matrix& y = panel.log_rates();
    const Matrix f = fit.fitted();
    if (f.rows() != y.rows() || f.cols() != y.cols()) {
        throw ArgumentError("fit and panel dimensions differ");
    }
    return (y - f).squaredNorm() / double(y.size());
}

double mse_in_sample(const TvFit& fit, const MortalityPanel& panel) {
    const Matrix& y = panel.log_rates();
    const Matrix f = fit.fitted();
    if (f.rows() != y.rows() || f.cols() != y.cols()) {
        throw ArgumentError("fit and panel dimensions differ");
    }
    return (y - f).squaredNorm() / double(y.size());
}

Mspe mspe(const Matrix& predicted, const Matrix& actual) {
    if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols() ||
        predicted.size() == 0) {
        throw ArgumentError("prediction and actual dimensions differ");
    }
    const Matrix sq = (predicted - actual).array().square().matrix();
    Mspe out;
    out.overall = sq.mean();
    out.by_year = sq.colwise().mean().transpose();
    out.by_age = sq.rowwise().mean();
    return out;
}

Mspe mspe(const MortalityForecast& forecast, const MortalityPanel& actual) {
    if (actual.ages() != forecast.ages) throw ArgumentError("actual ages differ from the forecast");
    if (actual.years().front() != forecast.years.front() || actual.num_years() < forecast.horizon) {
        throw ArgumentError("actual panel does not cover the forecast years");
    }
    return mspe(forecast.predicted, actual.log_rates().leftCols(forecast.horizon));
}

}  // namespace tvmort
