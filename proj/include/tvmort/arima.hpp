#pragma once

#include <span>
#include <string>

#include "tvmort/types.hpp"

namespace tvmort {

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;
    bool drift = false;  // mean of the differenced series; only for d <= 1

    std::string to_string() const;
    friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

/// Gaussian ARIMA(p, d, q) fitted by exact maximum likelihood.
///
/// Sign conventions: (1 - ar_1 B - ... - ar_p B^p)(w_t - drift) =
/// (1 + ma_1 B + ... + ma_q B^q) e_t, where w is the d-times differenced
/// series and e_t ~ N(0, sigma2).
struct ArimaModel {
    ArimaOrder order;
    Vector ar;
    Vector ma;
    double drift_value = 0.0;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    Vector stderrs;  // ar..., ma..., drift (NaN when the Hessian is not positive definite)
    Eigen::Index nobs = 0;  // length of the differenced series
    bool degenerate = false;  // exact fit with zero innovation variance

    int num_params() const { return order.p + order.q + (order.drift ? 1 : 0) + 1; }
};

/// Throws EstimationError when the optimiser fails or the optimum lies on
/// the stationarity / invertibility boundary.
ArimaModel fit_arima(std::span<const double> series, ArimaOrder order);

struct ArimaGrid {
    int max_p = 3;
    int max_d = 2;
    int max_q = 3;
    bool allow_drift = true;
    unsigned threads = 1;  // candidates fitted concurrently; 0 = hardware concurrency
};

/// Exhaustive AIC search. Ties keep the candidate met first in the order
/// d, p, q, drift-off-before-on.
ArimaModel select_arima(std::span<const double> series, const ArimaGrid& grid = {});

/// Point forecasts and central prediction intervals for a factor series.
struct FactorForecast {
    int horizon = 0;
    double level = 0.8;
    Vector point;
    Vector lower;
    Vector upper;
};

/// `history` is the series the model was fitted to; forecasts continue it.
FactorForecast forecast_arima(const ArimaModel& model, std::span<const double> history, int H,
                              double level = 0.8);

/// Psi weights of the integrated model, psi_0 = 1, length H.
Vector integrated_psi_weights(const ArimaModel& model, int H);

/// Exact Gaussian log-likelihood of a stationary ARMA for the given
/// (already differenced) series, with sigma2 profiled out. Returns the
/// profiled sigma2 through the optional pointer.
double arma_loglik(std::span<const double> w, const Vector& ar, const Vector& ma, double mean,
                   double* sigma2 = nullptr);

/// True when all roots of 1 - c_1 z - ... - c_k z^k lie outside the circle
/// of radius 1 + margin.
bool roots_outside_unit_circle(const Vector& coeffs, double margin = 1e-6);

}  // namespace tvmort
