#pragma once

#include <iosfwd>
#include <string>

#include "tvmort/arima.hpp"
#include "tvmort/factor_classic.hpp"
#include "tvmort/factor_tv.hpp"
#include "tvmort/forecast.hpp"

// CSV writers use 17 significant digits. JSON numbers are written in the
// shortest form that reads back to the same double.

namespace tvmort {

/// "age,b1[,b2,...]"
void write_classic_loadings_csv(std::ostream& out, const ClassicFit& fit);
/// "year,k1[,k2,...]"
void write_factors_csv(std::ostream& out, const std::vector<int>& years, const Matrix& factors);
/// "year,age,factor,loading"
void write_tv_loadings_csv(std::ostream& out, const TvFit& fit);
/// "year,age,predicted_log_mx,lower,upper"
void write_forecast_csv(std::ostream& out, const MortalityForecast& forecast);
/// "year,age,factor,loading"
void write_loadings_used_csv(std::ostream& out, const MortalityForecast& forecast);
/// "h,point,lower,upper"
void write_factor_forecast_csv(std::ostream& out, const FactorForecast& forecast);
/// "k,ssr"
void write_boundary_csv(std::ostream& out, const BoundaryEstimate& estimate);
/// "window_start,window_end,age,factor,loading"
void write_rolling_csv(std::ostream& out, const RollingLoadings& rolling, int window_length);

/// {"overall", "by_year", "by_age"} plus the year and age labels.
std::string metrics_json(const Mspe& m, const std::vector<int>& years, const std::vector<int>& ages);
/// Order, coefficients, standard errors, sigma2, loglik and AIC.
std::string arima_json(const ArimaModel& model);

}  // namespace tvmort
