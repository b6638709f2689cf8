#pragma once

namespace tvmort {

/// Standard normal quantile. Acklam's rational approximation polished with
/// one Halley step; absolute error below 1e-12 on (1e-300, 1 - 1e-16).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace tvmort
