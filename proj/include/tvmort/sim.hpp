#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tvmort/dataio.hpp"
#include "tvmort/forecast.hpp"
#include "tvmort/types.hpp"

namespace tvmort::sim {

enum class Dgp { dgp1 = 1, dgp2 = 2, dgp3 = 3 };

/// How the common factor is scaled once the loadings are normalised to sum
/// to one at every t.
enum class FactorScale {
    preserve_product,  // k_t times the raw loading sum, so b k equals the raw product
    unit,              // k_t unchanged
    sqrt_n,            // k_t times sqrt(N)
};

struct DgpSpec {
    Dgp kind = Dgp::dgp1;
    Eigen::Index N = 100;
    Eigen::Index T = 100;
    std::uint64_t seed = 0;
    double factor_sigma = 0.8;
    std::optional<double> noise_sigma;  // default 0.1, 0.03, 0.1 for DGP 1, 2, 3
    FactorScale scale = FactorScale::sqrt_n;

    double noise() const;
};

struct Simulated {
    MortalityPanel panel;  // ages 1..N, years 1..T; log rates are x = b k + e
    Matrix loadings;       // N x T true loadings, columns sum to one
    Vector factors;        // T true factor values on the scale of `loadings`
};

/// Draw order from Philox4x64(seed): loading uniforms (DGP 1, 2), factor
/// innovations, then noise year by year.
Simulated generate(const DgpSpec& spec);

/// Logistic loading of DGP 3 before normalisation, i and t 1-based.
double dgp3_raw_loading(Eigen::Index i, Eigen::Index t, Eigen::Index N, Eigen::Index T);

std::uint64_t replication_seed(std::uint64_t master_seed, Dgp dgp, int rep);

struct McConfig {
    std::vector<Dgp> dgps{Dgp::dgp1, Dgp::dgp2, Dgp::dgp3};
    std::vector<int> train_lengths{70, 75, 80, 85, 90, 95};
    std::vector<ForecastMethod> methods{ForecastMethod::tv_local, ForecastMethod::tv_naive,
                                        ForecastMethod::classic};
    int reps = 100;
    std::uint64_t master_seed = 20240229;
    Eigen::Index N = 100;
    Eigen::Index T = 100;
    FactorScale scale = FactorScale::sqrt_n;
    FactorCount count{1, 0.9};
    std::optional<KernelSpec> kernel;  // default: Silverman bandwidth per training length
    ForecastOptions forecast;          // horizon is set per train length
    unsigned threads = 1;
    double max_failure_rate = 0.05;
};

struct McCell {
    Dgp dgp;
    ForecastMethod method;
    int train_length;
    double mean_mspe = 0.0;
    int replications = 0;
    std::vector<double> raw;  // per replication, NaN where excluded
};

struct McReport {
    std::vector<McCell> cells;
    std::uint64_t master_seed = 0;
    std::string rng = "philox4x64-10";
    std::string factor_scale;
    int reps_requested = 0;
    int failed_replications = 0;
    std::vector<std::string> warnings;

    const McCell& cell(Dgp dgp, ForecastMethod method, int train_length) const;
};

/// A replication index that fails for any DGP is dropped from every cell so
/// that all cells average over the same replications. Throws EstimationError
/// when more than max_failure_rate of the replications fail.
McReport run_mc(const McConfig& config);

/// Rows DGP x method, columns train lengths.
void write_table_csv(std::ostream& out, const McReport& report);
void write_report_json(std::ostream& out, const McReport& report);

std::string dgp_name(Dgp dgp);
Dgp parse_dgp(const std::string& name);
std::string factor_scale_name(FactorScale scale);
FactorScale parse_factor_scale(const std::string& name);

}  // namespace tvmort::sim
