#include "tvmort/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "tvmort/error.hpp"
#include "tvmort/format.hpp"
#include "tvmort/parallel.hpp"
#include "tvmort/philox.hpp"

namespace tvmort::sim {

double DgpSpec::noise() const {
    if (noise_sigma) return *noise_sigma;
    return kind == Dgp::dgp2 ? 0.03 : 0.1;
}

double dgp3_raw_loading(Eigen::Index i, Eigen::Index t, Eigen::Index N, Eigen::Index T) {
    return 1.0 / (1.0 + std::exp(6.0 * double(i) / double(N) + 2.0 - 12.0 * double(t) / double(T)));
}

Simulated generate(const DgpSpec& spec) {
    const Eigen::Index N = spec.N, T = spec.T;
    if (N < 2 || T < 3) throw ArgumentError("simulation needs N >= 2 and T >= 3");
    if (spec.kind == Dgp::dgp2 && (N % 2 != 0 || T % 2 != 0)) {
        throw ArgumentError("DGP 2 needs even N and T");
    }
    if (!(spec.factor_sigma >= 0.0) || !(spec.noise() >= 0.0)) {
        throw ArgumentError("standard deviations must be nonnegative");
    }
    Philox4x64 rng(spec.seed);

    Matrix raw(N, T);
    switch (spec.kind) {
        case Dgp::dgp1: {
            for (Eigen::Index i = 0; i < N; ++i) raw.row(i).setConstant(rng.uniform());
            break;
        }
        case Dgp::dgp2: {
            for (Eigen::Index i = 0; i < N; ++i) {
                const double b = 1.1 + 0.8 * rng.uniform();
                const double jump = i < N / 2 ? 1.0 : -1.0;
                for (Eigen::Index t = 0; t < T; ++t) raw(i, t) = t < T / 2 ? b : b + jump;
            }
            break;
        }
        case Dgp::dgp3: {
            for (Eigen::Index i = 0; i < N; ++i)
                for (Eigen::Index t = 0; t < T; ++t) raw(i, t) = dgp3_raw_loading(i + 1, t + 1, N, T);
            break;
        }
    }

    Vector k(T);
    double level = 0.0;  // k_0 = 0
    for (Eigen::Index t = 0; t < T; ++t) {
        level += spec.factor_sigma * rng.normal();
        k(t) = level;
    }

    Matrix loadings(N, T);
    Vector factors(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double s = raw.col(t).sum();
        loadings.col(t) = raw.col(t) / s;
        switch (spec.scale) {
            case FactorScale::preserve_product: factors(t) = s * k(t); break;
            case FactorScale::unit: factors(t) = k(t); break;
            case FactorScale::sqrt_n: factors(t) = std::sqrt(double(N)) * k(t); break;
        }
    }
    Matrix x(N, T);
    const double sd = spec.noise();
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index i = 0; i < N; ++i)
            x(i, t) = loadings(i, t) * factors(t) + sd * rng.normal();

    std::vector<int> ages(static_cast<std::size_t>(N)), years(static_cast<std::size_t>(T));
    for (Eigen::Index i = 0; i < N; ++i) ages[i] = int(i + 1);
    for (Eigen::Index t = 0; t < T; ++t) years[t] = int(t + 1);
    return Simulated{MortalityPanel::from_log_rates(std::move(ages), std::move(years),
                                                    std::move(x), dgp_name(spec.kind)),
                     std::move(loadings), std::move(factors)};
}

std::uint64_t replication_seed(std::uint64_t master_seed, Dgp dgp, int rep) {
    return mix_seed(master_seed, static_cast<std::uint64_t>(dgp), static_cast<std::uint64_t>(rep));
}

const McCell& McReport::cell(Dgp dgp, ForecastMethod method, int train_length) const {
    for (const auto& c : cells)
        if (c.dgp == dgp && c.method == method && c.train_length == train_length) return c;
    throw ArgumentError("no such Monte Carlo cell");
}

namespace {

// MSPE per (train length, method) for one simulated data set.
std::vector<double> run_replication(const McConfig& cfg, Dgp dgp, int rep) {
    DgpSpec spec;
    spec.kind = dgp;
    spec.N = cfg.N;
    spec.T = cfg.T;
    spec.seed = replication_seed(cfg.master_seed, dgp, rep);
    spec.scale = cfg.scale;
    const Simulated sim = generate(spec);

    std::vector<double> out;
    for (int L : cfg.train_lengths) {
        // Generated data have no age level; fitting with a_x = 0 keeps the
        // training slice exactly rank one inside every kernel window.
        const MortalityPanel train =
            sim.panel.slice_years(0, L).with_age_means(Vector::Zero(cfg.N));
        const MortalityPanel test = sim.panel.slice_years(L, cfg.T - L);
        ForecastOptions fo = cfg.forecast;
        fo.horizon = int(cfg.T - L);
        fo.threads = 1;

        std::optional<ClassicFit> classic;
        std::optional<TvFit> tv;
        std::optional<FactorForecastSet> tv_factors;
        for (ForecastMethod m : cfg.methods) {
            MortalityForecast fc;
            if (m == ForecastMethod::classic) {
                if (!classic) classic = fit_classic(train, cfg.count);
                fc = forecast_classic(*classic, fo);
            } else {
                if (!tv) {
                    tv = fit_tv(train, TvOptions{cfg.kernel, cfg.count, 1});
                    tv_factors = forecast_factors(tv->factors, fo.horizon, fo.level, fo.arima);
                }
                switch (m) {
                    case ForecastMethod::tv_naive: fc = forecast_tv_naive(*tv, *tv_factors); break;
                    case ForecastMethod::tv_local:
                        fc = forecast_tv_local(*tv, *tv_factors, fo);
                        break;
                    default: throw ArgumentError("hybrid is not part of the Monte Carlo design");
                }
            }
            out.push_back(mspe(fc.predicted, test.log_rates()).overall);
        }
    }
    return out;
}

}  // namespace

McReport run_mc(const McConfig& cfg) {
    if (cfg.reps < 1) throw ArgumentError("reps must be at least 1");
    if (cfg.dgps.empty() || cfg.train_lengths.empty() || cfg.methods.empty()) {
        throw ArgumentError("empty Monte Carlo design");
    }
    for (int L : cfg.train_lengths)
        if (L < 3 || L >= cfg.T) throw ArgumentError("train lengths must lie in [3, T)");

    const std::size_t D = cfg.dgps.size(), R = static_cast<std::size_t>(cfg.reps);
    std::vector<std::vector<double>> results(D * R);
    std::vector<std::string> errors(D * R);
    parallel_for(D * R, cfg.threads, [&](std::size_t job) {
        const std::size_t d = job / R;
        const int rep = int(job % R);
        try {
            results[job] = run_replication(cfg, cfg.dgps[d], rep);
        } catch (const Error& e) {
            errors[job] = e.what();
        }
    });

    McReport report;
    report.master_seed = cfg.master_seed;
    report.factor_scale = factor_scale_name(cfg.scale);
    report.reps_requested = cfg.reps;
    std::vector<bool> failed(R, false);
    for (std::size_t job = 0; job < D * R; ++job) {
        if (errors[job].empty()) continue;
        failed[job % R] = true;
        report.warnings.push_back(dgp_name(cfg.dgps[job / R]) + " replication " +
                                  std::to_string(job % R) + ": " + errors[job]);
    }
    for (bool f : failed) report.failed_replications += f ? 1 : 0;
    if (report.failed_replications > cfg.max_failure_rate * double(cfg.reps)) {
        throw EstimationError(std::to_string(report.failed_replications) + " of " +
                              std::to_string(cfg.reps) + " replications failed; first: " +
                              report.warnings.front());
    }

    for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            for (std::size_t l = 0; l < cfg.train_lengths.size(); ++l) {
                McCell c{cfg.dgps[d], cfg.methods[m], cfg.train_lengths[l], 0.0, 0, {}};
                double sum = 0.0;
                for (std::size_t r = 0; r < R; ++r) {
                    if (failed[r]) {
                        c.raw.push_back(std::numeric_limits<double>::quiet_NaN());
                        continue;
                    }
                    const double v = results[d * R + r][l * cfg.methods.size() + m];
                    c.raw.push_back(v);
                    sum += v;
                    ++c.replications;
                }
                c.mean_mspe = sum / double(c.replications);
                report.cells.push_back(std::move(c));
            }
        }
    }
    return report;
}

void write_table_csv(std::ostream& out, const McReport& report) {
    std::vector<int> lengths;
    for (const auto& c : report.cells)
        if (std::find(lengths.begin(), lengths.end(), c.train_length) == lengths.end())
            lengths.push_back(c.train_length);
    out << "dgp,method";
    for (int L : lengths) out << ',' << L;
    out << '\n';
    for (std::size_t i = 0; i < report.cells.size(); i += lengths.size()) {
        const auto& first = report.cells[i];
        out << dgp_name(first.dgp) << ',' << method_name(first.method);
        for (std::size_t j = 0; j < lengths.size(); ++j)
            out << ',' << fmt_double(report.cells[i + j].mean_mspe);
        out << '\n';
    }
}

void write_report_json(std::ostream& out, const McReport& report) {
    nlohmann::json j;
    j["rng"] = report.rng;
    j["master_seed"] = report.master_seed;
    j["factor_scale"] = report.factor_scale;
    j["reps_requested"] = report.reps_requested;
    j["failed_replications"] = report.failed_replications;
    j["warnings"] = report.warnings;
    auto& cells = j["cells"] = nlohmann::json::array();
    for (const auto& c : report.cells) {
        cells.push_back({{"dgp", dgp_name(c.dgp)},
                         {"method", method_name(c.method)},
                         {"train_length", c.train_length},
                         {"mean_mspe", c.mean_mspe},
                         {"replications", c.replications},
                         {"raw_mspe", c.raw}});
    }
    out << j.dump(2) << '\n';
}

std::string dgp_name(Dgp dgp) { return "dgp" + std::to_string(static_cast<int>(dgp)); }

Dgp parse_dgp(const std::string& name) {
    if (name == "1" || name == "dgp1") return Dgp::dgp1;
    if (name == "2" || name == "dgp2") return Dgp::dgp2;
    if (name == "3" || name == "dgp3") return Dgp::dgp3;
    throw ArgumentError("unknown DGP '" + name + "' (expected 1, 2 or 3)");
}

std::string factor_scale_name(FactorScale scale) {
    switch (scale) {
        case FactorScale::preserve_product: return "preserve_product";
        case FactorScale::unit: return "unit";
        case FactorScale::sqrt_n: return "sqrt_n";
    }
    return "unknown";
}

FactorScale parse_factor_scale(const std::string& name) {
    if (name == "preserve_product") return FactorScale::preserve_product;
    if (name == "unit") return FactorScale::unit;
    if (name == "sqrt_n") return FactorScale::sqrt_n;
    throw ArgumentError("unknown factor scale '" + name + "'");
}

}  // namespace tvmort::sim
