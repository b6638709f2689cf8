#include "tvmort/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "tvmort/dataio.hpp"
#include "tvmort/error.hpp"
#include "tvmort/export.hpp"
#include "tvmort/factor_classic.hpp"
#include "tvmort/factor_tv.hpp"
#include "tvmort/forecast.hpp"
#include "tvmort/sim.hpp"

namespace tvmort::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class UsageError : public Error {
public:
    using Error::Error;
};

struct RunConfig {
    std::string input;
    std::string format = "auto";
    std::string sex = "total";
    int age_cap = kDefaultAgeCap;
    std::string zero_policy = "reject";
    std::optional<int> split_year;
    std::string method = "classic";
    std::optional<int> horizon;
    std::optional<int> k;
    double level = 0.8;
    std::uint64_t seed = 20240229;
    std::string out = "out";
    unsigned threads = 1;

    std::optional<double> bandwidth;
    std::string kernel = "epanechnikov";
    bool no_boundary_correction = false;
    std::optional<int> factors;
    double cutoff = 0.9;

    std::optional<double> lambda;
    std::vector<double> lambda_grid;
    int validation = 0;

    int max_p = 3, max_d = 2, max_q = 3;
    bool no_drift = false;

    std::string boundary_factors = "forecast";
    int window = 30;

    int reps = 100;
    std::vector<int> train_lengths{70, 75, 80, 85, 90, 95};
    std::vector<int> dgps{1, 2, 3};
    int n = 100, t = 100;
    std::string factor_scale = "sqrt_n";
    std::string emit_panel;
};

void add_options(CLI::App& app, RunConfig& c) {
    app.add_option("--input", c.input, "Mortality data file");
    app.add_option("--format", c.format, "auto|hmd|csv (auto: .csv means csv)")
        ->check(CLI::IsMember({"auto", "hmd", "csv"}));
    app.add_option("--sex", c.sex, "female|male|total (HMD input)")
        ->check(CLI::IsMember({"female", "male", "total"}));
    app.add_option("--age-cap", c.age_cap, "Drop ages above this");
    app.add_option("--zero-policy", c.zero_policy, "reject|interpolate|floor[:eps]");
    app.add_option("--split-year", c.split_year, "Last training year");
    app.add_option("--method", c.method, "classic|naive|local|hybrid[:k]");
    app.add_option("--horizon", c.horizon, "Forecast horizon in years");
    app.add_option("--k", c.k, "Hybrid boundary");
    app.add_option("--level", c.level, "Prediction interval coverage");
    app.add_option("--seed", c.seed, "Master seed for simulation");
    app.add_option("--out", c.out, "Output directory");
    app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");

    app.add_option("--bandwidth", c.bandwidth, "Kernel bandwidth h (default: rule of thumb)");
    app.add_option("--kernel", c.kernel, "epanechnikov|uniform")
        ->check(CLI::IsMember({"epanechnikov", "uniform"}));
    app.add_flag("--no-boundary-correction", c.no_boundary_correction);
    app.add_option("--factors", c.factors, "Fixed number of factors");
    app.add_option("--cutoff", c.cutoff, "Cumulative eigenvalue share for choosing R");

    app.add_option("--lambda", c.lambda, "Local regression half-width (default: validated)");
    app.add_option("--lambda-grid", c.lambda_grid, "Lambda candidates as fractions of T")
        ->delimiter(',');
    app.add_option("--validation", c.validation, "Lambda validation length (0 = min(10, T/5))");

    app.add_option("--max-p", c.max_p);
    app.add_option("--max-d", c.max_d);
    app.add_option("--max-q", c.max_q);
    app.add_flag("--no-drift", c.no_drift);

    app.add_option("--boundary-factors", c.boundary_factors, "forecast|insample")
        ->check(CLI::IsMember({"forecast", "insample"}));
    app.add_option("--window", c.window, "Rolling window length");

    app.add_option("--reps", c.reps, "Monte Carlo replications");
    app.add_option("--train-lengths", c.train_lengths)->delimiter(',');
    app.add_option("--dgps", c.dgps)->delimiter(',');
    app.add_option("--n", c.n, "Simulated ages");
    app.add_option("--t", c.t, "Simulated years");
    app.add_option("--factor-scale", c.factor_scale, "sqrt_n|unit|preserve_product")
        ->check(CLI::IsMember({"sqrt_n", "unit", "preserve_product"}));
    app.add_option("--emit-panel", c.emit_panel,
                   "Write one simulated panel (first DGP) to this CSV instead of running the study");
}

// --- helpers -------------------------------------------------------------

std::ofstream open_out(const RunConfig& c, const std::string& name) {
    fs::create_directories(c.out);
    const fs::path path = fs::path(c.out) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    return f;
}

void write_text(const RunConfig& c, const std::string& name, const std::string& text) {
    auto f = open_out(c, name);
    f << text << '\n';
    if (!f) throw Error("failed writing " + name);
}

MortalityPanel load_panel(const RunConfig& c) {
    if (c.input.empty()) throw UsageError("--input is required");
    if (!fs::exists(c.input)) throw UsageError("input file not found: " + c.input);
    std::ifstream in(c.input);
    if (!in) throw UsageError("cannot open input file: " + c.input);
    std::string format = c.format;
    if (format == "auto") format = fs::path(c.input).extension() == ".csv" ? "csv" : "hmd";
    std::vector<MxRecord> records;
    if (format == "csv") {
        for (const auto& r : parse_csv_long(in))
            if (r.age <= c.age_cap) records.push_back(r);
    } else {
        records = parse_hmd_table(in, c.age_cap, parse_sex(c.sex));
    }
    return build_panel(records, parse_zero_policy(c.zero_policy),
                       fs::path(c.input).filename().string());
}

struct Panels {
    MortalityPanel train;
    std::optional<MortalityPanel> holdout;
};

Panels load_split(const RunConfig& c) {
    MortalityPanel full = load_panel(c);
    if (!c.split_year) return {full, std::nullopt};
    PanelSplit s = split_panel(full, *c.split_year);
    return {s.train, s.holdout};
}

FactorCount factor_count(const RunConfig& c) {
    FactorCount fc;
    if (c.factors) fc.fixed = *c.factors;
    fc.cutoff = c.cutoff;
    return fc;
}

TvOptions tv_options(const RunConfig& c, const MortalityPanel& panel) {
    TvOptions o;
    KernelSpec k = default_kernel(panel.num_years(), panel.num_ages());
    k.family = parse_kernel_family(c.kernel);
    if (c.bandwidth) k.bandwidth = *c.bandwidth;
    k.boundary_correction = !c.no_boundary_correction;
    o.kernel = k;
    o.count = factor_count(c);
    o.threads = c.threads;
    return o;
}

ForecastOptions forecast_options(const RunConfig& c, int horizon) {
    ForecastOptions o;
    o.horizon = horizon;
    o.level = c.level;
    o.arima = ArimaGrid{c.max_p, c.max_d, c.max_q, !c.no_drift, c.threads};
    o.lambda = c.lambda;
    if (!c.lambda_grid.empty()) o.lambda_grid.fractions = c.lambda_grid;
    o.lambda_grid.validation = c.validation;
    o.threads = c.threads;
    return o;
}

struct MethodChoice {
    ForecastMethod method;
    int k = 0;
};

MethodChoice parse_method(const RunConfig& c) {
    const std::string& m = c.method;
    if (m == "classic") return {ForecastMethod::classic};
    if (m == "naive") return {ForecastMethod::tv_naive};
    if (m == "local") return {ForecastMethod::tv_local};
    if (m.rfind("hybrid", 0) == 0) {
        std::optional<int> k = c.k;
        if (m.size() > 6) {
            if (m[6] != ':') throw UsageError("method must be hybrid or hybrid:<k>");
            try {
                std::size_t used = 0;
                k = std::stoi(m.substr(7), &used);
                if (used != m.size() - 7) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw UsageError("bad hybrid boundary in '" + m + "'");
            }
        }
        if (!k) throw UsageError("method hybrid needs a boundary: use hybrid:<k> or --k");
        return {ForecastMethod::tv_hybrid, *k};
    }
    throw UsageError("unknown method '" + m + "' (classic|naive|local|hybrid:k)");
}

int resolve_horizon(const RunConfig& c, const Panels& p) {
    if (c.horizon) {
        if (*c.horizon < 1) throw UsageError("--horizon must be at least 1");
        return *c.horizon;
    }
    if (p.holdout) return int(p.holdout->num_years());
    throw UsageError("--horizon is required without --split-year");
}

MortalityForecast run_method(const MethodChoice& mc, const MortalityPanel& train,
                             const RunConfig& c, int H) {
    const ForecastOptions fo = forecast_options(c, H);
    if (mc.method == ForecastMethod::classic) {
        return forecast_classic(fit_classic(train, factor_count(c)), fo);
    }
    const TvFit tv = fit_tv(train, tv_options(c, train));
    switch (mc.method) {
        case ForecastMethod::tv_naive: return forecast_tv_naive(tv, fo);
        case ForecastMethod::tv_local: return forecast_tv_local(tv, fo);
        default: return forecast_tv_hybrid(tv, mc.k, fo);
    }
}

json kernel_json(const KernelSpec& k) {
    return {{"family", k.family == KernelFamily::epanechnikov ? "epanechnikov" : "uniform"},
            {"bandwidth", k.bandwidth},
            {"boundary_correction", k.boundary_correction}};
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// --- commands -------------------------------------------------------------

void cmd_fit(const RunConfig& c, std::ostream& out) {
    const Panels p = load_split(c);
    const MortalityPanel& panel = p.train;
    const ClassicFit classic = fit_classic(panel, factor_count(c));
    const TvFit tv = fit_tv(panel, tv_options(c, panel));
    const double mse_c = mse_in_sample(classic, panel), mse_tv = mse_in_sample(tv, panel);

    { auto f = open_out(c, "classic_loadings.csv"); write_classic_loadings_csv(f, classic); }
    { auto f = open_out(c, "classic_factors.csv"); write_factors_csv(f, classic.years, classic.factors); }
    { auto f = open_out(c, "tv_loadings.csv"); write_tv_loadings_csv(f, tv); }
    { auto f = open_out(c, "tv_factors.csv"); write_factors_csv(f, tv.years, tv.factors); }

    json j;
    j["input"] = panel.label();
    j["ages"] = {panel.ages().front(), panel.ages().back()};
    j["years"] = {panel.years().front(), panel.years().back()};
    j["classic"] = {{"R", classic.R},
                    {"explained_ratio", to_std(classic.explained_ratio)},
                    {"mse", mse_c},
                    {"warnings", classic.warnings}};
    j["tv"] = {{"R", tv.R},
               {"kernel", kernel_json(tv.kernel)},
               {"eigen_shares_at_center", to_std(tv.eigen_shares_at_center)},
               {"mse", mse_tv},
               {"warnings", tv.warnings}};
    j["mse_ratio_tv_over_classic"] = mse_tv / mse_c;
    write_text(c, "fit_summary.json", j.dump(2));
    out << "in-sample MSE classic " << mse_c << ", tv " << mse_tv << '\n';
}

void cmd_forecast(const RunConfig& c, std::ostream& out) {
    const MethodChoice mc = parse_method(c);
    const Panels p = load_split(c);
    const int H = resolve_horizon(c, p);
    const MortalityForecast fc = run_method(mc, p.train, c, H);

    { auto f = open_out(c, "forecast.csv"); write_forecast_csv(f, fc); }
    { auto f = open_out(c, "loadings_used.csv"); write_loadings_used_csv(f, fc); }
    for (std::size_t i = 0; i < fc.factor_forecast.forecasts.size(); ++i) {
        const std::string suffix = i == 0 ? "" : "_" + std::to_string(i + 1);
        auto f = open_out(c, "factor_forecast" + suffix + ".csv");
        write_factor_forecast_csv(f, fc.factor_forecast.forecasts[i]);
        write_text(c, "arima_model" + suffix + ".json", arima_json(fc.factor_forecast.models[i]));
    }
    json meta;
    meta["method"] = fc.method_name();
    meta["horizon"] = H;
    meta["level"] = c.level;
    if (fc.lambda) meta["lambda"] = *fc.lambda;
    // Extrapolated loadings are not renormalised; report their sums.
    std::vector<double> sums;
    for (int h = 0; h < H; ++h) sums.push_back(fc.loading(0, h).sum());
    meta["loading_sums"] = sums;
    write_text(c, "forecast_meta.json", meta.dump(2));

    if (p.holdout) {
        if (p.holdout->num_years() >= H) {
            const Mspe m = mspe(fc, *p.holdout);
            write_text(c, "metrics.json", metrics_json(m, fc.years, fc.ages));
            out << fc.method_name() << " MSPE " << m.overall << '\n';
        } else {
            out << "holdout shorter than the horizon; metrics skipped\n";
        }
    }
}

void cmd_evaluate(const RunConfig& c, std::ostream& out) {
    const Panels p = load_split(c);
    if (!p.holdout) throw UsageError("evaluate needs --split-year");
    const int H = c.horizon ? *c.horizon : int(p.holdout->num_years());
    if (H < 1 || H > p.holdout->num_years()) throw UsageError("horizon exceeds the holdout");

    std::vector<MethodChoice> methods;
    if (c.method == "all") {
        methods = {{ForecastMethod::classic}, {ForecastMethod::tv_naive}, {ForecastMethod::tv_local}};
        if (c.k) methods.push_back({ForecastMethod::tv_hybrid, *c.k});
    } else {
        methods.push_back(parse_method(c));
    }
    const ForecastOptions fo = forecast_options(c, H);
    std::optional<ClassicFit> classic;
    std::optional<TvFit> tv;
    std::optional<FactorForecastSet> tv_factors;
    json all;
    for (const auto& mc : methods) {
        MortalityForecast fc;
        if (mc.method == ForecastMethod::classic) {
            classic = fit_classic(p.train, factor_count(c));
            fc = forecast_classic(*classic, fo);
        } else {
            if (!tv) {
                tv = fit_tv(p.train, tv_options(c, p.train));
                tv_factors = forecast_factors(tv->factors, H, fo.level, fo.arima);
            }
            if (mc.method == ForecastMethod::tv_naive) fc = forecast_tv_naive(*tv, *tv_factors);
            else if (mc.method == ForecastMethod::tv_local) fc = forecast_tv_local(*tv, *tv_factors, fo);
            else fc = forecast_tv_hybrid(*tv, mc.k, *tv_factors, fo);
        }
        const Mspe m = mspe(fc, *p.holdout);
        out << fc.method_name() << " MSPE " << m.overall << '\n';
        all[fc.method_name()] = json::parse(metrics_json(m, fc.years, fc.ages));
    }
    write_text(c, "metrics.json", (methods.size() == 1 ? all.begin().value() : all).dump(2));
}

void cmd_boundary(const RunConfig& c, std::ostream& out) {
    const MortalityPanel full = load_panel(c);
    if (!c.split_year) throw UsageError("boundary needs --split-year (last training year)");
    PanelSplit s = split_panel(full, *c.split_year);
    MortalityPanel validation = s.holdout;
    if (c.horizon) {
        if (*c.horizon < 2 || *c.horizon > validation.num_years())
            throw UsageError("--horizon must lie in [2, validation length]");
        validation = validation.slice_years(0, *c.horizon);
    }
    const TvFit fit = fit_tv(s.train, tv_options(c, s.train));
    BoundaryOptions bo;
    bo.forecast = forecast_options(c, int(validation.num_years()));
    if (c.boundary_factors == "insample") {
        const MortalityPanel joint = concat_years(s.train, validation);
        const TvFit jf = fit_tv(joint, tv_options(c, joint));
        if (jf.R != fit.R) throw Error("factor count differs between training and joint fits");
        bo.validation_factors = jf.factors.bottomRows(validation.num_years());
    }
    const BoundaryEstimate est = estimate_boundary(fit, validation, bo);
    { auto f = open_out(c, "boundary.csv"); write_boundary_csv(f, est); }
    json j;
    j["k_hat"] = est.k_hat;
    j["T0"] = est.T0;
    j["validation"] = est.validation;
    j["lambda"] = est.lambda;
    j["factors"] = c.boundary_factors;
    j["ssr_min"] = est.ssr_curve[est.k_hat];
    write_text(c, "boundary.json", j.dump(2));
    out << "k_hat " << est.k_hat << '\n';
}

void cmd_rollwin(const RunConfig& c, std::ostream& out) {
    const MortalityPanel panel = load_panel(c);
    const int R = c.factors ? *c.factors : 1;
    const RollingLoadings rl = rolling_window_loadings(panel, c.window, R, c.threads);
    { auto f = open_out(c, "rollwin_loadings.csv"); write_rolling_csv(f, rl, c.window); }
    out << rl.loadings.size() << " windows\n";
}

void cmd_simulate(const RunConfig& c, std::ostream& out) {
    if (c.dgps.empty()) throw UsageError("--dgps is empty");
    if (!c.emit_panel.empty()) {
        sim::DgpSpec spec;
        spec.kind = sim::parse_dgp(std::to_string(c.dgps.front()));
        spec.N = c.n;
        spec.T = c.t;
        spec.seed = c.seed;
        spec.scale = sim::parse_factor_scale(c.factor_scale);
        const sim::Simulated s = sim::generate(spec);
        std::ofstream f(c.emit_panel, std::ios::binary);
        if (!f) throw Error("cannot write " + c.emit_panel);
        write_csv_long(f, s.panel);
        out << "wrote " << c.emit_panel << '\n';
        return;
    }
    sim::McConfig mc;
    mc.dgps.clear();
    for (int d : c.dgps) mc.dgps.push_back(sim::parse_dgp(std::to_string(d)));
    mc.train_lengths = c.train_lengths;
    mc.reps = c.reps;
    mc.master_seed = c.seed;
    mc.N = c.n;
    mc.T = c.t;
    mc.scale = sim::parse_factor_scale(c.factor_scale);
    mc.count = FactorCount{c.factors ? c.factors : std::optional<int>(1), c.cutoff};
    if (c.bandwidth) {
        mc.kernel = KernelSpec{parse_kernel_family(c.kernel), *c.bandwidth, !c.no_boundary_correction};
    }
    mc.forecast = forecast_options(c, 1);
    mc.forecast.arima.threads = 1;
    mc.threads = c.threads;
    const sim::McReport rep = sim::run_mc(mc);
    { auto f = open_out(c, "mc_table.csv"); sim::write_table_csv(f, rep); }
    { auto f = open_out(c, "mc_report.json"); sim::write_report_json(f, rep); }
    sim::write_table_csv(out, rep);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time-varying factor mortality models"};
    app.name("tvmort");
    RunConfig cfg;
    add_options(app, cfg);
    app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1, 1);

    using Handler = void (*)(const RunConfig&, std::ostream&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands{
        {"fit", "Fit classic and time-varying models", cmd_fit},
        {"forecast", "Forecast log death rates", cmd_forecast},
        {"boundary", "Estimate the short/long-term boundary", cmd_boundary},
        {"evaluate", "Holdout MSPE for one or all methods", cmd_evaluate},
        {"simulate", "Monte Carlo study or a single simulated panel", cmd_simulate},
        {"rollwin", "Classic loadings on rolling windows", cmd_rollwin},
    };
    for (const auto& [name, help, h] : commands) app.add_subcommand(name, help)->fallthrough();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        for (const auto& [name, help, h] : commands) {
            if (app.got_subcommand(name)) {
                h(cfg, out);
                break;
            }
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace tvmort::cli
