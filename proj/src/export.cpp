#include "tvmort/export.hpp"

#include <json.hpp>

#include <ostream>

#include "tvmort/format.hpp"

namespace tvmort {
namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void write_classic_loadings_csv(std::ostream& out, const ClassicFit& fit) {
    out << "age";
    for (int f = 0; f < fit.R; ++f) out << ",b" << f + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < fit.loadings.rows(); ++i) {
        out << fit.ages[i];
        for (int f = 0; f < fit.R; ++f) out << ',' << fmt_double(fit.loadings(i, f));
        out << '\n';
    }
}

void write_factors_csv(std::ostream& out, const std::vector<int>& years, const Matrix& factors) {
    out << "year";
    for (Eigen::Index f = 0; f < factors.cols(); ++f) out << ",k" << f + 1;
    out << '\n';
    for (Eigen::Index t = 0; t < factors.rows(); ++t) {
        out << years[t];
        for (Eigen::Index f = 0; f < factors.cols(); ++f) out << ',' << fmt_double(factors(t, f));
        out << '\n';
    }
}

void write_tv_loadings_csv(std::ostream& out, const TvFit& fit) {
    out << "year,age,factor,loading\n";
    for (Eigen::Index t = 0; t < fit.num_years(); ++t)
        for (Eigen::Index i = 0; i < fit.num_ages(); ++i)
            for (int f = 0; f < fit.R; ++f)
                out << fit.years[t] << ',' << fit.ages[i] << ',' << f + 1 << ','
                    << fmt_double(fit.loadings[t](i, f)) << '\n';
}

void write_forecast_csv(std::ostream& out, const MortalityForecast& fc) {
    const Matrix lo = fc.lower(), hi = fc.upper();
    out << "year,age,predicted_log_mx,lower,upper\n";
    for (int h = 0; h < fc.horizon; ++h)
        for (Eigen::Index i = 0; i < fc.predicted.rows(); ++i)
            out << fc.years[h] << ',' << fc.ages[i] << ',' << fmt_double(fc.predicted(i, h)) << ','
                << fmt_double(lo(i, h)) << ',' << fmt_double(hi(i, h)) << '\n';
}

void write_loadings_used_csv(std::ostream& out, const MortalityForecast& fc) {
    out << "year,age,factor,loading\n";
    for (int h = 0; h < fc.horizon; ++h)
        for (Eigen::Index i = 0; i < fc.predicted.rows(); ++i)
            for (std::size_t f = 0; f < fc.loadings_used.size(); ++f)
                out << fc.years[h] << ',' << fc.ages[i] << ',' << f + 1 << ','
                    << fmt_double(fc.loading(int(f), h)(i)) << '\n';
}

void write_factor_forecast_csv(std::ostream& out, const FactorForecast& fc) {
    out << "h,point,lower,upper\n";
    for (int h = 0; h < fc.horizon; ++h)
        out << h + 1 << ',' << fmt_double(fc.point(h)) << ',' << fmt_double(fc.lower(h)) << ','
            << fmt_double(fc.upper(h)) << '\n';
}

void write_boundary_csv(std::ostream& out, const BoundaryEstimate& est) {
    out << "k,ssr\n";
    for (std::size_t k = 0; k < est.ssr_curve.size(); ++k)
        out << k << ',' << fmt_double(est.ssr_curve[k]) << '\n';
}

void write_rolling_csv(std::ostream& out, const RollingLoadings& rolling, int window_length) {
    out << "window_start,window_end,age,factor,loading\n";
    for (std::size_t w = 0; w < rolling.loadings.size(); ++w) {
        const Matrix& B = rolling.loadings[w];
        for (Eigen::Index i = 0; i < B.rows(); ++i)
            for (Eigen::Index f = 0; f < B.cols(); ++f)
                out << rolling.start_years[w] << ',' << rolling.start_years[w] + window_length - 1
                    << ',' << rolling.ages[i] << ',' << f + 1 << ',' << fmt_double(B(i, f))
                    << '\n';
    }
}

std::string metrics_json(const Mspe& m, const std::vector<int>& years, const std::vector<int>& ages) {
    nlohmann::ordered_json j;
    j["overall"] = m.overall;
    j["by_year"] = to_std(m.by_year);
    j["by_age"] = to_std(m.by_age);
    j["years"] = years;
    j["ages"] = ages;
    return j.dump(2);
}

std::string arima_json(const ArimaModel& model) {
    nlohmann::ordered_json j;
    j["order"] = {model.order.p, model.order.d, model.order.q};
    j["drift"] = model.order.drift;
    j["ar"] = to_std(model.ar);
    j["ma"] = to_std(model.ma);
    j["drift_value"] = model.drift_value;
    j["stderr"] = to_std(model.stderrs);
    j["sigma2"] = model.sigma2;
    j["loglik"] = model.loglik;
    j["aic"] = model.aic;
    j["nobs"] = model.nobs;
    j["degenerate"] = model.degenerate;
    return j.dump(2);
}

}  // namespace tvmort
