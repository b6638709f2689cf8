// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and
// exits nonzero when any criterion fails.
//
//   acceptance            all criteria
//   acceptance 2 3 5      a subset

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tvmort/arima.hpp"
#include "tvmort/dataio.hpp"
#include "tvmort/error.hpp"
#include "tvmort/factor_classic.hpp"
#include "tvmort/factor_tv.hpp"
#include "tvmort/forecast.hpp"
#include "tvmort/local_linear.hpp"
#include "tvmort/philox.hpp"
#include "tvmort/sim.hpp"

using namespace tvmort;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << id << ": " << detail << std::endl;
    if (!pass) ++failures;
}

void skip(const std::string& id, const std::string& why) {
    std::cout << "SKIP " << id << ": " << why << std::endl;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream ss;
    ss << std::setprecision(prec) << v;
    return ss.str();
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::vector<int> seq(int first, int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = first + i;
    return v;
}

MortalityPanel panel_of(const Matrix& x, int first_year = 1) {
    return MortalityPanel::from_log_rates(seq(0, int(x.rows())), seq(first_year, int(x.cols())), x);
}

// ---------------------------------------------------------------------------
// 1. Monte Carlo reproduction

struct ReferenceCell {
    sim::Dgp dgp;
    ForecastMethod method;
    double v[6];
};

// Published mean MSPE, train lengths 70..95.
const ReferenceCell kTable[] = {
    {sim::Dgp::dgp1, ForecastMethod::tv_local, {.2300, .1873, .1249, .0852, .0590, .0344}},
    {sim::Dgp::dgp1, ForecastMethod::tv_naive, {.2239, .1849, .1228, .0837, .0582, .0342}},
    {sim::Dgp::dgp1, ForecastMethod::classic, {.2209, .1839, .1222, .0829, .0575, .0336}},
    {sim::Dgp::dgp2, ForecastMethod::tv_local, {.2597, .2046, .1230, .0818, .0528, .0265}},
    {sim::Dgp::dgp2, ForecastMethod::tv_naive, {.2291, .1874, .1227, .0817, .0527, .0265}},
    {sim::Dgp::dgp2, ForecastMethod::classic, {.2542, .2121, .1482, .0946, .0643, .0372}},
    {sim::Dgp::dgp3, ForecastMethod::tv_local, {.1757, .1384, .0987, .0737, .0506, .0365}},
    {sim::Dgp::dgp3, ForecastMethod::tv_naive, {.1704, .1319, .0940, .0724, .0499, .0362}},
    {sim::Dgp::dgp3, ForecastMethod::classic, {.2078, .1759, .1456, .1162, .0917, .0748}},
};

void criterion1() {
    sim::McConfig cfg;  // N = T = 100, 100 replications, train lengths 70..95
    cfg.threads = 0;
    const auto t0 = std::chrono::steady_clock::now();
    const sim::McReport rep = sim::run_mc(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sim::write_table_csv(std::cout, rep);
    std::cout << "# " << cfg.reps << " replications in " << fmt(secs, 4) << " s, "
              << rep.failed_replications << " dropped, factor scale " << rep.factor_scale << "\n";
    const auto& L = cfg.train_lengths;
    auto mean = [&](sim::Dgp d, ForecastMethod m, int k) { return rep.cell(d, m, k).mean_mspe; };
    // Standard error of the replication mean of a - b (b may be null).
    auto std_err = [&](const std::vector<double>& a, const std::vector<double>* b) {
        double s = 0.0, ss = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double v = a[i] - (b ? (*b)[i] : 0.0);
            if (std::isnan(v)) continue;
            s += v;
            ss += v * v;
            ++n;
        }
        const double m = s / n;
        return std::sqrt((ss / n - m * m) / (n - 1));
    };

    bool a = true;
    std::string a_detail;
    for (int k : L) {
        const double c = mean(sim::Dgp::dgp1, ForecastMethod::classic, k);
        const double n = mean(sim::Dgp::dgp1, ForecastMethod::tv_naive, k);
        const double l = mean(sim::Dgp::dgp1, ForecastMethod::tv_local, k);
        if (!(c < n && c < l)) {
            a = false;
            a_detail += " k=" + std::to_string(k) + " (classic " + fmt(c) + ", naive " + fmt(n) +
                        ", local " + fmt(l) + ")";
            const auto& rc = rep.cell(sim::Dgp::dgp1, ForecastMethod::classic, k).raw;
            std::cout << "INFO 1a k=" << k << ": classic - naive " << fmt(c - n) << " (se "
                      << fmt(std_err(rc, &rep.cell(sim::Dgp::dgp1, ForecastMethod::tv_naive, k).raw))
                      << "), classic - local " << fmt(c - l) << " (se "
                      << fmt(std_err(rc, &rep.cell(sim::Dgp::dgp1, ForecastMethod::tv_local, k).raw))
                      << ")\n";
        }
    }
    report("1a", a, "DGP 1 classic smallest at every train length" + (a ? "" : ";" + a_detail));

    bool b = true;
    std::string b_detail;
    for (sim::Dgp d : {sim::Dgp::dgp2, sim::Dgp::dgp3}) {
        for (int k : L) {
            const double c = mean(d, ForecastMethod::classic, k);
            const double n = mean(d, ForecastMethod::tv_naive, k);
            if (!(n < c)) {
                b = false;
                b_detail += " " + sim::dgp_name(d) + " k=" + std::to_string(k);
            }
        }
    }
    const double c70 = mean(sim::Dgp::dgp3, ForecastMethod::classic, 70);
    const double n70 = mean(sim::Dgp::dgp3, ForecastMethod::tv_naive, 70);
    const double gain = (c70 - n70) / c70;
    b = b && gain >= 0.10;
    report("1b", b,
           "DGP 2/3 naive beats classic everywhere" + (b_detail.empty() ? "" : " (fails at" + b_detail + ")") +
               "; DGP 3 k=70 relative gain " + fmt(100 * gain, 3) + "% (need >= 10%)");

    int inside = 0, total = 0;
    double worst = 0.0;
    std::string worst_cell;
    for (const auto& pc : kTable) {
        for (std::size_t j = 0; j < L.size(); ++j) {
            const double ours = mean(pc.dgp, pc.method, L[j]);
            const double rel = ours / pc.v[j] - 1.0;
            ++total;
            if (std::abs(rel) <= 0.30) {
                ++inside;
            } else {
                const auto& cell = rep.cell(pc.dgp, pc.method, L[j]);
                std::cout << "INFO 1c " << sim::dgp_name(pc.dgp) << "/" << method_name(pc.method) << "/"
                          << L[j] << ": " << fmt(ours) << " vs " << pc.v[j] << " (" << fmt(100 * rel, 3)
                          << "%), replication se " << fmt(100 * std_err(cell.raw, nullptr) / ours, 3)
                          << "% of the mean\n";
            }
            if (std::abs(rel) > std::abs(worst)) {
                worst = rel;
                worst_cell = sim::dgp_name(pc.dgp) + "/" + method_name(pc.method) + "/" + std::to_string(L[j]);
            }
        }
    }
    report("1c", inside == total,
           std::to_string(inside) + "/" + std::to_string(total) +
               " cells within +-30% of the published table; worst " + worst_cell + " " +
               fmt(100 * worst, 3) + "%");
}

// ---------------------------------------------------------------------------
// 2. Exact recovery

void criterion2() {
    double worst_c = 0.0, worst_tv = 0.0, worst_eq = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Philox4x64 rng(seed);
        const Eigen::Index N = 10 + 5 * Eigen::Index(seed % 4), T = 30 + 7 * Eigen::Index(seed % 5);
        Vector b(N), k(T);
        for (Eigen::Index i = 0; i < N; ++i) b(i) = 0.1 + rng.uniform();
        b /= b.sum();
        double level = 0.0;
        for (Eigen::Index t = 0; t < T; ++t) k(t) = (level += -1.0 + rng.normal());
        k.array() -= k.mean();
        Vector a(N);
        for (Eigen::Index i = 0; i < N; ++i) a(i) = -9.0 + 8.0 * rng.uniform();
        const Matrix x = (b * k.transpose()).colwise() + a;
        const MortalityPanel p = panel_of(x);

        const ClassicFit c = fit_classic(p, FactorCount{1, 0.9});
        worst_c = std::max({worst_c, max_abs(c.loadings.col(0) - b), max_abs(c.factors.col(0) - k)});

        TvOptions o;
        o.count = FactorCount{1, 0.9};
        const TvFit tv = fit_tv(p, o);
        for (Eigen::Index t = 0; t < T; ++t)
            worst_tv = std::max(worst_tv, max_abs(tv.loadings[t].col(0) - b));
        worst_tv = std::max(worst_tv, max_abs(tv.factors.col(0) - k));

        // Uniform kernel covering the whole sample, no edge correction, on a
        // noisy panel: must equal the classic fit.
        Matrix noisy = x;
        for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += 0.05 * rng.normal();
        const MortalityPanel q = panel_of(noisy);
        TvOptions u;
        u.kernel = KernelSpec{KernelFamily::uniform, 1.0, false};
        u.count = FactorCount{1, 0.9};
        const TvFit tu = fit_tv(q, u);
        const ClassicFit cq = fit_classic(q, FactorCount{1, 0.9});
        for (Eigen::Index t = 0; t < T; ++t)
            worst_eq = std::max(worst_eq, max_abs(tu.loadings[t] - cq.loadings));
        worst_eq = std::max(worst_eq, max_abs(tu.factors - cq.factors));
    }
    report("2a", worst_c <= 1e-8, "classic recovers (b, k) on noiseless rank-1 panels, max error " + fmt(worst_c, 3) + " (<= 1e-8)");
    report("2b", worst_tv <= 1e-8, "tv recovers (b, k) on noiseless rank-1 panels, max error " + fmt(worst_tv, 3) + " (<= 1e-8)");
    report("2c", worst_eq <= 1e-10, "uniform full-width kernel tv equals classic, max difference " + fmt(worst_eq, 3) + " (<= 1e-10)");
}

// ---------------------------------------------------------------------------
// 3. Local-linear exactness

void criterion3() {
    double worst = 0.0;
    Philox4x64 rng(33);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 20 + int(rng.uniform() * 80);
        const double a = rng.normal(), s = 0.1 * rng.normal();
        std::vector<double> path(static_cast<std::size_t>(n));
        for (int t = 1; t <= n; ++t) path[t - 1] = a + s * t;
        for (double frac : {0.05, 0.2, 0.5}) {
            const double lambda = std::max(2.5, frac * n);
            const Vector e = extrapolate_path(path, 25, LocalLinearSpec{lambda});
            for (int h = 1; h <= 25; ++h) worst = std::max(worst, std::abs(e(h - 1) - (a + s * (n + h))));
        }
    }
    report("3", worst < 1e-10, "affine paths extrapolated exactly at h = 1..25, max error " + fmt(worst, 3) + " (< 1e-10)");
}

// ---------------------------------------------------------------------------
// 4. Hybrid degeneracies

void criterion4() {
    bool ok = true;
    int runs = 0;
    for (sim::Dgp d : {sim::Dgp::dgp1, sim::Dgp::dgp2, sim::Dgp::dgp3}) {
        sim::DgpSpec s;
        s.kind = d;
        s.N = 40;
        s.T = 60;
        s.seed = 4000 + std::uint64_t(d);
        const MortalityPanel p = sim::generate(s).panel;
        TvOptions o;
        o.count = FactorCount{1, 0.9};
        const TvFit fit = fit_tv(p, o);
        for (int H : {1, 10, 25}) {
            ForecastOptions fo;
            fo.horizon = H;
            const FactorForecastSet fs = forecast_factors(fit.factors, H, fo.level, fo.arima);
            const auto naive = forecast_tv_naive(fit, fs);
            const auto local = forecast_tv_local(fit, fs, fo);
            const auto h0 = forecast_tv_hybrid(fit, 0, fs, fo);
            const auto hH = forecast_tv_hybrid(fit, H, fs, fo);
            ok = ok && h0.predicted == naive.predicted && h0.loadings_used == naive.loadings_used &&
                 h0.lower() == naive.lower() && h0.upper() == naive.upper();
            ok = ok && hH.predicted == local.predicted && hH.loadings_used == local.loadings_used &&
                 hH.lower() == local.lower() && hH.upper() == local.upper();
            ++runs;
        }
    }
    report("4", ok, "hybrid(0) == naive and hybrid(H) == local bit for bit in " + std::to_string(runs) + " runs");
}

// ---------------------------------------------------------------------------
// 5. Boundary estimator oracle

struct BoundaryRun {
    int k_hat;
    bool argmin_ok;
};

enum class LoadingSource { estimated, narrow_kernel, truth };

// Loadings move linearly through training and the first k* validation
// years, then stay frozen. Data are centred (a_x = 0) with small noise and
// the true validation factors are supplied.
BoundaryRun boundary_run(int k_star, std::uint64_t seed, LoadingSource source) {
    const Eigen::Index N = 40, T0 = 60, V = 20, T = T0 + V;
    Philox4x64 rng(seed);
    Vector base(N), slope(N);
    for (Eigen::Index i = 0; i < N; ++i) base(i) = 0.5 + rng.uniform();
    base /= base.sum();
    for (Eigen::Index i = 0; i < N; ++i) slope(i) = rng.normal();
    slope.array() -= slope.mean();
    // Each loading moves by at most half its base value over the sample.
    slope *= 0.5 * base.minCoeff() / (double(T) * slope.cwiseAbs().maxCoeff());
    Vector k(T);
    double level = -20.0;
    for (Eigen::Index t = 0; t < T; ++t) k(t) = (level += -1.0 + 0.8 * rng.normal());
    Matrix x(N, T), B(N, T);
    for (Eigen::Index t = 0; t < T; ++t) {
        B.col(t) = base + slope * double(std::min<Eigen::Index>(t, T0 - 1 + k_star));
        for (Eigen::Index i = 0; i < N; ++i) x(i, t) = B(i, t) * k(t) + 0.002 * rng.normal();
    }
    const MortalityPanel full = panel_of(x);
    const MortalityPanel train = full.slice_years(0, T0).with_age_means(Vector::Zero(N));
    const MortalityPanel val = full.slice_years(T0, V).with_age_means(Vector::Zero(N));
    TvOptions o;
    o.count = FactorCount{1, 0.9};
    if (source == LoadingSource::narrow_kernel) o.kernel = KernelSpec{KernelFamily::epanechnikov, 0.05, true};
    TvFit fit = fit_tv(train, o);
    if (source == LoadingSource::truth)
        for (Eigen::Index t = 0; t < T0; ++t) fit.loadings[t] = B.col(t);
    BoundaryOptions bo;
    bo.validation_factors = Matrix(k.tail(V));
    const BoundaryEstimate est = estimate_boundary(fit, val, bo);
    bool argmin_ok = true;
    for (double v : est.ssr_curve) argmin_ok = argmin_ok && est.ssr_curve[est.k_hat] <= v;
    return {est.k_hat, argmin_ok};
}

struct BoundaryTally {
    int hits = 0;
    bool argmin_ok = true;
    std::string hist;
};

BoundaryTally boundary_tally(int k_star, LoadingSource source) {
    BoundaryTally out;
    std::map<int, int> hist;
    for (int rep = 0; rep < 100; ++rep) {
        const BoundaryRun r =
            boundary_run(k_star, mix_seed(5005, std::uint64_t(k_star), std::uint64_t(rep)), source);
        out.hits += std::abs(r.k_hat - k_star) <= 1;
        out.argmin_ok = out.argmin_ok && r.argmin_ok;
        ++hist[r.k_hat];
    }
    for (auto [kh, n] : hist) out.hist += " " + std::to_string(kh) + ":" + std::to_string(n);
    return out;
}

void criterion5() {
    for (int k_star : {3, 7, 12}) {
        const BoundaryTally t = boundary_tally(k_star, LoadingSource::estimated);
        report("5 k*=" + std::to_string(k_star), t.hits >= 80 && t.argmin_ok,
               "k_hat within +-1 in " + std::to_string(t.hits) + "/100 (need >= 80); SSR(k_hat) minimal on every run: " +
                   (t.argmin_ok ? "yes" : "no") + "; k_hat counts" + t.hist);
    }
    // Diagnostics, not criteria: the same panels with the true training
    // loadings, and with a much narrower kernel than the default.
    for (auto [source, label] : {std::pair{LoadingSource::truth, "true loadings"},
                                 std::pair{LoadingSource::narrow_kernel, "bandwidth 0.05"}}) {
        std::cout << "INFO 5 " << label << ":";
        for (int k_star : {3, 7, 12}) {
            const BoundaryTally t = boundary_tally(k_star, source);
            std::cout << " k*=" << k_star << " " << t.hits << "/100";
        }
        std::cout << std::endl;
    }
}

// ---------------------------------------------------------------------------
// 6. ARIMA suite

std::vector<double> ar1_drift_path(int n, double phi, double mu, Philox4x64& rng) {
    std::vector<double> x(static_cast<std::size_t>(n));
    double dev = rng.normal() / std::sqrt(1 - phi * phi), level = 0.0;
    for (int t = 0; t < n; ++t) {
        if (t > 0) dev = phi * dev + rng.normal();
        x[t] = (level += mu + dev);
    }
    return x;
}

void criterion6() {
    const double phi = 0.33, mu = -1.41;
    int inside = 0;
    for (int rep = 0; rep < 100; ++rep) {
        Philox4x64 rng(mix_seed(6006, 1, std::uint64_t(rep)));
        const auto x = ar1_drift_path(500, phi, mu, rng);
        const ArimaModel m = fit_arima(x, ArimaOrder{1, 1, 0, true});
        inside += std::abs(m.ar(0) - phi) <= 3 * m.stderrs(0) && std::abs(m.drift_value - mu) <= 3 * m.stderrs(1);
    }
    report("6a", inside >= 95, "(phi, drift) within 3 standard errors in " + std::to_string(inside) + "/100 (need >= 95)");

    const int reps = 2000;
    const int hs[] = {1, 5, 10};
    int cover[3] = {0, 0, 0};
    for (int rep = 0; rep < reps; ++rep) {
        Philox4x64 rng(mix_seed(6006, 2, std::uint64_t(rep)));
        const auto x = ar1_drift_path(510, phi, mu, rng);
        const std::span<const double> hist(x.data(), 500);
        const ArimaModel m = fit_arima(hist, ArimaOrder{1, 1, 0, true});
        const FactorForecast f = forecast_arima(m, hist, 10, 0.8);
        for (int j = 0; j < 3; ++j) {
            const int h = hs[j];
            const double y = x[499 + h];
            cover[j] += y >= f.lower(h - 1) && y <= f.upper(h - 1);
        }
    }
    bool ok = true;
    std::string detail;
    for (int j = 0; j < 3; ++j) {
        const double c = cover[j] / double(reps);
        ok = ok && std::abs(c - 0.8) <= 0.03;
        detail += " h=" + std::to_string(hs[j]) + ": " + fmt(100 * c, 3) + "%";
    }
    report("6b", ok, "80% interval coverage over 2000 replications (need 77-83%):" + detail);
}

// ---------------------------------------------------------------------------
// 7. Invariants on every dataset used here

std::vector<std::pair<std::string, MortalityPanel>> invariant_datasets() {
    std::vector<std::pair<std::string, MortalityPanel>> out;
    for (sim::Dgp d : {sim::Dgp::dgp1, sim::Dgp::dgp2, sim::Dgp::dgp3}) {
        sim::DgpSpec s;
        s.kind = d;
        s.seed = 7007;
        out.emplace_back(sim::dgp_name(d), sim::generate(s).panel);
    }
    std::ifstream in(std::string(TVMORT_DATA_DIR) + "/dgp3_n40_t85.csv");
    if (in) out.emplace_back("fixture", build_panel(parse_csv_long(in)));
    Philox4x64 rng(77);
    Matrix x(25, 45);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = -4.0 + rng.normal();
    out.emplace_back("gaussian", panel_of(x));
    if (const char* hmd = std::getenv("TVMORT_HMD_US")) {
        std::ifstream f(hmd);
        if (f) out.emplace_back("hmd-us", build_panel(parse_hmd_table(f)));
    }
    return out;
}

void criterion7() {
    double sum_err = 0, orth_err = 0, ey_err = 0, rec_err = 0;
    bool argmin_ok = true;
    int sets = 0;
    for (const auto& [name, p] : invariant_datasets()) {
        ++sets;
        const Eigen::Index T = p.num_years();
        const int R = 2;
        const ClassicFit c = fit_classic(p, FactorCount{R, 0.9});
        for (int j = 0; j < R; ++j) sum_err = std::max(sum_err, std::abs(c.loadings.col(j).sum() - 1.0));
        const Matrix& K = c.orthonormal_factors;
        orth_err = std::max(orth_err, max_abs(K.transpose() * K / double(T) - Matrix::Identity(R, R)));
        Eigen::JacobiSVD<Matrix> svd(p.centered());
        const Vector sv = svd.singularValues();
        const double resid = (c.fitted() - p.log_rates()).squaredNorm();
        const double oracle = sv.tail(sv.size() - R).squaredNorm();
        ey_err = std::max(ey_err, std::abs(resid - oracle) / std::max(1.0, oracle));

        TvOptions o;
        o.count = FactorCount{R, 0.9};
        const TvFit tv = fit_tv(p, o);
        for (const auto& B : tv.loadings)
            for (int j = 0; j < R; ++j) sum_err = std::max(sum_err, std::abs(B.col(j).sum() - 1.0));
        const LocalPcaSolver solver(p);
        for (Eigen::Index r : {Eigen::Index(1), T / 2, T}) {
            const Matrix& W = solver.at(r, tv.kernel, R).weighted_factors;
            orth_err = std::max(orth_err, max_abs(W.transpose() * W / double(T) - Matrix::Identity(R, R)));
        }

        // Forecast reconstruction on a 10-year holdout, and boundary argmin.
        const auto sp = split_panel(p, p.years()[T - 11]);
        const ClassicFit ct = fit_classic(sp.train, FactorCount{1, 0.9});
        TvOptions o1;
        o1.count = FactorCount{1, 0.9};
        const TvFit tt = fit_tv(sp.train, o1);
        ForecastOptions fo;
        fo.horizon = 10;
        const FactorForecastSet fs = forecast_factors(tt.factors, 10, fo.level, fo.arima);
        std::vector<MortalityForecast> fcs{forecast_classic(ct, fo), forecast_tv_naive(tt, fs),
                                           forecast_tv_local(tt, fs, fo), forecast_tv_hybrid(tt, 4, fs, fo)};
        for (const auto& f : fcs) rec_err = std::max(rec_err, max_abs(f.predicted - f.reconstruct()));
        const BoundaryEstimate est = estimate_boundary(tt, sp.holdout);
        for (double v : est.ssr_curve) argmin_ok = argmin_ok && est.ssr_curve[est.k_hat] <= v;
    }
    const std::string n = " on " + std::to_string(sets) + " datasets";
    report("7a", sum_err <= 1e-10, "loading columns sum to one (classic and every tv year), max error " + fmt(sum_err, 3) + n);
    report("7b", orth_err <= 1e-10, "K'K/T = I before normalisation (classic and local PCA), max error " + fmt(orth_err, 3) + n);
    report("7c", ey_err <= 1e-9, "classic residual equals the SVD tail energy, max relative error " + fmt(ey_err, 3) + n);
    report("7d", rec_err <= 1e-12, "forecast reconstruction identity for all methods, max error " + fmt(rec_err, 3) + n);
    report("7e", argmin_ok, "SSR(k_hat) is the minimum of the boundary curve" + n);
}

// ---------------------------------------------------------------------------
// 8. US data (optional)

void criterion8() {
    const char* path = std::getenv("TVMORT_HMD_US");
    if (!path) {
        skip("8", "set TVMORT_HMD_US to an HMD Mx_1x1 file for the United States");
        return;
    }
    std::ifstream in(path);
    if (!in) {
        report("8", false, std::string("cannot open ") + path);
        return;
    }
    const MortalityPanel all = build_panel(parse_hmd_table(in));
    std::vector<int> ys;
    for (int y : all.years())
        if (y >= 1933 && y <= 2017) ys.push_back(y);
    if (ys.size() != 85) {
        report("8", false, "file does not cover 1933-2017");
        return;
    }
    const MortalityPanel p = all.slice_years(ys.front() - all.years().front(), 85);
    const ClassicFit c = fit_classic(p, FactorCount{1, 0.9});
    const TvFit tv = fit_tv(p, TvOptions{std::nullopt, FactorCount{1, 0.9}, 0});
    const double ratio = mse_in_sample(tv, p) / mse_in_sample(c, p);
    report("8a", ratio < 0.5 && std::abs(ratio / (0.001990 / 0.006690) - 1) <= 0.15,
           "in-sample MSE ratio tv/classic " + fmt(ratio) + " (need < 0.5 and within 15% of 0.2975)");

    const auto sp = split_panel(p, 1992);
    ForecastOptions fo;
    fo.horizon = 25;
    fo.threads = 0;
    const ClassicFit ct = fit_classic(sp.train, FactorCount{1, 0.9});
    const TvFit tt = fit_tv(sp.train, TvOptions{std::nullopt, FactorCount{1, 0.9}, 0});
    const FactorForecastSet fs = forecast_factors(tt.factors, 25, fo.level, fo.arima);
    const double mc = mspe(forecast_classic(ct, fo), sp.holdout).overall;
    const double mn = mspe(forecast_tv_naive(tt, fs), sp.holdout).overall;
    const double ml = mspe(forecast_tv_local(tt, fs, fo), sp.holdout).overall;
    const bool within = std::abs(mc / 0.03085 - 1) <= 0.15 && std::abs(mn / 0.01804 - 1) <= 0.15 &&
                        std::abs(ml / 0.04768 - 1) <= 0.15;
    report("8b", mn < mc && mc < ml && within,
           "holdout MSPE naive " + fmt(mn) + " < classic " + fmt(mc) + " < local " + fmt(ml) +
               " (each within 15% of 0.01804 / 0.03085 / 0.04768)");
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<int, std::function<void()>>> all{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8}};
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    for (const auto& [id, fn] : all) {
        if (!wanted.empty() && !wanted.count(id)) continue;
        try {
            fn();
        } catch (const std::exception& e) {
            report(std::to_string(id), false, std::string("threw: ") + e.what());
        }
    }
    std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criteria failed" : "acceptance: all criteria passed")
              << std::endl;
    return failures ? 1 : 0;
}
