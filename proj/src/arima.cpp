#include "tvmort/arima.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "tvmort/error.hpp"
#include "tvmort/normal.hpp"
#include "tvmort/parallel.hpp"

namespace tvmort {
namespace {

constexpr int kMaxState = 8;
using StateMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxState, kMaxState>;
using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxState, 1>;
constexpr double kBadObjective = 1e10;
// Fits with a root of modulus below 1 + kRootMargin are rejected; near-unit
// MA roots are how over-differenced candidates show up.
constexpr double kRootMargin = 0.01;

std::vector<double> difference(std::span<const double> x, int d) {
    std::vector<double> w(x.begin(), x.end());
    for (int k = 0; k < d; ++k) {
        for (std::size_t i = w.size() - 1; i > 0; --i) w[i] -= w[i - 1];
        w.erase(w.begin());
    }
    return w;
}

// Maps unconstrained values onto the coefficients of a stationary AR
// polynomial through partial autocorrelations in (-1, 1).
Vector pacf_to_coeffs(const double* raw, int p) {
    Vector out(p), work(p);
    for (int j = 0; j < p; ++j) work(j) = out(j) = std::tanh(raw[j]);
    for (int j = 1; j < p; ++j) {
        const double a = out(j);
        for (int k = 0; k < j; ++k) work(k) -= a * out(j - k - 1);
        for (int k = 0; k < j; ++k) out(k) = work(k);
    }
    return out;
}

std::optional<Vector> coeffs_to_pacf(const Vector& coeffs) {
    const auto p = static_cast<int>(coeffs.size());
    Vector out = coeffs, work = coeffs;
    for (int j = p - 1; j > 0; --j) {
        const double a = out(j);
        if (std::abs(a) >= 1.0) return std::nullopt;
        for (int k = 0; k < j; ++k) work(k) = (out(k) + a * out(j - k - 1)) / (1.0 - a * a);
        for (int k = 0; k < j; ++k) out(k) = work(k);
    }
    for (int j = 0; j < p; ++j) {
        if (std::abs(out(j)) >= 1.0) return std::nullopt;
        out(j) = std::atanh(out(j));
    }
    return out;
}

struct StateSpace {
    int r = 1;
    Vector phi;    // length r
    StateVec rvec;  // (1, theta_1, ..., theta_{r-1})
    StateMat P0;
};

// Harvey's state-space form of a zero-mean ARMA, with the stationary
// initial covariance from the discrete Lyapunov equation P = T P T' + R R'.
// T has phi in its first column and ones on the superdiagonal, so each
// entry of T P T' involves at most four entries of P; the system is solved
// over the upper triangle only.
bool build_state_space(const Vector& ar, const Vector& ma, StateSpace& ss) {
    const int p = static_cast<int>(ar.size()), q = static_cast<int>(ma.size());
    ss.r = std::max(p, q + 1);
    const int r = ss.r;
    if (r > kMaxState) throw ArgumentError("ARMA order too large");
    ss.phi = Vector::Zero(r);
    ss.phi.head(p) = ar;
    ss.rvec = StateVec::Zero(r);
    ss.rvec(0) = 1.0;
    for (int j = 0; j < q; ++j) ss.rvec(j + 1) = ma(j);

    constexpr int kMaxTri = kMaxState * (kMaxState + 1) / 2;
    using TriMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxTri, kMaxTri>;
    using TriVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxTri, 1>;
    const int m = r * (r + 1) / 2;
    auto idx = [r](int i, int k) {
        if (i > k) std::swap(i, k);
        return i * r - i * (i - 1) / 2 + (k - i);
    };
    TriMat A = TriMat::Identity(m, m);
    TriVec rhs(m);
    for (int i = 0; i < r; ++i) {
        for (int k = i; k < r; ++k) {
            const int row = idx(i, k);
            rhs(row) = ss.rvec(i) * ss.rvec(k);
            const double pi = ss.phi(i), pk = ss.phi(k);
            A(row, idx(0, 0)) -= pi * pk;
            if (k + 1 < r) A(row, idx(0, k + 1)) -= pi;
            if (i + 1 < r) A(row, idx(i + 1, 0)) -= pk;
            if (i + 1 < r && k + 1 < r) A(row, idx(i + 1, k + 1)) -= 1.0;
        }
    }
    Eigen::PartialPivLU<TriMat> lu(A);
    const double cond = std::abs(lu.determinant());
    if (!(cond > 1e-300)) return false;
    const TriVec v = lu.solve(rhs);
    if (!v.allFinite()) return false;
    ss.P0.resize(r, r);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < r; ++k) ss.P0(i, k) = v(idx(i, k));
    return ss.P0(0, 0) > 0.0;
}

struct FilterResult {
    bool ok = false;
    double ssq = 0.0;     // sum v_t^2 / F_t
    double sumlog = 0.0;  // sum log F_t
    StateVec last_state;  // filtered state at the final observation
};

// z_t = w_t - mean. Covariance recursions use the sparsity of T and stop
// once the predicted covariance reaches its steady state.
FilterResult kalman(std::span<const double> w, double mean, const StateSpace& ss) {
    const int r = ss.r;
    FilterResult out;
    double a[kMaxState] = {}, phi[kMaxState], R[kMaxState];
    double P[kMaxState][kMaxState], U[kMaxState][kMaxState], g[kMaxState];
    for (int i = 0; i < r; ++i) {
        phi[i] = ss.phi(i);
        R[i] = ss.rvec(i);
        for (int j = 0; j < r; ++j) P[i][j] = ss.P0(i, j);
    }
    double F = 0.0, logF = 0.0;
    bool steady = false;
    for (std::size_t t = 0; t < w.size(); ++t) {
        if (!steady) {
            F = P[0][0];
            if (!(F > 1e-300) || !std::isfinite(F)) return out;
            logF = std::log(F);
            for (int i = 0; i < r; ++i) g[i] = P[i][0] / F;
        }
        const double v = (w[t] - mean) - a[0];
        out.sumlog += logF;
        out.ssq += v * v / F;
        for (int i = 0; i < r; ++i) a[i] += g[i] * v;
        if (t + 1 == w.size()) break;
        // a <- T a; P <- T (P - P e1 e1' P / F) T' + R R'.
        const double a0 = a[0];
        for (int i = 0; i + 1 < r; ++i) a[i] = phi[i] * a0 + a[i + 1];
        a[r - 1] = phi[r - 1] * a0;
        if (!steady) {
            for (int i = 0; i < r; ++i)
                for (int j = i; j < r; ++j) U[i][j] = U[j][i] = P[i][j] - P[i][0] * g[j];
            double diff = 0.0, scale = 0.0;
            for (int i = 0; i < r; ++i) {
                for (int j = i; j < r; ++j) {
                    double v2 = phi[i] * phi[j] * U[0][0] + R[i] * R[j];
                    if (j + 1 < r) v2 += phi[i] * U[0][j + 1];
                    if (i + 1 < r) v2 += phi[j] * U[i + 1][0];
                    if (i + 1 < r && j + 1 < r) v2 += U[i + 1][j + 1];
                    diff = std::max(diff, std::abs(v2 - P[i][j]));
                    scale = std::max(scale, std::abs(v2));
                    P[i][j] = P[j][i] = v2;
                }
            }
            steady = diff < 1e-13 * (1.0 + scale);
        }
    }
    out.last_state = StateVec(r);
    for (int i = 0; i < r; ++i) out.last_state(i) = a[i];
    out.ok = std::isfinite(out.ssq) && std::isfinite(out.sumlog);
    return out;
}

// Profiled objective 0.5 log(sigma2) + 0.5 mean log F, as minimised by the
// optimiser; NaN-free by construction.
double ml_objective(std::span<const double> w, const Vector& ar, const Vector& ma, double mean) {
    StateSpace ss;
    if (!build_state_space(ar, ma, ss)) return kBadObjective;
    const FilterResult f = kalman(w, mean, ss);
    if (!f.ok) return kBadObjective;
    const double n = double(w.size());
    const double s2 = f.ssq / n;
    if (!(s2 > 0.0)) return -kBadObjective;
    return 0.5 * std::log(s2) + 0.5 * f.sumlog / n;
}

double css_objective(std::span<const double> w, const Vector& ar, const Vector& ma, double mean) {
    const int p = static_cast<int>(ar.size()), q = static_cast<int>(ma.size());
    const std::size_t n = w.size();
    std::vector<double> e(n, 0.0);
    double ssq = 0.0;
    for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
        double v = w[t] - mean;
        for (int i = 0; i < p; ++i) v -= ar(i) * (w[t - i - 1] - mean);
        for (int j = 0; j < q && j < static_cast<int>(t); ++j) v -= ma(j) * e[t - j - 1];
        e[t] = v;
        ssq += v * v;
    }
    const double s2 = ssq / double(n - static_cast<std::size_t>(p));
    if (!(s2 > 0.0) || !std::isfinite(s2)) return kBadObjective;
    return 0.5 * std::log(s2);
}

using Objective = std::function<double(const Vector&)>;

struct GslContext {
    const Objective* f;
};


// Forward differences; the ridge-stall test below does not need more.
void numeric_gradient(const GslContext& ctx, Vector& v, double f0, gsl_vector* g) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double orig = v(i);
        const double h = 1e-7 * std::max(1.0, std::abs(orig));
        v(i) = orig + h;
        const double d = ((*ctx.f)(v) - f0) / h;
        v(i) = orig;
        gsl_vector_set(g, static_cast<std::size_t>(i), std::isfinite(d) ? d : 0.0);
    }
}

Vector to_vector(const gsl_vector* x) {
    Vector v(x->size);
    for (std::size_t i = 0; i < x->size; ++i) v(i) = gsl_vector_get(x, i);
    return v;
}

double gsl_f(const gsl_vector* x, void* params) {
    const auto* ctx = static_cast<GslContext*>(params);
    const double out = (*ctx->f)(to_vector(x));
    return std::isfinite(out) ? out : kBadObjective;
}

void gsl_df(const gsl_vector* x, void* params, gsl_vector* g) {
    const auto* ctx = static_cast<GslContext*>(params);
    Vector v = to_vector(x);
    numeric_gradient(*ctx, v, (*ctx->f)(v), g);
}

void gsl_fdf(const gsl_vector* x, void* params, double* f, gsl_vector* g) {
    const auto* ctx = static_cast<GslContext*>(params);
    Vector v = to_vector(x);
    const double f0 = (*ctx->f)(v);
    *f = std::isfinite(f0) ? f0 : kBadObjective;
    numeric_gradient(*ctx, v, f0, g);
}

// GSL aborts on errors by default; status codes are checked instead.
void disable_gsl_abort() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

// BFGS with central-difference gradients, falling back to Nelder-Mead when
// the line search stalls before the gradient is small. The first `bounded`
// coordinates are atanh partial autocorrelations; once one of them passes
// kEdge the search is heading for a unit root and is abandoned, leaving the
// root check to reject the candidate.
constexpr double kEdge = 5.0;

bool at_edge(const gsl_vector* x, int bounded) {
    for (int i = 0; i < bounded; ++i)
        if (std::abs(gsl_vector_get(x, static_cast<std::size_t>(i))) > kEdge) return true;
    return false;
}

Vector minimize(const Objective& f, Vector start, int bounded, bool polish, bool& converged) {
    disable_gsl_abort();
    const std::size_t k = static_cast<std::size_t>(start.size());
    GslContext ctx{&f};
    gsl_vector* x = gsl_vector_alloc(k);
    for (std::size_t i = 0; i < k; ++i) gsl_vector_set(x, i, start(i));

    gsl_multimin_function_fdf fdf{&gsl_f, &gsl_df, &gsl_fdf, k, &ctx};
    gsl_multimin_fdfminimizer* s =
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, k);
    gsl_multimin_fdfminimizer_set(s, &fdf, x, 0.05, 0.1);
    int status = GSL_CONTINUE;
    bool edge = false;
    const double gtol = polish ? 1e-6 : 1e-4;
    const double ftol = polish ? 1e-7 : 1e-6;
    bool stalled = false;
    std::vector<double> history;
    const int max_iter = polish ? 200 : 50;
    for (int iter = 0; iter < max_iter && status == GSL_CONTINUE; ++iter) {
        if (gsl_multimin_fdfminimizer_iterate(s)) {
            stalled = true;
            // The line search stalls at the optimum when gradients are
            // numeric; accept a small gradient there.
            status = gsl_multimin_test_gradient(s->gradient, 1e-4);
            break;
        }
        if ((edge = at_edge(s->x, bounded))) break;
        status = gsl_multimin_test_gradient(s->gradient, gtol);
        // Creeping along a flat ridge: stop once five iterations gain less
        // than ftol.
        history.push_back(s->f);
        if (history.size() > 5 && history[history.size() - 6] - s->f < ftol) status = GSL_SUCCESS;
    }
    Vector best(k);
    for (std::size_t i = 0; i < k; ++i) best(i) = gsl_vector_get(s->x, i);
    double best_f = s->f;
    gsl_multimin_fdfminimizer_free(s);
    converged = status == GSL_SUCCESS;

    if (!converged && stalled && !edge && polish) {
        for (std::size_t i = 0; i < k; ++i) gsl_vector_set(x, i, best(i));
        gsl_vector* step = gsl_vector_alloc(k);
        gsl_vector_set_all(step, 0.1);
        gsl_multimin_function fn{&gsl_f, k, &ctx};
        gsl_multimin_fminimizer* nm =
            gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, k);
        gsl_multimin_fminimizer_set(nm, &fn, x, step);
        int nm_status = GSL_CONTINUE;
        for (int iter = 0; iter < 2000 && nm_status == GSL_CONTINUE; ++iter) {
            if (gsl_multimin_fminimizer_iterate(nm)) break;
            if (at_edge(nm->x, bounded)) break;
            nm_status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm), 1e-9);
        }
        if (nm->fval <= best_f) {
            for (std::size_t i = 0; i < k; ++i) best(i) = gsl_vector_get(nm->x, i);
            best_f = nm->fval;
        }
        converged = nm_status == GSL_SUCCESS;
        gsl_multimin_fminimizer_free(nm);
        gsl_vector_free(step);
    }
    gsl_vector_free(x);
    return best;
}

// Durbin-Levinson on sample autocorrelations: always stationary.
Vector yule_walker(std::span<const double> w, double mean, int p) {
    const std::size_t n = w.size();
    Vector acf(p + 1);
    for (int lag = 0; lag <= p; ++lag) {
        double s = 0.0;
        for (std::size_t t = static_cast<std::size_t>(lag); t < n; ++t)
            s += (w[t] - mean) * (w[t - lag] - mean);
        acf(lag) = s / double(n);
    }
    Vector phi = Vector::Zero(p);
    if (!(acf(0) > 0.0)) return phi;
    Vector prev = Vector::Zero(p);
    double v = acf(0);
    for (int k = 1; k <= p; ++k) {
        double num = acf(k);
        for (int j = 1; j < k; ++j) num -= prev(j - 1) * acf(k - j);
        const double a = std::clamp(num / v, -0.99, 0.99);
        phi(k - 1) = a;
        for (int j = 1; j < k; ++j) phi(j - 1) = prev(j - 1) - a * prev(k - j - 1);
        v *= 1.0 - a * a;
        prev = phi;
    }
    return phi;
}

struct Unpacked {
    Vector ar, ma;
    double mean = 0.0;
};

Unpacked unpack(const Vector& x, int p, int q, bool drift, double mean_scale) {
    Unpacked u;
    u.ar = pacf_to_coeffs(x.data(), p);
    u.ma = -pacf_to_coeffs(x.data() + p, q);
    u.mean = drift ? x(p + q) * mean_scale : 0.0;
    return u;
}

Vector numeric_stderrs(std::span<const double> w, const Unpacked& est, bool drift) {
    const int p = static_cast<int>(est.ar.size()), q = static_cast<int>(est.ma.size());
    const int k = p + q + (drift ? 1 : 0);
    Vector beta(k);
    beta.head(p) = est.ar;
    beta.segment(p, q) = est.ma;
    if (drift) beta(k - 1) = est.mean;
    auto negll = [&](const Vector& b) {
        const double ll = arma_loglik(w, b.head(p), b.segment(p, q), drift ? b(k - 1) : 0.0);
        return -ll;
    };
    Vector h(k);
    for (int i = 0; i < k; ++i) h(i) = 1e-4 * std::max(0.1, std::abs(beta(i)));
    const double f0 = negll(beta);
    Matrix H(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j <= i; ++j) {
            double v;
            if (i == j) {
                Vector bp = beta, bm = beta;
                bp(i) += h(i);
                bm(i) -= h(i);
                v = (negll(bp) - 2.0 * f0 + negll(bm)) / (h(i) * h(i));
            } else {
                Vector pp = beta, pm = beta, mp = beta, mm = beta;
                pp(i) += h(i), pp(j) += h(j);
                pm(i) += h(i), pm(j) -= h(j);
                mp(i) -= h(i), mp(j) += h(j);
                mm(i) -= h(i), mm(j) -= h(j);
                v = (negll(pp) - negll(pm) - negll(mp) + negll(mm)) / (4.0 * h(i) * h(j));
            }
            H(i, j) = H(j, i) = v;
        }
    }
    Vector se = Vector::Constant(k, std::numeric_limits<double>::quiet_NaN());
    if (!H.allFinite()) return se;
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success) return se;
    const Matrix cov = llt.solve(Matrix::Identity(k, k));
    for (int i = 0; i < k; ++i) se(i) = cov(i, i) > 0.0 ? std::sqrt(cov(i, i)) : se(i);
    return se;
}

void finish_model(ArimaModel& m) {
    m.aic = -2.0 * m.loglik + 2.0 * m.num_params();
}

}  // namespace

std::string ArimaOrder::to_string() const {
    return "ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")" +
           (drift ? (d == 0 ? " with mean" : " with drift") : "");
}

bool roots_outside_unit_circle(const Vector& coeffs, double margin) {
    // Trailing zeros do not add roots.
    Eigen::Index k = coeffs.size();
    while (k > 0 && coeffs(k - 1) == 0.0) --k;
    if (k == 0) return true;
    Matrix C = Matrix::Zero(k, k);
    C.row(0) = coeffs.head(k).transpose();
    for (Eigen::Index i = 1; i < k; ++i) C(i, i - 1) = 1.0;
    // Eigenvalues of the companion matrix are the inverse roots.
    const Eigen::VectorXcd inv = C.eigenvalues();
    for (Eigen::Index i = 0; i < k; ++i)
        if (std::abs(inv(i)) * (1.0 + margin) >= 1.0) return false;
    return true;
}

double arma_loglik(std::span<const double> w, const Vector& ar, const Vector& ma, double mean,
                   double* sigma2) {
    StateSpace ss;
    if (!build_state_space(ar, ma, ss)) return -std::numeric_limits<double>::infinity();
    const FilterResult f = kalman(w, mean, ss);
    if (!f.ok) return -std::numeric_limits<double>::infinity();
    const double n = double(w.size());
    const double s2 = f.ssq / n;
    if (sigma2) *sigma2 = s2;
    if (!(s2 > 0.0)) return std::numeric_limits<double>::infinity();
    return -0.5 * (n * std::log(2.0 * std::numbers::pi * s2) + n + f.sumlog);
}

static ArimaModel fit_arima_impl(std::span<const double> series, ArimaOrder order, bool with_se) {
    const int p = order.p, d = order.d, q = order.q;
    if (p < 0 || d < 0 || q < 0) throw ArgumentError("ARIMA orders must be nonnegative");
    if (std::max(p, q + 1) > kMaxState) throw ArgumentError("ARIMA order too large");
    if (order.drift && d > 1) throw ArgumentError("drift is only allowed for d <= 1");
    if (static_cast<long>(series.size()) <= p + q + d + 2) {
        throw ArgumentError("series too short for " + order.to_string());
    }
    for (double v : series)
        if (!std::isfinite(v)) throw ArgumentError("series contains non-finite values");

    const auto w = difference(series, d);
    const double n = double(w.size());
    double wmean = 0.0;
    for (double v : w) wmean += v;
    wmean /= n;

    ArimaModel m;
    m.order = order;
    m.nobs = static_cast<Eigen::Index>(w.size());

    if (p == 0 && q == 0) {
        // White noise: the ML mean is the sample mean.
        m.ar = Vector(0);
        m.ma = Vector(0);
        m.drift_value = order.drift ? wmean : 0.0;
        double ss = 0.0;
        for (double v : w) ss += (v - m.drift_value) * (v - m.drift_value);
        m.sigma2 = ss / n;
        double scale2 = 0.0;
        for (double v : w) scale2 += v * v;
        if (m.sigma2 <= 1e-24 * std::max(1.0, scale2 / n)) {
            m.sigma2 = 0.0;
            m.degenerate = true;
            m.loglik = std::numeric_limits<double>::infinity();
            m.aic = -std::numeric_limits<double>::infinity();
            m.stderrs = Vector::Zero(order.drift ? 1 : 0);
            return m;
        }
        m.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * m.sigma2) + 1.0);
        m.stderrs = order.drift ? Vector::Constant(1, std::sqrt(m.sigma2 / n)) : Vector(0);
        finish_model(m);
        return m;
    }

    double sd = 0.0;
    for (double v : w) sd += (v - wmean) * (v - wmean);
    sd = std::sqrt(sd / n);
    const double mean_scale = sd > 0.0 ? sd : 1.0;
    const int k = p + q + (order.drift ? 1 : 0);

    Vector start = Vector::Zero(k);
    if (p > 0) {
        const auto pacf = coeffs_to_pacf(yule_walker(w, order.drift ? wmean : 0.0, p));
        if (pacf) start.head(p) = *pacf;
    }
    if (order.drift) start(k - 1) = wmean / mean_scale;

    bool ok = false;
    const Objective css = [&](const Vector& x) {
        const auto u = unpack(x, p, q, order.drift, mean_scale);
        return css_objective(w, u.ar, u.ma, u.mean);
    };
    Vector x = minimize(css, start, p + q, false, ok);
    if (!x.allFinite()) x = start;
    // Keep the CSS estimates away from the parameter-space edge.
    for (int i = 0; i < p + q; ++i) x(i) = std::clamp(x(i), -3.0, 3.0);

    const Objective ml = [&](const Vector& v) {
        const auto u = unpack(v, p, q, order.drift, mean_scale);
        return ml_objective(w, u.ar, u.ma, u.mean);
    };
    x = minimize(ml, x, p + q, true, ok);
    const double fval = ml(x);
    if (!ok && !(fval < kBadObjective)) {
        throw EstimationError(order.to_string() + ": likelihood optimisation did not converge");
    }
    const auto est = unpack(x, p, q, order.drift, mean_scale);
    if (!roots_outside_unit_circle(est.ar, kRootMargin) ||
        !roots_outside_unit_circle(-est.ma, kRootMargin)) {
        throw EstimationError(order.to_string() +
                              ": optimum on the stationarity/invertibility boundary");
    }
    m.ar = est.ar;
    m.ma = est.ma;
    m.drift_value = est.mean;
    m.loglik = arma_loglik(w, est.ar, est.ma, est.mean, &m.sigma2);
    if (!std::isfinite(m.loglik) || !(m.sigma2 > 0.0)) {
        throw EstimationError(order.to_string() + ": degenerate likelihood");
    }
    if (with_se) m.stderrs = numeric_stderrs(w, est, order.drift);
    finish_model(m);
    return m;
}

ArimaModel fit_arima(std::span<const double> series, ArimaOrder order) {
    return fit_arima_impl(series, order, true);
}

ArimaModel select_arima(std::span<const double> series, const ArimaGrid& grid) {
    if (grid.max_p < 0 || grid.max_d < 0 || grid.max_q < 0) {
        throw ArgumentError("ARIMA grid bounds must be nonnegative");
    }
    // An exactly constant differenced series is an exact fit; report it
    // rather than letting the likelihood diverge.
    for (int d = 0; d <= grid.max_d; ++d) {
        if (static_cast<long>(series.size()) <= d + 2) break;
        const auto w = difference(series, d);
        double lo = w.front(), hi = w.front(), mag = 0.0;
        for (double v : w) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            mag = std::max(mag, std::abs(v));
        }
        const double tol = 1e-12 * std::max(1.0, mag);
        if (hi - lo > tol) continue;
        const bool zero = mag <= tol;
        if (!zero && !(grid.allow_drift && d <= 1)) continue;
        return fit_arima(series, ArimaOrder{0, d, 0, !zero});
    }

    // Every candidate is fitted to the same number of differenced values:
    // a model with d < max_d drops its first max_d - d observations. The
    // Gaussian likelihood is then over a common sample, so AIC compares
    // orders of differencing fairly.
    const auto offset = [&](int d) { return static_cast<std::size_t>(grid.max_d - d); };
    std::vector<ArimaOrder> candidates;
    for (int d = 0; d <= grid.max_d; ++d)
        for (int p = 0; p <= grid.max_p; ++p)
            for (int q = 0; q <= grid.max_q; ++q)
                for (int drift = 0; drift <= 1; ++drift) {
                    if (drift && (!grid.allow_drift || d > 1)) continue;
                    if (static_cast<long>(series.size() - offset(d)) <= p + q + d + 2) continue;
                    candidates.push_back(ArimaOrder{p, d, q, drift == 1});
                }
    std::vector<std::optional<ArimaModel>> fits(candidates.size());
    parallel_for(candidates.size(), grid.threads, [&](std::size_t i) {
        try {
            fits[i] = fit_arima_impl(series.subspan(offset(candidates[i].d)), candidates[i], false);
        } catch (const Error&) {
            // Failed candidates are skipped.
        }
    });
    const ArimaModel* best = nullptr;
    for (const auto& f : fits) {
        if (!f || !std::isfinite(f->aic)) continue;
        if (!best || f->aic < best->aic) best = &*f;
    }
    if (!best) throw EstimationError("no ARIMA candidate could be fitted");
    // Standard errors only for the winner.
    ArimaModel out = *best;
    if (out.order.p + out.order.q > 0) {
        const auto w = difference(series.subspan(offset(out.order.d)), out.order.d);
        out.stderrs = numeric_stderrs(w, Unpacked{out.ar, out.ma, out.drift_value}, out.order.drift);
    }
    return out;
}

Vector integrated_psi_weights(const ArimaModel& model, int H) {
    // (1 - sum ar_i B^i)(1 - B)^d as 1 + c_1 B + ...
    std::vector<double> poly{1.0};
    for (Eigen::Index i = 0; i < model.ar.size(); ++i) poly.push_back(-model.ar(i));
    for (int k = 0; k < model.order.d; ++k) {
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= poly[i];
        }
        poly = std::move(next);
    }
    Vector psi = Vector::Zero(H);
    if (H == 0) return psi;
    psi(0) = 1.0;
    for (int j = 1; j < H; ++j) {
        double v = j <= model.ma.size() ? model.ma(j - 1) : 0.0;
        for (int i = 1; i < static_cast<int>(poly.size()) && i <= j; ++i) v -= poly[i] * psi(j - i);
        psi(j) = v;
    }
    return psi;
}

FactorForecast forecast_arima(const ArimaModel& model, std::span<const double> history, int H,
                              double level) {
    if (H < 1) throw ArgumentError("forecast horizon must be at least 1");
    if (!(level > 0.0 && level < 1.0)) throw ArgumentError("level must lie in (0, 1)");
    const int d = model.order.d;
    if (static_cast<long>(history.size()) <= d) throw ArgumentError("history too short");

    // Last value of each differencing level 0..d-1.
    std::vector<double> last_level(d);
    {
        std::vector<double> cur(history.begin(), history.end());
        for (int k = 0; k < d; ++k) {
            last_level[k] = cur.back();
            for (std::size_t i = cur.size() - 1; i > 0; --i) cur[i] -= cur[i - 1];
            cur.erase(cur.begin());
        }
    }
    const auto w = difference(history, d);

    StateSpace ss;
    if (!build_state_space(model.ar, model.ma, ss)) {
        throw EstimationError("model is not stationary; cannot forecast");
    }
    const FilterResult f = kalman(w, model.drift_value, ss);
    if (!f.ok) throw EstimationError("Kalman filter failed while forecasting");

    Vector wf(H);
    StateVec a = f.last_state;
    const int r = ss.r;
    for (int h = 0; h < H; ++h) {
        const double a0 = a(0);
        for (int i = 0; i + 1 < r; ++i) a(i) = ss.phi(i) * a0 + a(i + 1);
        a(r - 1) = ss.phi(r - 1) * a0;
        wf(h) = model.drift_value + a(0);
    }
    // Integrate back through each differencing level.
    Vector level_fc = wf;
    for (int k = d - 1; k >= 0; --k) {
        double prev = last_level[k];
        for (int h = 0; h < H; ++h) {
            prev += level_fc(h);
            level_fc(h) = prev;
        }
    }

    FactorForecast out;
    out.horizon = H;
    out.level = level;
    out.point = level_fc;
    const Vector psi = integrated_psi_weights(model, H);
    const double zq = normal_quantile(0.5 * (1.0 + level));
    out.lower.resize(H);
    out.upper.resize(H);
    double cum = 0.0;
    for (int h = 0; h < H; ++h) {
        cum += psi(h) * psi(h);
        const double half = zq * std::sqrt(model.sigma2 * cum);
        out.lower(h) = out.point(h) - half;
        out.upper(h) = out.point(h) + half;
    }
    return out;
}

}  // namespace tvmort
