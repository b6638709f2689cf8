#include "tvmort/local_linear.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tvmort/error.hpp"
#include "tvmort/parallel.hpp"
#include "tvmort/simd/kernels.hpp"

namespace tvmort {
namespace {

void check_spec(const LocalLinearSpec& spec) {
    if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda)) {
        throw ArgumentError("lambda must be positive");
    }
}

// Window scratch reused across recursive steps.
struct Scratch {
    std::vector<double> w, x;
};

double extrapolate_one(std::span<const double> path, const LocalLinearSpec& spec, Scratch& s) {
    const auto n = path.size();
    // Only points with |t - t0| < lambda can carry weight.
    const auto reach = static_cast<std::size_t>(std::ceil(spec.lambda));
    const std::size_t m = std::min(n, reach);
    const std::size_t first = n - m;
    s.w.resize(m);
    s.x.resize(m);
    std::size_t positive = 0;
    for (std::size_t i = 0; i < m; ++i) {
        // Centred at the target: x = t - t0 = (first + i + 1) - (n + 1).
        const double x = double(first + i) - double(n);
        s.x[i] = x;
        s.w[i] = kernel_value(spec.family, x / spec.lambda);
        if (s.w[i] > 0.0) ++positive;
    }
    if (positive < 2) {
        throw DegenerateWindowError("local linear window holds fewer than two points (lambda " +
                                    std::to_string(spec.lambda) + ")");
    }
    const auto mo = simd::active().line_moments(s.w.data(), s.x.data(), path.data() + first, m);
    const double det = mo.sw * mo.swxx - mo.swx * mo.swx;
    if (!(det > 1e-12 * mo.sw * mo.swxx)) {
        throw DegenerateWindowError("singular local linear design (lambda " +
                                    std::to_string(spec.lambda) + ")");
    }
    // Intercept of the centred fit is the value at t0.
    return (mo.swxx * mo.swy - mo.swx * mo.swxy) / det;
}

}  // namespace

double local_linear_extrapolate(std::span<const double> path, const LocalLinearSpec& spec) {
    check_spec(spec);
    Scratch s;
    return extrapolate_one(path, spec, s);
}

Vector extrapolate_path(std::span<const double> path, int H, const LocalLinearSpec& spec) {
    check_spec(spec);
    if (H < 0) throw ArgumentError("horizon must be nonnegative");
    std::vector<double> buf(path.begin(), path.end());
    buf.reserve(buf.size() + static_cast<std::size_t>(H));
    Scratch s;
    Vector out(H);
    for (int h = 0; h < H; ++h) {
        out(h) = extrapolate_one(buf, spec, s);
        buf.push_back(out(h));
    }
    return out;
}

Matrix extrapolate_paths(const Matrix& paths, int H, const LocalLinearSpec& spec,
                         unsigned threads) {
    check_spec(spec);
    const Eigen::Index N = paths.rows(), T = paths.cols();
    Matrix out(N, H);
    parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t i) {
        std::vector<double> row(static_cast<std::size_t>(T));
        for (Eigen::Index t = 0; t < T; ++t) row[t] = paths(static_cast<Eigen::Index>(i), t);
        out.row(static_cast<Eigen::Index>(i)) = extrapolate_path(row, H, spec).transpose();
    });
    return out;
}

LambdaSelection select_lambda(const Matrix& paths, const LambdaGrid& grid, unsigned threads) {
    const Eigen::Index N = paths.rows(), T = paths.cols();
    LambdaSelection sel;
    sel.validation = grid.validation > 0 ? grid.validation : std::min<int>(10, int(T / 5));
    const int v = sel.validation;
    if (v < 1 || v >= T) {
        throw ArgumentError("validation window of " + std::to_string(v) +
                            " does not fit a path of length " + std::to_string(T));
    }
    if (grid.fractions.empty()) throw ArgumentError("empty lambda grid");
    const Matrix train = paths.leftCols(T - v);
    const Matrix held = paths.rightCols(v);

    double best = std::numeric_limits<double>::infinity();
    for (double frac : grid.fractions) {
        if (!(frac > 0.0)) throw ArgumentError("lambda fractions must be positive");
        const LocalLinearSpec spec{frac * double(T), grid.family};
        sel.candidates.push_back(spec.lambda);
        double err = std::numeric_limits<double>::quiet_NaN();
        try {
            const Matrix pred = extrapolate_paths(train, v, spec, threads);
            err = (pred - held).squaredNorm() / double(N * v);
        } catch (const DegenerateWindowError&) {
        }
        sel.errors.push_back(err);
        // Equal errors up to rounding keep the smaller lambda.
        if (std::isfinite(err) &&
            (!std::isfinite(best) || err < best - (1e-15 + 1e-9 * best))) {
            best = err;
            sel.lambda = spec.lambda;
        }
    }
    if (!std::isfinite(best)) {
        throw DegenerateWindowError("no lambda in the grid gives a nonsingular local fit");
    }
    return sel;
}

}  // namespace tvmort
