#pragma once

#include <span>
#include <vector>

#include "tvmort/kernel_weights.hpp"
#include "tvmort/types.hpp"

namespace tvmort {

/// Straight-line fit localised by K((t - t0) / lambda); lambda is the
/// half-width of the window in time-index units.
struct LocalLinearSpec {
    double lambda = 10.0;
    KernelFamily family = KernelFamily::epanechnikov;
};

/// Fits a weighted line to path[0..n-1] (observed at t = 1..n) and evaluates
/// it at t0 = n + 1. Throws DegenerateWindowError when fewer than two points
/// carry weight or the weighted design is singular.
double local_linear_extrapolate(std::span<const double> path, const LocalLinearSpec& spec);

/// Recursive multi-step extrapolation: each new value is appended to the
/// path before the next step. Returns the H extrapolated values.
Vector extrapolate_path(std::span<const double> path, int H, const LocalLinearSpec& spec);

/// Row-wise extrapolate_path of an N x T matrix; returns N x H.
Matrix extrapolate_paths(const Matrix& paths, int H, const LocalLinearSpec& spec,
                         unsigned threads = 1);

struct LambdaGrid {
    /// Candidate lambdas as fractions of the path length.
    std::vector<double> fractions{0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
    int validation = 0;  // 0 = min(10, T / 5)
    KernelFamily family = KernelFamily::epanechnikov;
};

struct LambdaSelection {
    double lambda = 0.0;
    int validation = 0;
    std::vector<double> candidates;  // lambda values tried
    std::vector<double> errors;      // pooled MSE per candidate; NaN when infeasible
};

/// Holds out the last v columns of `paths` (N x T), extrapolates each row
/// from the first T - v columns and picks the lambda with the smallest mean
/// squared error pooled across rows. Ties keep the smaller lambda.
LambdaSelection select_lambda(const Matrix& paths, const LambdaGrid& grid = {},
                              unsigned threads = 1);

}  // namespace tvmort
