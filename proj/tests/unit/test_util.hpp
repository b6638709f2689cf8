#pragma once

#include <cmath>
#include <vector>

#include "tvmort/dataio.hpp"
#include "tvmort/philox.hpp"

namespace tvmort::test {

inline std::vector<int> range(int first, int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = first + i;
    return v;
}

inline MortalityPanel panel_from(const Matrix& x, int first_year = 1, int first_age = 0) {
    return MortalityPanel::from_log_rates(range(first_age, int(x.rows())),
                                          range(first_year, int(x.cols())), x);
}

/// Loadings summing to one, positive.
inline Vector unit_sum_loadings(Eigen::Index N, std::uint64_t seed) {
    Philox4x64 rng(seed);
    Vector b(N);
    for (Eigen::Index i = 0; i < N; ++i) b(i) = 0.2 + rng.uniform();
    return b / b.sum();
}

/// Decreasing factor with a centred trend and some curvature.
inline Vector trending_factor(Eigen::Index T, std::uint64_t seed) {
    Philox4x64 rng(seed);
    Vector k(T);
    double level = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        level += -1.0 + 0.8 * rng.normal();
        k(t) = level;
    }
    return k.array() - k.mean();
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace tvmort::test
