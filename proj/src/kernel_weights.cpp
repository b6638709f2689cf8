#include "tvmort/kernel_weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvmort/error.hpp"

namespace tvmort {
namespace {

void check_spec(const KernelSpec& spec) {
    if (!(spec.bandwidth > 0.0) || !std::isfinite(spec.bandwidth)) {
        throw ArgumentError("kernel bandwidth must be positive and finite");
    }
}

// Antiderivatives on [-1, 1].
double epanechnikov_cdf(double u) { return 0.75 * u - 0.25 * u * u * u; }
double uniform_cdf(double u) { return 0.5 * u; }

}  // namespace

double kernel_value(KernelFamily family, double u) {
    if (std::abs(u) > 1.0) return 0.0;
    switch (family) {
        case KernelFamily::epanechnikov:
            return 0.75 * (1.0 - u * u);
        case KernelFamily::uniform:
            return 0.5;
    }
    return 0.0;
}

double kernel_integral(KernelFamily family, double lo, double hi) {
    lo = std::clamp(lo, -1.0, 1.0);
    hi = std::clamp(hi, -1.0, 1.0);
    if (hi <= lo) return 0.0;
    switch (family) {
        case KernelFamily::epanechnikov:
            return epanechnikov_cdf(hi) - epanechnikov_cdf(lo);
        case KernelFamily::uniform:
            return uniform_cdf(hi) - uniform_cdf(lo);
    }
    return 0.0;
}

double silverman_bandwidth(Eigen::Index T, Eigen::Index N) {
    if (T < 3 || N < 2) throw ArgumentError("silverman_bandwidth needs T >= 3 and N >= 2");
    return 2.35 / std::sqrt(12.0) * std::pow(double(T), -0.2) * std::pow(double(N), -0.1);
}

double boundary_weight(Eigen::Index t, Eigen::Index r, Eigen::Index T, const KernelSpec& spec) {
    check_spec(spec);
    if (T < 1 || t < 1 || t > T || r < 1 || r > T) {
        throw ArgumentError("boundary_weight index out of range");
    }
    const double h = spec.bandwidth;
    const double Th = double(T) * h;
    const double base = kernel_value(spec.family, double(t - r) / Th) / h;
    if (!spec.boundary_correction || base == 0.0) return base;

    // Left edge r <= floor(Th), right edge r > T - floor(Th). When the two
    // regions overlap (h >= 1/2) both limits are truncated.
    const auto edge = static_cast<Eigen::Index>(std::floor(Th));
    const bool left = r <= edge;
    const bool right = r > T - edge;
    if (!left && !right) return base;
    const double lo = left ? -double(r) / Th : -1.0;
    const double hi = right ? (1.0 - double(r) / double(T)) / h : 1.0;
    const double mass = kernel_integral(spec.family, lo, hi);
    if (!(mass > 0.0)) throw DegenerateWindowError("boundary kernel has no mass at r = " + std::to_string(r));
    return base / mass;
}

Vector weight_vector(Eigen::Index r, Eigen::Index T, const KernelSpec& spec,
                     Eigen::Index min_positive) {
    Vector w(T);
    Eigen::Index positive = 0;
    for (Eigen::Index t = 1; t <= T; ++t) {
        w(t - 1) = boundary_weight(t, r, T, spec);
        if (w(t - 1) > 0.0) ++positive;
    }
    if (positive < min_positive) {
        throw DegenerateWindowError("only " + std::to_string(positive) +
                                    " positive kernel weights at r = " + std::to_string(r) +
                                    " (need " + std::to_string(min_positive) +
                                    "); bandwidth too small");
    }
    return w;
}

KernelFamily parse_kernel_family(const std::string& name) {
    if (name == "epanechnikov") return KernelFamily::epanechnikov;
    if (name == "uniform") return KernelFamily::uniform;
    throw ArgumentError("unknown kernel '" + name + "' (epanechnikov|uniform)");
}

}  // namespace tvmort
