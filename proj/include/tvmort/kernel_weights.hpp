#pragma once

#include <string>

#include "tvmort/types.hpp"

namespace tvmort {

enum class KernelFamily { epanechnikov, uniform };

/// Kernel, bandwidth (as a fraction of the sample length) and whether the
/// edge-renormalised boundary kernel is used.
struct KernelSpec {
    KernelFamily family = KernelFamily::epanechnikov;
    double bandwidth = 0.1;
    bool boundary_correction = true;
};

/// K(u) on [-1, 1].
double kernel_value(KernelFamily family, double u);

/// Integral of K over [lo, hi] after clipping to [-1, 1], closed form.
double kernel_integral(KernelFamily family, double lo, double hi);

/// Rule-of-thumb bandwidth (2.35 / sqrt(12)) T^(-1/5) N^(-1/10).
double silverman_bandwidth(Eigen::Index T, Eigen::Index N);

/// Weight of observation t for the local fit centred at r (both 1-based):
/// h^-1 K((t - r) / (T h)), renormalised by the kernel mass inside the
/// sample when r lies within floor(T h) of either edge.
double boundary_weight(Eigen::Index t, Eigen::Index r, Eigen::Index T, const KernelSpec& spec);

/// boundary_weight(t, r) for t = 1..T. Throws DegenerateWindowError when
/// fewer than min_positive entries are strictly positive.
Vector weight_vector(Eigen::Index r, Eigen::Index T, const KernelSpec& spec,
                     Eigen::Index min_positive = 2);

KernelFamily parse_kernel_family(const std::string& name);

}  // namespace tvmort
