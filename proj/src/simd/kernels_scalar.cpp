#include "tvmort/simd/kernels.hpp"

namespace tvmort::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

LineMoments line_moments_scalar(const double* w, const double* x, const double* y,
                                std::size_t n) {
    LineMoments m;
    for (std::size_t i = 0; i < n; ++i) {
        const double wx = w[i] * x[i];
        m.sw += w[i];
        m.swx += wx;
        m.swxx += wx * x[i];
        m.swy += w[i] * y[i];
        m.swxy += wx * y[i];
    }
    return m;
}

constexpr KernelTable kScalar{Backend::scalar, dot_scalar, sum_sq_diff_scalar,
                              axpy_scalar,     scale_scalar, line_moments_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace tvmort::simd
