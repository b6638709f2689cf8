#include "tvmort/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace tvmort::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_diff_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_neon(double alpha, double* x, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

LineMoments line_moments_neon(const double* w, const double* x, const double* y,
                              std::size_t n) {
    float64x2_t sw = vdupq_n_f64(0.0), swx = sw, swxx = sw, swy = sw, swxy = sw;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t vw = vld1q_f64(w + i);
        const float64x2_t vx = vld1q_f64(x + i);
        const float64x2_t vy = vld1q_f64(y + i);
        const float64x2_t wx = vmulq_f64(vw, vx);
        sw = vaddq_f64(sw, vw);
        swx = vaddq_f64(swx, wx);
        swxx = vfmaq_f64(swxx, wx, vx);
        swy = vfmaq_f64(swy, vw, vy);
        swxy = vfmaq_f64(swxy, wx, vy);
    }
    LineMoments m{vaddvq_f64(sw), vaddvq_f64(swx), vaddvq_f64(swxx), vaddvq_f64(swy),
                  vaddvq_f64(swxy)};
    for (; i < n; ++i) {
        const double wx = w[i] * x[i];
        m.sw += w[i];
        m.swx += wx;
        m.swxx += wx * x[i];
        m.swy += w[i] * y[i];
        m.swxy += wx * y[i];
    }
    return m;
}

constexpr KernelTable kNeon{Backend::neon, dot_neon,   sum_sq_diff_neon,
                            axpy_neon,     scale_neon, line_moments_neon};

}  // namespace

namespace detail {
const KernelTable* neon_table() { return &kNeon; }
}  // namespace detail

}  // namespace tvmort::simd

#else

namespace tvmort::simd::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace tvmort::simd::detail

#endif
