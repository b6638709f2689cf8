// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "tvmort/simd/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace tvmort::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double alpha, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

LineMoments line_moments_avx2(const double* w, const double* x, const double* y,
                              std::size_t n) {
    __m256d sw = _mm256_setzero_pd(), swx = sw, swxx = sw, swy = sw, swxy = sw;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vw = _mm256_loadu_pd(w + i);
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d wx = _mm256_mul_pd(vw, vx);
        sw = _mm256_add_pd(sw, vw);
        swx = _mm256_add_pd(swx, wx);
        swxx = _mm256_fmadd_pd(wx, vx, swxx);
        swy = _mm256_fmadd_pd(vw, vy, swy);
        swxy = _mm256_fmadd_pd(wx, vy, swxy);
    }
    LineMoments m{hsum(sw), hsum(swx), hsum(swxx), hsum(swy), hsum(swxy)};
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

constexpr KernelTable kAvx2{Backend::avx2, dot_avx2,   sum_sq_diff_avx2,
                            axpy_avx2,     scale_avx2, line_moments_avx2};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace tvmort::simd

#else

namespace tvmort::simd::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace tvmort::simd::detail

#endif
