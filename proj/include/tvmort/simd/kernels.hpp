#pragma once

// Data-parallel inner loops used by the estimators.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2/FMA (x86-64) or NEON (aarch64) variant. The variant is
// picked once at startup from the CPU feature set; the TVMORT_SIMD environment
// variable ("scalar", "avx2", "neon") or set_backend() overrides the choice.
// Vector variants reassociate sums, so they agree with the scalar reference
// to rounding, not bit-for-bit.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace tvmort::simd {

enum class Backend { scalar, avx2, neon };

/// Sums needed by a weighted straight-line fit y ~ a + b*x.
struct LineMoments {
    double sw = 0.0;    // sum w
    double swx = 0.0;   // sum w x
    double swxx = 0.0;  // sum w x^2
    double swy = 0.0;   // sum w y
    double swxy = 0.0;  // sum w x y
};

struct KernelTable {
    Backend backend;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*scale)(double alpha, double* x, std::size_t n);
    LineMoments (*line_moments)(const double* w, const double* x, const double* y,
                                std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the backend is not compiled in or not supported by this CPU.
const KernelTable* table_for(Backend backend);

/// The table used by the library.
const KernelTable& active();

/// Throws std::invalid_argument when the backend is unavailable.
void set_backend(Backend backend);

Backend detect_best();
std::string_view backend_name(Backend backend);

// Convenience wrappers over active().

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
    return active().sum_sq_diff(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void scale(double alpha, std::span<double> x) {
    active().scale(alpha, x.data(), x.size());
}

inline LineMoments line_moments(std::span<const double> w, std::span<const double> x,
                                std::span<const double> y) {
    return active().line_moments(w.data(), x.data(), y.data(), w.size());
}

namespace detail {
const KernelTable* avx2_table();
const KernelTable* neon_table();
}  // namespace detail

}  // namespace tvmort::simd
