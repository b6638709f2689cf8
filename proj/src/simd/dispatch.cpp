#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "tvmort/simd/kernels.hpp"

namespace tvmort::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() {
    if (const char* env = std::getenv("TVMORT_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && table_for(Backend::avx2)) return table_for(Backend::avx2);
        if (want == "neon" && table_for(Backend::neon)) return table_for(Backend::neon);
    }
    return table_for(detect_best());
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable* table_for(Backend backend) {
    switch (backend) {
        case Backend::scalar:
            return &scalar_table();
        case Backend::avx2:
            return cpu_has_avx2() ? detail::avx2_table() : nullptr;
        case Backend::neon:
            return detail::neon_table();
    }
    return nullptr;
}

Backend detect_best() {
    if (table_for(Backend::avx2)) return Backend::avx2;
    if (table_for(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void set_backend(Backend backend) {
    const KernelTable* t = table_for(backend);
    if (!t) {
        throw std::invalid_argument("SIMD backend not available: " +
                                    std::string(backend_name(backend)));
    }
    current().store(t, std::memory_order_release);
}

std::string_view backend_name(Backend backend) {
    switch (backend) {
        case Backend::scalar:
            return "scalar";
        case Backend::avx2:
            return "avx2";
        case Backend::neon:
            return "neon";
    }
    return "unknown";
}

}  // namespace tvmort::simd
