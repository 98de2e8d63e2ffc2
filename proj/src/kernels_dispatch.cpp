#include "crossview/kernels.hpp"

#include <cstdlib>

#include "crossview/errors.hpp"

namespace crossview::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
#endif
#if defined(__aarch64__) || defined(_M_ARM64)
const Backend& neon_backend();
#endif

namespace {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Backend* detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) return &avx2_backend();
#endif
#if defined(__aarch64__) || defined(_M_ARM64)
    return &neon_backend();
#endif
    return &scalar();
}

const Backend* by_name(const std::string& name) {
    if (name == "scalar") return &scalar();
    if (name == "auto") return detect();
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
        if (!avx2_supported()) {
            throw ValidationError("kernel backend 'avx2' not supported on this CPU");
        }
        return &avx2_backend();
    }
#endif
#if defined(__aarch64__) || defined(_M_ARM64)
    if (name == "neon") return &neon_backend();
#endif
    throw ValidationError("unknown kernel backend: " + name);
}

const Backend* initial() {
    if (const char* env = std::getenv("CROSSVIEW_KERNELS")) return by_name(env);
    return detect();
}

const Backend*& active_slot() {
    static const Backend* slot = initial();
    return slot;
}

}  // namespace

const Backend& active() { return *active_slot(); }

void select(const std::string& name) { active_slot() = by_name(name); }

std::vector<std::string> available() {
    std::vector<std::string> names{"scalar"};
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) names.emplace_back("avx2");
#endif
#if defined(__aarch64__) || defined(_M_ARM64)
    names.emplace_back("neon");
#endif
    return names;
}

}  // namespace crossview::kernels
