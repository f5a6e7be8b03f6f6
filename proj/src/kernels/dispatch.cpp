#include <atomic>

#include "chipnet/kernels.hpp"

namespace chipnet::kernels {

namespace {

Isa detect() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#elif defined(__aarch64__)
    return Isa::neon;
#endif
    return Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) throw ModelError("kernel operands differ in length");
}

}  // namespace

const char* to_string(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "?";
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            __builtin_cpu_init();
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (!isa_supported(isa)) throw ModelError(std::string("instruction set not available: ") + to_string(isa));
    current().store(isa, std::memory_order_relaxed);
}

void reset_isa() { current().store(detect(), std::memory_order_relaxed); }

WeightedSum weighted_sum(std::span<const double> weights, std::span<const double> values) {
    check_sizes(weights.size(), values.size());
    switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::weighted_sum(weights.data(), values.data(), weights.size());
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::weighted_sum(weights.data(), values.data(), weights.size());
#endif
        default: return scalar::weighted_sum(weights.data(), values.data(), weights.size());
    }
}

MinRatio min_ratio(std::span<const double> numer, std::span<const double> denom) {
    check_sizes(numer.size(), denom.size());
    switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::min_ratio(numer.data(), denom.data(), numer.size());
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::min_ratio(numer.data(), denom.data(), numer.size());
#endif
        default: return scalar::min_ratio(numer.data(), denom.data(), numer.size());
    }
}

void link_lengths(std::span<const double> ax, std::span<const double> ay, std::span<const double> bx,
                  std::span<const double> by, LinkRouting rule, std::span<double> out) {
    std::size_t n = out.size();
    check_sizes(ax.size(), n);
    check_sizes(ay.size(), n);
    check_sizes(bx.size(), n);
    check_sizes(by.size(), n);
    bool manhattan = rule == LinkRouting::manhattan;
    switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::link_lengths(ax.data(), ay.data(), bx.data(), by.data(), manhattan, out.data(), n);
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::link_lengths(ax.data(), ay.data(), bx.data(), by.data(), manhattan, out.data(), n);
#endif
        default: return scalar::link_lengths(ax.data(), ay.data(), bx.data(), by.data(), manhattan, out.data(), n);
    }
}

void affine(std::span<const double> base, double scale, std::span<const double> lengths, std::span<double> out) {
    check_sizes(base.size(), out.size());
    check_sizes(lengths.size(), out.size());
    switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::avx2: return avx2::affine(base.data(), scale, lengths.data(), out.data(), out.size());
#endif
#if defined(__aarch64__)
        case Isa::neon: return neon::affine(base.data(), scale, lengths.data(), out.data(), out.size());
#endif
        default: return scalar::affine(base.data(), scale, lengths.data(), out.data(), out.size());
    }
}

}  // namespace chipnet::kernels
