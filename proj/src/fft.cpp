#include "advaudio/fft.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace advaudio::dsp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kMaxLog2 = 24;

struct Tables {
    std::vector<cdouble> twiddle;       // e^{-2*pi*i*j/n}, j in [0, n/2)
    std::vector<std::size_t> bitrev;
};

std::array<Tables, kMaxLog2 + 1> g_tables;
std::array<std::once_flag, kMaxLog2 + 1> g_once;

const Tables& tables_for(int log2n) {
    std::call_once(g_once[log2n], [log2n] {
        const std::size_t n = std::size_t{1} << log2n;
        Tables& t = g_tables[log2n];
        t.twiddle.resize(n / 2);
        for (std::size_t j = 0; j < n / 2; ++j) {
            const double a = -kTwoPi * static_cast<double>(j) / static_cast<double>(n);
            t.twiddle[j] = {std::cos(a), std::sin(a)};
        }
        t.bitrev.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1u) << (log2n - 1 - b);
            t.bitrev[i] = r;
        }
    });
    return g_tables[log2n];
}

}  // namespace

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_pow2(cdouble* data, std::size_t n, bool inverse) {
    if (n <= 1) return;
    if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: size must be a power of two");
    int log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    if (log2n > kMaxLog2) throw std::invalid_argument("fft_pow2: size too large");

    const Tables& t = tables_for(log2n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = t.bitrev[i];
        if (i < r) std::swap(data[i], data[r]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t step = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t j = 0; j < half; ++j) {
                cdouble w = t.twiddle[j * step];
                if (inverse) w = std::conj(w);
                const cdouble u = data[base + j];
                const cdouble v = data[base + j + half] * w;
                data[base + j] = u + v;
                data[base + j + half] = u - v;
            }
        }
    }
}

}  // namespace advaudio::dsp
