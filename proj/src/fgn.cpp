#include <fftw3.h>

#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "fsv/errors.hpp"
#include "fsv/kernel.hpp"
#include "fsv/simulate.hpp"

namespace fsv {

namespace {

// FFTW's planner is not thread-safe; the eigenvalue cache shares the lock.
std::mutex fftw_mutex;

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwPtr = std::unique_ptr<T[], FftwDeleter>;

template <class T>
FftwPtr<T> fftw_alloc_array(std::size_t n) {
    return FftwPtr<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

// Unit-spacing fGn autocovariance gamma(k) = ((k+1)^{2H} - 2k^{2H} + (k-1)^{2H})/2.
double fgn_gamma(double two_h, std::size_t k) {
    if (k == 0) return 1.0;
    const double kd = static_cast<double>(k);
    return 0.5 * (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) +
                  std::pow(kd - 1.0, two_h));
}

// Eigenvalues of the 2g-circulant embedding of gamma(0..g), computed as the
// even real transform of the first row (a DCT-I of length g+1). Cached for
// the most recent (hurst, g): replications in a Monte Carlo batch share one
// shape, and the cache halves the FFT work per path.
std::vector<double> embedding_eigenvalues(double hurst, std::size_t g) {
    static double cached_hurst = -1.0;
    static std::size_t cached_g = 0;
    static std::vector<double> cached;

    std::lock_guard<std::mutex> lock(fftw_mutex);
    if (cached_hurst == hurst && cached_g == g) return cached;

    const double two_h = 2.0 * hurst;
    auto row = fftw_alloc_array<double>(g + 1);
    for (std::size_t k = 0; k <= g; ++k) row[k] = fgn_gamma(two_h, k);
    auto out = fftw_alloc_array<double>(g + 1);
    fftw_plan plan = fftw_plan_r2r_1d(static_cast<int>(g + 1), row.get(), out.get(),
                                      FFTW_REDFT00, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    std::vector<double> lambda(out.get(), out.get() + g + 1);
    double max_l = 0.0;
    for (double l : lambda) max_l = std::max(max_l, l);
    for (double& l : lambda) {
        if (l < 0.0) {
            // Cannot happen for fGn; tolerate rounding dust, reject the rest.
            if (l < -1e-12 * max_l) {
                throw NumericError("fgn_increments: circulant embedding has a negative eigenvalue");
            }
            l = 0.0;
        }
    }
    cached_hurst = hurst;
    cached_g = g;
    cached = lambda;
    return cached;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed ^ (tag * 0x9E3779B97F4A7C15ull);
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<double> fgn_increments(double hurst, std::size_t count, double dt,
                                   std::uint64_t seed) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw std::invalid_argument("fgn_increments: hurst must be in (0, 1)");
    }
    if (count < 1) throw std::invalid_argument("fgn_increments: count must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("fgn_increments: dt must be > 0");

    const std::size_t g = std::bit_ceil(count);  // internal padding, never an error
    const std::size_t m = 2 * g;
    const std::vector<double> lambda = embedding_eigenvalues(hurst, g);

    // Half spectrum with E|v_k|^2 = lambda_k / M; the two real endpoints carry
    // the full variance, interior slots split it between real and imaginary.
    // Draw order is k = 0..g, real part before imaginary part.
    auto spectrum = fftw_alloc_array<fftw_complex>(g + 1);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const double md = static_cast<double>(m);
    spectrum[0][0] = std::sqrt(lambda[0] / md) * normal(rng);
    spectrum[0][1] = 0.0;
    for (std::size_t k = 1; k < g; ++k) {
        const double s = std::sqrt(lambda[k] / (2.0 * md));
        spectrum[k][0] = s * normal(rng);
        spectrum[k][1] = s * normal(rng);
    }
    spectrum[g][0] = std::sqrt(lambda[g] / md) * normal(rng);
    spectrum[g][1] = 0.0;

    auto out = fftw_alloc_array<double>(m);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(m), spectrum.get(), out.get(),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex);
        fftw_destroy_plan(plan);
    }

    std::vector<double> result(out.get(), out.get() + count);
    const double scale = std::pow(dt, hurst);
    for (double& x : result) x *= scale;
    return result;
}

std::vector<double> fou_path(const FsvParams& params, int days, int steps_per_day,
                             std::uint64_t seed) {
    if (days < 1 || steps_per_day < 1) {
        throw std::invalid_argument("fou_path: days and steps_per_day must be >= 1");
    }
    const std::size_t count = static_cast<std::size_t>(days) * steps_per_day;
    const double delta = 1.0 / steps_per_day;
    const std::vector<double> dbh =
        fgn_increments(params.hurst, count, delta, derive_seed(seed, 1));

    const double k0 = kappa_zero(params);
    const double eta = std::log(params.xi) - 0.5 * k0;
    std::vector<double> y(count + 1);
    {
        std::mt19937_64 rng(derive_seed(seed, 2));
        std::normal_distribution<double> normal;
        y[0] = eta + std::sqrt(k0) * normal(rng);
    }
    const double decay = std::exp(-params.lambda * delta);
    const double shock = params.nu * std::exp(-0.5 * params.lambda * delta);
    for (std::size_t k = 0; k < count; ++k) {
        y[k + 1] = eta + (y[k] - eta) * decay + shock * dbh[k];
    }
    return y;
}

}  // namespace fsv
