#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fsv/data_io.hpp"
#include "fsv/params.hpp"

namespace fsv {

struct SimConfig {
    FsvParams params;
    int days = 1;
    int steps_per_day = 23400;
    int intraday_n = 78;  // must divide steps_per_day
    std::uint64_t seed = 0;
    bool emit_price = false;
    double drift = 0.0;  // robustness hook; the simulated price is driftless by default

    void validate() const;
};

struct SimOutput {
    VolSeries iv;
    VolSeries rv;
    VolSeries bv;
    std::optional<std::vector<double>> log_price;  // length days*steps_per_day+1
};

// Deterministic substream derivation (splitmix64 of seed xor tag*golden).
// Tags used internally: 1 = fGn stream, 2 = initial state, 3 = price normals;
// the Monte Carlo harness derives per-replication master seeds the same way.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// `count` exact increments of fractional Brownian motion on a grid of spacing
// dt, via circulant embedding of the fGn covariance (FFT of the symmetric
// extension of the autocovariance row, nonnegative spectrum by construction).
std::vector<double> fgn_increments(double hurst, std::size_t count, double dt,
                                   std::uint64_t seed);

// Stationary fOU log-variance path on the Euler grid, length days*N+1:
//   Y_0 ~ N(eta, kappa(0)),  eta = ln(xi) - kappa(0)/2,
//   Y_t = eta + (Y_{t-dt} - eta) e^{-lambda dt} + nu e^{-lambda dt/2} dB^H.
std::vector<double> fou_path(const FsvParams& params, int days, int steps_per_day,
                             std::uint64_t seed);

// Spot variance from the centered log-variance state: xi exp(y - kappa(0)/2).
double spot_variance(const FsvParams& params, double y);

// Euler price path with variance exp(Y) and independent driving noise; daily
// IV by left Riemann sum, RV/BV from n equispaced intraday increments.
SimOutput simulate_fsv(const SimConfig& config);

}  // namespace fsv
