#include "fsv/simulate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fsv/kernel.hpp"

namespace fsv {

void SimConfig::validate() const {
    if (days < 1) throw std::invalid_argument("SimConfig: days must be >= 1");
    if (steps_per_day < 1) throw std::invalid_argument("SimConfig: steps_per_day must be >= 1");
    if (intraday_n < 1 || intraday_n > steps_per_day) {
        throw std::invalid_argument("SimConfig: intraday_n must be in [1, steps_per_day]");
    }
    if (steps_per_day % intraday_n != 0) {
        throw std::invalid_argument("SimConfig: intraday_n must divide steps_per_day");
    }
}

double spot_variance(const FsvParams& params, double y) {
    return params.xi * std::exp(y - 0.5 * kappa_zero(params));
}

SimOutput simulate_fsv(const SimConfig& config) {
    config.validate();
    const int days = config.days;
    const int steps = config.steps_per_day;
    const int blocks = config.intraday_n;
    const int block_len = steps / blocks;
    const double delta = 1.0 / steps;

    const std::vector<double> y = fou_path(config.params, days, steps, config.seed);

    // Price shocks are an independent substream; W is independent of B^H, so
    // there is no leverage effect.
    std::mt19937_64 rng(derive_seed(config.seed, 3));
    std::normal_distribution<double> normal;

    SimOutput out;
    out.iv.values.reserve(days);
    out.rv.values.reserve(days);
    out.bv.values.reserve(days);

    std::vector<double> log_price;
    if (config.emit_price) {
        log_price.reserve(static_cast<std::size_t>(days) * steps + 1);
        log_price.push_back(0.0);
    }

    // The fOU state has mean eta = ln(xi) - kappa(0)/2, so the spot variance
    // xi exp((y - eta) - kappa(0)/2) collapses to exp(y).
    double x = 0.0;
    std::size_t k = 0;
    std::vector<double> r(blocks);
    for (int day = 0; day < days; ++day) {
        double iv_sum = 0.0;
        for (int j = 0; j < blocks; ++j) {
            const double x0 = x;
            for (int s = 0; s < block_len; ++s, ++k) {
                const double sig2 = std::exp(y[k]);
                iv_sum += sig2;
                x += config.drift * delta + std::sqrt(sig2 * delta) * normal(rng);
                if (config.emit_price) log_price.push_back(x);
            }
            r[j] = x - x0;
        }
        out.iv.values.push_back(delta * iv_sum);
        double rv = 0.0;
        for (const double rj : r) rv += rj * rj;
        out.rv.values.push_back(rv);
        double sum_bp = 0.0;
        for (int j = 1; j < blocks; ++j) sum_bp += std::abs(r[j]) * std::abs(r[j - 1]);
        out.bv.values.push_back(0.5 * M_PI * sum_bp);
    }

    out.iv.label = "iv";
    out.rv.label = "rv";
    out.bv.label = "bv";
    out.rv.n_intraday = blocks;
    out.bv.n_intraday = blocks;
    if (config.emit_price) out.log_price = std::move(log_price);
    return out;
}

}  // namespace fsv
