#include "fsv/montecarlo.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fsv/simulate.hpp"
#include "fsv/stats.hpp"

namespace fsv {

FsvParams panel_params(char panel) {
    switch (std::toupper(static_cast<unsigned char>(panel))) {
        case 'A': return FsvParams(0.0225, 0.005, 1.25, 0.05);
        case 'B': return FsvParams(0.0225, 0.010, 0.75, 0.10);
        case 'C': return FsvParams(0.0225, 0.015, 0.50, 0.30);
        case 'D': return FsvParams(0.0225, 0.035, 0.30, 0.50);
        case 'E': return FsvParams(0.0225, 0.070, 0.20, 0.70);
        default: throw std::invalid_argument("panel_params: panel must be one of A-E");
    }
}

const char* to_string(InputKind kind) { return kind == InputKind::Iv ? "iv" : "rv"; }

InputKind input_kind_from_string(const std::string& name) {
    if (name == "iv") return InputKind::Iv;
    if (name == "rv") return InputKind::Rv;
    throw std::invalid_argument("unknown input kind '" + name + "' (expected iv or rv)");
}

namespace {

void run_one(const McConfig& config, int rep, McResult& result) {
    SimConfig sim_config{config.params,
                         config.days,
                         config.steps_per_day,
                         config.intraday_n,
                         derive_seed(config.seed, 16 + static_cast<std::uint64_t>(rep)),
                         false,
                         0.0};
    const SimOutput sim = simulate_fsv(sim_config);

    McRepStats& st = result.stats[static_cast<std::size_t>(rep)];
    st.iv_mean = mean(sim.iv.values);
    st.iv_var = variance(sim.iv.values);
    st.rv_var = variance(sim.rv.values);
    st.iv_acov0 = autocovariance(sim.iv.values, 0);
    st.iv_acov1 = autocovariance(sim.iv.values, 1);
    st.iv_acov5 = autocovariance(sim.iv.values, 5);

    for (std::size_t ti = 0; ti < config.tracks.size(); ++ti) {
        const McTrack& track = config.tracks[ti];
        const VolSeries& series = track.input_kind == InputKind::Iv ? sim.iv : sim.rv;
        GmmConfig gmm = config.gmm;
        gmm.spec.correction = track.correction;
        gmm.spec.n_intraday = config.intraday_n;
        gmm.restart_seed =
            derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(rep) *
                                                (config.tracks.size() + 1) +
                                         ti);
        const FsvParams start = initial_values(series);
        gmm.init_overrides = start;
        McTrackResult& out = result.tracks[ti];
        out.initials[static_cast<std::size_t>(rep)] = start;
        out.fits[static_cast<std::size_t>(rep)] = fit_gmm(series, gmm);
    }
}

}  // namespace

McResult run_montecarlo(const McConfig& config) {
    if (config.reps < 1) throw std::invalid_argument("run_montecarlo: reps must be >= 1");
    if (config.jobs < 1) throw std::invalid_argument("run_montecarlo: jobs must be >= 1");
    SimConfig probe{config.params, config.days, config.steps_per_day, config.intraday_n,
                    config.seed,   false,       0.0};
    probe.validate();

    const std::size_t reps = static_cast<std::size_t>(config.reps);
    McResult result;
    result.stats.resize(reps);
    result.tracks.reserve(config.tracks.size());
    for (const McTrack& track : config.tracks) {
        McTrackResult tr;
        tr.track = track;
        tr.initials.assign(reps, config.params);  // overwritten per rep
        tr.fits.assign(reps, GmmFit(config.params));
        result.tracks.push_back(std::move(tr));
    }

    const int jobs = std::min(config.jobs, config.reps);
    if (jobs <= 1) {
        for (int rep = 0; rep < config.reps; ++rep) run_one(config, rep, result);
        return result;
    }

    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        for (;;) {
            const int rep = next.fetch_add(1);
            if (rep >= config.reps) return;
            try {
                run_one(config, rep, result);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return result;
}

McSummary summarize(const McTrackResult& track) {
    McSummary s;
    s.reps = static_cast<int>(track.fits.size());
    if (s.reps == 0) return s;
    std::array<std::vector<double>, 4> theta;
    int j_total = 0;
    int j_reject = 0;
    for (const GmmFit& fit : track.fits) {
        theta[0].push_back(fit.theta.xi);
        theta[1].push_back(fit.theta.lambda);
        theta[2].push_back(fit.theta.nu);
        theta[3].push_back(fit.theta.hurst);
        if (fit.converged) ++s.converged;
        if (fit.j_dof >= 1 && std::isfinite(fit.j_pvalue)) {
            ++j_total;
            if (fit.j_pvalue < 0.05) ++j_reject;
        }
    }
    for (int i = 0; i < 4; ++i) {
        s.mean[static_cast<std::size_t>(i)] = mean(theta[static_cast<std::size_t>(i)]);
        s.sd[static_cast<std::size_t>(i)] =
            theta[static_cast<std::size_t>(i)].size() > 1
                ? std::sqrt(variance(theta[static_cast<std::size_t>(i)]))
                : 0.0;
    }
    for (const FsvParams& p : track.initials) {
        s.initial_mean[0] += p.xi;
        s.initial_mean[1] += p.lambda;
        s.initial_mean[2] += p.nu;
        s.initial_mean[3] += p.hurst;
    }
    for (double& x : s.initial_mean) x /= static_cast<double>(s.reps);
    s.j_rejection_rate = j_total > 0 ? static_cast<double>(j_reject) / j_total : 0.0;
    return s;
}

}  // namespace fsv
