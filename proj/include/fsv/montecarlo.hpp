#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fsv/estimator.hpp"
#include "fsv/measurement.hpp"
#include "fsv/params.hpp"

namespace fsv {

// True parameter rows A-E of the simulation study; xi = 0.0225 throughout.
FsvParams panel_params(char panel);

enum class InputKind { Iv, Rv };
const char* to_string(InputKind kind);
InputKind input_kind_from_string(const std::string& name);

// One estimation run applied to every replication of a shared simulation
// batch; tracks reuse the batch so IV and RV fits see the same paths.
struct McTrack {
    InputKind input_kind = InputKind::Rv;
    CorrectionMode correction = CorrectionMode::None;
};

struct McConfig {
    explicit McConfig(const FsvParams& params_) : params(params_) {}

    FsvParams params;
    int reps = 100;
    int days = 4000;
    int steps_per_day = 4680;  // 60 substeps per 5-minute bar
    int intraday_n = 78;
    std::uint64_t seed = 1;
    int jobs = 1;  // replication-level threads; memory scales with jobs
    std::vector<McTrack> tracks;
    GmmConfig gmm;  // base estimator settings; tracks override the correction
};

// Sample statistics of each replication's simulated proxies.
struct McRepStats {
    double iv_mean = 0.0;
    double iv_var = 0.0;  // divisor T-1
    double rv_var = 0.0;
    double iv_acov0 = 0.0;  // divisor-T autocovariances
    double iv_acov1 = 0.0;
    double iv_acov5 = 0.0;
};

struct McTrackResult {
    McTrack track;
    std::vector<FsvParams> initials;  // scaling-law starting values per rep
    std::vector<GmmFit> fits;
};

struct McResult {
    std::vector<McRepStats> stats;      // one per replication, rep order
    std::vector<McTrackResult> tracks;  // parallel to McConfig::tracks
};

// Runs the batch with per-replication derived seeds; results are ordered by
// replication index, so output is independent of the thread count.
McResult run_montecarlo(const McConfig& config);

struct McSummary {
    std::array<double, 4> mean{};
    std::array<double, 4> sd{};
    std::array<double, 4> initial_mean{};
    double j_rejection_rate = 0.0;  // share of fits with J p-value below 5%
    int converged = 0;
    int reps = 0;
};

McSummary summarize(const McTrackResult& track);

}  // namespace fsv
