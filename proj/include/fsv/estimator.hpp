#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fsv/data_io.hpp"
#include "fsv/iv_moments.hpp"
#include "fsv/linalg.hpp"
#include "fsv/params.hpp"

namespace fsv {

enum class HacKernel { Parzen, Bartlett };
enum class BandwidthRule { AndrewsArma11, Fixed };

struct HacConfig {
    HacKernel kernel = HacKernel::Parzen;
    BandwidthRule bandwidth = BandwidthRule::AndrewsArma11;
    // Bandwidth S for the Fixed rule; lag l gets weight w(l/S), so S=1 keeps
    // only the lag-0 term. Keeping S = o(sqrt(T)) is the caller's problem.
    int fixed_bandwidth = 1;
};

// Box constraints for theta = (xi, lambda, nu, hurst), daily units.
struct ParamBounds {
    std::array<double, 4> lower{1e-8, 1e-8, 1e-8, 0.001};
    std::array<double, 4> upper{10.0, 5.0, 20.0, 0.999};
};

struct GmmConfig {
    MomentSpec spec;
    int max_iterations = 3;
    double tol = 1e-6;  // optimizer and iterate-change tolerance
    ParamBounds bounds;
    HacConfig hac;
    std::optional<FsvParams> init_overrides;
    int max_restarts = 3;  // random restarts on optimizer non-convergence
    std::uint64_t restart_seed = 0x66534553ULL;
};

struct GmmFit {
    explicit GmmFit(const FsvParams& theta_) : theta(theta_) {}

    FsvParams theta;
    Matrix vcov;  // 4x4, per-day units
    std::array<double, 4> se{};
    // J-statistic T * min objective; stat/pvalue are NaN when dof < 1.
    double j_stat = 0.0;
    int j_dof = 0;
    double j_pvalue = 0.0;
    std::vector<double> objective_trace;  // minimized objective per GMM iteration
    Matrix weight_matrix;                 // W used in the final minimization
    bool converged = false;
    GmmConfig config;  // echoed into serialized fits
};

// Sample moment vector (mean, then lagged raw second moments): T^{-1} sum v_t
// and T^{-1} sum_{t>l} v_t v_{t-l}; the sum runs over available pairs but the
// divisor stays T at every lag.
MomentVector sample_moment_vector(const VolSeries& series, const MomentSpec& spec);

// Scaling-law starting values: xi0 = mean; (H0, nu0) by OLS of ln gamma_h on
// ln h, h = 1..m, where gamma_h is the mean q-th power log-proxy increment;
// lambda0 matches the model log-variance to the sample variance of the log
// proxy. All four are clamped to the default bounds.
FsvParams initial_values(const VolSeries& series, double q = 2.0, int m = 6);

// m(theta)' W m(theta) with m = sample minus corrected model moments.
double gmm_objective(const VolSeries& series, const FsvParams& params, const Matrix& weight,
                     const MomentSpec& spec);

// Long-run covariance of the rows of `moment_residuals` (rows ordered in
// time): Gamma(0) + sum_l w(l/S)(Gamma(l) + Gamma(l)'), divisor = row count.
Matrix hac_covariance(const Matrix& moment_residuals, const HacConfig& hac);

// Iterated GMM: W = I on the first pass, then W = (HAC + ridge)^{-1} at the
// current estimate, re-minimized up to max_iterations times with early stop
// on a small relative change in theta. Each minimization is bound-constrained
// nonlinear least squares on the Cholesky-whitened moment distance.
GmmFit fit_gmm(const VolSeries& series, const GmmConfig& config);

struct StdErrors {
    std::array<double, 4> se;
    Matrix vcov;
};

// (J'WJ)^{-1} J'W Sigma W J (J'WJ)^{-1} / T, collapsing to (J'Sigma^{-1}J)^{-1}/T
// when W is (numerically) the inverse of Sigma.
StdErrors standard_errors(const Matrix& weight, const Matrix& sigma, const Matrix& jacobian,
                          std::size_t t_len);

struct JTest {
    double stat;
    int dof;
    double pvalue;
};

// Overidentification test: stat = T * minimized objective ~ chi2(dof) with
// dof = n_conditions - n_params; requires dof >= 1.
JTest j_test(double objective_at_opt, std::size_t t_len, int n_conditions, int n_params);

// Delta-method CI for H on the log scale: H exp(-+ z se/H); always positive.
std::pair<double, double> hurst_ci_log(double h_hat, double se_h, double level);

namespace detail {

double parzen_weight(double x);
double bartlett_weight(double x);

struct Arma11 {
    double rho;
    double psi;
    double sigma2;
};

// Conditional-least-squares ARMA(1,1) fit to a demeaned series, coefficients
// boxed to [-0.998, 0.998]; feeds the Andrews plug-in bandwidth.
Arma11 arma11_css(const std::vector<double>& x);

// Andrews plug-in bandwidth from an ARMA(1,1) fit to the (demeaned) first
// residual column: 2.6614 (alpha_2 T)^{1/5} for Parzen, 1.1447 (alpha_1 T)^{1/3}
// for Bartlett, truncated to [1, floor(T^{0.45})].
double andrews_bandwidth(const std::vector<double>& column, HacKernel kernel, std::size_t t_len);

}  // namespace detail

}  // namespace fsv
