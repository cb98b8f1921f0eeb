#include "fsv/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsv/errors.hpp"
#include "fsv/kernel.hpp"
#include "fsv/nls.hpp"
#include "fsv/stats.hpp"

namespace fsv {

namespace {

double clamp_box(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

std::vector<double> clamp_theta(const FsvParams& p, const ParamBounds& b) {
    return {clamp_box(p.xi, b.lower[0], b.upper[0]), clamp_box(p.lambda, b.lower[1], b.upper[1]),
            clamp_box(p.nu, b.lower[2], b.upper[2]), clamp_box(p.hurst, b.lower[3], b.upper[3])};
}

FsvParams to_params(const std::vector<double>& x) { return FsvParams(x[0], x[1], x[2], x[3]); }

std::vector<double> model_values(const std::vector<double>& x, const MomentSpec& spec) {
    const FsvParams p = to_params(x);
    return model_moment_vector(CovKernel::fsv(p), p.xi, spec).values;
}

void require_positive_series(const std::vector<double>& v, const char* who) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || !(v[i] > 0.0)) {
            throw DataError(std::string(who) + ": value at position " + std::to_string(i + 1) +
                                " is not a positive finite number",
                            i + 1);
        }
    }
}

double rel_sup_change(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-12));
    }
    return m;
}

// Rows t = maxlag+1..T of (v_t, v_t v_{t-l1}, ...) minus the model vector.
Matrix residual_matrix(const std::vector<double>& v, const std::vector<double>& theta,
                       const MomentSpec& spec) {
    const auto g = model_values(theta, spec);
    const std::size_t max_lag = static_cast<std::size_t>(spec.lags.back());
    const std::size_t rows = v.size() - max_lag;
    Matrix r(rows, spec.dim());
    for (std::size_t t = max_lag; t < v.size(); ++t) {
        r(t - max_lag, 0) = v[t] - g[0];
        for (std::size_t j = 0; j < spec.lags.size(); ++j) {
            r(t - max_lag, j + 1) = v[t] * v[t - static_cast<std::size_t>(spec.lags[j])] - g[j + 1];
        }
    }
    return r;
}

std::vector<double> perturb_start(const std::vector<double>& x, const ParamBounds& b,
                                  std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-std::log(1.2), std::log(1.2));
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = clamp_box(x[i] * std::exp(u(rng)), b.lower[i], b.upper[i]);
    }
    return out;
}

// One weighted minimization with restarts: NLS on L' m(theta), W = L L'.
NlsResult minimize_whitened(const std::vector<double>& sample, const Matrix& weight,
                            const std::vector<double>& start, const GmmConfig& config,
                            std::mt19937_64& rng) {
    const std::size_t p = sample.size();
    Matrix l;
    if (!cholesky(weight, l)) {
        throw NumericError("fit_gmm: weight matrix is not positive definite");
    }
    auto residual = [&](const std::vector<double>& x) {
        const auto g = model_values(x, config.spec);
        std::vector<double> diff(p);
        for (std::size_t i = 0; i < p; ++i) diff[i] = sample[i] - g[i];
        std::vector<double> r(p, 0.0);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t k = i; k < p; ++k) r[i] += l(k, i) * diff[k];
        }
        return r;
    };
    NlsOptions opt;
    opt.tol = config.tol;
    const std::vector<double> lo(config.bounds.lower.begin(), config.bounds.lower.end());
    const std::vector<double> hi(config.bounds.upper.begin(), config.bounds.upper.end());
    NlsResult best = nls_minimize(residual, start, lo, hi, opt);
    for (int attempt = 0; !best.converged && attempt < config.max_restarts; ++attempt) {
        NlsResult cand = nls_minimize(residual, perturb_start(start, config.bounds, rng), lo, hi, opt);
        if ((cand.converged && !best.converged) ||
            (cand.converged == best.converged && cand.objective < best.objective)) {
            best = std::move(cand);
        }
    }
    return best;
}

}  // namespace

MomentVector sample_moment_vector(const VolSeries& series, const MomentSpec& spec) {
    spec.validate();
    const auto& v = series.values;
    const std::size_t t_len = v.size();
    const std::size_t max_lag = static_cast<std::size_t>(spec.lags.back());
    if (t_len <= max_lag) {
        throw DataError("sample_moment_vector: series length " + std::to_string(t_len) +
                        " does not exceed the largest lag " + std::to_string(max_lag));
    }
    MomentVector out;
    out.values.assign(spec.dim(), 0.0);
    double acc = 0.0;
    for (const double x : v) acc += x;
    out.values[0] = acc / static_cast<double>(t_len);
    for (std::size_t j = 0; j < spec.lags.size(); ++j) {
        const std::size_t lag = static_cast<std::size_t>(spec.lags[j]);
        acc = 0.0;
        for (std::size_t t = lag; t < t_len; ++t) acc += v[t] * v[t - lag];
        out.values[j + 1] = acc / static_cast<double>(t_len);
    }
    return out;
}

FsvParams initial_values(const VolSeries& series, double q, int m) {
    if (!(q > 0.0)) throw std::invalid_argument("initial_values: q must be > 0");
    if (m < 2) throw std::invalid_argument("initial_values: m must be >= 2");
    const auto& v = series.values;
    require_positive_series(v, "initial_values");
    const std::size_t t_len = v.size();
    if (t_len <= static_cast<std::size_t>(m) + 1) {
        throw DataError("initial_values: series too short for m = " + std::to_string(m));
    }
    std::vector<double> lv(t_len);
    for (std::size_t i = 0; i < t_len; ++i) lv[i] = std::log(v[i]);

    // gamma_h = (T-m)^{-1} sum_{t<=T-m} |ln v_{t+h} - ln v_t|^q, common count
    // across h so the regression points share their noise scale.
    const std::size_t count = t_len - static_cast<std::size_t>(m);
    std::vector<double> ln_h(m), ln_g(m);
    for (int h = 1; h <= m; ++h) {
        double acc = 0.0;
        for (std::size_t t = 0; t < count; ++t) {
            acc += std::pow(std::abs(lv[t + static_cast<std::size_t>(h)] - lv[t]), q);
        }
        const double gamma_h = acc / static_cast<double>(count);
        if (!(gamma_h > 0.0)) {
            throw DataError("initial_values: degenerate scaling regression (flat log series)");
        }
        ln_h[h - 1] = std::log(static_cast<double>(h));
        ln_g[h - 1] = std::log(gamma_h);
    }
    const double mx = mean(ln_h);
    const double my = mean(ln_g);
    double sxx = 0.0;
    double sxy = 0.0;
    for (int i = 0; i < m; ++i) {
        sxx += (ln_h[i] - mx) * (ln_h[i] - mx);
        sxy += (ln_h[i] - mx) * (ln_g[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    const ParamBounds bounds;
    const double kq = std::pow(2.0, 0.5 * q) * std::tgamma(0.5 * (q + 1.0)) / std::sqrt(M_PI);
    const double h_hat = clamp_box(slope / q, bounds.lower[3], bounds.upper[3]);
    const double nu_hat =
        clamp_box(std::exp((intercept - std::log(kq)) / q), bounds.lower[2], bounds.upper[2]);

    const double var_lv = variance(lv);
    if (!(var_lv > 0.0)) {
        throw DataError("initial_values: log series has zero variance");
    }
    // kappa(0) = nu^2 Gamma(1+2H) / (2 lambda^{2H}) = var(ln v), in log space.
    const double log_lambda =
        (std::log(nu_hat * nu_hat * std::tgamma(1.0 + 2.0 * h_hat)) - std::log(2.0 * var_lv)) /
        (2.0 * h_hat);
    const double lambda_hat = clamp_box(std::exp(log_lambda), bounds.lower[1], bounds.upper[1]);
    const double xi_hat = clamp_box(mean(v), bounds.lower[0], bounds.upper[0]);
    return FsvParams(xi_hat, lambda_hat, nu_hat, h_hat);
}

double gmm_objective(const VolSeries& series, const FsvParams& params, const Matrix& weight,
                     const MomentSpec& spec) {
    spec.validate();
    const std::size_t p = spec.dim();
    if (weight.rows != p || weight.cols != p) {
        throw std::invalid_argument("gmm_objective: weight matrix dimension mismatch");
    }
    const auto sample = sample_moment_vector(series, spec).values;
    const auto model = model_moment_vector(CovKernel::fsv(params), params.xi, spec).values;
    std::vector<double> diff(p);
    for (std::size_t i = 0; i < p; ++i) diff[i] = sample[i] - model[i];
    return std::max(quad_form(diff, weight, diff), 0.0);
}

namespace detail {

double parzen_weight(double x) {
    x = std::abs(x);
    if (x <= 0.5) return 1.0 - 6.0 * x * x + 6.0 * x * x * x;
    if (x <= 1.0) {
        const double y = 1.0 - x;
        return 2.0 * y * y * y;
    }
    return 0.0;
}

double bartlett_weight(double x) {
    x = std::abs(x);
    return x < 1.0 ? 1.0 - x : 0.0;
}

Arma11 arma11_css(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 10) return {0.0, 0.0, n > 1 ? variance(x) : 0.0};
    auto residual = [&](const std::vector<double>& p) {
        std::vector<double> r(n - 1);
        double eps = 0.0;
        for (std::size_t t = 1; t < n; ++t) {
            eps = x[t] - p[0] * x[t - 1] - p[1] * eps;
            r[t - 1] = eps;
        }
        return r;
    };
    // Moment start: gamma_2 / gamma_1 estimates the AR root.
    const double g1 = autocovariance(x, 1);
    const double g2 = autocovariance(x, 2);
    const double rho0 = std::abs(g1) > 0.0 ? clamp_box(g2 / g1, -0.9, 0.9) : 0.0;
    NlsOptions opt;
    const NlsResult fit =
        nls_minimize(residual, {rho0, 0.0}, {-0.998, -0.998}, {0.998, 0.998}, opt);
    return {fit.x[0], fit.x[1], fit.objective / static_cast<double>(n - 1)};
}

double andrews_bandwidth(const std::vector<double>& column, HacKernel kernel, std::size_t t_len) {
    const double upper = std::floor(std::pow(static_cast<double>(t_len), 0.45));
    std::vector<double> x = column;
    const double mu = mean(x);
    for (double& xi : x) xi -= mu;
    if (!(variance(x) > 0.0)) return 1.0;

    const Arma11 a = arma11_css(x);
    const double denom = 1.0 - a.rho * a.rho;
    const double g0 = a.sigma2 * (1.0 + 2.0 * a.rho * a.psi + a.psi * a.psi) / denom;
    const double g1 = a.sigma2 * (1.0 + a.rho * a.psi) * (a.rho + a.psi) / denom;
    const double s0 = g0 + 2.0 * g1 / (1.0 - a.rho);
    if (!(std::abs(s0) > 0.0)) return 1.0;

    double st;
    if (kernel == HacKernel::Parzen) {
        const double one_m = 1.0 - a.rho;
        const double s2 = 2.0 * g1 * (1.0 + a.rho) / (one_m * one_m * one_m);
        const double alpha2 = (s2 / s0) * (s2 / s0);
        st = 2.6614 * std::pow(alpha2 * static_cast<double>(t_len), 0.2);
    } else {
        const double s1 = 2.0 * g1 / ((1.0 - a.rho) * (1.0 - a.rho));
        const double alpha1 = (s1 / s0) * (s1 / s0);
        st = 1.1447 * std::cbrt(alpha1 * static_cast<double>(t_len));
    }
    if (!std::isfinite(st)) st = 1.0;
    return clamp_box(st, 1.0, std::max(1.0, upper));
}

}  // namespace detail

Matrix hac_covariance(const Matrix& residuals, const HacConfig& hac) {
    const std::size_t rows = residuals.rows;
    const std::size_t p = residuals.cols;
    if (rows < 2 || p < 1) {
        throw std::invalid_argument("hac_covariance: need at least 2 residual rows");
    }
    for (const double x : residuals.data) {
        if (!std::isfinite(x)) throw std::invalid_argument("hac_covariance: non-finite residual");
    }

    auto gamma_at = [&](std::size_t lag) {
        Matrix g(p, p);
        for (std::size_t t = 0; t + lag < rows; ++t) {
            for (std::size_t i = 0; i < p; ++i) {
                const double ri = residuals(t, i);
                for (std::size_t j = 0; j < p; ++j) g(i, j) += ri * residuals(t + lag, j);
            }
        }
        for (double& x : g.data) x /= static_cast<double>(rows);
        return g;
    };

    Matrix s = gamma_at(0);
    if (!(trace(s) > 0.0)) {
        throw NumericError("hac_covariance: residuals have zero variance");
    }

    double bandwidth;
    if (hac.bandwidth == BandwidthRule::Fixed) {
        if (hac.fixed_bandwidth < 1 || static_cast<std::size_t>(hac.fixed_bandwidth) >= rows) {
            throw std::invalid_argument("hac_covariance: fixed bandwidth must be in [1, rows)");
        }
        bandwidth = hac.fixed_bandwidth;
    } else {
        std::vector<double> col(rows);
        for (std::size_t t = 0; t < rows; ++t) col[t] = residuals(t, 0);
        bandwidth = detail::andrews_bandwidth(col, hac.kernel, rows);
    }

    for (std::size_t lag = 1; lag < rows && static_cast<double>(lag) < bandwidth; ++lag) {
        const double x = static_cast<double>(lag) / bandwidth;
        const double w = hac.kernel == HacKernel::Parzen ? detail::parzen_weight(x)
                                                         : detail::bartlett_weight(x);
        if (w <= 0.0) continue;
        const Matrix g = gamma_at(lag);
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) s(i, j) += w * (g(i, j) + g(j, i));
        }
    }
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
            const double avg = 0.5 * (s(i, j) + s(j, i));
            s(i, j) = avg;
            s(j, i) = avg;
        }
    }
    return s;
}

StdErrors standard_errors(const Matrix& weight, const Matrix& sigma, const Matrix& jacobian,
                          std::size_t t_len) {
    const std::size_t p = sigma.rows;
    if (sigma.cols != p || weight.rows != p || weight.cols != p || jacobian.rows != p ||
        jacobian.cols != 4 || t_len < 1) {
        throw std::invalid_argument("standard_errors: dimension mismatch");
    }
    // Final-iteration pairing W = Sigma^{-1} (modulo the ridge) collapses the
    // sandwich to the efficient form; detect it instead of trusting a flag.
    const Matrix ws = matmul(weight, sigma);
    double fro = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double d = ws(i, j) - (i == j ? 1.0 : 0.0);
            fro += d * d;
        }
    }
    const bool efficient = std::sqrt(fro) < 1e-6 * std::sqrt(static_cast<double>(p));

    const Matrix jw = matmul(transpose(jacobian), weight);  // 4 x p
    const Matrix b = matmul(jw, jacobian);                  // J'WJ
    const auto eig = sym_eigenvalues(b);
    if (!(eig.front() > 0.0)) {
        throw NumericError(
            "standard_errors: J'WJ is singular; nu and lambda are not separately "
            "identified at this estimate (they enter the moments nearly through their ratio)");
    }
    if (eig.back() / eig.front() > 1e10) {
        std::cerr << "fsv: warning: J'WJ condition number " << eig.back() / eig.front()
                  << "; nu and lambda are near-collinear, standard errors may be unstable\n";
    }
    const Matrix binv = spd_inverse(b);
    Matrix vcov;
    if (efficient) {
        vcov = binv;
    } else {
        const Matrix c = matmul(matmul(jw, sigma), transpose(jw));  // J'W Sigma W J
        vcov = matmul(matmul(binv, c), binv);
    }
    for (double& x : vcov.data) x /= static_cast<double>(t_len);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            const double avg = 0.5 * (vcov(i, j) + vcov(j, i));
            vcov(i, j) = avg;
            vcov(j, i) = avg;
        }
    }
    StdErrors out{{}, vcov};
    for (std::size_t i = 0; i < 4; ++i) out.se[i] = std::sqrt(std::max(vcov(i, i), 0.0));
    return out;
}

JTest j_test(double objective_at_opt, std::size_t t_len, int n_conditions, int n_params) {
    if (n_conditions <= n_params) {
        throw std::invalid_argument("j_test: no overidentifying restrictions");
    }
    const double stat = static_cast<double>(t_len) * std::max(objective_at_opt, 0.0);
    const int dof = n_conditions - n_params;
    return {stat, dof, chi2_sf(stat, dof)};
}

std::pair<double, double> hurst_ci_log(double h_hat, double se_h, double level) {
    if (!(h_hat > 0.0) || !(se_h >= 0.0) || !(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("hurst_ci_log: need h_hat > 0, se_h >= 0, level in (0,1)");
    }
    const double z = normal_quantile(0.5 + 0.5 * level);
    const double w = z * se_h / h_hat;
    return {h_hat * std::exp(-w), h_hat * std::exp(w)};
}

GmmFit fit_gmm(const VolSeries& series, const GmmConfig& config) {
    config.spec.validate();
    if (config.max_iterations < 1) {
        throw std::invalid_argument("fit_gmm: max_iterations must be >= 1");
    }
    const auto& v = series.values;
    require_positive_series(v, "fit_gmm");
    const std::size_t t_len = v.size();
    const std::size_t p = config.spec.dim();
    const std::size_t max_lag = static_cast<std::size_t>(config.spec.lags.back());
    if (t_len < max_lag + 2) {
        throw DataError("fit_gmm: series shorter than maximum lag plus two");
    }

    const auto sample = sample_moment_vector(series, config.spec).values;
    std::vector<double> theta = config.init_overrides
                                    ? clamp_theta(*config.init_overrides, config.bounds)
                                    : clamp_theta(initial_values(series), config.bounds);
    std::mt19937_64 rng(config.restart_seed);

    Matrix w = Matrix::identity(p);
    Matrix sigma;
    bool have_sigma = false;
    std::vector<double> obj_trace;
    NlsResult last;
    for (int it = 1; it <= config.max_iterations; ++it) {
        last = minimize_whitened(sample, w, theta, config, rng);
        obj_trace.push_back(last.objective);
        const bool settled = it > 1 && rel_sup_change(last.x, theta) < config.tol;
        theta = last.x;
        if (settled) break;
        if (it < config.max_iterations) {
            sigma = hac_covariance(residual_matrix(v, theta, config.spec), config.hac);
            Matrix ridged = sigma;
            const double ridge = 1e-12 * trace(sigma);
            for (std::size_t i = 0; i < p; ++i) ridged(i, i) += ridge;
            w = spd_inverse(ridged);
            have_sigma = true;
        }
    }
    if (!have_sigma) {
        sigma = hac_covariance(residual_matrix(v, theta, config.spec), config.hac);
    }

    // Jacobian of the corrected model moments, forward differences.
    Matrix jac(p, 4);
    const auto g0 = model_values(theta, config.spec);
    for (std::size_t j = 0; j < 4; ++j) {
        double h = std::max(1e-6 * std::abs(theta[j]), 1e-8);
        if (theta[j] + h > config.bounds.upper[j]) h = -h;
        auto xj = theta;
        xj[j] += h;
        const auto gj = model_values(xj, config.spec);
        for (std::size_t i = 0; i < p; ++i) jac(i, j) = (gj[i] - g0[i]) / h;
    }
    const StdErrors errs = standard_errors(w, sigma, jac, t_len);

    GmmFit fit{to_params(theta)};
    fit.vcov = errs.vcov;
    fit.se = errs.se;
    fit.objective_trace = std::move(obj_trace);
    fit.weight_matrix = std::move(w);
    fit.converged = last.converged;
    fit.config = config;
    fit.j_dof = static_cast<int>(p) - 4;
    if (fit.j_dof >= 1) {
        const JTest jt = j_test(last.objective, t_len, static_cast<int>(p), 4);
        fit.j_stat = jt.stat;
        fit.j_pvalue = jt.pvalue;
    } else {
        fit.j_stat = std::numeric_limits<double>::quiet_NaN();
        fit.j_pvalue = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

}  // namespace fsv
