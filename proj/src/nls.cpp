#include "fsv/nls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fsv/linalg.hpp"

namespace fsv {

namespace {

double sum_sq(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

void clamp_to_box(std::vector<double>& x, const std::vector<double>& lo,
                  const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::min(std::max(x[i], lo[i]), hi[i]);
    }
}

// Forward differences; the step flips sign when it would leave the box.
Matrix jacobian(const ResidualFn& residual, const std::vector<double>& x,
                const std::vector<double>& r0, const std::vector<double>& lo,
                const std::vector<double>& hi, const NlsOptions& opt, int& evals) {
    const std::size_t n = x.size();
    const std::size_t m = r0.size();
    Matrix j(m, n);
    std::vector<double> xs = x;
    for (std::size_t i = 0; i < n; ++i) {
        double h = std::max(opt.fd_rel_step * std::abs(x[i]), opt.fd_abs_floor);
        if (x[i] + h > hi[i] && x[i] - h >= lo[i]) h = -h;
        xs[i] = x[i] + h;
        const std::vector<double> r1 = residual(xs);
        ++evals;
        if (r1.size() != m) throw std::invalid_argument("nls: residual size changed");
        for (std::size_t k = 0; k < m; ++k) j(k, i) = (r1[k] - r0[k]) / h;
        xs[i] = x[i];
    }
    return j;
}

}  // namespace

NlsResult nls_minimize(const ResidualFn& residual, std::vector<double> x,
                       const std::vector<double>& lo, const std::vector<double>& hi,
                       const NlsOptions& opt) {
    const std::size_t n = x.size();
    if (lo.size() != n || hi.size() != n) {
        throw std::invalid_argument("nls: bound size mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lo[i] <= hi[i])) throw std::invalid_argument("nls: empty box");
    }
    clamp_to_box(x, lo, hi);

    NlsResult out;
    std::vector<double> r = residual(x);
    ++out.residual_evals;
    double f = sum_sq(r);

    double mu = -1.0;  // damping, initialized from the first Gram diagonal
    bool need_jacobian = true;
    Matrix j, a;
    std::vector<double> g;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        out.iterations = iter + 1;
        if (need_jacobian) {
            j = jacobian(residual, x, r, lo, hi, opt, out.residual_evals);
            a = matmul(transpose(j), j);  // Gram matrix
            g.assign(n, 0.0);
            for (std::size_t k = 0; k < r.size(); ++k) {
                for (std::size_t i = 0; i < n; ++i) g[i] += j(k, i) * r[k];
            }
            need_jacobian = false;
        }
        if (mu < 0.0) {
            double dmax = 0.0;
            for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, a(i, i));
            mu = 1e-3 * std::max(dmax, 1e-30);
        }

        // Gradient projected onto the feasible directions; at an active bound
        // pointing outward the component does not count against convergence.
        double gproj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double gi = g[i];
            if (x[i] <= lo[i] && gi > 0.0) gi = 0.0;
            if (x[i] >= hi[i] && gi < 0.0) gi = 0.0;
            gproj = std::max(gproj, std::abs(gi));
        }
        if (gproj < 1e-14 * (1.0 + f)) {
            out.converged = true;
            break;
        }

        Matrix damped = a;
        for (std::size_t i = 0; i < n; ++i) {
            damped(i, i) += mu * std::max(a(i, i), 1e-12);
        }
        std::vector<double> neg_g(n);
        for (std::size_t i = 0; i < n; ++i) neg_g[i] = -g[i];
        std::vector<double> step;
        bool solved = true;
        try {
            step = solve_spd(damped, neg_g);
        } catch (const std::exception&) {
            solved = false;
        }
        if (!solved) {
            mu *= 10.0;
            continue;
        }

        std::vector<double> xt(n);
        for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + step[i];
        clamp_to_box(xt, lo, hi);
        std::vector<double> delta(n);
        double step_rel = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            delta[i] = xt[i] - x[i];
            step_rel = std::max(step_rel, std::abs(delta[i]) / (std::abs(x[i]) + opt.tol));
        }
        if (step_rel < opt.tol) {
            out.converged = true;
            break;
        }

        // Quadratic model decrease for the projected step.
        double pred = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double aq = 0.0;
            for (std::size_t k = 0; k < n; ++k) aq += a(i, k) * delta[k];
            pred -= delta[i] * (2.0 * g[i] + aq);
        }
        if (pred <= 0.0) {
            mu *= 10.0;
            continue;
        }

        const std::vector<double> rt = residual(xt);
        ++out.residual_evals;
        const double ft = sum_sq(rt);
        const double rho = (f - ft) / pred;
        if (rho > 1e-4) {
            x = xt;
            r = rt;
            f = ft;
            mu = std::max(mu * std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3)), 1e-12);
            need_jacobian = true;
        } else {
            mu *= 4.0;
        }
    }

    out.x = std::move(x);
    out.objective = f;
    return out;
}

}  // namespace fsv
