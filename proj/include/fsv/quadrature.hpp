#pragma once

// Adaptive 15-point Gauss-Kronrod quadrature over finite intervals, plus the
// endpoint-singularity substitutions used by the moment integrals. All nodes
// are interior, so integrable endpoint singularities are evaluated nowhere.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "fsv/errors.hpp"

namespace fsv {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;   // absolute error estimate
    int panels = 0;
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss (positive half; last entry is
// the center node).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kGk15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGauss7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gk15_panel(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resk = fc * kGk15Weights[7];
    double resg = fc * kGauss7Weights[3];
    double resabs = std::abs(resk);
    double fv1[7], fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGk15Nodes[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += kGk15Weights[j] * (f1 + f2);
        resabs += kGk15Weights[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) resg += kGauss7Weights[(j - 1) / 2] * (f1 + f2);
    }
    const double reskh = resk * 0.5;
    double resasc = kGk15Weights[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += kGk15Weights[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
    }
    const double habs = std::abs(half);
    resasc *= habs;
    resabs *= habs;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(err, 50.0 * eps * resabs);
    }
    return Panel{a, b, resk * half, err};
}

}  // namespace detail

// Integrates f over [a, b], bisecting the worst panel until the summed error
// estimate drops below max(abs_tol, rel_tol * |integral|). Throws
// QuadratureError carrying the achieved error when the panel budget or
// machine-width panels are hit first.
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol,
                     int max_panels = 4000) {
    QuadResult out;
    if (a == b) return out;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::priority_queue<detail::Panel> queue;
    detail::Panel first = detail::gk15_panel(f, a, b);
    double total_value = first.value;
    double total_error = first.error;
    double frozen_error = 0.0;  // error of panels too narrow to split further
    queue.push(first);
    int panels = 1;
    const double eps = std::numeric_limits<double>::epsilon();
    auto tolerance = [&] {
        return std::max(abs_tol, rel_tol * std::abs(total_value));
    };
    while (total_error > tolerance() && panels < max_panels && !queue.empty()) {
        detail::Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const double scale = std::max({std::abs(worst.a), std::abs(worst.b), 1.0});
        if (worst.b - worst.a < 64.0 * eps * scale) {
            frozen_error += worst.error;
            continue;
        }
        detail::Panel left = detail::gk15_panel(f, worst.a, mid);
        detail::Panel right = detail::gk15_panel(f, mid, worst.b);
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++panels;
    }
    // Panels frozen at machine width cannot improve; fail only when the
    // excess error sits in panels we stopped splitting for budget reasons.
    if (total_error > tolerance() && frozen_error < total_error) {
        throw QuadratureError("adaptive quadrature: tolerance not reached",
                              tolerance(), total_error);
    }
    out.value = sign * total_value;
    out.error = total_error;
    out.panels = panels;
    return out;
}

// ∫_a^b f(x) dx where f looks like smooth((x-a)^q) near a with 0 < q <= 1:
// substituting x = a + u^{1/q} turns the composite cusp into a smooth factor
// times the integrable weight u^{1/q-1}.
template <class F>
QuadResult integrate_left_cusp(F&& f, double a, double b, double q, double abs_tol,
                               double rel_tol, int max_panels = 4000) {
    const double inv_q = 1.0 / q;
    const double upper = std::pow(b - a, q);
    auto g = [&](double u) {
        const double x = a + std::pow(u, inv_q);
        return f(x) * inv_q * std::pow(u, inv_q - 1.0);
    };
    return integrate(g, 0.0, upper, abs_tol, rel_tol, max_panels);
}

// Mirror image: f looks like smooth((b-x)^q) near b.
template <class F>
QuadResult integrate_right_cusp(F&& f, double a, double b, double q, double abs_tol,
                                double rel_tol, int max_panels = 4000) {
    auto g = [&](double x) { return f(a + b - x); };
    return integrate_left_cusp(g, a, b, q, abs_tol, rel_tol, max_panels);
}

}  // namespace fsv
