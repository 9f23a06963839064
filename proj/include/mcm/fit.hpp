#pragma once

// Damped least squares shared by all fitters: adaptive step scaling on
// residual increase, numeric Jacobian, linearized covariance at the optimum.
// Systems here are tiny (<= 6 parameters), so the normal equations are
// solved with plain Gaussian elimination.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mcm {

struct FitOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-9;
    double initial_damping = 1e-3;
};

struct FitOutput {
    std::vector<double> params;
    std::vector<double> errors;       // 1-sigma from the linearized covariance
    std::vector<std::vector<double>> covariance;
    double ssr = 0.0;                 // weighted sum of squared residuals
    int iterations = 0;
    bool converged = false;
};

namespace detail {

// Solve A x = b in place; A is small and symmetric positive (semi)definite.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return true;
}

inline bool invert(const std::vector<std::vector<double>>& a, std::vector<std::vector<double>>& inv) {
    const std::size_t n = a.size();
    inv.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> e(n, 0.0), x;
        e[col] = 1.0;
        if (!solve_linear(a, e, x)) return false;
        for (std::size_t r = 0; r < n; ++r) inv[r][col] = x[r];
    }
    return true;
}

} // namespace detail

// residual_fn(params) must return one weighted residual per data point,
// i.e. sqrt(w_i) * (y_i - f(x_i; params)).
inline FitOutput fit_least_squares(const std::function<std::vector<double>(const std::vector<double>&)>& residual_fn,
                                   std::vector<double> initial, const FitOptions& opt = {}) {
    const std::size_t np = initial.size();
    if (np == 0) throw std::invalid_argument("fit: no parameters");

    auto ssr_of = [](const std::vector<double>& r) {
        double s = 0.0;
        for (double v : r) s += v * v;
        return s;
    };

    FitOutput out;
    out.params = std::move(initial);
    std::vector<double> resid = residual_fn(out.params);
    const std::size_t nd = resid.size();
    if (nd < np) throw std::invalid_argument("fit: fewer data points than parameters");
    out.ssr = ssr_of(resid);

    double damping = opt.initial_damping;
    std::vector<std::vector<double>> jac(nd, std::vector<double>(np, 0.0));

    for (out.iterations = 0; out.iterations < opt.max_iterations; ++out.iterations) {
        // forward-difference Jacobian of the residuals
        for (std::size_t p = 0; p < np; ++p) {
            const double h = 1e-7 * std::max(1.0, std::abs(out.params[p]));
            std::vector<double> shifted = out.params;
            shifted[p] += h;
            const std::vector<double> r2 = residual_fn(shifted);
            for (std::size_t i = 0; i < nd; ++i) jac[i][p] = (r2[i] - resid[i]) / h;
        }

        std::vector<std::vector<double>> jtj(np, std::vector<double>(np, 0.0));
        std::vector<double> jtr(np, 0.0);
        for (std::size_t i = 0; i < nd; ++i) {
            for (std::size_t p = 0; p < np; ++p) {
                jtr[p] += jac[i][p] * resid[i];
                for (std::size_t q = p; q < np; ++q) jtj[p][q] += jac[i][p] * jac[i][q];
            }
        }
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t q = 0; q < p; ++q) jtj[p][q] = jtj[q][p];

        bool stepped = false;
        for (int attempt = 0; attempt < 25; ++attempt) {
            auto damped = jtj;
            for (std::size_t p = 0; p < np; ++p)
                damped[p][p] += damping * std::max(jtj[p][p], 1e-12);
            std::vector<double> rhs(np), step;
            for (std::size_t p = 0; p < np; ++p) rhs[p] = -jtr[p];
            if (!detail::solve_linear(damped, rhs, step)) {
                damping *= 10.0;
                continue;
            }
            std::vector<double> trial = out.params;
            for (std::size_t p = 0; p < np; ++p) trial[p] += step[p];
            const std::vector<double> r_trial = residual_fn(trial);
            const double ssr_trial = ssr_of(r_trial);
            if (std::isfinite(ssr_trial) && ssr_trial <= out.ssr) {
                const double rel = (out.ssr - ssr_trial) / std::max(out.ssr, 1e-300);
                out.params = std::move(trial);
                resid = r_trial;
                out.ssr = ssr_trial;
                damping = std::max(damping * 0.3, 1e-12);
                stepped = true;
                if (rel < opt.relative_tolerance) out.converged = true;
                break;
            }
            damping *= 10.0;
        }
        if (!stepped) {
            out.converged = true; // no improving step exists at any damping
            break;
        }
        if (out.converged) break;
    }

    // covariance = (J^T J)^-1 * ssr / (n - p), Jacobian at the optimum
    for (std::size_t p = 0; p < np; ++p) {
        const double h = 1e-7 * std::max(1.0, std::abs(out.params[p]));
        std::vector<double> shifted = out.params;
        shifted[p] += h;
        const std::vector<double> r2 = residual_fn(shifted);
        for (std::size_t i = 0; i < nd; ++i) jac[i][p] = (r2[i] - resid[i]) / h;
    }
    std::vector<std::vector<double>> jtj(np, std::vector<double>(np, 0.0));
    for (std::size_t i = 0; i < nd; ++i)
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t q = p; q < np; ++q) jtj[p][q] += jac[i][p] * jac[i][q];
    for (std::size_t p = 0; p < np; ++p)
        for (std::size_t q = 0; q < p; ++q) jtj[p][q] = jtj[q][p];

    const double scale = nd > np ? out.ssr / static_cast<double>(nd - np) : 1.0;
    out.errors.assign(np, 0.0);
    if (detail::invert(jtj, out.covariance)) {
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t q = 0; q < np; ++q) out.covariance[p][q] *= scale;
        for (std::size_t p = 0; p < np; ++p)
            out.errors[p] = std::sqrt(std::max(0.0, out.covariance[p][p]));
    } else {
        out.covariance.assign(np, std::vector<double>(np, 0.0));
    }
    return out;
}

} // namespace mcm
