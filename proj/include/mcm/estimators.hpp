#pragma once

// Statistical procedures used to characterize the simulated measurements:
// count-histogram fitting and threshold choice, binomial interval
// estimation, decay / fringe / inverse-shift / linear regressions, and the
// dummy-image scaling rule. All fitters share the damped least-squares core
// in fit.hpp; error bars come from the linearized covariance at the optimum.

#include "mcm/fit.hpp"
#include "mcm/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcm {

inline double wrap_phase(double x) {
    while (x > kPi) x -= kTwoPi;
    while (x <= -kPi) x += kTwoPi;
    return x;
}

// upper tail of the standard normal
inline double gauss_q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// Double-Gaussian histogram fit and threshold choice
// ---------------------------------------------------------------------------

struct GaussianPairFit {
    bool ok = false;
    std::string message;
    double mu0 = 0.0, sigma0 = 1.0, amp0 = 0.0;
    double mu1 = 0.0, sigma1 = 1.0, amp1 = 0.0;
    double mu0_error = 0.0, mu1_error = 0.0;
    double threshold = 0.0;
    double overlap_error = 0.0;    // min over t of the equal-prior tail weight
    double residual_norm = 0.0;
    double separation() const { return mu1 - mu0; }
};

// Equal-prior misclassification at threshold t.
inline double overlap_objective(double t, double mu0, double s0, double mu1, double s1) {
    return 0.5 * (gauss_q((t - mu0) / s0) + gauss_q((mu1 - t) / s1));
}

// Threshold minimizing the equal-prior tail weight: equate the two scaled
// densities, which is a quadratic in t; fall back to a grid scan if no root
// lands between the means.
inline double optimal_threshold(double mu0, double s0, double mu1, double s1) {
    const double a = 0.5 / (s1 * s1) - 0.5 / (s0 * s0);
    const double b = mu0 / (s0 * s0) - mu1 / (s1 * s1);
    const double c = 0.5 * mu1 * mu1 / (s1 * s1) - 0.5 * mu0 * mu0 / (s0 * s0) - std::log(s0 / s1);
    std::vector<double> candidates;
    if (std::abs(a) < 1e-14) {
        if (std::abs(b) > 1e-300) candidates.push_back(-c / b);
    } else {
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            const double rt = std::sqrt(disc);
            candidates.push_back((-b + rt) / (2.0 * a));
            candidates.push_back((-b - rt) / (2.0 * a));
        }
    }
    double best = 0.5 * (mu0 + mu1);
    double best_q = overlap_objective(best, mu0, s0, mu1, s1);
    for (double t : candidates) {
        if (!(t > mu0 && t < mu1)) continue;
        const double q = overlap_objective(t, mu0, s0, mu1, s1);
        if (q < best_q) {
            best = t;
            best_q = q;
        }
    }
    // refine on a grid in case the analytic root was rejected
    for (int i = 1; i < 400; ++i) {
        const double t = mu0 + (mu1 - mu0) * i / 400.0;
        const double q = overlap_objective(t, mu0, s0, mu1, s1);
        if (q < best_q) {
            best = t;
            best_q = q;
        }
    }
    return best;
}

inline GaussianPairFit fit_double_gaussian(const std::vector<double>& samples, int min_samples = 500) {
    GaussianPairFit fit;
    if (static_cast<int>(samples.size()) < min_samples) {
        fit.message = "too few samples (" + std::to_string(samples.size()) + " < " +
                      std::to_string(min_samples) + ")";
        return fit;
    }

    // histogram with unit bins
    const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = std::floor(*mn_it) - 0.5;
    const double hi = std::ceil(*mx_it) + 0.5;
    const int nbins = static_cast<int>(hi - lo);
    std::vector<double> centers(nbins), counts(nbins, 0.0);
    for (int b = 0; b < nbins; ++b) centers[b] = lo + b + 0.5;
    for (double s : samples) {
        int b = static_cast<int>(std::floor(s - lo));
        b = std::clamp(b, 0, nbins - 1);
        counts[b] += 1.0;
    }

    // initialize by splitting at the midpoint of the sample range
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double split = 0.5 * (sorted[sorted.size() / 20] + sorted[sorted.size() - 1 - sorted.size() / 20]);
    double n0 = 0, n1 = 0, m0 = 0, m1 = 0;
    for (double s : samples) (s < split ? (n0 += 1, m0 += s) : (n1 += 1, m1 += s));
    if (n0 < 10 || n1 < 10) {
        fit.message = "histogram is single-moded around " + std::to_string(split);
        return fit;
    }
    m0 /= n0;
    m1 /= n1;
    double v0 = 0, v1 = 0;
    for (double s : samples) (s < split ? v0 += (s - m0) * (s - m0) : v1 += (s - m1) * (s - m1));
    const double s0_init = std::max(0.5, std::sqrt(v0 / n0));
    const double s1_init = std::max(0.5, std::sqrt(v1 / n1));

    auto model = [&](const std::vector<double>& th, double x) {
        const double g0 = th[2] * std::exp(-0.5 * (x - th[0]) * (x - th[0]) / (th[1] * th[1]));
        const double g1 = th[5] * std::exp(-0.5 * (x - th[3]) * (x - th[3]) / (th[4] * th[4]));
        return g0 + g1;
    };
    // bin counts are Poisson, so weight each bin by 1/count to keep the
    // parameter covariance honest
    auto residuals = [&](const std::vector<double>& th) {
        std::vector<double> r(nbins);
        for (int b = 0; b < nbins; ++b)
            r[b] = (counts[b] - model(th, centers[b])) / std::sqrt(std::max(counts[b], 1.0));
        return r;
    };
    const std::vector<double> init{m0, s0_init, n0 / (s0_init * std::sqrt(kTwoPi)),
                                   m1, s1_init, n1 / (s1_init * std::sqrt(kTwoPi))};
    FitOutput res = fit_least_squares(residuals, init);

    fit.mu0 = res.params[0];
    fit.sigma0 = std::abs(res.params[1]);
    fit.amp0 = res.params[2];
    fit.mu1 = res.params[3];
    fit.sigma1 = std::abs(res.params[4]);
    fit.amp1 = res.params[5];
    fit.mu0_error = res.errors[0];
    fit.mu1_error = res.errors[3];
    fit.residual_norm = std::sqrt(res.ssr);
    if (fit.mu0 > fit.mu1) {
        std::swap(fit.mu0, fit.mu1);
        std::swap(fit.sigma0, fit.sigma1);
        std::swap(fit.amp0, fit.amp1);
        std::swap(fit.mu0_error, fit.mu1_error);
    }
    if (!(fit.sigma0 > 0.0) || !(fit.sigma1 > 0.0) || fit.amp0 <= 0.0 || fit.amp1 <= 0.0 ||
        fit.mu1 - fit.mu0 < fit.sigma0 + fit.sigma1) {
        fit.message = "modes not separated; double-Gaussian fit is degenerate";
        return fit;
    }
    const double area0 = fit.amp0 * fit.sigma0;
    const double area1 = fit.amp1 * fit.sigma1;
    if (std::min(area0, area1) < 0.02 * (area0 + area1)) {
        fit.message = "one component carries almost no weight; histogram is single-moded";
        return fit;
    }
    fit.threshold = optimal_threshold(fit.mu0, fit.sigma0, fit.mu1, fit.sigma1);
    fit.overlap_error = overlap_objective(fit.threshold, fit.mu0, fit.sigma0, fit.mu1, fit.sigma1);
    fit.ok = true;
    return fit;
}

// ---------------------------------------------------------------------------
// Wilson score interval
// ---------------------------------------------------------------------------

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

inline Interval wilson_interval(long successes, long trials, double z = 1.96) {
    if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be > 0");
    if (successes < 0 || successes > trials)
        throw std::invalid_argument("wilson_interval: successes out of range");
    const double n = static_cast<double>(trials);
    const double k = static_cast<double>(successes);
    const double z2 = z * z;
    const double denom = n + z2;
    const double center = (k + 0.5 * z2) / denom;
    const double half = z * std::sqrt(k * (n - k) / n + 0.25 * z2) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Estimate with an attached interval; scaling rules apply to all three.
struct RateEstimate {
    double value = 0.0;
    Interval interval;
    double error_low() const { return value - interval.low; }
    double error_high() const { return interval.high - value; }
};

inline RateEstimate binomial_rate(long successes, long trials, double z = 1.96) {
    RateEstimate e;
    e.value = static_cast<double>(successes) / static_cast<double>(trials);
    e.interval = wilson_interval(successes, trials, z);
    return e;
}

// Dummy-image scaling: measured probability over a long dummy exposure,
// reported per default-length image. The interval scales by the same factor.
inline RateEstimate scale_dummy_rate(const RateEstimate& measured, double dummy_duration_s,
                                     double default_duration_s) {
    if (!(dummy_duration_s > 0.0 && default_duration_s > 0.0))
        throw std::invalid_argument("scale_dummy_rate: durations must be > 0");
    const double f = default_duration_s / dummy_duration_s;
    return {measured.value * f, {measured.interval.low * f, measured.interval.high * f}};
}

// ---------------------------------------------------------------------------
// Exponential decay (per-image loss)
// ---------------------------------------------------------------------------

struct DecayFit {
    double rate = 0.0;       // per index; negative allowed and reported
    double rate_error = 0.0;
    double amplitude = 1.0;
    double residual_norm = 0.0;
    bool converged = false;
};

inline DecayFit fit_exponential_decay(const std::vector<std::pair<double, double>>& series) {
    if (series.size() < 3) throw std::invalid_argument("fit_exponential_decay: need >= 3 points");
    for (const auto& [i, f] : series)
        if (!(f >= 0.0 && f <= 1.0))
            throw std::invalid_argument("fit_exponential_decay: fractions must be in [0, 1]");

    // log-space regression for the starting point, guarded against zeros
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (const auto& [x, y] : series) {
        if (y <= 0.0) continue;
        const double ly = std::log(y);
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
        ++n;
    }
    double r0 = 0.0, a0 = 0.5;
    if (n >= 2 && n * sxx - sx * sx > 1e-12) {
        r0 = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
        a0 = std::exp((sy + r0 * sx) / n);
    } else if (!series.empty()) {
        a0 = std::max(1e-6, series.front().second);
    }

    auto residuals = [&](const std::vector<double>& th) {
        std::vector<double> r(series.size());
        for (std::size_t i = 0; i < series.size(); ++i)
            r[i] = series[i].second - th[0] * std::exp(-th[1] * series[i].first);
        return r;
    };
    FitOutput res = fit_least_squares(residuals, {a0, r0});
    return {res.params[1], res.errors[1], res.params[0], std::sqrt(res.ssr), res.converged};
}

// ---------------------------------------------------------------------------
// Ramsey fringe fit
// ---------------------------------------------------------------------------

struct FringeFit {
    double contrast = 0.0;   // in [0, 1]
    double phase = 0.0;      // radians, wrapped to (-pi, pi]
    double offset = 0.5;
    double contrast_error = 0.0;
    double phase_error = 0.0;
    double offset_error = 0.0;
    double residual_norm = 0.0;
    bool converged = false;
};

// Weighted least squares on P(phi) = offset + (contrast/2) cos(phi - phase).
// weights are 1/sigma^2 per point; empty weights mean equal weighting.
inline FringeFit fit_ramsey_fringe(const std::vector<double>& phases,
                                   const std::vector<double>& fractions,
                                   std::vector<double> weights = {}) {
    if (phases.size() != fractions.size())
        throw std::invalid_argument("fit_ramsey_fringe: size mismatch");
    std::vector<double> distinct = phases;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 4)
        throw std::invalid_argument("fit_ramsey_fringe: need >= 4 distinct phases");
    if (distinct.back() - distinct.front() <= kPi)
        throw std::invalid_argument("fit_ramsey_fringe: phases must cover more than half a period");
    if (weights.empty()) weights.assign(phases.size(), 1.0);
    if (weights.size() != phases.size())
        throw std::invalid_argument("fit_ramsey_fringe: weights size mismatch");

    // offset from the mean, contrast from the range, phase from the discrete
    // Fourier component at the drive period
    const double mean = std::accumulate(fractions.begin(), fractions.end(), 0.0) / fractions.size();
    const auto [mn, mx] = std::minmax_element(fractions.begin(), fractions.end());
    const double c0 = std::clamp(*mx - *mn, 0.0, 1.0);
    double fc = 0.0, fs = 0.0;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        fc += (fractions[i] - mean) * std::cos(phases[i]);
        fs += (fractions[i] - mean) * std::sin(phases[i]);
    }
    const double phase0 = std::atan2(fs, fc);

    auto residuals = [&](const std::vector<double>& th) {
        std::vector<double> r(phases.size());
        for (std::size_t i = 0; i < phases.size(); ++i) {
            const double model = th[0] + 0.5 * th[1] * std::cos(phases[i] - th[2]);
            r[i] = std::sqrt(weights[i]) * (fractions[i] - model);
        }
        return r;
    };
    FitOutput res = fit_least_squares(residuals, {mean, c0, phase0});

    FringeFit fit;
    fit.offset = res.params[0];
    fit.contrast = res.params[1];
    fit.phase = res.params[2];
    fit.offset_error = res.errors[0];
    fit.contrast_error = res.errors[1];
    fit.phase_error = res.errors[2];
    fit.residual_norm = std::sqrt(res.ssr);
    fit.converged = res.converged;
    if (fit.contrast < 0.0) {
        fit.contrast = -fit.contrast;
        fit.phase += kPi;
    }
    fit.phase = wrap_phase(fit.phase);
    fit.contrast = std::clamp(fit.contrast, 0.0, 1.0);
    return fit;
}

// 1/sigma^2 weights for binomial fractions, lightly smoothed so endpoints
// near 0 or 1 keep finite weight.
inline std::vector<double> binomial_weights(const std::vector<double>& fractions,
                                            const std::vector<double>& counts) {
    std::vector<double> w(fractions.size(), 1.0);
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        const double n = counts[i];
        if (n <= 0.0) {
            w[i] = 0.0;
            continue;
        }
        const double p = (fractions[i] * n + 2.0) / (n + 4.0);
        w[i] = n / (p * (1.0 - p));
    }
    return w;
}

// ---------------------------------------------------------------------------
// Site-resolved fringes
// ---------------------------------------------------------------------------

struct SiteFringeData {
    int site = -1;
    std::vector<double> phases;
    std::vector<double> fractions;
    std::vector<double> counts;  // samples per point, for weights
};

struct SiteFringeFit {
    int site = -1;
    FringeFit fit;
};

struct SiteResolvedSummary {
    std::vector<SiteFringeFit> fits;
    std::vector<int> skipped_sites;  // unoccupied or too few phase points
    double mean_contrast = 0.0;
    double phase_std = 0.0;          // about the circular mean
};

inline SiteResolvedSummary site_resolved_fringes(const std::vector<SiteFringeData>& per_site,
                                                 std::size_t min_phase_points = 8) {
    SiteResolvedSummary out;
    for (const SiteFringeData& d : per_site) {
        const double total = std::accumulate(d.counts.begin(), d.counts.end(), 0.0);
        if (d.phases.size() < min_phase_points || total <= 0.0) {
            out.skipped_sites.push_back(d.site);
            continue;
        }
        SiteFringeFit sf;
        sf.site = d.site;
        sf.fit = fit_ramsey_fringe(d.phases, d.fractions, binomial_weights(d.fractions, d.counts));
        out.fits.push_back(sf);
    }
    if (out.fits.empty()) return out;

    double csum = 0.0, sx = 0.0, sy = 0.0;
    for (const auto& f : out.fits) {
        csum += f.fit.contrast;
        sx += std::cos(f.fit.phase);
        sy += std::sin(f.fit.phase);
    }
    out.mean_contrast = csum / out.fits.size();
    const double mean_phase = std::atan2(sy, sx);
    double var = 0.0;
    for (const auto& f : out.fits) {
        const double d = wrap_phase(f.fit.phase - mean_phase);
        var += d * d;
    }
    out.phase_std = out.fits.size() > 1 ? std::sqrt(var / (out.fits.size() - 1)) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Inverse-shift fit (phase vs hiding shift)
// ---------------------------------------------------------------------------

struct InverseShiftFit {
    double coefficient_rad_mhz = 0.0;
    double offset_rad = 0.0;
    double coefficient_error = 0.0;
    double offset_error = 0.0;
    double residual_norm = 0.0;
};

// Least squares on Phi = C / shift + offset; linear in (C, offset), solved
// in closed form on x = 1/shift.
inline InverseShiftFit fit_inverse_shift(const std::vector<double>& shifts_mhz,
                                         const std::vector<double>& phases_rad) {
    if (shifts_mhz.size() != phases_rad.size())
        throw std::invalid_argument("fit_inverse_shift: size mismatch");
    std::vector<double> distinct = shifts_mhz;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
        throw std::invalid_argument("fit_inverse_shift: need >= 3 distinct shifts");
    for (double s : shifts_mhz)
        if (!(s > 0.0)) throw std::invalid_argument("fit_inverse_shift: shifts must be > 0");

    const std::size_t n = shifts_mhz.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 1.0 / shifts_mhz[i];
        sx += x;
        sy += phases_rad[i];
        sxx += x * x;
        sxy += x * phases_rad[i];
    }
    const double det = n * sxx - sx * sx;
    if (det <= 1e-18) throw std::invalid_argument("fit_inverse_shift: degenerate shift values");
    InverseShiftFit fit;
    fit.coefficient_rad_mhz = (n * sxy - sx * sy) / det;
    fit.offset_rad = (sy - fit.coefficient_rad_mhz * sx) / n;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = phases_rad[i] - (fit.coefficient_rad_mhz / shifts_mhz[i] + fit.offset_rad);
        ssr += r * r;
    }
    const double s2 = n > 2 ? ssr / (n - 2) : 0.0;
    fit.coefficient_error = std::sqrt(s2 * n / det);
    fit.offset_error = std::sqrt(s2 * sxx / det);
    fit.residual_norm = std::sqrt(ssr);
    return fit;
}

// Invert the fitted coefficient to a saturation estimate through the
// light-shift closed form.
inline double infer_saturation(double coefficient_rad_mhz, double gamma_angular, double duration_s) {
    const double c_rad_hz = coefficient_rad_mhz * 1e6;
    return c_rad_hz * 8.0 * kTwoPi / (gamma_angular * gamma_angular * duration_s);
}

// ---------------------------------------------------------------------------
// Linear contrast-decay fit
// ---------------------------------------------------------------------------

struct LinearDecayFit {
    double rate_per_s = 0.0;  // slope of (1 - relative contrast) vs time
    double rate_error = 0.0;
    double intercept = 0.0;
    double residual_norm = 0.0;
};

inline LinearDecayFit fit_linear_decay(const std::vector<double>& times_s,
                                       const std::vector<double>& relative_contrast) {
    if (times_s.size() != relative_contrast.size())
        throw std::invalid_argument("fit_linear_decay: size mismatch");
    if (times_s.size() < 3) throw std::invalid_argument("fit_linear_decay: need >= 3 points");
    const std::size_t n = times_s.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = 1.0 - relative_contrast[i];
        sx += times_s[i];
        sy += y;
        sxx += times_s[i] * times_s[i];
        sxy += times_s[i] * y;
    }
    const double det = n * sxx - sx * sx;
    if (det <= 1e-18) throw std::invalid_argument("fit_linear_decay: degenerate time values");
    LinearDecayFit fit;
    fit.rate_per_s = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.rate_per_s * sx) / n;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (1.0 - relative_contrast[i]) - (fit.intercept + fit.rate_per_s * times_s[i]);
        ssr += r * r;
    }
    const double s2 = n > 2 ? ssr / (n - 2) : 0.0;
    fit.rate_error = std::sqrt(s2 * n / det);
    fit.residual_norm = std::sqrt(ssr);
    return fit;
}

} // namespace mcm
