// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Fox H-function and Meijer G-function of a positive real argument,
// evaluated by numerical Mellin-Barnes contour integration.
//
//   H^{m,n}_{p,q}[z] = 1/(2 pi i) int_L Theta(w) z^{-w} dw
//
//   Theta(w) = prod_{j<=m} G(b_j + B_j w) prod_{j<=n} G(1 - a_j - A_j w)
//            / prod_{j>m} G(1 - b_j - B_j w) prod_{j>n} G(a_j + A_j w)
//
// The contour starts on the real axis between the two pole families and
// leaves along two mirror-image rays. With a* > 0 the rays are vertical;
// with a* <= 0 they are tilted towards the side where Theta decays
// (right for Delta < 0, left for Delta > 0), which realizes the loop
// contours on which the function is defined in that regime.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>

#include "egkcap/error.hpp"
#include "egkcap/special_functions.hpp"

namespace egkcap {

/// One gamma-factor coefficient pair: (a_j, A_j) or (b_j, B_j).
struct GammaPair {
    double coeff = 0.0;
    double slope = 1.0;
};

/// Index quadruple and coefficient lists of one Fox H-function instance.
/// p and q are the lengths of upper and lower.
struct FoxHSpec {
    int m = 0;
    int n = 0;
    std::vector<GammaPair> upper;
    std::vector<GammaPair> lower;
};

enum class FoxHErrorKind {
    InvalidIndices,
    NonPositiveSlope,
    CoincidentPoles,
    NoSeparatingContour,
    NoConvergentSector,
};

inline const char* to_string(FoxHErrorKind kind)
{
    switch (kind) {
    case FoxHErrorKind::InvalidIndices: return "invalid-indices";
    case FoxHErrorKind::NonPositiveSlope: return "non-positive-slope";
    case FoxHErrorKind::CoincidentPoles: return "coincident-poles";
    case FoxHErrorKind::NoSeparatingContour: return "no-separating-contour";
    case FoxHErrorKind::NoConvergentSector: return "no-convergent-sector";
    }
    return "unknown";
}

class FoxHValidationError : public DomainError {
public:
    FoxHValidationError(FoxHErrorKind kind, const std::string& detail)
        : DomainError(std::string("Fox H validation failed (") + to_string(kind) + "): " + detail), kind_(kind)
    {
    }
    FoxHErrorKind kind() const noexcept { return kind_; }

private:
    FoxHErrorKind kind_;
};

/// Integration path. All fields have working defaults.
struct ContourSpec {
    /// Real part where the path crosses the real axis. Empty selects the
    /// real saddle of the numerator for the requested argument.
    std::optional<double> offset;
    /// Initial truncation of each ray; 0 derives it from the integrand decay.
    double half_extent = 0.0;
    /// Lower bound on the total number of quadrature nodes.
    int node_count = 64;
    /// Cap for the adaptive doubling of half_extent on vertical rays.
    double max_half_extent = 640.0;
    /// Cap for tilted rays, which travel further before decaying.
    double max_ray_length = 20000.0;
    /// Relative tolerance for the truncated tail.
    double tolerance = 1e-12;
    /// Integrate the lower ray independently and report Im H.
    bool check_conjugate = true;
    /// On vertical routes, allow the line to move past simple poles (their
    /// residues are added back) when that removes cancellation.
    bool cross_poles = true;
    /// Log of a constant multiplying H. It enters the integrand before
    /// exponentiation, so large gamma normalizations cancel in log space.
    double log_prefactor = 0.0;
};

enum class ContourRoute { Vertical, TiltedRight, TiltedLeft, Empty };

/// Convergence indicators and the pole-free strip of a validated spec.
struct FoxHConvergence {
    double a_star = 0.0;  // sum of numerator slopes minus denominator slopes
    double delta = 0.0;   // sum B_j - sum A_j
    double mu = 0.0;      // sum b_j - sum a_j + (p - q)/2
    double strip_lo = -std::numeric_limits<double>::infinity();
    double strip_hi = std::numeric_limits<double>::infinity();
    ContourRoute route = ContourRoute::Vertical;
    double sector_half_angle = 0.0; // |arg z| bound for the vertical route, radians
};

struct ValidatedFoxH {
    FoxHSpec spec;
    FoxHConvergence convergence;
    ContourSpec default_contour;
};

/// Value of one contour evaluation with its diagnostics.
struct FoxHValue {
    double value = 0.0;
    double error_estimate = 0.0;
    double imag_residual = 0.0;
    double offset = 0.0;
    double tilt = 0.0;        // angle between rays and the vertical, radians
    double half_extent = 0.0; // ray length actually integrated
    int nodes = 0;
    double condition = 1.0;   // int |integrand| / |value|
};

namespace detail {

inline constexpr double kPoleSpacingFloor = 1e-6;
inline constexpr double kLogUnderflow = -745.0;

// log Gamma without principal-branch bookkeeping; exp() of the result is
// exact, which is all the contour integrand needs.
inline Complex ln_gamma_kernel(Complex z)
{
    using std::numbers::pi;
    if (z.real() < 0.0) {
        const bool lower = z.imag() < 0.0;
        const Complex w = lower ? std::conj(z) : z;
        const Complex r = std::log(pi) - ln_sin_pi_upper(w) - ln_gamma_kernel(1.0 - w);
        return lower ? std::conj(r) : r;
    }
    if (z.real() >= kStirlingShift || std::abs(z.imag()) >= 2.0 * kStirlingShift) {
        return stirling_ln_gamma(z);
    }
    Complex prod = 1.0;
    while (z.real() < kStirlingShift) {
        prod *= z;
        z += 1.0;
    }
    return stirling_ln_gamma(z) - std::log(prod);
}

struct MellinKernel {
    const FoxHSpec& spec;
    double lnz;
    double log_scale = 0.0;

    Complex log_value(Complex w) const
    {
        Complex acc = log_scale - w * lnz;
        const int p = static_cast<int>(spec.upper.size());
        const int q = static_cast<int>(spec.lower.size());
        for (int j = 0; j < q; ++j) {
            const auto& g = spec.lower[j];
            acc += j < spec.m ? ln_gamma_kernel(g.coeff + g.slope * w) : -ln_gamma_kernel(1.0 - g.coeff - g.slope * w);
        }
        for (int j = 0; j < p; ++j) {
            const auto& g = spec.upper[j];
            acc += j < spec.n ? ln_gamma_kernel(1.0 - g.coeff - g.slope * w) : -ln_gamma_kernel(g.coeff + g.slope * w);
        }
        return acc;
    }

    Complex log_derivative(Complex w) const
    {
        Complex acc = -lnz;
        const int p = static_cast<int>(spec.upper.size());
        const int q = static_cast<int>(spec.lower.size());
        for (int j = 0; j < q; ++j) {
            const auto& g = spec.lower[j];
            acc += j < spec.m ? g.slope * digamma_complex(g.coeff + g.slope * w)
                              : g.slope * digamma_complex(1.0 - g.coeff - g.slope * w);
        }
        for (int j = 0; j < p; ++j) {
            const auto& g = spec.upper[j];
            acc += j < spec.n ? -g.slope * digamma_complex(1.0 - g.coeff - g.slope * w)
                              : -g.slope * digamma_complex(g.coeff + g.slope * w);
        }
        return acc;
    }

    // log|Theta(c) z^{-c}| on the real axis. Denominator factors whose
    // argument falls below 1 are frozen there so their zeros cannot pull
    // the minimum into a spurious well.
    double log_real_profile(double c) const
    {
        const int p = static_cast<int>(spec.upper.size());
        const int q = static_cast<int>(spec.lower.size());
        double acc = log_scale - c * lnz;
        for (int j = 0; j < q; ++j) {
            const auto& g = spec.lower[j];
            if (j < spec.m) {
                acc += std::lgamma(g.coeff + g.slope * c);
            } else {
                acc -= std::lgamma(std::max(1.0 - g.coeff - g.slope * c, 1.0));
            }
        }
        for (int j = 0; j < p; ++j) {
            const auto& g = spec.upper[j];
            if (j < spec.n) {
                acc += std::lgamma(1.0 - g.coeff - g.slope * c);
            } else {
                acc -= std::lgamma(std::max(g.coeff + g.slope * c, 1.0));
            }
        }
        return acc;
    }
};

struct GaussRules {
    std::array<double, 32> x32{};
    std::array<double, 32> w32{};
    std::array<double, 16> x16{};
    std::array<double, 16> w16{};

    GaussRules()
    {
        fill<32>(x32, w32);
        fill<16>(x16, w16);
    }

    template <unsigned N, class A>
    static void fill(A& x, A& w)
    {
        using rule = boost::math::quadrature::gauss<double, N>;
        const auto& ab = rule::abscissa();
        const auto& wt = rule::weights();
        std::size_t k = 0;
        for (std::size_t i = 0; i < ab.size(); ++i) {
            x[k] = ab[i];
            w[k] = wt[i];
            ++k;
            if (ab[i] != 0.0) {
                x[k] = -ab[i];
                w[k] = wt[i];
                ++k;
            }
        }
    }
};

inline const GaussRules& gauss_rules()
{
    static const GaussRules rules;
    return rules;
}

// Running sums along one ray, scaled by exp(-scale) to avoid overflow.
struct RaySums {
    Complex h32 = 0.0;
    Complex h16 = 0.0;
    Complex m32 = 0.0; // moment: integrand times w
    Complex m16 = 0.0;
    double l1 = 0.0;
    double l1m = 0.0;
    int nodes = 0;
};

struct MellinOutcome {
    Complex h = 0.0;
    Complex hw = 0.0;
    double disc_h = 0.0;
    double disc_hw = 0.0;
    double tail_h = 0.0;
    double tail_hw = 0.0;
    double l1_h = 0.0;
    double l1_hw = 0.0;
    double offset = 0.0;
    double tilt = 0.0;
    double length = 0.0;
    int nodes = 0;
};

class RayIntegrator {
public:
    RayIntegrator(const MellinKernel& kernel, double offset, double theta, double scale, bool with_moment,
                  double h_max)
        : kernel_(kernel), c_(offset), dir_(std::polar(1.0, theta)), scale_(scale), moment_(with_moment), h_max_(h_max)
    {
    }

    Complex point(double tau, bool upper) const
    {
        const Complex d = upper ? dir_ : std::conj(dir_);
        return c_ + tau * d;
    }

    // integrate from tau_a to tau_b on one ray
    void integrate(double tau_a, double tau_b, bool upper, RaySums& sums, int max_nodes) const
    {
        const auto& rules = gauss_rules();
        const Complex d = upper ? dir_ : std::conj(dir_);
        double tau = tau_a;
        while (tau < tau_b) {
            double h = std::min(h_max_, tau_b - tau);
            for (int it = 0; it < 3; ++it) {
                const double rate = std::max(std::abs(kernel_.log_derivative(c_ + tau * d)),
                                             std::abs(kernel_.log_derivative(c_ + (tau + h) * d)));
                const double h_new = std::min(h, kStepBudget / std::max(rate, 1e-300));
                if (h_new >= h) break;
                h = h_new;
            }
            h = std::max(h, 1e-12);
            const double half = 0.5 * h;
            const double mid = tau + half;
            for (std::size_t k = 0; k < 32; ++k) {
                const double t = mid + half * rules.x32[k];
                const Complex w = c_ + t * d;
                const Complex f = std::exp(kernel_.log_value(w) - scale_);
                const double wk = half * rules.w32[k];
                sums.h32 += wk * f;
                sums.l1 += wk * std::abs(f);
                if (moment_) {
                    sums.m32 += wk * f * w;
                    sums.l1m += wk * std::abs(f * w);
                }
            }
            for (std::size_t k = 0; k < 16; ++k) {
                const double t = mid + half * rules.x16[k];
                const Complex w = c_ + t * d;
                const Complex f = std::exp(kernel_.log_value(w) - scale_);
                const double wk = half * rules.w16[k];
                sums.h16 += wk * f;
                if (moment_) sums.m16 += wk * f * w;
            }
            sums.nodes += 48;
            if (sums.nodes > max_nodes) {
                throw NumericalError("eval_foxh: node budget exhausted before the contour tail was reached");
            }
            tau += h;
        }
    }

    // estimated |int_T^inf f dtau| from the local exponential decay rate
    double tail(double tau) const
    {
        const Complex w = point(tau, true);
        const double mag = std::exp(kernel_.log_value(w).real() - scale_);
        const double rate = -(kernel_.log_derivative(w) * dir_).real();
        if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
        return mag / rate;
    }

    double tail_moment(double tau) const
    {
        const Complex w = point(tau, true);
        const double mag = std::exp(kernel_.log_value(w).real() - scale_) * std::abs(w);
        const double rate = -(kernel_.log_derivative(w) * dir_).real() - 1.0 / std::max(tau, 1.0);
        if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
        return mag / rate;
    }

    static constexpr double kStepBudget = 16.0;

private:
    const MellinKernel& kernel_;
    double c_;
    Complex dir_;
    double scale_;
    bool moment_;
    double h_max_;
};

struct RayScan {
    double peak = -std::numeric_limits<double>::infinity();
    double length = 0.0;
    bool decayed = false;
};

// March along the upper ray until the integrand has dropped far below its peak.
inline RayScan scan_ray(const MellinKernel& kernel, double c, double theta, double max_length)
{
    constexpr double drop = 46.0;
    const Complex dir = std::polar(1.0, theta);
    RayScan scan;
    double tau = 0.02;
    double peak_tau = 0.0;
    while (tau <= max_length) {
        const Complex w = c + tau * dir;
        const double lv = kernel.log_value(w).real();
        if (lv > scan.peak) {
            scan.peak = lv;
            peak_tau = tau;
        }
        if (tau > peak_tau && lv < scan.peak - drop) {
            const double slope = (kernel.log_derivative(w) * dir).real();
            if (slope < 0.0) {
                scan.length = tau;
                scan.decayed = true;
                return scan;
            }
        }
        tau += std::max(0.05, 0.08 * tau);
    }
    scan.length = max_length;
    return scan;
}

} // namespace detail

namespace detail {

inline bool same_pair(const GammaPair& x, const GammaPair& y)
{
    return x.coeff == y.coeff && x.slope == y.slope;
}

// Remove Gamma factors that appear identically in numerator and denominator.
// The function is unchanged, but spurious poles no longer pin the contour.
inline FoxHSpec cancel_common_factors(const FoxHSpec& spec)
{
    std::vector<GammaPair> up_num(spec.upper.begin(), spec.upper.begin() + spec.n);
    std::vector<GammaPair> up_den(spec.upper.begin() + spec.n, spec.upper.end());
    std::vector<GammaPair> lo_num(spec.lower.begin(), spec.lower.begin() + spec.m);
    std::vector<GammaPair> lo_den(spec.lower.begin() + spec.m, spec.lower.end());
    // G(b + B w) in the numerator against G(a + A w) in the denominator
    for (auto it = lo_num.begin(); it != lo_num.end();) {
        auto hit = std::find_if(up_den.begin(), up_den.end(), [&](const GammaPair& g) { return same_pair(g, *it); });
        if (hit != up_den.end()) {
            up_den.erase(hit);
            it = lo_num.erase(it);
        } else {
            ++it;
        }
    }
    // G(1 - a - A w) in the numerator against G(1 - b - B w) in the denominator
    for (auto it = up_num.begin(); it != up_num.end();) {
        auto hit = std::find_if(lo_den.begin(), lo_den.end(), [&](const GammaPair& g) { return same_pair(g, *it); });
        if (hit != lo_den.end()) {
            lo_den.erase(hit);
            it = up_num.erase(it);
        } else {
            ++it;
        }
    }
    FoxHSpec out;
    out.m = static_cast<int>(lo_num.size());
    out.n = static_cast<int>(up_num.size());
    out.upper = up_num;
    out.upper.insert(out.upper.end(), up_den.begin(), up_den.end());
    out.lower = lo_num;
    out.lower.insert(out.lower.end(), lo_den.begin(), lo_den.end());
    return out;
}

} // namespace detail

/// Check indices, slopes and pole separation; report convergence
/// indicators and a feasible default contour.
inline ValidatedFoxH validate_foxh(const FoxHSpec& spec)
{
    const int p = static_cast<int>(spec.upper.size());
    const int q = static_cast<int>(spec.lower.size());
    if (spec.n < 0 || spec.n > p || spec.m < 0 || spec.m > q) {
        std::ostringstream os;
        os << "need 0 <= n <= p and 0 <= m <= q, got m=" << spec.m << " n=" << spec.n << " p=" << p << " q=" << q;
        throw FoxHValidationError(FoxHErrorKind::InvalidIndices, os.str());
    }
    for (const auto& g : spec.upper) {
        if (!(g.slope > 0.0) || !std::isfinite(g.slope) || !std::isfinite(g.coeff)) {
            throw FoxHValidationError(FoxHErrorKind::NonPositiveSlope, "upper slopes A_j must be positive and finite");
        }
    }
    for (const auto& g : spec.lower) {
        if (!(g.slope > 0.0) || !std::isfinite(g.slope) || !std::isfinite(g.coeff)) {
            throw FoxHValidationError(FoxHErrorKind::NonPositiveSlope, "lower slopes B_j must be positive and finite");
        }
    }

    FoxHConvergence conv;
    double sum_a = 0.0;
    double sum_b = 0.0;
    double sum_A = 0.0;
    double sum_B = 0.0;
    for (int j = 0; j < p; ++j) {
        const auto& g = spec.upper[j];
        conv.a_star += j < spec.n ? g.slope : -g.slope;
        sum_a += g.coeff;
        sum_A += g.slope;
    }
    for (int j = 0; j < q; ++j) {
        const auto& g = spec.lower[j];
        conv.a_star += j < spec.m ? g.slope : -g.slope;
        sum_b += g.coeff;
        sum_B += g.slope;
    }
    conv.delta = sum_B - sum_A;
    conv.mu = sum_b - sum_a + 0.5 * (p - q);

    ValidatedFoxH out{detail::cancel_common_factors(spec), conv, ContourSpec{}};
    if (out.spec.m == 0 && out.spec.n == 0) {
        out.convergence.route = ContourRoute::Empty;
        return out;
    }

    const FoxHSpec& rs = out.spec;
    for (int j = 0; j < rs.m; ++j) {
        conv.strip_lo = std::max(conv.strip_lo, -rs.lower[j].coeff / rs.lower[j].slope);
    }
    for (int j = 0; j < rs.n; ++j) {
        conv.strip_hi = std::min(conv.strip_hi, (1.0 - rs.upper[j].coeff) / rs.upper[j].slope);
    }

    if (!(conv.strip_hi - conv.strip_lo > detail::kPoleSpacingFloor)) {
        // look for an actual collision inside the overlap
        const double lo = conv.strip_hi - 1e-9;
        const double hi = conv.strip_lo + 1e-9;
        for (int j = 0; j < rs.m; ++j) {
            const auto& lb = rs.lower[j];
            for (int i = 0; i < rs.n; ++i) {
                const auto& ua = rs.upper[i];
                for (int k = 0; k < 10000; ++k) {
                    const double left_pole = -(lb.coeff + k) / lb.slope;
                    if (left_pole < lo - 1.0) break;
                    // nearest right pole of family i
                    const double l = std::round(left_pole * ua.slope - 1.0 + ua.coeff);
                    if (l < 0.0) continue;
                    const double right_pole = (1.0 - ua.coeff + l) / ua.slope;
                    if (right_pole > hi + 1.0) continue;
                    if (std::abs(right_pole - left_pole) < detail::kPoleSpacingFloor) {
                        std::ostringstream os;
                        os << "pole of Gamma(b_" << j + 1 << " + B_" << j + 1 << " w) meets pole of Gamma(1 - a_" << i + 1
                           << " - A_" << i + 1 << " w) at w = " << left_pole
                           << "; perturb the parameters by about 1e-4";
                        throw FoxHValidationError(FoxHErrorKind::CoincidentPoles, os.str());
                    }
                }
            }
        }
        std::ostringstream os;
        os << "pole families overlap (left poles up to " << conv.strip_lo << ", right poles from " << conv.strip_hi
           << "); no straight separating contour";
        throw FoxHValidationError(FoxHErrorKind::NoSeparatingContour, os.str());
    }

    if (conv.a_star > 0.0) {
        conv.route = ContourRoute::Vertical;
        conv.sector_half_angle = std::min(std::numbers::pi, 0.5 * std::numbers::pi * conv.a_star);
    } else if (conv.delta < 0.0) {
        conv.route = ContourRoute::TiltedRight;
    } else if (conv.delta > 0.0) {
        conv.route = ContourRoute::TiltedLeft;
    } else {
        std::ostringstream os;
        os << "a* = " << conv.a_star << " <= 0 with Delta = 0: neither a vertical line nor a loop contour converges";
        throw FoxHValidationError(FoxHErrorKind::NoConvergentSector, os.str());
    }

    ContourSpec contour;
    if (std::isfinite(conv.strip_lo) && std::isfinite(conv.strip_hi)) {
        contour.offset = 0.5 * (conv.strip_lo + conv.strip_hi);
    } else if (std::isfinite(conv.strip_hi)) {
        contour.offset = conv.strip_hi - 0.5;
    } else {
        contour.offset = conv.strip_lo + 0.5;
    }
    contour.half_extent = 40.0;
    contour.node_count = 64;
    out.convergence = conv;
    out.default_contour = contour;
    return out;
}

namespace detail {

inline double choose_offset(const ValidatedFoxH& v, const MellinKernel& kernel)
{
    const auto& conv = v.convergence;
    auto f = [&](double c) { return kernel.log_real_profile(c); };
    if (std::isfinite(conv.strip_lo) && std::isfinite(conv.strip_hi)) {
        const double width = conv.strip_hi - conv.strip_lo;
        return boost::math::tools::brent_find_minima(f, conv.strip_lo + 0.1 * width, conv.strip_hi - 0.1 * width, 30)
            .first;
    }
    // half-open strip: widen the bracket until the minimum is interior
    const bool open_left = !std::isfinite(conv.strip_lo);
    const double edge = open_left ? conv.strip_hi - 0.05 : conv.strip_lo + 0.05;
    for (double reach = 40.0;; reach *= 4.0) {
        const double lo = open_left ? edge - reach : edge;
        const double hi = open_left ? edge : edge + reach;
        const double c = boost::math::tools::brent_find_minima(f, lo, hi, 30).first;
        const double far = open_left ? lo : hi;
        if (std::abs(c - far) > 0.01 * reach || reach > 1e5) return c;
    }
}

// Theta(w) ~ sign exp(log_abs) (w - w0)^(-order) near w0.
struct LaurentLead {
    int order = 0;
    double log_abs = 0.0;
    double sign = 1.0;
};

inline void add_gamma_factor(LaurentLead& t, double alpha, double sigma, double w0, bool numerator)
{
    const double x = alpha + sigma * w0;
    const double k = std::round(-x);
    const double dir = numerator ? 1.0 : -1.0;
    if (k >= 0.0 && std::abs(x + k) < 1e-9 * std::max(1.0, k)) {
        // G(-k + sigma d) ~ (-1)^k / (k! sigma d)
        t.order += numerator ? 1 : -1;
        t.log_abs += dir * (-std::lgamma(k + 1.0) - std::log(std::abs(sigma)));
        t.sign *= (std::fmod(k, 2.0) == 1.0 ? -1.0 : 1.0) * (sigma < 0.0 ? -1.0 : 1.0);
        return;
    }
    t.log_abs += dir * std::lgamma(x);
    if (x < 0.0 && std::fmod(std::floor(-x), 2.0) == 0.0) t.sign = -t.sign;
}

inline LaurentLead laurent_lead(const FoxHSpec& spec, double w0)
{
    LaurentLead t;
    const int p = static_cast<int>(spec.upper.size());
    const int q = static_cast<int>(spec.lower.size());
    for (int j = 0; j < q; ++j) {
        const auto& g = spec.lower[j];
        if (j < spec.m) {
            add_gamma_factor(t, g.coeff, g.slope, w0, true);
        } else {
            add_gamma_factor(t, 1.0 - g.coeff, -g.slope, w0, false);
        }
    }
    for (int j = 0; j < p; ++j) {
        const auto& g = spec.upper[j];
        if (j < spec.n) {
            add_gamma_factor(t, 1.0 - g.coeff, -g.slope, w0, true);
        } else {
            add_gamma_factor(t, g.coeff, g.slope, w0, false);
        }
    }
    return t;
}

struct CrossedPole {
    double w = 0.0;
    double residue = 0.0; // residue of Theta(w) z^{-w}
};

struct ShiftedLine {
    double offset = 0.0;
    double orientation = 0.0; // +1 moved right of the strip, -1 left, 0 not moved
    std::vector<CrossedPole> poles;
};

// Poles of one family beyond the strip edge, nearest first, merged when they coincide.
inline std::vector<double> outer_poles(const FoxHSpec& spec, bool right, int count)
{
    std::vector<double> w;
    if (right) {
        for (int j = 0; j < spec.n; ++j) {
            for (int k = 0; k < count; ++k) w.push_back((1.0 - spec.upper[j].coeff + k) / spec.upper[j].slope);
        }
        std::sort(w.begin(), w.end());
    } else {
        for (int j = 0; j < spec.m; ++j) {
            for (int k = 0; k < count; ++k) w.push_back(-(spec.lower[j].coeff + k) / spec.lower[j].slope);
        }
        std::sort(w.begin(), w.end(), std::greater<>());
    }
    std::vector<double> merged;
    for (double x : w) {
        if (merged.empty() || std::abs(x - merged.back()) > 1e-9 * std::max(1.0, std::abs(x))) merged.push_back(x);
    }
    if (static_cast<int>(merged.size()) > count) merged.resize(count);
    return merged;
}

// With the line inside the strip, a large |log z| leaves a pole next to the
// line that dominates the value; the integral then cancels against it.
// Moving the line past such poles and adding their residues back removes the
// cancellation. Candidates are scored by the larger of the line profile and
// the largest residue, both in log scale.
inline ShiftedLine choose_shifted_line(const ValidatedFoxH& v, const MellinKernel& kernel, double c0)
{
    constexpr int kMaxCrossed = 16;
    constexpr double kGain = 1.0;
    ShiftedLine best{c0, 0.0, {}};
    double best_cost = kernel.log_real_profile(c0);
    auto f = [&](double c) { return kernel.log_real_profile(c); };
    for (const bool right : {true, false}) {
        if (!std::isfinite(right ? v.convergence.strip_hi : v.convergence.strip_lo)) continue;
        const auto poles = outer_poles(v.spec, right, kMaxCrossed + 1);
        std::vector<CrossedPole> crossed;
        double worst_residue = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < poles.size(); ++i) {
            const LaurentLead lead = laurent_lead(v.spec, poles[i]);
            if (lead.order >= 2) break;
            double residue = 0.0;
            if (lead.order == 1) {
                const double log_res = lead.log_abs + kernel.log_scale - poles[i] * kernel.lnz;
                if (log_res > 700.0) break;
                residue = lead.sign * std::exp(log_res);
                worst_residue = std::max(worst_residue, log_res);
            }
            crossed.push_back({poles[i], residue});
            const double gap = std::abs(poles[i + 1] - poles[i]);
            if (gap < kPoleSpacingFloor) continue;
            const double lo = std::min(poles[i], poles[i + 1]) + 0.05 * gap;
            const double hi = std::max(poles[i], poles[i + 1]) - 0.05 * gap;
            const auto [c, profile] = boost::math::tools::brent_find_minima(f, lo, hi, 30);
            const double cost = std::max(profile, worst_residue);
            if (cost < best_cost - kGain) {
                best_cost = cost;
                best = {c, right ? 1.0 : -1.0, crossed};
            }
        }
    }
    return best;
}

inline MellinOutcome integrate_on_route(const ValidatedFoxH& v, const MellinKernel& kernel, double c, double theta,
                                        const ContourSpec& contour, bool with_moment, double max_length)
{
    constexpr int kMaxNodesPerRay = 1 << 21;
    const RayScan scan = scan_ray(kernel, c, theta, max_length);
    if (scan.peak + std::log(2.0 * scan.length) < kLogUnderflow) {
        // |H| <= (1/pi) int |f| dtau underflows: the value is exactly 0 in double precision
        MellinOutcome zero;
        zero.offset = c;
        zero.tilt = std::abs(0.5 * std::numbers::pi - theta);
        zero.length = scan.length;
        return zero;
    }
    double length = contour.half_extent > 0.0 ? contour.half_extent : scan.length;
    length = std::min(std::max(length, 1.0), max_length);
    const double scale = std::isfinite(scan.peak) ? scan.peak : 0.0;

    const int panels_per_ray = std::max(1, contour.node_count / 64);
    const double h_max = std::min(2.0, length / panels_per_ray);
    const RayIntegrator ray(kernel, c, theta, scale, with_moment, h_max);

    RaySums up;
    RaySums down;
    double done = 0.0;
    double tail_h = 0.0;
    double tail_hw = 0.0;
    for (;;) {
        ray.integrate(done, length, true, up, kMaxNodesPerRay);
        if (contour.check_conjugate) ray.integrate(done, length, false, down, kMaxNodesPerRay);
        done = length;
        tail_h = ray.tail(length);
        tail_hw = with_moment ? ray.tail_moment(length) : 0.0;
        const double mag = std::abs(up.h32) + std::numeric_limits<double>::min();
        const bool tail_ok = tail_h <= contour.tolerance * mag && (!with_moment || tail_hw <= contour.tolerance * (std::abs(up.m32) + mag));
        if (tail_ok) break;
        if (length >= max_length) {
            std::ostringstream os;
            os << "eval_foxh: truncated tail " << tail_h / mag << " (relative) exceeds tolerance "
               << contour.tolerance << " at the half-extent cap " << max_length;
            throw NumericalError(os.str());
        }
        length = std::min(2.0 * length, max_length);
    }

    if (!contour.check_conjugate) {
        down.h32 = std::conj(up.h32);
        down.h16 = std::conj(up.h16);
        down.m32 = std::conj(up.m32);
        down.m16 = std::conj(up.m16);
        down.l1 = up.l1;
        down.l1m = up.l1m;
    }

    const Complex dir = std::polar(1.0, theta);
    const Complex two_pi_i(0.0, 2.0 * std::numbers::pi);
    const double factor = std::exp(scale);
    auto combine = [&](Complex a_up, Complex a_down) { return (a_up * dir - a_down * std::conj(dir)) / two_pi_i * factor; };

    MellinOutcome out;
    out.h = combine(up.h32, down.h32);
    out.disc_h = std::abs(out.h - combine(up.h16, down.h16));
    out.l1_h = (up.l1 + down.l1) * factor / (2.0 * std::numbers::pi);
    out.tail_h = 2.0 * tail_h * factor / (2.0 * std::numbers::pi);
    if (with_moment) {
        out.hw = combine(up.m32, down.m32);
        out.disc_hw = std::abs(out.hw - combine(up.m16, down.m16));
        out.l1_hw = (up.l1m + down.l1m) * factor / (2.0 * std::numbers::pi);
        out.tail_hw = 2.0 * tail_hw * factor / (2.0 * std::numbers::pi);
    }
    out.offset = c;
    out.tilt = std::abs(0.5 * std::numbers::pi - theta);
    out.length = length;
    out.nodes = up.nodes + (contour.check_conjugate ? down.nodes : 0);
    if (!std::isfinite(out.h.real()) || !std::isfinite(out.hw.real())) {
        throw NumericalError("eval_foxh: contour integral overflowed");
    }
    (void)v;
    return out;
}

inline MellinOutcome integrate_mellin_barnes(const ValidatedFoxH& v, double z, const ContourSpec& contour,
                                             bool with_moment)
{
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("eval_foxh: argument z must be positive and finite");
    }
    const auto& conv = v.convergence;
    const MellinKernel kernel{v.spec, std::log(z), contour.log_prefactor};

    double c;
    if (contour.offset) {
        c = *contour.offset;
        if (!(c > conv.strip_lo && c < conv.strip_hi)) {
            std::ostringstream os;
            os << "eval_foxh: offset " << c << " does not separate the pole families (strip " << conv.strip_lo << ", "
               << conv.strip_hi << ")";
            throw DomainError(os.str());
        }
    } else {
        c = choose_offset(v, kernel);
    }

    if (conv.route == ContourRoute::Vertical) {
        ShiftedLine line{c, 0.0, {}};
        if (!contour.offset && contour.cross_poles) line = choose_shifted_line(v, kernel, c);
        MellinOutcome out =
            integrate_on_route(v, kernel, line.offset, 0.5 * std::numbers::pi, contour, with_moment, contour.max_half_extent);
        // moving the line right leaves the crossed poles on its left: H = I - sum Res
        for (const auto& pole : line.poles) {
            out.h -= line.orientation * pole.residue;
            out.hw -= line.orientation * pole.w * pole.residue;
            out.l1_h += std::abs(pole.residue);
            out.l1_hw += std::abs(pole.w * pole.residue);
        }
        return out;
    }

    // Tilted rays: the steeper the tilt, the faster the decay, but also the
    // larger the intermediate growth for small |z|. Take the steepest tilt
    // whose cancellation stays acceptable.
    constexpr double kAcceptableCondition = 1e4;
    const double sign = conv.route == ContourRoute::TiltedRight ? -1.0 : 1.0;
    // On a half-open strip the real-axis minimum can sit far from the poles,
    // where rays start deep in a region of large intermediate growth; a line
    // next to the finite edge is tried as well.
    std::vector<double> offsets = {c};
    if (!contour.offset && std::isfinite(conv.strip_lo) != std::isfinite(conv.strip_hi)) {
        // an offset away from simple fractions keeps the ray start off the
        // zeros of denominator gammas
        constexpr double kEdgeGap = 0.4321;
        const double edge = std::isfinite(conv.strip_hi) ? conv.strip_hi - kEdgeGap : conv.strip_lo + kEdgeGap;
        if (std::abs(edge - c) > 0.25) offsets.push_back(edge);
    }
    std::optional<MellinOutcome> best;
    double best_cond = std::numeric_limits<double>::infinity();
    std::string last_error;
    for (double offset : offsets) {
        bool have_any = false;
        for (double tilt = std::numbers::pi / 4.0; tilt > 2e-4; tilt *= 0.5) {
            const double theta = 0.5 * std::numbers::pi + sign * tilt;
            try {
                MellinOutcome out =
                    integrate_on_route(v, kernel, offset, theta, contour, with_moment, contour.max_ray_length);
                have_any = true;
                const double cond = out.l1_h / std::max(std::abs(out.h.real()), std::numeric_limits<double>::min());
                if (cond < best_cond) {
                    best_cond = cond;
                    best = out;
                }
                if (cond <= kAcceptableCondition) break;
            } catch (const NumericalError& e) {
                last_error = e.what();
                if (have_any) break;
            }
        }
        if (best_cond <= kAcceptableCondition) break;
    }
    if (!best) {
        throw NumericalError("eval_foxh: no tilted contour converged: " + last_error);
    }
    return *best;
}

inline FoxHValue finish(const MellinOutcome& o, Complex value, double disc, double tail, double l1)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    FoxHValue r;
    r.value = value.real();
    r.imag_residual = std::abs(value.imag());
    // the 16-point comparison overstates the 32-point error; scale it down as
    // adaptive Gauss-Kronrod codes do
    const double scaled = l1 > 0.0 ? l1 * std::min(1.0, std::pow(200.0 * disc / l1, 1.5)) : disc;
    r.error_estimate = tail + std::min(disc, scaled) + 64.0 * eps * l1;
    r.offset = o.offset;
    r.tilt = o.tilt;
    r.half_extent = o.length;
    r.nodes = o.nodes;
    r.condition = l1 / std::max(std::abs(r.value), std::numeric_limits<double>::min());
    const double bound = 1e-8 * std::abs(r.value) + 1e-12 + 64.0 * eps * l1;
    if (r.imag_residual > bound) {
        std::ostringstream os;
        os << "eval_foxh: imaginary residue " << r.imag_residual << " exceeds " << bound
           << " for a real-valued instance";
        throw NumericalError(os.str());
    }
    return r;
}

} // namespace detail

/// Evaluate a validated Fox H-function at z > 0.
inline FoxHValue eval_foxh(const ValidatedFoxH& v, double z, const ContourSpec& contour = {})
{
    if (v.convergence.route == ContourRoute::Empty) {
        return FoxHValue{};
    }
    const auto o = detail::integrate_mellin_barnes(v, z, contour, false);
    return detail::finish(o, o.h, o.disc_h, o.tail_h, o.l1_h);
}

inline FoxHValue eval_foxh(const FoxHSpec& spec, double z, const ContourSpec& contour = {})
{
    return eval_foxh(validate_foxh(spec), z, contour);
}

/// H(z) together with its Mellin moment 1/(2 pi i) int w Theta(w) z^{-w} dw,
/// which equals -z dH/dz. Both come from a single contour sweep.
inline std::pair<FoxHValue, FoxHValue> eval_foxh_with_moment(const ValidatedFoxH& v, double z,
                                                            const ContourSpec& contour = {})
{
    if (v.convergence.route == ContourRoute::Empty) {
        return {FoxHValue{}, FoxHValue{}};
    }
    const auto o = detail::integrate_mellin_barnes(v, z, contour, true);
    return {detail::finish(o, o.h, o.disc_h, o.tail_h, o.l1_h), detail::finish(o, o.hw, o.disc_hw, o.tail_hw, o.l1_hw)};
}

/// Meijer G-function: the Fox H-function with unit slopes.
inline FoxHValue eval_meijer_g(int m, int n, const std::vector<double>& upper, const std::vector<double>& lower,
                               double z, const ContourSpec& contour = {})
{
    FoxHSpec spec;
    spec.m = m;
    spec.n = n;
    for (double a : upper) spec.upper.push_back({a, 1.0});
    for (double b : lower) spec.lower.push_back({b, 1.0});
    return eval_foxh(spec, z, contour);
}

} // namespace egkcap
