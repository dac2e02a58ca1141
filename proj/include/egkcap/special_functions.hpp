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

// Scalar special functions used by the Mellin-Barnes engine, the EGK
// fading model and the auxiliary capacity kernels.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "egkcap/error.hpp"

namespace egkcap {

using Complex = std::complex<double>;

inline constexpr double kEulerGamma = std::numbers::egamma;

namespace detail {

// B_{2k} / (2k (2k-1)) for k = 1..10
inline constexpr std::array<double, 10> kStirlingCoeffs = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

// B_{2k} / (2k) for k = 1..10, digamma asymptotic series
inline constexpr std::array<double, 10> kDigammaCoeffs = {
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
};

inline constexpr double kStirlingShift = 12.0;

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

inline Complex stirling_ln_gamma(Complex z)
{
    const Complex inv = 1.0 / z;
    const Complex inv2 = inv * inv;
    Complex series = 0.0;
    Complex power = inv;
    for (double c : kStirlingCoeffs) {
        series += c * power;
        power *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

// log(sin(pi z)) for Im z > 0, on the branch that is analytic in the whole
// upper half-plane: sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}) with
// |e^{2 i pi z}| < 1, so the principal log of the last factor never wraps.
inline Complex ln_sin_pi_upper(Complex z)
{
    using std::numbers::pi;
    const Complex i(0.0, 1.0);
    return -i * pi * z + std::log(1.0 - std::exp(2.0 * i * pi * z)) - std::log(2.0) + i * (pi / 2.0);
}

// Principal-branch log-gamma for Re z >= 0.
inline Complex ln_gamma_right(Complex z)
{
    if (z.real() >= kStirlingShift || std::abs(z.imag()) >= 2.0 * kStirlingShift) {
        return stirling_ln_gamma(z);
    }
    Complex shift_log = 0.0;
    while (z.real() < kStirlingShift) {
        shift_log += std::log(z);
        z += 1.0;
    }
    return stirling_ln_gamma(z) - shift_log;
}

} // namespace detail

/// Principal-branch log Gamma(z).
///
/// Stirling's series with ten Bernoulli terms after shifting Re z up to 12;
/// the left half-plane is reached by reflection. The imaginary part follows
/// the principal branch (continuous off the negative real axis, equal to
/// -pi * ceil(-x) on the negative real axis).
inline Complex ln_gamma_complex(Complex z)
{
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw DomainError("ln_gamma_complex: non-finite argument");
    }
    if (z.imag() == 0.0 && detail::is_nonpositive_integer(z.real())) {
        throw DomainError("ln_gamma_complex: pole at non-positive integer " + std::to_string(z.real()));
    }
    Complex result;
    if (z.real() >= 0.0) {
        result = detail::ln_gamma_right(z);
    } else if (z.imag() == 0.0) {
        const double x = z.real();
        result = Complex(std::lgamma(x), -std::numbers::pi * std::ceil(-x));
    } else {
        const bool lower = z.imag() < 0.0;
        const Complex w = lower ? std::conj(z) : z;
        Complex r = std::log(std::numbers::pi) - detail::ln_sin_pi_upper(w) - detail::ln_gamma_right(1.0 - w);
        result = lower ? std::conj(r) : r;
    }
    if (!std::isfinite(result.real()) || !std::isfinite(result.imag())) {
        throw NumericalError("ln_gamma_complex: result overflow");
    }
    return result;
}

/// Complex digamma psi(z) = d/dz ln Gamma(z); used for contour step control.
inline Complex digamma_complex(Complex z)
{
    using std::numbers::pi;
    if (z.imag() == 0.0 && detail::is_nonpositive_integer(z.real())) {
        throw DomainError("digamma_complex: pole");
    }
    if (z.real() < 0.0) {
        // psi(z) = psi(1 - z) - pi cot(pi z)
        const Complex cot = std::abs(z.imag()) > 20.0
                                ? Complex(0.0, z.imag() > 0 ? -1.0 : 1.0)
                                : std::cos(pi * z) / std::sin(pi * z);
        return digamma_complex(1.0 - z) - pi * cot;
    }
    Complex acc = 0.0;
    while (std::abs(z) < 2.0 * detail::kStirlingShift && z.real() < detail::kStirlingShift) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    const Complex inv = 1.0 / z;
    const Complex inv2 = inv * inv;
    Complex series = 0.0;
    Complex power = inv2;
    for (double c : detail::kDigammaCoeffs) {
        series += c * power;
        power *= inv2;
    }
    return acc + std::log(z) - 0.5 * inv - series;
}

/// Exponential integral Ei(x), principal value; Ei(x) = -E1(-x) for x < 0.
inline double exp_integral_ei(double x)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (x == 0.0) {
        throw DomainError("exp_integral_ei: logarithmic singularity at x = 0");
    }
    if (!std::isfinite(x)) {
        if (x < 0) return 0.0;
        throw DomainError("exp_integral_ei: +inf");
    }
    if (x < -1.0) {
        // -E1(|x|) by the modified Lentz continued fraction
        const double a = -x;
        double b = a + 1.0;
        double c = 1.0 / std::numeric_limits<double>::min();
        double d = 1.0 / b;
        double h = d;
        for (int i = 1; i < 10000; ++i) {
            const double an = -static_cast<double>(i) * i;
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            const double del = c * d;
            h *= del;
            if (std::abs(del - 1.0) < eps) {
                return -h * std::exp(-a);
            }
        }
        throw NumericalError("exp_integral_ei: continued fraction did not converge");
    }
    if (x <= 40.0) {
        // C + ln|x| + sum x^k / (k k!)
        double term = 1.0;
        double sum = 0.0;
        for (int k = 1; k < 1000; ++k) {
            term *= x / k;
            const double add = term / k;
            sum += add;
            if (std::abs(add) < eps * std::abs(sum)) {
                return kEulerGamma + std::log(std::abs(x)) + sum;
            }
        }
        throw NumericalError("exp_integral_ei: series did not converge");
    }
    // e^x / x * sum k! / x^k
    double sum = 1.0;
    double term = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double prev = term;
        term *= k / x;
        if (term < eps * sum) break;
        if (term > prev) break;
        sum += term;
    }
    return std::exp(x) * sum / x;
}

/// Cosine integral Ci(x) = C + ln x + int_0^x (cos t - 1)/t dt, x > 0.
inline double cosine_integral(double x)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (!(x > 0.0)) {
        throw DomainError("cosine_integral: argument must be positive");
    }
    if (!std::isfinite(x)) return 0.0;
    if (x <= 2.0) {
        const double x2 = x * x;
        double term = 1.0;
        double sum = 0.0;
        for (int k = 1; k < 500; ++k) {
            term *= -x2 / ((2.0 * k - 1.0) * (2.0 * k));
            const double add = term / (2.0 * k);
            sum += add;
            if (std::abs(add) < eps * std::abs(sum)) {
                return kEulerGamma + std::log(x) + sum;
            }
        }
        throw NumericalError("cosine_integral: series did not converge");
    }
    // Ci(x) = -Re E1(i x), E1 by complex continued fraction
    Complex b(1.0, x);
    Complex c = 1.0 / std::numeric_limits<double>::min();
    Complex d = 1.0 / b;
    Complex h = d;
    for (int i = 1; i < 100000; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const Complex del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) {
            h *= Complex(std::cos(x), -std::sin(x));
            return -h.real();
        }
    }
    throw NumericalError("cosine_integral: continued fraction did not converge");
}

/// Generalized hypergeometric 2F2(a1, a2; b1, b2; x) by its Pochhammer series.
inline double hyp2f2(double a1, double a2, double b1, double b2, double x, double rel_tol = 1e-12,
                     int max_terms = 20000)
{
    if (detail::is_nonpositive_integer(b1) || detail::is_nonpositive_integer(b2)) {
        throw DomainError("hyp2f2: lower parameter is a non-positive integer");
    }
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < max_terms; ++k) {
        term *= (a1 + k) * (a2 + k) / ((b1 + k) * (b2 + k)) * x / (k + 1.0);
        sum += term;
        if (term == 0.0) return sum;
        // only stop once the terms are shrinking
        const double ratio = std::abs((a1 + k + 1) * (a2 + k + 1) / ((b1 + k + 1) * (b2 + k + 1)) * x / (k + 2.0));
        if (ratio < 1.0 && std::abs(term) < rel_tol * std::abs(sum)) {
            return sum;
        }
    }
    throw NumericalError("hyp2f2: series did not reach tolerance within " + std::to_string(max_terms) + " terms");
}

namespace detail {

// Mode and window of g(u) = alpha u - e^u - b e^{-beta u}, the integrand of
// the extended incomplete gamma function after r = e^u.
struct IncGammaLogIntegrand {
    double alpha;
    double b;
    double beta;

    double operator()(double u) const
    {
        double v = alpha * u - std::exp(u);
        if (b != 0.0) v -= b * std::exp(-beta * u);
        return v;
    }
    // g(u0 + d) - g(u0) without cancellation
    double diff(double u0, double d) const
    {
        double v = alpha * d - std::exp(u0) * std::expm1(d);
        if (b != 0.0) v -= b * std::exp(-beta * u0) * std::expm1(-beta * d);
        return v;
    }
    double slope(double u) const
    {
        double v = alpha - std::exp(u);
        if (b != 0.0) v += b * beta * std::exp(-beta * u);
        return v;
    }
};

} // namespace detail

/// Natural log of the extended incomplete gamma function
/// Gamma(alpha, x, b, beta) = int_x^inf r^{alpha-1} exp(-r - b r^{-beta}) dr.
///
/// Integrated in u = ln r, where the exponent is strictly concave; the
/// window is cut where the integrand has fallen by e^-46 from its peak.
inline double log_extended_incomplete_gamma(double alpha, double x, double b, double beta, double rel_tol = 1e-8)
{
    if (!(x >= 0.0) || !(b >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw DomainError("extended_incomplete_gamma: require x >= 0 and b >= 0");
    }
    const bool lower_open = (x == 0.0);
    if (lower_open && alpha <= 0.0 && (b == 0.0 || beta <= 0.0)) {
        throw DivergenceError("extended_incomplete_gamma: integral diverges at r = 0");
    }
    const detail::IncGammaLogIntegrand g{alpha, b, beta};
    const double u_min = lower_open ? -std::numeric_limits<double>::infinity() : std::log(x);

    // g' is strictly decreasing: bracket its root.
    double lo = -1.0;
    double hi = 1.0;
    while (g.slope(lo) < 0.0 && lo > -800.0) lo *= 2.0;
    while (g.slope(hi) > 0.0 && hi < 800.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g.slope(mid) > 0.0 ? lo : hi) = mid;
    }
    double u_peak = 0.5 * (lo + hi);
    if (u_peak < u_min) u_peak = u_min;
    const double g_peak = g(u_peak);
    constexpr double drop = 46.0;

    auto find_edge = [&](double dir) {
        double step = 1.0;
        double inner = u_peak;
        double outer = u_peak + dir * step;
        while (g.diff(u_peak, outer - u_peak) > -drop) {
            inner = outer;
            step *= 2.0;
            outer = u_peak + dir * step;
            if (step > 1e6) break;
        }
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (inner + outer);
            (g.diff(u_peak, mid - u_peak) > -drop ? inner : outer) = mid;
        }
        return outer;
    };

    double u_lo = find_edge(-1.0);
    if (u_lo < u_min) u_lo = u_min;
    const double u_hi = find_edge(1.0);
    if (!(u_hi > u_lo)) {
        // peak sits at the finite lower limit and the integrand drops instantly
        return g_peak + std::log(std::max(u_hi - u_lo, std::numeric_limits<double>::min()));
    }
    const double curvature = std::exp(u_peak) + b * beta * beta * std::exp(-beta * u_peak);
    if (u_peak > u_min && curvature > 1e12) {
        // Laplace's method; the integrand is e^{-1e6} or smaller here, so its O(1/sqrt(curvature)) error is harmless
        return g_peak + 0.5 * std::log(2.0 * std::numbers::pi / curvature);
    }
    // integrate in the offset from the peak so that narrow peaks far from u = 0
    // keep full resolution; split at the peak and check against the whole-window rule
    auto f = [&](double d) { return std::exp(g.diff(u_peak, d)); };
    using rule = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double tol = std::max(rel_tol * 0.1, 1e-12);
    const double d_lo = u_lo - u_peak;
    const double d_hi = u_hi - u_peak;
    double integral = 0.0;
    double whole = 0.0;
    if (d_lo < 0.0 && d_hi > 0.0) {
        integral = rule::integrate(f, d_lo, 0.0, 8, tol) + rule::integrate(f, 0.0, d_hi, 8, tol);
        whole = rule::integrate(f, d_lo, d_hi, 8, tol);
    } else {
        const double mid = 0.5 * (d_lo + d_hi);
        integral = rule::integrate(f, d_lo, mid, 8, tol) + rule::integrate(f, mid, d_hi, 8, tol);
        whole = rule::integrate(f, d_lo, d_hi, 8, tol);
    }
    if (!(integral > 0.0) || !std::isfinite(integral)) {
        throw NumericalError("extended_incomplete_gamma: quadrature failed");
    }
    if (std::abs(integral - whole) > rel_tol * integral) {
        throw NumericalError("extended_incomplete_gamma: tolerance not met");
    }
    return g_peak + std::log(integral);
}

/// Extended incomplete gamma function Gamma(alpha, x, b, beta).
inline double extended_incomplete_gamma(double alpha, double x, double b, double beta, double rel_tol = 1e-8)
{
    const double lv = log_extended_incomplete_gamma(alpha, x, b, beta, rel_tol);
    if (lv > std::log(std::numeric_limits<double>::max())) {
        throw NumericalError("extended_incomplete_gamma: overflow");
    }
    return std::exp(lv);
}

/// Coefficient function phi(p) = U(p)/|p| + U(-p).
inline double phi(double p)
{
    if (p == 0.0 || !std::isfinite(p)) {
        throw DomainError("phi: argument must be non-zero and finite");
    }
    return p > 0.0 ? 1.0 / p : 1.0;
}

} // namespace egkcap
