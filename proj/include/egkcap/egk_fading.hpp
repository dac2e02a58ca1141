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

// Extended generalized-K (EGK) composite fading: the instantaneous SNR is
//
//   gamma = mean_snr * (G1^(1/xi) / beta) * (G2^(1/xi_s) / beta_s)
//
// with G1 ~ Gamma(m, 1), G2 ~ Gamma(m_s, 1). beta and beta_s make both
// factors unit-mean, so E[gamma] = mean_snr.

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "egkcap/error.hpp"
#include "egkcap/hypertrans.hpp"
#include "egkcap/special_functions.hpp"

namespace egkcap {

/// Shadowing severity used when a distribution has no shadowing (m_s -> inf).
inline constexpr double kNoShadowingMs = 50.0;

struct EgkParams {
    double m = 1.0;
    double xi = 1.0;
    double m_s = kNoShadowingMs;
    double xi_s = 1.0;
    double mean_snr = 1.0;

    double beta() const { return std::exp(std::lgamma(m + 1.0 / xi) - std::lgamma(m)); }
    double beta_s() const { return std::exp(std::lgamma(m_s + 1.0 / xi_s) - std::lgamma(m_s)); }

    void validate() const
    {
        std::ostringstream os;
        if (!(m >= 0.5) || !std::isfinite(m)) os << "m must be >= 0.5 (got " << m << "); ";
        if (!(m_s >= 0.5) || !std::isfinite(m_s)) os << "m_s must be >= 0.5 (got " << m_s << "); ";
        if (!(xi > 0.0) || !std::isfinite(xi)) os << "xi must be > 0 (got " << xi << "); ";
        if (!(xi_s > 0.0) || !std::isfinite(xi_s)) os << "xi_s must be > 0 (got " << xi_s << "); ";
        if (!(mean_snr > 0.0) || !std::isfinite(mean_snr)) os << "mean_snr must be > 0 (got " << mean_snr << "); ";
        const std::string msg = os.str();
        if (!msg.empty()) throw DomainError("EgkParams: " + msg.substr(0, msg.size() - 2));
    }

    bool operator==(const EgkParams&) const = default;
};

/// log E[gamma^t]; throws when the moment does not exist.
inline double egk_log_moment(const EgkParams& par, double t)
{
    const double a1 = par.m + t / par.xi;
    const double a2 = par.m_s + t / par.xi_s;
    if (!(a1 > 0.0) || !(a2 > 0.0)) {
        throw DomainError("egk_log_moment: moment of order " + std::to_string(t) + " does not exist");
    }
    return t * std::log(par.mean_snr / (par.beta() * par.beta_s())) + std::lgamma(a1) + std::lgamma(a2) -
           std::lgamma(par.m) - std::lgamma(par.m_s);
}

inline double egk_pdf(const EgkParams& par, double gamma)
{
    par.validate();
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw DomainError("egk_pdf: gamma must be positive and finite");
    }
    const double a = par.beta() * par.beta_s() / par.mean_snr;
    const double lambda = par.xi / par.xi_s;
    const double alpha = par.m_s - par.m * lambda;
    const double log_u = par.xi * std::log(a * gamma);
    double log_tail;
    if (log_u < -600.0) {
        // (a gamma)^xi underflows; use the small-argument behaviour of the tail
        if (alpha > 0.0) {
            log_tail = std::lgamma(alpha);
        } else if (alpha < 0.0) {
            log_tail = std::lgamma(-alpha / lambda) - std::log(lambda) + alpha / lambda * log_u;
        } else {
            log_tail = std::log(-log_u / lambda);
        }
    } else {
        log_tail = log_extended_incomplete_gamma(alpha, 0.0, std::exp(log_u), lambda, 1e-10);
    }
    const double log_pdf = std::log(par.xi) - std::lgamma(par.m) - std::lgamma(par.m_s) + par.m * par.xi * std::log(a) +
                           (par.m * par.xi - 1.0) * std::log(gamma) + log_tail;
    return std::exp(log_pdf);
}

/// P(gamma <= x) = E[P(m, (a x)^xi G2^(-xi/xi_s))] with G2 ~ Gamma(m_s, 1) and
/// a = beta beta_s / mean_snr, integrated over v = ln G2.
inline double egk_cdf(const EgkParams& par, double x, double tolerance = 1e-10)
{
    par.validate();
    if (!(x >= 0.0)) throw DomainError("egk_cdf: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (!std::isfinite(x)) return 1.0;
    const double log_ax = std::log(par.beta() * par.beta_s() / par.mean_snr * x);
    const double log_norm = std::lgamma(par.m_s);
    auto f = [&](double v) {
        const double log_arg = par.xi * (log_ax - v / par.xi_s);
        const double inner = log_arg > 700.0 ? 1.0 : boost::math::gamma_p(par.m, std::exp(log_arg));
        return inner * std::exp(par.m_s * v - std::exp(v) - log_norm);
    };
    // the G2 density in v decays like exp(m_s v) on the left and exp(-e^v) on the right
    const double lo = std::log(par.m_s) - 40.0 / par.m_s - 5.0;
    const double hi = std::log(par.m_s + 40.0 + 10.0 * std::sqrt(par.m_s));
    const double centre = std::log(par.m_s);
    using boost::math::quadrature::gauss_kronrod;
    const double left = gauss_kronrod<double, 31>::integrate(f, lo, centre, 12, tolerance);
    const double right = gauss_kronrod<double, 31>::integrate(f, centre, hi, 12, tolerance);
    return std::clamp(left + right, 0.0, 1.0);
}

namespace detail {

// Mellin-Barnes form of E[exp(-s gamma^p)]:
//   1/(|p| G(m) G(m_s)) H[z],  z = beta beta_s / (mean_snr s^(1/p)),
//   Theta(w) = G(m + w/xi) G(m_s + w/xi_s) G(-w/p)      for p > 0
//   Theta(w) = G(m + w/xi) G(m_s + w/xi_s) G(w/|p|)     for p < 0
inline FoxHSpec egk_mgf_spec(const EgkParams& par, double p)
{
    FoxHSpec spec;
    spec.lower = {{par.m, 1.0 / par.xi}, {par.m_s, 1.0 / par.xi_s}};
    if (p > 0.0) {
        spec.m = 2;
        spec.n = 1;
        spec.upper = {{1.0, 1.0 / p}};
    } else {
        spec.m = 3;
        spec.n = 0;
        spec.lower.push_back({0.0, 1.0 / -p});
    }
    return spec;
}

// Theta(w) * w written as Theta(w) G(1 + w) / G(w)
inline FoxHSpec egk_mgf_derivative_spec(const EgkParams& par, double p)
{
    FoxHSpec spec = egk_mgf_spec(par, p);
    spec.lower.insert(spec.lower.begin() + spec.m, GammaPair{1.0, 1.0});
    spec.m += 1;
    spec.upper.push_back({0.0, 1.0});
    return spec;
}

inline void check_mgf_args(const EgkParams& par, double p, double s)
{
    par.validate();
    if (p == 0.0 || !std::isfinite(p)) throw DomainError("generalized MGF: p must be nonzero and finite");
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("generalized MGF: s must be positive and finite");
}

inline double egk_mgf_log_prefactor(const EgkParams& par, double p)
{
    return -std::log(std::abs(p)) - std::lgamma(par.m) - std::lgamma(par.m_s);
}

// The 1/(G(m) G(m_s)) normalization travels inside the contour integrand.
inline ContourSpec scaled_contour(const EgkParams& par, double p, ContourSpec contour)
{
    contour.log_prefactor += egk_mgf_log_prefactor(par, p);
    return contour;
}

inline double egk_mgf_argument(const EgkParams& par, double p, double s)
{
    return std::exp(std::log(par.beta() * par.beta_s() / par.mean_snr) - std::log(s) / p);
}

} // namespace detail

/// E[exp(-s gamma^p)].
inline double egk_generalized_mgf(const EgkParams& par, double p, double s, const ContourSpec& contour = {})
{
    detail::check_mgf_args(par, p, s);
    const auto h = eval_foxh(detail::egk_mgf_spec(par, p), detail::egk_mgf_argument(par, p, s),
                             detail::scaled_contour(par, p, contour));
    return h.value;
}

/// d/ds E[exp(-s gamma^p)], carrying the 1/(|p| p s) prefactor.
inline double egk_generalized_mgf_derivative(const EgkParams& par, double p, double s, const ContourSpec& contour = {})
{
    detail::check_mgf_args(par, p, s);
    const auto h = eval_foxh(detail::egk_mgf_derivative_spec(par, p), detail::egk_mgf_argument(par, p, s),
                             detail::scaled_contour(par, p, contour));
    return h.value / (p * s);
}

struct MgfPair {
    double value = 1.0;
    double derivative = 0.0;
    double value_error = 0.0;
    double derivative_error = 0.0;
};

/// Value and derivative from one contour sweep; the derivative kernel
/// Theta(w) w is the Mellin moment of the value kernel.
inline MgfPair egk_generalized_mgf_pair(const EgkParams& par, double p, double s, const ContourSpec& contour = {})
{
    detail::check_mgf_args(par, p, s);
    const auto v = validate_foxh(detail::egk_mgf_spec(par, p));
    const auto [h, hw] =
        eval_foxh_with_moment(v, detail::egk_mgf_argument(par, p, s), detail::scaled_contour(par, p, contour));
    return {h.value, hw.value / (p * s), h.error_estimate, hw.error_estimate / std::abs(p * s)};
}

/// One EGK SNR draw. gen is any uniform random bit generator.
template <class Urbg>
double egk_sample(const EgkParams& par, Urbg& gen)
{
    std::gamma_distribution<double> g1(par.m, 1.0);
    std::gamma_distribution<double> g2(par.m_s, 1.0);
    const double y1 = std::pow(g1(gen), 1.0 / par.xi) / par.beta();
    const double y2 = std::pow(g2(gen), 1.0 / par.xi_s) / par.beta_s();
    return par.mean_snr * y1 * y2;
}

/// Distributions reachable as EGK special cases. Shadowing-free entries use
/// m_s = no_shadowing_ms, xi_s = 1.
///   rayleigh                      ()
///   nakagami_m                    (m)
///   generalized_nakagami          (m, xi)
///   generalized_k                 (m, m_s)
///   egk                           (m, xi, m_s, xi_s)
inline EgkParams named_special_case(std::string_view name, const std::vector<double>& args, double mean_snr,
                                    double no_shadowing_ms = kNoShadowingMs)
{
    auto need = [&](std::size_t count) {
        if (args.size() != count) {
            std::ostringstream os;
            os << "fading '" << name << "' takes " << count << " parameter(s), got " << args.size();
            throw InputError(os.str());
        }
    };
    EgkParams par;
    par.mean_snr = mean_snr;
    par.m_s = no_shadowing_ms;
    if (name == "rayleigh") {
        need(0);
    } else if (name == "nakagami_m") {
        need(1);
        par.m = args[0];
    } else if (name == "generalized_nakagami") {
        need(2);
        par.m = args[0];
        par.xi = args[1];
    } else if (name == "generalized_k") {
        need(2);
        par.m = args[0];
        par.m_s = args[1];
    } else if (name == "egk") {
        need(4);
        par.m = args[0];
        par.xi = args[1];
        par.m_s = args[2];
        par.xi_s = args[3];
    } else {
        throw InputError("unknown fading model '" + std::string(name) +
                         "' (expected rayleigh, nakagami_m, generalized_nakagami, generalized_k or egk)");
    }
    par.validate();
    return par;
}

} // namespace egkcap
