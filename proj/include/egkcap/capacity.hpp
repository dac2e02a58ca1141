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

// Ergodic capacity of diversity combiners and relaying schemes whose output
// SNR has the power-mean form
//
//   gamma_end = eta ((1/L) sum_l gamma_l^p)^q
//
// Writing ln(1 + gamma_end) through the auxiliary kernel C(s) turns the
// capacity into a single integral over generalized MGFs:
//
//   C_avg = W/ln2 int_0^inf C(s) d/ds E[exp(-s sum_l gamma_l^p)] ds
//
//   C(s) = -H^{1,2}_{3,2}[ eta/(L s)^q | (1,1),(1,1),(1,q) ; (1,1),(0,1) ]      q > 0
//   C(s) = -H^{1,2}_{2,3}[ eta/(L s)^q | (1,1),(1,1) ; (1,1),(0,1),(0,-q) ]     q < 0
//
// i.e. Theta(w) = pi / (w sin(pi w) G(1 + q w)). For |q| > 2 the kernel grows
// like exp(L cos(pi/q) s) and the capacity integral diverges.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "egkcap/egk_fading.hpp"
#include "egkcap/error.hpp"
#include "egkcap/hypertrans.hpp"
#include "egkcap/quadrature.hpp"
#include "egkcap/special_functions.hpp"

namespace egkcap {

enum class Scheme { MRC, EGC, SC, RMSC, CASCADED, GEOMETRIC_MEAN, AF_MULTIHOP, MIN_BOUND };

inline constexpr std::array<Scheme, 8> kAllSchemes = {Scheme::MRC,      Scheme::EGC,         Scheme::SC,
                                                      Scheme::RMSC,     Scheme::CASCADED,    Scheme::GEOMETRIC_MEAN,
                                                      Scheme::AF_MULTIHOP, Scheme::MIN_BOUND};

inline const char* to_string(Scheme s)
{
    switch (s) {
    case Scheme::MRC: return "MRC";
    case Scheme::EGC: return "EGC";
    case Scheme::SC: return "SC";
    case Scheme::RMSC: return "RMSC";
    case Scheme::CASCADED: return "CASCADED";
    case Scheme::GEOMETRIC_MEAN: return "GEOMETRIC_MEAN";
    case Scheme::AF_MULTIHOP: return "AF_MULTIHOP";
    case Scheme::MIN_BOUND: return "MIN_BOUND";
    }
    return "?";
}

inline Scheme scheme_from_string(std::string_view name)
{
    std::string up(name);
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    std::replace(up.begin(), up.end(), '-', '_');
    for (Scheme s : kAllSchemes) {
        if (up == to_string(s)) return s;
    }
    if (up == "AF" || up == "MULTIHOP") return Scheme::AF_MULTIHOP;
    if (up == "GM") return Scheme::GEOMETRIC_MEAN;
    if (up == "MIN") return Scheme::MIN_BOUND;
    throw InputError("unknown scheme '" + std::string(name) +
                     "' (expected MRC, EGC, SC, RMSC, CASCADED, GEOMETRIC_MEAN, AF_MULTIHOP or MIN_BOUND)");
}

inline bool is_limit_scheme(Scheme s)
{
    return s == Scheme::SC || s == Scheme::CASCADED || s == Scheme::GEOMETRIC_MEAN || s == Scheme::MIN_BOUND;
}

inline constexpr int kDefaultSurrogateOrder = 8;

/// Side from which the geometric mean is approached: p -> 0+ (q = +order)
/// or p -> 0- (q = -order).
enum class Approach { FromAbove, FromBelow };

struct CombinerSpec {
    Scheme scheme = Scheme::MRC;
    int branch_count = 1;
    double eta = 1.0;
    double p = 1.0;
    double q = 1.0;
    int surrogate_order = 0; // 0 for schemes with an exact triple

    bool operator==(const CombinerSpec&) const = default;
};

inline CombinerSpec combiner_params(Scheme scheme, int L, std::optional<int> surrogate_order = std::nullopt,
                                    Approach approach = Approach::FromAbove)
{
    if (L < 1) throw InputError("branch count L must be >= 1");
    CombinerSpec c;
    c.scheme = scheme;
    c.branch_count = L;
    if (!is_limit_scheme(scheme)) {
        if (surrogate_order) {
            throw InputError(std::string("surrogate order applies to limit schemes only, not ") + to_string(scheme));
        }
        switch (scheme) {
        case Scheme::MRC: c.eta = L; c.p = 1.0; c.q = 1.0; break;
        case Scheme::EGC: c.eta = L; c.p = 0.5; c.q = 2.0; break;
        case Scheme::RMSC: c.eta = std::sqrt(static_cast<double>(L)); c.p = 2.0; c.q = 0.5; break;
        case Scheme::AF_MULTIHOP: c.eta = 1.0 / L; c.p = -1.0; c.q = -1.0; break;
        default: break;
        }
        return c;
    }
    const int order = surrogate_order.value_or(kDefaultSurrogateOrder);
    if (order < 1) throw InputError("surrogate order must be a positive integer");
    c.surrogate_order = order;
    c.eta = 1.0;
    const double n = order;
    switch (scheme) {
    case Scheme::SC: c.p = n; c.q = 1.0 / n; break;
    case Scheme::MIN_BOUND: c.p = -n; c.q = -1.0 / n; break;
    case Scheme::CASCADED: c.q = n; c.p = L / n; break;
    case Scheme::GEOMETRIC_MEAN:
        c.q = approach == Approach::FromAbove ? n : -n;
        c.p = 1.0 / c.q;
        break;
    default: break;
    }
    return c;
}

/// gamma_end(eta, p, q) of a branch-SNR vector.
inline double power_mean_snr(const CombinerSpec& c, const std::vector<double>& snrs)
{
    if (snrs.size() == 1) {
        // one branch: gamma_end = eta gamma^(pq); keep pq = 1 exact
        const double e = c.p * c.q;
        return c.eta * (std::abs(e - 1.0) < 1e-12 ? snrs[0] : std::pow(snrs[0], e));
    }
    // scale by the largest entry (p > 0) or smallest (p < 0) so gamma^p stays finite
    const double ref = c.p > 0.0 ? *std::max_element(snrs.begin(), snrs.end())
                                 : *std::min_element(snrs.begin(), snrs.end());
    double acc = 0.0;
    for (double g : snrs) acc += std::pow(g / ref, c.p);
    return c.eta * std::exp(c.q * (std::log(acc / snrs.size()) + c.p * std::log(ref)));
}

// ---------------------------------------------------------------------------
// Auxiliary kernel

inline FoxHSpec aux_kernel_spec(double q)
{
    if (q == 0.0 || !std::isfinite(q)) throw DomainError("auxiliary kernel: q must be nonzero and finite");
    FoxHSpec spec;
    spec.m = 1;
    spec.n = 2;
    if (q > 0.0) {
        spec.upper = {{1.0, 1.0}, {1.0, 1.0}, {1.0, q}};
        spec.lower = {{1.0, 1.0}, {0.0, 1.0}};
    } else {
        spec.upper = {{1.0, 1.0}, {1.0, 1.0}};
        spec.lower = {{1.0, 1.0}, {0.0, 1.0}, {0.0, -q}};
    }
    return spec;
}

inline double aux_argument(const CombinerSpec& c, double s)
{
    return std::exp(std::log(c.eta) - c.q * std::log(c.branch_count * s));
}

inline void check_s(double s, const char* who)
{
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw DomainError(std::string(who) + ": s must be positive and finite");
    }
}

/// C(s) through the general Mellin-Barnes route, for any (eta, q, L).
inline FoxHValue aux_c_foxh(const CombinerSpec& c, double s, const ContourSpec& contour = {})
{
    check_s(s, "aux_c");
    FoxHValue h = eval_foxh(aux_kernel_spec(c.q), aux_argument(c, s), contour);
    h.value = -h.value;
    return h;
}

/// Closed forms: MRC Ei(-s); EGC 2 Ci(sqrt(L) s); AF Ei(-s) - ln s - C.
inline std::optional<double> aux_c_closed_form(const CombinerSpec& c, double s)
{
    check_s(s, "aux_c");
    switch (c.scheme) {
    case Scheme::MRC: return exp_integral_ei(-s);
    case Scheme::EGC: return 2.0 * cosine_integral(std::sqrt(static_cast<double>(c.branch_count)) * s);
    case Scheme::AF_MULTIHOP: {
        // series form keeps full relative accuracy as s -> 0
        if (s < 0.5) {
            double term = -s;
            double sum = term;
            for (int k = 2; k < 60; ++k) {
                term *= -s / k;
                sum += term / k;
                if (std::abs(term / k) < 1e-17 * std::abs(sum)) break;
            }
            return sum;
        }
        return exp_integral_ei(-s) - std::log(s) - kEulerGamma;
    }
    default: return std::nullopt;
    }
}

/// RMSC kernel in closed form: (1/2)[Ei(s) - sqrt(16 s/pi) 2F2(1/2, 1; 3/2, 3/2; s)].
/// Loses digits to cancellation for s above ~20.
inline double aux_c_rmsc_closed_form(double s)
{
    check_s(s, "aux_c");
    return 0.5 * (exp_integral_ei(s) - std::sqrt(16.0 * s / std::numbers::pi) * hyp2f2(0.5, 1.0, 1.5, 1.5, s));
}

namespace detail {

// q = k/l in lowest terms with small denominators, or nothing
inline std::optional<std::pair<int, int>> small_rational(double q)
{
    for (int l = 1; l <= 64; ++l) {
        const double k = q * l;
        const double kr = std::round(k);
        if (kr != 0.0 && std::abs(k - kr) < 1e-12 * std::max(1.0, std::abs(k)) && std::abs(kr) <= 64.0) {
            int ki = static_cast<int>(kr);
            return std::make_pair(ki, l);
        }
    }
    return std::nullopt;
}

} // namespace detail

/// C(s) as a Meijer G-function, available when q = +-k/l is rational:
///   q > 0: -sqrt((2pi)^{k+1}/((2pi)^{2l} k)) G^{l,2l}_{2l+k,2l}[eta^l k^k/(L s)^k | Xi1(l),Xi1(l),Xi1(k) ; Xi1(l),Xi0(l)]
///   q < 0: -sqrt((2pi)^{k+1}/((2pi)^{2l} k)) G^{l,2l}_{2l,2l+k}[eta^l (L s)^k/k^k | Xi1(l),Xi1(l) ; Xi1(l),Xi0(l),Xi0(k)]
/// with Xi1(n) = {1/n, 2/n, ..., 1} and Xi0(n) = {0, 1/n, ..., (n-1)/n}.
inline std::optional<FoxHValue> aux_c_meijer(const CombinerSpec& c, double s, const ContourSpec& contour = {})
{
    check_s(s, "aux_c");
    const auto frac = detail::small_rational(c.q);
    if (!frac) return std::nullopt;
    const int k = std::abs(frac->first);
    const int l = frac->second;
    auto xi1 = [](int n) {
        std::vector<double> v;
        for (int j = 1; j <= n; ++j) v.push_back(static_cast<double>(j) / n);
        return v;
    };
    auto xi0 = [](int n) {
        std::vector<double> v;
        for (int j = 0; j < n; ++j) v.push_back(static_cast<double>(j) / n);
        return v;
    };
    std::vector<double> upper = xi1(l);
    const auto again = xi1(l);
    upper.insert(upper.end(), again.begin(), again.end());
    std::vector<double> lower = xi1(l);
    const auto den = xi0(l);
    lower.insert(lower.end(), den.begin(), den.end());
    const double log_ls = std::log(c.branch_count * s);
    double log_z;
    if (c.q > 0.0) {
        const auto extra = xi1(k);
        upper.insert(upper.end(), extra.begin(), extra.end());
        log_z = l * std::log(c.eta) + k * std::log(static_cast<double>(k)) - k * log_ls;
    } else {
        const auto extra = xi0(k);
        lower.insert(lower.end(), extra.begin(), extra.end());
        log_z = l * std::log(c.eta) + k * log_ls - k * std::log(static_cast<double>(k));
    }
    const double log_const = 0.5 * ((k + 1.0 - 2.0 * l) * std::log(2.0 * std::numbers::pi) - std::log(k));
    FoxHValue g = eval_meijer_g(l, 2 * l, upper, lower, std::exp(log_z), contour);
    const double factor = -std::exp(log_const);
    g.value *= factor;
    g.error_estimate *= std::abs(factor);
    return g;
}

/// Auxiliary kernel with the closed forms where they exist.
inline double aux_c(const CombinerSpec& c, double s, const ContourSpec& contour = {})
{
    if (auto closed = aux_c_closed_form(c, s)) return *closed;
    return aux_c_foxh(c, s, contour).value;
}

// ---------------------------------------------------------------------------
// Capacity integrals

struct CapacityResult {
    double capacity = 0.0;       // bits/s for the given bandwidth
    double error_estimate = 0.0;
    int nodes = 0;
    double scale = 1.0;          // s units per unit of the mapped variable
    CombinerSpec combiner;
    std::vector<std::string> warnings;
};

/// Integrable only when |q| <= 2; beyond that the kernel outgrows every MGF.
inline void require_convergent_kernel(const CombinerSpec& c)
{
    if (std::abs(c.q) > 2.0) {
        std::ostringstream os;
        os << to_string(c.scheme) << " with q = " << c.q
           << ": the auxiliary kernel grows like exp(L cos(pi/q) s) for |q| > 2, so the capacity integral diverges";
        if (c.surrogate_order > 0) os << " (surrogate order " << c.surrogate_order << ")";
        throw DivergenceError(os.str());
    }
}

namespace detail {

// Integrate f over (0, inf) with doubling until two successive rules agree.
template <class F>
CapacityResult integrate_semi_infinite(F&& f, const QuadratureSpec& quad, double scale)
{
    quad.validate();
    auto rule = [&](int n) {
        const auto nodes = map_semi_infinite(n, quad.mapping, scale);
        std::vector<double> terms(nodes.size());
        parallel_for(nodes.size(), quad.workers, [&](std::size_t i) { terms[i] = nodes[i].weight * f(nodes[i].s); });
        return pairwise_sum(terms);
    };
    CapacityResult r;
    r.scale = scale;
    int n = quad.node_count;
    double coarse = rule(n / 2);
    double fine = rule(n);
    r.nodes = n + n / 2;
    while (std::abs(fine - coarse) > quad.tolerance * std::abs(fine) && 2 * n <= quad.max_node_count) {
        n *= 2;
        coarse = fine;
        fine = rule(n);
        r.nodes += n;
    }
    r.capacity = fine;
    r.error_estimate = std::abs(fine - coarse);
    if (!std::isfinite(fine)) throw NumericalError("capacity quadrature produced a non-finite value");
    if (r.error_estimate > quad.tolerance * std::abs(fine)) {
        std::ostringstream os;
        os << "capacity quadrature did not converge: node-doubling difference " << r.error_estimate
           << " exceeds tolerance " << quad.tolerance << " (relative) at " << n << " nodes";
        throw NumericalError(os.str());
    }
    return r;
}

inline double default_scale(const std::vector<EgkParams>& branches, double p)
{
    double acc = 0.0;
    for (const auto& b : branches) acc += std::exp(p * std::log(b.mean_snr));
    return 1.0 / acc;
}

// E[exp(-s sum gamma_l^p)] and its derivative for independent branches;
// identical branches share one MGF evaluation.
struct BranchProduct {
    std::vector<EgkParams> distinct;
    std::vector<int> multiplicity;
    double p;
    ContourSpec contour;

    BranchProduct(const std::vector<EgkParams>& branches, double p_) : p(p_)
    {
        for (const auto& b : branches) {
            auto it = std::find(distinct.begin(), distinct.end(), b);
            if (it == distinct.end()) {
                distinct.push_back(b);
                multiplicity.push_back(1);
            } else {
                ++multiplicity[it - distinct.begin()];
            }
        }
        contour.check_conjugate = false;
    }

    // returns (M, dM/ds)
    std::pair<double, double> operator()(double s) const
    {
        double value = 1.0;
        std::vector<MgfPair> pairs;
        pairs.reserve(distinct.size());
        for (std::size_t i = 0; i < distinct.size(); ++i) pairs.push_back(egk_generalized_mgf_pair(distinct[i], p, s, contour));
        // d/ds prod M_i^{n_i} = prod(...) * sum n_i M_i'/M_i, written without dividing by tiny M_i
        double derivative = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            double term = multiplicity[i] * pairs[i].derivative;
            for (std::size_t j = 0; j < pairs.size(); ++j) {
                const int power = multiplicity[j] - (j == i ? 1 : 0);
                term *= std::pow(pairs[j].value, power);
            }
            derivative += term;
        }
        for (std::size_t i = 0; i < pairs.size(); ++i) value *= std::pow(pairs[i].value, multiplicity[i]);
        return {value, derivative};
    }
};

inline void check_branches(const std::vector<EgkParams>& branches, const CombinerSpec& c)
{
    if (branches.empty()) throw InputError("at least one branch is required");
    if (static_cast<int>(branches.size()) != c.branch_count) {
        std::ostringstream os;
        os << "branch list has " << branches.size() << " entries but the combiner expects L = " << c.branch_count;
        throw InputError(os.str());
    }
    for (const auto& b : branches) b.validate();
}

inline void check_bandwidth(double w)
{
    if (!(w > 0.0) || !std::isfinite(w)) throw InputError("bandwidth must be positive and finite");
}

} // namespace detail

/// Capacity with independent, non-identically distributed EGK branches.
inline CapacityResult ergodic_capacity_inid(const std::vector<EgkParams>& branches, const CombinerSpec& c,
                                            double bandwidth = 1.0, const QuadratureSpec& quad = {})
{
    detail::check_branches(branches, c);
    detail::check_bandwidth(bandwidth);
    require_convergent_kernel(c);
    const detail::BranchProduct mgf(branches, c.p);
    ContourSpec contour;
    contour.check_conjugate = false;
    const auto closed = aux_c_closed_form(c, 1.0).has_value();
    auto integrand = [&](double s) {
        const double kernel = closed ? *aux_c_closed_form(c, s) : aux_c_foxh(c, s, contour).value;
        return kernel * mgf(s).second;
    };
    const double scale = quad.scale > 0.0 ? quad.scale : detail::default_scale(branches, c.p);
    CapacityResult r = detail::integrate_semi_infinite(integrand, quad, scale);
    const double factor = bandwidth / std::numbers::ln2;
    r.capacity *= factor;
    r.error_estimate *= factor;
    r.combiner = c;
    if (c.surrogate_order > 0) {
        std::ostringstream os;
        os << "limit scheme " << to_string(c.scheme) << " evaluated at surrogate order " << c.surrogate_order
           << " (p = " << c.p << ", q = " << c.q << ")";
        r.warnings.push_back(os.str());
    }
    if (r.capacity < 0.0) {
        if (-r.capacity <= 10.0 * r.error_estimate + 1e-14) {
            r.capacity = 0.0;
        } else {
            throw NumericalError("capacity integral returned a negative value");
        }
    }
    return r;
}

/// Joint generalized MGF E[exp(-s sum gamma_l^p)] and its s-derivative.
using JointMgf = std::function<std::pair<double, double>(double)>;

/// Capacity from a joint MGF, e.g. for correlated branches.
inline CapacityResult ergodic_capacity_joint(const JointMgf& joint_mgf, const CombinerSpec& c, double bandwidth = 1.0,
                                             QuadratureSpec quad = {})
{
    detail::check_bandwidth(bandwidth);
    require_convergent_kernel(c);
    if (!(quad.scale > 0.0)) quad.scale = 1.0;
    ContourSpec contour;
    contour.check_conjugate = false;
    const bool closed = aux_c_closed_form(c, 1.0).has_value();
    auto integrand = [&](double s) {
        const auto [value, derivative] = joint_mgf(s);
        // value == 0 is accepted: a positive MGF underflows at large s
        if (!(value >= 0.0 && value <= 1.0 + 1e-12) || !(derivative <= 0.0) || !std::isfinite(derivative)) {
            std::ostringstream os;
            os << "joint MGF contract violated at s = " << s << ": value " << value << " must lie in (0, 1], derivative "
               << derivative << " must be <= 0";
            throw InputError(os.str());
        }
        if (derivative == 0.0) return 0.0;
        const double kernel = closed ? *aux_c_closed_form(c, s) : aux_c_foxh(c, s, contour).value;
        return kernel * derivative;
    };
    CapacityResult r = detail::integrate_semi_infinite(integrand, quad, quad.scale);
    const double factor = bandwidth / std::numbers::ln2;
    r.capacity *= factor;
    r.error_estimate *= factor;
    r.combiner = c;
    if (r.capacity < 0.0 && -r.capacity <= 10.0 * r.error_estimate + 1e-14) r.capacity = 0.0;
    if (r.capacity < 0.0) throw NumericalError("capacity integral returned a negative value");
    return r;
}

/// MRC capacity through the two classical MGF integrals:
///   first:  W/ln2 int e^{-s}/s [1 - M(s)] ds
///   second: W/ln2 int Ei(-s) M'(s) ds
inline std::pair<CapacityResult, CapacityResult> capacity_mrc_baselines(const std::vector<EgkParams>& branches,
                                                                        double bandwidth = 1.0,
                                                                        const QuadratureSpec& quad = {})
{
    const CombinerSpec c = combiner_params(Scheme::MRC, static_cast<int>(branches.size()));
    detail::check_branches(branches, c);
    detail::check_bandwidth(bandwidth);
    const detail::BranchProduct mgf(branches, 1.0);
    const double scale = quad.scale > 0.0 ? quad.scale : detail::default_scale(branches, 1.0);
    const double factor = bandwidth / std::numbers::ln2;

    auto first_integrand = [&](double s) {
        const double m = mgf(s).first;
        // 1 - M(s) via -expm1(log M) keeps digits when M is close to 1
        return std::exp(-s) / s * -std::expm1(std::log(m));
    };
    auto second_integrand = [&](double s) { return exp_integral_ei(-s) * mgf(s).second; };

    CapacityResult first = detail::integrate_semi_infinite(first_integrand, quad, scale);
    CapacityResult second = detail::integrate_semi_infinite(second_integrand, quad, scale);
    for (CapacityResult* r : {&first, &second}) {
        r->capacity *= factor;
        r->error_estimate *= factor;
        r->combiner = c;
    }
    return {first, second};
}

} // namespace egkcap
