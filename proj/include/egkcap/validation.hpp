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

// End-to-end acceptance suite, shared by `egkcap validate` and the
// acceptance test binary. Each criterion reports pass/fail, a one-line
// detail and its wall-clock time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "egkcap/capacity.hpp"
#include "egkcap/cli.hpp"
#include "egkcap/egk_fading.hpp"
#include "egkcap/error.hpp"
#include "egkcap/mc_oracle.hpp"
#include "egkcap/rng.hpp"
#include "egkcap/special_functions.hpp"

namespace egkcap::validation {

struct Options {
    double tolerance_scale = 1.0;  // multiplies every numeric tolerance; < 1 tightens
    std::int64_t mc_samples = 1000000;
    std::uint64_t seed = 20240917;
    int workers = 1;
    std::vector<int> only;         // criterion ids to run; empty runs all
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

inline constexpr int kCriterionCount = 9;

inline std::string format_line(const CriterionResult& r)
{
    std::ostringstream os;
    os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " (" << std::fixed << std::setprecision(2)
       << r.seconds << " s): " << r.detail;
    return os.str();
}

namespace detail {

struct Verdict {
    bool passed = false;
    std::string detail;
};

inline std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(4) << v;
    return os.str();
}

// Fading grid for the distribution checks: (m, m_s) in {0.5, 1, 2.5} x {1, 3, 50},
// (xi, xi_s) in {(1, 1), (2, 0.75)}, unit mean SNR.
inline std::vector<EgkParams> fading_grid()
{
    std::vector<EgkParams> out;
    for (double m : {0.5, 1.0, 2.5}) {
        for (double ms : {1.0, 3.0, 50.0}) {
            for (auto [xi, xis] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.75}}) {
                out.push_back({m, xi, ms, xis, 1.0});
            }
        }
    }
    return out;
}

inline std::string describe(const EgkParams& p)
{
    std::ostringstream os;
    os << "(m=" << p.m << ", xi=" << p.xi << ", m_s=" << p.m_s << ", xi_s=" << p.xi_s << ", snr=" << p.mean_snr << ")";
    return os.str();
}

inline std::vector<EgkParams> iid(const EgkParams& p, int L) { return std::vector<EgkParams>(L, p); }

inline double db(double x) { return std::pow(10.0, x / 10.0); }

inline Verdict closed_form_agreement(const Options& o)
{
    const double tol = 1e-6 * o.tolerance_scale;
    double worst = 0.0;
    std::string where;
    int count = 0;
    for (Scheme scheme : {Scheme::MRC, Scheme::EGC, Scheme::AF_MULTIHOP}) {
        for (int L : {2, 4}) {
            const CombinerSpec c = combiner_params(scheme, L);
            for (double s : {1e-2, 1e-1, 1.0, 10.0, 100.0}) {
                const double general = aux_c_foxh(c, s).value;
                const double closed = *aux_c_closed_form(c, s);
                const double rel = std::abs(general - closed) / std::abs(closed);
                ++count;
                if (rel > worst) {
                    worst = rel;
                    where = std::string(to_string(scheme)) + " L=" + std::to_string(L) + " s=" + num(s);
                }
            }
        }
    }
    return {worst <= tol, "max relative difference " + num(worst) + " at " + where + " over " + std::to_string(count) +
                              " points (tolerance " + num(tol) + ")"};
}

inline Verdict baseline_equivalence(const Options& o)
{
    const double tol = 1e-6 * o.tolerance_scale;
    QuadratureSpec quad;
    quad.tolerance = 1e-9;
    quad.workers = o.workers;
    double worst = 0.0;
    std::string where;
    int count = 0;
    for (int L : {1, 2, 3}) {
        for (double m : {1.0, 2.0}) {
            for (double snr_db : {0.0, 10.0, 20.0}) {
                const auto branches = iid(named_special_case("nakagami_m", {m}, db(snr_db)), L);
                const auto [first, second] = capacity_mrc_baselines(branches, 1.0, quad);
                const auto unified = ergodic_capacity_inid(branches, combiner_params(Scheme::MRC, L), 1.0, quad);
                const double values[3] = {first.capacity, second.capacity, unified.capacity};
                const double hi = *std::max_element(values, values + 3);
                const double lo = *std::min_element(values, values + 3);
                const double rel = (hi - lo) / hi;
                ++count;
                if (rel > worst) {
                    worst = rel;
                    where = "L=" + std::to_string(L) + " m=" + num(m) + " snr=" + num(snr_db) + " dB";
                }
            }
        }
    }
    return {worst <= tol, "max relative spread " + num(worst) + " at " + where + " over " + std::to_string(count) +
                              " cases (tolerance " + num(tol) + ")"};
}

inline Verdict rayleigh_classical(const Options& o)
{
    const double snr = 10.0;
    const double exact = std::exp(1.0 / snr) * -exp_integral_ei(-1.0 / snr) / std::numbers::ln2;
    std::vector<double> residual;
    for (double ms : {50.0, 100.0, 200.0}) {
        const auto branch = named_special_case("rayleigh", {}, snr, ms);
        QuadratureSpec quad;
        quad.workers = o.workers;
        const double c = ergodic_capacity_inid({branch}, combiner_params(Scheme::MRC, 1), 1.0, quad).capacity;
        residual.push_back(std::abs(c - exact) / exact);
    }
    const bool close = residual[0] <= 0.02 * o.tolerance_scale;
    const bool shrinking = residual[0] > residual[1] && residual[1] > residual[2];
    return {close && shrinking, "classical " + num(exact) + " bits/s/Hz; relative residual at m_s = 50/100/200: " +
                                    num(residual[0]) + " / " + num(residual[1]) + " / " + num(residual[2]) +
                                    (shrinking ? "" : " (not shrinking)")};
}

inline Verdict analytic_vs_monte_carlo(const Options& o)
{
    const std::vector<Scheme> schemes = {Scheme::MRC, Scheme::EGC, Scheme::RMSC, Scheme::AF_MULTIHOP, Scheme::CASCADED};
    const std::vector<std::pair<std::string, std::vector<double>>> fadings = {
        {"rayleigh", {}}, {"nakagami_m", {2.0}}, {"generalized_k", {2.0, 3.0}}};
    int cells = 0;
    int agree = 0;
    std::map<std::string, int> failures_by_scheme;
    std::string first_failure;
    double worst_z = 0.0;
    for (const auto& [name, args] : fadings) {
        for (double snr_db : {0.0, 10.0, 20.0}) {
            for (int L : {2, 3}) {
                SimulationPlan plan;
                plan.branches = iid(named_special_case(name, args, db(snr_db)), L);
                plan.sample_count = o.mc_samples;
                plan.seed = o.seed;
                plan.workers = o.workers;
                const auto sims = simulate_schemes(plan, schemes);
                for (std::size_t k = 0; k < schemes.size(); ++k) {
                    ++cells;
                    const std::string cell = std::string(to_string(schemes[k])) + " " + name + " " + num(snr_db) +
                                             " dB L=" + std::to_string(L);
                    std::string why;
                    try {
                        QuadratureSpec quad;
                        quad.workers = o.workers;
                        const auto c = ergodic_capacity_inid(plan.branches, combiner_params(schemes[k], L), 1.0, quad);
                        const double z = std::abs(c.capacity - sims[k].estimate) / sims[k].standard_error;
                        worst_z = std::max(worst_z, z);
                        if (z <= 3.0 * o.tolerance_scale) {
                            ++agree;
                            continue;
                        }
                        why = num(z) + " standard errors";
                    } catch (const Error& e) {
                        why = e.what();
                    }
                    ++failures_by_scheme[to_string(schemes[k])];
                    if (first_failure.empty()) first_failure = cell + ": " + why;
                }
            }
        }
    }
    std::string detail = std::to_string(agree) + "/" + std::to_string(cells) +
                         " cells within 3 standard errors (largest deviation among evaluated cells " + num(worst_z) +
                         " SE)";
    if (!failures_by_scheme.empty()) {
        detail += "; failing cells by scheme:";
        for (const auto& [scheme, n] : failures_by_scheme) detail += " " + scheme + "=" + std::to_string(n);
        detail += "; first: " + first_failure;
    }
    return {agree == cells, detail};
}

inline Verdict limit_surrogates(const Options& o)
{
    const int L = 2;
    SimulationPlan plan;
    plan.branches = iid(named_special_case("rayleigh", {}, 10.0), L);
    plan.sample_count = o.mc_samples;
    plan.seed = o.seed;
    plan.workers = o.workers;
    const auto sims = simulate_schemes(plan, {Scheme::SC, Scheme::MIN_BOUND});
    bool ok = true;
    std::string detail;
    for (int k = 0; k < 2; ++k) {
        const Scheme scheme = k == 0 ? Scheme::SC : Scheme::MIN_BOUND;
        const double exact = sims[k].estimate;
        std::vector<double> gaps;
        for (int order : {2, 4, 8, 16}) {
            QuadratureSpec quad;
            quad.workers = o.workers;
            const double c = ergodic_capacity_inid(plan.branches, combiner_params(scheme, L, order), 1.0, quad).capacity;
            gaps.push_back(std::abs(c - exact) / exact);
        }
        const bool within = gaps[2] <= 0.02 * o.tolerance_scale;
        const bool decreasing = gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] > gaps[3];
        ok = ok && within && decreasing;
        detail += std::string(k ? "; " : "") + to_string(scheme) + " relative gap at orders 2/4/8/16: " + num(gaps[0]) +
                  " / " + num(gaps[1]) + " / " + num(gaps[2]) + " / " + num(gaps[3]) +
                  (decreasing ? "" : " (not decreasing)");
    }
    return {ok, detail};
}

inline Verdict derivative_identity(const Options& o)
{
    const double tol = 1e-5 * o.tolerance_scale;
    double worst = 0.0;
    std::string where;
    int count = 0;
    bool negative = true;
    for (const auto& par : fading_grid()) {
        for (double p : {-1.0, 0.5, 1.0, 2.0}) {
            for (double s : {0.1, 1.0, 10.0}) {
                const double h = 1e-5 * s;
                const double d = egk_generalized_mgf_derivative(par, p, s);
                const double fd =
                    (egk_generalized_mgf(par, p, s + h) - egk_generalized_mgf(par, p, s - h)) / (2.0 * h);
                const double rel = std::abs(d - fd) / std::abs(d);
                negative = negative && d < 0.0;
                ++count;
                if (!(rel <= worst)) {
                    worst = rel;
                    where = describe(par) + " p=" + num(p) + " s=" + num(s);
                }
            }
        }
    }
    return {worst <= tol && negative, "max relative difference " + num(worst) + " at " + where + " over " +
                                          std::to_string(count) + " points (tolerance " + num(tol) + ")" +
                                          (negative ? "" : "; a derivative was not negative")};
}

// Upper bound on the KS statistic from the CDF at every `stride`-th order
// statistic; monotonicity brackets the CDF in between.
inline double ks_upper_bound(std::vector<double> x, const std::function<double(double)>& cdf, std::size_t stride)
{
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    std::vector<std::size_t> at;
    for (std::size_t i = 0; i < x.size(); i += stride) at.push_back(i);
    if (at.back() != x.size() - 1) at.push_back(x.size() - 1);
    std::vector<double> f(at.size());
    for (std::size_t k = 0; k < at.size(); ++k) f[k] = cdf(x[at[k]]);
    double d = 0.0;
    // sample i (0-based) sits between ECDF steps i/n and (i+1)/n
    d = std::max({d, (at[0] + 1.0) / n - f[0], f[0] - at[0] / n});
    for (std::size_t k = 0; k + 1 < at.size(); ++k) {
        const double lo = f[k];
        const double hi = f[k + 1];
        d = std::max(d, (at[k + 1] + 1.0) / n - lo);
        d = std::max(d, hi - (at[k] + 0.0) / n);
    }
    return d;
}

inline Verdict distribution_integrity(const Options& o)
{
    const double tol = 1e-6 * o.tolerance_scale;
    constexpr std::int64_t kSamples = 100000;
    const double ks_critical = 1.62762 / std::sqrt(static_cast<double>(kSamples)) * o.tolerance_scale;
    double worst_norm = 0.0;
    double worst_ks = 0.0;
    double worst_z = 0.0;
    std::string norm_at;
    std::string ks_at;
    std::string z_at;
    std::uint64_t stream_base = 0;
    for (const auto& par : fading_grid()) {
        using boost::math::quadrature::gauss_kronrod;
        auto f = [&](double u) {
            const double g = std::exp(u);
            // the density times g vanishes where exp(u) leaves the double range
            if (!(g > 0.0) || !std::isfinite(g)) return 0.0;
            return egk_pdf(par, g) * g;
        };
        const double mass = gauss_kronrod<double, 61>::integrate(f, -std::numeric_limits<double>::infinity(),
                                                                 std::numeric_limits<double>::infinity(), 15, 1e-12);
        if (!(std::abs(mass - 1.0) <= worst_norm)) {
            worst_norm = std::abs(mass - 1.0);
            norm_at = describe(par);
        }

        std::vector<double> x(kSamples);
        for (std::int64_t i = 0; i < kSamples; ++i) {
            PhiloxStream gen(o.seed ^ 0x5eedf00dULL, stream_base + static_cast<std::uint64_t>(i));
            x[i] = egk_sample(par, gen);
        }
        stream_base += kSamples;
        double sum = 0.0;
        for (double v : x) sum += v;
        const double mean = sum / kSamples;
        double ss = 0.0;
        for (double v : x) ss += (v - mean) * (v - mean);
        const double se = std::sqrt(ss / (kSamples - 1.0) / kSamples);
        const double z = std::abs(mean - par.mean_snr) / se;
        if (z > worst_z) {
            worst_z = z;
            z_at = describe(par);
        }
        const double ks = ks_upper_bound(std::move(x), [&](double v) { return egk_cdf(par, v); }, 25);
        if (ks > worst_ks) {
            worst_ks = ks;
            ks_at = describe(par);
        }
    }
    const bool ok = worst_norm <= tol && worst_ks <= ks_critical && worst_z <= 3.0 * o.tolerance_scale;
    return {ok, "pdf mass error max " + num(worst_norm) + " at " + norm_at + "; KS bound max " + num(worst_ks) +
                    " (1% critical " + num(ks_critical) + ") at " + ks_at + "; mean deviation max " + num(worst_z) +
                    " SE at " + z_at};
}

inline Verdict ordering_and_monotonicity(const Options& o)
{
    const int L = 2;
    const std::vector<double> grid_db = {0.0, 5.0, 10.0, 15.0, 20.0};
    const std::vector<std::pair<std::string, std::vector<double>>> fadings = {{"rayleigh", {}}, {"nakagami_m", {2.0}}};
    bool ordering_ok = true;
    std::string ordering_note;
    std::vector<std::string> not_monotone;
    std::map<std::string, std::string> errors;
    for (const auto& [name, args] : fadings) {
        std::map<Scheme, std::vector<CapacityResult>> curves;
        for (Scheme scheme : kAllSchemes) {
            const CombinerSpec c = combiner_params(scheme, L, is_limit_scheme(scheme) ? std::optional<int>(kDefaultSurrogateOrder) : std::nullopt);
            for (double snr_db : grid_db) {
                try {
                    QuadratureSpec quad;
                    quad.workers = o.workers;
                    curves[scheme].push_back(
                        ergodic_capacity_inid(iid(named_special_case(name, args, db(snr_db)), L), c, 1.0, quad));
                } catch (const Error& e) {
                    errors[to_string(scheme)] = e.what();
                    curves.erase(scheme);
                    break;
                }
            }
        }
        for (const auto& [scheme, curve] : curves) {
            bool up = true;
            for (std::size_t i = 1; i < curve.size(); ++i) up = up && curve[i].capacity > curve[i - 1].capacity;
            if (!up) not_monotone.push_back(std::string(to_string(scheme)) + "/" + name);
        }
        for (Scheme scheme : kAllSchemes) {
            if (!curves.count(scheme)) not_monotone.push_back(std::string(to_string(scheme)) + "/" + name + " (not evaluated)");
        }
        if (curves.count(Scheme::MIN_BOUND) && curves.count(Scheme::SC) && curves.count(Scheme::MRC)) {
            for (std::size_t i = 0; i < grid_db.size(); ++i) {
                const auto& mn = curves[Scheme::MIN_BOUND][i];
                const auto& sc = curves[Scheme::SC][i];
                const auto& mrc = curves[Scheme::MRC][i];
                const double slack1 = (mn.error_estimate + sc.error_estimate) * o.tolerance_scale;
                const double slack2 = (sc.error_estimate + mrc.error_estimate) * o.tolerance_scale;
                if (!(mn.capacity <= sc.capacity + slack1 && sc.capacity <= mrc.capacity + slack2)) {
                    ordering_ok = false;
                    ordering_note = " violated at " + name + " " + num(grid_db[i]) + " dB";
                }
            }
        } else {
            ordering_ok = false;
            ordering_note = " not evaluated for " + name;
        }
    }
    std::string detail = std::string("MIN <= SC <= MRC ") + (ordering_ok ? "holds at every grid point" : ordering_note);
    if (not_monotone.empty()) {
        detail += "; every scheme strictly increasing";
    } else {
        detail += "; not strictly increasing:";
        for (const auto& s : not_monotone) detail += " " + s;
    }
    for (const auto& [scheme, what] : errors) detail += "; " + scheme + ": " + what;
    return {ordering_ok && not_monotone.empty(), detail};
}

inline Verdict determinism(const Options& o)
{
    cli::RunConfig cfg;
    cfg.scheme = Scheme::MRC;
    cfg.branches = 2;
    cfg.fading = {"nakagami_m(2)"};
    cfg.snr_db = {0.0, 20.0, 10.0};
    cfg.mc_samples = std::min<std::int64_t>(o.mc_samples, 20000);
    cfg.seed = o.seed;
    bool same = true;
    std::string detail;
    for (cli::Format fmt : {cli::Format::Csv, cli::Format::Json}) {
        cfg.format = fmt;
        std::vector<std::string> outputs;
        for (int workers : {1, 4, 1, 4}) {
            cfg.workers = workers;
            outputs.push_back(cli::render(cli::run_capacity(cfg), fmt));
        }
        const bool all = std::all_of(outputs.begin(), outputs.end(), [&](const std::string& s) { return s == outputs[0]; });
        same = same && all;
        detail += std::string(detail.empty() ? "" : "; ") + cli::to_string(fmt) + ": " + std::to_string(outputs[0].size()) +
                  " bytes, " + (all ? "identical" : "DIFFERENT") + " across 2 runs x workers {1, 4}";
    }
    return {same, detail};
}

} // namespace detail

inline std::vector<CriterionResult> run(const Options& o, const std::function<void(const CriterionResult&)>& report = {})
{
    struct Entry {
        int id;
        const char* name;
        detail::Verdict (*fn)(const Options&);
    };
    const Entry entries[kCriterionCount] = {
        {1, "closed-form-vs-foxh", detail::closed_form_agreement},
        {2, "baseline-equivalence", detail::baseline_equivalence},
        {3, "rayleigh-classical", detail::rayleigh_classical},
        {4, "analytic-vs-monte-carlo", detail::analytic_vs_monte_carlo},
        {5, "limit-scheme-surrogates", detail::limit_surrogates},
        {6, "derivative-identity", detail::derivative_identity},
        {7, "distribution-integrity", detail::distribution_integrity},
        {8, "ordering-and-monotonicity", detail::ordering_and_monotonicity},
        {9, "determinism", detail::determinism},
    };
    std::vector<CriterionResult> out;
    for (const auto& e : entries) {
        if (!o.only.empty() && std::find(o.only.begin(), o.only.end(), e.id) == o.only.end()) continue;
        CriterionResult r;
        r.id = e.id;
        r.name = e.name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto v = e.fn(o);
            r.passed = v.passed;
            r.detail = v.detail;
        } catch (const std::exception& ex) {
            r.passed = false;
            r.detail = std::string("error: ") + ex.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (report) report(r);
        out.push_back(r);
    }
    return out;
}

} // namespace egkcap::validation
