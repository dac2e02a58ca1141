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

// Plain Monte-Carlo capacity estimates. Branch SNRs are drawn from the EGK
// sampler and combined with the exact nonlinear rules (true max, min,
// product), so the estimates share nothing with the analytic machinery
// beyond the fading parameters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "egkcap/capacity.hpp"
#include "egkcap/egk_fading.hpp"
#include "egkcap/error.hpp"
#include "egkcap/quadrature.hpp"
#include "egkcap/rng.hpp"

namespace egkcap {

/// Output SNR of a scheme under its exact combining rule.
inline double combine_snr(Scheme scheme, const std::vector<double>& snrs)
{
    if (snrs.empty()) throw DomainError("combine_snr: need at least one branch SNR");
    for (double g : snrs) {
        if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("combine_snr: branch SNRs must be positive and finite");
    }
    const double L = static_cast<double>(snrs.size());
    switch (scheme) {
    case Scheme::MRC: {
        double acc = 0.0;
        for (double g : snrs) acc += g;
        return acc;
    }
    case Scheme::EGC: {
        double acc = 0.0;
        for (double g : snrs) acc += std::sqrt(g);
        return acc * acc / L;
    }
    case Scheme::SC: return *std::max_element(snrs.begin(), snrs.end());
    case Scheme::RMSC: {
        double acc = 0.0;
        for (double g : snrs) acc += g * g;
        return std::sqrt(acc);
    }
    case Scheme::CASCADED: {
        double acc = 0.0;
        for (double g : snrs) acc += std::log(g);
        return std::exp(acc);
    }
    case Scheme::GEOMETRIC_MEAN: {
        double acc = 0.0;
        for (double g : snrs) acc += std::log(g);
        return std::exp(acc / L);
    }
    case Scheme::AF_MULTIHOP: {
        double acc = 0.0;
        for (double g : snrs) acc += 1.0 / g;
        return 1.0 / acc;
    }
    case Scheme::MIN_BOUND: return *std::min_element(snrs.begin(), snrs.end());
    }
    throw InputError("combine_snr: unknown scheme");
}

struct SimulationPlan {
    std::vector<EgkParams> branches;
    Scheme scheme = Scheme::MRC;
    std::int64_t sample_count = 1000000;
    std::uint64_t seed = 1;
    double bandwidth = 1.0;
    int workers = 1;

    void validate() const
    {
        if (branches.empty()) throw InputError("simulation plan needs at least one branch");
        if (sample_count < 1000) throw InputError("simulation sample_count must be >= 1000");
        if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw InputError("bandwidth must be positive and finite");
        if (workers < 1) throw InputError("workers must be >= 1");
        for (const auto& b : branches) b.validate();
    }
};

struct SimulationResult {
    double estimate = 0.0;
    double standard_error = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::int64_t samples = 0;
};

namespace detail {

inline constexpr std::int64_t kSimulationBlock = 4096;
inline constexpr double kZ975 = 1.959963984540054;

// Count, mean and centred sum of squares of one block; merged pairwise.
struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
};

inline Moments merge(const Moments& a, const Moments& b)
{
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    const double n = a.n + b.n;
    const double d = b.mean - a.mean;
    return {n, a.mean + d * (b.n / n), a.m2 + b.m2 + d * d * (a.n * b.n / n)};
}

inline Moments merge_range(const std::vector<Moments>& v, std::size_t lo, std::size_t hi)
{
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return merge(merge_range(v, lo, mid), merge_range(v, mid, hi));
}

inline Moments block_moments(const std::vector<double>& x)
{
    Moments m;
    m.n = static_cast<double>(x.size());
    m.mean = pairwise_sum(x) / m.n;
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - m.mean) * (x[i] - m.mean);
    m.m2 = pairwise_sum(sq);
    return m;
}

inline SimulationResult summarize(const Moments& m, double bandwidth)
{
    SimulationResult r;
    r.samples = static_cast<std::int64_t>(m.n);
    r.estimate = bandwidth * m.mean;
    r.standard_error = bandwidth * std::sqrt(m.m2 / (m.n - 1.0) / m.n);
    r.ci95_low = r.estimate - kZ975 * r.standard_error;
    r.ci95_high = r.estimate + kZ975 * r.standard_error;
    return r;
}

// Runs `per_sample(snrs, out)` for every sample, where `out` receives one
// value per output channel. Sample i always reads Philox stream i, and the
// reduction shape depends on the sample count only.
template <class PerSample>
std::vector<Moments> simulate_channels(const std::vector<EgkParams>& branches, std::int64_t samples,
                                       std::uint64_t seed, int workers, std::size_t channels, PerSample&& per_sample)
{
    const std::int64_t blocks = (samples + kSimulationBlock - 1) / kSimulationBlock;
    std::vector<std::vector<Moments>> block_stats(channels, std::vector<Moments>(blocks));
    parallel_for(static_cast<std::size_t>(blocks), workers, [&](std::size_t b) {
        const std::int64_t begin = static_cast<std::int64_t>(b) * kSimulationBlock;
        const std::int64_t end = std::min(samples, begin + kSimulationBlock);
        std::vector<std::vector<double>> values(channels, std::vector<double>(end - begin));
        std::vector<double> snrs(branches.size());
        std::vector<double> out(channels);
        for (std::int64_t i = begin; i < end; ++i) {
            PhiloxStream gen(seed, static_cast<std::uint64_t>(i));
            for (std::size_t l = 0; l < branches.size(); ++l) snrs[l] = egk_sample(branches[l], gen);
            per_sample(snrs, out);
            for (std::size_t c = 0; c < channels; ++c) values[c][i - begin] = out[c];
        }
        for (std::size_t c = 0; c < channels; ++c) block_stats[c][b] = block_moments(values[c]);
    });
    std::vector<Moments> total(channels);
    for (std::size_t c = 0; c < channels; ++c) total[c] = merge_range(block_stats[c], 0, block_stats[c].size());
    return total;
}

} // namespace detail

/// E[W log2(1 + gamma_end)] for several schemes from one shared sample stream.
inline std::vector<SimulationResult> simulate_schemes(SimulationPlan plan, const std::vector<Scheme>& schemes)
{
    plan.validate();
    if (schemes.empty()) return {};
    const auto totals = detail::simulate_channels(
        plan.branches, plan.sample_count, plan.seed, plan.workers, schemes.size(),
        [&](const std::vector<double>& snrs, std::vector<double>& out) {
            for (std::size_t k = 0; k < schemes.size(); ++k) out[k] = std::log1p(combine_snr(schemes[k], snrs)) / std::numbers::ln2;
        });
    std::vector<SimulationResult> out;
    for (const auto& t : totals) out.push_back(detail::summarize(t, plan.bandwidth));
    return out;
}

inline SimulationResult simulate_capacity(const SimulationPlan& plan)
{
    return simulate_schemes(plan, {plan.scheme}).front();
}

struct SurrogateBias {
    SimulationResult exact;      // exact combining rule
    SimulationResult surrogate;  // power mean with the finite (eta, p, q)
    SimulationResult difference; // per-sample surrogate minus exact
    double absolute_gap = 0.0;   // |E[surrogate] - E[exact]|
    double relative_gap = 0.0;   // absolute_gap / E[exact]
};

/// Capacity gap between a limit scheme and its finite surrogate on one sample stream.
inline SurrogateBias simulate_surrogate_bias(SimulationPlan plan, const CombinerSpec& spec)
{
    if (!is_limit_scheme(spec.scheme)) {
        throw InputError(std::string("surrogate bias applies to limit schemes only, not ") + to_string(spec.scheme));
    }
    if (spec.branch_count != static_cast<int>(plan.branches.size())) {
        throw InputError("surrogate bias: combiner branch count does not match the plan");
    }
    plan.scheme = spec.scheme;
    plan.validate();
    const auto totals = detail::simulate_channels(
        plan.branches, plan.sample_count, plan.seed, plan.workers, 3,
        [&](const std::vector<double>& snrs, std::vector<double>& out) {
            out[0] = std::log1p(combine_snr(spec.scheme, snrs)) / std::numbers::ln2;
            out[1] = std::log1p(power_mean_snr(spec, snrs)) / std::numbers::ln2;
            out[2] = out[1] - out[0];
        });
    SurrogateBias r;
    r.exact = detail::summarize(totals[0], plan.bandwidth);
    r.surrogate = detail::summarize(totals[1], plan.bandwidth);
    r.difference = detail::summarize(totals[2], plan.bandwidth);
    r.absolute_gap = std::abs(r.difference.estimate);
    r.relative_gap = r.exact.estimate > 0.0 ? r.absolute_gap / r.exact.estimate : 0.0;
    return r;
}

} // namespace egkcap
