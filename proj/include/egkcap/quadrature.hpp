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

// Gauss-Chebyshev rules mapped to (0, inf), and a deterministic parallel loop.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "egkcap/error.hpp"

namespace egkcap {

/// Change of variables from t in (-1, 1) to s in (0, inf).
///   Rational       s = scale (1+t)/(1-t)
///   RationalCubic  s = scale ((1+t)/(1-t))^3
///   Logarithmic    s = scale exp(2 t/(1-t^2))
/// The logarithmic map turns power-law tails at either end into
/// super-exponential decay in t.
enum class Mapping { Rational, RationalCubic, Logarithmic };

inline const char* to_string(Mapping m)
{
    switch (m) {
    case Mapping::Rational: return "rational";
    case Mapping::RationalCubic: return "rational_cubic";
    case Mapping::Logarithmic: return "logarithmic";
    }
    return "?";
}

inline Mapping mapping_from_string(std::string_view name)
{
    if (name == "rational") return Mapping::Rational;
    if (name == "rational_cubic") return Mapping::RationalCubic;
    if (name == "logarithmic") return Mapping::Logarithmic;
    throw InputError("unknown quadrature mapping '" + std::string(name) +
                     "' (expected rational, rational_cubic or logarithmic)");
}

/// Nodes of the logarithmic map beyond scale e^{+-kLogMapReach} are dropped.
inline constexpr double kLogMapReach = 230.0;

struct QuadratureSpec {
    int node_count = 256;
    Mapping mapping = Mapping::Logarithmic;
    double tolerance = 1e-7;    // relative, compared against the node-doubling difference
    int max_node_count = 4096;
    double scale = 0.0;         // s units per unit of the mapped variable; 0 lets the caller choose
    int workers = 1;

    void validate() const
    {
        if (node_count < 32) throw InputError("quadrature node_count must be >= 32");
        if (max_node_count < node_count) throw InputError("quadrature max_node_count must be >= node_count");
        if (!(tolerance > 0.0)) throw InputError("quadrature tolerance must be positive");
        if (!(scale >= 0.0) || !std::isfinite(scale)) throw InputError("quadrature scale must be >= 0");
        if (workers < 1) throw InputError("workers must be >= 1");
    }
};

struct Node {
    double s;
    double weight;
};

// Fejer's first rule on the Chebyshev nodes. The plain Chebyshev weight
// pi/n sin(theta) leaves a kink at t = -1 when the mapped integrand is
// nonzero there, which caps convergence at O(n^-2).
inline double fejer_weight(int n, double theta)
{
    const double c2 = std::cos(2.0 * theta);
    double prev = 1.0; // cos(0 theta)
    double cur = c2;   // cos(2 theta)
    double acc = 0.0;
    for (int j = 1; j <= n / 2; ++j) {
        acc += cur / (4.0 * j * j - 1.0);
        const double next = 2.0 * c2 * cur - prev;
        prev = cur;
        cur = next;
    }
    return 2.0 / n * (1.0 - 2.0 * acc);
}

/// n-point rule on the Chebyshev nodes for int_0^inf f(s) ds, Jacobian folded into
/// the weights. No node lands on s = 0.
inline std::vector<Node> map_semi_infinite(int n, Mapping mapping, double scale = 1.0)
{
    if (n < 1) throw InputError("map_semi_infinite: need at least one node");
    std::vector<Node> nodes;
    nodes.reserve(n);
    const int power = mapping == Mapping::Rational ? 1 : 3;
    for (int k = n; k >= 1; --k) {
        const double theta = (2.0 * k - 1.0) * std::numbers::pi / (2.0 * n);
        const double t = std::cos(theta);
        const double one_minus = 2.0 * std::sin(0.5 * theta) * std::sin(0.5 * theta); // 1 - t, cancellation-free
        if (mapping == Mapping::Logarithmic) {
            const double one_plus = 2.0 * std::cos(0.5 * theta) * std::cos(0.5 * theta);
            const double span = one_minus * one_plus; // 1 - t^2
            const double u = 2.0 * t / span;
            if (std::abs(u) > kLogMapReach) continue;
            const double dudt = 2.0 * (1.0 + t * t) / (span * span);
            const double s = scale * std::exp(u);
            nodes.push_back({s, std::numbers::pi / n * std::sin(theta) * s * dudt});
            continue;
        }
        const double r = (1.0 + t) / one_minus;
        const double drdt = 2.0 / (one_minus * one_minus);
        const double dsdr = power * std::pow(r, power - 1);
        const double w = fejer_weight(n, theta) * dsdr * drdt;
        nodes.push_back({scale * std::pow(r, power), scale * w});
    }
    return nodes;
}

inline std::vector<Node> map_semi_infinite(const QuadratureSpec& quad)
{
    return map_semi_infinite(quad.node_count, quad.mapping, quad.scale > 0.0 ? quad.scale : 1.0);
}

/// Run fn(i) for i in [0, n) on up to `workers` threads. Each index is
/// handled exactly once; the first exception is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    const std::size_t threads = std::min<std::size_t>(std::max(workers, 1), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Pairwise sum with a shape fixed by the length only.
inline double pairwise_sum(const double* x, std::size_t n)
{
    if (n <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += x[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x)
{
    return pairwise_sum(x.data(), x.size());
}

} // namespace egkcap
