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

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "egkcap/quadrature.hpp"
#include "egkcap/rng.hpp"

using namespace egkcap;

namespace {

constexpr double kExpOverOnePlus = 0.59634736232319407434; // e E1(1)

template <class F>
double integrate(int n, Mapping mapping, F f, double scale = 1.0)
{
    double acc = 0.0;
    for (const auto& node : map_semi_infinite(n, mapping, scale)) acc += node.weight * f(node.s);
    return acc;
}

double decay(double s) { return std::exp(-s); }

double decay_ratio(double s) { return std::exp(-s) / (1.0 + s); }

} // namespace

TEST(MapSemiInfinite, RationalMapTestIntegrals)
{
    EXPECT_NEAR(integrate(128, Mapping::Rational, decay), 1.0, 1e-6);
    EXPECT_NEAR(integrate(128, Mapping::Rational, decay_ratio), kExpOverOnePlus, 1e-6);
}

TEST(MapSemiInfinite, OtherMapsTestIntegrals)
{
    for (Mapping m : {Mapping::RationalCubic, Mapping::Logarithmic}) {
        EXPECT_NEAR(integrate(128, m, decay), 1.0, 1e-6) << to_string(m);
        EXPECT_NEAR(integrate(128, m, decay_ratio), kExpOverOnePlus, 1e-6) << to_string(m);
    }
}

TEST(MapSemiInfinite, DoublingReducesError)
{
    for (Mapping m : {Mapping::Rational, Mapping::Logarithmic}) {
        double prev_a = 1.0;
        double prev_b = 1.0;
        // stop before either rule reaches machine precision
        for (int n = 8; n <= 64; n *= 2) {
            const double ea = std::abs(integrate(n, m, decay) - 1.0);
            const double eb = std::abs(integrate(n, m, decay_ratio) - kExpOverOnePlus);
            EXPECT_LT(ea, prev_a) << to_string(m) << " n=" << n;
            EXPECT_LT(eb, prev_b) << to_string(m) << " n=" << n;
            prev_a = ea;
            prev_b = eb;
        }
    }
}

TEST(MapSemiInfinite, NodesArePositiveAndIncreasing)
{
    for (Mapping m : {Mapping::Rational, Mapping::RationalCubic, Mapping::Logarithmic}) {
        const auto nodes = map_semi_infinite(257, m, 0.3);
        ASSERT_FALSE(nodes.empty());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            EXPECT_GT(nodes[i].s, 0.0);
            EXPECT_GT(nodes[i].weight, 0.0);
            if (i > 0) {
                EXPECT_GT(nodes[i].s, nodes[i - 1].s);
            }
        }
    }
    EXPECT_EQ(map_semi_infinite(64, Mapping::Rational).size(), 64u);
}

TEST(MapSemiInfinite, ScaleIsAChangeOfUnits)
{
    for (Mapping m : {Mapping::Rational, Mapping::Logarithmic}) {
        // int_0^inf 5 e^{-5 s} ds = 1
        EXPECT_NEAR(integrate(256, m, [](double s) { return 5.0 * std::exp(-5.0 * s); }, 0.2), 1.0, 1e-9);
    }
}

TEST(QuadratureSpec, Validation)
{
    QuadratureSpec q;
    EXPECT_NO_THROW(q.validate());
    q.node_count = 16;
    EXPECT_THROW(q.validate(), InputError);
    q = {};
    q.max_node_count = 128;
    EXPECT_THROW(q.validate(), InputError);
    q = {};
    q.tolerance = 0.0;
    EXPECT_THROW(q.validate(), InputError);
    q = {};
    q.workers = 0;
    EXPECT_THROW(q.validate(), InputError);
    EXPECT_EQ(mapping_from_string("rational"), Mapping::Rational);
    EXPECT_EQ(mapping_from_string("logarithmic"), Mapping::Logarithmic);
    EXPECT_THROW(mapping_from_string("tanh"), InputError);
}

TEST(ParallelFor, VisitsEachIndexOnceAndPropagatesErrors)
{
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(100, 4,
                              [](std::size_t i) {
                                  if (i == 37) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(PairwiseSum, ShapeDependsOnLengthOnly)
{
    std::vector<double> x;
    for (int i = 0; i < 1001; ++i) x.push_back(1.0 / (i + 1.0));
    const double a = pairwise_sum(x);
    const double b = pairwise_sum(x);
    EXPECT_EQ(a, b);
    double naive = 0.0;
    for (double v : x) naive += v;
    EXPECT_NEAR(a, naive, 1e-12);
}

TEST(Philox, KnownAnswerVectors)
{
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (PhiloxBlock{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
              (PhiloxBlock{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
              (PhiloxBlock{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(PhiloxStream, ReproducibleAndDistinct)
{
    PhiloxStream a(42, 3);
    PhiloxStream b(42, 3);
    PhiloxStream c(42, 4);
    PhiloxStream d(43, 3);
    bool differs_c = false;
    bool differs_d = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a();
        EXPECT_EQ(va, b());
        differs_c = differs_c || va != c();
        differs_d = differs_d || va != d();
    }
    EXPECT_TRUE(differs_c);
    EXPECT_TRUE(differs_d);
}

TEST(PhiloxStream, UniformInOpenInterval)
{
    PhiloxStream g(1, 0);
    double sum = 0.0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    // mean of U(0,1) has standard error 1/sqrt(12 n)
    EXPECT_LT(std::abs(sum / n - 0.5), 4.0 / std::sqrt(12.0 * n));
}
