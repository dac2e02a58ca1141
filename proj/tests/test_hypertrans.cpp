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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "egkcap/egk_fading.hpp"
#include "egkcap/hypertrans.hpp"
#include "egkcap/special_functions.hpp"

using namespace egkcap;

namespace {

FoxHSpec exp_spec()
{
    FoxHSpec s;
    s.m = 1;
    s.lower = {{0.0, 1.0}};
    return s;
}

FoxHErrorKind kind_of(const FoxHSpec& spec)
{
    try {
        validate_foxh(spec);
    } catch (const FoxHValidationError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "validation unexpectedly passed";
    return FoxHErrorKind::InvalidIndices;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

ContourSpec at_offset(double c)
{
    ContourSpec spec;
    spec.offset = c;
    return spec;
}

ContourSpec with_nodes(int n)
{
    ContourSpec spec;
    spec.node_count = n;
    return spec;
}

} // namespace

TEST(ValidateFoxH, SinglePoleFamily)
{
    const auto v = validate_foxh(exp_spec());
    EXPECT_EQ(v.convergence.route, ContourRoute::Vertical);
    EXPECT_DOUBLE_EQ(v.convergence.a_star, 1.0);
    EXPECT_DOUBLE_EQ(v.convergence.strip_lo, 0.0);
    EXPECT_TRUE(std::isinf(v.convergence.strip_hi));
    ASSERT_TRUE(v.default_contour.offset.has_value());
    EXPECT_GT(*v.default_contour.offset, 0.0);
}

TEST(ValidateFoxH, ErrorKinds)
{
    FoxHSpec bad_index = exp_spec();
    bad_index.m = 2;
    EXPECT_EQ(kind_of(bad_index), FoxHErrorKind::InvalidIndices);

    FoxHSpec bad_slope = exp_spec();
    bad_slope.lower[0].slope = 0.0;
    EXPECT_EQ(kind_of(bad_slope), FoxHErrorKind::NonPositiveSlope);

    // Gamma(w) and Gamma(1 - 1 - w) both have a pole at w = 0
    FoxHSpec collide;
    collide.m = 1;
    collide.n = 1;
    collide.lower = {{0.0, 1.0}};
    collide.upper = {{1.0, 1.0}};
    EXPECT_EQ(kind_of(collide), FoxHErrorKind::CoincidentPoles);

    FoxHSpec overlap = collide;
    overlap.upper = {{2.5, 1.0}};
    EXPECT_EQ(kind_of(overlap), FoxHErrorKind::NoSeparatingContour);

    // Gamma(w) / Gamma(1/2 + w): a* = 0 and Delta = 0
    FoxHSpec flat;
    flat.m = 1;
    flat.lower = {{0.0, 1.0}};
    flat.upper = {{0.5, 1.0}};
    EXPECT_EQ(kind_of(flat), FoxHErrorKind::NoConvergentSector);
}

TEST(ValidateFoxH, FadingKernelIsValid)
{
    EgkParams par{0.5, 1.0, 1.0, 1.0, 1.0};
    const auto v = validate_foxh(detail::egk_mgf_spec(par, 1.0));
    EXPECT_EQ(v.convergence.route, ContourRoute::Vertical);
    EXPECT_GT(v.convergence.a_star, 0.0);
    EXPECT_LT(v.convergence.strip_lo, v.convergence.strip_hi);
}

TEST(EvalFoxH, ExponentialReduction)
{
    for (double z = 1e-2; z <= 20.0; z *= 1.5) {
        const auto h = eval_foxh(exp_spec(), z);
        EXPECT_LT(rel(h.value, std::exp(-z)), 1e-8) << z;
        EXPECT_LE(h.imag_residual, 1e-8 * std::abs(h.value) + 1e-12);
    }
    EXPECT_NEAR(eval_foxh(exp_spec(), 1.0).value, 0.36787944117144233, 1e-12);
}

TEST(EvalFoxH, ContourInvariance)
{
    const double base = eval_foxh(exp_spec(), 1.0, at_offset(0.5)).value;
    for (double c : {0.2, 1.0, 2.5}) {
        EXPECT_LT(rel(eval_foxh(exp_spec(), 1.0, at_offset(c)).value, base), 1e-9) << c;
    }
}

TEST(EvalFoxH, NodeDoublingWithinErrorEstimate)
{
    for (double z : {0.05, 1.0, 7.0}) {
        const auto a = eval_foxh(exp_spec(), z, with_nodes(64));
        const auto b = eval_foxh(exp_spec(), z, with_nodes(128));
        EXPECT_LE(std::abs(a.value - b.value), a.error_estimate + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(a.value))
            << z;
    }
}

TEST(EvalFoxH, PoleCrossingDoesNotChangeValue)
{
    EgkParams par{2.0, 1.0, 3.0, 1.0, 1.0};
    const auto spec = detail::egk_mgf_spec(par, 1.0);
    for (double z : {0.3, 1.0, 4.0}) {
        ContourSpec off;
        off.cross_poles = false;
        const double a = eval_foxh(spec, z).value;
        const double b = eval_foxh(spec, z, off).value;
        EXPECT_LT(rel(a, b), 1e-9) << z;
    }
}

TEST(EvalFoxH, LogPrefactorAvoidsOverflow)
{
    FoxHSpec spec;
    spec.m = 1;
    spec.lower = {{200.0, 1.0}};
    // H = z^200 e^{-z}; normalized by Gamma(200) it is a gamma density times z
    ContourSpec c;
    c.log_prefactor = -std::lgamma(200.0);
    for (double z : {150.0, 200.0, 260.0}) {
        const double want = std::exp(200.0 * std::log(z) - z - std::lgamma(200.0));
        EXPECT_LT(rel(eval_foxh(spec, z, c).value, want), 1e-8) << z;
    }
    ContourSpec three;
    three.log_prefactor = std::log(3.0);
    EXPECT_LT(rel(eval_foxh(exp_spec(), 0.7, three).value, 3.0 * std::exp(-0.7)), 1e-10);
}

TEST(EvalFoxH, EmptyNumeratorIsZero)
{
    FoxHSpec spec;
    spec.lower = {{0.5, 1.0}};
    spec.upper = {{0.2, 1.0}};
    EXPECT_EQ(eval_foxh(spec, 1.3).value, 0.0);
}

TEST(EvalFoxH, ArgumentAndOffsetErrors)
{
    EXPECT_THROW(eval_foxh(exp_spec(), 0.0), DomainError);
    EXPECT_THROW(eval_foxh(exp_spec(), -1.0), DomainError);
    EXPECT_THROW(eval_foxh(exp_spec(), 1.0, at_offset(-0.5)), DomainError);
}

TEST(EvalFoxH, ExponentialIntegralInstance)
{
    FoxHSpec spec;
    spec.m = 1;
    spec.n = 2;
    spec.upper = {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}};
    spec.lower = {{1.0, 1.0}, {0.0, 1.0}};
    EXPECT_LT(rel(eval_foxh(spec, 1.0).value, -exp_integral_ei(-1.0)), 1e-8);
}

TEST(MeijerG, ReferenceValues)
{
    EXPECT_LT(rel(eval_meijer_g(1, 0, {}, {0.0}, 2.0).value, 0.13533528323661269189), 1e-9);
    EXPECT_LT(rel(eval_meijer_g(0, 2, {1.0, 1.0}, {0.0}, 2.0).value, 0.55977359477616081175), 1e-8);
    EXPECT_LT(rel(eval_meijer_g(1, 2, {1.0, 1.0}, {1.0, 0.0, 0.0}, 1.0).value, 0.79659959929705313428), 1e-8);
}

TEST(MeijerG, EulerConstantIdentity)
{
    for (double s = 1e-2; s <= 1e2; s *= 1.8) {
        const double want = -(exp_integral_ei(-s) - std::log(s) - kEulerGamma);
        EXPECT_LT(rel(eval_meijer_g(1, 2, {1.0, 1.0}, {1.0, 0.0, 0.0}, s).value, want), 1e-8) << s;
    }
}

TEST(MeijerG, ExponentialIntegralIdentity)
{
    for (double s = 1e-2; s <= 1e2; s *= 1.8) {
        EXPECT_LT(rel(eval_meijer_g(0, 2, {1.0, 1.0}, {0.0}, 1.0 / s).value, -exp_integral_ei(-s)), 1e-8) << s;
    }
}
