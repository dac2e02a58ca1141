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

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "egkcap/cli.hpp"

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(EGKCAP_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> data_lines(const std::string& text)
{
    std::vector<std::string> out;
    for (auto& l : lines(text)) {
        if (!l.empty() && l[0] != '#') out.push_back(l);
    }
    return out;
}

std::vector<std::string> cells(const std::string& line) { return egkcap::cli::split(line, ','); }

std::filesystem::path temp_path(const std::string& name)
{
    return std::filesystem::temp_directory_path() / ("egkcap_test_" + std::to_string(::getpid()) + "_" + name);
}

} // namespace

TEST(CliCapacity, ClassicalRayleighRow)
{
    const auto r = run("capacity --scheme MRC --branches 1 --fading rayleigh --snr-db 10");
    ASSERT_EQ(r.status, 0);
    const auto rows = data_lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], "snr_db,capacity_bits_per_hz,error_estimate,mc_estimate,mc_ci95_low,mc_ci95_high,abs_diff");
    const auto c = cells(rows[1]);
    ASSERT_EQ(c.size(), 7u);
    EXPECT_EQ(c[0], "10");
    EXPECT_LT(std::abs(std::stod(c[1]) - 2.9065148084148049) / 2.9065148084148049, 0.02);
    EXPECT_TRUE(c[3].empty());
    EXPECT_TRUE(c[6].empty());
}

TEST(CliCapacity, RowCountMatchesGrid)
{
    const auto r = run("capacity --scheme EGC --branches 2 --fading 'nakagami_m(2)' --snr-db 0:20:5");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(data_lines(r.out).size(), 6u);
    EXPECT_EQ(r.out.find('\r'), std::string::npos);
    for (const auto& row : data_lines(r.out)) EXPECT_EQ(cells(row).size(), 7u) << row;
}

TEST(CliCapacity, MonteCarloColumnsAndFooter)
{
    const auto r = run("capacity --scheme MRC --branches 2 --fading rayleigh --snr-db 0:10:10 --mc-samples 20000 --seed 5");
    ASSERT_EQ(r.status, 0);
    const auto rows = data_lines(r.out);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto c = cells(rows[i]);
        ASSERT_EQ(c.size(), 7u);
        const double cap = std::stod(c[1]);
        const double mc = std::stod(c[3]);
        EXPECT_LE(std::stod(c[4]), mc);
        EXPECT_GE(std::stod(c[5]), mc);
        EXPECT_NEAR(std::stod(c[6]), std::abs(cap - mc), 1e-12);
    }
    EXPECT_NE(r.out.find("# rows with capacity outside mc_ci95:"), std::string::npos);
}

TEST(CliCapacity, JsonRoundTrip)
{
    const auto r = run("capacity --scheme RMSC --branches 2 --fading rayleigh --snr-db 0:10:5 --format json");
    ASSERT_EQ(r.status, 0);
    const auto doc = nlohmann::ordered_json::parse(r.out);
    EXPECT_EQ(doc.dump(2) + "\n", r.out);
    EXPECT_EQ(doc["rows"].size(), 3u);
}

TEST(CliCapacity, ByteIdenticalAcrossRunsAndWorkers)
{
    const std::string base = "capacity --scheme SC --branches 2 --fading 'nakagami_m(2)' --snr-db 0:10:5 --mc-samples 5000 --seed 9";
    for (const char* fmt : {"csv", "json"}) {
        const auto a = run(base + " --format " + fmt + " --workers 1");
        const auto b = run(base + " --format " + fmt + " --workers 1");
        const auto c = run(base + " --format " + fmt + " --workers 4");
        ASSERT_EQ(a.status, 0);
        EXPECT_EQ(a.out, b.out) << fmt;
        EXPECT_EQ(a.out, c.out) << fmt;
    }
}

TEST(CliCapacity, OutputFileAndConfigPrecedence)
{
    const auto cfg = temp_path("config.json");
    const auto out = temp_path("out.csv");
    {
        std::ofstream f(cfg);
        f << R"({"scheme": "MRC", "branches": 2, "fading": "rayleigh", "snr_db": "0:20:10"})";
    }
    auto r = run("capacity --config " + cfg.string() + " --output " + out.string());
    ASSERT_EQ(r.status, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(out);
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(data_lines(buf.str()).size(), 4u);

    r = run("capacity --config " + cfg.string() + " --snr-db 5");
    ASSERT_EQ(r.status, 0);
    const auto rows = data_lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(cells(rows[1])[0], "5");

    {
        std::ofstream f(cfg);
        f << R"({"scheme": "MRC", "colour": "red"})";
    }
    EXPECT_EQ(run("capacity --config " + cfg.string()).status, 2);
    std::filesystem::remove(cfg);
    std::filesystem::remove(out);
}

TEST(CliCapacity, ConfigErrorsExitTwo)
{
    EXPECT_EQ(run("capacity --fading rician --snr-db 10").status, 2);
    EXPECT_EQ(run("capacity --snr-db 10:0:1").status, 2);
    EXPECT_EQ(run("capacity --snr-db 0:10:0").status, 2);
    EXPECT_EQ(run("capacity --scheme XYZ").status, 2);
    EXPECT_EQ(run("capacity --no-such-flag").status, 2);
    EXPECT_EQ(run("capacity --branches 3 --fading rayleigh,rayleigh --snr-db 10").status, 2);
    EXPECT_EQ(run("capacity --config /nonexistent/egkcap.json").status, 2);
}

TEST(CliCapacity, NumericalFailureExitsThreeWithGridPoint)
{
    const auto r = run("capacity --scheme CASCADED --branches 2 --snr-db 10");
    EXPECT_EQ(r.status, 3);
    const std::string cmd = std::string(EGKCAP_CLI_PATH) + " capacity --scheme CASCADED --branches 2 --snr-db 10 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    ASSERT_NE(pipe, nullptr);
    std::string all;
    char buf[1024];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) all.append(buf, n);
    pclose(pipe);
    EXPECT_NE(all.find("10"), std::string::npos);
    EXPECT_NE(all.find("diverges"), std::string::npos);
}

TEST(CliAux, ClosedFormColumns)
{
    auto r = run("aux --scheme MRC --branches 2 --s 1");
    ASSERT_EQ(r.status, 0);
    auto rows = data_lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], "s,aux_general,aux_closed_form,abs_diff");
    auto c = cells(rows[1]);
    EXPECT_NEAR(std::stod(c[2]), -0.21938393439552027, 1e-12);
    EXPECT_LT(std::stod(c[3]), 1e-6);

    r = run("aux --scheme EGC --branches 4 --s 1");
    ASSERT_EQ(r.status, 0);
    c = cells(data_lines(r.out)[1]);
    EXPECT_NEAR(std::stod(c[2]), 0.84596165754972999, 1e-12);

    r = run("aux --scheme CASCADED --branches 2 --s 1,2");
    ASSERT_EQ(r.status, 0);
    rows = data_lines(r.out);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        EXPECT_EQ(row.substr(row.size() - 2), ",,") << row;
    }
    EXPECT_EQ(run("aux --scheme MRC --s 0").status, 2);
}

TEST(CliMgf, RayleighLimit)
{
    const auto r = run("mgf --fading rayleigh --snr-db 6.98970004336 --s 0.3 --p 1");
    ASSERT_EQ(r.status, 0);
    const auto rows = data_lines(r.out);
    ASSERT_EQ(rows.size(), 2u);
    const auto c = cells(rows[1]);
    ASSERT_GE(c.size(), 5u);
    EXPECT_NEAR(std::stod(c[3]), 0.4, 0.008);
    EXPECT_LT(std::stod(c[4]), 0.0);
}

TEST(CliSimulate, SurrogateBiasColumns)
{
    const auto r = run("simulate --scheme SC --branches 2 --snr-db 10 --mc-samples 5000 --surrogate-bias --format json");
    ASSERT_EQ(r.status, 0);
    const auto doc = nlohmann::ordered_json::parse(r.out);
    ASSERT_EQ(doc["rows"].size(), 1u);
    EXPECT_TRUE(doc["rows"][0].contains("relative_gap"));
    EXPECT_EQ(run("simulate --scheme MRC --branches 2 --snr-db 10 --mc-samples 5000 --surrogate-bias").status, 2);
}

TEST(CliValidate, PassAndTamperedFailure)
{
    auto r = run("validate --only 1");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("PASS [1] closed-form-vs-foxh ("), std::string::npos);
    EXPECT_NE(r.out.find(" s):"), std::string::npos);

    r = run("validate --only 1 --tolerance-scale 1e-12");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("FAIL [1] closed-form-vs-foxh"), std::string::npos);
}
