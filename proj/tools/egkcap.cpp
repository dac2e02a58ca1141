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

// egkcap: ergodic capacity over EGK fading from the command line.
//
// Exit codes: 0 success, 1 validation failure, 2 configuration error,
// 3 numerical error. Precedence: defaults < --config file < flags.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "egkcap/cli.hpp"
#include "egkcap/validation.hpp"

namespace {

using namespace egkcap;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Flags {
    std::string config;
    std::string scheme;
    int branches = 0;
    int surrogate_order = 0;
    std::string approach;
    std::vector<std::string> fading;
    std::string snr_db;
    double bandwidth = 0.0;
    int nodes = 0;
    double tolerance = 0.0;
    std::string mapping;
    long long mc_samples = 0;
    unsigned long long seed = 0;
    std::string format;
    std::string output;
    int workers = 0;
    double no_shadowing_ms = 0.0;
    std::string s_values;
    std::string p_values;
    bool surrogate_bias = false;
};

struct Options {
    CLI::Option* config = nullptr;
    CLI::Option* scheme = nullptr;
    CLI::Option* branches = nullptr;
    CLI::Option* surrogate_order = nullptr;
    CLI::Option* approach = nullptr;
    CLI::Option* fading = nullptr;
    CLI::Option* snr_db = nullptr;
    CLI::Option* bandwidth = nullptr;
    CLI::Option* nodes = nullptr;
    CLI::Option* tolerance = nullptr;
    CLI::Option* mapping = nullptr;
    CLI::Option* mc_samples = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* format = nullptr;
    CLI::Option* output = nullptr;
    CLI::Option* workers = nullptr;
    CLI::Option* no_shadowing_ms = nullptr;
    CLI::Option* s_values = nullptr;
    CLI::Option* p_values = nullptr;
    CLI::Option* surrogate_bias = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

// Flags shared by the table commands; each subcommand registers its own copy.
Options add_run_flags(CLI::App& cmd, Flags& f, bool scheme_flags, bool grid_flags)
{
    Options o;
    o.config = cmd.add_option("--config", f.config, "JSON config file; flags override its values");
    if (scheme_flags) {
        o.scheme = cmd.add_option("--scheme", f.scheme,
                                  "MRC, EGC, SC, RMSC, CASCADED, GEOMETRIC_MEAN, AF_MULTIHOP or MIN_BOUND");
        o.branches = cmd.add_option("--branches", f.branches, "number of branches or hops L");
        o.surrogate_order = cmd.add_option("--surrogate-order", f.surrogate_order, "finite order for limit schemes (default 8)");
        o.approach = cmd.add_option("--approach", f.approach, "geometric mean: approach p -> 0 from 'above' or 'below'");
    }
    o.fading = cmd.add_option("--fading", f.fading,
                              "per-branch fading: rayleigh, nakagami_m(m), generalized_nakagami(m,xi), generalized_k(m,m_s), "
                              "egk(m,xi,m_s,xi_s) or m=..,xi=..,m_s=..,xi_s=..,gain_db=..; repeat per branch or give once");
    o.snr_db = cmd.add_option("--snr-db", f.snr_db, "mean SNR grid in dB, start:stop:step or a single value");
    o.no_shadowing_ms = cmd.add_option("--no-shadowing-ms", f.no_shadowing_ms, "m_s used for shadowing-free models (default 50)");
    o.format = cmd.add_option("--format", f.format, "csv or json");
    o.output = cmd.add_option("--output", f.output, "output file (default stdout)");
    o.workers = cmd.add_option("--workers", f.workers, "worker threads");
    if (grid_flags) {
        o.bandwidth = cmd.add_option("--bandwidth", f.bandwidth, "bandwidth W multiplier (default 1)");
        o.nodes = cmd.add_option("--nodes", f.nodes, "initial quadrature node count (default 256)");
        o.tolerance = cmd.add_option("--tolerance", f.tolerance, "relative quadrature tolerance (default 1e-7)");
        o.mapping = cmd.add_option("--mapping", f.mapping, "quadrature map: logarithmic, rational or rational_cubic");
        o.mc_samples = cmd.add_option("--mc-samples", f.mc_samples, "Monte-Carlo samples per grid point (0 disables)");
        o.seed = cmd.add_option("--seed", f.seed, "Monte-Carlo seed");
    }
    return o;
}

cli::RunConfig build_config(const Flags& f, const Options& o)
{
    cli::RunConfig cfg;
    if (given(o.config)) cli::load_config_file(f.config, cfg);
    if (given(o.scheme)) cfg.scheme = scheme_from_string(f.scheme);
    if (given(o.branches)) cfg.branches = f.branches;
    if (given(o.surrogate_order)) cfg.surrogate_order = f.surrogate_order;
    if (given(o.approach)) {
        if (f.approach == "above") cfg.approach = Approach::FromAbove;
        else if (f.approach == "below") cfg.approach = Approach::FromBelow;
        else throw InputError("approach: expected above or below");
    }
    if (given(o.fading)) cfg.fading = f.fading;
    if (given(o.snr_db)) cfg.snr_db = cli::parse_grid(f.snr_db);
    if (given(o.bandwidth)) cfg.bandwidth = f.bandwidth;
    if (given(o.nodes)) {
        cfg.quad.node_count = f.nodes;
        cfg.quad.max_node_count = std::max(cfg.quad.max_node_count, f.nodes);
    }
    if (given(o.tolerance)) cfg.quad.tolerance = f.tolerance;
    if (given(o.mapping)) cfg.quad.mapping = mapping_from_string(f.mapping);
    if (given(o.mc_samples)) cfg.mc_samples = f.mc_samples;
    if (given(o.seed)) cfg.seed = f.seed;
    if (given(o.format)) cfg.format = cli::format_from_string(f.format);
    if (given(o.output)) cfg.output = f.output;
    if (given(o.workers)) cfg.workers = f.workers;
    if (given(o.no_shadowing_ms)) cfg.no_shadowing_ms = f.no_shadowing_ms;
    if (given(o.s_values)) cfg.s_values = cli::parse_number_list(f.s_values, "s");
    if (given(o.p_values)) cfg.p_values = cli::parse_number_list(f.p_values, "p");
    if (given(o.surrogate_bias)) cfg.surrogate_bias = f.surrogate_bias;
    return cfg;
}

void emit(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("output: cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw InputError("output: write to '" + path + "' failed");
}

template <class Fn>
int guarded(Fn&& fn)
{
    try {
        return fn();
    } catch (const InputError& e) {
        std::cerr << "egkcap: configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cli::GridPointError& e) {
        std::cerr << "egkcap: numerical error at " << e.what() << '\n';
        return kExitNumerical;
    } catch (const DomainError& e) {
        std::cerr << "egkcap: configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "egkcap: numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ergodic capacity of diversity combining and relaying over EGK fading"};
    app.require_subcommand(1);

    Flags cap_flags;
    auto* capacity = app.add_subcommand("capacity", "capacity over a mean-SNR grid, optionally with Monte-Carlo columns");
    const Options cap_opts = add_run_flags(*capacity, cap_flags, true, true);

    Flags aux_flags;
    auto* aux = app.add_subcommand("aux", "auxiliary kernel C(s): general Mellin-Barnes route next to the closed form");
    Options aux_opts;
    aux_opts.config = aux->add_option("--config", aux_flags.config, "JSON config file; flags override its values");
    aux_opts.scheme = aux->add_option("--scheme", aux_flags.scheme, "combining scheme");
    aux_opts.branches = aux->add_option("--branches", aux_flags.branches, "number of branches or hops L");
    aux_opts.surrogate_order = aux->add_option("--surrogate-order", aux_flags.surrogate_order, "order for limit schemes");
    aux_opts.approach = aux->add_option("--approach", aux_flags.approach, "geometric mean: 'above' or 'below'");
    aux_opts.s_values = aux->add_option("--s", aux_flags.s_values, "comma-separated s values");
    aux_opts.format = aux->add_option("--format", aux_flags.format, "csv or json");
    aux_opts.output = aux->add_option("--output", aux_flags.output, "output file (default stdout)");

    Flags mgf_flags;
    auto* mgf = app.add_subcommand("mgf", "generalized MGF E[exp(-s gamma^p)] and its s-derivative");
    Options mgf_opts = add_run_flags(*mgf, mgf_flags, false, false);
    mgf_opts.s_values = mgf->add_option("--s", mgf_flags.s_values, "comma-separated s values");
    mgf_opts.p_values = mgf->add_option("--p", mgf_flags.p_values, "comma-separated nonzero p values");

    Flags sim_flags;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo capacity with the exact combining rule");
    Options sim_opts = add_run_flags(*simulate, sim_flags, true, true);
    sim_opts.surrogate_bias = simulate->add_flag("--surrogate-bias", sim_flags.surrogate_bias,
                                                 "limit schemes: also report the finite-order surrogate and its gap");

    validation::Options val;
    std::vector<int> only;
    auto* validate = app.add_subcommand("validate", "run the acceptance criteria; exit 0 iff all pass");
    validate->add_option("--only", only, "criterion ids to run (default all)")->check(CLI::Range(1, validation::kCriterionCount));
    validate->add_option("--mc-samples", val.mc_samples, "Monte-Carlo samples per oracle estimate")->check(CLI::PositiveNumber);
    validate->add_option("--seed", val.seed, "Monte-Carlo seed");
    validate->add_option("--workers", val.workers, "worker threads")->check(CLI::PositiveNumber);
    validate->add_option("--tolerance-scale", val.tolerance_scale, "multiply every tolerance (testing hook)")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    auto table_command = [](const Flags& f, const Options& o, cli::Table (*run)(const cli::RunConfig&)) {
        return guarded([&] {
            const cli::RunConfig cfg = build_config(f, o);
            const cli::Table t = run(cfg);
            for (const auto& w : t.warnings) std::cerr << "egkcap: warning: " << w << '\n';
            emit(cli::render(t, cfg.format), cfg.output);
            return kExitOk;
        });
    };

    if (*capacity) return table_command(cap_flags, cap_opts, cli::run_capacity);
    if (*aux) return table_command(aux_flags, aux_opts, cli::run_aux);
    if (*mgf) return table_command(mgf_flags, mgf_opts, cli::run_mgf);
    if (*simulate) return table_command(sim_flags, sim_opts, cli::run_simulate);
    if (*validate) {
        val.only = only;
        int failed = 0;
        validation::run(val, [&](const validation::CriterionResult& r) {
            std::cout << validation::format_line(r) << std::endl;
            if (!r.passed) ++failed;
        });
        std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << std::endl;
        return failed == 0 ? kExitOk : kExitValidation;
    }
    return kExitConfig;
}
