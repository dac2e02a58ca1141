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

// Run configuration, table computation and rendering behind the egkcap
// command-line tool. Output is locale-independent: numbers go through
// std::to_chars (CSV) or the JSON writer, both shortest round-trip.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "egkcap/capacity.hpp"
#include "egkcap/egk_fading.hpp"
#include "egkcap/error.hpp"
#include "egkcap/mc_oracle.hpp"
#include "egkcap/quadrature.hpp"

namespace egkcap::cli {

using Json = nlohmann::ordered_json;

enum class Format { Csv, Json };

inline Format format_from_string(std::string_view name)
{
    if (name == "csv") return Format::Csv;
    if (name == "json") return Format::Json;
    throw InputError("format: expected csv or json, got '" + std::string(name) + "'");
}

inline const char* to_string(Format f) { return f == Format::Csv ? "csv" : "json"; }

/// Mean-SNR grid in dB, inclusive of stop when it lies on the grid.
struct SnrGrid {
    double start = 10.0;
    double stop = 10.0;
    double step = 1.0;

    std::vector<double> points() const
    {
        std::vector<double> out;
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
};

inline double parse_number(std::string_view text, std::string_view field)
{
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw InputError(std::string(field) + ": '" + std::string(text) + "' is not a finite number");
    }
    return v;
}

inline std::vector<std::string> split(std::string_view text, char sep)
{
    std::vector<std::string> out;
    std::size_t begin = 0;
    for (;;) {
        const std::size_t end = text.find(sep, begin);
        out.emplace_back(text.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin));
        if (end == std::string_view::npos) return out;
        begin = end + 1;
    }
}

inline std::vector<double> parse_number_list(std::string_view text, std::string_view field)
{
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_number(item, field));
    return out;
}

/// "start:stop:step" or a single value.
inline SnrGrid parse_grid(std::string_view text)
{
    const auto parts = split(text, ':');
    SnrGrid g;
    if (parts.size() == 1) {
        g.start = g.stop = parse_number(parts[0], "snr-db");
        return g;
    }
    if (parts.size() != 3) throw InputError("snr-db: expected start:stop:step or a single value, got '" + std::string(text) + "'");
    g.start = parse_number(parts[0], "snr-db start");
    g.stop = parse_number(parts[1], "snr-db stop");
    g.step = parse_number(parts[2], "snr-db step");
    return g;
}

/// One branch: the fading shape with unit mean SNR plus a gain relative to the grid SNR.
struct BranchFading {
    EgkParams shape;
    double gain_db = 0.0;
};

/// Accepted forms:
///   rayleigh | nakagami_m(2) | generalized_nakagami(2,1.5) | generalized_k(2,3) | egk(2,1,3,1)
///   m=2,xi=1,m_s=3,xi_s=1,gain_db=-3   (missing keys keep their defaults)
inline BranchFading parse_fading(std::string_view text, double no_shadowing_ms = kNoShadowingMs)
{
    BranchFading out;
    const std::string desc(text);
    if (desc.find('=') != std::string::npos) {
        out.shape.m_s = no_shadowing_ms;
        for (const auto& item : split(desc, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw InputError("fading: expected key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            const double v = parse_number(std::string_view(item).substr(eq + 1), "fading " + key);
            if (key == "m") out.shape.m = v;
            else if (key == "xi") out.shape.xi = v;
            else if (key == "m_s") out.shape.m_s = v;
            else if (key == "xi_s") out.shape.xi_s = v;
            else if (key == "gain_db") out.gain_db = v;
            else throw InputError("fading: unknown key '" + key + "' (expected m, xi, m_s, xi_s, gain_db)");
        }
        out.shape.mean_snr = 1.0;
        try {
            out.shape.validate();
        } catch (const DomainError& e) {
            throw InputError(std::string("fading '") + desc + "': " + e.what());
        }
        return out;
    }
    std::string name = desc;
    std::vector<double> args;
    const auto open = desc.find('(');
    if (open != std::string::npos) {
        if (desc.back() != ')') throw InputError("fading: unbalanced parentheses in '" + desc + "'");
        name = desc.substr(0, open);
        const std::string inner = desc.substr(open + 1, desc.size() - open - 2);
        if (!inner.empty()) args = parse_number_list(inner, "fading " + name);
    }
    try {
        out.shape = named_special_case(name, args, 1.0, no_shadowing_ms);
    } catch (const DomainError& e) {
        throw InputError(std::string("fading '") + desc + "': " + e.what());
    }
    return out;
}

struct RunConfig {
    Scheme scheme = Scheme::MRC;
    int branches = 1;
    std::optional<int> surrogate_order;
    Approach approach = Approach::FromAbove;
    std::vector<std::string> fading = {"rayleigh"};
    SnrGrid snr_db;
    double bandwidth = 1.0;
    QuadratureSpec quad;
    std::int64_t mc_samples = 0; // 0 disables the Monte-Carlo columns
    std::uint64_t seed = 1;
    Format format = Format::Csv;
    std::string output; // empty writes to stdout
    int workers = 1;
    double no_shadowing_ms = kNoShadowingMs;
    std::vector<double> s_values = {1.0}; // aux and mgf
    std::vector<double> p_values = {1.0}; // mgf
    bool surrogate_bias = false;          // simulate: add surrogate columns
};

inline CombinerSpec combiner(const RunConfig& cfg, int L)
{
    std::optional<int> order = cfg.surrogate_order;
    if (!is_limit_scheme(cfg.scheme) && order) {
        throw InputError(std::string("surrogate-order: applies to limit schemes only, not ") + egkcap::to_string(cfg.scheme));
    }
    return combiner_params(cfg.scheme, L, order, cfg.approach);
}

/// Validates the config and returns one branch description per branch.
inline std::vector<BranchFading> resolve_branches(const RunConfig& cfg)
{
    if (cfg.branches < 1) throw InputError("branches: must be >= 1");
    if (cfg.fading.empty()) throw InputError("fading: at least one descriptor is required");
    if (cfg.fading.size() != 1 && static_cast<int>(cfg.fading.size()) != cfg.branches) {
        std::ostringstream os;
        os << "fading: got " << cfg.fading.size() << " descriptors for " << cfg.branches
           << " branches (give one for all branches or one per branch)";
        throw InputError(os.str());
    }
    if (!(cfg.snr_db.step > 0.0)) throw InputError("snr-db: step must be > 0");
    if (cfg.snr_db.start > cfg.snr_db.stop) throw InputError("snr-db: start must be <= stop");
    if (cfg.snr_db.points().size() > 100000) throw InputError("snr-db: grid has more than 100000 points");
    if (!(cfg.bandwidth > 0.0) || !std::isfinite(cfg.bandwidth)) throw InputError("bandwidth: must be positive");
    if (cfg.mc_samples != 0 && cfg.mc_samples < 1000) throw InputError("mc-samples: must be 0 (off) or >= 1000");
    if (cfg.workers < 1) throw InputError("workers: must be >= 1");
    if (!(cfg.no_shadowing_ms >= 0.5)) throw InputError("no-shadowing-ms: must be >= 0.5");
    cfg.quad.validate();
    std::vector<BranchFading> out;
    for (int l = 0; l < cfg.branches; ++l) {
        out.push_back(parse_fading(cfg.fading[cfg.fading.size() == 1 ? 0 : l], cfg.no_shadowing_ms));
    }
    combiner(cfg, cfg.branches);
    return out;
}

inline std::vector<EgkParams> branch_params(const std::vector<BranchFading>& fading, double snr_db)
{
    std::vector<EgkParams> out;
    for (const auto& f : fading) {
        EgkParams p = f.shape;
        p.mean_snr = std::pow(10.0, (snr_db + f.gain_db) / 10.0);
        out.push_back(p);
    }
    return out;
}

/// Raised when one grid point fails numerically; names the point.
class GridPointError : public Error {
public:
    GridPointError(const std::string& where, const std::string& what) : Error(where + ": " + what) {}
};

// ---------------------------------------------------------------------------
// Tables

using Cell = std::optional<double>;

struct Table {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    Json summary = Json::object();
    std::vector<std::string> footer; // CSV comment lines after the data rows
    std::vector<std::string> warnings;
};

inline std::string format_number(double v)
{
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string render_csv(const Table& t)
{
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += t.columns[c];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            if (row[c]) out += format_number(*row[c]);
        }
        out += '\n';
    }
    for (const auto& line : t.footer) out += "# " + line + '\n';
    return out;
}

inline Json to_json(const Table& t)
{
    Json doc = Json::object();
    doc["command"] = t.command;
    Json rows = Json::array();
    for (const auto& row : t.rows) {
        Json r = Json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (row[c] && std::isfinite(*row[c])) {
                r[t.columns[c]] = *row[c];
            } else {
                r[t.columns[c]] = nullptr;
            }
        }
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    doc["summary"] = t.summary;
    doc["warnings"] = t.warnings;
    return doc;
}

inline std::string render(const Table& t, Format f)
{
    if (f == Format::Csv) return render_csv(t);
    return to_json(t).dump(2) + '\n';
}

namespace detail {

// Split workers between grid points and the work inside one point.
inline std::pair<int, int> split_workers(int workers, std::size_t points)
{
    const int outer = static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(workers, points)));
    return {outer, std::max(1, workers / outer)};
}

inline std::string at_snr(double snr_db)
{
    return "grid point snr_db=" + format_number(snr_db);
}

} // namespace detail

inline Table run_capacity(const RunConfig& cfg)
{
    const auto fading = resolve_branches(cfg);
    const CombinerSpec spec = combiner(cfg, cfg.branches);
    const auto grid = cfg.snr_db.points();
    const bool mc = cfg.mc_samples > 0;
    const auto [outer, inner] = detail::split_workers(cfg.workers, grid.size());

    struct Point {
        CapacityResult analytic;
        SimulationResult sim;
        std::string error;
    };
    std::vector<Point> pts(grid.size());
    parallel_for(grid.size(), outer, [&](std::size_t i) {
        const auto branches = branch_params(fading, grid[i]);
        try {
            QuadratureSpec q = cfg.quad;
            q.workers = inner;
            pts[i].analytic = ergodic_capacity_inid(branches, spec, 1.0, q);
            if (mc) {
                SimulationPlan plan;
                plan.branches = branches;
                plan.scheme = cfg.scheme;
                plan.sample_count = cfg.mc_samples;
                plan.seed = cfg.seed;
                plan.workers = inner;
                pts[i].sim = simulate_capacity(plan);
            }
        } catch (const InputError&) {
            throw;
        } catch (const Error& e) {
            pts[i].error = e.what();
        }
    });

    Table t;
    t.command = "capacity";
    t.columns = {"snr_db", "capacity_bits_per_hz", "error_estimate", "mc_estimate", "mc_ci95_low", "mc_ci95_high", "abs_diff"};
    int outside = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!pts[i].error.empty()) throw GridPointError(detail::at_snr(grid[i]), pts[i].error);
        const auto& a = pts[i].analytic;
        const double cap = a.capacity * cfg.bandwidth;
        const double err = a.error_estimate * cfg.bandwidth;
        std::vector<Cell> row = {grid[i], cap, err, std::nullopt, std::nullopt, std::nullopt, std::nullopt};
        if (mc) {
            const auto& s = pts[i].sim;
            const double w = cfg.bandwidth;
            row[3] = s.estimate * w;
            row[4] = s.ci95_low * w;
            row[5] = s.ci95_high * w;
            row[6] = std::abs(cap - s.estimate * w);
            if (cap < s.ci95_low * w || cap > s.ci95_high * w) ++outside;
        }
        t.rows.push_back(std::move(row));
    }
    t.summary["scheme"] = egkcap::to_string(spec.scheme);
    t.summary["branches"] = spec.branch_count;
    t.summary["eta"] = spec.eta;
    t.summary["p"] = spec.p;
    t.summary["q"] = spec.q;
    t.summary["rows"] = grid.size();
    if (mc) {
        t.summary["mc_samples"] = cfg.mc_samples;
        t.summary["seed"] = cfg.seed;
        t.summary["rows_outside_mc_ci95"] = outside;
        t.footer.push_back("rows with capacity outside mc_ci95: " + std::to_string(outside) + " of " +
                           std::to_string(grid.size()));
    }
    if (!pts.empty()) t.warnings = pts.front().analytic.warnings;
    return t;
}

inline Table run_aux(const RunConfig& cfg)
{
    if (cfg.branches < 1) throw InputError("branches: must be >= 1");
    const CombinerSpec spec = combiner(cfg, cfg.branches);
    for (double s : cfg.s_values) {
        if (!(s > 0.0)) throw InputError("s: all values must be > 0");
    }
    Table t;
    t.command = "aux";
    t.columns = {"s", "aux_general", "aux_closed_form", "abs_diff"};
    for (double s : cfg.s_values) {
        double general;
        try {
            general = aux_c_foxh(spec, s).value;
        } catch (const InputError&) {
            throw;
        } catch (const Error& e) {
            throw GridPointError("s=" + format_number(s), e.what());
        }
        Cell closed = aux_c_closed_form(spec, s);
        if (!closed && spec.scheme == Scheme::RMSC) closed = aux_c_rmsc_closed_form(s);
        Cell diff;
        if (closed) diff = std::abs(general - *closed);
        t.rows.push_back({s, general, closed, diff});
    }
    t.summary["scheme"] = egkcap::to_string(spec.scheme);
    t.summary["branches"] = spec.branch_count;
    t.summary["eta"] = spec.eta;
    t.summary["q"] = spec.q;
    return t;
}

inline Table run_mgf(const RunConfig& cfg)
{
    RunConfig one = cfg;
    if (cfg.fading.size() != 1) throw InputError("fading: mgf takes exactly one descriptor");
    one.branches = 1;
    const auto fading = resolve_branches(one);
    Table t;
    t.command = "mgf";
    t.columns = {"snr_db", "p", "s", "mgf", "mgf_derivative", "mgf_error", "derivative_error"};
    for (double snr_db : cfg.snr_db.points()) {
        const EgkParams par = branch_params(fading, snr_db).front();
        for (double p : cfg.p_values) {
            if (p == 0.0) throw InputError("p: must be nonzero");
            for (double s : cfg.s_values) {
                if (!(s > 0.0)) throw InputError("s: all values must be > 0");
                try {
                    const MgfPair m = egk_generalized_mgf_pair(par, p, s);
                    t.rows.push_back({snr_db, p, s, m.value, m.derivative, m.value_error, m.derivative_error});
                } catch (const Error& e) {
                    throw GridPointError(detail::at_snr(snr_db) + " p=" + format_number(p) + " s=" + format_number(s),
                                         e.what());
                }
            }
        }
    }
    return t;
}

inline Table run_simulate(const RunConfig& cfg)
{
    const auto fading = resolve_branches(cfg);
    if (cfg.mc_samples < 1000) throw InputError("mc-samples: simulate needs >= 1000 samples");
    const bool bias = cfg.surrogate_bias;
    std::optional<CombinerSpec> spec;
    if (bias) {
        if (!is_limit_scheme(cfg.scheme)) throw InputError("surrogate-bias: applies to limit schemes only");
        spec = combiner(cfg, cfg.branches);
    }
    Table t;
    t.command = "simulate";
    t.columns = {"snr_db", "mc_estimate", "standard_error", "mc_ci95_low", "mc_ci95_high"};
    if (bias) {
        t.columns.insert(t.columns.end(), {"surrogate_estimate", "absolute_gap", "relative_gap"});
    }
    for (double snr_db : cfg.snr_db.points()) {
        SimulationPlan plan;
        plan.branches = branch_params(fading, snr_db);
        plan.scheme = cfg.scheme;
        plan.sample_count = cfg.mc_samples;
        plan.seed = cfg.seed;
        plan.bandwidth = cfg.bandwidth;
        plan.workers = cfg.workers;
        if (bias) {
            const auto b = simulate_surrogate_bias(plan, *spec);
            t.rows.push_back({snr_db, b.exact.estimate, b.exact.standard_error, b.exact.ci95_low, b.exact.ci95_high,
                              b.surrogate.estimate, b.absolute_gap, b.relative_gap});
        } else {
            const auto r = simulate_capacity(plan);
            t.rows.push_back({snr_db, r.estimate, r.standard_error, r.ci95_low, r.ci95_high});
        }
    }
    t.summary["scheme"] = egkcap::to_string(cfg.scheme);
    t.summary["branches"] = cfg.branches;
    t.summary["mc_samples"] = cfg.mc_samples;
    t.summary["seed"] = cfg.seed;
    return t;
}

// ---------------------------------------------------------------------------
// Config file: one JSON object. Flags given on the command line override it.

namespace detail {

template <class T>
T field(const Json& v, const std::string& key)
{
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw InputError("config field '" + key + "': wrong type (" + std::string(v.type_name()) + ")");
    }
}

inline SnrGrid grid_field(const Json& v)
{
    if (v.is_string()) return parse_grid(v.get<std::string>());
    if (v.is_number()) {
        SnrGrid g;
        g.start = g.stop = v.get<double>();
        return g;
    }
    if (v.is_object()) {
        SnrGrid g;
        for (const auto& [k, x] : v.items()) {
            if (k == "start") g.start = field<double>(x, "snr_db.start");
            else if (k == "stop") g.stop = field<double>(x, "snr_db.stop");
            else if (k == "step") g.step = field<double>(x, "snr_db.step");
            else throw InputError("config field 'snr_db." + k + "': unknown key");
        }
        return g;
    }
    throw InputError("config field 'snr_db': expected \"start:stop:step\", a number, or {start, stop, step}");
}

inline std::vector<double> list_field(const Json& v, const std::string& key)
{
    if (v.is_number()) return {v.get<double>()};
    if (v.is_string()) return parse_number_list(v.get<std::string>(), key);
    return field<std::vector<double>>(v, key);
}

} // namespace detail

inline void apply_config_json(const Json& doc, RunConfig& cfg)
{
    if (!doc.is_object()) throw InputError("config: top level must be a JSON object");
    for (const auto& [key, v] : doc.items()) {
        if (key == "scheme") cfg.scheme = scheme_from_string(detail::field<std::string>(v, key));
        else if (key == "branches") cfg.branches = detail::field<int>(v, key);
        else if (key == "surrogate_order") {
            if (v.is_null()) cfg.surrogate_order.reset();
            else cfg.surrogate_order = detail::field<int>(v, key);
        } else if (key == "approach") {
            const auto a = detail::field<std::string>(v, key);
            if (a == "above") cfg.approach = Approach::FromAbove;
            else if (a == "below") cfg.approach = Approach::FromBelow;
            else throw InputError("config field 'approach': expected above or below");
        } else if (key == "fading") {
            if (v.is_string()) cfg.fading = {v.get<std::string>()};
            else cfg.fading = detail::field<std::vector<std::string>>(v, key);
        } else if (key == "snr_db") cfg.snr_db = detail::grid_field(v);
        else if (key == "bandwidth") cfg.bandwidth = detail::field<double>(v, key);
        else if (key == "nodes") cfg.quad.node_count = detail::field<int>(v, key);
        else if (key == "max_nodes") cfg.quad.max_node_count = detail::field<int>(v, key);
        else if (key == "tolerance") cfg.quad.tolerance = detail::field<double>(v, key);
        else if (key == "mapping") cfg.quad.mapping = mapping_from_string(detail::field<std::string>(v, key));
        else if (key == "mc_samples") cfg.mc_samples = detail::field<std::int64_t>(v, key);
        else if (key == "seed") cfg.seed = detail::field<std::uint64_t>(v, key);
        else if (key == "format") cfg.format = format_from_string(detail::field<std::string>(v, key));
        else if (key == "output") cfg.output = detail::field<std::string>(v, key);
        else if (key == "workers") cfg.workers = detail::field<int>(v, key);
        else if (key == "no_shadowing_ms") cfg.no_shadowing_ms = detail::field<double>(v, key);
        else if (key == "s") cfg.s_values = detail::list_field(v, key);
        else if (key == "p") cfg.p_values = detail::list_field(v, key);
        else if (key == "surrogate_bias") cfg.surrogate_bias = detail::field<bool>(v, key);
        else throw InputError("config: unknown field '" + key + "'");
    }
}

inline void load_config_file(const std::string& path, RunConfig& cfg)
{
    std::ifstream in(path);
    if (!in) throw InputError("config: cannot open '" + path + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("config '" + path + "': " + e.what());
    }
    apply_config_json(doc, cfg);
}

} // namespace egkcap::cli
