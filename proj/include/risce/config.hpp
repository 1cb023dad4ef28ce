// SPDX-License-Identifier: Apache-2.0
//
// risce: conditioning-aware channel estimation for RIS-assisted MIMO links
// Copyright (C) 2026 The risce authors
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

#ifndef risce_config_H
#define risce_config_H

#include "sim.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace risce {

// Flat "key = value" configuration files. '#' starts a comment, lists are comma
// separated, geometry settings use dotted keys (geometry.ris_rows = 16).

namespace detail {

inline std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        out.push_back(trim(item));
    return out;
}

inline std::uint64_t parse_unsigned(const std::string &key, const std::string &v)
{
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'.");
    try
    {
        return std::stoull(v);
    }
    catch (const std::exception &)
    {
        throw ConfigError(key + ": integer '" + v + "' is out of range.");
    }
}

inline double parse_real(const std::string &key, const std::string &v)
{
    std::size_t used = 0;
    double x = 0.0;
    try
    {
        x = std::stod(v, &used);
    }
    catch (const std::exception &)
    {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(x))
        throw ConfigError(key + ": expected a finite number, got '" + v + "'.");
    return x;
}

inline bool parse_bool(const std::string &key, const std::string &v)
{
    if (v == "on" || v == "true" || v == "1" || v == "wall")
        return true;
    if (v == "off" || v == "false" || v == "0")
        return false;
    throw ConfigError(key + ": expected on/off, got '" + v + "'.");
}

inline std::vector<std::size_t> parse_size_list(const std::string &key, const std::string &v)
{
    std::vector<std::size_t> out;
    for (const auto &item : split_list(v))
        out.push_back(std::size_t(parse_unsigned(key, item)));
    return out;
}

inline Point3 parse_point(const std::string &key, const std::string &v)
{
    const auto items = split_list(v);
    if (items.size() != 3)
        throw ConfigError(key + ": expected three comma-separated coordinates, got '" + v + "'.");
    return {parse_real(key, items[0]), parse_real(key, items[1]), parse_real(key, items[2])};
}

inline std::string format_real(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T>
std::string join(const std::vector<T> &v, const std::function<std::string(const T &)> &f)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + f(v[i]);
    return s;
}

inline std::string format_sizes(const std::vector<std::size_t> &v)
{
    return join<std::size_t>(v, [](const std::size_t &x) { return std::to_string(x); });
}

inline std::string format_point(const Point3 &p)
{
    return format_real(p(0)) + "," + format_real(p(1)) + "," + format_real(p(2));
}

struct KeySpec
{
    std::string key;
    std::function<void(SimConfig &, const std::string &)> set;
    std::function<std::string(const SimConfig &)> get;
};

struct RisShape
{
    std::size_t rows = 0, cols = 0;
};

inline const std::vector<KeySpec> &key_table()
{
    static const std::vector<KeySpec> table = [] {
        using S = SimConfig;
        using Str = const std::string &;
        std::vector<KeySpec> t;
        t.push_back({"n", [](S &c, Str v) { c.n = parse_unsigned("n", v); }, [](const S &c) { return std::to_string(c.n); }});
        t.push_back({"m", [](S &c, Str v) { c.m = parse_unsigned("m", v); }, [](const S &c) { return std::to_string(c.m); }});
        t.push_back({"q", [](S &c, Str v) { c.q = parse_size_list("q", v); }, [](const S &c) { return format_sizes(c.q); }});
        t.push_back({"b", [](S &c, Str v) { c.b = parse_size_list("b", v); }, [](const S &c) { return format_sizes(c.b); }});
        t.push_back({"t", [](S &c, Str v) { c.t = parse_size_list("t", v); }, [](const S &c) { return format_sizes(c.t); }});
        t.push_back({"l", [](S &c, Str v) { c.l = parse_size_list("l", v); }, [](const S &c) { return format_sizes(c.l); }});
        t.push_back({"snr_db", [](S &c, Str v) { c.snr_db = parse_real("snr_db", v); },
                     [](const S &c) { return format_real(c.snr_db); }});
        t.push_back({"l_rb", [](S &c, Str v) { c.l_rb = parse_unsigned("l_rb", v); },
                     [](const S &c) { return std::to_string(c.l_rb); }});
        t.push_back({"l_ur", [](S &c, Str v) { c.l_ur = parse_unsigned("l_ur", v); },
                     [](const S &c) { return std::to_string(c.l_ur); }});
        t.push_back({"trials", [](S &c, Str v) { c.trials = parse_unsigned("trials", v); },
                     [](const S &c) { return std::to_string(c.trials); }});
        t.push_back({"seed", [](S &c, Str v) { c.seed = parse_unsigned("seed", v); },
                     [](const S &c) { return std::to_string(c.seed); }});
        t.push_back({"methods",
                     [](S &c, Str v) {
                         c.methods.clear();
                         for (const auto &name : split_list(v))
                         {
                             auto m = parse_method(name);
                             if (!m)
                                 throw ConfigError("methods: unknown estimator '" + name +
                                                   "' (choose from conv2tce, omp, noperm, greedy).");
                             c.methods.push_back(*m);
                         }
                     },
                     [](const S &c) {
                         return join<Method>(c.methods, [](const Method &m) { return std::string(method_name(m)); });
                     }});
        t.push_back({"f_hat_rel_error", [](S &c, Str v) { c.f_hat_rel_error = parse_real("f_hat_rel_error", v); },
                     [](const S &c) { return format_real(c.f_hat_rel_error); }});
        t.push_back({"omp_sparsity", [](S &c, Str v) { c.omp_sparsity = parse_unsigned("omp_sparsity", v); },
                     [](const S &c) { return std::to_string(c.omp_sparsity); }});
        t.push_back({"timing", [](S &c, Str v) { c.timing = parse_bool("timing", v); },
                     [](const S &c) { return std::string(c.timing ? "on" : "off"); }});
        t.push_back({"threads", [](S &c, Str v) { c.threads = parse_unsigned("threads", v); },
                     [](const S &c) { return std::to_string(c.threads); }});
        t.push_back({"geometry.bs_position", [](S &c, Str v) { c.geometry.bs_position = parse_point("geometry.bs_position", v); },
                     [](const S &c) { return format_point(c.geometry.bs_position); }});
        t.push_back({"geometry.ris_position",
                     [](S &c, Str v) { c.geometry.ris_position = parse_point("geometry.ris_position", v); },
                     [](const S &c) { return format_point(c.geometry.ris_position); }});
        t.push_back({"geometry.user_center",
                     [](S &c, Str v) { c.geometry.user_region_center = parse_point("geometry.user_center", v); },
                     [](const S &c) { return format_point(c.geometry.user_region_center); }});
        t.push_back({"geometry.user_radius",
                     [](S &c, Str v) { c.geometry.user_region_radius = parse_real("geometry.user_radius", v); },
                     [](const S &c) { return format_real(c.geometry.user_region_radius); }});
        t.push_back({"geometry.carrier_frequency",
                     [](S &c, Str v) { c.geometry.carrier_frequency = parse_real("geometry.carrier_frequency", v); },
                     [](const S &c) { return format_real(c.geometry.carrier_frequency); }});
        t.push_back({"geometry.bs_spacing",
                     [](S &c, Str v) { c.geometry.bs_array.spacing_wl = parse_real("geometry.bs_spacing", v); },
                     [](const S &c) { return format_real(c.geometry.bs_array.spacing_wl); }});
        t.push_back({"geometry.ris_rows",
                     [](S &c, Str v) { c.geometry.ris_array.rows = parse_unsigned("geometry.ris_rows", v); },
                     [](const S &c) { return std::to_string(c.geometry.ris_array.rows); }});
        t.push_back({"geometry.ris_cols",
                     [](S &c, Str v) { c.geometry.ris_array.cols = parse_unsigned("geometry.ris_cols", v); },
                     [](const S &c) { return std::to_string(c.geometry.ris_array.cols); }});
        t.push_back({"geometry.ris_spacing",
                     [](S &c, Str v) { c.geometry.ris_array.spacing_wl = parse_real("geometry.ris_spacing", v); },
                     [](const S &c) { return format_real(c.geometry.ris_array.spacing_wl); }});
        t.push_back({"geometry.scatterer_margin",
                     [](S &c, Str v) { c.geometry.scatterer_margin = parse_real("geometry.scatterer_margin", v); },
                     [](const S &c) { return format_real(c.geometry.scatterer_margin); }});
        t.push_back({"geometry.guard_radius",
                     [](S &c, Str v) { c.geometry.guard_radius = parse_real("geometry.guard_radius", v); },
                     [](const S &c) { return format_real(c.geometry.guard_radius); }});
        t.push_back({"geometry.los_k_factor",
                     [](S &c, Str v) { c.geometry.ris_bs_los_k_factor = parse_real("geometry.los_k_factor", v); },
                     [](const S &c) { return format_real(c.geometry.ris_bs_los_k_factor); }});
        return t;
    }();
    return table;
}

// Default RIS layout for M elements: the squarest power-of-2 grid, or a square grid.
inline RisShape default_ris_shape(std::size_t m)
{
    if (is_power_of_two(m))
    {
        const std::size_t rows = std::size_t(1) << (std::countr_zero(m) / 2);
        return {rows, m / rows};
    }
    const auto r = std::size_t(std::llround(std::sqrt(double(m))));
    if (r * r == m)
        return {r, r};
    return {};
}

} // namespace detail

struct ParsedConfig
{
    SimConfig config;
    std::vector<std::string> defaulted; // keys that kept their default value
};

/// Parses configuration text, applies "key=value" overrides on top, validates.
inline ParsedConfig parse_config_text(const std::string &text, const std::vector<std::string> &overrides = {})
{
    std::map<std::string, std::string> values;
    std::istringstream in(text);
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);)
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'.");
        const std::string key = detail::trim(line.substr(0, eq));
        if (!values.emplace(key, detail::trim(line.substr(eq + 1))).second)
            throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' appears twice.");
    }
    for (const auto &ov : overrides)
    {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + ov + "': expected key=value.");
        values[detail::trim(ov.substr(0, eq))] = detail::trim(ov.substr(eq + 1));
    }

    ParsedConfig out;
    const auto &table = detail::key_table();
    std::set<std::string> known;
    for (const auto &spec : table)
    {
        known.insert(spec.key);
        const auto it = values.find(spec.key);
        if (it == values.end())
            out.defaulted.push_back(spec.key);
        else
            spec.set(out.config, it->second);
    }
    for (const auto &[key, value] : values)
        if (!known.count(key))
            throw ConfigError("unknown key '" + key + "'.");

    SimConfig &c = out.config;
    c.geometry.bs_array.elements = c.n;
    // Without an explicit layout the RIS grid follows m.
    const bool has_rows = values.count("geometry.ris_rows") > 0, has_cols = values.count("geometry.ris_cols") > 0;
    detail::RisShape shape{c.geometry.ris_array.rows, c.geometry.ris_array.cols};
    if (!has_rows && !has_cols)
    {
        shape = detail::default_ris_shape(c.m);
        if (shape.rows == 0)
            throw ConfigError("m=" + std::to_string(c.m) +
                              " has no default planar layout; set geometry.ris_rows and geometry.ris_cols.");
    }
    else if (has_rows != has_cols)
        throw ConfigError("geometry.ris_rows and geometry.ris_cols must be given together.");
    if (shape.rows * shape.cols != c.m)
        throw ConfigError("geometry.ris_rows x geometry.ris_cols = " + std::to_string(shape.rows) + "x" +
                          std::to_string(shape.cols) + " does not equal m=" + std::to_string(c.m) + ".");
    c.geometry.ris_array.rows = shape.rows;
    c.geometry.ris_array.cols = shape.cols;

    c.validate();
    return out;
}

inline ParsedConfig parse_config(const std::string &path, const std::vector<std::string> &overrides = {})
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'.");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

/// Fully resolved configuration as "key = value" lines, in schema order.
inline std::vector<std::pair<std::string, std::string>> resolved_config(const SimConfig &c)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto &spec : detail::key_table())
        out.emplace_back(spec.key, spec.get(c));
    return out;
}

} // namespace risce

#endif
