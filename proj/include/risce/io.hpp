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

#ifndef risce_io_H
#define risce_io_H

#include "config.hpp"
#include "sim.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace risce {

inline constexpr const char *csv_header = "sweep,point,method,T,Q,B,L_rb,L_ur,snr_db,trials,mean_nmse,median_nmse,"
                                          "mean_worst_cond,mean_est_seconds,seed,partition_hash";

namespace detail {

// Scientific notation with 6 significant digits; printf spells out inf and nan.
inline std::string sci(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.5e", x);
    return buf;
}

inline std::string hex64(std::uint64_t x)
{
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

inline nlohmann::json number_or_null(double x)
{
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

} // namespace detail

/// One row per (point, method). Wall-time is written as nan unless timing is enabled,
/// which keeps repeated runs byte-identical.
inline std::string to_csv(const SweepResult &res, bool timing)
{
    std::string out = std::string(csv_header) + "\n";
    for (const auto &pr : res.points)
        for (const auto &s : pr.methods)
        {
            const SweepPoint &p = pr.point;
            out += p.sweep + "," + std::to_string(p.index) + "," + method_name(s.method) + "," + std::to_string(p.t) +
                   "," + std::to_string(p.q) + "," + std::to_string(p.b) + "," + std::to_string(p.l_rb) + "," +
                   std::to_string(p.l_ur) + "," + detail::sci(p.snr_db) + "," + std::to_string(s.trials) + "," +
                   detail::sci(s.mean_nmse) + "," + detail::sci(s.median_nmse) + "," + detail::sci(s.mean_worst_cond) +
                   "," + (timing ? detail::sci(s.mean_seconds) : std::string("nan")) + "," + std::to_string(res.seed) +
                   "," + (s.partition_hash ? detail::hex64(*s.partition_hash) : std::string("none")) + "\n";
        }
    return out;
}

inline nlohmann::json to_json(const SweepResult &res, bool timing)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto &pr : res.points)
        for (const auto &s : pr.methods)
        {
            const SweepPoint &p = pr.point;
            rows.push_back({{"sweep", p.sweep},
                            {"point", p.index},
                            {"method", method_name(s.method)},
                            {"T", p.t},
                            {"Q", p.q},
                            {"B", p.b},
                            {"L_rb", p.l_rb},
                            {"L_ur", p.l_ur},
                            {"snr_db", p.snr_db},
                            {"trials", s.trials},
                            {"mean_nmse", detail::number_or_null(s.mean_nmse)},
                            {"median_nmse", detail::number_or_null(s.median_nmse)},
                            {"mean_worst_cond", detail::number_or_null(s.mean_worst_cond)},
                            {"mean_est_seconds", timing ? detail::number_or_null(s.mean_seconds) : nlohmann::json(nullptr)},
                            {"flagged", s.flagged},
                            {"seed", res.seed},
                            {"partition_hash",
                             s.partition_hash ? nlohmann::json(detail::hex64(*s.partition_hash)) : nlohmann::json(nullptr)}});
        }
    return {{"sweep", res.sweep}, {"rows", rows}};
}

/// Sidecar metadata: the resolved configuration and the defaulted keys.
inline nlohmann::json run_metadata(const ParsedConfig &pc, const std::string &command)
{
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto &[k, v] : resolved_config(pc.config))
        cfg[k] = v;
    return {{"command", command}, {"config", cfg}, {"defaulted", pc.defaulted}, {"csv_header", csv_header}};
}

/// Writes to a temporary sibling and renames it over the target, so the target is
/// either absent, the old file, or the complete new file.
inline void write_atomic(const std::filesystem::path &path, const std::string &content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing.");
        out.write(content.data(), std::streamsize(content.size()));
        out.flush();
        if (!out)
        {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("failed writing '" + tmp.string() + "'.");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
    {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot move output into place at '" + path.string() + "'.");
    }
}

} // namespace risce

#endif
