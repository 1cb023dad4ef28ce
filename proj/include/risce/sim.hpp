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

#ifndef risce_sim_H
#define risce_sim_H

#include "channel.hpp"
#include "estimators.hpp"
#include "grouping.hpp"
#include "numerics.hpp"
#include "phase.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace risce {

// ---- Configuration --------------------------------------------------------

enum class Method
{
    conv2tce,
    omp,
    noperm,
    greedy
};

inline const char *method_name(Method m)
{
    switch (m)
    {
    case Method::conv2tce: return "conv2tce";
    case Method::omp: return "omp";
    case Method::noperm: return "noperm";
    case Method::greedy: return "greedy";
    }
    return "?";
}

inline std::optional<Method> parse_method(const std::string &s)
{
    for (Method m : {Method::conv2tce, Method::omp, Method::noperm, Method::greedy})
        if (s == method_name(m))
            return m;
    return std::nullopt;
}

inline bool is_grouped(Method m) { return m == Method::noperm || m == Method::greedy; }

/// Invalid configuration. The message names the offending keys.
struct ConfigError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

struct SimConfig
{
    std::size_t n = 64;  // BS antennas
    std::size_t m = 256; // RIS elements
    std::vector<std::size_t> q{16};             // group counts (first entry used unless swept)
    std::vector<std::size_t> b{8};              // subframe counts (first entry used by the scatterer sweep)
    std::vector<std::size_t> t{32, 64, 128};    // pilot budgets
    std::vector<std::size_t> l{4, 8, 16, 32};   // scatterer counts for the scatterer sweep
    double snr_db = 20.0;
    double power = 1.0;
    std::size_t l_rb = 16;
    std::size_t l_ur = 16;
    std::size_t trials = 200;
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::conv2tce, Method::omp, Method::noperm, Method::greedy};
    double f_hat_rel_error = 0.0;
    std::size_t omp_sparsity = 0; // 0: use the user-RIS scatterer count
    bool timing = false;          // report estimator wall-time (breaks byte-reproducibility)
    std::size_t threads = 0;      // 0: RISCE_THREADS, else hardware concurrency
    Geometry geometry{};

    bool wants(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

    void validate() const
    {
        auto fail = [](const std::string &msg) { throw ConfigError(msg); };
        auto s = [](std::size_t v) { return std::to_string(v); };

        if (n < 1)
            fail("n must be at least 1.");
        if (m < 1)
            fail("m must be at least 1.");
        if (trials < 1)
            fail("trials must be at least 1.");
        if (l_rb < 1 || l_ur < 1)
            fail("l_rb and l_ur must be at least 1.");
        if (!std::isfinite(snr_db))
            fail("snr_db must be finite.");
        if (!(power > 0.0) || !std::isfinite(power))
            fail("power must be positive.");
        if (!(f_hat_rel_error >= 0.0) || !std::isfinite(f_hat_rel_error))
            fail("f_hat_rel_error must be a finite value >= 0.");
        if (q.empty() || b.empty() || t.empty() || l.empty())
            fail("q, b, t and l must each list at least one value.");
        if (methods.empty())
            fail("methods must name at least one estimator.");
        for (std::size_t i = 0; i < methods.size(); ++i)
            for (std::size_t j = i + 1; j < methods.size(); ++j)
                if (methods[i] == methods[j])
                    fail(std::string("methods lists ") + method_name(methods[i]) + " twice.");

        for (std::size_t qv : q)
        {
            if (qv < 1)
                fail("q must be at least 1.");
            if (m % qv != 0)
                fail("m=" + s(m) + " is not divisible by q=" + s(qv) + ".");
            if (!is_power_of_two(qv))
                fail("q=" + s(qv) + " must be a power of 2.");
            if (!is_power_of_two(m / qv))
                fail("m/q=" + s(m / qv) + " (m=" + s(m) + ", q=" + s(qv) + ") must be a power of 2.");
        }
        for (std::size_t bv : b)
            if (bv < 1 || bv > m / q.front())
                fail("b=" + s(bv) + " must lie in [1, m/q] = [1, " + s(m / q.front()) + "] for q=" + s(q.front()) + ".");
        for (std::size_t tv : t)
            if (tv < 1)
                fail("t values must be at least 1.");
        for (std::size_t lv : l)
            if (lv < 1)
                fail("l values must be at least 1.");

        if (wants(Method::omp))
        {
            const std::size_t k = omp_sparsity ? omp_sparsity : std::max(l_ur, *std::max_element(l.begin(), l.end()));
            const std::size_t tmin = std::min(*std::min_element(t.begin(), t.end()), q.front() * b.front());
            if (k > n * tmin)
                fail("omp_sparsity=" + s(k) + " exceeds the measurement count n*t=" + s(n * tmin) + ".");
        }

        if (geometry.bs_array.elements != n)
            fail("n=" + s(n) + " does not match the BS array size " + s(geometry.bs_array.elements) + ".");
        if (geometry.ris_array.elements() != m)
            fail("m=" + s(m) + " does not match geometry.ris_rows x geometry.ris_cols = " + s(geometry.ris_array.rows) +
                 "x" + s(geometry.ris_array.cols) + ".");
        try
        {
            geometry.validate();
        }
        catch (const std::invalid_argument &e)
        {
            fail(std::string("geometry: ") + e.what());
        }
    }
};

/// sigma^2 = P 10^(-snr_db / 10).
inline double snr_to_noise_var(double snr_db, double power = 1.0)
{
    if (!(power > 0.0))
        throw std::invalid_argument("snr_to_noise_var: P must be positive.");
    return power * std::pow(10.0, -snr_db / 10.0);
}

// ---- Seeding -------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_seed(std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t p : parts)
        h = splitmix64(h ^ splitmix64(p));
    return h;
}

// Stream tags keep the generators of one trial independent of each other.
enum : std::uint64_t
{
    stream_channel = 0x43,  // channel draw and F-hat perturbation
    stream_random = 0x52,   // random-phase pilots shared by conv2tce and omp
    stream_piecewise = 0x50 // Hadamard-schedule pilots shared by noperm and greedy
};

// ---- Sweep points and records ---------------------------------------------

struct SweepPoint
{
    std::string sweep;     // "pilots", "scatterers" or "groups"
    std::size_t index = 0; // position within the sweep
    std::size_t t = 0, q = 0, b = 0;
    std::size_t l_rb = 0, l_ur = 0;
    double snr_db = 0.0;
    bool grouped_valid = true; // T = Q B with 1 <= B <= M/Q
};

struct MethodRecord
{
    Method method{};
    double nmse = 0.0;
    double worst_cond = std::numeric_limits<double>::quiet_NaN(); // +inf when singular
    double seconds = 0.0;
    bool flagged = false;
    std::optional<std::uint64_t> partition_hash;
};

struct TrialRecord
{
    std::size_t trial = 0;
    std::vector<MethodRecord> methods;
};

struct MethodSummary
{
    Method method{};
    std::size_t trials = 0;
    double mean_nmse = 0.0;
    double median_nmse = 0.0;
    double mean_worst_cond = 0.0;
    double mean_seconds = 0.0;
    std::size_t flagged = 0;
    std::optional<std::uint64_t> partition_hash; // digest of the per-trial partitions, in trial order
};

struct PointResult
{
    SweepPoint point;
    std::vector<MethodSummary> methods;

    const MethodSummary *find(Method m) const
    {
        for (const auto &s : methods)
            if (s.method == m)
                return &s;
        return nullptr;
    }
};

struct SweepResult
{
    std::string sweep;
    std::uint64_t seed = 0;
    std::vector<PointResult> points;
};

struct SweepHooks
{
    std::function<void(const std::string &)> warn;
    std::function<void(const PointResult &)> point_done;
};

// ---- One trial ------------------------------------------------------------

/// Shared per-configuration data that does not depend on the trial.
struct TrialContext
{
    ComplexMatrix dictionary; // OMP atoms, empty when omp is not requested

    explicit TrialContext(const SimConfig &cfg)
    {
        if (cfg.wants(Method::omp))
            dictionary = angular_dictionary(cfg.geometry.ris_array, cfg.geometry.wavelength());
    }
};

inline SweepPoint make_point(const SimConfig &cfg, std::string sweep, std::size_t index, std::size_t t, std::size_t q,
                             std::size_t l_rb, std::size_t l_ur)
{
    SweepPoint p;
    p.sweep = std::move(sweep);
    p.index = index;
    p.t = t;
    p.q = q;
    p.b = (q != 0 && t % q == 0) ? t / q : 0;
    p.l_rb = l_rb;
    p.l_ur = l_ur;
    p.snr_db = cfg.snr_db;
    p.grouped_valid = q != 0 && cfg.m % q == 0 && p.b >= 1 && p.b <= cfg.m / q;
    return p;
}

/// Full pipeline for one channel draw. The channel depends only on (seed, L_rb, L_ur,
/// trial), so every point of a sweep sees the same realizations; pilot noise depends on
/// the point as well.
inline TrialRecord run_trial(const SimConfig &cfg, const TrialContext &ctx, const SweepPoint &pt, std::size_t trial)
{
    TrialRecord rec;
    rec.trial = trial;

    Rng ch_rng(hash_seed({cfg.seed, stream_channel, pt.l_rb, pt.l_ur, trial}));
    const ChannelRealization ch = draw_channel(cfg.geometry, pt.l_rb, pt.l_ur, ch_rng);
    const ComplexMatrix f_hat = perturb_channel_estimate(ch.ris_bs, cfg.f_hat_rel_error, ch_rng);
    const double noise_var = snr_to_noise_var(pt.snr_db, cfg.power);

    ComplexMatrix psi, y_random;
    if (cfg.wants(Method::conv2tce) || cfg.wants(Method::omp))
    {
        Rng rng(hash_seed({cfg.seed, stream_random, pt.t, pt.l_rb, pt.l_ur, trial}));
        psi = random_phase_schedule(cfg.m, pt.t, rng);
        y_random = simulate_rx(ch.ris_bs, ch.user_ris, psi, cfg.power, noise_var, rng);
    }

    auto run_grouped = [&](Method method, const Partition &partition) {
        const PhaseSchedule sched = build_schedule(cfg.m, pt.q, pt.b, partition);
        Rng rng(hash_seed({cfg.seed, stream_piecewise, pt.t, pt.q, pt.b, pt.l_rb, pt.l_ur, trial}));
        const auto obs = simulate_pilot_rx(ch, sched, cfg.power, noise_var, rng);
        return piecewise_ls(f_hat, sched, decouple(obs, sched), method_name(method));
    };

    for (Method method : cfg.methods)
    {
        if (is_grouped(method) && !pt.grouped_valid)
            continue;

        MethodRecord r;
        r.method = method;
        Estimate est;
        switch (method)
        {
        case Method::conv2tce:
            est = conv_2tce(f_hat, psi, y_random);
            break;
        case Method::omp:
            est = omp_estimate(f_hat, psi, y_random, ctx.dictionary, cfg.omp_sparsity ? cfg.omp_sparsity : pt.l_ur);
            break;
        case Method::noperm:
        {
            const Partition p = contiguous_partition(cfg.m, pt.q);
            r.partition_hash = p.hash();
            est = run_grouped(method, p);
            break;
        }
        case Method::greedy:
        {
            const Partition p = greedy_partition(f_hat, pt.q);
            r.partition_hash = p.hash();
            est = run_grouped(method, p);
            break;
        }
        }
        r.nmse = nmse(est.h_hat, ch.user_ris);
        r.worst_cond = est.worst_condition();
        r.seconds = est.seconds;
        r.flagged = est.flagged;
        rec.methods.push_back(r);
    }
    return rec;
}

// ---- Aggregation ------------------------------------------------------------

inline double median_of(std::vector<double> v)
{
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

/// Reduces trial records in trial order, so the result does not depend on how the
/// trials were scheduled.
inline std::vector<MethodSummary> aggregate(const std::vector<TrialRecord> &records)
{
    std::vector<MethodSummary> out;
    if (records.empty())
        return out;
    const std::size_t count = records.front().methods.size();
    for (std::size_t k = 0; k < count; ++k)
    {
        MethodSummary s;
        s.method = records.front().methods[k].method;
        s.trials = records.size();
        std::vector<double> values;
        values.reserve(records.size());
        std::uint64_t digest = 0xcbf29ce484222325ULL;
        bool has_partition = false;
        for (const auto &rec : records)
        {
            const MethodRecord &r = rec.methods.at(k);
            values.push_back(r.nmse);
            s.mean_nmse += r.nmse;
            s.mean_worst_cond += r.worst_cond;
            s.mean_seconds += r.seconds;
            s.flagged += r.flagged ? 1 : 0;
            if (r.partition_hash)
            {
                has_partition = true;
                digest = splitmix64(digest ^ *r.partition_hash);
            }
        }
        const double n = double(records.size());
        s.mean_nmse /= n;
        s.mean_worst_cond /= n;
        s.mean_seconds /= n;
        s.median_nmse = median_of(std::move(values));
        if (has_partition)
            s.partition_hash = digest;
        out.push_back(s);
    }
    return out;
}

inline std::size_t resolve_threads(std::size_t requested)
{
    if (requested)
        return requested;
    if (const char *env = std::getenv("RISCE_THREADS"))
    {
        char *end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return std::size_t(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

/// All trials of one point, spread over worker threads.
inline PointResult run_point(const SimConfig &cfg, const TrialContext &ctx, const SweepPoint &pt)
{
    std::vector<TrialRecord> records(cfg.trials);
    const std::size_t workers = std::min(resolve_threads(cfg.threads), cfg.trials);

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < cfg.trials;)
        {
            try
            {
                records[i] = run_trial(cfg, ctx, pt, i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = cfg.trials;
            }
        }
    };
    if (workers <= 1)
        work();
    else
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    if (error)
        std::rethrow_exception(error);

    return {pt, aggregate(records)};
}

inline SweepResult run_points(const SimConfig &cfg, std::string sweep, const std::vector<SweepPoint> &points,
                              const SweepHooks &hooks)
{
    cfg.validate();
    const TrialContext ctx(cfg);
    SweepResult res;
    res.sweep = std::move(sweep);
    res.seed = cfg.seed;
    for (const auto &pt : points)
    {
        if (!pt.grouped_valid && hooks.warn)
            for (Method m : cfg.methods)
                if (is_grouped(m))
                {
                    hooks.warn(pt.sweep + " point " + std::to_string(pt.index) + ": T=" + std::to_string(pt.t) +
                               " is not Q*B with 1 <= B <= M/Q for Q=" + std::to_string(pt.q) +
                               "; grouped methods skipped.");
                    break;
                }
        res.points.push_back(run_point(cfg, ctx, pt));
        if (hooks.point_done)
            hooks.point_done(res.points.back());
    }
    return res;
}

// ---- Sweeps -------------------------------------------------------------------

/// NMSE versus pilot budget T at Q = cfg.q[0]; grouped methods use B = T / Q.
inline SweepResult sweep_pilot_overhead(const SimConfig &cfg, const std::vector<std::size_t> &t_values,
                                        const SweepHooks &hooks = {})
{
    std::vector<SweepPoint> pts;
    for (std::size_t t : t_values)
        pts.push_back(make_point(cfg, "pilots", pts.size(), t, cfg.q.front(), cfg.l_rb, cfg.l_ur));
    return run_points(cfg, "pilots", pts, hooks);
}

/// NMSE versus scatterer count L (applied to both links) at T = Q B from cfg.q[0], cfg.b[0].
inline SweepResult sweep_scatterers(const SimConfig &cfg, const std::vector<std::size_t> &l_values,
                                    const SweepHooks &hooks = {})
{
    const std::size_t q = cfg.q.front(), t = q * cfg.b.front();
    std::vector<SweepPoint> pts;
    for (std::size_t l : l_values)
        pts.push_back(make_point(cfg, "scatterers", pts.size(), t, q, l, l));
    return run_points(cfg, "scatterers", pts, hooks);
}

/// NMSE versus group count Q at a fixed pilot budget T; incompatible (Q, T) pairs are
/// skipped with a warning.
inline SweepResult sweep_groups(const SimConfig &cfg, const std::vector<std::size_t> &q_values, std::size_t t,
                                const SweepHooks &hooks = {})
{
    std::vector<SweepPoint> pts;
    for (std::size_t q : q_values)
    {
        SweepPoint p = make_point(cfg, "groups", pts.size(), t, q, cfg.l_rb, cfg.l_ur);
        if (!p.grouped_valid)
        {
            if (hooks.warn)
                hooks.warn("groups: skipping Q=" + std::to_string(q) + " at T=" + std::to_string(t) +
                           " (need T = Q*B with 1 <= B <= M/Q).");
            continue;
        }
        pts.push_back(std::move(p));
    }
    return run_points(cfg, "groups", pts, hooks);
}

} // namespace risce

#endif
