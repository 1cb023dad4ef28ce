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

// risce_cli: runs the Monte Carlo sweeps and one-shot diagnostics.
// Exit status: 0 success, 1 configuration error, 2 runtime error.

#include <risce/risce.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

using namespace risce;

namespace {

struct Options
{
    std::string config_path;
    std::string output_path;
    std::vector<std::string> overrides;
    std::string format = "csv";
    std::size_t threads = 0;
    std::size_t trial = 0;
};

ParsedConfig load(const Options &o)
{
    std::vector<std::string> ov = o.overrides;
    if (o.threads)
        ov.push_back("threads=" + std::to_string(o.threads));
    ParsedConfig pc = o.config_path.empty() ? parse_config_text("", ov) : parse_config(o.config_path, ov);
    const auto resolved = resolved_config(pc.config);
    for (const auto &key : pc.defaulted)
        for (const auto &[k, v] : resolved)
            if (k == key)
                std::cerr << "config: " << k << " defaulted to " << v << "\n";
    return pc;
}

std::string summary_line(const PointResult &pr)
{
    const SweepPoint &p = pr.point;
    char head[160];
    std::snprintf(head, sizeof head, "%s point %zu: T=%zu Q=%zu B=%zu L_rb=%zu L_ur=%zu", p.sweep.c_str(), p.index, p.t,
                  p.q, p.b, p.l_rb, p.l_ur);
    std::string line = head;
    for (const auto &s : pr.methods)
    {
        char buf[96];
        std::snprintf(buf, sizeof buf, " %s=%.3e", method_name(s.method), s.mean_nmse);
        line += buf;
        if (s.flagged)
            line += "(" + std::to_string(s.flagged) + " flagged)";
    }
    return line;
}

int run_sweep(const std::string &command, const Options &o)
{
    if (o.output_path.empty())
        throw ConfigError("--output is required for " + command + ".");
    const ParsedConfig pc = load(o);
    const SimConfig &cfg = pc.config;

    SweepHooks hooks;
    hooks.warn = [](const std::string &msg) { std::cerr << "warning: " << msg << "\n"; };
    hooks.point_done = [](const PointResult &pr) { std::cout << summary_line(pr) << std::endl; };

    SweepResult res;
    if (command == "sweep-pilots")
        res = sweep_pilot_overhead(cfg, cfg.t, hooks);
    else if (command == "sweep-scatterers")
        res = sweep_scatterers(cfg, cfg.l, hooks);
    else
        res = sweep_groups(cfg, cfg.q, cfg.t.front(), hooks);

    const std::string body = o.format == "json" ? to_json(res, cfg.timing).dump(2) + "\n" : to_csv(res, cfg.timing);
    write_atomic(o.output_path + ".meta.json", run_metadata(pc, command).dump(2) + "\n");
    write_atomic(o.output_path, body);
    return 0;
}

int run_partition(const Options &o)
{
    const ParsedConfig pc = load(o);
    const SimConfig &cfg = pc.config;
    const std::size_t q = cfg.q.front(), b = cfg.b.front();

    Rng rng(hash_seed({cfg.seed, stream_channel, cfg.l_rb, cfg.l_ur, o.trial}));
    const auto ch = draw_channel(cfg.geometry, cfg.l_rb, cfg.l_ur, rng);
    const ComplexMatrix f_hat = perturb_channel_estimate(ch.ris_bs, cfg.f_hat_rel_error, rng);
    const CorrelationWeights w = correlation_weights(f_hat);

    auto report = [&](const char *name, const Partition &p) {
        std::printf("%s partition (hash %016llx): %s\n", name, static_cast<unsigned long long>(p.hash()),
                    p.to_string().c_str());
        std::printf("  surrogate objective %.6e\n", surrogate_objective(w, p));
        const auto conds = group_conditions(f_hat, p, b);
        double worst = 0.0;
        for (std::size_t g = 0; g < conds.size(); ++g)
        {
            worst = std::max(worst, condition_or_inf(conds[g]));
            if (conds[g])
                std::printf("  group %zu condition %.6e\n", g, *conds[g]);
            else
                std::printf("  group %zu condition singular\n", g);
        }
        std::printf("  worst condition %.6e\n", worst);
    };
    std::printf("trial %zu, seed %llu, N=%zu M=%zu Q=%zu B=%zu L_rb=%zu L_ur=%zu\n", o.trial,
                static_cast<unsigned long long>(cfg.seed), cfg.n, cfg.m, q, b, cfg.l_rb, cfg.l_ur);
    report("greedy", greedy_partition(w, q));
    report("contiguous", contiguous_partition(cfg.m, q));
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"risce: RIS channel estimation benchmarks"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App *sub) {
        sub->add_option("-c,--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--set", o.overrides, "override a configuration key (key=value), repeatable");
        sub->add_option("--threads", o.threads, "worker threads (default: RISCE_THREADS or all cores)");
    };
    std::vector<CLI::App *> sweeps;
    for (const char *name : {"sweep-pilots", "sweep-scatterers", "sweep-groups"})
    {
        auto *sub = app.add_subcommand(name, std::string("run the ") + (name + 6) + " sweep");
        common(sub);
        sub->add_option("-o,--output", o.output_path, "result file (written atomically)")->required();
        sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sweeps.push_back(sub);
    }
    auto *partition = app.add_subcommand("partition", "greedy and contiguous partitions for one channel draw");
    common(partition);
    partition->add_option("--trial", o.trial, "channel draw index");
    auto *validate = app.add_subcommand("validate-config", "parse and validate a configuration");
    common(validate);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try
    {
        for (auto *sub : sweeps)
            if (sub->parsed())
                return run_sweep(sub->get_name(), o);
        if (partition->parsed())
            return run_partition(o);
        load(o);
        std::cout << "configuration valid\n";
        return 0;
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
