// SPDX-License-Identifier: Apache-2.0
//
// risloc: RIS-aided monostatic self-localization simulator
// Copyright (C) 2026 The risloc authors
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

// risloc command-line front end. Talks to the library only through risloc.h.

#include "risloc/risloc.h"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace
{
    struct Options
    {
        std::string config;
        std::vector<std::string> overrides;
        std::string codebook;
        double delta = -1.0;
        std::string out = "risloc_out";
        std::string cache_dir;
        int threads = 0;
        long long seed = -1;
    };

    int exit_code(risloc_status st)
    {
        switch (st)
        {
        case RISLOC_OK: return 0;
        case RISLOC_ERR_CONFIG: return 1;
        case RISLOC_ERR_ARGUMENT: return 1;
        default: return 2;
        }
    }

    int report(risloc_status st)
    {
        if (st != RISLOC_OK)
            std::fprintf(stderr, "risloc: %s\n", risloc_last_error());
        return exit_code(st);
    }

    // Loads the file (or the defaults) and applies flags in order: --set, then the named flags.
    risloc_status build_config(const Options &o, risloc_config **cfg)
    {
        risloc_status st = o.config.empty() ? risloc_config_default(cfg) : risloc_config_load(o.config.c_str(), cfg);
        if (st != RISLOC_OK)
            return st;
        for (const std::string &kv : o.overrides)
        {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
            {
                std::fprintf(stderr, "risloc: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
                return RISLOC_ERR_CONFIG;
            }
            if ((st = risloc_config_set(*cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) != RISLOC_OK)
                return st;
        }
        if (!o.codebook.empty() && (st = risloc_config_set(*cfg, "codebook", o.codebook.c_str())) != RISLOC_OK)
            return st;
        if (o.delta >= 0.0 && (st = risloc_config_set(*cfg, "delta", std::to_string(o.delta).c_str())) != RISLOC_OK)
            return st;
        if (o.threads > 0 && (st = risloc_config_set(*cfg, "threads", std::to_string(o.threads).c_str())) != RISLOC_OK)
            return st;
        if (o.seed >= 0 && (st = risloc_config_set(*cfg, "master_seed", std::to_string(o.seed).c_str())) != RISLOC_OK)
            return st;
        std::string cache = o.cache_dir;
        if (cache.empty())
            if (const char *env = std::getenv("RISLOC_CACHE_DIR"))
                cache = env;
        if (!cache.empty())
        {
            const std::string quoted = "\"" + cache + "\"";
            if ((st = risloc_config_set(*cfg, "cache_dir", quoted.c_str())) != RISLOC_OK)
                return st;
        }
        return RISLOC_OK;
    }

    int run_validate(const Options &o)
    {
        risloc_config *cfg = nullptr;
        risloc_status st = build_config(o, &cfg);
        if (st != RISLOC_OK)
        {
            risloc_config_free(cfg);
            return report(st);
        }
        char *text = nullptr;
        int errors = 0, warnings = 0;
        st = risloc_validate(cfg, &text, &errors, &warnings);
        if (text)
        {
            std::fputs(text, errors > 0 ? stderr : stdout);
            risloc_string_free(text);
        }
        if (st == RISLOC_OK)
            std::printf("configuration ok (%d warning%s)\n", warnings, warnings == 1 ? "" : "s");
        else if (errors == 0)
            std::fprintf(stderr, "risloc: %s\n", risloc_last_error());
        risloc_config_free(cfg);
        return exit_code(st);
    }

    int run_command(const Options &o, const char *command)
    {
        risloc_config *cfg = nullptr;
        risloc_status st = build_config(o, &cfg);
        if (st == RISLOC_OK)
        {
            char *summary = nullptr;
            st = risloc_run(cfg, command, o.out.c_str(), &summary);
            if (summary)
            {
                std::fputs(summary, stdout);
                risloc_string_free(summary);
            }
        }
        risloc_config_free(cfg);
        return report(st);
    }

    void add_common(CLI::App *sub, Options &o, bool writes)
    {
        sub->add_option("config", o.config, "experiment file (JSON) or campaign manifest; full-scale defaults if omitted");
        sub->add_option("-s,--set", o.overrides, "override a key, KEY=VALUE (repeatable)");
        sub->add_option("--codebook", o.codebook, "random or directional");
        sub->add_option("--delta", o.delta, "directional uncertainty radius in meters");
        sub->add_option("--threads", o.threads, "worker threads");
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--cache-dir", o.cache_dir, "schedule cache directory (default: $RISLOC_CACHE_DIR)");
        if (writes)
            sub->add_option("-o,--out", o.out, "output directory")->capture_default_str();
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"risloc: RIS-aided monostatic self-localization simulator"};
    app.set_version_flag("--version", risloc_version());
    app.require_subcommand(1);

    Options o;
    struct Sub
    {
        const char *name;
        const char *help;
        bool writes;
    };
    const Sub subs[] = {
        {"validate", "static configuration checks", false},
        {"peb", "position error bound at p_u", true},
        {"peb-map", "PEB heatmap over [x, y, y]", true},
        {"localize", "Monte-Carlo estimation error versus distance", true},
        {"cdf", "error and PEB distributions at cdf_distance", true},
        {"peb-vs-m", "PEB versus RIS size", true},
        {"codebook-cache", "precompute the phase schedules of a campaign", true},
    };
    for (const Sub &s : subs)
        add_common(app.add_subcommand(s.name, s.help), o, s.writes);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "validate")
        return run_validate(o);
    return run_command(o, name.c_str());
}
