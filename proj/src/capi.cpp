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

#include "risloc/risloc.h"
#include "risloc/config.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

struct risloc_config
{
    nlohmann::json object = nlohmann::json::object(); // keys as given; defaults fill the rest
};

namespace
{
    using namespace risloc;
    using nlohmann::ordered_json;

    constexpr const char *version_string = "0.1.0";
    thread_local std::string last_error;

    risloc_status fail(risloc_status status, const std::string &message)
    {
        last_error = message;
        return status;
    }

    template <typename F>
    risloc_status guarded(F &&fn)
    {
        try
        {
            fn();
            last_error.clear();
            return RISLOC_OK;
        }
        catch (const Error &e)
        {
            return fail(e.code() == ErrorCode::config ? RISLOC_ERR_CONFIG : RISLOC_ERR_RUNTIME, e.what());
        }
        catch (const std::exception &e)
        {
            return fail(RISLOC_ERR_RUNTIME, e.what());
        }
    }

    char *duplicate(const std::string &s)
    {
        char *out = static_cast<char *>(std::malloc(s.size() + 1));
        if (out)
            std::memcpy(out, s.c_str(), s.size() + 1);
        return out;
    }

    std::string fmt(const char *f, double v)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, f, v);
        return buf;
    }

    // Resolves and validates; any validation error becomes Error(config).
    ExperimentConfig checked_config(const risloc_config *cfg)
    {
        std::string errors;
        for (const ValidationIssue &i : validate(cfg->object))
            if (i.error)
                errors += (errors.empty() ? "" : "; ") + i.message;
        if (!errors.empty())
            throw Error(ErrorCode::config, errors);
        return config_from_json(cfg->object);
    }

    struct Manifest
    {
        ordered_json json;
        std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

        Manifest(const std::string &command, const ExperimentConfig &c)
        {
            json["tool"] = "risloc";
            json["version"] = version_string;
            json["command"] = command;
            json["config_hash"] = config_hash(c.json);
            json["master_seed"] = c.master_seed;
            json["statistic"] = "rmse";
            json["outputs"] = ordered_json::array();
            json["config"] = c.json;
        }

        void seeds(const std::vector<TrialRecord> &trials)
        {
            std::vector<std::uint64_t> s;
            s.reserve(trials.size());
            for (const TrialRecord &t : trials)
                s.push_back(t.seed);
            std::vector<std::uint64_t> sorted = s;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                throw Error(ErrorCode::invalid_argument, "seed collision among trial seeds; change master_seed");
            json["seeds"] = s;
        }

        void write(const std::filesystem::path &dir, int failures)
        {
            json["failures"] = failures;
            json["runtime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::ofstream out(dir / "manifest.json", std::ios::trunc);
            if (!out)
                throw Error(ErrorCode::io, "cannot write manifest in " + dir.string());
            out << json.dump(2) << '\n';
        }
    };

    std::string run_peb(const ExperimentConfig &c, const std::filesystem::path &dir, Manifest &m)
    {
        const RisGeometry g = c.scenario.geometry();
        std::vector<PointBound> b(std::size_t(c.profiles));
        parallel_for(b.size(), c.threads, [&](std::size_t p) {
            b[p] = point_bound(c.scenario, g, c.ue, profile_seed(c.master_seed, 0, p));
        });
        double sum = 0.0, sum2 = 0.0, cond = 0.0;
        int ill = 0;
        for (const PointBound &x : b)
        {
            sum += x.bound.peb;
            sum2 += x.bound.peb * x.bound.peb;
            cond += x.bound.condition_number;
            ill += x.bound.ill_conditioned ? 1 : 0;
        }
        const double n = double(b.size());
        const std::filesystem::path file = dir / "peb.csv";
        {
            std::ofstream out(file, std::ios::trunc);
            if (!out)
                throw Error(ErrorCode::io, "cannot write " + file.string());
            char line[512];
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n", c.ue.x(), c.ue.y(), c.ue.z(),
                          sum / n, std::sqrt(sum2 / n), cond / n, ill, c.profiles);
            out << "x,y,z,peb_m,peb_rms_m,condition_number,ill_conditioned,profiles\n" << line;
        }
        m.json["outputs"].push_back("peb.csv");
        std::string s = "p_u = [" + fmt("%.4g", c.ue.x()) + ", " + fmt("%.4g", c.ue.y()) + ", " + fmt("%.4g", c.ue.z()) +
                        "] m\nPEB (mean over " + std::to_string(c.profiles) + " profiles) = " + fmt("%.6g", sum / n) +
                        " m\ncondition number (mean) = " + fmt("%.4g", cond / n) + "\n";
        if (ill > 0)
            s += "warning: " + std::to_string(ill) + " profile(s) ill-conditioned\n";
        return s;
    }

    std::string run_peb_map(const ExperimentConfig &c, const std::filesystem::path &dir, Manifest &m)
    {
        const HeatmapSpec spec = c.heatmap();
        const auto cells = run_heatmap(spec);
        write_heatmap_csv(dir / "peb_map.csv", cells);
        write_heatmap_grid_csv(dir / "peb_map_grid.csv", cells, spec.nx, spec.ny);
        m.json["outputs"].push_back("peb_map.csv");
        m.json["outputs"].push_back("peb_map_grid.csv");
        int behind = 0, finite = 0, submeter = 0;
        for (const HeatmapCell &cell : cells)
        {
            behind += cell.behind ? 1 : 0;
            if (!cell.behind && std::isfinite(cell.peb))
            {
                ++finite;
                submeter += cell.peb < 1.0 ? 1 : 0;
            }
        }
        std::string s = std::to_string(cells.size()) + " cells (" + std::to_string(behind) + " behind the RIS), " +
                        std::to_string(submeter) + " of " + std::to_string(finite) + " finite cells below 1 m\n";
        try
        {
            s += "x-symmetry gap = " + fmt("%.4g", heatmap_symmetry_gap(cells, spec.nx, spec.ny)) + "\n";
        }
        catch (const Error &)
        {
        }
        return s;
    }

    std::string campaign_table(const CampaignResult &r)
    {
        std::string s = "point  distance_m       rmse_m        peb_m   ratio  outliers  failures\n";
        for (const PointAggregate &a : r.points)
        {
            char line[256];
            std::snprintf(line, sizeof line, "%5d  %10.4f  %11.4e  %11.4e  %6.3f  %8d  %8d\n", a.point, a.distance,
                          a.rmse, a.peb_rms, a.ratio, a.outliers, a.failures);
            s += line;
        }
        return s;
    }

    // one JSON object per trial; non-finite numbers become null
    void write_trials_jsonl(const std::filesystem::path &file, const std::vector<TrialRecord> &trials)
    {
        std::ofstream out(file, std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::io, "cannot write " + file.string());
        auto vec = [](const Vec3 &v) { return nlohmann::ordered_json::array({v[0], v[1], v[2]}); };
        for (const TrialRecord &r : trials)
        {
            nlohmann::ordered_json j;
            j["point"] = r.point;
            j["profile"] = r.profile;
            j["noise"] = r.noise;
            j["seed"] = r.seed;
            j["truth"] = vec(r.ue);
            j["tau_hat_s"] = r.tau_hat;
            j["coarse_position"] = vec(r.coarse);
            j["refined_position"] = vec(r.estimate);
            j["final_cost"] = r.final_cost;
            j["iterations"] = r.iterations;
            j["refined"] = r.refined;
            j["error_m"] = r.error_m;
            j["peb_m"] = r.peb_m;
            j["ok"] = r.ok;
            if (!r.message.empty())
                j["message"] = r.message;
            out << j.dump() << '\n';
        }
    }

    std::string run_localize(const ExperimentConfig &c, const std::filesystem::path &dir, Manifest &m, int &failures)
    {
        const Campaign campaign = c.campaign();
        const CampaignResult r = run_error_vs_distance(campaign);
        m.seeds(r.trials);
        write_trials_csv(dir / "trials.csv", r.trials);
        write_trials_jsonl(dir / "trials.jsonl", r.trials);
        write_points_csv(dir / "points.csv", r.points);
        m.json["outputs"].push_back("trials.csv");
        m.json["outputs"].push_back("trials.jsonl");
        m.json["outputs"].push_back("points.csv");
        failures = r.failures;
        return campaign_table(r);
    }

    std::string run_cdf_command(const ExperimentConfig &c, const std::filesystem::path &dir, Manifest &m, int &failures)
    {
        Campaign campaign = c.campaign();
        campaign.points = ray_points(c.scenario.ris_center, {c.cdf_distance});
        const CdfResult r = run_cdf(campaign, 0);
        m.seeds(r.campaign.trials);
        write_trials_csv(dir / "trials.csv", r.campaign.trials);
        write_trials_jsonl(dir / "trials.jsonl", r.campaign.trials);
        write_cdf_csv(dir / "cdf.csv", r);
        m.json["outputs"].push_back("trials.csv");
        m.json["outputs"].push_back("trials.jsonl");
        m.json["outputs"].push_back("cdf.csv");
        m.json["outlier_fraction"] = r.outlier_fraction;
        failures = r.campaign.failures;
        return campaign_table(r.campaign) + "outlier fraction (error > " + fmt("%.3g", c.outlier_factor) +
               " x PEB) = " + fmt("%.4f", r.outlier_fraction) + "\n";
    }

    std::string run_peb_vs_m_command(const ExperimentConfig &c, const std::filesystem::path &dir, Manifest &m)
    {
        const PebSweep sweep = c.peb_sweep();
        const auto rows = run_peb_vs_m(sweep);
        write_peb_vs_m_csv(dir / "peb_vs_m.csv", rows);
        m.json["outputs"].push_back("peb_vs_m.csv");
        std::string s = " side        M      codebook        peb_m\n";
        for (const PebVsMRow &r : rows)
        {
            char line[160];
            std::snprintf(line, sizeof line, "%5d  %7lld  %12s  %11.4e%s\n", r.side, static_cast<long long>(r.elements),
                          codebook_kind_name(r.kind), r.peb_mean, r.ill_conditioned ? "  (ill-conditioned)" : "");
            s += line;
        }
        for (CodebookKind k : sweep.kinds)
        {
            try
            {
                s += std::string("log-log slope (") + codebook_kind_name(k) + ") = " + fmt("%.4f", loglog_slope(rows, k)) + "\n";
            }
            catch (const Error &)
            {
            }
        }
        return s;
    }

    std::string run_codebook_cache(const ExperimentConfig &c, Manifest &m)
    {
        if (c.scenario.cache_dir.empty())
            throw Error(ErrorCode::config, "codebook-cache needs a cache directory (cache_dir, --cache-dir or RISLOC_CACHE_DIR)");
        const Campaign campaign = c.campaign();
        const RisGeometry g = c.scenario.geometry();
        const std::size_t profiles = std::size_t(c.profiles);
        parallel_for(campaign.points.size() * profiles, c.threads, [&](std::size_t item) {
            const std::uint64_t ps = profile_seed(c.master_seed, item / profiles, item % profiles);
            draw_schedule(c.scenario, g, campaign.points[item / profiles], combine_seed(ps, 1));
        });
        m.json["cache_dir"] = c.scenario.cache_dir;
        return std::to_string(campaign.points.size() * profiles) + " schedules available in " + c.scenario.cache_dir + "\n";
    }
}

extern "C"
{
    const char *risloc_version(void) { return version_string; }

    const char *risloc_last_error(void) { return last_error.c_str(); }

    void risloc_string_free(char *str) { std::free(str); }

    risloc_status risloc_config_default(risloc_config **out)
    {
        if (!out)
            return fail(RISLOC_ERR_ARGUMENT, "null output pointer");
        return guarded([&] { *out = new risloc_config; });
    }

    risloc_status risloc_config_parse(const char *json_text, risloc_config **out)
    {
        if (!json_text || !out)
            return fail(RISLOC_ERR_ARGUMENT, "null argument");
        *out = nullptr;
        return guarded([&] {
            const std::string text(json_text);
            parse_config(text); // line-precise diagnostics
            auto *cfg = new risloc_config;
            cfg->object = nlohmann::json::parse(text);
            if (cfg->object.contains("config") && cfg->object["config"].is_object())
                cfg->object = nlohmann::json(cfg->object["config"]);
            *out = cfg;
        });
    }

    risloc_status risloc_config_load(const char *path, risloc_config **out)
    {
        if (!path || !out)
            return fail(RISLOC_ERR_ARGUMENT, "null argument");
        *out = nullptr;
        return guarded([&] {
            std::ifstream in(path);
            if (!in)
                throw Error(ErrorCode::config, std::string("cannot open configuration ") + path);
            std::stringstream ss;
            ss << in.rdbuf();
            const std::string text = ss.str();
            parse_config(text, path);
            auto *cfg = new risloc_config;
            cfg->object = nlohmann::json::parse(text);
            if (cfg->object.contains("config") && cfg->object["config"].is_object())
                cfg->object = nlohmann::json(cfg->object["config"]);
            *out = cfg;
        });
    }

    void risloc_config_free(risloc_config *cfg) { delete cfg; }

    risloc_status risloc_config_set(risloc_config *cfg, const char *key, const char *value)
    {
        if (!cfg || !key || !value)
            return fail(RISLOC_ERR_ARGUMENT, "null argument");
        return guarded([&] { apply_override(cfg->object, std::string(key) + "=" + value); });
    }

    risloc_status risloc_config_to_json(const risloc_config *cfg, char **out)
    {
        if (!cfg || !out)
            return fail(RISLOC_ERR_ARGUMENT, "null argument");
        return guarded([&] { *out = duplicate(config_from_json(cfg->object).json.dump(2)); });
    }

    risloc_status risloc_validate(const risloc_config *cfg, char **report, int *errors, int *warnings)
    {
        if (!cfg)
            return fail(RISLOC_ERR_ARGUMENT, "null argument");
        int e = 0, w = 0;
        std::string text;
        const risloc_status st = guarded([&] {
            for (const ValidationIssue &i : validate(cfg->object))
            {
                (i.error ? e : w) += 1;
                text += std::string(i.error ? "error: " : "warning: ") + i.message + "\n";
            }
        });
        if (st != RISLOC_OK)
            return st;
        if (report)
            *report = duplicate(text);
        if (errors)
            *errors = e;
        if (warnings)
            *warnings = w;
        return e > 0 ? fail(RISLOC_ERR_CONFIG, text) : RISLOC_OK;
    }

    risloc_status risloc_run(const risloc_config *cfg, const char *command, const char *out_dir, char **summary)
    {
        if (!cfg || !command || !out_dir)
            return fail(RISLOC_ERR_ARGUMENT, "null argument");
        const std::string cmd(command);
        static const std::set<std::string> commands{"peb", "peb-map", "localize", "cdf", "peb-vs-m", "codebook-cache"};
        if (!commands.count(cmd))
            return fail(RISLOC_ERR_ARGUMENT, "unknown command '" + cmd + "'");
        return guarded([&] {
            const ExperimentConfig c = checked_config(cfg);
            const std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            Manifest m(cmd, c);
            int failures = 0;
            std::string text;
            if (cmd == "peb")
                text = run_peb(c, dir, m);
            else if (cmd == "peb-map")
                text = run_peb_map(c, dir, m);
            else if (cmd == "localize")
                text = run_localize(c, dir, m, failures);
            else if (cmd == "cdf")
                text = run_cdf_command(c, dir, m, failures);
            else if (cmd == "peb-vs-m")
                text = run_peb_vs_m_command(c, dir, m);
            else
                text = run_codebook_cache(c, m);
            m.write(dir, failures);
            if (summary)
                *summary = duplicate(text);
        });
    }

    risloc_status risloc_point_peb(const risloc_config *cfg, const double ue_position[3], int profile, double *peb,
                                   double *condition_number)
    {
        if (!cfg || !ue_position || !peb || profile < 0)
            return fail(RISLOC_ERR_ARGUMENT, "invalid argument");
        return guarded([&] {
            const ExperimentConfig c = config_from_json(cfg->object);
            c.scenario.check();
            const RisGeometry g = c.scenario.geometry();
            const Vec3 ue(ue_position[0], ue_position[1], ue_position[2]);
            const PointBound b = point_bound(c.scenario, g, ue, profile_seed(c.master_seed, 0, std::uint64_t(profile)));
            *peb = b.bound.peb;
            if (condition_number)
                *condition_number = b.bound.condition_number;
        });
    }
}
