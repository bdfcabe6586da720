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

// Exercises the shared library through its C interface only, plus the CLI exit codes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "risloc/risloc.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace
{
    fs::path scratch(const std::string &name)
    {
        const fs::path dir = fs::temp_directory_path() / "risloc_test_capi" / name;
        fs::remove_all(dir);
        fs::create_directories(dir);
        return dir;
    }

    fs::path write_file(const fs::path &file, const std::string &text)
    {
        std::ofstream(file, std::ios::trunc) << text;
        return file;
    }

    std::string slurp(const fs::path &file)
    {
        std::ifstream in(file, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::vector<std::string> lines(const fs::path &file)
    {
        std::vector<std::string> out;
        std::ifstream in(file);
        for (std::string l; std::getline(in, l);)
            if (!l.empty())
                out.push_back(l);
        return out;
    }

    std::vector<double> fields(const std::string &line)
    {
        std::vector<double> out;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            out.push_back(std::strtod(cell.c_str(), nullptr));
        return out;
    }

    // RAII holder so failing checks do not leak handles
    struct Config
    {
        risloc_config *p = nullptr;
        ~Config() { risloc_config_free(p); }
    };

    Config small_config()
    {
        Config c;
        REQUIRE(risloc_config_parse(R"({"N": 64, "T": 16, "M_side": 8, "profiles": 2, "noise_realizations": 1,
                                        "distances": [1.5], "p_u": [1, 1, 1]})",
                                    &c.p) == RISLOC_OK);
        return c;
    }

    int run_cli(const std::string &args)
    {
        const std::string cmd = std::string(RISLOC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
}

TEST_CASE("version and null-argument handling")
{
    CHECK(std::string(risloc_version()).size() > 0);
    CHECK(risloc_config_default(nullptr) == RISLOC_ERR_ARGUMENT);
    CHECK(std::string(risloc_last_error()).size() > 0);
    risloc_config_free(nullptr);
    risloc_string_free(nullptr);
}

TEST_CASE("parse errors carry line numbers")
{
    Config c;
    CHECK(risloc_config_parse("{\n  \"N\": 64,\n  \"T\": ,\n}", &c.p) == RISLOC_ERR_CONFIG);
    CHECK(c.p == nullptr);
    CHECK(std::string(risloc_last_error()).find(":3") != std::string::npos);

    const fs::path dir = scratch("parse");
    const fs::path f = write_file(dir / "bad.json", "{\n  \"N\": 64,\n  \"frobnicate\": 1\n}\n");
    CHECK(risloc_config_load(f.c_str(), &c.p) == RISLOC_ERR_CONFIG);
    const std::string msg = risloc_last_error();
    CHECK(msg.find("bad.json:3") != std::string::npos);
    CHECK(msg.find("frobnicate") != std::string::npos);

    const fs::path g = write_file(dir / "type.json", "{\n  \"T\": \"many\"\n}\n");
    CHECK(risloc_config_load(g.c_str(), &c.p) == RISLOC_ERR_CONFIG);
    CHECK(std::string(risloc_last_error()).find("type.json:2") != std::string::npos);
}

TEST_CASE("overrides replace file keys and unknown keys are rejected")
{
    Config c = small_config();
    CHECK(risloc_config_set(c.p, "T", "32") == RISLOC_OK);
    CHECK(risloc_config_set(c.p, "codebook", "directional") == RISLOC_OK);
    CHECK(risloc_config_set(c.p, "no_such_key", "1") == RISLOC_ERR_CONFIG);
    char *json = nullptr;
    REQUIRE(risloc_config_to_json(c.p, &json) == RISLOC_OK);
    const std::string text = json;
    risloc_string_free(json);
    CHECK(text.find("\"T\": 32") != std::string::npos);
    CHECK(text.find("\"codebook\": \"directional\"") != std::string::npos);
    CHECK(text.find("\"f_c\"") != std::string::npos); // resolved defaults are echoed
}

TEST_CASE("validation: defaults pass, odd T fails, half-wavelength spacing warns")
{
    Config c;
    REQUIRE(risloc_config_default(&c.p) == RISLOC_OK);
    char *report = nullptr;
    int errors = -1, warnings = -1;
    CHECK(risloc_validate(c.p, &report, &errors, &warnings) == RISLOC_OK);
    CHECK(errors == 0);
    CHECK(warnings == 0);
    risloc_string_free(report);

    REQUIRE(risloc_config_set(c.p, "T", "99") == RISLOC_OK);
    CHECK(risloc_validate(c.p, &report, &errors, &warnings) == RISLOC_ERR_CONFIG);
    CHECK(errors >= 1);
    CHECK(std::string(report).find("T must be even") != std::string::npos);
    risloc_string_free(report);

    REQUIRE(risloc_config_set(c.p, "T", "100") == RISLOC_OK);
    REQUIRE(risloc_config_set(c.p, "d_over_lambda", "0.5") == RISLOC_OK);
    CHECK(risloc_validate(c.p, &report, &errors, &warnings) == RISLOC_OK);
    CHECK(errors == 0);
    CHECK(warnings >= 1);
    CHECK(std::string(report).find("warning: ") != std::string::npos);
    risloc_string_free(report);

    REQUIRE(risloc_config_set(c.p, "d_over_lambda", "0.25") == RISLOC_OK);
    REQUIRE(risloc_config_set(c.p, "p_u", "[1, 1, -1]") == RISLOC_OK);
    CHECK(risloc_validate(c.p, &report, &errors, &warnings) == RISLOC_ERR_CONFIG);
    risloc_string_free(report);
}

TEST_CASE("peb writes one row and a 6 dB power increase halves it")
{
    double peb[2];
    for (int k = 0; k < 2; ++k)
    {
        Config c;
        REQUIRE(risloc_config_default(&c.p) == RISLOC_OK);
        REQUIRE(risloc_config_set(c.p, "profiles", "1") == RISLOC_OK);
        if (k == 1)
            REQUIRE(risloc_config_set(c.p, "P_tx_dbm", "29.020599913279625") == RISLOC_OK); // 23 + 20 log10(2)
        const fs::path dir = scratch("peb" + std::to_string(k));
        REQUIRE(risloc_run(c.p, "peb", dir.c_str(), nullptr) == RISLOC_OK);
        const auto rows = lines(dir / "peb.csv");
        REQUIRE(rows.size() == 2);
        const auto f = fields(rows[1]);
        REQUIRE(f.size() == 8);
        CHECK(f[3] > 0.0);
        peb[k] = f[3];
        CHECK(fs::exists(dir / "manifest.json"));
    }
    CHECK(std::abs(peb[1] / peb[0] - 0.5) < 1e-9);
}

TEST_CASE("point PEB entry matches the peb command for the same profile")
{
    Config c = small_config();
    const double ue[3] = {1.0, 1.0, 1.0};
    double peb = 0.0, cond = 0.0;
    REQUIRE(risloc_point_peb(c.p, ue, 0, &peb, &cond) == RISLOC_OK);
    CHECK(peb > 0.0);
    CHECK(cond >= 1.0);
    const double behind[3] = {1.0, 1.0, -1.0};
    CHECK(risloc_point_peb(c.p, behind, 0, &peb, &cond) != RISLOC_OK);
}

TEST_CASE("peb-map on a 5 x 5 grid yields 25 rows")
{
    Config c = small_config();
    REQUIRE(risloc_config_set(c.p, "nx", "5") == RISLOC_OK);
    REQUIRE(risloc_config_set(c.p, "ny", "5") == RISLOC_OK);
    REQUIRE(risloc_config_set(c.p, "heatmap_seeds", "2") == RISLOC_OK);
    const fs::path dir = scratch("map");
    REQUIRE(risloc_run(c.p, "peb-map", dir.c_str(), nullptr) == RISLOC_OK);
    CHECK(lines(dir / "peb_map.csv").size() == 26);
    CHECK(lines(dir / "peb_map_grid.csv").size() == 5);
}

TEST_CASE("noiseless localize reports millimetre-free error")
{
    Config c = small_config();
    REQUIRE(risloc_config_set(c.p, "noiseless", "true") == RISLOC_OK);
    REQUIRE(risloc_config_set(c.p, "profiles", "1") == RISLOC_OK);
    const fs::path dir = scratch("noiseless");
    char *summary = nullptr;
    REQUIRE(risloc_run(c.p, "localize", dir.c_str(), &summary) == RISLOC_OK);
    CHECK(std::string(summary).find("rmse") != std::string::npos);
    risloc_string_free(summary);
    const auto rows = lines(dir / "trials.csv");
    REQUIRE(rows.size() == 2);
    const auto f = fields(rows[1]);
    CHECK(f[10] < 1e-3);
    CHECK(lines(dir / "trials.jsonl").size() == 1);
}

TEST_CASE("directional codebook with a one metre prior is accepted")
{
    Config c = small_config();
    REQUIRE(risloc_config_set(c.p, "codebook", "directional") == RISLOC_OK);
    REQUIRE(risloc_config_set(c.p, "delta", "1.0") == RISLOC_OK);
    const fs::path dir = scratch("directional");
    CHECK(risloc_run(c.p, "localize", dir.c_str(), nullptr) == RISLOC_OK);
    CHECK(lines(dir / "trials.csv").size() == 3);
}

TEST_CASE("rerunning from a manifest reproduces byte-identical records")
{
    Config c = small_config();
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    REQUIRE(risloc_run(c.p, "localize", a.c_str(), nullptr) == RISLOC_OK);
    Config again;
    REQUIRE(risloc_config_load((a / "manifest.json").c_str(), &again.p) == RISLOC_OK);
    REQUIRE(risloc_run(again.p, "localize", b.c_str(), nullptr) == RISLOC_OK);
    CHECK(slurp(a / "trials.csv") == slurp(b / "trials.csv"));
    CHECK(slurp(a / "points.csv") == slurp(b / "points.csv"));
}

TEST_CASE("unknown commands are argument errors")
{
    Config c = small_config();
    const fs::path dir = scratch("unknown");
    CHECK(risloc_run(c.p, "fly", dir.c_str(), nullptr) == RISLOC_ERR_ARGUMENT);
    CHECK(risloc_run(c.p, "codebook-cache", dir.c_str(), nullptr) == RISLOC_ERR_CONFIG); // needs cache_dir
}

TEST_CASE("codebook cache is written and reused")
{
    Config c = small_config();
    const fs::path dir = scratch("cache");
    const fs::path cache = dir / "schedules";
    const std::string quoted = "\"" + cache.string() + "\"";
    REQUIRE(risloc_config_set(c.p, "cache_dir", quoted.c_str()) == RISLOC_OK);
    REQUIRE(risloc_run(c.p, "codebook-cache", (dir / "out").c_str(), nullptr) == RISLOC_OK);
    REQUIRE(fs::exists(cache));
    const auto count = std::distance(fs::directory_iterator(cache), fs::directory_iterator());
    CHECK(count > 0);
    // results are unchanged whether or not the cache is used
    Config plain = small_config();
    REQUIRE(risloc_run(c.p, "localize", (dir / "with").c_str(), nullptr) == RISLOC_OK);
    REQUIRE(risloc_run(plain.p, "localize", (dir / "without").c_str(), nullptr) == RISLOC_OK);
    CHECK(slurp(dir / "with" / "trials.csv") == slurp(dir / "without" / "trials.csv"));
}

TEST_CASE("CLI exit codes")
{
    const fs::path dir = scratch("cli");
    const fs::path good = write_file(dir / "good.json", "{\"N\": 64, \"T\": 16, \"M_side\": 8, \"profiles\": 1}\n");
    const fs::path odd = write_file(dir / "odd.json", "{\n  \"T\": 99\n}\n");
    const fs::path broken = write_file(dir / "broken.json", "{\n  \"T\": 16,,\n}\n");
    CHECK(run_cli("validate " + good.string()) == 0);
    CHECK(run_cli("validate " + odd.string()) == 1);
    CHECK(run_cli("validate " + broken.string()) == 1);
    CHECK(run_cli("validate " + good.string() + " -s d_over_lambda=0.5") == 0);
    CHECK(run_cli("validate " + (dir / "missing.json").string()) == 1);
    CHECK(run_cli("peb " + good.string() + " -o " + (dir / "peb").string()) == 0);
    CHECK(fs::exists(dir / "peb" / "peb.csv"));
    CHECK(run_cli("peb " + good.string() + " -s p_u=[1,1,-1] -o " + (dir / "behind").string()) == 1);
    CHECK(run_cli("localize " + good.string() + " --codebook directional --delta 1.0 -s distances=[1.5] -o " +
                  (dir / "loc").string()) == 0);
    CHECK(run_cli("no-such-command") != 0);
}
