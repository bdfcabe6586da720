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

#include "risloc/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace risloc
{
    using nlohmann::json;
    using nlohmann::ordered_json;

    namespace
    {
        // Error tied to one key, so the parser can point at its line.
        struct KeyError : Error
        {
            KeyError(std::string k, const std::string &what)
                : Error(ErrorCode::config, "key '" + k + "': " + what), key(std::move(k)) {}
            std::string key;
        };

        ordered_json full_scale_defaults()
        {
            const double r10 = 10.0 / std::sqrt(3.0);
            ordered_json j;
            j["preset"] = "full";
            j["f_c"] = 28e9;
            j["N"] = 3000;
            j["delta_f"] = 120e3;
            j["T"] = 100;
            j["P_tx_dbm"] = 23.0;
            j["N_0_dbm_hz"] = -174.0;
            j["n_f_db"] = 3.0;
            j["M_side"] = 100;
            j["d_over_lambda"] = 0.25;
            j["p_r"] = {0.0, 0.0, 0.0};
            j["R_euler_deg"] = {0.0, 0.0, 0.0};
            j["codebook"] = "random";
            j["delta"] = 1.0;
            j["q_u"] = nullptr;
            j["L"] = 0;
            j["nlos_delay_range_ns"] = {20.0, 200.0};
            j["nlos_power_db"] = 0.0;
            j["N_prime_factor"] = 10;
            j["grid_directions"] = 0;
            j["grid_shells"] = 3;
            j["theta_max_deg"] = 90.0;
            j["epsilon"] = 0.0;
            j["gain_estimate"] = "least_squares";
            j["max_iterations"] = 200;
            j["p_u"] = {r10, r10, r10};
            j["distances"] = {10.0};
            j["profiles"] = 20;
            j["noise_realizations"] = 5;
            j["master_seed"] = 1;
            j["noiseless"] = false;
            j["threads"] = 1;
            j["outlier_factor"] = 10.0;
            j["cdf_distance"] = 11.0;
            j["sides"] = {4, 8, 16, 32, 64, 100};
            j["x_range"] = {-20.0, 20.0};
            j["y_range"] = {0.0, 20.0};
            j["nx"] = 21;
            j["ny"] = 11;
            j["heatmap_seeds"] = 5;
            j["fixed_beta0"] = false;
            j["beta0_reference"] = {r10, r10, r10};
            j["cache_dir"] = "";
            return j;
        }

        ordered_json preset_defaults(const std::string &preset)
        {
            ordered_json j = full_scale_defaults();
            if (preset == "full")
                return j;
            if (preset != "desk")
                throw KeyError("preset", "unknown preset '" + preset + "' (expected full or desk)");
            j["preset"] = "desk";
            j["N"] = 256;
            j["T"] = 64;
            j["M_side"] = 32;
            j["distances"] = {2.0, 4.0, 6.0, 8.0, 10.0};
            j["cdf_distance"] = 6.0;
            return j;
        }

        template <typename T>
        T read(const ordered_json &j, const std::string &key)
        {
            const auto &v = j.at(key);
            try
            {
                if constexpr (std::is_same_v<T, double>)
                {
                    if (!v.is_number())
                        throw KeyError(key, "expected a number");
                }
                else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>)
                {
                    if (!v.is_number_integer() && !(v.is_number_float() && v.get<double>() == std::floor(v.get<double>())))
                        throw KeyError(key, "expected an integer");
                    if constexpr (std::is_unsigned_v<T>)
                        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
                            throw KeyError(key, "expected a non-negative integer");
                    if (v.is_number_float())
                        return T(v.get<double>());
                }
                else if constexpr (std::is_same_v<T, bool>)
                {
                    if (!v.is_boolean())
                        throw KeyError(key, "expected true or false");
                }
                else if constexpr (std::is_same_v<T, std::string>)
                {
                    if (!v.is_string())
                        throw KeyError(key, "expected a string");
                }
                return v.get<T>();
            }
            catch (const json::exception &e)
            {
                throw KeyError(key, e.what());
            }
        }

        std::vector<double> read_list(const ordered_json &j, const std::string &key, std::size_t exact = 0)
        {
            const auto &v = j.at(key);
            if (!v.is_array())
                throw KeyError(key, "expected an array of numbers");
            std::vector<double> out;
            for (const auto &e : v)
            {
                if (!e.is_number())
                    throw KeyError(key, "expected an array of numbers");
                out.push_back(e.get<double>());
            }
            if (exact > 0 && out.size() != exact)
                throw KeyError(key, "expected " + std::to_string(exact) + " entries");
            return out;
        }

        Vec3 read_vec3(const ordered_json &j, const std::string &key)
        {
            const auto v = read_list(j, key, 3);
            return Vec3(v[0], v[1], v[2]);
        }

        std::size_t line_of(const std::string &text, std::size_t offset)
        {
            offset = std::min(offset, text.size());
            return std::size_t(1) + std::size_t(std::count(text.begin(), text.begin() + std::ptrdiff_t(offset), '\n'));
        }

        std::size_t key_line(const std::string &text, const std::string &key)
        {
            const std::size_t pos = text.find("\"" + key + "\"");
            return pos == std::string::npos ? 0 : line_of(text, pos);
        }

        ordered_json resolve(const json &object)
        {
            if (!object.is_object())
                throw Error(ErrorCode::config, "configuration must be a JSON object");
            const auto &known = config_keys();
            for (const auto &[key, value] : object.items())
                if (std::find(known.begin(), known.end(), key) == known.end())
                    throw KeyError(key, "unknown key");
            std::string preset = "full";
            if (object.contains("preset"))
            {
                if (!object["preset"].is_string())
                    throw KeyError("preset", "expected a string");
                preset = object["preset"].get<std::string>();
            }
            ordered_json resolved = preset_defaults(preset);
            for (const auto &[key, value] : object.items())
                resolved[key] = value;
            return resolved;
        }
    }

    const std::vector<std::string> &config_keys()
    {
        static const std::vector<std::string> keys = [] {
            std::vector<std::string> k;
            const ordered_json defaults = full_scale_defaults();
            for (const auto &[key, value] : defaults.items())
                k.push_back(key);
            return k;
        }();
        return keys;
    }

    ordered_json default_config_json() { return full_scale_defaults(); }

    ExperimentConfig config_from_json(const json &object)
    {
        ExperimentConfig c;
        c.json = resolve(object);
        const ordered_json &j = c.json;
        Scenario &s = c.scenario;

        s.system.carrier_hz = read<double>(j, "f_c");
        s.system.subcarriers = read<int>(j, "N");
        s.system.subcarrier_spacing_hz = read<double>(j, "delta_f");
        s.system.transmissions = read<int>(j, "T");
        s.system.tx_power_dbm = read<double>(j, "P_tx_dbm");
        s.system.noise_psd_dbm_hz = read<double>(j, "N_0_dbm_hz");
        s.system.noise_figure_db = read<double>(j, "n_f_db");

        s.side = read<int>(j, "M_side");
        s.spacing_over_lambda = read<double>(j, "d_over_lambda");
        s.ris_center = read_vec3(j, "p_r");
        c.ris_euler_deg = read_vec3(j, "R_euler_deg");
        const Vec3 e = c.ris_euler_deg * (pi / 180.0);
        s.ris_orientation = rotation_from_euler(e[0], e[1], e[2]);

        try
        {
            s.codebook.kind = parse_codebook_kind(read<std::string>(j, "codebook"));
        }
        catch (const KeyError &)
        {
            throw;
        }
        catch (const Error &err)
        {
            throw KeyError("codebook", err.what());
        }
        s.codebook.delta = read<double>(j, "delta");
        if (!j.at("q_u").is_null())
            s.codebook.prior_center = read_vec3(j, "q_u");

        s.multipath.paths = read<int>(j, "L");
        const auto nlos = read_list(j, "nlos_delay_range_ns", 2);
        s.multipath.delay_min = nlos[0] * 1e-9;
        s.multipath.delay_max = nlos[1] * 1e-9;
        s.multipath.relative_power_db = read<double>(j, "nlos_power_db");

        s.estimator.ifft_oversampling = read<int>(j, "N_prime_factor");
        s.estimator.grid_directions = read<int>(j, "grid_directions");
        s.estimator.grid_shells = read<int>(j, "grid_shells");
        s.estimator.max_off_normal_deg = read<double>(j, "theta_max_deg");
        s.estimator.range_tolerance = read<double>(j, "epsilon");
        s.estimator.max_iterations = read<int>(j, "max_iterations");
        const std::string gain = read<std::string>(j, "gain_estimate");
        if (gain == "least_squares")
            s.estimator.gain_estimate = GainEstimate::least_squares;
        else if (gain == "per_transmission_ratio")
            s.estimator.gain_estimate = GainEstimate::per_transmission_ratio;
        else
            throw KeyError("gain_estimate", "expected least_squares or per_transmission_ratio");

        c.ue = read_vec3(j, "p_u");
        c.distances = read_list(j, "distances");
        c.profiles = read<int>(j, "profiles");
        c.noise_realizations = read<int>(j, "noise_realizations");
        c.master_seed = read<std::uint64_t>(j, "master_seed");
        c.noiseless = read<bool>(j, "noiseless");
        c.threads = read<int>(j, "threads");
        c.outlier_factor = read<double>(j, "outlier_factor");
        c.cdf_distance = read<double>(j, "cdf_distance");

        c.sides.clear();
        for (double v : read_list(j, "sides"))
        {
            if (v != std::floor(v))
                throw KeyError("sides", "expected integers");
            c.sides.push_back(int(v));
        }

        const auto xr = read_list(j, "x_range", 2);
        const auto yr = read_list(j, "y_range", 2);
        c.x_min = xr[0];
        c.x_max = xr[1];
        c.y_min = yr[0];
        c.y_max = yr[1];
        c.nx = read<int>(j, "nx");
        c.ny = read<int>(j, "ny");
        c.heatmap_seeds = read<int>(j, "heatmap_seeds");
        c.fixed_beta0 = read<bool>(j, "fixed_beta0");
        c.beta0_reference = read_vec3(j, "beta0_reference");
        s.cache_dir = read<std::string>(j, "cache_dir");
        read<std::string>(j, "preset");

        if (c.fixed_beta0)
        {
            try
            {
                s.fixed_gain = c.beta0_reference_gain();
            }
            catch (const Error &err)
            {
                throw KeyError("beta0_reference", err.what());
            }
        }
        return c;
    }

    double ExperimentConfig::beta0_reference_gain() const
    {
        const RisGeometry g = scenario.geometry();
        return path_loss(g, beta0_reference - g.center, scenario.system.wavelength());
    }

    Campaign ExperimentConfig::campaign() const
    {
        Campaign c;
        c.scenario = scenario;
        c.points = ray_points(scenario.ris_center, distances);
        c.profiles = profiles;
        c.noise_realizations = noise_realizations;
        c.master_seed = master_seed;
        c.noiseless = noiseless;
        c.threads = threads;
        c.outlier_factor = outlier_factor;
        return c;
    }

    PebSweep ExperimentConfig::peb_sweep() const
    {
        PebSweep s;
        s.scenario = scenario;
        s.ue = ue;
        s.sides = sides;
        s.profiles = profiles;
        s.master_seed = master_seed;
        s.threads = threads;
        return s;
    }

    HeatmapSpec ExperimentConfig::heatmap() const
    {
        HeatmapSpec h;
        h.scenario = scenario;
        h.x_min = x_min;
        h.x_max = x_max;
        h.y_min = y_min;
        h.y_max = y_max;
        h.nx = nx;
        h.ny = ny;
        h.seeds = heatmap_seeds;
        h.master_seed = master_seed;
        h.threads = threads;
        return h;
    }

    ExperimentConfig parse_config(const std::string &text, const std::string &origin)
    {
        json object;
        try
        {
            object = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw Error(ErrorCode::config,
                        origin + ":" + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
        }
        if (object.is_object() && object.contains("config") && object["config"].is_object())
            object = object["config"]; // campaign manifest
        try
        {
            return config_from_json(object);
        }
        catch (const KeyError &e)
        {
            const std::size_t line = key_line(text, e.key);
            throw Error(ErrorCode::config, origin + ":" + (line ? std::to_string(line) + ": " : std::string(" ")) + e.what());
        }
        catch (const Error &e)
        {
            throw Error(ErrorCode::config, origin + ": " + e.what());
        }
    }

    ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorCode::config, "cannot open configuration " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_config(ss.str(), path);
    }

    void apply_override(json &object, const std::string &assignment)
    {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(ErrorCode::config, "override '" + assignment + "' is not KEY=VALUE");
        const std::string key = assignment.substr(0, eq);
        const std::string value = assignment.substr(eq + 1);
        const auto &known = config_keys();
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw Error(ErrorCode::config, "override: unknown key '" + key + "'");
        json parsed = json::parse(value, nullptr, false);
        if (!object.is_object())
            object = json::object();
        object[key] = parsed.is_discarded() ? json(value) : parsed;
    }

    std::vector<ValidationIssue> validate(const json &object)
    {
        std::vector<ValidationIssue> issues;
        auto error = [&](const std::string &m) { issues.push_back({true, m}); };
        auto warning = [&](const std::string &m) { issues.push_back({false, m}); };

        ExperimentConfig c;
        try
        {
            c = config_from_json(object);
        }
        catch (const Error &e)
        {
            error(e.what());
            return issues;
        }
        const Scenario &s = c.scenario;
        const SystemConfig &sys = s.system;

        if (sys.transmissions % 2 != 0)
            error("T must be even (got " + std::to_string(sys.transmissions) + ")");
        try
        {
            SystemConfig probe = sys;
            probe.transmissions += probe.transmissions % 2; // parity reported above
            probe.check();
        }
        catch (const Error &e)
        {
            error(e.what());
        }
        try
        {
            s.estimator.check();
        }
        catch (const Error &e)
        {
            error(e.what());
        }
        if (s.side < 1)
            error("M_side must be >= 1");
        if (!(s.spacing_over_lambda > 0.0))
            error("d_over_lambda must be positive");
        else if (s.spacing_over_lambda > 0.25 * (1.0 + 1e-12))
            warning("element spacing " + std::to_string(s.spacing_over_lambda) +
                    " lambda exceeds lambda/4: the round-trip response has grating lobes (spatial ambiguity)");
        if (s.codebook.delta < 0.0)
            error("delta must be non-negative");
        if (s.multipath.paths < 0)
            error("L must be non-negative");
        if (s.multipath.delay_min < 0.0 || s.multipath.delay_max < s.multipath.delay_min)
            error("nlos_delay_range_ns must be an ordered, non-negative interval");
        if (c.profiles < 1 || c.noise_realizations < 1)
            error("profiles and noise_realizations must be >= 1");
        if (c.threads < 1)
            error("threads must be >= 1");
        if (c.distances.empty())
            error("distances must not be empty");
        for (int side : c.sides)
            if (side < 1)
                error("sides entries must be >= 1");
        if (c.nx < 1 || c.ny < 1 || c.heatmap_seeds < 1)
            error("nx, ny and heatmap_seeds must be >= 1");
        if (c.x_max < c.x_min || c.y_max < c.y_min)
            error("x_range and y_range must be ordered");
        if (!(c.outlier_factor > 0.0))
            error("outlier_factor must be positive");

        bool has_errors = std::any_of(issues.begin(), issues.end(), [](const auto &i) { return i.error; });
        if (has_errors || !(sys.carrier_hz > 0.0) || !(sys.subcarrier_spacing_hz > 0.0))
            return issues;

        const double tau_max = sys.max_unambiguous_delay();
        if (s.multipath.paths > 0 && s.multipath.delay_max >= tau_max)
            error("nlos delay " + std::to_string(s.multipath.delay_max * 1e9) + " ns exceeds the unambiguous range " +
                  std::to_string(tau_max * 1e9) + " ns");

        RisGeometry g;
        try
        {
            g = s.geometry();
        }
        catch (const Error &e)
        {
            error(e.what());
            return issues;
        }
        auto check_point = [&](const Vec3 &p, const std::string &what) {
            const Vec3 p_ur = p - g.center;
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s [%.4g, %.4g, %.4g]", what.c_str(), p.x(), p.y(), p.z());
            if (!(p_ur.dot(g.normal) > 0.0))
                error(std::string(buf) + " is not in front of the RIS");
            const double tau = round_trip_delay(p_ur);
            if (tau >= tau_max)
                error(std::string(buf) + " has a round-trip delay beyond the unambiguous range " +
                      std::to_string(tau_max * 1e9) + " ns");
        };
        check_point(c.ue, "p_u");
        for (double d : c.distances)
        {
            if (!(d > 0.0))
                error("distances must be positive");
            else
                check_point(ray_points(s.ris_center, {d})[0], "distance point");
        }
        if (c.cdf_distance > 0.0)
            check_point(ray_points(s.ris_center, {c.cdf_distance})[0], "cdf point");
        else
            error("cdf_distance must be positive");
        if (c.fixed_beta0)
            check_point(c.beta0_reference, "beta0_reference");
        if (s.codebook.prior_center && !((*s.codebook.prior_center - g.center).dot(g.normal) > 0.0))
            error("q_u is not in front of the RIS");
        return issues;
    }

    std::string config_hash(const ordered_json &resolved)
    {
        const std::string text = resolved.dump();
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : text)
        {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        char buf[20];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
}
