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

#ifndef RISLOC_CONFIG_HPP
#define RISLOC_CONFIG_HPP

#include "risloc/montecarlo.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace risloc
{
    // Experiment file: one flat JSON object whose keys follow the symbols of
    // the system model (f_c, N, delta_f, T, M_side, d_over_lambda, delta, ...).
    struct ExperimentConfig
    {
        Scenario scenario;
        Vec3 ris_euler_deg = Vec3::Zero(); // yaw, pitch, roll

        // single-point evaluation
        Vec3 ue = Vec3(10.0, 10.0, 10.0) / std::sqrt(3.0);

        // campaigns
        std::vector<double> distances{10.0};
        int profiles = 20;
        int noise_realizations = 5;
        std::uint64_t master_seed = 1;
        bool noiseless = false;
        int threads = 1;
        double outlier_factor = 10.0;
        double cdf_distance = 11.0;

        // PEB versus RIS size
        std::vector<int> sides{4, 8, 16, 32, 64, 100};

        // heatmap
        double x_min = -20.0, x_max = 20.0, y_min = 0.0, y_max = 20.0;
        int nx = 21, ny = 11;
        int heatmap_seeds = 5;
        bool fixed_beta0 = false;
        Vec3 beta0_reference = Vec3(10.0, 10.0, 10.0) / std::sqrt(3.0);

        nlohmann::ordered_json json; // resolved configuration, every key present

        Campaign campaign() const;
        PebSweep peb_sweep() const;
        HeatmapSpec heatmap() const;
        double beta0_reference_gain() const;
    };

    /// Names of every accepted key.
    const std::vector<std::string> &config_keys();

    /// Resolved defaults (full-scale system, "preset": "full").
    nlohmann::ordered_json default_config_json();

    /// Parses text; errors are Error(config) with "line L: ..." messages.
    /// A campaign manifest (object with a "config" member) is accepted as well.
    ExperimentConfig parse_config(const std::string &text, const std::string &origin = "<config>");
    ExperimentConfig load_config(const std::string &path);

    /// Converts a resolved/partial JSON object into a config, applying presets and defaults.
    ExperimentConfig config_from_json(const nlohmann::json &object);

    /// Applies KEY=VALUE; VALUE is read as JSON when possible, else as a string.
    void apply_override(nlohmann::json &object, const std::string &assignment);

    struct ValidationIssue
    {
        bool error = false; // false: warning
        std::string message;
    };

    /// Static checks: parity of T, element spacing vs lambda/4, delays inside the
    /// unambiguous range, UE placements in front of the RIS, numeric ranges.
    std::vector<ValidationIssue> validate(const nlohmann::json &object);

    /// FNV-1a digest of the compact resolved JSON.
    std::string config_hash(const nlohmann::ordered_json &resolved);
}

#endif
