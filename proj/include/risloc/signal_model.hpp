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

#ifndef RISLOC_SIGNAL_MODEL_HPP
#define RISLOC_SIGNAL_MODEL_HPP

#include "risloc/geometry.hpp"
#include "risloc/schedule.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace risloc
{
    // OFDM link budget. Derived quantities are recomputed on access so a
    // modified field can never leave them stale.
    struct SystemConfig
    {
        double carrier_hz = 28e9;
        int subcarriers = 3000;
        double subcarrier_spacing_hz = 120e3;
        int transmissions = 100;
        double tx_power_dbm = 23.0;
        double noise_psd_dbm_hz = -174.0;
        double noise_figure_db = 3.0;

        double wavelength() const { return speed_of_light / carrier_hz; }
        double symbol_energy() const; // E_s, joules
        double noise_variance() const; // sigma_n^2, joules
        double snr_prefactor() const { return 2.0 * symbol_energy() / noise_variance(); }
        double max_unambiguous_delay() const { return 1.0 / subcarrier_spacing_hz; }

        void check() const; // throws Error(config) on invalid values
    };

    struct Path
    {
        cdouble gain;
        double delay = 0.0; // seconds
    };

    struct PathSet
    {
        cdouble los_gain;
        double los_delay = 0.0;
        std::vector<Path> nlos;
    };

    struct ReceivedFrame
    {
        CMat samples; // N x T
        PathSet truth;
        Vec3 ue_position = Vec3::Zero();
        std::uint64_t schedule_id = 0;
        double noise_variance = 0.0; // model variance sigma_n^2 of each sample
        double symbol_energy = 0.0;
    };

    double round_trip_delay(const Vec3 &p_ur);

    CVec delay_steering(double tau, int n, double spacing_hz);
    CVec delay_steering_derivative(double tau, int n, double spacing_hz);

    /// Magnitude of the RIS-reflected LOS gain (cosine element pattern,
    /// inverse-square spreading). Throws Error(domain) behind the surface.
    double path_loss(const RisGeometry &geometry, const Vec3 &p_ur, double wavelength);

    struct MultipathProfile
    {
        double delay_min = 0.0; // seconds
        double delay_max = 0.0;
        double mean_power = 1.0; // E|beta_l|^2
    };

    /// Uncontrolled paths: delays uniform in [delay_min, delay_max], gains
    /// circular complex Gaussian with variance mean_power.
    std::vector<Path> generate_multipath(std::uint64_t seed, int count, const MultipathProfile &profile);

    /// Noiseless model column block: sqrt(E_s)(beta_0 d(tau_0) b^T w_t + sum_l beta_l d(tau_l)).
    CMat noiseless_samples(const SystemConfig &config, const CVec &b, const CMat &profiles, const PathSet &paths);

    /// Builds the N x T observation. `noise_seed` empty gives a noiseless frame.
    ReceivedFrame synthesize_frame(const SystemConfig &config, const RisGeometry &geometry, const Vec3 &ue_position,
                                   const PhaseSchedule &schedule, const PathSet &paths,
                                   std::optional<std::uint64_t> noise_seed);

    /// LOS path set consistent with the geometry: tau_0 = 2|p_ur|/c, beta_0 = gain e^{j phase}.
    PathSet los_paths(const RisGeometry &geometry, const Vec3 &ue_position, double gain_magnitude, double phase);
}

#endif
