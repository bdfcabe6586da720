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

#include "risloc/signal_model.hpp"

#include <cmath>
#include <random>

namespace risloc
{
    double SystemConfig::symbol_energy() const
    {
        return std::pow(10.0, (tx_power_dbm - 30.0) / 10.0) / (subcarriers * subcarrier_spacing_hz);
    }

    double SystemConfig::noise_variance() const
    {
        return std::pow(10.0, (noise_psd_dbm_hz + noise_figure_db - 30.0) / 10.0);
    }

    void SystemConfig::check() const
    {
        if (!(carrier_hz > 0.0))
            throw Error(ErrorCode::config, "f_c must be positive");
        if (subcarriers < 1)
            throw Error(ErrorCode::config, "N must be >= 1");
        if (!(subcarrier_spacing_hz > 0.0))
            throw Error(ErrorCode::config, "delta_f must be positive");
        if (transmissions < 2 || transmissions % 2 != 0)
            throw Error(ErrorCode::config, "T must be even");
    }

    double round_trip_delay(const Vec3 &p_ur) { return 2.0 * p_ur.norm() / speed_of_light; }

    CVec delay_steering(double tau, int n, double spacing_hz)
    {
        CVec d(n);
        const double w = -2.0 * pi * tau * spacing_hz;
        for (int k = 0; k < n; ++k)
            d[k] = unit_phasor(w * k);
        return d;
    }

    CVec delay_steering_derivative(double tau, int n, double spacing_hz)
    {
        CVec d = delay_steering(tau, n, spacing_hz);
        const cdouble f = -j1 * (2.0 * pi * spacing_hz);
        for (int k = 0; k < n; ++k)
            d[k] *= f * double(k);
        return d;
    }

    double path_loss(const RisGeometry &geometry, const Vec3 &p_ur, double wavelength)
    {
        const double r = p_ur.norm();
        if (!(r > 0.0))
            throw Error(ErrorCode::singular_position, "UE coincides with the RIS center");
        const double cos_phi = p_ur.dot(geometry.normal) / r;
        if (cos_phi < -1e-12)
            throw Error(ErrorCode::domain, "UE is behind the RIS");
        return wavelength * wavelength * std::max(cos_phi, 0.0) / (16.0 * std::pow(pi, 1.5) * r * r);
    }

    std::vector<Path> generate_multipath(std::uint64_t seed, int count, const MultipathProfile &profile)
    {
        std::vector<Path> paths;
        if (count <= 0)
            return paths;
        if (profile.delay_max < profile.delay_min || profile.delay_min < 0.0)
            throw Error(ErrorCode::invalid_argument, "multipath delay interval is empty or negative");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> delay(profile.delay_min, profile.delay_max);
        std::normal_distribution<double> gauss(0.0, std::sqrt(profile.mean_power / 2.0));
        paths.reserve(count);
        for (int l = 0; l < count; ++l)
        {
            Path p;
            p.delay = profile.delay_min == profile.delay_max ? profile.delay_min : delay(rng);
            const double re = gauss(rng);
            const double im = gauss(rng);
            p.gain = {re, im};
            paths.push_back(p);
        }
        return paths;
    }

    CMat noiseless_samples(const SystemConfig &config, const CVec &b, const CMat &profiles, const PathSet &paths)
    {
        const int n = config.subcarriers;
        if (b.size() != profiles.rows())
            throw Error(ErrorCode::shape, "steering vector and profiles disagree on M");
        const double amp = std::sqrt(config.symbol_energy());

        const Eigen::RowVectorXcd s = b.transpose() * profiles; // b^T w_t
        const CVec d0 = delay_steering(paths.los_delay, n, config.subcarrier_spacing_hz);
        CMat y = (amp * paths.los_gain) * (d0 * s);

        if (!paths.nlos.empty())
        {
            CVec clutter = CVec::Zero(n);
            for (const Path &p : paths.nlos)
                clutter += p.gain * delay_steering(p.delay, n, config.subcarrier_spacing_hz);
            y.colwise() += amp * clutter;
        }
        return y;
    }

    ReceivedFrame synthesize_frame(const SystemConfig &config, const RisGeometry &geometry, const Vec3 &ue_position,
                                   const PhaseSchedule &schedule, const PathSet &paths,
                                   std::optional<std::uint64_t> noise_seed)
    {
        if (schedule.transmissions() != config.transmissions)
            throw Error(ErrorCode::shape, "schedule length does not match T");
        if (schedule.element_count() != geometry.element_count())
            throw Error(ErrorCode::shape, "schedule element count does not match the RIS");

        const Vec3 p_ur = ue_position - geometry.center;
        const CVec b = round_trip_response(geometry, p_ur, config.wavelength());

        ReceivedFrame frame;
        frame.samples = noiseless_samples(config, b, schedule.expanded, paths);
        frame.truth = paths;
        frame.ue_position = ue_position;
        frame.schedule_id = schedule.id();
        frame.noise_variance = config.noise_variance();
        frame.symbol_energy = config.symbol_energy();

        if (noise_seed)
        {
            std::mt19937_64 rng(*noise_seed);
            std::normal_distribution<double> gauss(0.0, std::sqrt(frame.noise_variance / 2.0));
            for (Eigen::Index t = 0; t < frame.samples.cols(); ++t)
                for (Eigen::Index k = 0; k < frame.samples.rows(); ++k)
                {
                    const double re = gauss(rng);
                    const double im = gauss(rng);
                    frame.samples(k, t) += cdouble(re, im);
                }
        }
        return frame;
    }

    PathSet los_paths(const RisGeometry &geometry, const Vec3 &ue_position, double gain_magnitude, double phase)
    {
        PathSet p;
        p.los_gain = gain_magnitude * unit_phasor(phase);
        p.los_delay = round_trip_delay(ue_position - geometry.center);
        return p;
    }
}
