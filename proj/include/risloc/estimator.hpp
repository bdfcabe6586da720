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

#ifndef RISLOC_ESTIMATOR_HPP
#define RISLOC_ESTIMATOR_HPP

#include "risloc/codebook.hpp"
#include "risloc/geometry.hpp"
#include "risloc/schedule.hpp"
#include "risloc/signal_model.hpp"

#include <map>
#include <memory>
#include <tuple>
#include <vector>

namespace risloc
{
    enum class GainEstimate
    {
        least_squares,          // (sum_t zeta_t^H y_t) / (sum_t zeta_t^H zeta_t)
        per_transmission_ratio, // mean_t (zeta_t^H y_t) / (zeta_t^H zeta_t); comparison only
    };

    struct EstimatorConfig
    {
        int ifft_oversampling = 10;     // N' = factor * N
        int grid_directions = 0;        // directions on the front cap; 0 derives it from the beamwidth
        int grid_shells = 3;            // radii spread over [r - eps, r + eps]
        double max_off_normal_deg = 90.0; // angular extent of the direction cap
        double range_tolerance = 0.0;   // eps in meters; 0 selects 2 c/(2 N' df) + one grid pitch
        double min_range = 0.05;        // shells closer than this to the RIS are dropped
        int max_iterations = 200;
        double gradient_tolerance = 1e-14;
        double function_tolerance = 1e-15;
        double parameter_tolerance = 1e-12;
        GainEstimate gain_estimate = GainEstimate::least_squares;

        void check() const;
    };

    struct EstimateReport
    {
        double tau_hat = 0.0;
        Vec3 coarse_position = Vec3::Zero();  // absolute
        Vec3 refined_position = Vec3::Zero(); // absolute, p_r + refined p_ur
        cdouble gain_hat;
        double initial_cost = 0.0;  // ML objective at the coarse point
        double final_cost = 0.0;    // ML objective at the refined point
        std::vector<double> cost_trace;
        int iterations = 0;
        bool refined = false; // false when the optimizer failed and the coarse point was kept
        double error_m = -1.0; // filled by callers that know the truth
    };

    /// IFFT-based delay estimate: argmax of the non-coherently accumulated
    /// N'-point zero-padded IFFT of every column, mapped to n / (N' df).
    double coarse_delay(const CMat &y_tilde, const SystemConfig &config, const EstimatorConfig &est);

    /// Directions (unit vectors, world frame) on the RIS front cap.
    std::vector<Vec3> cap_directions(const RisGeometry &geometry, int count, double max_off_normal_deg);

    int auto_direction_count(const RisGeometry &geometry, double wavelength, double max_off_normal_deg);

    // Precomputed signatures s(p) = b(p)^T [w~_1 ... w~_{T/2}] over a candidate set.
    class CoarseGrid
    {
    public:
        CoarseGrid(const RisGeometry &geometry, const CMat &base, double wavelength, std::vector<Vec3> candidates);

        const std::vector<Vec3> &points() const { return points_; } // relative to p_r
        const CMat &signatures() const { return signatures_; }

        /// P(p) = |s(p) z^H|^2 / ||s(p)||^2 for every candidate.
        RVec score(const Eigen::RowVectorXcd &z) const;
        Eigen::Index best(const Eigen::RowVectorXcd &z) const;

    private:
        std::vector<Vec3> points_;
        CMat signatures_; // G x T/2
        RVec norms_;
    };

    // Grids keyed by (schedule id, shell radii); shared across noise realizations of one profile.
    class GridCache
    {
    public:
        std::shared_ptr<const CoarseGrid> get(std::uint64_t schedule_id, const std::vector<double> &radii) const;
        void put(std::uint64_t schedule_id, const std::vector<double> &radii, std::shared_ptr<const CoarseGrid> grid);
        std::size_t size() const { return grids_.size(); }

    private:
        std::map<std::pair<std::uint64_t, std::vector<double>>, std::shared_ptr<const CoarseGrid>> grids_;
    };

    /// z = d(tau_hat)^H [y~_1 ... y~_{T/2}]
    Eigen::RowVectorXcd delay_matched_sequence(const CMat &y_tilde, double tau_hat, const SystemConfig &config);

    double default_range_tolerance(const RisGeometry &geometry, const SystemConfig &config,
                                   const EstimatorConfig &est, double range_hat);

    std::vector<double> shell_radii(double range_hat, double epsilon, const EstimatorConfig &est);

    /// Grid search over the range shell c tau_hat / 2 +/- eps. Returns p_ur (relative to the RIS center).
    Vec3 coarse_position(const CMat &y_tilde, double tau_hat, const PhaseSchedule &schedule,
                         const RisGeometry &geometry, const SystemConfig &config, const EstimatorConfig &est,
                         GridCache *cache = nullptr);

    /// Grid search restricted to caller-supplied candidates (p_ur) inside the range shell.
    /// An empty shell widens eps once (doubling) before failing with Error(empty_shell).
    Vec3 coarse_position_from_candidates(const CMat &y_tilde, double tau_hat, const PhaseSchedule &schedule,
                                         const RisGeometry &geometry, const SystemConfig &config,
                                         const std::vector<Vec3> &candidates, double epsilon);

    // Concentrated ML objective: sum_t || beta(p) zeta_t(p) - y~_t ||^2 with beta(p) eliminated.
    class ConcentratedCost
    {
    public:
        ConcentratedCost(const CMat &y_tilde, const CMat &base, const RisGeometry &geometry,
                         const SystemConfig &config, GainEstimate gain = GainEstimate::least_squares);

        double energy() const { return energy_; } // sum_t ||y~_t||^2

        /// Objective normalised by energy(), in [0, 1] for the least-squares gain.
        double normalized(const Vec3 &p_ur) const;
        double normalized(const Vec3 &p_ur, Vec3 *gradient) const;

        /// Unnormalised objective.
        double value(const Vec3 &p_ur) const { return energy_ * normalized(p_ur); }

        /// Concentrated gain beta(p); includes the sqrt(E_s) factor of the observation.
        cdouble concentrated_gain(const Vec3 &p_ur) const;

        /// Objective at an explicit gain (for checking the concentration step).
        double value_at_gain(const Vec3 &p_ur, cdouble gain) const;

    private:
        struct Projections;
        Projections project(const Vec3 &p_ur, bool with_derivatives) const;
        double normalized_least_squares(const Vec3 &p_ur, Vec3 *gradient) const;

        CMat y_tilde_;
        CMat base_;
        RisGeometry geometry_;
        SystemConfig config_;
        GainEstimate gain_;
        double energy_ = 0.0;
    };

    /// Quasi-Newton (BFGS) refinement of the concentrated likelihood from `initial_p_ur`.
    EstimateReport ml_refine(const CMat &y_tilde, const Vec3 &initial_p_ur, const PhaseSchedule &schedule,
                             const RisGeometry &geometry, const SystemConfig &config, const EstimatorConfig &est);

    /// All three stages on a multipath-cleaned observation.
    EstimateReport localize(const CleanedFrame &cleaned, const PhaseSchedule &schedule, const RisGeometry &geometry,
                            const SystemConfig &config, const EstimatorConfig &est, GridCache *cache = nullptr);
}

#endif
