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

#ifndef RISLOC_MONTECARLO_HPP
#define RISLOC_MONTECARLO_HPP

#include "risloc/codebook.hpp"
#include "risloc/estimator.hpp"
#include "risloc/fisher.hpp"

#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace risloc
{
    struct CodebookSpec
    {
        CodebookKind kind = CodebookKind::random;
        double delta = 1.0; // uncertainty radius of the directional prior, meters
        // When set, the directional prior center is this point instead of a draw from S(p_u, delta).
        std::optional<Vec3> prior_center;
    };

    struct MultipathSpec
    {
        int paths = 0;
        double delay_min = 20e-9; // seconds
        double delay_max = 200e-9;
        double relative_power_db = 0.0; // E|beta_l|^2 relative to M |beta_0|^2
    };

    // Everything needed to simulate one UE position.
    struct Scenario
    {
        SystemConfig system;
        Vec3 ris_center = Vec3::Zero();
        Mat3 ris_orientation = Mat3::Identity();
        int side = 100;
        double spacing_over_lambda = 0.25;
        CodebookSpec codebook;
        MultipathSpec multipath;
        EstimatorConfig estimator;
        std::optional<double> fixed_gain; // |beta_0| for every position instead of the path-loss value
        std::string cache_dir;            // schedule cache; empty disables it

        RisGeometry geometry() const;
        void check() const;
    };

    /// Desk-scale profile: side 32, N = 256, T = 64.
    Scenario desk_scale_scenario();

    /// Draws the phase schedule of one profile realization. A directional
    /// codebook first draws the prior center q_u in S(p_u, delta), then aims
    /// T/2 beams at points of S(q_u, delta).
    PhaseSchedule draw_schedule(const Scenario &scenario, const RisGeometry &geometry, const Vec3 &ue_position,
                                std::uint64_t seed);

    /// Seed of one trial; the noise index ~0 is reserved for profile-level draws.
    std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point, std::uint64_t profile, std::uint64_t noise);
    std::uint64_t profile_seed(std::uint64_t master, std::uint64_t point, std::uint64_t profile);

    /// UE positions p_r + (d, d, d) / sqrt(3).
    std::vector<Vec3> ray_points(const Vec3 &ris_center, const std::vector<double> &distances);

    struct Campaign
    {
        Scenario scenario;
        std::vector<Vec3> points; // absolute UE positions
        int profiles = 20;
        int noise_realizations = 5;
        std::uint64_t master_seed = 1;
        bool noiseless = false;
        int threads = 1;
        double outlier_factor = 10.0; // error > factor * PEB counts as an outlier

        void check() const;
    };

    struct TrialRecord
    {
        int point = 0;
        int profile = 0;
        int noise = 0;
        std::uint64_t seed = 0;
        Vec3 ue = Vec3::Zero();
        Vec3 estimate = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
        double error_m = std::numeric_limits<double>::quiet_NaN();
        double peb_m = std::numeric_limits<double>::quiet_NaN();
        double tau_hat = std::numeric_limits<double>::quiet_NaN();
        Vec3 coarse = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
        double final_cost = std::numeric_limits<double>::quiet_NaN();
        int iterations = 0;
        bool refined = false;
        bool ok = false;
        std::string message;
    };

    struct PointAggregate
    {
        int point = 0;
        Vec3 ue = Vec3::Zero();
        double distance = 0.0; // |p_u - p_r|
        int trials = 0;
        int failures = 0;
        int outliers = 0;
        double rmse = 0.0;    // over successful trials
        double peb_rms = 0.0; // sqrt(mean PEB^2) over the same trials
        double ratio = 0.0;   // rmse / peb_rms
    };

    struct CampaignResult
    {
        std::vector<TrialRecord> trials; // ordered by (point, profile, noise)
        std::vector<PointAggregate> points;
        int failures = 0;
        double runtime_s = 0.0;
    };

    /// Reduction of per-trial records into per-point statistics.
    std::vector<PointAggregate> aggregate(const std::vector<TrialRecord> &trials, const std::vector<Vec3> &points,
                                          const Vec3 &ris_center, double outlier_factor);

    /// Runs fn(0..count-1) on a work queue; results must be stored by index.
    void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &fn);

    /// Estimation error and PEB at every campaign point.
    CampaignResult run_error_vs_distance(const Campaign &campaign);

    struct CdfResult
    {
        CampaignResult campaign;
        std::vector<double> errors; // sorted
        std::vector<double> pebs;   // sorted, one per profile realization
        double outlier_fraction = 0.0;
    };

    /// Empirical CDFs of error and PEB at campaign.points[point].
    CdfResult run_cdf(const Campaign &campaign, std::size_t point);

    /// F(x_i) = (i + 1) / n over sorted samples.
    std::vector<double> empirical_cdf(const std::vector<double> &sorted);

    struct PointBound
    {
        PebResult bound;
        double gain_sum = 0.0; // G = sum_t |b^T w_t|^2
    };

    /// Bound for one profile realization: the LOS phase and the schedule are drawn from `seed`.
    PointBound point_bound(const Scenario &scenario, const RisGeometry &geometry, const Vec3 &ue, std::uint64_t seed);
    PointBound bound_for_schedule(const Scenario &scenario, const RisGeometry &geometry, const PhaseSchedule &schedule,
                                  const Vec3 &ue, double phase);

    struct PebVsMRow
    {
        int side = 0;
        Eigen::Index elements = 0;
        CodebookKind kind = CodebookKind::random;
        double peb_mean = 0.0;
        double peb_rms = 0.0;
        double gain_sum = 0.0; // mean G over profiles
        int ill_conditioned = 0;
        int profiles = 0;
    };

    struct PebSweep
    {
        Scenario scenario;
        Vec3 ue = Vec3(10.0, 10.0, 10.0) / std::sqrt(3.0);
        std::vector<int> sides;
        std::vector<CodebookKind> kinds{CodebookKind::random, CodebookKind::directional};
        int profiles = 10;
        std::uint64_t master_seed = 1;
        int threads = 1;
    };

    std::vector<PebVsMRow> run_peb_vs_m(const PebSweep &sweep);

    /// Least-squares slope of log(peb_mean) against log(M) over the rows of one kind.
    double loglog_slope(const std::vector<PebVsMRow> &rows, CodebookKind kind);

    struct HeatmapSpec
    {
        Scenario scenario;
        double x_min = -20.0, x_max = 20.0;
        double y_min = 0.0, y_max = 20.0;
        int nx = 21, ny = 11;
        int seeds = 5;
        std::uint64_t master_seed = 1;
        int threads = 1;
    };

    struct HeatmapCell
    {
        int ix = 0, iy = 0;
        Vec3 position = Vec3::Zero(); // [x, y, y]
        double peb = std::numeric_limits<double>::quiet_NaN(); // mean over seeds
        double condition_number = std::numeric_limits<double>::quiet_NaN();
        bool behind = false;
    };

    /// PEB over UE positions [x, y, y]; positions behind the surface are skipped and marked.
    std::vector<HeatmapCell> run_heatmap(const HeatmapSpec &spec);

    /// Mean of |peb(x) - peb(-x)| / mean(peb(x), peb(-x)) over mirror pairs with finite PEB.
    double heatmap_symmetry_gap(const std::vector<HeatmapCell> &cells, int nx, int ny);

    // ---- artifacts -----------------------------------------------------------------------------

    void write_trials_csv(const std::filesystem::path &file, const std::vector<TrialRecord> &trials);
    void write_points_csv(const std::filesystem::path &file, const std::vector<PointAggregate> &points);
    void write_cdf_csv(const std::filesystem::path &file, const CdfResult &cdf);
    void write_peb_vs_m_csv(const std::filesystem::path &file, const std::vector<PebVsMRow> &rows);
    void write_heatmap_csv(const std::filesystem::path &file, const std::vector<HeatmapCell> &cells);
    /// ny rows of nx PEB values (row iy, column ix); skipped cells are empty.
    void write_heatmap_grid_csv(const std::filesystem::path &file, const std::vector<HeatmapCell> &cells, int nx,
                                int ny);
    /// Reads back a trials CSV (used to verify aggregation from raw records).
    std::vector<TrialRecord> read_trials_csv(const std::filesystem::path &file);
}

#endif
