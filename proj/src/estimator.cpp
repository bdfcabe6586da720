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

#include "risloc/estimator.hpp"

#include <ceres/ceres.h>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

namespace risloc
{
    void EstimatorConfig::check() const
    {
        if (ifft_oversampling < 1)
            throw Error(ErrorCode::config, "N_prime_factor must be >= 1");
        if (grid_directions < 0)
            throw Error(ErrorCode::config, "grid_directions must be >= 0");
        if (grid_shells < 1)
            throw Error(ErrorCode::config, "grid_shells must be >= 1");
        if (!(max_off_normal_deg > 0.0 && max_off_normal_deg <= 90.0))
            throw Error(ErrorCode::config, "max_off_normal_deg must lie in (0, 90]");
        if (range_tolerance < 0.0)
            throw Error(ErrorCode::config, "epsilon must be non-negative (0 selects the default)");
        if (max_iterations < 1)
            throw Error(ErrorCode::config, "max_iterations must be >= 1");
    }

    // ---- coarse delay --------------------------------------------------------------------------

    double coarse_delay(const CMat &y_tilde, const SystemConfig &config, const EstimatorConfig &est)
    {
        const Eigen::Index n = y_tilde.rows();
        const Eigen::Index n_prime = n * est.ifft_oversampling;
        if (n_prime < n || n == 0)
            throw Error(ErrorCode::invalid_argument, "IFFT length must be at least N");
        if (y_tilde.squaredNorm() == 0.0)
            throw Error(ErrorCode::no_signal, "observation is identically zero");

        Eigen::FFT<double> fft;
        std::vector<cdouble> padded(std::size_t(n_prime), cdouble(0.0)), spectrum;
        RVec accumulated = RVec::Zero(n_prime);
        for (Eigen::Index t = 0; t < y_tilde.cols(); ++t)
        {
            std::fill(padded.begin(), padded.end(), cdouble(0.0));
            for (Eigen::Index k = 0; k < n; ++k)
                padded[std::size_t(k)] = y_tilde(k, t);
            fft.inv(spectrum, padded);
            for (Eigen::Index r = 0; r < n_prime; ++r)
                accumulated[r] += std::norm(spectrum[std::size_t(r)]);
        }
        Eigen::Index peak = 0;
        accumulated.maxCoeff(&peak);
        return double(peak) / (double(n_prime) * config.subcarrier_spacing_hz);
    }

    // ---- coarse position -----------------------------------------------------------------------

    std::vector<Vec3> cap_directions(const RisGeometry &geometry, int count, double max_off_normal_deg)
    {
        std::vector<Vec3> dirs;
        if (count < 1)
            return dirs;
        dirs.reserve(std::size_t(count));
        const double z_min = std::cos(max_off_normal_deg * pi / 180.0);
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i)
        {
            const double z = 1.0 - (1.0 - z_min) * (i + 0.5) / count;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden * i;
            const Vec3 local(rho * std::cos(phi), rho * std::sin(phi), z);
            dirs.push_back(geometry.orientation * local);
        }
        return dirs;
    }

    int auto_direction_count(const RisGeometry &geometry, double wavelength, double max_off_normal_deg)
    {
        // half of the round-trip null-to-peak beamwidth lambda / (2 D)
        const double step = 0.5 * wavelength / (2.0 * geometry.aperture());
        const double cap = 2.0 * pi * (1.0 - std::cos(max_off_normal_deg * pi / 180.0));
        const double count = std::ceil(cap / (step * step));
        return int(std::clamp(count, 64.0, 200000.0));
    }

    CoarseGrid::CoarseGrid(const RisGeometry &geometry, const CMat &base, double wavelength,
                           std::vector<Vec3> candidates)
        : points_(std::move(candidates))
    {
        const Eigen::Index g = Eigen::Index(points_.size());
        const Eigen::Index m = geometry.element_count();
        signatures_.resize(g, base.cols());
        constexpr Eigen::Index chunk = 256;
        CMat bt(chunk, m);
        for (Eigen::Index start = 0; start < g; start += chunk)
        {
            const Eigen::Index rows = std::min(chunk, g - start);
            for (Eigen::Index i = 0; i < rows; ++i)
                bt.row(i) = round_trip_response(geometry, points_[std::size_t(start + i)], wavelength).transpose();
            signatures_.middleRows(start, rows).noalias() = bt.topRows(rows) * base;
        }
        norms_ = signatures_.rowwise().squaredNorm();
    }

    RVec CoarseGrid::score(const Eigen::RowVectorXcd &z) const
    {
        const CVec proj = signatures_ * z.adjoint(); // s(p) z^H
        RVec p(proj.size());
        for (Eigen::Index i = 0; i < proj.size(); ++i)
            p[i] = norms_[i] > 0.0 ? std::norm(proj[i]) / norms_[i] : 0.0;
        return p;
    }

    Eigen::Index CoarseGrid::best(const Eigen::RowVectorXcd &z) const
    {
        if (points_.empty())
            throw Error(ErrorCode::empty_shell, "coarse grid has no candidates");
        Eigen::Index idx = 0;
        score(z).maxCoeff(&idx);
        return idx;
    }

    std::shared_ptr<const CoarseGrid> GridCache::get(std::uint64_t schedule_id, const std::vector<double> &radii) const
    {
        const auto it = grids_.find({schedule_id, radii});
        return it == grids_.end() ? nullptr : it->second;
    }

    void GridCache::put(std::uint64_t schedule_id, const std::vector<double> &radii,
                        std::shared_ptr<const CoarseGrid> grid)
    {
        if (grids_.size() >= 16)
            grids_.clear();
        grids_[{schedule_id, radii}] = std::move(grid);
    }

    Eigen::RowVectorXcd delay_matched_sequence(const CMat &y_tilde, double tau_hat, const SystemConfig &config)
    {
        const CVec d = delay_steering(tau_hat, int(y_tilde.rows()), config.subcarrier_spacing_hz);
        return d.adjoint() * y_tilde;
    }

    double default_range_tolerance(const RisGeometry &geometry, const SystemConfig &config,
                                   const EstimatorConfig &est, double range_hat)
    {
        const double n_prime = double(config.subcarriers) * est.ifft_oversampling;
        const double bin = speed_of_light / (2.0 * n_prime * config.subcarrier_spacing_hz);
        const int k = est.grid_directions > 0
                          ? est.grid_directions
                          : auto_direction_count(geometry, config.wavelength(), est.max_off_normal_deg);
        const double cap = 2.0 * pi * (1.0 - std::cos(est.max_off_normal_deg * pi / 180.0));
        const double pitch = range_hat * std::sqrt(cap / k);
        return 2.0 * bin + pitch;
    }

    std::vector<double> shell_radii(double range_hat, double epsilon, const EstimatorConfig &est)
    {
        std::vector<double> radii;
        const int shells = est.grid_shells;
        for (int i = 0; i < shells; ++i)
        {
            const double r = shells == 1 ? range_hat : range_hat - epsilon + 2.0 * epsilon * i / (shells - 1);
            if (r > est.min_range)
                radii.push_back(r);
        }
        return radii;
    }

    Vec3 coarse_position(const CMat &y_tilde, double tau_hat, const PhaseSchedule &schedule,
                         const RisGeometry &geometry, const SystemConfig &config, const EstimatorConfig &est,
                         GridCache *cache)
    {
        const double range_hat = speed_of_light * tau_hat / 2.0;
        double eps = est.range_tolerance > 0.0 ? est.range_tolerance
                                               : default_range_tolerance(geometry, config, est, range_hat);
        std::vector<double> radii = shell_radii(range_hat, eps, est);
        if (radii.empty())
        {
            eps *= 2.0;
            radii = shell_radii(range_hat, eps, est);
            if (radii.empty())
                throw Error(ErrorCode::empty_shell, "no grid shell lies in front of the RIS; increase epsilon");
        }

        const int k = est.grid_directions > 0
                          ? est.grid_directions
                          : auto_direction_count(geometry, config.wavelength(), est.max_off_normal_deg);
        std::vector<double> key = radii;
        key.push_back(double(k));
        key.push_back(est.max_off_normal_deg);

        std::shared_ptr<const CoarseGrid> grid = cache ? cache->get(schedule.id(), key) : nullptr;
        if (!grid)
        {
            const auto dirs = cap_directions(geometry, k, est.max_off_normal_deg);
            std::vector<Vec3> candidates;
            candidates.reserve(radii.size() * dirs.size());
            for (double r : radii)
                for (const Vec3 &u : dirs)
                    candidates.push_back(r * u);
            grid = std::make_shared<const CoarseGrid>(geometry, schedule.base, config.wavelength(),
                                                      std::move(candidates));
            if (cache)
                cache->put(schedule.id(), key, grid);
        }
        const auto z = delay_matched_sequence(y_tilde, tau_hat, config);
        return grid->points()[std::size_t(grid->best(z))];
    }

    Vec3 coarse_position_from_candidates(const CMat &y_tilde, double tau_hat, const PhaseSchedule &schedule,
                                         const RisGeometry &geometry, const SystemConfig &config,
                                         const std::vector<Vec3> &candidates, double epsilon)
    {
        const double range_hat = speed_of_light * tau_hat / 2.0;
        auto filter = [&](double eps) {
            std::vector<Vec3> kept;
            for (const Vec3 &p : candidates)
                if (std::abs(p.norm() - range_hat) <= eps && p.norm() > 0.0)
                    kept.push_back(p);
            return kept;
        };
        std::vector<Vec3> shell = filter(epsilon);
        if (shell.empty())
            shell = filter(2.0 * epsilon);
        if (shell.empty())
            throw Error(ErrorCode::empty_shell, "no candidate lies within the range shell even after widening");
        const CoarseGrid grid(geometry, schedule.base, config.wavelength(), std::move(shell));
        return grid.points()[std::size_t(grid.best(delay_matched_sequence(y_tilde, tau_hat, config)))];
    }

    // ---- concentrated likelihood ---------------------------------------------------------------

    struct ConcentratedCost::Projections
    {
        Eigen::RowVectorXcd s;    // b^T w~_t
        CMat ds;                  // T/2 x 3, w~_t^T Bdot
        Eigen::RowVectorXcd z;    // d(tau)^H y~_t
        Eigen::RowVectorXcd zdot; // d_dot(tau)^H y~_t
        Vec3 u = Vec3::UnitZ();
    };

    ConcentratedCost::ConcentratedCost(const CMat &y_tilde, const CMat &base, const RisGeometry &geometry,
                                       const SystemConfig &config, GainEstimate gain)
        : y_tilde_(y_tilde), base_(base), geometry_(geometry), config_(config), gain_(gain)
    {
        if (base.rows() != geometry.element_count() || base.cols() != y_tilde.cols())
            throw Error(ErrorCode::shape, "observation, codebook and RIS sizes disagree");
        energy_ = y_tilde.squaredNorm();
        if (!(energy_ > 0.0))
            throw Error(ErrorCode::no_signal, "observation is identically zero");
    }

    ConcentratedCost::Projections ConcentratedCost::project(const Vec3 &p_ur, bool with_derivatives) const
    {
        Projections pr;
        const double tau = round_trip_delay(p_ur);
        const int n = int(y_tilde_.rows());
        const double df = config_.subcarrier_spacing_hz;
        pr.z = delay_steering(tau, n, df).adjoint() * y_tilde_;
        if (with_derivatives)
        {
            const SteeringSet st = ris_response(geometry_, p_ur, config_.wavelength());
            pr.s = st.b.transpose() * base_;
            pr.ds = base_.transpose() * st.b_dot;
            pr.zdot = delay_steering_derivative(tau, n, df).adjoint() * y_tilde_;
            pr.u = st.u_ur;
        }
        else
        {
            pr.s = round_trip_response(geometry_, p_ur, config_.wavelength()).transpose() * base_;
        }
        return pr;
    }

    double ConcentratedCost::normalized_least_squares(const Vec3 &p_ur, Vec3 *gradient) const
    {
        const Projections pr = project(p_ur, gradient != nullptr);
        const double n = double(y_tilde_.rows());
        const cdouble a = (pr.s.conjugate().array() * pr.z.array()).sum();
        const double q = n * pr.s.squaredNorm();
        if (!(q > 0.0))
        {
            if (gradient)
                gradient->setZero();
            return 1.0;
        }
        const double a2 = std::norm(a);
        if (gradient)
        {
            for (int i = 0; i < 3; ++i)
            {
                const cdouble da = (pr.ds.col(i).transpose().conjugate().array() * pr.z.array()).sum() +
                                   (2.0 * pr.u[i] / speed_of_light) * (pr.s.conjugate().array() * pr.zdot.array()).sum();
                const double dq = 2.0 * n * (pr.s.conjugate().array() * pr.ds.col(i).transpose().array()).real().sum();
                const double da2 = 2.0 * std::real(std::conj(a) * da);
                (*gradient)[i] = -(da2 * q - a2 * dq) / (q * q * energy_);
            }
        }
        return 1.0 - a2 / (q * energy_);
    }

    double ConcentratedCost::normalized(const Vec3 &p_ur) const { return normalized(p_ur, nullptr); }

    double ConcentratedCost::normalized(const Vec3 &p_ur, Vec3 *gradient) const
    {
        if (gain_ == GainEstimate::least_squares)
            return normalized_least_squares(p_ur, gradient);

        auto eval = [&](const Vec3 &p) { return value_at_gain(p, concentrated_gain(p)) / energy_; };
        if (gradient)
        {
            constexpr double h = 1e-7; // central differences; this variant is for comparison only
            for (int i = 0; i < 3; ++i)
            {
                Vec3 hi = p_ur, lo = p_ur;
                hi[i] += h;
                lo[i] -= h;
                (*gradient)[i] = (eval(hi) - eval(lo)) / (2.0 * h);
            }
        }
        return eval(p_ur);
    }

    cdouble ConcentratedCost::concentrated_gain(const Vec3 &p_ur) const
    {
        const Projections pr = project(p_ur, false);
        const double n = double(y_tilde_.rows());
        if (gain_ == GainEstimate::least_squares)
        {
            const double q = n * pr.s.squaredNorm();
            return q > 0.0 ? (pr.s.conjugate().array() * pr.z.array()).sum() / q : cdouble(0.0);
        }
        // mean of the per-transmission ratios; a plain sum would scale beta by T/2
        cdouble beta = 0.0;
        int used = 0;
        for (Eigen::Index t = 0; t < pr.s.size(); ++t)
        {
            const double q = n * std::norm(pr.s[t]);
            if (q > 0.0)
            {
                beta += std::conj(pr.s[t]) * pr.z[t] / q;
                ++used;
            }
        }
        return used > 0 ? beta / double(used) : cdouble(0.0);
    }

    double ConcentratedCost::value_at_gain(const Vec3 &p_ur, cdouble gain) const
    {
        const CVec d = delay_steering(round_trip_delay(p_ur), int(y_tilde_.rows()), config_.subcarrier_spacing_hz);
        const Eigen::RowVectorXcd s = round_trip_response(geometry_, p_ur, config_.wavelength()).transpose() * base_;
        double total = 0.0;
        for (Eigen::Index t = 0; t < y_tilde_.cols(); ++t)
            total += (gain * s[t] * d - y_tilde_.col(t)).squaredNorm();
        return total;
    }

    // ---- refinement ----------------------------------------------------------------------------

    namespace
    {
        class CeresObjective final : public ceres::FirstOrderFunction
        {
        public:
            explicit CeresObjective(const ConcentratedCost &cost) : cost_(cost) {}

            bool Evaluate(const double *x, double *value, double *gradient) const override
            {
                try
                {
                    const Vec3 p(x[0], x[1], x[2]);
                    if (gradient)
                    {
                        Vec3 g;
                        *value = cost_.normalized(p, &g);
                        std::copy(g.data(), g.data() + 3, gradient);
                    }
                    else
                    {
                        *value = cost_.normalized(p);
                    }
                    return std::isfinite(*value);
                }
                catch (const Error &)
                {
                    return false; // e.g. a line-search probe at the RIS center
                }
            }

            int NumParameters() const override { return 3; }

        private:
            const ConcentratedCost &cost_;
        };
    }

    EstimateReport ml_refine(const CMat &y_tilde, const Vec3 &initial_p_ur, const PhaseSchedule &schedule,
                             const RisGeometry &geometry, const SystemConfig &config, const EstimatorConfig &est)
    {
        const ConcentratedCost cost(y_tilde, schedule.base, geometry, config, est.gain_estimate);
        const double f0 = cost.normalized(initial_p_ur);

        double x[3] = {initial_p_ur.x(), initial_p_ur.y(), initial_p_ur.z()};
        ceres::GradientProblem problem(new CeresObjective(cost));
        ceres::GradientProblemSolver::Options options;
        options.line_search_direction_type = ceres::BFGS;
        options.max_num_iterations = est.max_iterations;
        options.gradient_tolerance = est.gradient_tolerance;
        options.function_tolerance = est.function_tolerance;
        options.parameter_tolerance = est.parameter_tolerance;
        options.logging_type = ceres::SILENT;
        options.minimizer_progress_to_stdout = false;
        ceres::GradientProblemSolver::Summary summary;
        ceres::Solve(options, problem, x, &summary);

        EstimateReport rep;
        const Vec3 refined(x[0], x[1], x[2]);
        const double f1 = summary.termination_type == ceres::FAILURE ? f0 + 1.0 : cost.normalized(refined);
        rep.refined = std::isfinite(f1) && f1 <= f0;
        const Vec3 chosen = rep.refined ? refined : initial_p_ur;

        rep.coarse_position = geometry.center + initial_p_ur;
        rep.refined_position = geometry.center + chosen;
        rep.initial_cost = f0 * cost.energy();
        rep.final_cost = (rep.refined ? f1 : f0) * cost.energy();
        rep.iterations = int(summary.iterations.size()) - 1;
        for (const auto &it : summary.iterations)
            rep.cost_trace.push_back(it.cost * cost.energy());
        rep.gain_hat = cost.concentrated_gain(chosen) / std::sqrt(config.symbol_energy());
        return rep;
    }

    EstimateReport localize(const CleanedFrame &cleaned, const PhaseSchedule &schedule, const RisGeometry &geometry,
                            const SystemConfig &config, const EstimatorConfig &est, GridCache *cache)
    {
        const double tau_hat = coarse_delay(cleaned.y_tilde, config, est);
        const Vec3 coarse = coarse_position(cleaned.y_tilde, tau_hat, schedule, geometry, config, est, cache);
        EstimateReport rep = ml_refine(cleaned.y_tilde, coarse, schedule, geometry, config, est);
        rep.tau_hat = tau_hat;
        return rep;
    }
}
