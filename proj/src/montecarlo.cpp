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

#include "risloc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace risloc
{
    RisGeometry Scenario::geometry() const
    {
        const double lambda = system.wavelength();
        return build_geometry(ris_center, ris_orientation, side, spacing_over_lambda * lambda, lambda);
    }

    void Scenario::check() const
    {
        system.check();
        estimator.check();
        if (side < 1)
            throw Error(ErrorCode::config, "M_side must be >= 1");
        if (!(spacing_over_lambda > 0.0))
            throw Error(ErrorCode::config, "d_over_lambda must be positive");
        if (codebook.delta < 0.0)
            throw Error(ErrorCode::config, "delta must be non-negative");
        if (multipath.paths < 0)
            throw Error(ErrorCode::config, "L must be non-negative");
        if (multipath.paths > 0 && !(multipath.delay_min >= 0.0 && multipath.delay_max >= multipath.delay_min))
            throw Error(ErrorCode::config, "nlos_delay_range must be an ordered, non-negative interval");
        if (fixed_gain && !(*fixed_gain > 0.0))
            throw Error(ErrorCode::config, "fixed beta_0 must be positive");
    }

    Scenario desk_scale_scenario()
    {
        Scenario s;
        s.system.subcarriers = 256;
        s.system.transmissions = 64;
        s.side = 32;
        return s;
    }

    namespace
    {
        std::uint64_t double_bits(double v)
        {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            return bits;
        }

        PhaseSchedule generate_schedule(const Scenario &scenario, const RisGeometry &geometry, const Vec3 &ue,
                                        std::uint64_t seed)
        {
            const Eigen::Index half_t = scenario.system.transmissions / 2;
            if (scenario.codebook.kind == CodebookKind::random)
                return random_codebook(geometry.element_count(), half_t, seed);
            if (scenario.codebook.kind != CodebookKind::directional)
                throw Error(ErrorCode::invalid_argument, "only random and directional codebooks can be drawn");
            std::mt19937_64 rng(seed);
            const Vec3 prior = scenario.codebook.prior_center
                                   ? *scenario.codebook.prior_center
                                   : sample_in_ball(rng, ue, scenario.codebook.delta);
            return directional_codebook(geometry, prior, scenario.codebook.delta, half_t,
                                        scenario.system.wavelength(), combine_seed(seed, 0x5eed));
        }
    }

    PhaseSchedule draw_schedule(const Scenario &scenario, const RisGeometry &geometry, const Vec3 &ue_position,
                                std::uint64_t seed)
    {
        if (scenario.cache_dir.empty())
            return generate_schedule(scenario, geometry, ue_position, seed);

        // directional draws also depend on the UE position and the prior
        std::uint64_t key = seed;
        if (scenario.codebook.kind == CodebookKind::directional)
        {
            for (int i = 0; i < 3; ++i)
                key = combine_seed(key, double_bits(ue_position[i]));
            key = combine_seed(key, double_bits(scenario.codebook.delta));
            if (scenario.codebook.prior_center)
                for (int i = 0; i < 3; ++i)
                    key = combine_seed(key, double_bits((*scenario.codebook.prior_center)[i]));
        }
        const std::filesystem::path file =
            std::filesystem::path(scenario.cache_dir) /
            schedule_cache_name(scenario.codebook.kind, key, geometry.element_count(),
                                scenario.system.transmissions, geometry.hash());
        if (std::filesystem::exists(file))
        {
            CachedSchedule cached = load_schedule(file);
            if (cached.geometry_hash == geometry.hash() && cached.schedule.element_count() == geometry.element_count() &&
                cached.schedule.transmissions() == scenario.system.transmissions)
            {
                cached.schedule.seed = seed;
                return cached.schedule;
            }
        }
        PhaseSchedule s = generate_schedule(scenario, geometry, ue_position, seed);
        std::filesystem::create_directories(scenario.cache_dir);
        save_schedule(s, geometry.hash(), file);
        return s;
    }

    std::uint64_t trial_seed(std::uint64_t master, std::uint64_t point, std::uint64_t profile, std::uint64_t noise)
    {
        return combine_seed(combine_seed(combine_seed(master, point), profile), noise);
    }

    std::uint64_t profile_seed(std::uint64_t master, std::uint64_t point, std::uint64_t profile)
    {
        return trial_seed(master, point, profile, ~std::uint64_t(0));
    }

    std::vector<Vec3> ray_points(const Vec3 &ris_center, const std::vector<double> &distances)
    {
        std::vector<Vec3> pts;
        for (double d : distances)
            pts.push_back(ris_center + Vec3::Constant(d / std::sqrt(3.0)));
        return pts;
    }

    void Campaign::check() const
    {
        scenario.check();
        if (points.empty())
            throw Error(ErrorCode::config, "campaign needs at least one UE position");
        if (profiles < 1 || noise_realizations < 1)
            throw Error(ErrorCode::config, "profiles and noise_realizations must be >= 1");
        if (threads < 1)
            throw Error(ErrorCode::config, "threads must be >= 1");
    }

    void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &fn)
    {
        if (threads <= 1 || count <= 1)
        {
            for (std::size_t i = 0; i < count; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        const std::size_t workers = std::min<std::size_t>(std::size_t(threads), count);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++)
                {
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(error_mutex);
                        if (!first_error)
                            first_error = std::current_exception();
                    }
                }
            });
        for (auto &t : pool)
            t.join();
        if (first_error)
            std::rethrow_exception(first_error);
    }

    std::vector<PointAggregate> aggregate(const std::vector<TrialRecord> &trials, const std::vector<Vec3> &points,
                                          const Vec3 &ris_center, double outlier_factor)
    {
        std::vector<PointAggregate> out(points.size());
        std::vector<double> se(points.size(), 0.0), sp(points.size(), 0.0);
        for (std::size_t i = 0; i < points.size(); ++i)
        {
            out[i].point = int(i);
            out[i].ue = points[i];
            out[i].distance = (points[i] - ris_center).norm();
        }
        for (const TrialRecord &r : trials)
        {
            if (r.point < 0 || std::size_t(r.point) >= points.size())
                continue;
            PointAggregate &a = out[std::size_t(r.point)];
            if (!r.ok)
            {
                ++a.failures;
                continue;
            }
            ++a.trials;
            se[std::size_t(r.point)] += r.error_m * r.error_m;
            sp[std::size_t(r.point)] += r.peb_m * r.peb_m;
            if (r.error_m > outlier_factor * r.peb_m)
                ++a.outliers;
        }
        for (std::size_t i = 0; i < points.size(); ++i)
        {
            PointAggregate &a = out[i];
            if (a.trials == 0)
            {
                a.rmse = a.peb_rms = a.ratio = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            a.rmse = std::sqrt(se[i] / a.trials);
            a.peb_rms = std::sqrt(sp[i] / a.trials);
            a.ratio = a.rmse / a.peb_rms;
        }
        return out;
    }

    namespace
    {
        // One (point, profile) work item: draws the profile, then runs every noise realization.
        void run_profile(const Campaign &c, const RisGeometry &geometry, std::size_t point, std::size_t profile,
                         TrialRecord *records)
        {
            const Scenario &sc = c.scenario;
            const Vec3 &ue = c.points[point];
            const std::uint64_t ps = profile_seed(c.master_seed, point, profile);
            for (int n = 0; n < c.noise_realizations; ++n)
            {
                TrialRecord &r = records[n];
                r.point = int(point);
                r.profile = int(profile);
                r.noise = n;
                r.seed = trial_seed(c.master_seed, point, profile, std::uint64_t(n));
                r.ue = ue;
            }

            PhaseSchedule schedule;
            PathSet paths;
            double peb_value = std::numeric_limits<double>::quiet_NaN();
            try
            {
                std::mt19937_64 rng(ps);
                std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
                const Vec3 p_ur = ue - geometry.center;
                const double mag = sc.fixed_gain ? *sc.fixed_gain : path_loss(geometry, p_ur, sc.system.wavelength());
                const double phi = phase(rng);
                schedule = draw_schedule(sc, geometry, ue, combine_seed(ps, 1));
                paths = los_paths(geometry, ue, mag, phi);
                MultipathProfile mp;
                mp.delay_min = sc.multipath.delay_min;
                mp.delay_max = sc.multipath.delay_max;
                mp.mean_power =
                    mag * mag * double(geometry.element_count()) * std::pow(10.0, sc.multipath.relative_power_db / 10.0);
                paths.nlos = generate_multipath(combine_seed(ps, 2), sc.multipath.paths, mp);
                LosParameters los;
                los.rho = mag;
                los.phi = phi;
                los.position = ue;
                peb_value = position_bound(sc.system, geometry, schedule, los).peb;
            }
            catch (const std::exception &e)
            {
                for (int n = 0; n < c.noise_realizations; ++n)
                    records[n].message = e.what();
                return;
            }

            GridCache cache;
            for (int n = 0; n < c.noise_realizations; ++n)
            {
                TrialRecord &r = records[n];
                r.peb_m = peb_value;
                try
                {
                    const ReceivedFrame frame =
                        synthesize_frame(sc.system, geometry, ue, schedule, paths,
                                         c.noiseless ? std::nullopt : std::optional<std::uint64_t>(r.seed));
                    const EstimateReport rep =
                        localize(remove_multipath(frame), schedule, geometry, sc.system, sc.estimator, &cache);
                    r.estimate = rep.refined_position;
                    r.error_m = (rep.refined_position - ue).norm();
                    r.tau_hat = rep.tau_hat;
                    r.coarse = rep.coarse_position;
                    r.final_cost = rep.final_cost;
                    r.iterations = rep.iterations;
                    r.refined = rep.refined;
                    r.ok = std::isfinite(r.error_m);
                    if (!r.ok)
                        r.message = "non-finite estimate";
                }
                catch (const std::exception &e)
                {
                    r.message = e.what();
                }
            }
        }

        CampaignResult run_points(const Campaign &c, const std::vector<std::size_t> &point_indices)
        {
            c.check();
            const auto start = std::chrono::steady_clock::now();
            const RisGeometry geometry = c.scenario.geometry();
            const std::size_t profiles = std::size_t(c.profiles);
            const std::size_t noise = std::size_t(c.noise_realizations);

            CampaignResult result;
            result.trials.resize(point_indices.size() * profiles * noise);
            parallel_for(point_indices.size() * profiles, c.threads, [&](std::size_t item) {
                const std::size_t p = point_indices[item / profiles];
                run_profile(c, geometry, p, item % profiles, &result.trials[item * noise]);
            });

            result.points = aggregate(result.trials, c.points, c.scenario.ris_center, c.outlier_factor);
            for (const TrialRecord &r : result.trials)
                result.failures += r.ok ? 0 : 1;
            result.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return result;
        }
    }

    CampaignResult run_error_vs_distance(const Campaign &campaign)
    {
        std::vector<std::size_t> idx(campaign.points.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            idx[i] = i;
        return run_points(campaign, idx);
    }

    std::vector<double> empirical_cdf(const std::vector<double> &sorted)
    {
        std::vector<double> f(sorted.size());
        for (std::size_t i = 0; i < sorted.size(); ++i)
            f[i] = double(i + 1) / double(sorted.size());
        return f;
    }

    CdfResult run_cdf(const Campaign &campaign, std::size_t point)
    {
        if (point >= campaign.points.size())
            throw Error(ErrorCode::config, "CDF point index out of range");
        CdfResult out;
        out.campaign = run_points(campaign, {point});
        int ok = 0, outliers = 0;
        for (const TrialRecord &r : out.campaign.trials)
        {
            if (r.noise == 0 && !std::isnan(r.peb_m))
                out.pebs.push_back(r.peb_m);
            if (!r.ok)
                continue;
            ++ok;
            out.errors.push_back(r.error_m);
            if (r.error_m > campaign.outlier_factor * r.peb_m)
                ++outliers;
        }
        std::sort(out.errors.begin(), out.errors.end());
        std::sort(out.pebs.begin(), out.pebs.end());
        out.outlier_fraction = ok > 0 ? double(outliers) / ok : 0.0;
        return out;
    }

    // ---- PEB-only sweeps -----------------------------------------------------------------------

    PointBound bound_for_schedule(const Scenario &sc, const RisGeometry &geometry, const PhaseSchedule &schedule,
                                  const Vec3 &ue, double phase)
    {
        PointBound s;
        const Vec3 p_ur = ue - geometry.center;
        LosParameters los;
        los.rho = sc.fixed_gain ? *sc.fixed_gain : path_loss(geometry, p_ur, sc.system.wavelength());
        los.phi = phase;
        los.position = ue;
        const LosFimTerms terms =
            fim_los_closed_form(sc.system, geometry, schedule, los, SteeringModel::exact, CorrelationMode::factored);
        s.gain_sum = terms.G;
        try
        {
            s.bound = peb(efim_position(terms.fim));
        }
        catch (const Error &e)
        {
            if (e.code() != ErrorCode::degenerate_fim)
                throw;
            s.bound.peb = s.bound.condition_number = std::numeric_limits<double>::infinity();
            s.bound.ill_conditioned = true;
        }
        return s;
    }

    PointBound point_bound(const Scenario &scenario, const RisGeometry &geometry, const Vec3 &ue,
                           std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * pi)(rng);
        const PhaseSchedule schedule = draw_schedule(scenario, geometry, ue, combine_seed(seed, 1));
        return bound_for_schedule(scenario, geometry, schedule, ue, phase);
    }

    std::vector<PebVsMRow> run_peb_vs_m(const PebSweep &sweep)
    {
        sweep.scenario.check();
        if (sweep.sides.empty() || sweep.kinds.empty() || sweep.profiles < 1)
            throw Error(ErrorCode::config, "PEB sweep needs sides, codebooks and profiles");
        for (int s : sweep.sides)
            if (s < 1)
                throw Error(ErrorCode::config, "RIS sides must be >= 1");

        const std::size_t per_row = std::size_t(sweep.profiles);
        const std::size_t rows = sweep.sides.size() * sweep.kinds.size();
        std::vector<PointBound> samples(rows * per_row);
        parallel_for(samples.size(), sweep.threads, [&](std::size_t item) {
            const std::size_t row = item / per_row, p = item % per_row;
            Scenario sc = sweep.scenario;
            sc.side = sweep.sides[row / sweep.kinds.size()];
            sc.codebook.kind = sweep.kinds[row % sweep.kinds.size()];
            const RisGeometry geometry = sc.geometry();
            const std::uint64_t ps =
                profile_seed(combine_seed(sweep.master_seed, std::uint64_t(sc.codebook.kind)), row / sweep.kinds.size(), p);
            samples[item] = point_bound(sc, geometry, sweep.ue, ps);
        });

        std::vector<PebVsMRow> out(rows);
        for (std::size_t row = 0; row < rows; ++row)
        {
            PebVsMRow &r = out[row];
            r.side = sweep.sides[row / sweep.kinds.size()];
            r.elements = Eigen::Index(r.side) * r.side;
            r.kind = sweep.kinds[row % sweep.kinds.size()];
            r.profiles = sweep.profiles;
            double sum = 0.0, sum2 = 0.0, g = 0.0;
            for (std::size_t p = 0; p < per_row; ++p)
            {
                const PointBound &s = samples[row * per_row + p];
                sum += s.bound.peb;
                sum2 += s.bound.peb * s.bound.peb;
                g += s.gain_sum;
                r.ill_conditioned += s.bound.ill_conditioned ? 1 : 0;
            }
            r.peb_mean = sum / double(per_row);
            r.peb_rms = std::sqrt(sum2 / double(per_row));
            r.gain_sum = g / double(per_row);
        }
        return out;
    }

    double loglog_slope(const std::vector<PebVsMRow> &rows, CodebookKind kind)
    {
        std::vector<double> x, y;
        for (const PebVsMRow &r : rows)
            if (r.kind == kind && std::isfinite(r.peb_mean) && r.peb_mean > 0.0)
            {
                x.push_back(std::log(double(r.elements)));
                y.push_back(std::log(r.peb_mean));
            }
        if (x.size() < 2)
            throw Error(ErrorCode::invalid_argument, "slope needs at least two finite points");
        const double n = double(x.size());
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            mx += x[i] / n;
            my += y[i] / n;
        }
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
        }
        return sxy / sxx;
    }

    std::vector<HeatmapCell> run_heatmap(const HeatmapSpec &spec)
    {
        spec.scenario.check();
        if (spec.nx < 1 || spec.ny < 1 || spec.seeds < 1)
            throw Error(ErrorCode::config, "heatmap needs nx, ny and seeds >= 1");
        const RisGeometry geometry = spec.scenario.geometry();
        const bool shared_schedule = spec.scenario.codebook.kind == CodebookKind::random;
        const auto axis = [](double lo, double hi, int n, int i) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };

        std::vector<PhaseSchedule> shared;
        if (shared_schedule)
            for (int s = 0; s < spec.seeds; ++s)
                shared.push_back(draw_schedule(spec.scenario, geometry, Vec3::Zero(),
                                               combine_seed(profile_seed(spec.master_seed, 0, std::uint64_t(s)), 1)));

        std::vector<HeatmapCell> cells(std::size_t(spec.nx) * std::size_t(spec.ny));
        parallel_for(cells.size(), spec.threads, [&](std::size_t i) {
            HeatmapCell &c = cells[i];
            c.iy = int(i) / spec.nx;
            c.ix = int(i) % spec.nx;
            const double x = axis(spec.x_min, spec.x_max, spec.nx, c.ix);
            const double y = axis(spec.y_min, spec.y_max, spec.ny, c.iy);
            c.position = spec.scenario.ris_center + Vec3(x, y, y);
            const Vec3 p_ur = c.position - geometry.center;
            if (p_ur.dot(geometry.normal) < 0.0)
            {
                c.behind = true;
                return;
            }
            double sum_peb = 0.0, sum_cond = 0.0;
            for (int s = 0; s < spec.seeds; ++s)
            {
                const std::uint64_t ps = profile_seed(spec.master_seed, i, std::uint64_t(s));
                try
                {
                    const PhaseSchedule schedule =
                        shared_schedule ? shared[std::size_t(s)]
                                        : draw_schedule(spec.scenario, geometry, c.position, combine_seed(ps, 1));
                    const PointBound b = bound_for_schedule(spec.scenario, geometry, schedule, c.position, 0.0);
                    sum_peb += b.bound.peb;
                    sum_cond += b.bound.condition_number;
                }
                catch (const Error &)
                {
                    // on the RIS center or on-plane with a physical gain
                    sum_peb = sum_cond = std::numeric_limits<double>::infinity();
                }
            }
            c.peb = sum_peb / spec.seeds;
            c.condition_number = sum_cond / spec.seeds;
        });
        return cells;
    }

    double heatmap_symmetry_gap(const std::vector<HeatmapCell> &cells, int nx, int ny)
    {
        double total = 0.0;
        int pairs = 0;
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx - 1 - ix; ++ix)
            {
                const HeatmapCell &a = cells[std::size_t(iy * nx + ix)];
                const HeatmapCell &b = cells[std::size_t(iy * nx + (nx - 1 - ix))];
                if (a.behind || b.behind || !std::isfinite(a.peb) || !std::isfinite(b.peb))
                    continue;
                total += std::abs(a.peb - b.peb) / (0.5 * (a.peb + b.peb));
                ++pairs;
            }
        if (pairs == 0)
            throw Error(ErrorCode::invalid_argument, "no finite mirror pairs in the heatmap");
        return total / pairs;
    }

    // ---- artifacts -----------------------------------------------------------------------------

    namespace
    {
        std::ofstream open_csv(const std::filesystem::path &file)
        {
            if (file.has_parent_path())
                std::filesystem::create_directories(file.parent_path());
            std::ofstream out(file, std::ios::trunc);
            if (!out)
                throw Error(ErrorCode::io, "cannot write " + file.string());
            return out;
        }

        std::string num(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        std::string clean_message(std::string m)
        {
            for (char &ch : m)
                if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"')
                    ch = ';';
            return m;
        }
    }

    void write_trials_csv(const std::filesystem::path &file, const std::vector<TrialRecord> &trials)
    {
        std::ofstream out = open_csv(file);
        out << "point,profile,noise,seed,ue_x,ue_y,ue_z,est_x,est_y,est_z,error_m,peb_m,tau_hat_s,coarse_x,coarse_y,"
               "coarse_z,final_cost,iterations,"
               "refined,ok,message\n";
        for (const TrialRecord &r : trials)
        {
            out << r.point << ',' << r.profile << ',' << r.noise << ',' << r.seed;
            for (int i = 0; i < 3; ++i)
                out << ',' << num(r.ue[i]);
            for (int i = 0; i < 3; ++i)
                out << ',' << num(r.estimate[i]);
            out << ',' << num(r.error_m) << ',' << num(r.peb_m) << ',' << num(r.tau_hat);
            for (int i = 0; i < 3; ++i)
                out << ',' << num(r.coarse[i]);
            out << ',' << num(r.final_cost) << ',' << r.iterations << ','
                << int(r.refined) << ',' << int(r.ok) << ',' << clean_message(r.message) << '\n';
        }
    }

    std::vector<TrialRecord> read_trials_csv(const std::filesystem::path &file)
    {
        std::ifstream in(file);
        if (!in)
            throw Error(ErrorCode::io, "cannot read " + file.string());
        std::string line;
        std::getline(in, line); // header
        std::vector<TrialRecord> out;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                f.push_back(cell);
            if (f.size() == 20)
                f.emplace_back();
            if (f.size() != 21)
                throw Error(ErrorCode::io, "malformed trial record: " + line);
            TrialRecord r;
            r.point = std::stoi(f[0]);
            r.profile = std::stoi(f[1]);
            r.noise = std::stoi(f[2]);
            r.seed = std::stoull(f[3]);
            for (int i = 0; i < 3; ++i)
            {
                r.ue[i] = std::strtod(f[std::size_t(4 + i)].c_str(), nullptr);
                r.estimate[i] = std::strtod(f[std::size_t(7 + i)].c_str(), nullptr);
            }
            r.error_m = std::strtod(f[10].c_str(), nullptr);
            r.peb_m = std::strtod(f[11].c_str(), nullptr);
            r.tau_hat = std::strtod(f[12].c_str(), nullptr);
            for (int i = 0; i < 3; ++i)
                r.coarse[i] = std::strtod(f[std::size_t(13 + i)].c_str(), nullptr);
            r.final_cost = std::strtod(f[16].c_str(), nullptr);
            r.iterations = std::stoi(f[17]);
            r.refined = f[18] == "1";
            r.ok = f[19] == "1";
            r.message = f[20];
            out.push_back(std::move(r));
        }
        return out;
    }

    void write_points_csv(const std::filesystem::path &file, const std::vector<PointAggregate> &points)
    {
        std::ofstream out = open_csv(file);
        out << "point,ue_x,ue_y,ue_z,distance_m,trials,failures,outliers,rmse_m,peb_m,ratio\n";
        for (const PointAggregate &a : points)
            out << a.point << ',' << num(a.ue.x()) << ',' << num(a.ue.y()) << ',' << num(a.ue.z()) << ','
                << num(a.distance) << ',' << a.trials << ',' << a.failures << ',' << a.outliers << ',' << num(a.rmse)
                << ',' << num(a.peb_rms) << ',' << num(a.ratio) << '\n';
    }

    void write_cdf_csv(const std::filesystem::path &file, const CdfResult &cdf)
    {
        std::ofstream out = open_csv(file);
        out << "series,value_m,cdf\n";
        const auto fe = empirical_cdf(cdf.errors);
        for (std::size_t i = 0; i < fe.size(); ++i)
            out << "error," << num(cdf.errors[i]) << ',' << num(fe[i]) << '\n';
        const auto fp = empirical_cdf(cdf.pebs);
        for (std::size_t i = 0; i < fp.size(); ++i)
            out << "peb," << num(cdf.pebs[i]) << ',' << num(fp[i]) << '\n';
    }

    void write_peb_vs_m_csv(const std::filesystem::path &file, const std::vector<PebVsMRow> &rows)
    {
        std::ofstream out = open_csv(file);
        out << "side,M,codebook,peb_m,peb_rms_m,G,ill_conditioned,profiles\n";
        for (const PebVsMRow &r : rows)
            out << r.side << ',' << r.elements << ',' << codebook_kind_name(r.kind) << ',' << num(r.peb_mean) << ','
                << num(r.peb_rms) << ',' << num(r.gain_sum) << ',' << r.ill_conditioned << ',' << r.profiles << '\n';
    }

    void write_heatmap_csv(const std::filesystem::path &file, const std::vector<HeatmapCell> &cells)
    {
        std::ofstream out = open_csv(file);
        out << "x,y,z,peb_m,condition_number,status\n";
        for (const HeatmapCell &c : cells)
            out << num(c.position.x()) << ',' << num(c.position.y()) << ',' << num(c.position.z()) << ','
                << num(c.peb) << ',' << num(c.condition_number) << ',' << (c.behind ? "behind" : "ok") << '\n';
    }

    void write_heatmap_grid_csv(const std::filesystem::path &file, const std::vector<HeatmapCell> &cells, int nx,
                                int ny)
    {
        std::ofstream out = open_csv(file);
        for (int iy = 0; iy < ny; ++iy)
        {
            for (int ix = 0; ix < nx; ++ix)
            {
                const HeatmapCell &c = cells[std::size_t(iy * nx + ix)];
                if (ix > 0)
                    out << ',';
                if (!c.behind)
                    out << num(c.peb);
            }
            out << '\n';
        }
    }
}
