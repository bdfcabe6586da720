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

#include "risloc/codebook.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace risloc
{
    const char *codebook_kind_name(CodebookKind kind) noexcept
    {
        switch (kind)
        {
        case CodebookKind::random: return "random";
        case CodebookKind::directional: return "directional";
        case CodebookKind::custom: return "custom";
        }
        return "unknown";
    }

    CodebookKind parse_codebook_kind(const std::string &name)
    {
        if (name == "random")
            return CodebookKind::random;
        if (name == "directional")
            return CodebookKind::directional;
        throw Error(ErrorCode::config, "unknown codebook '" + name + "' (expected random or directional)");
    }

    std::uint64_t PhaseSchedule::id() const
    {
        std::uint64_t h = combine_seed(seed, std::uint64_t(kind));
        h = combine_seed(h, std::uint64_t(base.rows()));
        h = combine_seed(h, std::uint64_t(base.cols()));
        // sample a handful of entries so distinct contents give distinct ids
        const Eigen::Index n = base.size();
        for (Eigen::Index i = 0; i < n; i += std::max<Eigen::Index>(1, n / 16))
        {
            std::uint64_t bits;
            const double re = base.data()[i].real();
            std::memcpy(&bits, &re, sizeof bits);
            h = combine_seed(h, bits);
        }
        return h;
    }

    CMat expand_alternating(const CMat &base)
    {
        CMat expanded(base.rows(), 2 * base.cols());
        for (Eigen::Index t = 0; t < base.cols(); ++t)
        {
            expanded.col(2 * t) = base.col(t);
            expanded.col(2 * t + 1) = -base.col(t);
        }
        return expanded;
    }

    PhaseSchedule custom_schedule(const CMat &expanded)
    {
        PhaseSchedule s;
        s.kind = CodebookKind::custom;
        s.expanded = expanded;
        s.base.resize(expanded.rows(), expanded.cols() / 2);
        for (Eigen::Index t = 0; t < s.base.cols(); ++t)
            s.base.col(t) = expanded.col(2 * t);
        return s;
    }

    PhaseSchedule random_codebook(Eigen::Index m, Eigen::Index half_t, std::uint64_t seed)
    {
        if (m < 1 || half_t < 1)
            throw Error(ErrorCode::invalid_argument, "codebook dimensions must be positive");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
        PhaseSchedule s;
        s.kind = CodebookKind::random;
        s.seed = seed;
        s.base.resize(m, half_t);
        for (Eigen::Index t = 0; t < half_t; ++t)
            for (Eigen::Index i = 0; i < m; ++i)
                s.base(i, t) = unit_phasor(phase(rng));
        s.expanded = expand_alternating(s.base);
        return s;
    }

    Vec3 sample_in_ball(std::mt19937_64 &rng, const Vec3 &center, double radius)
    {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        Vec3 dir;
        do
        {
            dir = Vec3(gauss(rng), gauss(rng), gauss(rng));
        } while (dir.squaredNorm() < 1e-24);
        dir.normalize();
        return center + radius * std::cbrt(uni(rng)) * dir;
    }

    PhaseSchedule directional_codebook(const RisGeometry &geometry, const Vec3 &prior_center, double radius,
                                       Eigen::Index half_t, double wavelength, std::uint64_t seed)
    {
        if (radius < 0.0)
            throw Error(ErrorCode::invalid_argument, "uncertainty radius must be non-negative");
        if (half_t < 1)
            throw Error(ErrorCode::invalid_argument, "codebook dimensions must be positive");
        if ((prior_center - geometry.center).dot(geometry.normal) < 0.0)
            throw Error(ErrorCode::domain, "directional prior lies behind the RIS");

        std::mt19937_64 rng(seed);
        PhaseSchedule s;
        s.kind = CodebookKind::directional;
        s.seed = seed;
        s.prior_center = prior_center;
        s.uncertainty_radius = radius;
        s.base.resize(geometry.element_count(), half_t);
        s.aim_points.reserve(half_t);
        for (Eigen::Index t = 0; t < half_t; ++t)
        {
            const Vec3 aim = sample_in_ball(rng, prior_center, radius);
            s.aim_points.push_back(aim);
            s.base.col(t) = round_trip_response(geometry, aim - geometry.center, wavelength).conjugate();
        }
        s.expanded = expand_alternating(s.base);
        return s;
    }

    CleanedFrame remove_multipath(const ReceivedFrame &frame)
    {
        const Eigen::Index t_count = frame.samples.cols();
        if (t_count % 2 != 0 || t_count == 0)
            throw Error(ErrorCode::shape, "multipath removal needs an even, non-zero number of transmissions");
        CleanedFrame out;
        out.y_tilde.resize(frame.samples.rows(), t_count / 2);
        for (Eigen::Index t = 0; t < t_count / 2; ++t)
            out.y_tilde.col(t) = 0.5 * (frame.samples.col(2 * t) - frame.samples.col(2 * t + 1));
        out.noise_variance = frame.noise_variance / 2.0;
        return out;
    }

    // ---- cache ---------------------------------------------------------------------------------

    namespace
    {
        constexpr std::array<char, 8> magic = {'R', 'I', 'S', 'L', 'O', 'C', 'S', 'B'};
        constexpr std::uint32_t format_version = 1;

        template <typename T>
        void put(std::ofstream &out, const T &v) { out.write(reinterpret_cast<const char *>(&v), sizeof(T)); }

        template <typename T>
        T get(std::ifstream &in)
        {
            T v{};
            in.read(reinterpret_cast<char *>(&v), sizeof(T));
            if (!in)
                throw Error(ErrorCode::io, "truncated schedule cache file");
            return v;
        }
    }

    void save_schedule(const PhaseSchedule &schedule, std::uint64_t geometry_hash, const std::filesystem::path &file)
    {
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::io, "cannot write schedule cache " + file.string());
        out.write(magic.data(), magic.size());
        put(out, format_version);
        put(out, std::uint32_t(schedule.kind));
        put(out, schedule.seed);
        put(out, std::uint64_t(schedule.base.rows()));
        put(out, std::uint64_t(schedule.base.cols()));
        put(out, geometry_hash);
        put(out, schedule.uncertainty_radius);
        for (int i = 0; i < 3; ++i)
            put(out, schedule.prior_center[i]);
        put(out, std::uint64_t(schedule.aim_points.size()));
        for (const Vec3 &p : schedule.aim_points)
            for (int i = 0; i < 3; ++i)
                put(out, p[i]);
        out.write(reinterpret_cast<const char *>(schedule.base.data()),
                  std::streamsize(sizeof(cdouble) * schedule.base.size()));
        if (!out)
            throw Error(ErrorCode::io, "failed writing schedule cache " + file.string());
    }

    CachedSchedule load_schedule(const std::filesystem::path &file)
    {
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw Error(ErrorCode::io, "cannot open schedule cache " + file.string());
        std::array<char, 8> head{};
        in.read(head.data(), head.size());
        if (!in || head != magic)
            throw Error(ErrorCode::io, "not a schedule cache file: " + file.string());
        if (get<std::uint32_t>(in) != format_version)
            throw Error(ErrorCode::io, "unsupported schedule cache version");

        CachedSchedule c;
        PhaseSchedule &s = c.schedule;
        const auto kind = get<std::uint32_t>(in);
        if (kind > std::uint32_t(CodebookKind::custom))
            throw Error(ErrorCode::io, "corrupt schedule cache kind");
        s.kind = CodebookKind(kind);
        s.seed = get<std::uint64_t>(in);
        const auto m = get<std::uint64_t>(in);
        const auto half_t = get<std::uint64_t>(in);
        c.geometry_hash = get<std::uint64_t>(in);
        s.uncertainty_radius = get<double>(in);
        for (int i = 0; i < 3; ++i)
            s.prior_center[i] = get<double>(in);
        const auto aims = get<std::uint64_t>(in);
        if (aims > half_t || m > (1ULL << 32) || half_t > (1ULL << 32))
            throw Error(ErrorCode::io, "corrupt schedule cache header");
        for (std::uint64_t a = 0; a < aims; ++a)
        {
            Vec3 p;
            for (int i = 0; i < 3; ++i)
                p[i] = get<double>(in);
            s.aim_points.push_back(p);
        }
        s.base.resize(Eigen::Index(m), Eigen::Index(half_t));
        in.read(reinterpret_cast<char *>(s.base.data()), std::streamsize(sizeof(cdouble) * s.base.size()));
        if (!in)
            throw Error(ErrorCode::io, "truncated schedule cache file");
        s.expanded = expand_alternating(s.base);
        return c;
    }

    std::string schedule_cache_name(CodebookKind kind, std::uint64_t seed, Eigen::Index m, Eigen::Index t,
                                    std::uint64_t geometry_hash)
    {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s-%016llx-M%lld-T%lld-g%016llx.rsb", codebook_kind_name(kind),
                      static_cast<unsigned long long>(seed), static_cast<long long>(m), static_cast<long long>(t),
                      static_cast<unsigned long long>(geometry_hash));
        return buf;
    }
}
