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

#include "risloc/geometry.hpp"

#include <cmath>
#include <cstring>

namespace risloc
{
    const char *error_code_name(ErrorCode code) noexcept
    {
        switch (code)
        {
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::invalid_geometry: return "invalid-geometry";
        case ErrorCode::singular_position: return "singular-position";
        case ErrorCode::shape: return "shape";
        case ErrorCode::domain: return "domain";
        case ErrorCode::degenerate_fim: return "degenerate-fim";
        case ErrorCode::no_signal: return "no-signal";
        case ErrorCode::empty_shell: return "empty-shell";
        case ErrorCode::config: return "config";
        case ErrorCode::io: return "io";
        }
        return "unknown";
    }

    namespace
    {
        std::uint64_t fnv1a(std::uint64_t h, const void *data, std::size_t n)
        {
            const auto *p = static_cast<const unsigned char *>(data);
            for (std::size_t i = 0; i < n; ++i)
            {
                h ^= p[i];
                h *= 0x100000001b3ULL;
            }
            return h;
        }

        // r - r_m computed without cancellation: (r^2 - r_m^2) / (r + r_m).
        inline double path_difference(const Vec3 &p, double r, const Eigen::Ref<const Vec3> &offset, double r_m)
        {
            return (2.0 * p.dot(offset) - offset.squaredNorm()) / (r + r_m);
        }
    }

    std::uint64_t RisGeometry::hash() const
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        h = fnv1a(h, center.data(), sizeof(double) * 3);
        h = fnv1a(h, orientation.data(), sizeof(double) * 9);
        h = fnv1a(h, &elements_per_side, sizeof(int));
        h = fnv1a(h, &spacing, sizeof(double));
        return h;
    }

    Mat3 rotation_from_euler(double yaw, double pitch, double roll)
    {
        return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                Eigen::AngleAxisd(roll, Vec3::UnitX()))
            .toRotationMatrix();
    }

    RisGeometry build_geometry(const Vec3 &center, const Mat3 &orientation, int side, double spacing,
                               double wavelength)
    {
        if (side < 1)
            throw Error(ErrorCode::invalid_argument, "RIS side must be >= 1");
        if (!(spacing > 0.0))
            throw Error(ErrorCode::invalid_argument, "RIS element spacing must be positive");
        if (!(wavelength > 0.0))
            throw Error(ErrorCode::invalid_argument, "wavelength must be positive");

        const double defect = (orientation.transpose() * orientation - Mat3::Identity()).cwiseAbs().maxCoeff();
        if (!(defect <= 1e-9) || orientation.determinant() < 0.0)
            throw Error(ErrorCode::invalid_geometry, "orientation is not a proper rotation matrix");

        RisGeometry g;
        g.center = center;
        g.orientation = orientation;
        g.elements_per_side = side;
        g.spacing = spacing;
        g.normal = orientation.col(2).normalized();
        g.grating_lobe_warning = spacing > wavelength / 4.0;

        const Eigen::Index m_count = Eigen::Index(side) * side;
        g.relative_positions.resize(3, m_count);
        const double half = 0.5 * (side - 1);
        for (int i = 0; i < side; ++i)
            for (int k = 0; k < side; ++k)
            {
                const Vec3 local((i - half) * spacing, (k - half) * spacing, 0.0);
                g.relative_positions.col(Eigen::Index(i) * side + k) = orientation * local;
            }
        g.element_positions = g.relative_positions.colwise() + center;
        return g;
    }

    CVec round_trip_response(const RisGeometry &geometry, const Vec3 &p_ur, double wavelength)
    {
        const double r = p_ur.norm();
        if (!(r > 0.0))
            throw Error(ErrorCode::singular_position, "UE coincides with the RIS center");
        const double k4 = 4.0 * pi / wavelength;
        const Eigen::Index m_count = geometry.element_count();
        CVec b(m_count);
        for (Eigen::Index m = 0; m < m_count; ++m)
        {
            const auto offset = geometry.relative_positions.col(m);
            const double r_m = (p_ur - offset).norm();
            b[m] = unit_phasor(k4 * path_difference(p_ur, r, offset, r_m));
        }
        return b;
    }

    SteeringSet ris_response(const RisGeometry &geometry, const Vec3 &p_ur, double wavelength)
    {
        const double r = p_ur.norm();
        if (!(r > 0.0))
            throw Error(ErrorCode::singular_position, "UE coincides with the RIS center");

        const double k2 = 2.0 * pi / wavelength;
        const Eigen::Index m_count = geometry.element_count();
        SteeringSet s;
        s.range = r;
        s.u_ur = p_ur / r;
        s.a.resize(m_count);
        s.b.resize(m_count);
        s.b_dot.resize(m_count, 3);

        const cdouble scale = -j1 * (2.0 * k2);
        for (Eigen::Index m = 0; m < m_count; ++m)
        {
            const auto offset = geometry.relative_positions.col(m);
            const Vec3 to_ue = p_ur - offset;
            const double r_m = to_ue.norm();
            const cdouble a = unit_phasor(k2 * path_difference(p_ur, r, offset, r_m));
            s.a[m] = a;
            s.b[m] = a * a;
            // row of -j(4 pi / lambda)(diag(b) K^T - b u_ur^T), K holding u_m = to_ue / r_m
            const Vec3 diff = to_ue / r_m - s.u_ur;
            const cdouble f = scale * s.b[m];
            s.b_dot(m, 0) = f * diff.x();
            s.b_dot(m, 1) = f * diff.y();
            s.b_dot(m, 2) = f * diff.z();
        }
        return s;
    }

    SteeringSet far_field_response(const RisGeometry &geometry, const Vec3 &u_ur, double wavelength, double range)
    {
        if (std::abs(u_ur.norm() - 1.0) > 1e-9)
            throw Error(ErrorCode::invalid_argument, "far-field direction must be a unit vector");
        if (!(range > 0.0))
            throw Error(ErrorCode::invalid_argument, "far-field range must be positive");

        const double k2 = 2.0 * pi / wavelength;
        const Eigen::Index m_count = geometry.element_count();
        SteeringSet s;
        s.range = range;
        s.u_ur = u_ur;
        s.a.resize(m_count);
        s.b.resize(m_count);
        for (Eigen::Index m = 0; m < m_count; ++m)
        {
            const cdouble a = unit_phasor(k2 * u_ur.dot(geometry.relative_positions.col(m)));
            s.a[m] = a;
            s.b[m] = a * a;
        }
        const Mat3 projector = Mat3::Identity() - u_ur * u_ur.transpose();
        const RMat projected = geometry.relative_positions.transpose() * projector; // M x 3
        s.b_dot = (j1 * (2.0 * k2 / range)) * (s.b.asDiagonal() * projected.cast<cdouble>());
        return s;
    }
}
