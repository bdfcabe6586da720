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

#ifndef RISLOC_GEOMETRY_HPP
#define RISLOC_GEOMETRY_HPP

#include "risloc/common.hpp"

#include <cstdint>

namespace risloc
{
    // Square RIS laid out on a centered lattice in its local x-y plane.
    // Element (i,k) has index m = i*side + k and local offset
    // ((i - (side-1)/2) d, (k - (side-1)/2) d, 0).
    struct RisGeometry
    {
        Vec3 center = Vec3::Zero();        // p_r
        Mat3 orientation = Mat3::Identity(); // R, columns are the local axes
        int elements_per_side = 1;
        double spacing = 0.0;               // meters
        Eigen::Matrix3Xd element_positions; // absolute, 3 x M
        Eigen::Matrix3Xd relative_positions; // p_{r,m} - p_r, 3 x M
        Vec3 normal = Vec3::UnitZ();
        bool grating_lobe_warning = false;  // spacing > wavelength / 4

        Eigen::Index element_count() const { return relative_positions.cols(); }
        double aperture() const { return elements_per_side * spacing; }

        // Stable fingerprint of the construction inputs, used as a cache key.
        std::uint64_t hash() const;
    };

    RisGeometry build_geometry(const Vec3 &center, const Mat3 &orientation, int side,
                               double spacing, double wavelength);

    // Rotation from z-y-x intrinsic Euler angles (yaw, pitch, roll), radians.
    Mat3 rotation_from_euler(double yaw, double pitch, double roll);

    // Position-dependent RIS response and its spatial derivative.
    struct SteeringSet
    {
        CVec a;    // RIS response, M entries
        CVec b;    // a .* a
        CMat b_dot; // M x 3, d b / d p_u
        Vec3 u_ur = Vec3::UnitZ();
        double range = 0.0;
    };

    /// Exact (spherical-wavefront) response for the UE at p_ur = p_u - p_r.
    SteeringSet ris_response(const RisGeometry &geometry, const Vec3 &p_ur, double wavelength);

    /// Only b(p_ur); the hot path of grid searches.
    CVec round_trip_response(const RisGeometry &geometry, const Vec3 &p_ur, double wavelength);

    /// Plane-wave approximation for direction u_ur at the given range.
    SteeringSet far_field_response(const RisGeometry &geometry, const Vec3 &u_ur, double wavelength,
                                   double range);
}

#endif
