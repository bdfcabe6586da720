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

#ifndef RISLOC_CODEBOOK_HPP
#define RISLOC_CODEBOOK_HPP

#include "risloc/geometry.hpp"
#include "risloc/schedule.hpp"
#include "risloc/signal_model.hpp"

#include <filesystem>
#include <optional>
#include <random>

namespace risloc
{
    /// I.i.d. phases uniform on [0, 2 pi).
    PhaseSchedule random_codebook(Eigen::Index m, Eigen::Index half_t, std::uint64_t seed);

    /// Conjugate round-trip responses toward half_t aim points drawn
    /// uniformly in the ball S(prior_center, radius).
    PhaseSchedule directional_codebook(const RisGeometry &geometry, const Vec3 &prior_center, double radius,
                                       Eigen::Index half_t, double wavelength, std::uint64_t seed);

    /// Volume-uniform point in S(center, radius): radius * U^(1/3) along a uniform direction.
    Vec3 sample_in_ball(std::mt19937_64 &rng, const Vec3 &center, double radius);

    struct CleanedFrame
    {
        CMat y_tilde;                // N x T/2
        double noise_variance = 0.0; // per-sample variance of the residual noise
    };

    /// Halved difference of each +/- transmission pair; cancels every
    /// profile-independent term (uncontrolled multipath).
    CleanedFrame remove_multipath(const ReceivedFrame &frame);

    // ---- schedule cache ------------------------------------------------------------------------
    //
    // Binary container, host byte order (little-endian on all supported targets):
    //   char[8]  magic "RISLOCSB"
    //   u32      format version (1)
    //   u32      kind
    //   u64      seed, M, T/2, geometry hash
    //   f64      uncertainty radius, prior center (3)
    //   u64      aim point count, then f64 x 3 per aim point
    //   f64      base matrix, column-major, (re, im) interleaved
    void save_schedule(const PhaseSchedule &schedule, std::uint64_t geometry_hash, const std::filesystem::path &file);

    struct CachedSchedule
    {
        PhaseSchedule schedule;
        std::uint64_t geometry_hash = 0;
    };
    CachedSchedule load_schedule(const std::filesystem::path &file);

    std::string schedule_cache_name(CodebookKind kind, std::uint64_t seed, Eigen::Index m, Eigen::Index t,
                                    std::uint64_t geometry_hash);
}

#endif
