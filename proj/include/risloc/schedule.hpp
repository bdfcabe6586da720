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

#ifndef RISLOC_SCHEDULE_HPP
#define RISLOC_SCHEDULE_HPP

#include "risloc/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace risloc
{
    enum class CodebookKind : std::uint32_t
    {
        random = 0,
        directional = 1,
        custom = 2, // externally supplied profiles; not necessarily zero-sum
    };

    const char *codebook_kind_name(CodebookKind kind) noexcept;
    CodebookKind parse_codebook_kind(const std::string &name);

    // RIS phase profiles over one block of T transmissions.
    //
    // `base` holds the T/2 designed profiles; `expanded` interleaves them with
    // their negatives: column 2k is base(k), column 2k+1 is -base(k).
    struct PhaseSchedule
    {
        CMat base;     // M x T/2
        CMat expanded; // M x T
        CodebookKind kind = CodebookKind::random;
        std::uint64_t seed = 0;

        // directional metadata
        Vec3 prior_center = Vec3::Zero();
        double uncertainty_radius = 0.0;
        std::vector<Vec3> aim_points;

        Eigen::Index element_count() const { return expanded.rows(); }
        Eigen::Index transmissions() const { return expanded.cols(); }
        std::uint64_t id() const; // digest of kind, seed and contents
    };

    /// Interleaved +/- expansion of a base codebook.
    CMat expand_alternating(const CMat &base);

    /// Wrap an arbitrary M x T profile matrix (no zero-sum guarantee).
    PhaseSchedule custom_schedule(const CMat &expanded);
}

#endif
