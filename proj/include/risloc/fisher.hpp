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

#ifndef RISLOC_FISHER_HPP
#define RISLOC_FISHER_HPP

#include "risloc/geometry.hpp"
#include "risloc/schedule.hpp"
#include "risloc/signal_model.hpp"

#include <vector>

namespace risloc
{
    // Unknowns, ordered [rho_0, phi_0, p_u (3), rho_1, phi_1, tau_1, ..., rho_L, phi_L, tau_L].
    struct LosParameters
    {
        double rho = 0.0;
        double phi = 0.0;
        Vec3 position = Vec3::Zero(); // absolute UE position p_u
    };

    struct NlosParameters
    {
        double rho = 0.0;
        double phi = 0.0;
        double tau = 0.0;
    };

    struct ParameterVector
    {
        LosParameters los;
        std::vector<NlosParameters> nlos;

        Eigen::Index size() const { return 5 + 3 * Eigen::Index(nlos.size()); }
        RVec flatten() const;
        static ParameterVector unflatten(const RVec &eta);
    };

    ParameterVector parameters_from_paths(const PathSet &paths, const Vec3 &ue_position);

    enum class SteeringModel
    {
        exact,
        far_field,
    };

    // Thresholds on the position EFIM condition number.
    inline constexpr double ill_conditioned_threshold = 1e8; // flag only
    inline constexpr double unusable_threshold = 1e12;       // PEB reported as infinity

    /// d mu_t / d eta for every transmission: T matrices of size N x (5 + 3L).
    /// mu_t excludes the sqrt(E_s) factor, which enters the FIM prefactor.
    std::vector<CMat> mean_jacobian(const SystemConfig &config, const RisGeometry &geometry,
                                    const PhaseSchedule &schedule, const ParameterVector &params,
                                    SteeringModel model = SteeringModel::exact);

    /// J(eta) = (2 E_s / sigma^2) Re{ sum_t (d mu_t/d eta)^H (d mu_t/d eta) }.
    RMat fim(const SystemConfig &config, const RisGeometry &geometry, const PhaseSchedule &schedule,
             const ParameterVector &params, SteeringModel model = SteeringModel::exact);

    enum class CorrelationMode
    {
        automatic, // explicit C while M <= explicit_correlation_limit
        explicit_matrix,
        factored,
    };
    inline constexpr Eigen::Index explicit_correlation_limit = 4096;

    // Closed-form pieces of the LOS block.
    struct LosFimTerms
    {
        RMat fim;                  // 5 x 5
        double G = 0.0;            // sum_t |b^T w_t|^2
        CMat C;                    // sum_t conj(w_t) w_t^T; empty in factored mode
        Eigen::RowVector3cd b_C_bdot; // b^H C Bdot
        Eigen::Matrix3cd bdot_C_bdot; // Bdot^H C Bdot
        Eigen::Vector3cd z;
        Eigen::Matrix3cd U;
        Mat3 H;
        double delay_information = 0.0; // coefficient of u u^T in the position EFIM
        Vec3 u_ur = Vec3::UnitZ();
        double range = 0.0;
    };

    LosFimTerms fim_los_closed_form(const SystemConfig &config, const RisGeometry &geometry,
                                    const PhaseSchedule &schedule, const LosParameters &los,
                                    SteeringModel model = SteeringModel::exact,
                                    CorrelationMode mode = CorrelationMode::automatic);

    /// Schur complement of a FIM (5 x 5 LOS block or full 5+3L) onto p_u.
    /// Throws Error(degenerate_fim) when the nuisance block is singular.
    Mat3 efim_position(const RMat &fim);

    /// Direct EFIM expression in terms of G, Bdot and C (used as a cross-check only).
    Mat3 efim_closed_form(const SystemConfig &config, const LosFimTerms &terms, const LosParameters &los);

    struct PebResult
    {
        double peb = 0.0;
        double condition_number = 0.0;
        bool ill_conditioned = false;
    };

    PebResult peb(const Mat3 &efim);

    struct FimReport
    {
        RMat fim;  // (5 + 3L) square
        Mat3 efim;
        double peb = 0.0;
        double condition_number = 0.0;
        bool ill_conditioned = false;
        LosFimTerms los_terms;
    };

    /// Full report: generic FIM over all unknowns, closed-form LOS pieces, EFIM and PEB.
    FimReport fim_report(const SystemConfig &config, const RisGeometry &geometry, const PhaseSchedule &schedule,
                         const ParameterVector &params, SteeringModel model = SteeringModel::exact);

    /// Fast path used by sweeps: closed-form LOS FIM, Schur complement, PEB.
    /// A singular nuisance block (e.g. zero gain) yields an infinite PEB.
    PebResult position_bound(const SystemConfig &config, const RisGeometry &geometry, const PhaseSchedule &schedule,
                             const LosParameters &los, SteeringModel model = SteeringModel::exact);
}

#endif
