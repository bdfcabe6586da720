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

#include "risloc/fisher.hpp"

#include <cmath>
#include <limits>

namespace risloc
{
    RVec ParameterVector::flatten() const
    {
        RVec eta(size());
        eta[0] = los.rho;
        eta[1] = los.phi;
        eta.segment<3>(2) = los.position;
        for (std::size_t l = 0; l < nlos.size(); ++l)
        {
            eta[5 + 3 * l] = nlos[l].rho;
            eta[6 + 3 * l] = nlos[l].phi;
            eta[7 + 3 * l] = nlos[l].tau;
        }
        return eta;
    }

    ParameterVector ParameterVector::unflatten(const RVec &eta)
    {
        if (eta.size() < 5 || (eta.size() - 5) % 3 != 0)
            throw Error(ErrorCode::shape, "parameter vector length must be 5 + 3L");
        ParameterVector p;
        p.los.rho = eta[0];
        p.los.phi = eta[1];
        p.los.position = eta.segment<3>(2);
        for (Eigen::Index i = 5; i < eta.size(); i += 3)
            p.nlos.push_back({eta[i], eta[i + 1], eta[i + 2]});
        return p;
    }

    ParameterVector parameters_from_paths(const PathSet &paths, const Vec3 &ue_position)
    {
        ParameterVector p;
        p.los.rho = std::abs(paths.los_gain);
        p.los.phi = std::arg(paths.los_gain);
        p.los.position = ue_position;
        for (const Path &path : paths.nlos)
            p.nlos.push_back({std::abs(path.gain), std::arg(path.gain), path.delay});
        return p;
    }

    namespace
    {
        SteeringSet steering(const RisGeometry &geometry, const Vec3 &p_ur, double wavelength, SteeringModel model)
        {
            if (model == SteeringModel::exact)
                return ris_response(geometry, p_ur, wavelength);
            const double r = p_ur.norm();
            if (!(r > 0.0))
                throw Error(ErrorCode::singular_position, "UE coincides with the RIS center");
            return far_field_response(geometry, p_ur / r, wavelength, r);
        }

        void check_schedule(const RisGeometry &geometry, const PhaseSchedule &schedule)
        {
            if (schedule.element_count() != geometry.element_count())
                throw Error(ErrorCode::shape, "schedule element count does not match the RIS");
        }
    }

    std::vector<CMat> mean_jacobian(const SystemConfig &config, const RisGeometry &geometry,
                                    const PhaseSchedule &schedule, const ParameterVector &params, SteeringModel model)
    {
        check_schedule(geometry, schedule);
        const int n = config.subcarriers;
        const double df = config.subcarrier_spacing_hz;
        const Vec3 p_ur = params.los.position - geometry.center;
        const SteeringSet st = steering(geometry, p_ur, config.wavelength(), model);
        const double tau0 = round_trip_delay(p_ur);
        const CVec d0 = delay_steering(tau0, n, df);
        const CVec d0_dot = delay_steering_derivative(tau0, n, df);

        const cdouble e_phi0 = unit_phasor(params.los.phi);
        const cdouble beta0 = params.los.rho * e_phi0;
        const Eigen::RowVectorXcd s = st.b.transpose() * schedule.expanded; // 1 x T
        const CMat g = schedule.expanded.transpose() * st.b_dot;           // T x 3

        std::vector<CVec> d_l, d_l_dot;
        std::vector<cdouble> beta_l, e_phi_l;
        for (const NlosParameters &q : params.nlos)
        {
            d_l.push_back(delay_steering(q.tau, n, df));
            d_l_dot.push_back(delay_steering_derivative(q.tau, n, df));
            e_phi_l.push_back(unit_phasor(q.phi));
            beta_l.push_back(q.rho * e_phi_l.back());
        }

        const Eigen::Index cols = params.size();
        std::vector<CMat> jac;
        jac.reserve(schedule.transmissions());
        for (Eigen::Index t = 0; t < schedule.transmissions(); ++t)
        {
            CMat jt(n, cols);
            jt.col(0) = (e_phi0 * s[t]) * d0;
            jt.col(1) = (j1 * beta0 * s[t]) * d0;
            const cdouble delay_coeff = beta0 * (2.0 / speed_of_light) * s[t];
            for (int k = 0; k < 3; ++k)
                jt.col(2 + k) = (delay_coeff * st.u_ur[k]) * d0_dot + (beta0 * g(t, k)) * d0;
            for (std::size_t l = 0; l < params.nlos.size(); ++l)
            {
                jt.col(5 + 3 * l) = e_phi_l[l] * d_l[l];
                jt.col(6 + 3 * l) = (j1 * beta_l[l]) * d_l[l];
                jt.col(7 + 3 * l) = beta_l[l] * d_l_dot[l];
            }
            jac.push_back(std::move(jt));
        }
        return jac;
    }

    RMat fim(const SystemConfig &config, const RisGeometry &geometry, const PhaseSchedule &schedule,
             const ParameterVector &params, SteeringModel model)
    {
        const auto jac = mean_jacobian(config, geometry, schedule, params, model);
        CMat acc = CMat::Zero(params.size(), params.size());
        for (const CMat &jt : jac)
            acc.noalias() += jt.adjoint() * jt;
        RMat j = config.snr_prefactor() * acc.real();
        return 0.5 * (j + j.transpose());
    }

    LosFimTerms fim_los_closed_form(const SystemConfig &config, const RisGeometry &geometry,
                                    const PhaseSchedule &schedule, const LosParameters &los, SteeringModel model,
                                    CorrelationMode mode)
    {
        check_schedule(geometry, schedule);
        const int n = config.subcarriers;
        const double c = speed_of_light;
        const double rho = los.rho;
        const Vec3 p_ur = los.position - geometry.center;
        const SteeringSet st = steering(geometry, p_ur, config.wavelength(), model);
        const double tau0 = round_trip_delay(p_ur);
        const CVec d = delay_steering(tau0, n, config.subcarrier_spacing_hz);
        const CVec d_dot = delay_steering_derivative(tau0, n, config.subcarrier_spacing_hz);
        const cdouble dh_ddot = d.dot(d_dot); // d^H d_dot
        const double ddot_sq = d_dot.squaredNorm();

        LosFimTerms out;
        out.u_ur = st.u_ur;
        out.range = st.range;
        const Eigen::RowVectorXcd s = st.b.transpose() * schedule.expanded;
        out.G = s.squaredNorm();

        const bool use_explicit = mode == CorrelationMode::explicit_matrix ||
                                  (mode == CorrelationMode::automatic &&
                                   geometry.element_count() <= explicit_correlation_limit);
        if (use_explicit)
        {
            out.C = schedule.expanded.conjugate() * schedule.expanded.transpose();
            out.b_C_bdot = st.b.adjoint() * out.C * st.b_dot;
            out.bdot_C_bdot = st.b_dot.adjoint() * out.C * st.b_dot;
        }
        else
        {
            // C = W^* W^T, so the quadratic forms reduce to the projections s_t and w_t^T Bdot.
            const CMat g = schedule.expanded.transpose() * st.b_dot; // T x 3
            out.b_C_bdot = s.conjugate() * g;
            out.bdot_C_bdot = g.adjoint() * g;
        }

        const Vec3 &u = st.u_ur;
        const Eigen::Vector3cd u_c = u.cast<cdouble>();
        // z^T = (2|beta|/c) G d^H d_dot u^T + N |beta| b^H C Bdot
        out.z = ((2.0 * rho / c) * out.G * dh_ddot) * u_c + (double(n) * rho) * out.b_C_bdot.transpose();
        // U = (d_dot^H d) u b^H C Bdot
        out.U = std::conj(dh_ddot) * (u_c * out.b_C_bdot);
        out.H = (4.0 * rho * rho / (c * c)) * out.G * ddot_sq * (u * u.transpose()) +
                (rho * rho * n) * out.bdot_C_bdot.real() + (2.0 * rho * rho / c) * (out.U + out.U.adjoint()).real();
        out.H = 0.5 * (out.H + out.H.transpose()).eval();

        RMat j = RMat::Zero(5, 5);
        j(0, 0) = n * out.G;
        j(1, 1) = n * rho * rho * out.G;
        j.block<1, 3>(0, 2) = out.z.real().transpose();
        j.block<3, 1>(2, 0) = out.z.real();
        j.block<1, 3>(1, 2) = rho * out.z.imag().transpose();
        j.block<3, 1>(2, 1) = rho * out.z.imag();
        j.block<3, 3>(2, 2) = out.H;
        out.fim = config.snr_prefactor() * j;

        out.delay_information = 8.0 * rho * rho * config.symbol_energy() * out.G /
                                (c * c * config.noise_variance()) * (ddot_sq - std::norm(dh_ddot) / n);
        return out;
    }

    Mat3 efim_position(const RMat &fim)
    {
        const Eigen::Index p = fim.rows();
        if (p != fim.cols() || p < 5)
            throw Error(ErrorCode::shape, "FIM must be square with at least 5 rows");

        std::vector<Eigen::Index> rest;
        for (Eigen::Index i = 0; i < p; ++i)
            if (i < 2 || i > 4)
                rest.push_back(i);
        const Eigen::Index q = Eigen::Index(rest.size());

        RMat nuisance(q, q), cross(3, q);
        for (Eigen::Index a = 0; a < q; ++a)
        {
            for (Eigen::Index b = 0; b < q; ++b)
                nuisance(a, b) = fim(rest[a], rest[b]);
            for (int k = 0; k < 3; ++k)
                cross(k, a) = fim(2 + k, rest[a]);
        }

        // Equilibrate before inverting: the gain, phase and delay entries differ by many decades.
        const RVec diag = nuisance.diagonal();
        if ((diag.array() <= 0.0).any() || !diag.allFinite())
            throw Error(ErrorCode::degenerate_fim, "nuisance block has a non-positive diagonal");
        const RVec scale = diag.cwiseSqrt().cwiseInverse();
        const RMat scaled = scale.asDiagonal() * nuisance * scale.asDiagonal();
        Eigen::SelfAdjointEigenSolver<RMat> eig(scaled);
        if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < 1e-12 * eig.eigenvalues().maxCoeff())
            throw Error(ErrorCode::degenerate_fim, "nuisance block of the FIM is singular");

        const RMat scaled_inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                                eig.eigenvectors().transpose();
        const RMat inv = scale.asDiagonal() * scaled_inv * scale.asDiagonal();
        Mat3 efim = fim.block<3, 3>(2, 2) - cross * inv * cross.transpose();
        return 0.5 * (efim + efim.transpose());
    }

    Mat3 efim_closed_form(const SystemConfig &config, const LosFimTerms &t, const LosParameters &los)
    {
        const double rho2 = los.rho * los.rho;
        const double n = config.subcarriers;
        const Vec3 &u = t.u_ur;
        // Bdot^H F b b^H F Bdot with F = C, where b^H C Bdot is stored.
        const Eigen::Matrix3cd outer = t.b_C_bdot.adjoint() * t.b_C_bdot;
        Mat3 angular = t.bdot_C_bdot.real() - outer.real() / t.G;
        Mat3 j = t.delay_information * (u * u.transpose()) + config.snr_prefactor() * rho2 * n * angular;
        return 0.5 * (j + j.transpose());
    }

    PebResult peb(const Mat3 &efim)
    {
        PebResult r;
        const Mat3 sym = 0.5 * (efim + efim.transpose());
        if (!sym.allFinite())
        {
            r.peb = std::numeric_limits<double>::infinity();
            r.condition_number = std::numeric_limits<double>::infinity();
            r.ill_conditioned = true;
            return r;
        }
        Eigen::SelfAdjointEigenSolver<Mat3> eig(sym);
        const Vec3 ev = eig.eigenvalues();
        const double lo = ev.minCoeff();
        const double hi = ev.maxCoeff();
        r.condition_number = (lo > 0.0 && hi > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
        r.ill_conditioned = r.condition_number > ill_conditioned_threshold;
        if (r.condition_number > unusable_threshold)
            r.peb = std::numeric_limits<double>::infinity();
        else
            r.peb = std::sqrt(ev.cwiseInverse().sum());
        return r;
    }

    FimReport fim_report(const SystemConfig &config, const RisGeometry &geometry, const PhaseSchedule &schedule,
                         const ParameterVector &params, SteeringModel model)
    {
        FimReport rep;
        rep.fim = fim(config, geometry, schedule, params, model);
        rep.los_terms = fim_los_closed_form(config, geometry, schedule, params.los, model);
        rep.efim = efim_position(rep.fim);
        const PebResult b = peb(rep.efim);
        rep.peb = b.peb;
        rep.condition_number = b.condition_number;
        rep.ill_conditioned = b.ill_conditioned;
        return rep;
    }

    PebResult position_bound(const SystemConfig &config, const RisGeometry &geometry, const PhaseSchedule &schedule,
                             const LosParameters &los, SteeringModel model)
    {
        const LosFimTerms terms = fim_los_closed_form(config, geometry, schedule, los, model, CorrelationMode::factored);
        try
        {
            return peb(efim_position(terms.fim));
        }
        catch (const Error &e)
        {
            if (e.code() != ErrorCode::degenerate_fim)
                throw;
            PebResult r;
            r.peb = std::numeric_limits<double>::infinity();
            r.condition_number = std::numeric_limits<double>::infinity();
            r.ill_conditioned = true;
            return r;
        }
    }
}
