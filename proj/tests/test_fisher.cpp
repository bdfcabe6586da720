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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace risloc;

namespace
{
    struct Setup
    {
        SystemConfig cfg;
        RisGeometry geometry;
        PhaseSchedule schedule;
        ParameterVector params;
        std::vector<Vec3> elements;
    };

    Setup make_setup(std::uint64_t seed, int side, int n, int t, int nlos)
    {
        std::mt19937_64 rng(seed);
        Setup s;
        s.cfg.subcarriers = n;
        s.cfg.transmissions = t;
        const double lambda = s.cfg.wavelength();
        s.geometry = build_geometry(Vec3::Zero(), Mat3::Identity(), side, lambda / 4, lambda);
        s.elements = oracle::element_positions(Vec3::Zero(), Mat3::Identity(), side, lambda / 4);
        s.schedule = random_codebook(s.geometry.element_count(), t / 2, seed);
        const Vec3 ue = oracle::front_point(rng, 1.0, 10.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        s.params.los.rho = path_loss(s.geometry, ue, lambda);
        s.params.los.phi = 2 * pi * u(rng);
        s.params.los.position = ue;
        for (int l = 0; l < nlos; ++l)
            s.params.nlos.push_back({s.params.los.rho * (0.5 + u(rng)) * side, 2 * pi * u(rng), 20e-9 + 200e-9 * u(rng)});
        return s;
    }
}

TEST_CASE("parameter vector flattening round-trips")
{
    ParameterVector p;
    p.los = {1.5, 0.2, Vec3(1, 2, 3)};
    p.nlos = {{0.1, 0.2, 3e-8}, {0.4, 0.5, 6e-8}};
    const RVec eta = p.flatten();
    CHECK(eta.size() == 11);
    const ParameterVector q = ParameterVector::unflatten(eta);
    CHECK(q.flatten() == eta);
    CHECK_THROWS_AS(ParameterVector::unflatten(RVec::Zero(7)), Error);
}

TEST_CASE("analytic mean Jacobian matches central differences of the oracle mean")
{
    for (std::uint64_t seed = 1; seed <= 4; ++seed)
    {
        const Setup s = make_setup(seed, 6, 16, 6, 2);
        const RVec eta = s.params.flatten();
        const auto jac = mean_jacobian(s.cfg, s.geometry, s.schedule, s.params);
        const auto fd = oracle::fd_jacobian(s.cfg, s.elements, Vec3::Zero(), s.schedule.expanded, eta);
        REQUIRE(jac.size() == fd.size());
        for (std::size_t t = 0; t < jac.size(); ++t)
            for (Eigen::Index i = 0; i < eta.size(); ++i)
                CHECK((jac[t].col(i) - fd[t].col(i)).norm() <= 1e-5 * fd[t].col(i).norm() + 1e-30);
    }
}

TEST_CASE("generic FIM equals the finite-difference FIM and is symmetric PSD")
{
    for (std::uint64_t seed = 10; seed < 14; ++seed)
    {
        const Setup s = make_setup(seed, 5, 12, 8, 1);
        const RMat j = fim(s.cfg, s.geometry, s.schedule, s.params);
        const RMat ref = oracle::fd_fim(s.cfg, s.elements, Vec3::Zero(), s.schedule.expanded, s.params.flatten());
        CHECK(oracle::relative_frobenius(oracle::equilibrate(j), oracle::equilibrate(ref)) < 1e-5);
        CHECK((j - j.transpose()).norm() == 0.0);
        Eigen::SelfAdjointEigenSolver<RMat> eig(oracle::equilibrate(j));
        CHECK(eig.eigenvalues().minCoeff() > -1e-10);
    }
}

TEST_CASE("closed-form LOS block equals the generic FIM in both correlation modes")
{
    for (std::uint64_t seed = 20; seed < 26; ++seed)
    {
        const Setup s = make_setup(seed, 8, 24, 10, 0);
        const RMat j = fim(s.cfg, s.geometry, s.schedule, s.params);
        for (CorrelationMode mode : {CorrelationMode::explicit_matrix, CorrelationMode::factored})
        {
            const LosFimTerms t = fim_los_closed_form(s.cfg, s.geometry, s.schedule, s.params.los,
                                                      SteeringModel::exact, mode);
            CHECK(oracle::relative_frobenius(oracle::equilibrate(t.fim), oracle::equilibrate(j)) < 1e-10);
            CHECK(t.G == doctest::Approx((round_trip_response(s.geometry, s.params.los.position, s.cfg.wavelength())
                                              .transpose() * s.schedule.expanded).squaredNorm()));
        }
        const LosFimTerms a = fim_los_closed_form(s.cfg, s.geometry, s.schedule, s.params.los, SteeringModel::exact,
                                                  CorrelationMode::explicit_matrix);
        CHECK(a.C.rows() == 64);
        CHECK((a.C - a.C.adjoint()).norm() < 1e-12 * a.C.norm());
    }
}

TEST_CASE("direct EFIM expression equals the Schur complement")
{
    for (std::uint64_t seed = 30; seed < 36; ++seed)
    {
        const Setup s = make_setup(seed, 8, 32, 12, 0);
        const LosFimTerms t = fim_los_closed_form(s.cfg, s.geometry, s.schedule, s.params.los);
        const Mat3 schur = efim_position(t.fim);
        const Mat3 direct = efim_closed_form(s.cfg, t, s.params.los);
        CHECK((schur - direct).norm() < 1e-8 * schur.norm());
        CHECK((schur - oracle::schur_position(t.fim)).norm() < 1e-6 * schur.norm());
    }
}

TEST_CASE("zero-sum schedules decouple LOS and NLOS unknowns")
{
    const Setup s = make_setup(40, 6, 32, 10, 3);
    const RMat j = fim(s.cfg, s.geometry, s.schedule, s.params);
    CHECK(j.block(0, 5, 5, 9).cwiseAbs().maxCoeff() < 1e-9 * j.norm());
    // with the couplings gone, the full-FIM EFIM equals the LOS-only one
    const LosFimTerms t = fim_los_closed_form(s.cfg, s.geometry, s.schedule, s.params.los);
    CHECK((efim_position(j) - efim_position(t.fim)).norm() < 1e-6 * efim_position(t.fim).norm());

    Setup u = s;
    std::mt19937_64 rng(1);
    u.schedule = custom_schedule(oracle::random_phases(rng, 36, 10));
    const RMat ju = fim(u.cfg, u.geometry, u.schedule, u.params);
    CHECK(ju.block(0, 5, 5, 9).cwiseAbs().maxCoeff() > 1e-3 * ju.norm());
}

TEST_CASE("PEB scales with the inverse square root of transmit power")
{
    Setup s = make_setup(50, 10, 64, 16, 0);
    const double p0 = position_bound(s.cfg, s.geometry, s.schedule, s.params.los).peb;
    s.cfg.tx_power_dbm += 20.0 * std::log10(2.0);
    const double p1 = position_bound(s.cfg, s.geometry, s.schedule, s.params.los).peb;
    CHECK(p1 / p0 == doctest::Approx(0.5).epsilon(1e-9));
    s.cfg.tx_power_dbm += 20.0;
    CHECK(position_bound(s.cfg, s.geometry, s.schedule, s.params.los).peb / p1 == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("PEB of a diagonal EFIM and conditioning flags")
{
    Mat3 j = Vec3(4.0, 1.0, 0.25).asDiagonal();
    PebResult r = peb(j);
    CHECK(r.peb == doctest::Approx(std::sqrt(0.25 + 1.0 + 4.0)));
    CHECK(r.condition_number == doctest::Approx(16.0));
    CHECK_FALSE(r.ill_conditioned);
    j(2, 2) = 1e-9;
    r = peb(j);
    CHECK(r.ill_conditioned);
    CHECK(std::isfinite(r.peb));
    j(2, 2) = 1e-13;
    r = peb(j);
    CHECK(r.ill_conditioned);
    CHECK(std::isinf(r.peb));
    j(2, 2) = 0.0;
    CHECK(std::isinf(peb(j).condition_number));
}

TEST_CASE("zero gain gives a degenerate FIM")
{
    Setup s = make_setup(60, 4, 16, 4, 0);
    s.params.los.rho = 0.0;
    const LosFimTerms t = fim_los_closed_form(s.cfg, s.geometry, s.schedule, s.params.los);
    try
    {
        efim_position(t.fim);
        FAIL("no error");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::degenerate_fim);
    }
    CHECK(std::isinf(position_bound(s.cfg, s.geometry, s.schedule, s.params.los).peb));
    CHECK_THROWS_AS(efim_position(RMat::Identity(4, 4)), Error);
}

TEST_CASE("UE in the surface plane is ill-conditioned")
{
    Setup s = make_setup(70, 10, 64, 16, 0);
    s.params.los.position = Vec3(3.0, 4.0, 0.0);
    s.params.los.rho = 1e-6; // fixed gain; the physical one vanishes here
    const PebResult r = position_bound(s.cfg, s.geometry, s.schedule, s.params.los);
    CHECK(r.ill_conditioned);
    CHECK(r.condition_number > 1e8);
}

TEST_CASE("far-field FIM approaches the exact one at long range")
{
    Setup s = make_setup(80, 6, 32, 8, 0);
    s.params.los.position = 300.0 * Vec3(0.2, 0.3, 0.9).normalized();
    s.params.los.rho = 1e-9;
    const RMat a = fim_los_closed_form(s.cfg, s.geometry, s.schedule, s.params.los, SteeringModel::exact).fim;
    const RMat b = fim_los_closed_form(s.cfg, s.geometry, s.schedule, s.params.los, SteeringModel::far_field).fim;
    CHECK(oracle::relative_frobenius(oracle::equilibrate(b), oracle::equilibrate(a)) < 1e-2);
}

TEST_CASE("full report is consistent with the fast path")
{
    const Setup s = make_setup(90, 8, 32, 12, 2);
    const FimReport rep = fim_report(s.cfg, s.geometry, s.schedule, s.params);
    CHECK(rep.fim.rows() == 11);
    const PebResult fast = position_bound(s.cfg, s.geometry, s.schedule, s.params.los);
    CHECK(rep.peb == doctest::Approx(fast.peb).epsilon(1e-6));
    CHECK(rep.peb > 0.0);
    CHECK(rep.los_terms.fim.rows() == 5);
}
