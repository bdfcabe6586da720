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

#ifndef RISLOC_COMMON_HPP
#define RISLOC_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace risloc
{
    using cdouble = std::complex<double>;
    using Vec3 = Eigen::Vector3d;
    using Mat3 = Eigen::Matrix3d;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RVec = Eigen::VectorXd;
    using RMat = Eigen::MatrixXd;

    inline constexpr double speed_of_light = 3.0e8; // m/s, the value used throughout the simulations
    inline constexpr double pi = std::numbers::pi;
    inline constexpr cdouble j1{0.0, 1.0};

    enum class ErrorCode
    {
        invalid_argument,
        invalid_geometry,
        singular_position,
        shape,
        domain,
        degenerate_fim,
        no_signal,
        empty_shell,
        config,
        io,
    };

    const char *error_code_name(ErrorCode code) noexcept;

    // All library failures are reported through this exception type.
    class Error : public std::runtime_error
    {
    public:
        Error(ErrorCode code, const std::string &what)
            : std::runtime_error(what), code_(code) {}

        ErrorCode code() const noexcept { return code_; }

    private:
        ErrorCode code_;
    };

    inline cdouble unit_phasor(double phase) { return {std::cos(phase), std::sin(phase)}; }

    // Deterministic 64-bit mixing (splitmix64 finalizer), used for seed fan-out.
    constexpr std::uint64_t mix64(std::uint64_t x) noexcept
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value) noexcept
    {
        return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
    }
}

#endif
