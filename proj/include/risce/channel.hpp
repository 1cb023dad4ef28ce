// SPDX-License-Identifier: Apache-2.0
//
// risce: conditioning-aware channel estimation for RIS-assisted MIMO links
// Copyright (C) 2026 The risce authors
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

#ifndef risce_channel_H
#define risce_channel_H

#include "numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace risce {

using Point3 = Eigen::Vector3d;
using Rng = std::mt19937_64;

inline constexpr double speed_of_light = 299792458.0;

// Uniform linear array along the y axis, broadside toward the user region.
struct LinearArraySpec
{
    std::size_t elements = 64;
    double spacing_wl = 0.5; // element spacing in wavelengths
};

// Uniform planar array in the horizontal (x-y) plane; columns run along x, rows along y.
// Element indices follow a Z-order (Morton) curve with the row bit least significant, so
// every aligned run of 4^k consecutive indices is a compact 2^k x 2^k sub-array.
struct PlanarArraySpec
{
    std::size_t rows = 16;
    std::size_t cols = 16;
    double spacing_wl = 0.5;

    std::size_t elements() const { return rows * cols; }
};

struct Geometry
{
    Point3 bs_position{0.0, 0.0, 0.0};
    Point3 ris_position{0.0, 20.0, 10.0};
    Point3 user_region_center{40.0, 20.0, 0.0};
    double user_region_radius = 15.0;  // meters
    double carrier_frequency = 15.0e9; // Hz
    LinearArraySpec bs_array{};
    PlanarArraySpec ris_array{};

    // Scatterers are drawn uniformly in the axis-aligned box spanned by the two link
    // endpoints, widened by this margin on every side, and kept at least guard_radius
    // away from both endpoints.
    double scatterer_margin = 1.0; // meters
    double guard_radius = 1.0;     // meters

    // Rician K-factor of an optional line-of-sight term in the RIS-BS channel; 0 disables it.
    double ris_bs_los_k_factor = 0.0;

    double wavelength() const { return speed_of_light / carrier_frequency; }

    void validate() const
    {
        if (!(carrier_frequency > 0.0) || !std::isfinite(carrier_frequency))
            throw std::invalid_argument("carrier_frequency must be positive.");
        if (bs_array.elements < 1 || ris_array.rows < 1 || ris_array.cols < 1)
            throw std::invalid_argument("array element counts must be at least 1.");
        if (!(bs_array.spacing_wl > 0.0) || !(ris_array.spacing_wl > 0.0))
            throw std::invalid_argument("array spacings must be positive.");
        if (!(user_region_radius >= 0.0))
            throw std::invalid_argument("user_region_radius must be non-negative.");
        if (!(scatterer_margin >= 0.0) || !(guard_radius >= 0.0))
            throw std::invalid_argument("scatterer_margin and guard_radius must be non-negative.");
        if (!(ris_bs_los_k_factor >= 0.0))
            throw std::invalid_argument("ris_bs_los_k_factor must be non-negative.");
        require_finite(bs_position, "bs_position");
        require_finite(ris_position, "ris_position");
        require_finite(user_region_center, "user_region_center");
    }
};

struct ScattererSet
{
    std::vector<Point3> positions;
    std::vector<cdouble> gains;
};

struct ChannelRealization
{
    ComplexMatrix ris_bs;  // F, N x M
    ComplexVector user_ris; // h, length M
    Point3 user_position;
    ScattererSet scatterers_rb;
    ScattererSet scatterers_ur;
};

// ---- Array layout -------------------------------------------------------

inline std::vector<Point3> element_positions(const LinearArraySpec &spec, const Point3 &origin, double wavelength)
{
    if (spec.elements < 1 || !(spec.spacing_wl > 0.0) || !(wavelength > 0.0))
        throw std::invalid_argument("element_positions: invalid linear array spec.");

    const double d = spec.spacing_wl * wavelength;
    const double mid = 0.5 * double(spec.elements - 1);
    std::vector<Point3> out;
    out.reserve(spec.elements);
    for (std::size_t n = 0; n < spec.elements; ++n)
        out.push_back(origin + Point3(0.0, (double(n) - mid) * d, 0.0));
    return out;
}

namespace detail {

inline std::uint64_t morton_key(std::uint32_t row, std::uint32_t col)
{
    std::uint64_t key = 0;
    for (unsigned bit = 0; bit < 32; ++bit)
    {
        key |= std::uint64_t((row >> bit) & 1U) << (2 * bit);
        key |= std::uint64_t((col >> bit) & 1U) << (2 * bit + 1);
    }
    return key;
}

} // namespace detail

inline std::vector<Point3> element_positions(const PlanarArraySpec &spec, const Point3 &origin, double wavelength)
{
    if (spec.rows < 1 || spec.cols < 1 || !(spec.spacing_wl > 0.0) || !(wavelength > 0.0))
        throw std::invalid_argument("element_positions: invalid planar array spec.");

    struct Cell
    {
        std::uint64_t key;
        std::size_t row, col;
    };
    std::vector<Cell> cells;
    cells.reserve(spec.elements());
    for (std::size_t r = 0; r < spec.rows; ++r)
        for (std::size_t c = 0; c < spec.cols; ++c)
            cells.push_back({detail::morton_key(std::uint32_t(r), std::uint32_t(c)), r, c});
    std::sort(cells.begin(), cells.end(), [](const Cell &a, const Cell &b) { return a.key < b.key; });

    const double d = spec.spacing_wl * wavelength;
    const double row_mid = 0.5 * double(spec.rows - 1), col_mid = 0.5 * double(spec.cols - 1);
    std::vector<Point3> out;
    out.reserve(cells.size());
    for (const auto &cell : cells)
        out.push_back(origin + Point3((double(cell.col) - col_mid) * d, (double(cell.row) - row_mid) * d, 0.0));
    return out;
}

// ---- Steering vectors ---------------------------------------------------

/// Spherical-wavefront response: entry n = exp(-j 2 pi |source - p_n| / lambda).
inline ComplexVector near_field_steering(const std::vector<Point3> &elements, const Point3 &source, double wavelength)
{
    if (!(wavelength > 0.0))
        throw std::invalid_argument("near_field_steering: wavelength must be positive.");

    ComplexVector a(Eigen::Index(elements.size()));
    const double k = 2.0 * std::numbers::pi / wavelength;
    for (std::size_t n = 0; n < elements.size(); ++n)
    {
        const double dist = (source - elements[n]).norm();
        if (dist <= 1e-12)
            throw std::invalid_argument("near_field_steering: source coincides with array element " + std::to_string(n) + ".");
        const double phase = -k * std::fmod(dist, wavelength);
        a(Eigen::Index(n)) = cdouble(std::cos(phase), std::sin(phase));
    }
    return a;
}

// ---- Random draws ---------------------------------------------------------

inline cdouble circular_gaussian(Rng &rng, double variance)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * variance));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

/// Uniform over the horizontal disk of user_region_radius about user_region_center.
inline Point3 sample_user_position(const Geometry &geo, Rng &rng)
{
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const double r = geo.user_region_radius * std::sqrt(ud(rng));
    const double theta = 2.0 * std::numbers::pi * ud(rng);
    return geo.user_region_center + Point3(r * std::cos(theta), r * std::sin(theta), 0.0);
}

namespace detail {

inline std::vector<Point3> sample_scatterers(const Geometry &geo, const Point3 &a, const Point3 &b, std::size_t count, Rng &rng)
{
    const Point3 lo = a.cwiseMin(b) - Point3::Constant(geo.scatterer_margin);
    const Point3 hi = a.cwiseMax(b) + Point3::Constant(geo.scatterer_margin);
    std::uniform_real_distribution<double> ud(0.0, 1.0);

    std::vector<Point3> out;
    out.reserve(count);
    for (std::size_t attempts = 0; out.size() < count; ++attempts)
    {
        if (attempts > 1000 * (count + 1))
            throw std::runtime_error("scatterer placement: guard regions cover the sampling box.");
        Point3 p;
        for (int i = 0; i < 3; ++i)
            p(i) = lo(i) + (hi(i) - lo(i)) * ud(rng);
        if ((p - a).norm() > geo.guard_radius && (p - b).norm() > geo.guard_radius)
            out.push_back(p);
    }
    return out;
}

} // namespace detail

/// RIS-BS channel F = sum_l g_l a_BS(s_l) a_RIS(s_l)^H with g_l ~ CN(0, 1/L), so E||F||_F^2 = N M.
inline std::pair<ComplexMatrix, ScattererSet> gen_ris_bs_channel(const Geometry &geo, std::size_t num_paths, Rng &rng)
{
    if (num_paths < 1)
        throw std::invalid_argument("gen_ris_bs_channel: at least one scatterer required.");
    geo.validate();

    const double lambda = geo.wavelength();
    const auto bs = element_positions(geo.bs_array, geo.bs_position, lambda);
    const auto ris = element_positions(geo.ris_array, geo.ris_position, lambda);

    ScattererSet sc;
    sc.positions = detail::sample_scatterers(geo, geo.bs_position, geo.ris_position, num_paths, rng);

    const double k = geo.ris_bs_los_k_factor;
    const double nlos_scale = std::sqrt(1.0 / (k + 1.0));

    ComplexMatrix f = ComplexMatrix::Zero(Eigen::Index(bs.size()), Eigen::Index(ris.size()));
    for (const auto &s : sc.positions)
    {
        const cdouble g = circular_gaussian(rng, 1.0 / double(num_paths));
        sc.gains.push_back(g);
        f.noalias() += (g * nlos_scale) * near_field_steering(bs, s, lambda) * near_field_steering(ris, s, lambda).adjoint();
    }

    if (k > 0.0)
    {
        const double los_scale = std::sqrt(k / (k + 1.0));
        const double wn = 2.0 * std::numbers::pi / lambda;
        for (std::size_t m = 0; m < ris.size(); ++m)
            for (std::size_t n = 0; n < bs.size(); ++n)
            {
                const double phase = -wn * std::fmod((bs[n] - ris[m]).norm(), lambda);
                f(Eigen::Index(n), Eigen::Index(m)) += los_scale * cdouble(std::cos(phase), std::sin(phase));
            }
    }
    return {std::move(f), std::move(sc)};
}

/// User-RIS channel h = sum_l g_l a_RIS(s_l) with g_l ~ CN(0, 1/L), so E||h||^2 = M.
inline std::pair<ComplexVector, ScattererSet> gen_user_ris_channel(const Geometry &geo, const Point3 &user_position,
                                                                   std::size_t num_paths, Rng &rng)
{
    if (num_paths < 1)
        throw std::invalid_argument("gen_user_ris_channel: at least one scatterer required.");
    geo.validate();
    if ((user_position - geo.user_region_center).head<2>().norm() > geo.user_region_radius + 1e-9)
        throw std::invalid_argument("gen_user_ris_channel: user position outside the user region.");

    const double lambda = geo.wavelength();
    const auto ris = element_positions(geo.ris_array, geo.ris_position, lambda);

    ScattererSet sc;
    sc.positions = detail::sample_scatterers(geo, geo.ris_position, user_position, num_paths, rng);

    ComplexVector h = ComplexVector::Zero(Eigen::Index(ris.size()));
    for (const auto &s : sc.positions)
    {
        const cdouble g = circular_gaussian(rng, 1.0 / double(num_paths));
        sc.gains.push_back(g);
        h.noalias() += g * near_field_steering(ris, s, lambda);
    }
    return {std::move(h), std::move(sc)};
}

/// One full draw: user position, then F, then h.
inline ChannelRealization draw_channel(const Geometry &geo, std::size_t paths_rb, std::size_t paths_ur, Rng &rng)
{
    ChannelRealization ch;
    ch.user_position = sample_user_position(geo, rng);
    std::tie(ch.ris_bs, ch.scatterers_rb) = gen_ris_bs_channel(geo, paths_rb, rng);
    std::tie(ch.user_ris, ch.scatterers_ur) = gen_user_ris_channel(geo, ch.user_position, paths_ur, rng);
    return ch;
}

} // namespace risce

#endif
