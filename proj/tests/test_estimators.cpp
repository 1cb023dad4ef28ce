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

#include "catch_amalgamated.hpp"

#include <risce/estimators.hpp>

#include <numeric>

using namespace risce;

namespace {

ComplexMatrix gaussian(Eigen::Index r, Eigen::Index c, Rng &rng)
{
    ComplexMatrix a(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i)
            a(i, j) = circular_gaussian(rng, 1.0);
    return a;
}

Geometry small_geometry(std::size_t n, std::size_t rows, std::size_t cols)
{
    Geometry g;
    g.bs_array.elements = n;
    g.ris_array.rows = rows;
    g.ris_array.cols = cols;
    return g;
}

// Rows of all F diag(psi_t), stacked slot by slot.
ComplexMatrix stacked_sensing(const ComplexMatrix &f, const ComplexMatrix &psi)
{
    ComplexMatrix s(f.rows() * psi.cols(), f.cols());
    for (Eigen::Index t = 0; t < psi.cols(); ++t)
        s.middleRows(t * f.rows(), f.rows()) = f * psi.col(t).asDiagonal();
    return s;
}

Partition shuffled(std::size_t m, std::size_t q, Rng &rng)
{
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::vector<std::size_t>> g(q);
    for (std::size_t i = 0; i < m; ++i)
        g[i / (m / q)].push_back(idx[i]);
    return Partition(g, m);
}

Estimate run_piecewise(const ChannelRealization &ch, std::size_t q, std::size_t b, const Partition &p, double noise_var,
                       Rng &rng)
{
    const PhaseSchedule s = build_schedule(std::size_t(ch.user_ris.size()), q, b, p);
    return piecewise_ls(ch.ris_bs, s, decouple(simulate_pilot_rx(ch, s, 1.0, noise_var, rng), s));
}

} // namespace

TEST_CASE("conv_2tce exact on an orthonormal-column channel", "[estimators]")
{
    Rng rng(1);
    const Eigen::HouseholderQR<ComplexMatrix> qr(gaussian(8, 4, rng));
    const ComplexMatrix f = ComplexMatrix(qr.householderQ()).leftCols(4);
    const ComplexVector h = gaussian(4, 1, rng);
    const ComplexMatrix psi = random_phase_schedule(4, 1, rng); // T = M / N rounded up
    const ComplexMatrix y = simulate_rx(f, h, psi, 1.0, 0.0, rng);
    const Estimate e = conv_2tce(f, psi, y);
    CHECK_FALSE(e.flagged);
    CHECK((e.h_hat - h).norm() <= 1e-10 * h.norm());
    CHECK(e.method == "conv2tce");
    CHECK(e.seconds >= 0.0);
}

TEST_CASE("conv_2tce returns zero for zero observations", "[estimators]")
{
    Rng rng(2);
    const ComplexMatrix f = gaussian(4, 8, rng);
    const ComplexMatrix psi = random_phase_schedule(8, 3, rng);
    const Estimate e = conv_2tce(f, psi, ComplexMatrix::Zero(4, 3));
    CHECK_FALSE(e.flagged);
    CHECK(e.h_hat.norm() == 0.0);
}

TEST_CASE("conv_2tce matches the pseudoinverse of the stacked system", "[estimators]")
{
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep)
    {
        const ComplexMatrix f = gaussian(4, 8, rng);
        const ComplexVector h = gaussian(8, 1, rng);
        const ComplexMatrix psi = random_phase_schedule(8, 2, rng);
        const ComplexMatrix y = simulate_rx(f, h, psi, 1.0, 0.1, rng);
        const ComplexMatrix s = stacked_sensing(f, psi);
        const ComplexVector oracle = s.completeOrthogonalDecomposition().pseudoInverse() * ComplexVector(y.reshaped());
        const Estimate e = conv_2tce(f, psi, y);
        CHECK((e.h_hat - oracle).norm() <= 1e-9 * oracle.norm());
    }
}

TEST_CASE("conv_2tce flags an underdetermined system and still returns the minimum-norm fit", "[estimators]")
{
    Rng rng(4);
    const ComplexMatrix f = gaussian(4, 16, rng);
    const ComplexVector h = gaussian(16, 1, rng);
    const ComplexMatrix psi = random_phase_schedule(16, 2, rng); // 8 equations, 16 unknowns
    const ComplexMatrix y = simulate_rx(f, h, psi, 1.0, 0.0, rng);
    const Estimate e = conv_2tce(f, psi, y);
    CHECK(e.flagged);
    CHECK(std::isinf(e.worst_condition()));
    const ComplexMatrix s = stacked_sensing(f, psi);
    const ComplexVector oracle = s.completeOrthogonalDecomposition().pseudoInverse() * ComplexVector(y.reshaped());
    CHECK((e.h_hat - oracle).norm() <= 1e-8 * oracle.norm());
}

TEST_CASE("piecewise LS noiseless recovery", "[estimators]")
{
    const Geometry geo = small_geometry(16, 4, 8);
    Rng rng(5);
    const auto ch = draw_channel(geo, 16, 16, rng);
    const Estimate e = run_piecewise(ch, 4, 8, contiguous_partition(32, 4), 0.0, rng);
    CHECK_FALSE(e.flagged);
    CHECK(e.conditions.size() == 4);
    CHECK(nmse(e.h_hat, ch.user_ris) <= 1e-10);

    const PhaseSchedule s = build_schedule(32, 4, 8, contiguous_partition(32, 4));
    const auto zero = std::vector<ComplexMatrix>(8, ComplexMatrix::Zero(16, 4));
    CHECK(piecewise_ls(ch.ris_bs, s, zero).h_hat.norm() == 0.0);
}

TEST_CASE("piecewise LS with one group equals full LS on the same Hadamard schedule", "[estimators]")
{
    Rng rng(6);
    for (std::size_t b : {4, 8, 32})
    {
        const ComplexMatrix f = gaussian(16, 32, rng);
        const ComplexVector h = gaussian(32, 1, rng);
        const PhaseSchedule s = build_schedule(32, 1, b, contiguous_partition(32, 1));
        const ComplexMatrix y = simulate_rx(f, h, s.reflections, 1.0, 0.05, rng);
        PilotObservation obs;
        for (std::size_t sb = 0; sb < b; ++sb)
            obs.subframes.push_back(y.col(Eigen::Index(sb)));
        const Estimate pw = piecewise_ls(f, s, decouple(obs, s));
        const Estimate full = conv_2tce(f, s.reflections, y);
        REQUIRE_FALSE(pw.flagged);
        CHECK((pw.h_hat - full.h_hat).norm() <= 1e-9 * full.h_hat.norm());
    }
}

TEST_CASE("piecewise LS solutions are partition invariant without noise", "[estimators]")
{
    const Geometry geo = small_geometry(16, 4, 8);
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep)
    {
        const auto ch = draw_channel(geo, 16, 16, rng);
        const Estimate a = run_piecewise(ch, 4, 4, contiguous_partition(32, 4), 0.0, rng);
        const Estimate b = run_piecewise(ch, 4, 4, shuffled(32, 4, rng), 0.0, rng);
        if (a.flagged || b.flagged)
            continue;
        CHECK((a.h_hat - b.h_hat).norm() <= 1e-9 * a.h_hat.norm());
    }
}

TEST_CASE("LS estimators recover h exactly when noiseless and well conditioned", "[estimators]")
{
    Rng rng(8);
    for (int rep = 0; rep < 10; ++rep)
    {
        const ComplexMatrix f = gaussian(8, 16, rng);
        const ComplexVector h = gaussian(16, 1, rng);
        const ComplexMatrix psi = random_phase_schedule(16, 4, rng);
        const Estimate c = conv_2tce(f, psi, simulate_rx(f, h, psi, 1.0, 0.0, rng));
        if (c.worst_condition() <= 1e6)
            CHECK(nmse(c.h_hat, h) <= 1e-10);

        const PhaseSchedule s = build_schedule(16, 4, 4, shuffled(16, 4, rng));
        const Estimate p = piecewise_ls(f, s, decouple(simulate_pilot_rx(f, h, s, 1.0, 0.0, rng), s));
        if (p.worst_condition() <= 1e6)
            CHECK(nmse(p.h_hat, h) <= 1e-10);
    }
}

TEST_CASE("angular dictionary", "[estimators]")
{
    const PlanarArraySpec ris{4, 4, 0.5};
    const ComplexMatrix d = angular_dictionary(ris, 0.02);
    CHECK(d.rows() == 16);
    CHECK(d.cols() == 32);
    CHECK((d.colwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("OMP recovers a one-sparse channel", "[estimators]")
{
    Rng rng(9);
    const ComplexMatrix d = angular_dictionary(PlanarArraySpec{4, 4, 0.5}, 0.02);
    const ComplexVector h = cdouble(3.0, -1.0) * d.col(5);
    const ComplexMatrix f = gaussian(8, 16, rng);
    const ComplexMatrix psi = random_phase_schedule(16, 4, rng);
    const Estimate e = omp_estimate(f, psi, simulate_rx(f, h, psi, 1.0, 0.0, rng), d, 1);
    CHECK(nmse(e.h_hat, h) <= 1e-10);
    CHECK(e.method == "omp");
}

TEST_CASE("OMP recovers a two-sparse channel from Gaussian sensing", "[estimators]")
{
    Rng rng(10);
    const ComplexMatrix d = angular_dictionary(PlanarArraySpec{4, 4, 0.5}, 0.02);
    const ComplexVector h = cdouble(1.0, 0.5) * d.col(3) + cdouble(-0.7, 0.2) * d.col(20);
    // 8x oversampled: 128 measurements for 16 unknowns.
    const ComplexMatrix f = gaussian(32, 16, rng);
    ComplexMatrix psi = gaussian(16, 4, rng);
    const Estimate e = omp_estimate(f, psi, simulate_rx(f, h, psi, 1.0, 0.0, rng), d, 2);
    CHECK(nmse(e.h_hat, h) <= 1e-10);
}

TEST_CASE("OMP argument checks", "[estimators]")
{
    Rng rng(11);
    const ComplexMatrix d = angular_dictionary(PlanarArraySpec{2, 2, 0.5}, 0.02);
    const ComplexMatrix f = gaussian(2, 4, rng);
    const ComplexMatrix psi = random_phase_schedule(4, 1, rng);
    const ComplexMatrix y = ComplexMatrix::Zero(2, 1);
    CHECK_THROWS_AS(omp_estimate(f, psi, y, d, 0), std::invalid_argument);
    CHECK_THROWS_AS(omp_estimate(f, psi, y, d, 3), std::invalid_argument);
}

TEST_CASE("nmse", "[estimators]")
{
    Rng rng(12);
    const ComplexVector h = gaussian(6, 1, rng);
    CHECK(nmse(h, h) == 0.0);
    CHECK(nmse(ComplexVector::Zero(6), h) == Catch::Approx(1.0));
    CHECK(nmse(2.0 * h, h) == Catch::Approx(1.0));
    const ComplexVector g = h + 0.1 * gaussian(6, 1, rng);
    const cdouble rot = std::polar(1.0, 0.7);
    CHECK(nmse(rot * g, rot * h) == Catch::Approx(nmse(g, h)).epsilon(1e-12));
    CHECK_THROWS_AS(nmse(ComplexVector::Zero(6), ComplexVector::Zero(6)), std::invalid_argument);
    CHECK_THROWS_AS(nmse(h, ComplexVector::Zero(5)), std::invalid_argument);
}

TEST_CASE("channel estimate perturbation", "[estimators]")
{
    Rng rng(13);
    const ComplexMatrix f = gaussian(8, 16, rng);
    CHECK(perturb_channel_estimate(f, 0.0, rng) == f);
    const ComplexMatrix g = perturb_channel_estimate(f, 0.1, rng);
    CHECK((g - f).norm() == Catch::Approx(0.1 * f.norm()).epsilon(1e-12));
    CHECK_THROWS_AS(perturb_channel_estimate(f, -1.0, rng), std::invalid_argument);
}
