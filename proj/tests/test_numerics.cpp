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

#include <risce/numerics.hpp>

#include <random>

using namespace risce;

namespace {

ComplexMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64 &rng)
{
    std::normal_distribution<double> nd;
    ComplexMatrix a(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i)
            a(i, j) = cdouble(nd(rng), nd(rng));
    return a;
}

} // namespace

TEST_CASE("hadamard base cases", "[numerics]")
{
    CHECK(hadamard(1) == RealMatrix::Constant(1, 1, 1.0));
    RealMatrix h2(2, 2);
    h2 << 1, 1, 1, -1;
    CHECK(hadamard(2) == h2);
    const RealMatrix h4 = hadamard(4);
    CHECK(h4 * h4.transpose() == 4.0 * RealMatrix::Identity(4, 4));
}

TEST_CASE("hadamard orthogonality is exact up to 256", "[numerics]")
{
    for (std::size_t n = 1; n <= 256; n *= 2)
    {
        const RealMatrix h = hadamard(n);
        CHECK(h * h.transpose() == double(n) * RealMatrix::Identity(Eigen::Index(n), Eigen::Index(n)));
        CHECK((h.row(0).array() == 1.0).all());
        CHECK((h.col(0).array() == 1.0).all());
    }
}

TEST_CASE("hadamard rejects sizes that are not powers of two", "[numerics]")
{
    CHECK_THROWS_AS(hadamard(0), std::invalid_argument);
    CHECK_THROWS_AS(hadamard(3), std::invalid_argument);
    CHECK_THROWS_AS(hadamard(12), std::invalid_argument);
    CHECK_THROWS_AS(unitary_hadamard(6), std::invalid_argument);
}

TEST_CASE("unitary hadamard", "[numerics]")
{
    const ComplexMatrix p2 = unitary_hadamard(2);
    CHECK((p2.cwiseAbs().array() - 1.0 / std::sqrt(2.0)).abs().maxCoeff() < 1e-15);

    const ComplexMatrix p4 = unitary_hadamard(4);
    CHECK((p4 * p4.adjoint() - ComplexMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);

    // Independent SVD of the constructed matrix.
    Eigen::JacobiSVD<ComplexMatrix> svd(unitary_hadamard(16));
    CHECK((svd.singularValues().array() - 1.0).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("condition number examples", "[numerics]")
{
    for (Eigen::Index n : {1, 3, 8})
        CHECK(condition_number(ComplexMatrix::Identity(n, n)).value() == Catch::Approx(1.0));

    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 1.0;
    CHECK(condition_number(d).value() == Catch::Approx(4.0));

    const ComplexMatrix ones = ComplexMatrix::Ones(2, 2);
    CHECK_FALSE(condition_number(ones).has_value());
    CHECK_FALSE(condition_number(ComplexMatrix::Zero(3, 3)).has_value());

    CHECK_THROWS_AS(condition_number(ComplexMatrix::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("condition number of a non-Hermitian matrix uses singular values", "[numerics]")
{
    ComplexMatrix a(2, 2);
    a << 0, 3, 0.5, 0; // singular values 3 and 0.5
    CHECK(condition_number(a).value() == Catch::Approx(6.0));
}

TEST_CASE("condition number properties", "[numerics]")
{
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep)
    {
        const ComplexMatrix a = random_matrix(12, 6, rng);
        const ComplexMatrix g = a.adjoint() * a;
        const double c = condition_number(g).value();
        CHECK(c >= 1.0);
        for (double scale : {1e-6, 0.3, 7.0, 1e5})
            CHECK(condition_number(scale * g).value() == Catch::Approx(c).epsilon(1e-9));
    }
}

TEST_CASE("ls_solve examples", "[numerics]")
{
    std::mt19937_64 rng(5);
    const ComplexVector v = random_matrix(5, 1, rng);
    const ComplexMatrix eye = ComplexMatrix::Identity(5, 5);
    CHECK((ls_solve(eye, v).value() - v).norm() <= 1e-15 * v.norm());
    CHECK((ls_solve(2.0 * eye, v).value() - v / 2.0).norm() <= 1e-15 * v.norm());

    // Known x, rhs built from it.
    const ComplexMatrix a = random_matrix(16, 8, rng);
    const ComplexMatrix g = a.adjoint() * a;
    const ComplexVector x = random_matrix(8, 1, rng);
    CHECK((ls_solve(g, g * x).value() - x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("ls_solve signals singular Gram matrices and checks shapes", "[numerics]")
{
    CHECK_FALSE(ls_solve(ComplexMatrix::Ones(2, 2), ComplexVector::Ones(2)).has_value());
    CHECK_THROWS_AS(ls_solve(ComplexMatrix::Identity(2, 3), ComplexVector::Ones(2)), std::invalid_argument);
    CHECK_THROWS_AS(ls_solve(ComplexMatrix::Identity(3, 3), ComplexVector::Ones(2)), std::invalid_argument);
}

TEST_CASE("ls_solve recovers x whenever the condition number is at most 1e6", "[numerics]")
{
    std::mt19937_64 rng(17);
    for (double target : {1.0, 1e2, 1e4, 1e6})
    {
        // G = U diag(s) U^H with prescribed spread of eigenvalues.
        const Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(10, 10, rng));
        const ComplexMatrix u = qr.householderQ();
        RealVector s = RealVector::LinSpaced(10, 0.0, std::log10(target));
        s = s.unaryExpr([](double e) { return std::pow(10.0, e); });
        const ComplexMatrix g = u * s.cast<cdouble>().asDiagonal() * u.adjoint();
        REQUIRE(condition_number(g).value() == Catch::Approx(target).epsilon(1e-6));
        const ComplexVector x = random_matrix(10, 1, rng);
        CHECK((ls_solve(g, g * x).value() - x).norm() <= 1e-9 * x.norm());
    }
}

TEST_CASE("solve_gram falls back to the minimum-norm solution", "[numerics]")
{
    ComplexMatrix g = ComplexMatrix::Zero(2, 2);
    g(0, 0) = 2.0;
    ComplexVector rhs(2);
    rhs << 4.0, 0.0;
    const auto sol = solve_gram(g, rhs);
    CHECK_FALSE(sol.condition.has_value());
    CHECK(std::abs(sol.x(0) - cdouble(2.0)) < 1e-12);
    CHECK(std::abs(sol.x(1)) < 1e-12);
}

TEST_CASE("require_finite rejects NaN and Inf", "[numerics]")
{
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    CHECK_NOTHROW(require_finite(a, "a"));
    a(1, 0) = cdouble(std::nan(""), 0.0);
    CHECK_THROWS_AS(require_finite(a, "a"), std::invalid_argument);
}
