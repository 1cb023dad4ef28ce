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

#ifndef risce_numerics_H
#define risce_numerics_H

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace risce {

using cdouble = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// A Gram matrix whose smallest singular value falls below this fraction of
// the largest one is reported as singular.
inline constexpr double rank_threshold = 1e-12;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived> &a, const std::string &what)
{
    if (!a.allFinite())
        throw std::invalid_argument(what + " contains NaN or Inf entries.");
}

// Sylvester construction, H(i,j) = (-1)^popcount(i & j). Row and column 0 are all +1.
inline RealMatrix hadamard(std::size_t n)
{
    if (!is_power_of_two(n))
        throw std::invalid_argument("Hadamard order must be a power of 2, got " + std::to_string(n) + ".");

    RealMatrix h(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            h(Eigen::Index(i), Eigen::Index(j)) = (std::popcount(i & j) & 1U) ? -1.0 : 1.0;
    return h;
}

// hadamard(n) / sqrt(n), so that U * U^H = I.
inline ComplexMatrix unitary_hadamard(std::size_t n)
{
    return hadamard(n).cast<cdouble>() / std::sqrt(double(n));
}

namespace detail {

inline bool is_hermitian(const ComplexMatrix &g)
{
    const double scale = g.cwiseAbs().maxCoeff();
    return (g - g.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * (scale > 0.0 ? scale : 1.0);
}

// Singular values in ascending order. Hermitian input goes through the
// (much cheaper) eigen solver, where singular values are |eigenvalues|.
inline RealVector singular_values_ascending(const ComplexMatrix &g)
{
    RealVector s;
    if (is_hermitian(g))
    {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g, Eigen::EigenvaluesOnly);
        s = es.eigenvalues().cwiseAbs();
    }
    else
    {
        Eigen::BDCSVD<ComplexMatrix> svd(g);
        s = svd.singularValues();
    }
    std::sort(s.data(), s.data() + s.size());
    return s;
}

} // namespace detail

/// Condition number sigma_max / sigma_min of a square matrix.
/// Returns std::nullopt ("singular") when sigma_min < rank_threshold * sigma_max,
/// which includes the all-zero matrix.
inline std::optional<double> condition_number(const ComplexMatrix &g)
{
    if (g.rows() != g.cols())
        throw std::invalid_argument("condition_number: matrix must be square.");
    if (g.size() == 0)
        throw std::invalid_argument("condition_number: empty matrix.");

    const RealVector s = detail::singular_values_ascending(g);
    const double smax = s(s.size() - 1), smin = s(0);
    if (!(smax > 0.0) || smin < rank_threshold * smax)
        return std::nullopt;
    return smax / smin;
}

/// Minimum-norm least-squares solution, valid for rank-deficient systems.
inline ComplexVector min_norm_solve(const ComplexMatrix &a, const ComplexVector &rhs)
{
    if (rhs.size() != a.rows())
        throw std::invalid_argument("min_norm_solve: right-hand side length does not match the row count.");
    Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod;
    cod.setThreshold(rank_threshold);
    cod.compute(a);
    return cod.solve(rhs);
}

// Cholesky, falling back to column-pivoted QR when the factorization breaks down.
inline ComplexVector gram_solve_unchecked(const ComplexMatrix &gram, const ComplexVector &rhs)
{
    Eigen::LLT<ComplexMatrix> llt(gram);
    if (llt.info() == Eigen::Success)
        return llt.solve(rhs);
    return gram.colPivHouseholderQr().solve(rhs);
}

/// Solves gram * x = rhs for a Hermitian positive semidefinite Gram matrix.
/// Cholesky first, column-pivoted QR when the factorization breaks down.
/// Returns std::nullopt when the Gram matrix fails the rank threshold.
inline std::optional<ComplexVector> ls_solve(const ComplexMatrix &gram, const ComplexVector &rhs)
{
    if (gram.rows() != gram.cols())
        throw std::invalid_argument("ls_solve: Gram matrix must be square.");
    if (rhs.size() != gram.rows())
        throw std::invalid_argument("ls_solve: right-hand side length does not match the Gram dimension.");

    if (!condition_number(gram))
        return std::nullopt;
    return gram_solve_unchecked(gram, rhs);
}

/// Result of a Gram solve that never refuses: rank-deficient systems fall back to the
/// minimum-norm solution and are marked singular.
struct GramSolution
{
    ComplexVector x;
    std::optional<double> condition; // nullopt: singular, x is the minimum-norm solution
};

inline GramSolution solve_gram(const ComplexMatrix &gram, const ComplexVector &rhs)
{
    if (gram.rows() != gram.cols() || rhs.size() != gram.rows())
        throw std::invalid_argument("solve_gram: dimension mismatch.");
    GramSolution out;
    out.condition = condition_number(gram);
    out.x = out.condition ? gram_solve_unchecked(gram, rhs) : min_norm_solve(gram, rhs);
    return out;
}

} // namespace risce

#endif
