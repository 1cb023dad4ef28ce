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

#ifndef risce_estimators_H
#define risce_estimators_H

#include "channel.hpp"
#include "grouping.hpp"
#include "numerics.hpp"
#include "phase.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace risce {

struct Estimate
{
    ComplexVector h_hat;
    std::string method;
    double seconds = 0.0;
    std::vector<std::optional<double>> conditions; // one per solved Gram matrix
    bool flagged = false;                          // a Gram matrix failed the rank test

    /// Largest condition number, +inf if any Gram was singular, nan if none was recorded.
    double worst_condition() const
    {
        if (conditions.empty())
            return std::numeric_limits<double>::quiet_NaN();
        double worst = 0.0;
        for (const auto &c : conditions)
            worst = std::max(worst, condition_or_inf(c));
        return worst;
    }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// sum_t diag(psi_t)^H F^H F diag(psi_t): entry (i,j) is K(i,j) sum_t conj(psi_t(i)) psi_t(j).
inline ComplexMatrix full_gram(const ComplexMatrix &f_hat, const ComplexMatrix &reflections)
{
    ComplexMatrix g = f_hat.adjoint() * f_hat;
    g.array() *= (reflections * reflections.adjoint()).conjugate().array();
    return g;
}

} // namespace detail

/// Full-dimension LS over all T slots. A Gram matrix that fails the rank test is solved
/// in the minimum-norm sense and the estimate is flagged.
inline Estimate conv_2tce(const ComplexMatrix &f_hat, const ComplexMatrix &reflections, const ComplexMatrix &y)
{
    if (reflections.rows() != f_hat.cols() || y.rows() != f_hat.rows() || y.cols() != reflections.cols())
        throw std::invalid_argument("conv_2tce: dimension mismatch between F, reflections and observations.");

    const auto start = detail::Clock::now();
    Estimate e;
    e.method = "conv2tce";
    const ComplexMatrix gram = detail::full_gram(f_hat, reflections);
    const ComplexVector rhs = ((f_hat.adjoint() * y).array() * reflections.conjugate().array()).rowwise().sum();
    auto sol = solve_gram(gram, rhs);
    e.conditions.push_back(sol.condition);
    e.flagged = !sol.condition;
    e.h_hat = std::move(sol.x);
    e.seconds = detail::seconds_since(start);
    return e;
}

/// Group-wise LS on decoupled observations: one M' x M' solve per group, scattered back
/// into the positions of that group.
inline Estimate piecewise_ls(const ComplexMatrix &f_hat, const PhaseSchedule &schedule,
                             const std::vector<ComplexMatrix> &z, const std::string &method = "piecewise")
{
    const std::size_t q = schedule.groups, b = schedule.subframes, mp = schedule.group_size();
    if (std::size_t(f_hat.cols()) != schedule.partition.elements())
        throw std::invalid_argument("piecewise_ls: F and schedule disagree on M.");
    if (z.size() != b)
        throw std::invalid_argument("piecewise_ls: expected one decoupled block per subframe.");
    for (const auto &zb : z)
        if (zb.rows() != f_hat.rows() || std::size_t(zb.cols()) != q)
            throw std::invalid_argument("piecewise_ls: decoupled block has the wrong shape.");

    const auto start = detail::Clock::now();
    Estimate e;
    e.method = method;
    e.h_hat = ComplexVector::Zero(f_hat.cols());

    const RealMatrix v = schedule.subframe_codes.leftCols(Eigen::Index(b));
    const auto grams = group_grams(f_hat, schedule.partition, b);
    for (std::size_t g = 0; g < q; ++g)
    {
        const auto &members = schedule.partition.group(g);
        ComplexMatrix fq(f_hat.rows(), Eigen::Index(mp));
        for (std::size_t i = 0; i < mp; ++i)
            fq.col(Eigen::Index(i)) = f_hat.col(Eigen::Index(members[i]));
        ComplexMatrix zq(f_hat.rows(), Eigen::Index(b));
        for (std::size_t s = 0; s < b; ++s)
            zq.col(Eigen::Index(s)) = z[s].col(Eigen::Index(g));

        // rhs = sum_b diag(v_b) F_q^H z_{b,q}
        const ComplexVector rhs = ((fq.adjoint() * zq).array() * v.cast<cdouble>().array()).rowwise().sum();
        const auto sol = solve_gram(grams[g], rhs);
        e.conditions.push_back(sol.condition);
        e.flagged = e.flagged || !sol.condition;
        for (std::size_t i = 0; i < mp; ++i)
            e.h_hat(Eigen::Index(members[i])) = sol.x(Eigen::Index(i));
    }
    e.seconds = detail::seconds_since(start);
    return e;
}

/// Far-field angular dictionary over the RIS aperture: rows x (2 cols) atoms on a uniform
/// grid of direction cosines in [-1, 1), two-times oversampled along x. Atom entries are
/// exp(+j 2 pi (x_m u_x + y_m u_y) / lambda) / sqrt(M) in the RIS element order.
inline ComplexMatrix angular_dictionary(const PlanarArraySpec &ris, double wavelength)
{
    const auto pos = element_positions(ris, Point3::Zero(), wavelength);
    const std::size_t nx = 2 * ris.cols, ny = ris.rows;
    const double k = 2.0 * std::numbers::pi / wavelength;
    const double scale = 1.0 / std::sqrt(double(pos.size()));

    ComplexMatrix d(Eigen::Index(pos.size()), Eigen::Index(nx * ny));
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix)
        {
            const double ux = -1.0 + 2.0 * double(ix) / double(nx);
            const double uy = -1.0 + 2.0 * double(iy) / double(ny);
            const Eigen::Index col = Eigen::Index(iy * nx + ix);
            for (std::size_t m = 0; m < pos.size(); ++m)
                d(Eigen::Index(m), col) = std::polar(scale, k * (pos[m](0) * ux + pos[m](1) * uy));
        }
    return d;
}

/// Orthogonal matching pursuit on the stacked system y_t = F diag(psi_t) D x.
/// K iterations: pick the atom with the largest normalized correlation to the residual,
/// refit all chosen atoms by LS, update the residual.
inline Estimate omp_estimate(const ComplexMatrix &f_hat, const ComplexMatrix &reflections, const ComplexMatrix &y,
                             const ComplexMatrix &dictionary, std::size_t sparsity)
{
    const Eigen::Index n = f_hat.rows(), m = f_hat.cols(), t = reflections.cols();
    if (reflections.rows() != m || y.rows() != n || y.cols() != t || dictionary.rows() != m)
        throw std::invalid_argument("omp_estimate: dimension mismatch.");
    if (sparsity == 0)
        throw std::invalid_argument("omp_estimate: sparsity K must be at least 1.");
    if (sparsity > std::size_t(n * t) || sparsity > std::size_t(dictionary.cols()))
        throw std::invalid_argument("omp_estimate: sparsity K=" + std::to_string(sparsity) +
                                    " exceeds the number of measurements or atoms.");

    const auto start = detail::Clock::now();
    Estimate e;
    e.method = "omp";

    // Sensing operator S (NT x M) applied to a vector x: slot t gives F (psi_t o x).
    auto apply = [&](const ComplexVector &x) {
        const ComplexMatrix cols = f_hat * (reflections.array().colwise() * x.array()).matrix();
        return ComplexVector(cols.reshaped());
    };
    // S^H r for r stacked slot by slot.
    auto apply_adjoint = [&](const ComplexVector &r) {
        const ComplexMatrix rm = r.reshaped(n, t);
        return ComplexVector(((f_hat.adjoint() * rm).array() * reflections.conjugate().array()).rowwise().sum());
    };

    const ComplexMatrix gram = detail::full_gram(f_hat, reflections);
    const RealVector atom_norm =
        (dictionary.conjugate().array() * (gram * dictionary).array()).colwise().sum().real().cwiseMax(0.0).sqrt();

    const ComplexVector target = y.reshaped();
    ComplexVector residual = target;
    std::vector<Eigen::Index> support;
    ComplexMatrix a(n * t, 0);
    ComplexVector coef;
    std::vector<char> chosen(std::size_t(dictionary.cols()), 0);

    for (std::size_t it = 0; it < sparsity; ++it)
    {
        const RealVector corr = (dictionary.adjoint() * apply_adjoint(residual)).cwiseAbs();
        Eigen::Index best = -1;
        double best_score = -1.0;
        for (Eigen::Index j = 0; j < corr.size(); ++j)
        {
            if (chosen[std::size_t(j)] || !(atom_norm(j) > 0.0))
                continue;
            const double score = corr(j) / atom_norm(j);
            if (score > best_score)
            {
                best_score = score;
                best = j;
            }
        }
        if (best < 0)
            break;
        chosen[std::size_t(best)] = 1;
        support.push_back(best);
        a.conservativeResize(Eigen::NoChange, a.cols() + 1);
        a.col(a.cols() - 1) = apply(dictionary.col(best));
        coef = a.colPivHouseholderQr().solve(target);
        residual = target - a * coef;
    }

    ComplexVector x = ComplexVector::Zero(dictionary.cols());
    for (std::size_t i = 0; i < support.size(); ++i)
        x(support[i]) = coef(Eigen::Index(i));
    e.h_hat = dictionary * x;
    e.seconds = detail::seconds_since(start);
    return e;
}

/// |h_hat - h|^2 / |h|^2.
inline double nmse(const ComplexVector &h_hat, const ComplexVector &h)
{
    if (h_hat.size() != h.size())
        throw std::invalid_argument("nmse: length mismatch.");
    const double ref = h.squaredNorm();
    if (!(ref > 0.0))
        throw std::invalid_argument("nmse: true channel is zero.");
    return (h_hat - h).squaredNorm() / ref;
}

/// F_hat = F + e |F|_F / |E|_F E with E i.i.d. CN(0, 1). e = 0 returns F unchanged
/// without touching the generator.
inline ComplexMatrix perturb_channel_estimate(const ComplexMatrix &f, double rel_error, Rng &rng)
{
    if (!(rel_error >= 0.0))
        throw std::invalid_argument("perturb_channel_estimate: relative error must be non-negative.");
    if (rel_error == 0.0)
        return f;
    ComplexMatrix err(f.rows(), f.cols());
    for (Eigen::Index c = 0; c < f.cols(); ++c)
        for (Eigen::Index r = 0; r < f.rows(); ++r)
            err(r, c) = circular_gaussian(rng, 1.0);
    return f + (rel_error * f.norm() / err.norm()) * err;
}

} // namespace risce

#endif
