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

#ifndef risce_grouping_H
#define risce_grouping_H

#include "numerics.hpp"
#include "phase.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risce {

/// Normalized column coherences w(i,j) = |f_i^H f_j| / (|f_i| |f_j|), zero diagonal.
struct CorrelationWeights
{
    RealMatrix w;

    std::size_t elements() const { return std::size_t(w.rows()); }
    double operator()(std::size_t i, std::size_t j) const { return w(Eigen::Index(i), Eigen::Index(j)); }
};

inline CorrelationWeights correlation_weights(const ComplexMatrix &f_hat)
{
    const RealVector norms = f_hat.colwise().norm().transpose();
    for (Eigen::Index i = 0; i < norms.size(); ++i)
        if (!(norms(i) > 0.0))
            throw std::invalid_argument("correlation_weights: column " + std::to_string(i) + " of F is zero.");

    CorrelationWeights cw;
    const ComplexMatrix gram = f_hat.adjoint() * f_hat;
    cw.w = gram.cwiseAbs().array() / (norms * norms.transpose()).array();
    cw.w.diagonal().setZero();
    return cw;
}

/// Picks the Q/2 heaviest pairwise-disjoint pairs (scanning pairs by descending weight,
/// lexicographically lowest pair first on ties). Pair p seeds groups 2p and 2p+1.
inline std::vector<std::vector<std::size_t>> seed_init(const CorrelationWeights &cw, std::size_t q)
{
    const std::size_t m = cw.elements();
    if (q == 0 || q % 2 != 0)
        throw std::invalid_argument("seed_init: Q must be even, got " + std::to_string(q) + ".");
    if (m < q)
        throw std::invalid_argument("seed_init: need M >= Q.");

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(m * (m - 1) / 2);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            pairs.emplace_back(i, j);
    std::stable_sort(pairs.begin(), pairs.end(),
                     [&](const auto &a, const auto &b) { return cw(a.first, a.second) > cw(b.first, b.second); });

    std::vector<char> used(m, 0);
    std::vector<std::vector<std::size_t>> seeds;
    seeds.reserve(q);
    for (const auto &[i, j] : pairs)
    {
        if (seeds.size() == q)
            break;
        if (used[i] || used[j])
            continue;
        used[i] = used[j] = 1;
        seeds.push_back({i});
        seeds.push_back({j});
    }
    if (seeds.size() != q)
        throw std::invalid_argument("seed_init: not enough disjoint pairs for Q seeds.");
    return seeds;
}

/// Sequential assignment of the indices not used as seeds. The next index is the
/// unassigned one most strongly correlated with anything already placed (lowest index
/// on ties). It joins the non-full group with the smallest mean weight to its members
/// (lowest group on ties).
inline Partition greedy_assign(const CorrelationWeights &cw, std::vector<std::vector<std::size_t>> seeds, std::size_t q,
                               std::size_t group_size)
{
    const std::size_t m = cw.elements();
    if (seeds.size() != q || q * group_size != m)
        throw std::invalid_argument("greedy_assign: seeds do not match (M, Q, M').");

    std::vector<char> assigned(m, 0);
    std::vector<double> link(m, -1.0);          // max weight to any assigned index
    RealMatrix sums = RealMatrix::Zero(Eigen::Index(m), Eigen::Index(q)); // sum of weights to each group

    auto place = [&](std::size_t idx, std::size_t g) {
        assigned[idx] = 1;
        for (std::size_t j = 0; j < m; ++j)
        {
            link[j] = std::max(link[j], cw(j, idx));
            sums(Eigen::Index(j), Eigen::Index(g)) += cw(j, idx);
        }
    };

    for (std::size_t g = 0; g < q; ++g)
    {
        if (seeds[g].size() != 1 || seeds[g].front() >= m || assigned[seeds[g].front()])
            throw std::invalid_argument("greedy_assign: seeds must be distinct singletons.");
        place(seeds[g].front(), g);
    }

    for (std::size_t step = q; step < m; ++step)
    {
        std::size_t next = m;
        for (std::size_t j = 0; j < m; ++j)
            if (!assigned[j] && (next == m || link[j] > link[next]))
                next = j;

        std::size_t best = q;
        double best_mean = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < q; ++g)
        {
            if (seeds[g].size() >= group_size)
                continue;
            const double mean = sums(Eigen::Index(next), Eigen::Index(g)) / double(seeds[g].size());
            if (mean < best_mean)
            {
                best_mean = mean;
                best = g;
            }
        }
        seeds[best].push_back(next);
        place(next, best);
    }
    return Partition(std::move(seeds), m);
}

/// Weights, seeds and assignment in one call. Q = 1 yields the single trivial group.
inline Partition greedy_partition(const CorrelationWeights &cw, std::size_t q)
{
    const std::size_t m = cw.elements();
    if (q == 0 || m % q != 0)
        throw std::invalid_argument("greedy_partition: Q must divide M.");
    if (q == 1)
    {
        std::vector<std::size_t> all(m);
        std::iota(all.begin(), all.end(), std::size_t(0));
        return Partition({all}, m);
    }
    return greedy_assign(cw, seed_init(cw, q), q, m / q);
}

inline Partition greedy_partition(const ComplexMatrix &f_hat, std::size_t q)
{
    return greedy_partition(correlation_weights(f_hat), q);
}

/// Largest intra-group sum of pairwise weights.
inline double surrogate_objective(const CorrelationWeights &cw, const Partition &p)
{
    if (p.elements() != cw.elements())
        throw std::invalid_argument("surrogate_objective: partition size does not match the weights.");
    double worst = 0.0;
    for (const auto &g : p.groups())
    {
        double s = 0.0;
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = a + 1; b < g.size(); ++b)
                s += cw(g[a], g[b]);
        worst = std::max(worst, s);
    }
    return worst;
}

inline Partition contiguous_partition(std::size_t m, std::size_t q)
{
    if (q == 0 || m % q != 0)
        throw std::invalid_argument("contiguous_partition: Q=" + std::to_string(q) + " does not divide M=" +
                                    std::to_string(m) + ".");
    const std::size_t mp = m / q;
    std::vector<std::vector<std::size_t>> groups(q);
    for (std::size_t g = 0; g < q; ++g)
        for (std::size_t i = 0; i < mp; ++i)
            groups[g].push_back(g * mp + i);
    return Partition(std::move(groups), m);
}

/// Per-group Gram matrices G_q = sum_b diag(v_b) F_q^H F_q diag(v_b), computed as the
/// Hadamard product of F_q^H F_q with sum_b v_b v_b^T.
inline std::vector<ComplexMatrix> group_grams(const ComplexMatrix &f_hat, const Partition &p, std::size_t b)
{
    if (std::size_t(f_hat.cols()) != p.elements())
        throw std::invalid_argument("group_grams: F and partition disagree on M.");
    const std::size_t mp = p.group_size();
    if (b < 1 || b > mp || !is_power_of_two(mp))
        throw std::invalid_argument("group_grams: need 1 <= B <= M' with M' a power of 2.");

    const RealMatrix v = hadamard(mp).leftCols(Eigen::Index(b));
    const RealMatrix code = v * v.transpose();

    std::vector<ComplexMatrix> grams;
    grams.reserve(p.group_count());
    for (const auto &g : p.groups())
    {
        ComplexMatrix fq(f_hat.rows(), Eigen::Index(mp));
        for (std::size_t i = 0; i < mp; ++i)
            fq.col(Eigen::Index(i)) = f_hat.col(Eigen::Index(g[i]));
        ComplexMatrix gq = fq.adjoint() * fq;
        gq.array() *= code.cast<cdouble>().array();
        grams.push_back(std::move(gq));
    }
    return grams;
}

/// Condition number of every group Gram matrix (nullopt marks a singular group).
inline std::vector<std::optional<double>> group_conditions(const ComplexMatrix &f_hat, const Partition &p, std::size_t b)
{
    std::vector<std::optional<double>> out;
    for (const auto &g : group_grams(f_hat, p, b))
        out.push_back(condition_number(g));
    return out;
}

/// max_q cond(G_q); nullopt when any group is singular.
inline std::optional<double> worst_condition(const ComplexMatrix &f_hat, const Partition &p, std::size_t b)
{
    double worst = 0.0;
    for (const auto &c : group_conditions(f_hat, p, b))
    {
        if (!c)
            return std::nullopt;
        worst = std::max(worst, *c);
    }
    return worst;
}

/// Condition value with "singular" mapped to +inf, for ordering.
inline double condition_or_inf(const std::optional<double> &c)
{
    return c ? *c : std::numeric_limits<double>::infinity();
}

namespace detail {

struct BruteForceState
{
    const CorrelationWeights *cw;
    std::size_t m, q, size;
    std::vector<std::vector<std::size_t>> groups;
    std::vector<char> used;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::vector<std::size_t>> best_groups;
};

inline double pair_sum(const CorrelationWeights &cw, const std::vector<std::size_t> &g)
{
    double s = 0.0;
    for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = a + 1; b < g.size(); ++b)
            s += cw(g[a], g[b]);
    return s;
}

// Canonical enumeration: each new group starts with the smallest unused index, so every
// unordered partition is visited exactly once. Branches that cannot beat the incumbent
// are cut.
inline void brute_force_fill(BruteForceState &st, std::vector<std::size_t> &current, std::size_t from, double worst)
{
    if (current.size() == st.size)
    {
        const double w = std::max(worst, pair_sum(*st.cw, current));
        if (w >= st.best)
            return;
        st.groups.push_back(current);
        if (st.groups.size() == st.q)
        {
            st.best = w;
            st.best_groups = st.groups;
        }
        else
        {
            std::size_t first = 0;
            while (st.used[first])
                ++first;
            std::vector<std::size_t> next{first};
            st.used[first] = 1;
            brute_force_fill(st, next, first + 1, w);
            st.used[first] = 0;
        }
        st.groups.pop_back();
        return;
    }
    for (std::size_t i = from; i < st.m; ++i)
    {
        if (st.used[i])
            continue;
        st.used[i] = 1;
        current.push_back(i);
        brute_force_fill(st, current, i + 1, worst);
        current.pop_back();
        st.used[i] = 0;
    }
}

} // namespace detail

inline constexpr std::size_t brute_force_max_elements = 12;

/// Exhaustive minimizer of the surrogate objective over equal-size partitions (M <= 12).
inline std::pair<Partition, double> brute_force_partition(const CorrelationWeights &cw, std::size_t q)
{
    const std::size_t m = cw.elements();
    if (m > brute_force_max_elements)
        throw std::invalid_argument("brute_force_partition: M=" + std::to_string(m) + " exceeds the enumeration limit of " +
                                    std::to_string(brute_force_max_elements) + ".");
    if (q == 0 || m % q != 0)
        throw std::invalid_argument("brute_force_partition: Q must divide M.");

    detail::BruteForceState st{&cw, m, q, m / q, {}, std::vector<char>(m, 0)};
    std::vector<std::size_t> first{0};
    st.used[0] = 1;
    detail::brute_force_fill(st, first, 1, 0.0);
    return {Partition(st.best_groups, m), st.best};
}

} // namespace risce

#endif
