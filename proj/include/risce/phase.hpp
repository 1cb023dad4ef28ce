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

#ifndef risce_phase_H
#define risce_phase_H

#include "channel.hpp"
#include "numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risce {

// ---- Partition ------------------------------------------------------------

/// Equal-size split of the RIS indices {0, ..., M-1} into Q groups.
/// Indices inside a group are kept sorted; the order of the groups is significant
/// because group q receives column q of the decoupling matrix.
class Partition
{
  public:
    Partition() = default;

    Partition(std::vector<std::vector<std::size_t>> groups, std::size_t elements)
        : groups_(std::move(groups)), elements_(elements)
    {
        if (groups_.empty())
            throw std::invalid_argument("Partition: at least one group required.");
        const std::size_t size = groups_.front().size();
        if (size == 0)
            throw std::invalid_argument("Partition: groups must not be empty.");

        std::vector<char> seen(elements_, 0);
        for (std::size_t q = 0; q < groups_.size(); ++q)
        {
            auto &g = groups_[q];
            if (g.size() != size)
                throw std::invalid_argument("Partition: group " + std::to_string(q) + " has " + std::to_string(g.size()) +
                                            " elements, expected " + std::to_string(size) + ".");
            std::sort(g.begin(), g.end());
            for (std::size_t idx : g)
            {
                if (idx >= elements_)
                    throw std::invalid_argument("Partition: index " + std::to_string(idx) + " out of range.");
                if (seen[idx])
                    throw std::invalid_argument("Partition: index " + std::to_string(idx) + " appears twice.");
                seen[idx] = 1;
            }
        }
        if (size * groups_.size() != elements_)
            throw std::invalid_argument("Partition: groups do not cover all " + std::to_string(elements_) + " indices.");
    }

    const std::vector<std::vector<std::size_t>> &groups() const { return groups_; }
    const std::vector<std::size_t> &group(std::size_t q) const { return groups_.at(q); }
    std::size_t group_count() const { return groups_.size(); }
    std::size_t group_size() const { return groups_.empty() ? 0 : groups_.front().size(); }
    std::size_t elements() const { return elements_; }

    /// "0,1,2|3,4,5": groups in order, separated by '|'.
    std::string to_string() const
    {
        std::string s;
        for (std::size_t q = 0; q < groups_.size(); ++q)
        {
            if (q)
                s += '|';
            for (std::size_t i = 0; i < groups_[q].size(); ++i)
            {
                if (i)
                    s += ',';
                s += std::to_string(groups_[q][i]);
            }
        }
        return s;
    }

    /// 64-bit FNV-1a of to_string(); stable across platforms.
    std::uint64_t hash() const
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : to_string())
        {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    bool operator==(const Partition &) const = default;

  private:
    std::vector<std::vector<std::size_t>> groups_;
    std::size_t elements_ = 0;
};

// ---- Piecewise phase schedule -------------------------------------------

struct PhaseSchedule
{
    std::size_t groups = 1;     // Q
    std::size_t subframes = 1;  // B
    Partition partition;
    ComplexMatrix reflections;  // M x T, column t is psi_t
    ComplexMatrix decoupler;    // Q x Q unitary Hadamard Phi
    RealMatrix subframe_codes;  // M' x M' Hadamard, column b is v_b

    std::size_t slots() const { return groups * subframes; }
    std::size_t group_size() const { return partition.group_size(); }
};

/// Slot t = k + b Q (0-based k < Q, b < B). On group q the reflection is
/// sqrt(Q) Phi(k, q) v_b, with v_b(i) applied to the i-th smallest index of the group.
inline PhaseSchedule build_schedule(std::size_t m, std::size_t q, std::size_t b, const Partition &partition)
{
    if (q == 0 || m % q != 0)
        throw std::invalid_argument("build_schedule: Q must divide M.");
    const std::size_t mp = m / q;
    if (!is_power_of_two(q) || !is_power_of_two(mp))
        throw std::invalid_argument("build_schedule: Q and M/Q must be powers of 2.");
    if (b < 1 || b > mp)
        throw std::invalid_argument("build_schedule: need 1 <= B <= M/Q, got B=" + std::to_string(b) + ".");
    if (partition.elements() != m || partition.group_count() != q)
        throw std::invalid_argument("build_schedule: partition does not match (M, Q).");

    PhaseSchedule s;
    s.groups = q;
    s.subframes = b;
    s.partition = partition;
    s.decoupler = unitary_hadamard(q);
    s.subframe_codes = hadamard(mp);

    const RealMatrix hq = hadamard(q); // sqrt(Q) Phi
    s.reflections.resize(Eigen::Index(m), Eigen::Index(q * b));
    for (std::size_t sb = 0; sb < b; ++sb)
        for (std::size_t k = 0; k < q; ++k)
        {
            const Eigen::Index t = Eigen::Index(k + sb * q);
            for (std::size_t g = 0; g < q; ++g)
            {
                const auto &members = partition.group(g);
                for (std::size_t i = 0; i < mp; ++i)
                    s.reflections(Eigen::Index(members[i]), t) =
                        hq(Eigen::Index(k), Eigen::Index(g)) * s.subframe_codes(Eigen::Index(i), Eigen::Index(sb));
            }
        }
    return s;
}

/// T reflection vectors with i.i.d. phases uniform on [0, 2 pi).
inline ComplexMatrix random_phase_schedule(std::size_t m, std::size_t t, Rng &rng)
{
    std::uniform_real_distribution<double> ud(0.0, 2.0 * std::numbers::pi);
    ComplexMatrix psi(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t));
    for (Eigen::Index c = 0; c < psi.cols(); ++c)
        for (Eigen::Index r = 0; r < psi.rows(); ++r)
            psi(r, c) = std::polar(1.0, ud(rng));
    return psi;
}

// ---- Pilot reception ------------------------------------------------------

/// Normalized observations y_t / (sqrt(P) s_t) for every column psi_t of the reflection
/// matrix, with s_t = 1 and n_t ~ CN(0, noise_var I). Returns an N x T matrix.
inline ComplexMatrix simulate_rx(const ComplexMatrix &f, const ComplexVector &h, const ComplexMatrix &reflections,
                                 double power, double noise_var, Rng &rng)
{
    if (f.cols() != h.size() || reflections.rows() != h.size())
        throw std::invalid_argument("simulate_rx: dimension mismatch between F, h and the reflections.");
    if (!(power > 0.0) || !(noise_var >= 0.0))
        throw std::invalid_argument("simulate_rx: need P > 0 and noise variance >= 0.");

    // Column t of F diag(psi_t) h is F (psi_t o h).
    ComplexMatrix y = std::sqrt(power) * (f * (reflections.array().colwise() * h.array()).matrix());
    if (noise_var > 0.0)
        for (Eigen::Index t = 0; t < y.cols(); ++t)
            for (Eigen::Index n = 0; n < y.rows(); ++n)
                y(n, t) += circular_gaussian(rng, noise_var);
    return y / std::sqrt(power);
}

/// Received pilots of one piecewise frame, grouped by subframe.
struct PilotObservation
{
    std::vector<ComplexMatrix> subframes; // B matrices of size N x Q, column k is slot k + b Q
};

inline PilotObservation simulate_pilot_rx(const ComplexMatrix &f, const ComplexVector &h, const PhaseSchedule &schedule,
                                          double power, double noise_var, Rng &rng)
{
    const ComplexMatrix y = simulate_rx(f, h, schedule.reflections, power, noise_var, rng);
    PilotObservation obs;
    const Eigen::Index q = Eigen::Index(schedule.groups);
    for (std::size_t b = 0; b < schedule.subframes; ++b)
        obs.subframes.push_back(y.middleCols(Eigen::Index(b) * q, q));
    return obs;
}

inline PilotObservation simulate_pilot_rx(const ChannelRealization &ch, const PhaseSchedule &schedule, double power,
                                          double noise_var, Rng &rng)
{
    return simulate_pilot_rx(ch.ris_bs, ch.user_ris, schedule, power, noise_var, rng);
}

/// Hadamard decoupling. Result[b] is N x Q with column q equal to z_{b,q}, the
/// q-th column of Y_b Phi^H / sqrt(Q). Noiseless, z_{b,q} = F_q diag(v_b) h_q.
inline std::vector<ComplexMatrix> decouple(const PilotObservation &obs, const PhaseSchedule &schedule)
{
    if (obs.subframes.size() != schedule.subframes)
        throw std::invalid_argument("decouple: observation and schedule disagree on the subframe count.");
    const ComplexMatrix mix = schedule.decoupler.adjoint() / std::sqrt(double(schedule.groups));
    std::vector<ComplexMatrix> z;
    z.reserve(obs.subframes.size());
    for (const auto &yb : obs.subframes)
    {
        if (yb.cols() != mix.rows())
            throw std::invalid_argument("decouple: subframe width does not match Q.");
        z.push_back(yb * mix);
    }
    return z;
}

} // namespace risce

#endif
