// SPDX-License-Identifier: Apache-2.0
//
// Precoder design. For every (relay slot t, broadcast slot tau) the relays
// must satisfy one alignment equation per (receiver n != tau, transmitter
// m != m'): the interference that slot-tau symbols cause at receiver n has to
// land on the single direction already occupied by transmitter m''s re-send.
// Rewriting each equation with vec(A C B) = (B^T kron A) vec(C) turns the
// unknown precoder blocks into one flat vector r of length L = sum L_j^2, so
// the whole design collapses to V(t,tau) r = b(t,tau): solved exactly when
// L equals the equation count, minimum-norm when there is slack.

#pragma once

#include "xalign/linalg.hpp"
#include "xalign/model.hpp"
#include "xalign/scheme.hpp"

#include <utility>
#include <vector>

namespace xalign {

/// The stacked linear system for one (t, tau) pair.
struct AlignmentSystem {
    int t = 0;
    int tau = 0;
    CMatrix V;  // (N-1)(M-1) x L
    CVector b;  // (N-1)(M-1)
    std::vector<std::pair<int, int>> row_index;  // (n, m) per row, 0-based
};

/// Direct evaluation of s_nm(t, tau) = sum_j g_nj(t)^T R_j(t, tau) f_jm(tau).
inline Complex relayed_coefficient(int n, int m, int t, int tau, const ChannelSet& ch,
                                   const PrecoderSet& pre) {
    Complex s = 0;
    for (int j = 0; j < pre.relays(); ++j)
        s += (ch.from_relay[j][t].row(n) * pre.at(j, t, tau) * ch.to_relay[j][tau].col(m))(0, 0);
    return s;
}

/// One alignment equation as a row over the flattened precoder vector.
/// Block j of the row is kron(df^T, g_nj(t)^T) with
/// df = h_nm'(tau) f_jm(tau) - h_nm(tau) f_jm'(tau); the right-hand side is
/// h_nm'(t) h_nm(tau).
inline std::pair<CVector, Complex> build_row(int n, int m, int t, int tau, const ChannelSet& ch,
                                             const NetworkConfig& cfg) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    const int m_active = sched.active_tx(t);
    if (n == tau) throw std::invalid_argument("build_row: n = tau has no interference equation");
    if (m == m_active) throw std::invalid_argument("build_row: m = m' is the re-sent symbol");
    const Complex h_act_tau = ch.direct[tau](n, m_active);
    const Complex h_tau = ch.direct[tau](n, m);
    CVector row(cfg.precoder_unknowns());
    Index offset = 0;
    for (int j = 0; j < cfg.relays(); ++j) {
        const Index lj = cfg.relay_antennas[j];
        const CVector df = h_act_tau * ch.to_relay[j][tau].col(m) - h_tau * ch.to_relay[j][tau].col(m_active);
        const CMatrix block = kron(df.transpose(), ch.from_relay[j][t].row(n));
        row.segment(offset, lj * lj) = block.row(0).transpose();
        offset += lj * lj;
    }
    const Complex rhs = ch.direct[t](n, m_active) * h_tau;
    return {std::move(row), rhs};
}

/// Stack the (N-1)(M-1) equations for one (t, tau): n ascending skipping tau,
/// m ascending skipping m' inside each n.
inline AlignmentSystem build_system(int t, int tau, const ChannelSet& ch, const NetworkConfig& cfg) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    if (!sched.is_relay(t) || !sched.is_broadcast(tau))
        throw std::invalid_argument("build_system: (t, tau) outside the relay/broadcast ranges");
    const int m_active = sched.active_tx(t);
    AlignmentSystem sys;
    sys.t = t;
    sys.tau = tau;
    const long rows = cfg.alignment_equations();
    sys.V.resize(rows, cfg.precoder_unknowns());
    sys.b.resize(rows);
    sys.row_index.reserve(rows);
    Index r = 0;
    for (int n = 0; n < cfg.rx; ++n) {
        if (n == tau) continue;
        for (int m = 0; m < cfg.tx; ++m) {
            if (m == m_active) continue;
            auto [row, rhs] = build_row(n, m, t, tau, ch, cfg);
            sys.V.row(r) = row.transpose();
            sys.b(r) = rhs;
            sys.row_index.emplace_back(n, m);
            ++r;
        }
    }
    return sys;
}

/// Solve every (t, tau) system and reshape the solutions back into the
/// per-relay precoding matrices. Exact solve when L = (N-1)(M-1), minimum
/// norm when L exceeds it. Throws InfeasibleConfigError when L falls short
/// and RankDeficientError on a (probability-zero) rank-losing channel draw.
inline PrecoderSet solve_precoders(const ChannelSet& ch, const NetworkConfig& cfg,
                                   double residual_tol = 1e-9) {
    if (!check_feasibility(cfg).feasible)
        throw InfeasibleConfigError("solve_precoders: L < (N-1)(M-1)");
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    const long unknowns = cfg.precoder_unknowns();
    PrecoderSet pre = PrecoderSet::zeros(cfg);
    for (int t = sched.broadcast; t < sched.total; ++t) {
        for (int tau = 0; tau < sched.broadcast; ++tau) {
            const AlignmentSystem sys = build_system(t, tau, ch, cfg);
            CVector r;
            if (sys.V.rows() == 0 || unknowns == 0) {
                r = CVector::Zero(unknowns);
            } else if (sys.V.rows() == unknowns) {
                if (numerical_rank(sys.V) < sys.V.rows())
                    throw RankDeficientError("solve_precoders: V(t,tau) lost row rank");
                r = solve_square(sys.V, sys.b);
            } else {
                r = min_norm_solve(sys.V, sys.b);
            }
            const double bnorm = sys.b.norm();
            if ((sys.V * r - sys.b).norm() > residual_tol * std::max(bnorm, 1e-300))
                throw RankDeficientError("solve_precoders: residual above tolerance");
            Index offset = 0;
            for (int j = 0; j < cfg.relays(); ++j) {
                const Index lj = cfg.relay_antennas[j];
                pre.at(j, t, tau) = unvec(r.segment(offset, lj * lj), lj, lj);
                offset += lj * lj;
            }
        }
    }
    return pre;
}

/// Largest relative mismatch of the alignment condition
/// (s_nm'(t,tau) + h_nm'(t)) / h_nm'(tau) = s_nm(t,tau) / h_nm(tau)
/// over every receiver n, relay slot t, broadcast slot tau != n and m != m'.
/// Vacuous quantifier ranges (M = 1 or N = 1) give 0.
inline double verify_alignment_condition(const ChannelSet& ch, const PrecoderSet& pre,
                                         const NetworkConfig& cfg) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    double worst = 0.0;
    for (int t = sched.broadcast; t < sched.total; ++t) {
        const int m_active = sched.active_tx(t);
        for (int tau = 0; tau < sched.broadcast; ++tau) {
            for (int n = 0; n < cfg.rx; ++n) {
                if (n == tau) continue;
                const Complex lhs =
                    (relayed_coefficient(n, m_active, t, tau, ch, pre) + ch.direct[t](n, m_active)) /
                    ch.direct[tau](n, m_active);
                for (int m = 0; m < cfg.tx; ++m) {
                    if (m == m_active) continue;
                    const Complex rhs =
                        relayed_coefficient(n, m, t, tau, ch, pre) / ch.direct[tau](n, m);
                    const double denom = std::max(std::abs(lhs), std::abs(rhs));
                    if (denom > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / denom);
                }
            }
        }
    }
    return worst;
}

/// Unstructured CN(0,1) precoders; the negative control for certification.
inline PrecoderSet random_precoders(const NetworkConfig& cfg, std::uint64_t seed) {
    Rng rng(derive_seed(seed, Stream::Precoders));
    PrecoderSet pre = PrecoderSet::zeros(cfg);
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    for (int j = 0; j < cfg.relays(); ++j)
        for (int t = sched.broadcast; t < sched.total; ++t)
            for (int tau = 0; tau < sched.broadcast; ++tau)
                pre.at(j, t, tau) = rng.cgaussian_matrix(cfg.relay_antennas[j], cfg.relay_antennas[j]);
    return pre;
}

}  // namespace xalign
