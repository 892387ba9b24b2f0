// SPDX-License-Identifier: Apache-2.0
//
// Per-receiver decoding. The stacked symbol vector d (length NM) maps to the
// stacked transmit vector x (length TM) through the 0/1 duplication matrix U,
// so receiver n sees y_n = H_hat_n d with H_hat_n = (I_T kron e_n^T) H~ U.
// With aligned precoders the NM columns of H_hat_n collapse onto exactly
// T = M + N - 1 independent directions: M desired ones and one shared
// direction per interfering broadcast slot. Zero-forcing through the right
// pseudo-inverse then recovers the M desired symbols exactly.

#pragma once

#include "xalign/linalg.hpp"
#include "xalign/model.hpp"
#include "xalign/scheme.hpp"

#include <vector>

namespace xalign {

/// vec of the transposed grid: blocks d_1, ..., d_N stacked, where d_tau
/// holds the M symbols destined for receiver tau.
inline CVector stack_symbols(const SymbolGrid& d) {
    return vec(d.transpose());
}

/// The TM x NM duplication matrix: identity on top (broadcast slots resend d
/// as-is), then one M x NM block per relay slot k that sums d_{tau,k} over
/// tau into transmitter k's entry.
inline CMatrix build_U(const NetworkConfig& cfg) {
    const int m = cfg.tx;
    const int n = cfg.rx;
    const Index nm = static_cast<Index>(n) * m;
    CMatrix u = CMatrix::Zero(static_cast<Index>(cfg.slots()) * m, nm);
    u.topRows(nm).setIdentity();
    for (int k = 0; k < m - 1; ++k)
        for (int tau = 0; tau < n; ++tau)
            u(nm + static_cast<Index>(k) * m + k, static_cast<Index>(tau) * m + k) = 1.0;
    return u;
}

struct EffectiveChannel {
    int receiver = 0;
    CMatrix h_hat;  // T x NM
    std::vector<int> desired_cols;
    std::vector<int> interference_cols;
};

/// H_hat_n = (I_T kron e_n^T) H~ U; desired columns are those of d_n.
inline EffectiveChannel effective_channel(int n, const ExtendedChannel& ext, const CMatrix& u,
                                          const NetworkConfig& cfg) {
    if (n < 0 || n >= cfg.rx) throw std::invalid_argument("effective_channel: receiver out of range");
    EffectiveChannel eff;
    eff.receiver = n;
    const int t_count = cfg.slots();
    CMatrix rows(t_count, ext.h_tilde.cols());
    for (int t = 0; t < t_count; ++t)
        rows.row(t) = ext.h_tilde.row(static_cast<Index>(t) * cfg.rx + n);
    eff.h_hat = rows * u;
    for (int col = 0; col < cfg.rx * cfg.tx; ++col) {
        if (col / cfg.tx == n)
            eff.desired_cols.push_back(col);
        else
            eff.interference_cols.push_back(col);
    }
    return eff;
}

/// Zero-forcing decode of the M desired symbols:
/// d_n = (e_n^T kron I_M) H_hat_n^+ y_n. Throws RankDeficientError when the
/// effective channel lost row rank (alignment failed badly enough that
/// recovery is ill-posed).
inline CVector decode(int n, const CVector& y_n, const EffectiveChannel& eff, double tol = 1e-10) {
    const Index m = static_cast<Index>(eff.desired_cols.size());
    const CVector full = right_pinv_apply(eff.h_hat, y_n, tol);
    return full.segment(static_cast<Index>(n) * m, m);
}

/// One representative aligned direction per interfering broadcast slot: the
/// (tau, m=1) column of H_hat_n for each tau != n. With aligned precoders
/// these N-1 columns span all M(N-1) interference columns.
inline CMatrix interference_basis(const EffectiveChannel& eff) {
    const Index m = static_cast<Index>(eff.desired_cols.size());
    const Index n_rx = eff.h_hat.cols() / m;
    CMatrix basis(eff.h_hat.rows(), n_rx - 1);
    Index out = 0;
    for (Index tau = 0; tau < n_rx; ++tau) {
        if (tau == eff.receiver) continue;
        basis.col(out++) = eff.h_hat.col(tau * m);
    }
    return basis;
}

}  // namespace xalign
