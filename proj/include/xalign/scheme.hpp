// SPDX-License-Identifier: Apache-2.0
//
// The transmission protocol and its matrix form.
//
// Slots 1..N (broadcast): every transmitter sends its symbol for receiver t,
// relays listen and store. Slots N+1..T (relay): the relays forward linear
// combinations of what they stored, and exactly one transmitter m' = t - N
// re-sends the sum of its own symbols. The end-to-end linear map is the block
// lower-triangular TN x TM matrix assembled here; the slot-wise simulation
// and the matrix product are two independent routes to the same received
// signal and are cross-checked in the tests.

#pragma once

#include "xalign/linalg.hpp"
#include "xalign/model.hpp"

#include <stdexcept>
#include <vector>

namespace xalign {

struct SlotSchedule {
    int total = 1;      // T
    int broadcast = 1;  // N

    static SlotSchedule from_config(const NetworkConfig& cfg) { return {cfg.slots(), cfg.rx}; }

    bool is_broadcast(int t) const { return t >= 0 && t < broadcast; }
    bool is_relay(int t) const { return t >= broadcast && t < total; }
    int relay_slot_count() const { return total - broadcast; }  // M - 1

    /// The single transmitter active in relay slot t (0-based).
    int active_tx(int t) const {
        if (!is_relay(t)) throw std::invalid_argument("active_tx: not a relay slot");
        return t - broadcast;
    }
};

/// Relay precoding matrices R_j(t, tau), one L_j x L_j matrix per relay j,
/// relay slot t and broadcast slot tau. Complete by construction.
struct PrecoderSet {
    int total = 1;      // T
    int broadcast = 1;  // N
    std::vector<std::vector<CMatrix>> mats;  // mats[j][(t - broadcast) * broadcast + tau]

    static PrecoderSet zeros(const NetworkConfig& cfg) {
        PrecoderSet p;
        p.total = cfg.slots();
        p.broadcast = cfg.rx;
        p.mats.resize(cfg.relays());
        const int pairs = (p.total - p.broadcast) * p.broadcast;
        for (int j = 0; j < cfg.relays(); ++j) {
            const int lj = cfg.relay_antennas[j];
            p.mats[j].assign(pairs, CMatrix::Zero(lj, lj));
        }
        return p;
    }

    int relays() const { return static_cast<int>(mats.size()); }

    const CMatrix& at(int j, int t, int tau) const {
        check(j, t, tau);
        return mats[j][(t - broadcast) * broadcast + tau];
    }

    CMatrix& at(int j, int t, int tau) {
        check(j, t, tau);
        return mats[j][(t - broadcast) * broadcast + tau];
    }

  private:
    void check(int j, int t, int tau) const {
        if (j < 0 || j >= relays() || t < broadcast || t >= total || tau < 0 || tau >= broadcast)
            throw std::invalid_argument("PrecoderSet: no precoder for this (relay, t, tau)");
    }
};

/// Transmit vector x(t) across all M transmitters.
inline CVector tx_signal(int t, const SymbolGrid& d, const NetworkConfig& cfg) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    if (t < 0 || t >= sched.total) throw std::invalid_argument("tx_signal: slot out of range");
    if (sched.is_broadcast(t)) return d.row(t).transpose();
    CVector x = CVector::Zero(cfg.tx);
    const int m_active = sched.active_tx(t);
    x(m_active) = d.col(m_active).sum();
    return x;
}

/// What each relay hears in broadcast slot t: y_Rj(t) = F_j(t) x (+ noise).
inline std::vector<CVector> relay_rx(int t, const ChannelSet& ch, const CVector& x,
                                     const NoiseRealization* noise = nullptr) {
    if (t < 0 || t >= static_cast<int>(ch.direct.size()))
        throw std::invalid_argument("relay_rx: slot out of range");
    std::vector<CVector> out;
    out.reserve(ch.to_relay.size());
    for (std::size_t j = 0; j < ch.to_relay.size(); ++j) {
        CVector y = ch.to_relay[j][t] * x;
        if (noise) y += noise->relay[j].col(t);
        out.push_back(std::move(y));
    }
    return out;
}

/// What each relay transmits in slot t: the precoded sum of its stored
/// broadcast-slot receptions, or zero while it is still listening.
inline std::vector<CVector> relay_tx(int t, const std::vector<std::vector<CVector>>& stored,
                                     const PrecoderSet& pre, const NetworkConfig& cfg) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    std::vector<CVector> out;
    out.reserve(cfg.relays());
    for (int j = 0; j < cfg.relays(); ++j) {
        if (!sched.is_relay(t)) {
            out.push_back(CVector::Zero(cfg.relay_antennas[j]));
            continue;
        }
        if (static_cast<int>(stored[j].size()) < sched.broadcast)
            throw std::invalid_argument("relay_tx: missing stored receptions");
        CVector x = CVector::Zero(cfg.relay_antennas[j]);
        for (int tau = 0; tau < sched.broadcast; ++tau) x += pre.at(j, t, tau) * stored[j][tau];
        out.push_back(std::move(x));
    }
    return out;
}

/// Aggregate two-hop matrix S(t, tau) = sum_j G_j(t) R_j(t, tau) F_j(tau).
inline CMatrix assemble_S(int t, int tau, const ChannelSet& ch, const PrecoderSet& pre,
                          const NetworkConfig& cfg) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    if (!sched.is_relay(t) || !sched.is_broadcast(tau))
        throw std::invalid_argument("assemble_S: (t, tau) outside the relay/broadcast ranges");
    CMatrix s = CMatrix::Zero(cfg.rx, cfg.tx);
    for (int j = 0; j < cfg.relays(); ++j)
        s += ch.from_relay[j][t] * pre.at(j, t, tau) * ch.to_relay[j][tau];
    return s;
}

/// Block lower-triangular end-to-end channel: diagonal blocks H(t), blocks
/// (t, tau) with t > N, tau <= N equal to S(t, tau), everything else zero.
struct ExtendedChannel {
    CMatrix h_tilde;  // TN x TM
    int n_rx = 1;     // N
    int n_tx = 1;     // M
    int slots = 1;    // T

    auto block(int t, int tau) const {
        return h_tilde.block(static_cast<Index>(t) * n_rx, static_cast<Index>(tau) * n_tx, n_rx, n_tx);
    }
};

inline ExtendedChannel assemble_extended_channel(const ChannelSet& ch, const PrecoderSet& pre,
                                                 const NetworkConfig& cfg) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    ExtendedChannel ext;
    ext.n_rx = cfg.rx;
    ext.n_tx = cfg.tx;
    ext.slots = sched.total;
    ext.h_tilde = CMatrix::Zero(static_cast<Index>(sched.total) * cfg.rx,
                                static_cast<Index>(sched.total) * cfg.tx);
    for (int t = 0; t < sched.total; ++t) {
        ext.h_tilde.block(static_cast<Index>(t) * cfg.rx, static_cast<Index>(t) * cfg.tx, cfg.rx, cfg.tx) =
            ch.direct[t];
        if (sched.is_relay(t))
            for (int tau = 0; tau < sched.broadcast; ++tau)
                ext.h_tilde.block(static_cast<Index>(t) * cfg.rx, static_cast<Index>(tau) * cfg.tx, cfg.rx,
                                  cfg.tx) = assemble_S(t, tau, ch, pre, cfg);
    }
    return ext;
}

/// Simulate the protocol slot by slot and return, per receiver, the length-T
/// vector of received samples. Pass a NoiseRealization to add receiver noise
/// and relay noise (the latter gets forwarded through the precoders).
inline std::vector<CVector> rx_signal_slotwise(const ChannelSet& ch, const PrecoderSet& pre,
                                               const SymbolGrid& d, const NetworkConfig& cfg,
                                               const NoiseRealization* noise = nullptr) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    std::vector<std::vector<CVector>> stored(cfg.relays());
    std::vector<CVector> per_rx(cfg.rx, CVector::Zero(sched.total));
    for (int t = 0; t < sched.total; ++t) {
        const CVector x = tx_signal(t, d, cfg);
        if (sched.is_broadcast(t)) {
            auto heard = relay_rx(t, ch, x, noise);
            for (int j = 0; j < cfg.relays(); ++j) stored[j].push_back(std::move(heard[j]));
        }
        CVector y = ch.direct[t] * x;
        if (sched.is_relay(t)) {
            const auto forwarded = relay_tx(t, stored, pre, cfg);
            for (int j = 0; j < cfg.relays(); ++j) y += ch.from_relay[j][t] * forwarded[j];
        }
        if (noise) y += noise->rx.col(t);
        for (int n = 0; n < cfg.rx; ++n) per_rx[n](t) = y(n);
    }
    return per_rx;
}

}  // namespace xalign
