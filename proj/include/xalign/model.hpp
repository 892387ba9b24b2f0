// SPDX-License-Identifier: Apache-2.0
//
// Network configuration, the feasibility condition, and everything drawn at
// random before the scheme runs: channel matrices, data symbols, noise.
//
// An [M x N]-user X-network: M single-antenna transmitters, N single-antenna
// receivers, J half-duplex amplify-and-forward relays with L_j antennas each.
// Transmitter m holds one symbol d[n][m] for every receiver n; the whole
// exchange runs in T = M + N - 1 time slots.

#pragma once

#include "xalign/linalg.hpp"
#include "xalign/random.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace xalign {

enum class ChannelMode { TimeVarying, Constant };
enum class Constellation { Gaussian, Qpsk };

/// The relay antenna budget cannot satisfy the alignment equation count.
class InfeasibleConfigError : public std::runtime_error {
  public:
    explicit InfeasibleConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NetworkConfig {
    int tx = 1;                            // M
    int rx = 1;                            // N
    std::vector<int> relay_antennas;       // L_j, one entry per relay
    ChannelMode channel_mode = ChannelMode::TimeVarying;
    std::uint64_t seed = 0;
    Constellation constellation = Constellation::Gaussian;

    int relays() const { return static_cast<int>(relay_antennas.size()); }

    /// T = M + N - 1 slots: N broadcast slots, then M - 1 relay slots.
    int slots() const { return tx + rx - 1; }

    /// L = sum of L_j^2, the number of free precoder entries per (t, tau).
    long precoder_unknowns() const {
        long l = 0;
        for (int lj : relay_antennas) l += static_cast<long>(lj) * lj;
        return l;
    }

    /// (N-1)(M-1) alignment equations per (t, tau).
    long alignment_equations() const { return static_cast<long>(rx - 1) * (tx - 1); }
};

inline NetworkConfig make_config(int tx, int rx, int relays, std::vector<int> relay_antennas,
                                 ChannelMode mode, std::uint64_t seed) {
    if (tx < 1) throw std::invalid_argument("make_config: need at least one transmitter");
    if (rx < 1) throw std::invalid_argument("make_config: need at least one receiver");
    if (relays < 0) throw std::invalid_argument("make_config: negative relay count");
    if (static_cast<int>(relay_antennas.size()) != relays)
        throw std::invalid_argument("make_config: relay antenna list length differs from relay count");
    for (int lj : relay_antennas)
        if (lj < 1) throw std::invalid_argument("make_config: every relay needs at least one antenna");
    NetworkConfig cfg;
    cfg.tx = tx;
    cfg.rx = rx;
    cfg.relay_antennas = std::move(relay_antennas);
    cfg.channel_mode = mode;
    cfg.seed = seed;
    return cfg;
}

struct Feasibility {
    bool feasible = false;
    long margin = 0;  // L - (N-1)(M-1)
};

/// Sufficient condition for alignment: L >= (N-1)(M-1).
inline Feasibility check_feasibility(const NetworkConfig& cfg) {
    Feasibility f;
    f.margin = cfg.precoder_unknowns() - cfg.alignment_equations();
    f.feasible = f.margin >= 0;
    return f;
}

/// All channel matrices over the T slots. Entries are i.i.d. unit-variance
/// circularly-symmetric complex Gaussian, so every matrix is full rank almost
/// surely; Constant mode replicates a single draw across all slots.
struct ChannelSet {
    std::vector<CMatrix> direct;                    // H(t): N x M, t = 0..T-1
    std::vector<std::vector<CMatrix>> to_relay;     // F[j][t]: L_j x M
    std::vector<std::vector<CMatrix>> from_relay;   // G[j][t]: N x L_j
};

inline ChannelSet draw_channels(const NetworkConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, Stream::Channels));
    const int t_count = cfg.channel_mode == ChannelMode::Constant ? 1 : cfg.slots();
    ChannelSet ch;
    ch.direct.reserve(t_count);
    for (int t = 0; t < t_count; ++t) ch.direct.push_back(rng.cgaussian_matrix(cfg.rx, cfg.tx));
    ch.to_relay.resize(cfg.relays());
    ch.from_relay.resize(cfg.relays());
    for (int j = 0; j < cfg.relays(); ++j)
        for (int t = 0; t < t_count; ++t)
            ch.to_relay[j].push_back(rng.cgaussian_matrix(cfg.relay_antennas[j], cfg.tx));
    for (int j = 0; j < cfg.relays(); ++j)
        for (int t = 0; t < t_count; ++t)
            ch.from_relay[j].push_back(rng.cgaussian_matrix(cfg.rx, cfg.relay_antennas[j]));
    if (cfg.channel_mode == ChannelMode::Constant) {
        for (int t = 1; t < cfg.slots(); ++t) {
            ch.direct.push_back(ch.direct[0]);
            for (int j = 0; j < cfg.relays(); ++j) {
                ch.to_relay[j].push_back(ch.to_relay[j][0]);
                ch.from_relay[j].push_back(ch.from_relay[j][0]);
            }
        }
    }
    return ch;
}

/// N x M grid of data symbols; entry (n, m) is the symbol transmitter m sends
/// for receiver n. Unit average power under both constellations.
using SymbolGrid = CMatrix;

inline SymbolGrid draw_symbols(const NetworkConfig& cfg) {
    Rng rng(derive_seed(cfg.seed, Stream::Symbols));
    SymbolGrid d(cfg.rx, cfg.tx);
    for (Index j = 0; j < d.cols(); ++j)
        for (Index i = 0; i < d.rows(); ++i) {
            if (cfg.constellation == Constellation::Qpsk) {
                const double phase = std::numbers::pi * (0.25 + 0.5 * rng.bits2());
                d(i, j) = Complex(std::cos(phase), std::sin(phase));
            } else {
                d(i, j) = rng.cgaussian();
            }
        }
    return d;
}

/// AWGN setup. Noise is unit-variance per complex dimension by default, so
/// the transmit power implied by an SNR target is simply P = SNR * variance.
struct NoiseModel {
    bool enabled = false;
    double variance = 1.0;
    double snr_db = 0.0;

    double power() const { return std::pow(10.0, snr_db / 10.0) * variance; }
};

/// One realization of every noise variate a trial can consume: receiver noise
/// for all T slots, relay noise for the N broadcast slots relays listen in.
struct NoiseRealization {
    CMatrix rx;                   // N x T, column t = z(t)
    std::vector<CMatrix> relay;   // per relay j: L_j x N, column tau = z_j(tau)
};

inline NoiseRealization draw_noise(const NetworkConfig& cfg, const NoiseModel& model) {
    Rng rng(derive_seed(cfg.seed, Stream::Noise));
    const double scale = std::sqrt(model.variance);
    NoiseRealization z;
    z.rx = scale * rng.cgaussian_matrix(cfg.rx, cfg.slots());
    z.relay.reserve(cfg.relays());
    for (int j = 0; j < cfg.relays(); ++j)
        z.relay.push_back(scale * rng.cgaussian_matrix(cfg.relay_antennas[j], cfg.rx));
    return z;
}

}  // namespace xalign
