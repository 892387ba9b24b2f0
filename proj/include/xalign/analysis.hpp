// SPDX-License-Identifier: Apache-2.0
//
// Trial orchestration and the quantitative claims. certify() checks one
// channel realization end to end: interference confined to N-1 dimensions,
// effective channels full rank, alignment equalities met, noiseless decoding
// exact. Rate trials turn the same pipeline into a sum-rate figure via the
// analytic post-zero-forcing SINR (interference is nulled exactly, so only
// receiver noise plus relay-forwarded noise remains), and the DoF estimate
// is the least-squares slope of mean sum rate against log2(SNR) over the
// high-SNR half of the grid.

#pragma once

#include "xalign/aligner.hpp"
#include "xalign/linalg.hpp"
#include "xalign/model.hpp"
#include "xalign/receiver.hpp"
#include "xalign/scheme.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace xalign {

/// Certification thresholds. Solve residuals sit many orders below these.
constexpr double kAlignmentTol = 1e-8;
constexpr double kDecodeTol = 1e-8;

/// Everything measured on one noiseless realization.
struct AlignmentReport {
    NetworkConfig config;
    std::uint64_t seed = 0;
    bool feasible = false;
    std::vector<int> interference_rank;  // per receiver, want N-1
    std::vector<int> effective_rank;     // per receiver, want T
    double max_alignment_violation = 0.0;
    double max_decode_error = 0.0;
    double relay_power = 0.0;  // mean per-antenna relay transmit power
    bool pass = false;
    std::string error;  // nonempty when a numerical failure was folded in
};

namespace detail {

inline CMatrix select_columns(const CMatrix& a, const std::vector<int>& cols) {
    CMatrix out(a.rows(), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Index>(i)) = a.col(cols[i]);
    return out;
}

inline double mean_relay_power(const ChannelSet& ch, const PrecoderSet& pre, const SymbolGrid& d,
                               const NetworkConfig& cfg) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    if (cfg.relays() == 0 || sched.relay_slot_count() == 0) return 0.0;
    std::vector<std::vector<CVector>> stored(cfg.relays());
    for (int tau = 0; tau < sched.broadcast; ++tau) {
        auto heard = relay_rx(tau, ch, tx_signal(tau, d, cfg));
        for (int j = 0; j < cfg.relays(); ++j) stored[j].push_back(std::move(heard[j]));
    }
    double total = 0.0;
    long antennas = 0;
    for (int lj : cfg.relay_antennas) antennas += lj;
    for (int t = sched.broadcast; t < sched.total; ++t) {
        const auto fw = relay_tx(t, stored, pre, cfg);
        for (const auto& x : fw) total += x.squaredNorm();
    }
    return total / (static_cast<double>(antennas) * sched.relay_slot_count());
}

}  // namespace detail

/// Rank, alignment and decoding checks for one already-drawn realization.
inline AlignmentReport certify_realization(const NetworkConfig& cfg, const ChannelSet& ch,
                                           const PrecoderSet& pre, double tol = 1e-10) {
    AlignmentReport rep;
    rep.config = cfg;
    rep.seed = cfg.seed;
    rep.feasible = check_feasibility(cfg).feasible;
    const int t_count = cfg.slots();
    const ExtendedChannel ext = assemble_extended_channel(ch, pre, cfg);
    const CMatrix u = build_U(cfg);
    const SymbolGrid d = draw_symbols(cfg);
    const auto y = rx_signal_slotwise(ch, pre, d, cfg);
    bool ranks_ok = true;
    for (int n = 0; n < cfg.rx; ++n) {
        const EffectiveChannel eff = effective_channel(n, ext, u, cfg);
        const int irank =
            static_cast<int>(numerical_rank(detail::select_columns(eff.h_hat, eff.interference_cols), tol));
        const int erank = static_cast<int>(numerical_rank(eff.h_hat, tol));
        rep.interference_rank.push_back(irank);
        rep.effective_rank.push_back(erank);
        ranks_ok = ranks_ok && irank == cfg.rx - 1 && erank == t_count;
        try {
            const CVector decoded = decode(n, y[n], eff, tol);
            const CVector truth = d.row(n).transpose();
            rep.max_decode_error =
                std::max(rep.max_decode_error, (decoded - truth).norm() / truth.norm());
        } catch (const RankDeficientError& e) {
            rep.error = e.what();
            rep.max_decode_error = std::numeric_limits<double>::infinity();
        }
    }
    rep.max_alignment_violation = verify_alignment_condition(ch, pre, cfg);
    rep.relay_power = detail::mean_relay_power(ch, pre, d, cfg);
    rep.pass = rep.feasible && ranks_ok && rep.max_alignment_violation <= kAlignmentTol &&
               rep.max_decode_error <= kDecodeTol;
    return rep;
}

/// Draw a realization for the given seed, solve the precoders and certify it.
/// Never throws: infeasible configs and numerical failures come back as
/// pass = false reports.
inline AlignmentReport certify(NetworkConfig cfg, std::uint64_t seed, double tol = 1e-10) {
    cfg.seed = seed;
    AlignmentReport rep;
    rep.config = cfg;
    rep.seed = seed;
    rep.feasible = check_feasibility(cfg).feasible;
    if (!rep.feasible) return rep;
    const ChannelSet ch = draw_channels(cfg);
    try {
        const PrecoderSet pre = solve_precoders(ch, cfg);
        return certify_realization(cfg, ch, pre, tol);
    } catch (const RankDeficientError& e) {
        rep.error = e.what();
        return rep;
    } catch (const SingularMatrixError& e) {
        rep.error = e.what();
        return rep;
    }
}

struct RatePoint {
    double snr_db = 0.0;
    double sum_rate = 0.0;  // bits per channel use, averaged over trials
    int trials = 0;
    double std_err = 0.0;
};

struct DofEstimate {
    double slope = 0.0;  // fitted bits per log2(SNR), per channel use
    int fit_points = 0;
    double theoretical = 0.0;  // NM / (M + N - 1)
    double rel_error = 0.0;
};

namespace detail {

/// Sum rate at several SNR points for one channel realization. The noise
/// seen after zero-forcing at receiver n has covariance
/// sigma^2 (I_T + W_n W_n^H) with one forwarding row per relay slot, so the
/// per-symbol SINR is P over the corresponding diagonal entry.
inline std::vector<double> sum_rates_for_realization(const NetworkConfig& cfg, const ChannelSet& ch,
                                                     const PrecoderSet& pre,
                                                     const std::vector<double>& snr_grid_db) {
    const SlotSchedule sched = SlotSchedule::from_config(cfg);
    const int t_count = sched.total;
    const ExtendedChannel ext = assemble_extended_channel(ch, pre, cfg);
    const CMatrix u = build_U(cfg);
    long relay_antennas = 0;
    for (int lj : cfg.relay_antennas) relay_antennas += lj;
    const Index fwd_cols = static_cast<Index>(relay_antennas) * sched.broadcast;
    std::vector<double> noise_vars;  // one entry per (receiver, symbol)
    noise_vars.reserve(static_cast<std::size_t>(cfg.rx) * cfg.tx);
    for (int n = 0; n < cfg.rx; ++n) {
        const EffectiveChannel eff = effective_channel(n, ext, u, cfg);
        if (numerical_rank(eff.h_hat) < t_count)
            throw RankDeficientError("sum_rate: effective channel lost row rank");
        CMatrix w = CMatrix::Zero(t_count, fwd_cols);
        for (int t = sched.broadcast; t < sched.total; ++t) {
            Index offset = 0;
            for (int j = 0; j < cfg.relays(); ++j) {
                const Index lj = cfg.relay_antennas[j];
                for (int tau = 0; tau < sched.broadcast; ++tau) {
                    w.block(t, offset, 1, lj) = ch.from_relay[j][t].row(n) * pre.at(j, t, tau);
                    offset += lj;
                }
            }
        }
        const CMatrix cov = CMatrix::Identity(t_count, t_count) + w * w.adjoint();
        const CMatrix desired = detail::select_columns(eff.h_hat, eff.desired_cols);
        const CMatrix gram = eff.h_hat * eff.h_hat.adjoint();
        // rows of H_hat^+ for the desired symbols: desired^H gram^{-1}
        const CMatrix zf_rows = gram.fullPivLu().solve(desired).adjoint();
        const CMatrix zf_cov = zf_rows * cov * zf_rows.adjoint();
        for (int m = 0; m < cfg.tx; ++m) noise_vars.push_back(zf_cov(m, m).real());
    }
    std::vector<double> rates;
    rates.reserve(snr_grid_db.size());
    for (double snr_db : snr_grid_db) {
        const double power = NoiseModel{true, 1.0, snr_db}.power();
        double rate = 0.0;
        for (double v : noise_vars) rate += std::log2(1.0 + power / v);
        rates.push_back(rate / t_count);
    }
    return rates;
}

inline std::vector<double> trial_rates(NetworkConfig cfg, std::uint64_t seed,
                                       const std::vector<double>& snr_grid_db) {
    cfg.seed = seed;
    const ChannelSet ch = draw_channels(cfg);
    const PrecoderSet pre = solve_precoders(ch, cfg);
    return sum_rates_for_realization(cfg, ch, pre, snr_grid_db);
}

/// Static-result parallel loop: fn(i) writes only to slot i, so the outcome
/// is identical for any job count.
inline void parallel_for(int total, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, total));
    if (jobs <= 1) {
        for (int i = 0; i < total; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct RateTable {
    std::vector<std::vector<double>> rates;  // rates[trial][grid point]
    int redraws = 0;
};

/// One row per trial; rank-deficient draws are replaced by the next derived
/// seed (and counted) so the table is always complete.
inline RateTable compute_rate_table(const NetworkConfig& cfg, const std::vector<double>& snr_grid_db,
                                    int trials, int jobs) {
    constexpr int kMaxRedraws = 16;
    RateTable table;
    table.rates.resize(trials);
    std::vector<int> redraws(trials, 0);
    parallel_for(trials, jobs, [&](int i) {
        std::uint64_t seed = derive_seed(cfg.seed, Stream::Trial, static_cast<std::uint64_t>(i));
        for (int attempt = 0;; ++attempt) {
            try {
                table.rates[i] = trial_rates(cfg, seed, snr_grid_db);
                break;
            } catch (const RankDeficientError&) {
                if (attempt >= kMaxRedraws) throw;
                ++redraws[i];
                seed = derive_seed(seed, Stream::Redraw, static_cast<std::uint64_t>(attempt));
            }
        }
    });
    for (int r : redraws) table.redraws += r;
    return table;
}

inline RatePoint summarize_point(const RateTable& table, const std::vector<double>& grid, int point) {
    RatePoint p;
    p.snr_db = grid[point];
    p.trials = static_cast<int>(table.rates.size());
    double sum = 0.0;
    for (const auto& row : table.rates) sum += row[point];
    p.sum_rate = sum / p.trials;
    double sq = 0.0;
    for (const auto& row : table.rates) sq += (row[point] - p.sum_rate) * (row[point] - p.sum_rate);
    p.std_err = p.trials > 1 ? std::sqrt(sq / (p.trials - 1.0) / p.trials) : 0.0;
    return p;
}

inline DofEstimate fit_dof(const NetworkConfig& cfg, const std::vector<RatePoint>& points) {
    const std::size_t window = points.size() / 2;
    const std::size_t fit_count = points.size() - window;
    if (fit_count < 2) throw std::invalid_argument("estimate_dof: need >= 2 grid points in the fit window");
    const double log2_per_db = 1.0 / (10.0 * std::log10(2.0));
    double mx = 0.0, my = 0.0;
    for (std::size_t i = window; i < points.size(); ++i) {
        mx += points[i].snr_db * log2_per_db;
        my += points[i].sum_rate;
    }
    mx /= fit_count;
    my /= fit_count;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = window; i < points.size(); ++i) {
        const double dx = points[i].snr_db * log2_per_db - mx;
        sxx += dx * dx;
        sxy += dx * (points[i].sum_rate - my);
    }
    DofEstimate est;
    est.slope = sxy / sxx;
    est.fit_points = static_cast<int>(fit_count);
    est.theoretical = static_cast<double>(cfg.rx) * cfg.tx / cfg.slots();
    est.rel_error = std::abs(est.slope - est.theoretical) / est.theoretical;
    return est;
}

}  // namespace detail

/// Sum rate (bits per channel use) of one seeded realization at one SNR.
/// Throws InfeasibleConfigError / RankDeficientError; campaign drivers redraw.
inline double sum_rate_trial(const NetworkConfig& cfg, std::uint64_t seed, double snr_db) {
    return detail::trial_rates(cfg, seed, {snr_db})[0];
}

/// Monte Carlo DoF slope over the given SNR grid (dB, ascending). Trials
/// share seeds across grid points, so channel constants cancel in the fit.
inline DofEstimate estimate_dof(const NetworkConfig& cfg, std::vector<double> snr_grid_db, int trials,
                                std::uint64_t seed, int jobs = 1) {
    if (trials < 1) throw std::invalid_argument("estimate_dof: need at least one trial");
    std::sort(snr_grid_db.begin(), snr_grid_db.end());
    if (snr_grid_db.size() - snr_grid_db.size() / 2 < 2)
        throw std::invalid_argument("estimate_dof: need >= 2 grid points in the fit window");
    NetworkConfig seeded = cfg;
    seeded.seed = seed;
    const auto table = detail::compute_rate_table(seeded, snr_grid_db, trials, jobs);
    std::vector<RatePoint> points;
    for (std::size_t p = 0; p < snr_grid_db.size(); ++p)
        points.push_back(detail::summarize_point(table, snr_grid_db, static_cast<int>(p)));
    return detail::fit_dof(cfg, points);
}

enum class CampaignMode { Certify, Sweep, Dof };

struct CampaignParams {
    int trials = 100;
    std::vector<double> snr_grid_db = {30.0, 40.0, 50.0, 60.0};
    int jobs = 1;
    double tol = 1e-10;
};

struct CampaignResult {
    CampaignMode mode = CampaignMode::Certify;
    NetworkConfig config;
    Feasibility feasibility;
    int trials = 0;
    int redraws = 0;
    std::vector<AlignmentReport> reports;   // certify mode
    std::vector<RatePoint> rate_points;     // sweep mode
    std::optional<DofEstimate> dof;         // dof mode

    int passes() const {
        int n = 0;
        for (const auto& r : reports) n += r.pass ? 1 : 0;
        return n;
    }

    bool pass() const {
        if (!feasibility.feasible) return false;
        if (mode == CampaignMode::Certify) return passes() == static_cast<int>(reports.size());
        return true;
    }
};

/// Deterministic given (config, params): per-trial seeds derive from the
/// config seed, aggregation runs in trial order, and infeasible configs
/// short-circuit before any solver call.
inline CampaignResult run_campaign(const NetworkConfig& cfg, CampaignMode mode,
                                   const CampaignParams& params) {
    if (params.trials < 1) throw std::invalid_argument("run_campaign: need at least one trial");
    CampaignResult res;
    res.mode = mode;
    res.config = cfg;
    res.feasibility = check_feasibility(cfg);
    res.trials = params.trials;
    if (!res.feasibility.feasible) return res;
    if (mode == CampaignMode::Certify) {
        constexpr int kMaxRedraws = 16;
        res.reports.resize(params.trials);
        std::vector<int> redraws(params.trials, 0);
        detail::parallel_for(params.trials, params.jobs, [&](int i) {
            std::uint64_t seed = derive_seed(cfg.seed, Stream::Trial, static_cast<std::uint64_t>(i));
            AlignmentReport rep = certify(cfg, seed, params.tol);
            while (!rep.error.empty() && redraws[i] < kMaxRedraws) {
                seed = derive_seed(seed, Stream::Redraw, static_cast<std::uint64_t>(redraws[i]));
                ++redraws[i];
                rep = certify(cfg, seed, params.tol);
            }
            res.reports[i] = std::move(rep);
        });
        for (int r : redraws) res.redraws += r;
        return res;
    }
    std::vector<double> grid = params.snr_grid_db;
    std::sort(grid.begin(), grid.end());
    if (grid.empty()) throw std::invalid_argument("run_campaign: empty SNR grid");
    if (mode == CampaignMode::Dof && grid.size() - grid.size() / 2 < 2)
        throw std::invalid_argument("run_campaign: dof needs >= 2 grid points in the fit window");
    const auto table = detail::compute_rate_table(cfg, grid, params.trials, params.jobs);
    res.redraws = table.redraws;
    for (std::size_t p = 0; p < grid.size(); ++p)
        res.rate_points.push_back(detail::summarize_point(table, grid, static_cast<int>(p)));
    if (mode == CampaignMode::Dof) res.dof = detail::fit_dof(cfg, res.rate_points);
    return res;
}

}  // namespace xalign
