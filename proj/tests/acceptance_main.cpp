// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints one [PASS]/[FAIL] line;
// the binary exits nonzero if any criterion fails. argv[1] must point at the
// xalign CLI binary (used for the exit-code and byte-determinism checks).

#include "xalign/xalign.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace xalign;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    if (!pass) ++g_failures;
}

struct AcceptanceConfig {
    int tx;
    int rx;
    std::vector<int> antennas;
};

const std::vector<AcceptanceConfig> kMatrix = {
    {2, 2, {1}}, {2, 3, {2}}, {3, 2, {2}}, {3, 3, {2}}, {3, 3, {1, 1, 1, 1}}, {4, 2, {1, 2}},
};

std::string config_name(const AcceptanceConfig& c, ChannelMode mode) {
    std::ostringstream os;
    os << "(" << c.tx << "," << c.rx << ",[";
    for (std::size_t i = 0; i < c.antennas.size(); ++i) os << (i ? "," : "") << c.antennas[i];
    os << "]," << (mode == ChannelMode::Constant ? "constant" : "varying") << ")";
    return os.str();
}

NetworkConfig build(const AcceptanceConfig& c, ChannelMode mode, std::uint64_t seed) {
    return make_config(c.tx, c.rx, static_cast<int>(c.antennas.size()), c.antennas, mode, seed);
}

int run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// C1 + C6 + C7: 100-seed noiseless certification across the config matrix,
// both channel modes.
void criterion_alignment_certification() {
    int runs = 0, passes = 0;
    std::ostringstream failures;
    for (const auto& c : kMatrix) {
        for (auto mode : {ChannelMode::TimeVarying, ChannelMode::Constant}) {
            const auto cfg = build(c, mode, 0xACCE5500 + runs);
            CampaignParams params;
            params.trials = 100;
            params.jobs = 2;
            const auto res = run_campaign(cfg, CampaignMode::Certify, params);
            runs += 1;
            passes += res.passes() == 100 && res.redraws == 0 ? 1 : 0;
            if (res.passes() != 100) failures << " " << config_name(c, mode) << "=" << res.passes();
        }
    }
    std::ostringstream detail;
    detail << passes << "/" << runs
           << " config/mode cells at 100/100 trials (ranks, alignment mismatch <= 1e-8, decode error <= 1e-8)";
    if (passes != runs) detail << "; failing cells:" << failures.str();
    report("C1 alignment certification", passes == runs, detail.str());
}

void criterion_infeasibility(const std::string& cli) {
    bool ok = true;
    std::ostringstream detail;
    for (const auto& c : {AcceptanceConfig{3, 3, {1}}, AcceptanceConfig{2, 3, {1}}}) {
        const auto cfg = build(c, ChannelMode::TimeVarying, 1);
        const auto f = check_feasibility(cfg);
        ok = ok && !f.feasible;
        // the solver itself refuses, and the campaign never reaches it
        try {
            solve_precoders(draw_channels(cfg), cfg);
            ok = false;
        } catch (const InfeasibleConfigError&) {
        }
        CampaignParams params;
        params.trials = 3;
        const auto res = run_campaign(cfg, CampaignMode::Certify, params);
        ok = ok && !res.feasibility.feasible && res.reports.empty();
    }
    const int feas_code = run_cli(cli, "feasibility --tx 3 --rx 3 --relay-antennas 1");
    const int cert_code = run_cli(cli, "certify --tx 2 --rx 3 --relay-antennas 1 --trials 2");
    ok = ok && feas_code == 2 && cert_code == 2;
    detail << "(3,3,[1]) and (2,3,[1]) rejected, solver untouched, CLI exit codes " << feas_code
           << "/" << cert_code;
    report("C2 infeasibility detection", ok, detail.str());
}

void criterion_negative_control() {
    int detected = 0;
    const int trials = 100;
    for (int i = 0; i < trials; ++i) {
        auto cfg = build(kMatrix[0], ChannelMode::TimeVarying, derive_seed(0xBAD, Stream::Trial, i));
        const auto ch = draw_channels(cfg);
        const auto pre = random_precoders(cfg, derive_seed(cfg.seed, Stream::Precoders, i));
        const auto rep = certify_realization(cfg, ch, pre);
        bool leak = rep.max_decode_error > 1e-2;
        for (int r : rep.interference_rank) leak = leak || r > cfg.rx - 1;
        detected += leak ? 1 : 0;
    }
    std::ostringstream detail;
    detail << detected << "/" << trials << " random-precoder trials rejected (need >= 99)";
    report("C3 negative control", detected >= 99, detail.str());
}

void criterion_dof_slope() {
    bool ok = true;
    std::ostringstream detail;
    const std::vector<double> grid = {30.0, 40.0, 50.0, 60.0};
    struct Case {
        AcceptanceConfig cfg;
        double want;
    };
    for (const auto& c : {Case{{2, 2, {1}}, 4.0 / 3.0}, Case{{2, 3, {2}}, 1.5}}) {
        const auto cfg = build(c.cfg, ChannelMode::TimeVarying, 0xD0F);
        const auto est = estimate_dof(cfg, grid, 200, cfg.seed, 2);
        ok = ok && est.rel_error <= 0.05;
        detail << config_name(c.cfg, ChannelMode::TimeVarying) << " slope " << est.slope
               << " vs " << c.want << " (rel " << est.rel_error << ") ";
    }
    report("C4 DoF slope within 5%", ok, detail.str());
}

void criterion_oracle_equivalence() {
    int checked = 0, agreed = 0;
    for (const auto& c : kMatrix) {
        for (int i = 0; i < 100; ++i) {
            const auto cfg = build(c, ChannelMode::TimeVarying, derive_seed(0x05AC1E, Stream::Trial,
                                                                            checked));
            const auto ch = draw_channels(cfg);
            const auto pre = solve_precoders(ch, cfg);
            const SymbolGrid d = draw_symbols(cfg);
            const auto slotwise = rx_signal_slotwise(ch, pre, d, cfg);
            const auto ext = assemble_extended_channel(ch, pre, cfg);
            CVector x(static_cast<Index>(cfg.slots()) * cfg.tx);
            for (int t = 0; t < cfg.slots(); ++t)
                x.segment(static_cast<Index>(t) * cfg.tx, cfg.tx) = tx_signal(t, d, cfg);
            const CVector y = ext.h_tilde * x;
            double err = 0.0;
            for (int n = 0; n < cfg.rx; ++n)
                for (int t = 0; t < cfg.slots(); ++t)
                    err = std::max(err,
                                   std::abs(slotwise[n](t) - y(static_cast<Index>(t) * cfg.rx + n)));
            checked += 1;
            agreed += err <= 1e-12 * y.norm() ? 1 : 0;
        }
    }
    std::ostringstream detail;
    detail << agreed << "/" << checked << " random instances agree to 1e-12 relative";
    report("C5 slot-wise vs extended-matrix oracle", agreed == checked, detail.str());
}

void criterion_constant_channel_parity() {
    bool ok = true;
    std::ostringstream detail;
    // certification in constant mode is already in C1; re-establish here on
    // fresh seeds, then the DoF slopes and the per-slot precoder distinctness
    for (const auto& c : {kMatrix[0], kMatrix[1]}) {
        const auto cfg = build(c, ChannelMode::Constant, 0xC0157);
        CampaignParams params;
        params.trials = 100;
        params.jobs = 2;
        const auto res = run_campaign(cfg, CampaignMode::Certify, params);
        ok = ok && res.passes() == 100;
        const auto est = estimate_dof(cfg, {30.0, 40.0, 50.0, 60.0}, 200, cfg.seed, 2);
        ok = ok && est.rel_error <= 0.05;
        detail << config_name(c, ChannelMode::Constant) << " cert " << res.passes() << "/100, slope rel "
               << est.rel_error << " ";
    }
    int distinct_pairs = 0, pairs = 0;
    for (const auto& c : kMatrix) {
        if (c.tx < 3) continue;  // need at least two relay slots
        const auto cfg = build(c, ChannelMode::Constant, 0xC0158);
        const auto ch = draw_channels(cfg);
        const auto pre = solve_precoders(ch, cfg);
        const auto sched = SlotSchedule::from_config(cfg);
        for (int tau = 0; tau < sched.broadcast; ++tau) {
            pairs += 1;
            const double diff =
                (pre.at(0, sched.broadcast, tau) - pre.at(0, sched.broadcast + 1, tau)).norm();
            distinct_pairs += diff > 1e-8 ? 1 : 0;
        }
    }
    ok = ok && distinct_pairs == pairs;
    detail << "; distinct precoders across t for " << distinct_pairs << "/" << pairs << " (M>=3, fixed tau)";
    report("C6 constant-channel parity", ok, detail.str());
}

void criterion_asymmetric_relays() {
    // (3,3,[1,1,1,1]) is exactly determined, (4,2,[1,2]) is underdetermined;
    // both must certify on 100 fresh seeds
    bool ok = true;
    std::ostringstream detail;
    const auto determined = build(kMatrix[4], ChannelMode::TimeVarying, 0xA57);
    ok = ok && determined.precoder_unknowns() == determined.alignment_equations();
    const auto min_norm = build(kMatrix[5], ChannelMode::TimeVarying, 0xA58);
    ok = ok && min_norm.precoder_unknowns() > min_norm.alignment_equations();
    for (const auto& cfg : {determined, min_norm}) {
        CampaignParams params;
        params.trials = 100;
        params.jobs = 2;
        const auto res = run_campaign(cfg, CampaignMode::Certify, params);
        ok = ok && res.passes() == 100;
        detail << "(" << cfg.tx << "," << cfg.rx << ") " << res.passes() << "/100 ";
    }
    detail << "(determined and min-norm branches)";
    report("C7 asymmetric relay configurations", ok, detail.str());
}

void criterion_determinism(const std::string& cli) {
    const auto dir = fs::temp_directory_path() / "xalign_acceptance";
    fs::create_directories(dir);
    bool ok = true;
    std::ostringstream detail;
    struct Invocation {
        std::string name;
        std::string args;
    };
    const std::vector<Invocation> cases = {
        {"certify", "certify --tx 2 --rx 2 --relay-antennas 1 --trials 40 --channel constant --seed 7"},
        {"sweep", "sweep --tx 2 --rx 2 --relay-antennas 1 --trials 30 --snr 30:60:10 --seed 5"},
        {"dof", "dof --tx 2 --rx 3 --relay-antennas 2 --trials 50 --snr 30:60:10 --seed 9"},
    };
    for (const auto& c : cases) {
        const auto a = dir / (c.name + "_a");
        const auto b = dir / (c.name + "_b");
        const int code_a = run_cli(cli, c.args + " --jobs 1 --out " + a.string());
        const int code_b = run_cli(cli, c.args + " --jobs 2 --out " + b.string());
        const bool same = code_a == 0 && code_a == code_b && !slurp(a).empty() && slurp(a) == slurp(b);
        ok = ok && same;
        detail << c.name << (same ? " identical " : " DIFFERS ");
        const int code_c = run_cli(cli, c.args + " --jobs 2 --out " + a.string());
        ok = ok && code_c == 0 && slurp(a) == slurp(b);
    }
    detail << "across repeats and --jobs 1/2";
    report("C8 byte-identical outputs", ok, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: xalign_acceptance <path-to-xalign-cli>\n";
        return 2;
    }
    const std::string cli = argv[1];
    criterion_alignment_certification();
    criterion_infeasibility(cli);
    criterion_negative_control();
    criterion_dof_slope();
    criterion_oracle_equivalence();
    criterion_constant_channel_parity();
    criterion_asymmetric_relays();
    criterion_determinism(cli);
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance criteria passed\n";
    return 0;
}
