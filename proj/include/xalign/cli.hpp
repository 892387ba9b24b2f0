// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: flag/JSON configuration, the feasibility/certify/
// sweep/dof subcommands, and deterministic file output. Exit codes are a
// stable contract: 0 pass, 1 certification failure, 2 infeasible config,
// 64 usage error, 74 I/O error.

#pragma once

#include "xalign/analysis.hpp"
#include "xalign/model.hpp"
#include "xalign/report_io.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace xalign::cli {

enum ExitCode : int {
    kPass = 0,
    kCertifyFail = 1,
    kInfeasible = 2,
    kUsage = 64,
    kIoError = 74,
};

/// Fixed default seed; never time-based, so bare invocations reproduce.
constexpr std::uint64_t kDefaultSeed = 1;

class UsageError : public std::runtime_error {
  public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct HelpRequested {
    std::string text;
};

struct Invocation {
    std::string subcommand;
    NetworkConfig config;
    CampaignParams params;
    std::string out_path;  // empty: write to stdout
};

namespace detail {

inline long parse_long(const std::string& token, const char* flag) {
    long value = 0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw UsageError(std::string(flag) + ": '" + token + "' is not an integer");
    return value;
}

inline double parse_double(const std::string& token, const char* flag) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string(flag) + ": '" + token + "' is not a number");
    }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

}  // namespace detail

/// Comma list of per-relay antenna counts, e.g. "1,2".
inline std::vector<int> parse_antenna_list(const std::string& s) {
    std::vector<int> out;
    if (s.empty()) return out;
    for (const auto& token : detail::split(s, ',')) {
        const long v = detail::parse_long(token, "--relay-antennas");
        if (v < 1) throw UsageError("--relay-antennas: counts must be >= 1");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

/// SNR grid in dB: either a single value "40" or "start:stop:step" with the
/// endpoints included, e.g. "30:60:10" -> 30, 40, 50, 60.
inline std::vector<double> parse_snr_grid(const std::string& s) {
    const auto parts = detail::split(s, ':');
    if (parts.size() == 1) return {detail::parse_double(parts[0], "--snr")};
    if (parts.size() != 3) throw UsageError("--snr: expected a value or start:stop:step");
    const double start = detail::parse_double(parts[0], "--snr");
    const double stop = detail::parse_double(parts[1], "--snr");
    const double step = detail::parse_double(parts[2], "--snr");
    if (step <= 0) throw UsageError("--snr: step must be positive");
    if (stop < start) throw UsageError("--snr: stop must not be below start");
    std::vector<double> grid;
    for (double v = start; v <= stop + 1e-9; v += step) {
        grid.push_back(v);
        if (grid.size() > 1000) throw UsageError("--snr: grid has more than 1000 points");
    }
    return grid;
}

inline Invocation parse_invocation(const std::vector<std::string>& args) {
    CLI::App app{"relay-aided interference alignment simulator"};
    app.require_subcommand(1);

    std::string antennas_raw;
    std::string channel_raw;
    std::string snr_raw;
    std::string config_path;
    int tx = 1, rx = 1, trials = 100, jobs = 0;
    std::uint64_t seed = kDefaultSeed;
    double tol = 1e-10;
    std::string out_path;

    std::vector<CLI::App*> subs;
    for (const char* name : {"feasibility", "certify", "sweep", "dof"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--tx", tx, "transmitter count M");
        sub->add_option("--rx", rx, "receiver count N");
        sub->add_option("--relay-antennas", antennas_raw, "per-relay antenna counts, comma separated");
        sub->add_option("--channel", channel_raw, "channel mode: varying (default) or constant");
        sub->add_option("--seed", seed, "master seed (default 1)");
        sub->add_option("--trials", trials, "Monte Carlo trials");
        sub->add_option("--snr", snr_raw, "SNR grid in dB: value or start:stop:step");
        sub->add_option("--jobs", jobs, "worker threads (0 = all cores)");
        sub->add_option("--out", out_path, "output file (default stdout)");
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        sub->add_option("--tol", tol, "numerical rank tolerance");
        subs.push_back(sub);
    }

    std::vector<const char*> argv;
    argv.push_back("xalign");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    CLI::App* active = nullptr;
    for (auto* sub : subs)
        if (sub->parsed()) active = sub;

    Invocation inv;
    inv.subcommand = active->get_name();

    NetworkConfig cfg;
    bool seed_from_file = false;
    if (active->count("--config") > 0) {
        std::ifstream in(config_path);
        if (!in) throw IoError("cannot open config file: " + config_path);
        OrderedJson j;
        try {
            in >> j;
            cfg = config_from_json(j);
            seed_from_file = j.contains("seed");
        } catch (const std::exception& e) {
            throw UsageError("--config: " + std::string(e.what()));
        }
    }
    try {
        if (active->count("--tx") > 0) cfg.tx = tx;
        if (active->count("--rx") > 0) cfg.rx = rx;
        if (active->count("--relay-antennas") > 0) cfg.relay_antennas = parse_antenna_list(antennas_raw);
        if (active->count("--channel") > 0) cfg.channel_mode = channel_mode_from_string(channel_raw);
        if (active->count("--seed") > 0 || !seed_from_file) cfg.seed = seed;
        inv.config = make_config(cfg.tx, cfg.rx, cfg.relays(), cfg.relay_antennas, cfg.channel_mode,
                                 cfg.seed);
        inv.config.constellation = cfg.constellation;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    if (trials < 1) throw UsageError("--trials: must be at least 1");
    inv.params.trials = trials;
    if (active->count("--snr") > 0) inv.params.snr_grid_db = parse_snr_grid(snr_raw);
    if (jobs < 0) throw UsageError("--jobs: must be >= 0");
    inv.params.jobs = jobs;
    if (tol < 0) throw UsageError("--tol: must be >= 0");
    inv.params.tol = tol;
    inv.out_path = out_path;
    return inv;
}

namespace detail {

inline void write_output(const std::string& payload, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << payload;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + out_path);
    out << payload;
    if (!out) throw IoError("write failed: " + out_path);
}

}  // namespace detail

inline int run(const Invocation& inv) {
    CampaignParams params = inv.params;
    if (params.jobs == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        params.jobs = hw == 0 ? 1 : static_cast<int>(hw);
    }
    std::cerr << "config: " << config_to_json(inv.config).dump() << "\n";

    if (inv.subcommand == "feasibility") {
        const Feasibility f = check_feasibility(inv.config);
        OrderedJson j;
        j["config"] = config_to_json(inv.config);
        j["feasible"] = f.feasible;
        j["margin"] = f.margin;
        std::string line = (f.feasible ? "feasible, margin " : "infeasible, margin ") +
                           std::to_string(f.margin) + "\n";
        if (inv.out_path.empty())
            detail::write_output(line, "");
        else
            detail::write_output(j.dump(2) + "\n", inv.out_path);
        return f.feasible ? kPass : kInfeasible;
    }

    const CampaignMode mode = inv.subcommand == "certify" ? CampaignMode::Certify
                              : inv.subcommand == "sweep" ? CampaignMode::Sweep
                                                          : CampaignMode::Dof;
    CampaignResult res;
    try {
        res = run_campaign(inv.config, mode, params);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!res.feasibility.feasible) {
        std::cerr << "infeasible config, margin " << res.feasibility.margin << "\n";
        detail::write_output(campaign_output(res), inv.out_path);
        return kInfeasible;
    }
    detail::write_output(campaign_output(res), inv.out_path);
    if (mode == CampaignMode::Certify && !res.pass()) return kCertifyFail;
    return kPass;
}

inline int run_main(int argc, const char* const* argv) {
    try {
        const Invocation inv = parse_invocation(std::vector<std::string>(argv + 1, argv + argc));
        return run(inv);
    } catch (const HelpRequested& h) {
        std::cout << h.text;
        return kPass;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 70;  // EX_SOFTWARE
    }
}

}  // namespace xalign::cli
