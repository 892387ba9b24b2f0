// SPDX-License-Identifier: Apache-2.0
//
// Serialization of configs and campaign results. The CSV column sets
// (snr_db,sum_rate,trials,std_err for sweeps; slope,theoretical,rel_error,
// fit_points for DoF fits) and the config JSON keys are stable contracts.
// Key order and number formatting are fixed so identical runs produce
// byte-identical files.

#pragma once

#include "xalign/analysis.hpp"
#include "xalign/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <string>

namespace xalign {

using OrderedJson = nlohmann::ordered_json;

inline std::string to_string(ChannelMode mode) {
    return mode == ChannelMode::Constant ? "constant" : "varying";
}

inline std::string to_string(Constellation c) {
    return c == Constellation::Qpsk ? "qpsk" : "gaussian";
}

inline ChannelMode channel_mode_from_string(const std::string& s) {
    if (s == "varying") return ChannelMode::TimeVarying;
    if (s == "constant") return ChannelMode::Constant;
    throw std::invalid_argument("channel_mode must be \"varying\" or \"constant\"");
}

inline Constellation constellation_from_string(const std::string& s) {
    if (s == "gaussian") return Constellation::Gaussian;
    if (s == "qpsk") return Constellation::Qpsk;
    throw std::invalid_argument("constellation must be \"gaussian\" or \"qpsk\"");
}

inline OrderedJson config_to_json(const NetworkConfig& cfg) {
    OrderedJson j;
    j["m"] = cfg.tx;
    j["n"] = cfg.rx;
    j["relay_antennas"] = cfg.relay_antennas;
    j["channel_mode"] = to_string(cfg.channel_mode);
    j["seed"] = cfg.seed;
    j["constellation"] = to_string(cfg.constellation);
    return j;
}

/// Parse the config document (keys m, n, relay_antennas, channel_mode, seed,
/// constellation; all optional, missing keys keep their defaults).
inline NetworkConfig config_from_json(const OrderedJson& j) {
    NetworkConfig cfg;
    if (j.contains("m")) cfg.tx = j.at("m").get<int>();
    if (j.contains("n")) cfg.rx = j.at("n").get<int>();
    if (j.contains("relay_antennas")) cfg.relay_antennas = j.at("relay_antennas").get<std::vector<int>>();
    if (j.contains("channel_mode")) cfg.channel_mode = channel_mode_from_string(j.at("channel_mode").get<std::string>());
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("constellation"))
        cfg.constellation = constellation_from_string(j.at("constellation").get<std::string>());
    NetworkConfig checked = make_config(cfg.tx, cfg.rx, static_cast<int>(cfg.relay_antennas.size()),
                                        cfg.relay_antennas, cfg.channel_mode, cfg.seed);
    checked.constellation = cfg.constellation;
    return checked;
}

inline OrderedJson report_to_json(const AlignmentReport& rep) {
    OrderedJson j;
    j["seed"] = rep.seed;
    j["feasible"] = rep.feasible;
    j["interference_rank"] = rep.interference_rank;
    j["effective_rank"] = rep.effective_rank;
    j["max_alignment_violation"] = rep.max_alignment_violation;
    j["max_decode_error"] = rep.max_decode_error;
    j["relay_power"] = rep.relay_power;
    j["pass"] = rep.pass;
    if (!rep.error.empty()) j["error"] = rep.error;
    return j;
}

inline OrderedJson campaign_to_json(const CampaignResult& res) {
    OrderedJson j;
    j["mode"] = res.mode == CampaignMode::Certify ? "certify"
                : res.mode == CampaignMode::Sweep ? "sweep"
                                                  : "dof";
    j["config"] = config_to_json(res.config);
    j["feasible"] = res.feasibility.feasible;
    j["margin"] = res.feasibility.margin;
    j["trials"] = res.trials;
    j["redraws"] = res.redraws;
    if (res.mode == CampaignMode::Certify) {
        j["passes"] = res.passes();
        j["pass_rate"] = res.reports.empty() ? 0.0
                                             : static_cast<double>(res.passes()) / res.reports.size();
        OrderedJson reports = OrderedJson::array();
        for (const auto& rep : res.reports) reports.push_back(report_to_json(rep));
        j["reports"] = reports;
    }
    j["pass"] = res.pass();
    return j;
}

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace detail

inline std::string sweep_to_csv(const CampaignResult& res) {
    std::string out = "snr_db,sum_rate,trials,std_err\n";
    for (const auto& p : res.rate_points) {
        out += detail::format_double(p.snr_db);
        out += ',';
        out += detail::format_double(p.sum_rate);
        out += ',';
        out += std::to_string(p.trials);
        out += ',';
        out += detail::format_double(p.std_err);
        out += '\n';
    }
    return out;
}

inline std::string dof_to_csv(const CampaignResult& res) {
    std::string out = "slope,theoretical,rel_error,fit_points\n";
    if (res.dof) {
        out += detail::format_double(res.dof->slope);
        out += ',';
        out += detail::format_double(res.dof->theoretical);
        out += ',';
        out += detail::format_double(res.dof->rel_error);
        out += ',';
        out += std::to_string(res.dof->fit_points);
        out += '\n';
    }
    return out;
}

/// The file (or stdout) payload for one finished campaign.
inline std::string campaign_output(const CampaignResult& res) {
    switch (res.mode) {
        case CampaignMode::Certify:
            return campaign_to_json(res).dump(2) + "\n";
        case CampaignMode::Sweep:
            return sweep_to_csv(res);
        case CampaignMode::Dof:
            return dof_to_csv(res);
    }
    return {};
}

}  // namespace xalign
