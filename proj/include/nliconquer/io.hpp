#pragma once

// JSON converters for the domain types and small file helpers.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "phys.hpp"

namespace nliconquer {

inline void to_json(nlohmann::json& j, const FiberParams& f) {
    j = {{"alpha_db_per_km", f.alpha_db_per_km},
         {"beta2_ps2_per_km", f.beta2_ps2_per_km},
         {"gamma_per_w_km", f.gamma_per_w_km},
         {"nf_db", f.nf_db},
         {"center_freq_thz", f.center_freq_thz}};
}

inline void from_json(const nlohmann::json& j, FiberParams& f) {
    f.alpha_db_per_km = j.value("alpha_db_per_km", f.alpha_db_per_km);
    f.beta2_ps2_per_km = j.value("beta2_ps2_per_km", f.beta2_ps2_per_km);
    f.gamma_per_w_km = j.value("gamma_per_w_km", f.gamma_per_w_km);
    f.nf_db = j.value("nf_db", f.nf_db);
    f.center_freq_thz = j.value("center_freq_thz", f.center_freq_thz);
}

inline void to_json(nlohmann::json& j, const Channel& c) {
    j = {{"center_freq_ghz", c.center_freq_ghz},
         {"symbol_rate_gbd", c.symbol_rate_gbd},
         {"modulation", std::string(to_string(c.modulation))},
         {"data_rate_gbps", c.data_rate_gbps},
         {"launch_power_dbm", c.launch_power_dbm},
         {"start_slot", c.start_slot},
         {"slot_count", c.slot_count}};
}

/// Channels are rebuilt from (modulation, rate, start slot) so derived fields
/// are bit-identical to freshly generated ones.
inline void from_json(const nlohmann::json& j, Channel& c) {
    const ChannelConfig cfg{parse_modulation(j.at("modulation").get<std::string>()),
                            j.at("data_rate_gbps").get<int>()};
    c = make_channel(cfg, j.at("start_slot").get<int>());
}

inline void to_json(nlohmann::json& j, const LinkConfig& l) {
    j = {{"span_length_km", l.span_length_km},
         {"span_count", l.span_count},
         {"band_slots", l.band_slots},
         {"channels", l.channels}};
}

inline void from_json(const nlohmann::json& j, LinkConfig& l) {
    l.span_length_km = j.at("span_length_km").get<double>();
    l.span_count = j.at("span_count").get<int>();
    l.band_slots = j.value("band_slots", constants::default_band_slots);
    l.channels = j.at("channels").get<std::vector<Channel>>();
    l.validate();
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_file(path, j.dump(2) + "\n");
}

/// Splits one CSV line on commas (no quoting; all our tables are numeric).
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace nliconquer
