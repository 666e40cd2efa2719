#pragma once

// Physical constants, the flex-grid slot model, channel/link types and ASE noise.
//
// Units at interfaces: GHz, GBd, Gbit/s, dBm, km. Internally powers are watts
// and frequencies Hz.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nliconquer {

/// Raised for invalid domain input (bad modulation name, out-of-range rate, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace constants {
inline constexpr double planck = 6.62607015e-34;  // J s
inline constexpr double slot_width_ghz = 12.5;
inline constexpr int default_band_slots = 400;
inline constexpr double reference_symbol_rate_gbd = 35.0;  // 0 dBm anchor of the PSD
inline constexpr double framing_overhead = 0.40;
inline constexpr double slot_guard_factor = 1.10;
inline constexpr double min_symbol_rate_gbd = 10.0;
inline constexpr double max_symbol_rate_gbd = 90.0;
inline constexpr int min_data_rate_gbps = 100;
inline constexpr int max_data_rate_gbps = 600;
inline constexpr int data_rate_step_gbps = 50;
}  // namespace constants

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }
inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_linear(dbm); }
inline double watt_to_dbm(double w) { return linear_to_db(w / 1e-3); }

struct FiberParams {
    double alpha_db_per_km = 0.2;
    double beta2_ps2_per_km = -21.7;
    double gamma_per_w_km = 1.3;
    double nf_db = 5.0;
    double center_freq_thz = 193.41;

    /// Power attenuation in Nepers/km.
    double alpha_np_per_km() const { return alpha_db_per_km * std::numbers::ln10 / 10.0; }
    /// Dispersion in s^2/km.
    double beta2_s2_per_km() const { return beta2_ps2_per_km * 1e-24; }

    void validate() const {
        if (!(alpha_db_per_km > 0.0)) throw DomainError("fiber: alpha_db_per_km must be > 0");
        if (!(gamma_per_w_km > 0.0)) throw DomainError("fiber: gamma_per_w_km must be > 0");
        if (beta2_ps2_per_km == 0.0 || !std::isfinite(beta2_ps2_per_km))
            throw DomainError("fiber: beta2_ps2_per_km must be non-zero");
        if (!(center_freq_thz > 0.0)) throw DomainError("fiber: center_freq_thz must be > 0");
    }

    friend bool operator==(const FiberParams&, const FiberParams&) = default;
};

enum class Modulation : std::uint8_t { QPSK, QAM16, QAM32, QAM64 };

inline constexpr std::array<Modulation, 4> all_modulations = {
    Modulation::QPSK, Modulation::QAM16, Modulation::QAM32, Modulation::QAM64};

inline int bits_per_symbol(Modulation m) {
    switch (m) {
    case Modulation::QPSK: return 2;
    case Modulation::QAM16: return 4;
    case Modulation::QAM32: return 5;
    case Modulation::QAM64: return 6;
    }
    throw DomainError("invalid modulation");
}

inline std::string_view to_string(Modulation m) {
    switch (m) {
    case Modulation::QPSK: return "QPSK";
    case Modulation::QAM16: return "16QAM";
    case Modulation::QAM32: return "32QAM";
    case Modulation::QAM64: return "64QAM";
    }
    throw DomainError("invalid modulation");
}

inline Modulation parse_modulation(std::string_view name) {
    for (auto m : all_modulations)
        if (to_string(m) == name) return m;
    throw DomainError("unknown modulation format '" + std::string(name) + "'");
}

/// Dual-polarization symbol rate with fixed framing overhead.
inline double symbol_rate(int data_rate_gbps, Modulation m) {
    using namespace constants;
    if (data_rate_gbps < min_data_rate_gbps || data_rate_gbps > max_data_rate_gbps ||
        data_rate_gbps % data_rate_step_gbps != 0)
        throw DomainError("data rate " + std::to_string(data_rate_gbps) +
                          " Gbit/s outside 100..600 step 50");
    return data_rate_gbps * (1.0 + framing_overhead) / (2.0 * bits_per_symbol(m));
}

inline bool symbol_rate_in_range(double rs_gbd) {
    return rs_gbd >= constants::min_symbol_rate_gbd && rs_gbd <= constants::max_symbol_rate_gbd;
}

/// Launch power for an equalized PSD anchored at 0 dBm / 35 GBd.
inline double launch_power(double symbol_rate_gbd) {
    if (!(symbol_rate_gbd > 0.0)) throw DomainError("symbol rate must be positive");
    return 10.0 * std::log10(symbol_rate_gbd / constants::reference_symbol_rate_gbd);
}

inline int slot_footprint(double symbol_rate_gbd) {
    if (!(symbol_rate_gbd > 0.0)) throw DomainError("symbol rate must be positive");
    // The small epsilon keeps exact multiples (e.g. 12.5/1.1 * 1.1) at one slot.
    return static_cast<int>(std::ceil(symbol_rate_gbd * constants::slot_guard_factor /
                                          constants::slot_width_ghz -
                                      1e-9));
}

inline double effective_length(double alpha_db_per_km, double length_km) {
    const double a = alpha_db_per_km * std::numbers::ln10 / 10.0;
    if (a * length_km < 1e-12) return length_km;
    return -std::expm1(-a * length_km) / a;
}

inline double asymptotic_effective_length(double alpha_db_per_km) {
    return 10.0 / (alpha_db_per_km * std::numbers::ln10);
}

/// A (modulation, data rate) transceiver configuration.
struct ChannelConfig {
    Modulation modulation = Modulation::QPSK;
    int data_rate_gbps = 100;

    double symbol_rate_gbd() const { return symbol_rate(data_rate_gbps, modulation); }
    int slots() const { return slot_footprint(symbol_rate_gbd()); }

    friend bool operator==(const ChannelConfig&, const ChannelConfig&) = default;
    friend auto operator<=>(const ChannelConfig&, const ChannelConfig&) = default;
};

inline std::string to_string(const ChannelConfig& c) {
    return std::to_string(c.data_rate_gbps) + "G-" + std::string(to_string(c.modulation));
}

/// All (modulation, rate) pairs whose symbol rate lies in [10, 90] GBd,
/// ordered by modulation then rate.
inline const std::vector<ChannelConfig>& valid_configs() {
    static const std::vector<ChannelConfig> configs = [] {
        std::vector<ChannelConfig> out;
        for (auto m : all_modulations)
            for (int r = constants::min_data_rate_gbps; r <= constants::max_data_rate_gbps;
                 r += constants::data_rate_step_gbps)
                if (symbol_rate_in_range(symbol_rate(r, m))) out.push_back({m, r});
        return out;
    }();
    return configs;
}

struct Channel {
    double center_freq_ghz = 0.0;
    double symbol_rate_gbd = 0.0;
    Modulation modulation = Modulation::QPSK;
    int data_rate_gbps = 0;
    double launch_power_dbm = 0.0;
    int start_slot = 0;
    int slot_count = 1;

    double power_w() const { return dbm_to_watt(launch_power_dbm); }
    int end_slot() const { return start_slot + slot_count; }  // exclusive
    ChannelConfig config() const { return {modulation, data_rate_gbps}; }

    friend bool operator==(const Channel&, const Channel&) = default;
};

inline Channel make_channel(const ChannelConfig& cfg, int start_slot) {
    if (start_slot < 0) throw DomainError("start slot must be >= 0");
    const double rs = cfg.symbol_rate_gbd();
    if (!symbol_rate_in_range(rs))
        throw DomainError("configuration " + to_string(cfg) + " gives " + std::to_string(rs) +
                          " GBd, outside [10, 90]");
    Channel c;
    c.symbol_rate_gbd = rs;
    c.modulation = cfg.modulation;
    c.data_rate_gbps = cfg.data_rate_gbps;
    c.launch_power_dbm = launch_power(rs);
    c.start_slot = start_slot;
    c.slot_count = slot_footprint(rs);
    c.center_freq_ghz = (start_slot + c.slot_count / 2.0) * constants::slot_width_ghz;
    return c;
}

struct LinkConfig {
    double span_length_km = 80.0;
    int span_count = 1;
    std::vector<Channel> channels;
    int band_slots = constants::default_band_slots;

    int occupied_slots() const {
        int n = 0;
        for (const auto& c : channels) n += c.slot_count;
        return n;
    }

    void validate() const {
        if (span_count < 1) throw DomainError("link: span_count must be >= 1");
        if (!(span_length_km > 0.0)) throw DomainError("link: span length must be > 0");
        std::vector<int> owner(static_cast<std::size_t>(band_slots), -1);
        for (std::size_t i = 0; i < channels.size(); ++i) {
            const auto& c = channels[i];
            if (c.start_slot < 0 || c.slot_count < 1 || c.end_slot() > band_slots)
                throw DomainError("link: channel " + std::to_string(i) + " outside the band");
            for (int s = c.start_slot; s < c.end_slot(); ++s) {
                if (owner[static_cast<std::size_t>(s)] >= 0)
                    throw DomainError("link: channels " +
                                      std::to_string(owner[static_cast<std::size_t>(s)]) +
                                      " and " + std::to_string(i) + " overlap at slot " +
                                      std::to_string(s));
                owner[static_cast<std::size_t>(s)] = static_cast<int>(i);
            }
        }
    }

    friend bool operator==(const LinkConfig&, const LinkConfig&) = default;
};

/// ASE power in the given noise bandwidth; every amplifier exactly compensates
/// its span's loss.
inline double ase_noise(const FiberParams& fiber, double span_length_km, int span_count,
                        double noise_bandwidth_ghz) {
    if (span_count < 1) throw DomainError("ase: span_count must be >= 1");
    const double gain = db_to_linear(fiber.alpha_db_per_km * span_length_km);
    const double nf = db_to_linear(fiber.nf_db);
    const double photon = constants::planck * fiber.center_freq_thz * 1e12;
    const double per_span = (gain - 1.0) * nf * photon * noise_bandwidth_ghz * 1e9;
    return span_count * per_span;
}

inline double ase_noise(const FiberParams& fiber, const LinkConfig& link,
                        double noise_bandwidth_ghz) {
    return ase_noise(fiber, link.span_length_km, link.span_count, noise_bandwidth_ghz);
}

}  // namespace nliconquer
