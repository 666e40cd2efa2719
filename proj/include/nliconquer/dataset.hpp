#pragma once

// Training corpus: random WDM links over the span/rate parameter grid, the
// 25-element SCI-based feature vector and the eta_NLI label.
//
// Feature layout (index: meaning)
//   0        CUT SCI coefficient, dB re 1/W^2, whole link
//   1..10    SCI of the 10 nearest neighbours (by |df|), dB, whole link
//   11..20   signed spacing of those neighbours to the CUT, GHz
//   21       CUT launch power, dBm
//   22       number of channels on the link
//   23       span length, km
//   24       span count
// Missing neighbours are padded with -100 dB / 6000 GHz.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "io.hpp"
#include "nli.hpp"
#include "parallel.hpp"
#include "phys.hpp"

namespace nliconquer {

inline constexpr std::size_t feature_count = 25;
inline constexpr std::size_t neighbor_count = 10;
inline constexpr double missing_sci_db = -100.0;
inline constexpr double missing_spacing_ghz = 6000.0;
inline constexpr int dataset_format_version = 1;

using FeatureVector = std::array<double, feature_count>;

namespace feature {
inline constexpr std::size_t cut_sci = 0;
inline constexpr std::size_t neighbor_sci = 1;
inline constexpr std::size_t neighbor_spacing = 11;
inline constexpr std::size_t cut_power = 21;
inline constexpr std::size_t channel_count = 22;
inline constexpr std::size_t span_length = 23;
inline constexpr std::size_t span_count = 24;
}  // namespace feature

inline const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n{"cut_sci_db"};
        for (std::size_t i = 1; i <= neighbor_count; ++i) n.push_back(fmt::format("nb{}_sci_db", i));
        for (std::size_t i = 1; i <= neighbor_count; ++i) n.push_back(fmt::format("nb{}_df_ghz", i));
        n.insert(n.end(), {"cut_power_dbm", "channel_count", "span_length_km", "span_count"});
        return n;
    }();
    return names;
}

struct FeatureRow {
    FeatureVector features{};
    double label_eta_db = 0.0;
    int link_id = 0;
    int cut_index = 0;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct GenerationParams {
    std::size_t link_count = 500;
    std::uint64_t seed = 42;
    double fill_min = 0.75;
    double fill_max = 0.95;
    int band_slots = constants::default_band_slots;
    std::vector<double> span_lengths_km{60.0, 80.0, 100.0, 120.0};
    int span_count_min = 1;
    int span_count_max = 50;
    double train_fraction = 0.7;
    double val_fraction = 0.1;

    void validate() const {
        if (link_count == 0) throw DomainError("generation: link_count must be > 0");
        if (!(fill_min > 0.0 && fill_min <= fill_max && fill_max <= 1.0))
            throw DomainError("generation: need 0 < fill_min <= fill_max <= 1");
        if (span_lengths_km.empty()) throw DomainError("generation: no span lengths");
        if (span_count_min < 1 || span_count_max < span_count_min)
            throw DomainError("generation: bad span count range");
        if (train_fraction < 0 || val_fraction < 0 || train_fraction + val_fraction > 1.0)
            throw DomainError("generation: bad split fractions");
    }
};

inline void to_json(nlohmann::json& j, const GenerationParams& g) {
    j = {{"link_count", g.link_count},         {"seed", g.seed},
         {"fill_min", g.fill_min},             {"fill_max", g.fill_max},
         {"band_slots", g.band_slots},         {"span_lengths_km", g.span_lengths_km},
         {"span_count_min", g.span_count_min}, {"span_count_max", g.span_count_max},
         {"train_fraction", g.train_fraction}, {"val_fraction", g.val_fraction}};
}

inline void from_json(const nlohmann::json& j, GenerationParams& g) {
    g.link_count = j.value("link_count", g.link_count);
    g.seed = j.value("seed", g.seed);
    g.fill_min = j.value("fill_min", g.fill_min);
    g.fill_max = j.value("fill_max", g.fill_max);
    g.band_slots = j.value("band_slots", g.band_slots);
    g.span_lengths_km = j.value("span_lengths_km", g.span_lengths_km);
    g.span_count_min = j.value("span_count_min", g.span_count_min);
    g.span_count_max = j.value("span_count_max", g.span_count_max);
    g.train_fraction = j.value("train_fraction", g.train_fraction);
    g.val_fraction = j.value("val_fraction", g.val_fraction);
}

/// Per-link generator seeded with seed XOR link_id.
inline std::mt19937_64 link_rng(std::uint64_t seed, std::uint64_t link_id) {
    return std::mt19937_64(seed ^ link_id);
}

/// Draws a link from the parameter grid. Channels are drawn uniformly from the
/// valid (modulation, rate) set until the next one would overshoot the fill
/// target; the free slots are then spread over the gaps between channels as a
/// uniformly random composition, so any fill up to 100% is reachable.
template <class Rng>
LinkConfig sample_link_config(Rng& rng, const GenerationParams& p = {}) {
    const auto& configs = valid_configs();
    LinkConfig link;
    link.band_slots = p.band_slots;
    std::uniform_int_distribution<std::size_t> pick_len(0, p.span_lengths_km.size() - 1);
    link.span_length_km = p.span_lengths_km[pick_len(rng)];
    link.span_count = std::uniform_int_distribution<int>(p.span_count_min, p.span_count_max)(rng);
    const double fill = std::uniform_real_distribution<double>(p.fill_min, p.fill_max)(rng);
    const int target = static_cast<int>(std::floor(fill * p.band_slots));

    std::uniform_int_distribution<std::size_t> pick_cfg(0, configs.size() - 1);
    std::vector<ChannelConfig> drawn;
    int used = 0;
    while (true) {
        const auto& cfg = configs[pick_cfg(rng)];
        if (used + cfg.slots() > target) break;
        drawn.push_back(cfg);
        used += cfg.slots();
    }

    // Stars and bars: choose which of (free + n) positions hold channels.
    const int free = p.band_slots - used;
    const int n = static_cast<int>(drawn.size());
    std::vector<int> positions(static_cast<std::size_t>(free + n));
    std::iota(positions.begin(), positions.end(), 0);
    std::vector<int> chosen;
    chosen.reserve(drawn.size());
    std::sample(positions.begin(), positions.end(), std::back_inserter(chosen), n, rng);
    int slot = 0, prev = -1;
    for (std::size_t i = 0; i < drawn.size(); ++i) {
        slot += chosen[i] - prev - 1;  // gap before this channel
        prev = chosen[i];
        link.channels.push_back(make_channel(drawn[i], slot));
        slot += drawn[i].slots();
    }
    return link;
}

/// Index order of the CUT's neighbours: ascending |df|, ties to the lower frequency.
inline std::vector<std::size_t> neighbor_order(const LinkConfig& link, std::size_t cut_index) {
    const double fc = link.channels[cut_index].center_freq_ghz;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < link.channels.size(); ++k)
        if (k != cut_index) idx.push_back(k);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double da = std::abs(link.channels[a].center_freq_ghz - fc);
        const double db = std::abs(link.channels[b].center_freq_ghz - fc);
        if (da != db) return da < db;
        return link.channels[a].center_freq_ghz < link.channels[b].center_freq_ghz;
    });
    return idx;
}

/// Whole-link SCI coefficient of a channel in dB re 1/W^2.
inline double link_sci_db(const OracleCoefficients& coeffs, const LinkConfig& link,
                          const Channel& ch) {
    return linear_to_db(coeffs.sci(ch.symbol_rate_gbd, link.span_length_km)) +
           linear_to_db(static_cast<double>(link.span_count));
}

inline FeatureVector extract_features(const LinkConfig& link, std::size_t cut_index,
                                      const OracleCoefficients& coeffs) {
    if (cut_index >= link.channels.size())
        throw DomainError("extract_features: cut index " + std::to_string(cut_index) +
                          " out of range");
    const auto& cut = link.channels[cut_index];
    FeatureVector f{};
    f[feature::cut_sci] = link_sci_db(coeffs, link, cut);
    const auto order = neighbor_order(link, cut_index);
    for (std::size_t i = 0; i < neighbor_count; ++i) {
        if (i < order.size()) {
            const auto& nb = link.channels[order[i]];
            f[feature::neighbor_sci + i] = link_sci_db(coeffs, link, nb);
            f[feature::neighbor_spacing + i] = nb.center_freq_ghz - cut.center_freq_ghz;
        } else {
            f[feature::neighbor_sci + i] = missing_sci_db;
            f[feature::neighbor_spacing + i] = missing_spacing_ghz;
        }
    }
    f[feature::cut_power] = cut.launch_power_dbm;
    f[feature::channel_count] = static_cast<double>(link.channels.size());
    f[feature::span_length] = link.span_length_km;
    f[feature::span_count] = link.span_count;
    return f;
}

/// eta_NLI of the CUT in dB re 1/W^2: oracle NLI power over P_cut^3.
inline double label(const LinkConfig& link, std::size_t cut_index,
                    const OracleCoefficients& coeffs) {
    const double p = link.channels.at(cut_index).power_w();
    return linear_to_db(oracle_nli(coeffs, link, cut_index) / (p * p * p));
}

enum class Split : std::uint8_t { Train, Val, Test };

inline std::string_view to_string(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    }
    return "?";
}

/// Assigns whole links to splits: a seeded shuffle of link ids, then the first
/// round(train * n) to train and the next round(val * n) to validation.
inline std::vector<Split> assign_splits(const GenerationParams& p) {
    const std::size_t n = p.link_count;
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(p.seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(p.train_fraction * n));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(p.val_fraction * n)));
    std::vector<Split> out(n, Split::Test);
    for (std::size_t i = 0; i < n_train; ++i) out[ids[i]] = Split::Train;
    for (std::size_t i = n_train; i < n_train + n_val; ++i) out[ids[i]] = Split::Val;
    return out;
}

struct Dataset {
    GenerationParams params;
    FiberParams fiber;
    std::vector<LinkConfig> links;
    std::vector<Split> link_split;
    std::vector<FeatureRow> train, val, test;

    const std::vector<FeatureRow>& rows(Split s) const {
        return s == Split::Train ? train : s == Split::Val ? val : test;
    }
};

/// Generates links, features and labels. Output depends only on (params, fiber).
inline Dataset generate(const GenerationParams& params, const OracleCoefficients& coeffs,
                        unsigned threads = 1) {
    params.validate();
    Dataset ds;
    ds.params = params;
    ds.fiber = coeffs.fiber();
    ds.links.resize(params.link_count);
    ds.link_split = assign_splits(params);
    std::vector<std::vector<FeatureRow>> per_link(params.link_count);
    parallel_for(params.link_count, threads, [&](std::size_t id) {
        auto rng = link_rng(params.seed, id);
        LinkConfig link = sample_link_config(rng, params);
        std::vector<FeatureRow> rows;
        rows.reserve(link.channels.size());
        for (std::size_t c = 0; c < link.channels.size(); ++c) {
            FeatureRow r;
            r.features = extract_features(link, c, coeffs);
            r.label_eta_db = label(link, c, coeffs);
            r.link_id = static_cast<int>(id);
            r.cut_index = static_cast<int>(c);
            rows.push_back(r);
        }
        ds.links[id] = std::move(link);
        per_link[id] = std::move(rows);
    });
    for (std::size_t id = 0; id < params.link_count; ++id) {
        auto& dst = ds.link_split[id] == Split::Train ? ds.train
                    : ds.link_split[id] == Split::Val ? ds.val
                                                      : ds.test;
        dst.insert(dst.end(), per_link[id].begin(), per_link[id].end());
    }
    return ds;
}

// ---- files -------------------------------------------------------------

inline std::string csv_header() {
    std::string h;
    for (std::size_t i = 0; i < feature_count; ++i) h += fmt::format("f{},", i);
    return h + "label,link_id,cut_index\n";
}

inline std::string rows_to_csv(const std::vector<FeatureRow>& rows) {
    std::string out = csv_header();
    for (const auto& r : rows) {
        for (double v : r.features) out += fmt::format("{},", v);
        out += fmt::format("{},{},{}\n", r.label_eta_db, r.link_id, r.cut_index);
    }
    return out;
}

inline std::vector<FeatureRow> read_rows_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    if (line + "\n" != csv_header()) throw std::runtime_error(path.string() + ": unexpected header");
    std::vector<FeatureRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != feature_count + 3)
            throw std::runtime_error(fmt::format("{}:{}: expected {} fields, got {}",
                                                 path.string(), lineno, feature_count + 3,
                                                 cells.size()));
        FeatureRow r;
        try {
            for (std::size_t i = 0; i < feature_count; ++i) r.features[i] = std::stod(cells[i]);
            r.label_eta_db = std::stod(cells[feature_count]);
            r.link_id = std::stoi(cells[feature_count + 1]);
            r.cut_index = std::stoi(cells[feature_count + 2]);
        } catch (const std::exception&) {
            throw std::runtime_error(fmt::format("{}:{}: malformed number", path.string(), lineno));
        }
        rows.push_back(r);
    }
    return rows;
}

inline nlohmann::json manifest(const Dataset& ds) {
    return {{"format_version", dataset_format_version},
            {"seed", ds.params.seed},
            {"link_config_count", ds.links.size()},
            {"rows", {{"train", ds.train.size()}, {"val", ds.val.size()}, {"test", ds.test.size()}}},
            {"generation", ds.params},
            {"fiber", ds.fiber},
            {"sci_feature_scope", "full_link"},
            {"feature_names", feature_names()}};
}

/// Writes train/val/test CSV, links.jsonl (one LinkConfig per line, by id) and manifest.json.
inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "train.csv", rows_to_csv(ds.train));
    write_file(dir / "val.csv", rows_to_csv(ds.val));
    write_file(dir / "test.csv", rows_to_csv(ds.test));
    std::string links;
    for (std::size_t id = 0; id < ds.links.size(); ++id) {
        nlohmann::json j = ds.links[id];
        j["link_id"] = id;
        j["split"] = std::string(to_string(ds.link_split[id]));
        links += j.dump() + "\n";
    }
    write_file(dir / "links.jsonl", links);
    write_json(dir / "manifest.json", manifest(ds));
}

inline std::vector<LinkConfig> read_links(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<LinkConfig> links;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        const auto id = j.at("link_id").get<std::size_t>();
        if (id != links.size()) throw std::runtime_error(path.string() + ": link ids not dense");
        links.push_back(j.get<LinkConfig>());
    }
    return links;
}

/// Loads a dataset directory written by write_dataset.
inline Dataset read_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    const auto m = read_json(dir / "manifest.json");
    if (m.at("format_version").get<int>() != dataset_format_version)
        throw std::runtime_error("dataset format version mismatch in " + dir.string());
    ds.params = m.at("generation").get<GenerationParams>();
    ds.fiber = m.at("fiber").get<FiberParams>();
    ds.links = read_links(dir / "links.jsonl");
    ds.link_split = assign_splits(ds.params);
    ds.train = read_rows_csv(dir / "train.csv");
    ds.val = read_rows_csv(dir / "val.csv");
    ds.test = read_rows_csv(dir / "test.csv");
    const auto& rows = m.at("rows");
    if (rows.at("train").get<std::size_t>() != ds.train.size() ||
        rows.at("val").get<std::size_t>() != ds.val.size() ||
        rows.at("test").get<std::size_t>() != ds.test.size())
        throw std::runtime_error("dataset row counts do not match manifest in " + dir.string());
    return ds;
}

}  // namespace nliconquer
