#pragma once

// Run configuration: TOML files merged in order (NLICONQUER_CONFIG first,
// then each --config), command-line flags last.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <toml.hpp>

#include "dataset.hpp"
#include "gbm.hpp"
#include "io.hpp"
#include "phys.hpp"
#include "sci_store.hpp"

namespace nliconquer {

inline constexpr const char* config_env_var = "NLICONQUER_CONFIG";

struct RunConfig {
    std::uint64_t seed = 42;
    unsigned threads = 0;  // 0: hardware concurrency; never affects results
    FiberParams fiber;
    GenerationParams generation;
    gbm::GbmParams gbm;
    std::filesystem::path store_path = "data/sci_store.jsonl";
    std::filesystem::path dataset_dir = "out/dataset";
    std::filesystem::path model_path = "out/model/model.json";
    std::filesystem::path report_dir = "out/reports";

    /// Pushes the global seed into every seeded component.
    void apply_seed(std::uint64_t s) {
        seed = s;
        generation.seed = s;
        gbm.seed = s;
    }
};

namespace config_detail {

template <class T>
void read(const toml::table& t, std::string_view key, T& out) {
    if (const auto* node = t.get(key)) {
        if constexpr (std::is_same_v<T, double>) {
            if (auto v = node->value<double>()) { out = *v; return; }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (auto v = node->value<std::string>()) { out = *v; return; }
        } else {
            if (auto v = node->value<std::int64_t>()) {
                if (*v < 0 && std::is_unsigned_v<T>)
                    throw DomainError("config: '" + std::string(key) + "' must be non-negative");
                out = static_cast<T>(*v);
                return;
            }
        }
        throw DomainError("config: '" + std::string(key) + "' has the wrong type");
    }
}

inline void read_path(const toml::table& t, std::string_view key, std::filesystem::path& out) {
    std::string s;
    read(t, key, s);
    if (!s.empty()) out = s;
}

inline const toml::table* section(const toml::table& root, std::string_view name) {
    const auto* node = root.get(name);
    if (!node) return nullptr;
    if (!node->is_table()) throw DomainError("config: [" + std::string(name) + "] must be a table");
    return node->as_table();
}

}  // namespace config_detail

/// Merges one parsed TOML document into `cfg`. Unknown keys are ignored.
inline void merge_toml(RunConfig& cfg, const toml::table& root) {
    using config_detail::read;
    using config_detail::read_path;
    if (root.contains("seed")) {
        std::uint64_t s = cfg.seed;
        read(root, "seed", s);
        cfg.apply_seed(s);
    }
    read(root, "threads", cfg.threads);
    if (const auto* f = config_detail::section(root, "fiber")) {
        read(*f, "alpha_db_per_km", cfg.fiber.alpha_db_per_km);
        read(*f, "beta2_ps2_per_km", cfg.fiber.beta2_ps2_per_km);
        read(*f, "gamma_per_w_km", cfg.fiber.gamma_per_w_km);
        read(*f, "nf_db", cfg.fiber.nf_db);
        read(*f, "center_freq_thz", cfg.fiber.center_freq_thz);
    }
    if (const auto* g = config_detail::section(root, "generation")) {
        auto& p = cfg.generation;
        read(*g, "link_count", p.link_count);
        read(*g, "fill_min", p.fill_min);
        read(*g, "fill_max", p.fill_max);
        read(*g, "band_slots", p.band_slots);
        read(*g, "span_count_min", p.span_count_min);
        read(*g, "span_count_max", p.span_count_max);
        read(*g, "train_fraction", p.train_fraction);
        read(*g, "val_fraction", p.val_fraction);
        if (const auto* arr = g->get_as<toml::array>("span_lengths_km")) {
            p.span_lengths_km.clear();
            for (const auto& v : *arr) {
                const auto d = v.value<double>();
                if (!d) throw DomainError("config: span_lengths_km must hold numbers");
                p.span_lengths_km.push_back(*d);
            }
        }
    }
    if (const auto* m = config_detail::section(root, "gbm")) {
        auto& p = cfg.gbm;
        read(*m, "n_trees", p.n_trees);
        read(*m, "max_depth", p.max_depth);
        read(*m, "learning_rate", p.learning_rate);
        read(*m, "min_samples_leaf", p.min_samples_leaf);
        read(*m, "row_subsample", p.row_subsample);
        read(*m, "histogram_bins", p.histogram_bins);
        read(*m, "early_stop_patience", p.early_stop_patience);
    }
    if (const auto* paths = config_detail::section(root, "paths")) {
        read_path(*paths, "store", cfg.store_path);
        read_path(*paths, "dataset", cfg.dataset_dir);
        read_path(*paths, "model", cfg.model_path);
        read_path(*paths, "reports", cfg.report_dir);
    }
}

inline void merge_toml_file(RunConfig& cfg, const std::filesystem::path& path) {
    try {
        merge_toml(cfg, toml::parse_file(path.string()));
    } catch (const toml::parse_error& e) {
        std::ostringstream ss;
        ss << "config " << path.string() << ": " << e.description() << " at line "
           << e.source().begin.line;
        throw DomainError(ss.str());
    }
}

/// Defaults, then $NLICONQUER_CONFIG, then the given files in order.
inline RunConfig load_config(const std::vector<std::filesystem::path>& files) {
    RunConfig cfg;
    if (const char* env = std::getenv(config_env_var); env && *env) {
        if (!std::filesystem::exists(env))
            throw DomainError(std::string(config_env_var) + " points to missing file " + env);
        merge_toml_file(cfg, env);
    }
    for (const auto& f : files) {
        if (!std::filesystem::exists(f)) throw DomainError("config file not found: " + f.string());
        merge_toml_file(cfg, f);
    }
    return cfg;
}

/// TOML echo of everything that influences results (threads excluded).
inline std::string echo_toml(const RunConfig& c) {
    toml::array spans;
    for (double s : c.generation.span_lengths_km) spans.push_back(s);
    const auto& g = c.generation;
    const auto& m = c.gbm;
    toml::table root{
        {"seed", static_cast<std::int64_t>(c.seed)},
        {"fiber", toml::table{{"alpha_db_per_km", c.fiber.alpha_db_per_km},
                              {"beta2_ps2_per_km", c.fiber.beta2_ps2_per_km},
                              {"gamma_per_w_km", c.fiber.gamma_per_w_km},
                              {"nf_db", c.fiber.nf_db},
                              {"center_freq_thz", c.fiber.center_freq_thz}}},
        {"generation", toml::table{{"link_count", static_cast<std::int64_t>(g.link_count)},
                                   {"fill_min", g.fill_min},
                                   {"fill_max", g.fill_max},
                                   {"band_slots", g.band_slots},
                                   {"span_lengths_km", spans},
                                   {"span_count_min", g.span_count_min},
                                   {"span_count_max", g.span_count_max},
                                   {"train_fraction", g.train_fraction},
                                   {"val_fraction", g.val_fraction}}},
        {"gbm", toml::table{{"n_trees", m.n_trees},
                            {"max_depth", m.max_depth},
                            {"learning_rate", m.learning_rate},
                            {"min_samples_leaf", m.min_samples_leaf},
                            {"row_subsample", m.row_subsample},
                            {"histogram_bins", m.histogram_bins},
                            {"early_stop_patience", m.early_stop_patience}}},
        {"paths", toml::table{{"store", c.store_path.generic_string()},
                              {"dataset", c.dataset_dir.generic_string()},
                              {"model", c.model_path.generic_string()},
                              {"reports", c.report_dir.generic_string()}}},
    };
    std::ostringstream ss;
    ss << root << "\n";
    return ss.str();
}

inline void write_config_echo(const RunConfig& c, const std::filesystem::path& dir) {
    write_file(dir / "resolved_config.toml", echo_toml(c));
}

/// Opens the coefficient store and pins it to the fiber it was computed for:
/// a sidecar `<store>.fiber.json` is written on first use and checked after.
inline void check_store_fiber(const std::filesystem::path& store_path, const FiberParams& fiber) {
    if (store_path.empty()) return;
    auto sidecar = store_path;
    sidecar += ".fiber.json";
    const nlohmann::json want = fiber;
    if (std::filesystem::exists(sidecar)) {
        if (read_json(sidecar) != want)
            throw DomainError("coefficient store " + store_path.string() +
                              " was computed for different fiber parameters; use another --store");
    } else {
        write_json(sidecar, want);
    }
}

}  // namespace nliconquer
