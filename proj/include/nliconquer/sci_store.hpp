#pragma once

// Persistent cache of per-span NLI coefficients.
//
// On disk the store is JSON-lines, one record per key:
//   {"rc":35,"rk":0,"df":0,"lspan":80,"kind":"sci","eta":227.93...}
// The file is append-only; when a key appears more than once the last record
// wins. Keys are quantized to 0.01 (GBd / GHz / km) before lookup.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "phys.hpp"

namespace nliconquer {

enum class CoeffKind : std::uint8_t { SCI, XCI };

inline std::int64_t quantize_centi(double x) { return std::llround(x * 100.0); }
inline double dequantize_centi(std::int64_t q) { return static_cast<double>(q) / 100.0; }

struct CoeffKey {
    std::int64_t cut_rate_centi = 0;         // GBd x 100
    std::int64_t interferer_rate_centi = 0;  // GBd x 100, 0 for SCI
    std::int64_t delta_f_centi = 0;          // GHz x 100, signed, 0 for SCI
    std::int64_t span_length_centi = 0;      // km x 100

    static CoeffKey sci(double cut_rate_gbd, double span_length_km) {
        return {quantize_centi(cut_rate_gbd), 0, 0, quantize_centi(span_length_km)};
    }
    static CoeffKey xci(double cut_rate_gbd, double interferer_rate_gbd, double delta_f_ghz,
                        double span_length_km) {
        return {quantize_centi(cut_rate_gbd), quantize_centi(interferer_rate_gbd),
                quantize_centi(delta_f_ghz), quantize_centi(span_length_km)};
    }

    CoeffKind kind() const {
        return interferer_rate_centi == 0 && delta_f_centi == 0 ? CoeffKind::SCI : CoeffKind::XCI;
    }
    double cut_rate_gbd() const { return dequantize_centi(cut_rate_centi); }
    double interferer_rate_gbd() const { return dequantize_centi(interferer_rate_centi); }
    double delta_f_ghz() const { return dequantize_centi(delta_f_centi); }
    double span_length_km() const { return dequantize_centi(span_length_centi); }

    friend bool operator==(const CoeffKey&, const CoeffKey&) = default;
    friend auto operator<=>(const CoeffKey&, const CoeffKey&) = default;
};

struct CoeffKeyHash {
    std::size_t operator()(const CoeffKey& k) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int64_t v : {k.cut_rate_centi, k.interferer_rate_centi, k.delta_f_centi,
                               k.span_length_centi}) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

inline std::string format_record(const CoeffKey& k, double eta) {
    return fmt::format(R"({{"rc":{},"rk":{},"df":{},"lspan":{},"kind":"{}","eta":{}}})",
                       k.cut_rate_gbd(), k.interferer_rate_gbd(), k.delta_f_ghz(),
                       k.span_length_km(), k.kind() == CoeffKind::SCI ? "sci" : "xci", eta);
}

class SciStore {
public:
    SciStore() = default;

    /// Opens (and loads, if present) the backing file. An empty path gives a
    /// purely in-memory store.
    explicit SciStore(std::filesystem::path path) : path_(std::move(path)) {
        if (!path_.empty() && std::filesystem::exists(path_)) load(path_);
    }

    SciStore(const SciStore&) = delete;
    SciStore& operator=(const SciStore&) = delete;

    std::optional<double> get(const CoeffKey& key) const {
        std::shared_lock lock(mutex_);
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    void put(const CoeffKey& key, double eta) {
        if (!(eta > 0.0) || !std::isfinite(eta))
            throw DomainError("SciStore: coefficient must be positive and finite");
        std::unique_lock lock(mutex_);
        map_[key] = eta;
        pending_.push_back(key);
    }

    /// Returns the stored coefficient or computes, stores and returns it.
    /// `compute` must be a pure function of the key: when two threads race on
    /// the same key both results are identical and either may be kept.
    template <class Compute>
    double get_or_compute(const CoeffKey& key, Compute&& compute) {
        {
            std::shared_lock lock(mutex_);
            auto it = map_.find(key);
            if (it != map_.end()) {
                hits_.fetch_add(1, std::memory_order_relaxed);
                return it->second;
            }
        }
        const double eta = compute(key);
        misses_.fetch_add(1, std::memory_order_relaxed);
        if (!(eta > 0.0) || !std::isfinite(eta))
            throw DomainError("SciStore: computed coefficient must be positive and finite");
        std::unique_lock lock(mutex_);
        auto [it, inserted] = map_.try_emplace(key, eta);
        if (inserted) pending_.push_back(key);
        return it->second;
    }

    /// Appends all records added since the last flush, in key order.
    void flush() {
        std::unique_lock lock(mutex_);
        if (path_.empty() || pending_.empty()) {
            pending_.clear();
            return;
        }
        std::sort(pending_.begin(), pending_.end());
        pending_.erase(std::unique(pending_.begin(), pending_.end()), pending_.end());
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_, std::ios::app);
        if (!out) throw std::runtime_error("SciStore: cannot open " + path_.string());
        std::string buffer;
        for (const auto& k : pending_) {
            buffer += format_record(k, map_.at(k));
            buffer += '\n';
        }
        out << buffer;
        if (!out) throw std::runtime_error("SciStore: write failed for " + path_.string());
        pending_.clear();
    }

    void load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("SciStore: cannot read " + path.string());
        std::unique_lock lock(mutex_);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                CoeffKey k{quantize_centi(j.at("rc").get<double>()),
                           quantize_centi(j.at("rk").get<double>()),
                           quantize_centi(j.at("df").get<double>()),
                           quantize_centi(j.at("lspan").get<double>())};
                const auto kind = j.at("kind").get<std::string>();
                if ((kind == "sci") != (k.kind() == CoeffKind::SCI))
                    throw DomainError("kind does not match key fields");
                map_[k] = j.at("eta").get<double>();
            } catch (const std::exception& e) {
                throw std::runtime_error("SciStore: " + path.string() + ":" +
                                         std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return map_.size();
    }
    std::uint64_t hits() const { return hits_.load(); }
    std::uint64_t misses() const { return misses_.load(); }
    void reset_counters() {
        hits_ = 0;
        misses_ = 0;
    }
    const std::filesystem::path& path() const { return path_; }

    /// Snapshot of all entries in key order.
    std::vector<std::pair<CoeffKey, double>> entries() const {
        std::shared_lock lock(mutex_);
        std::vector<std::pair<CoeffKey, double>> out(map_.begin(), map_.end());
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

private:
    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<CoeffKey, double, CoeffKeyHash> map_;
    std::vector<CoeffKey> pending_;
    std::atomic<std::uint64_t> hits_{0};
    std::atomic<std::uint64_t> misses_{0};
};

}  // namespace nliconquer
