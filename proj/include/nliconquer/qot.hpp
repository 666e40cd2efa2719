#pragma once

// End-to-end SNR estimation with a pluggable NLI backend, and accuracy
// evaluation against the oracle.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "dataset.hpp"
#include "gbm.hpp"
#include "nli.hpp"
#include "parallel.hpp"
#include "phys.hpp"

namespace nliconquer {

enum class Backend : std::uint8_t { ML, ClosedForm, Oracle };

inline std::string_view to_string(Backend b) {
    switch (b) {
    case Backend::ML: return "ml";
    case Backend::ClosedForm: return "gn";
    case Backend::Oracle: return "oracle";
    }
    return "?";
}

inline Backend parse_backend(std::string_view s) {
    if (s == "ml") return Backend::ML;
    if (s == "gn" || s == "closed-form") return Backend::ClosedForm;
    if (s == "oracle") return Backend::Oracle;
    throw DomainError("unknown estimator '" + std::string(s) + "' (expected ml, gn or oracle)");
}

/// A QoT estimator. The ML backend needs a model and the coefficient store
/// (for SCI features); the oracle backend needs the store.
class Estimator {
public:
    static Estimator oracle(const OracleCoefficients& coeffs) {
        return Estimator(Backend::Oracle, coeffs.fiber(), &coeffs, nullptr);
    }
    static Estimator closed_form(const FiberParams& fiber) {
        return Estimator(Backend::ClosedForm, fiber, nullptr, nullptr);
    }
    static Estimator ml(const OracleCoefficients& coeffs, std::shared_ptr<const gbm::GbmModel> model) {
        if (!model) throw DomainError("ML estimator requires a trained model");
        if (model->n_features() != feature_count)
            throw DomainError("ML estimator: model expects " + std::to_string(model->n_features()) +
                              " features, need " + std::to_string(feature_count));
        return Estimator(Backend::ML, coeffs.fiber(), &coeffs, std::move(model));
    }

    Estimator(const Estimator& o)
        : backend_(o.backend_), fiber_(o.fiber_), coeffs_(o.coeffs_), model_(o.model_) {}

    Backend backend() const { return backend_; }
    const FiberParams& fiber() const { return fiber_; }

    /// Whole-link NLI coefficient of the CUT, sigma2_NLI / P^3 in 1/W^2.
    double eta(const LinkConfig& link, std::size_t cut_index) const {
        if (cut_index >= link.channels.size())
            throw DomainError("estimator: cut index " + std::to_string(cut_index) +
                              " out of range");
        calls_.fetch_add(1, std::memory_order_relaxed);
        const double p = link.channels[cut_index].power_w();
        switch (backend_) {
        case Backend::Oracle: return oracle_nli(*coeffs_, link, cut_index) / (p * p * p);
        case Backend::ClosedForm: return closed_form_nli(fiber_, link, cut_index) / (p * p * p);
        case Backend::ML: {
            const auto f = extract_features(link, cut_index, *coeffs_);
            return db_to_linear(model_->predict(f));
        }
        }
        throw DomainError("estimator: invalid backend");
    }

    /// ASE + NLI noise power (W) of the CUT in its symbol-rate bandwidth.
    double noise_power(const LinkConfig& link, std::size_t cut_index) const {
        const auto& cut = link.channels.at(cut_index);
        const double p = cut.power_w();
        return ase_noise(fiber_, link, cut.symbol_rate_gbd) + eta(link, cut_index) * p * p * p;
    }

    std::uint64_t calls() const { return calls_.load(); }
    void reset_calls() const { calls_ = 0; }

private:
    Estimator(Backend b, FiberParams fiber, const OracleCoefficients* coeffs,
              std::shared_ptr<const gbm::GbmModel> model)
        : backend_(b), fiber_(fiber), coeffs_(coeffs), model_(std::move(model)) {}

    Backend backend_;
    FiberParams fiber_;
    const OracleCoefficients* coeffs_;
    std::shared_ptr<const gbm::GbmModel> model_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

/// SNR in dB of one channel on one link.
inline double estimate_snr(const LinkConfig& link, std::size_t cut_index, const Estimator& est) {
    const double p = link.channels.at(cut_index).power_w();
    return linear_to_db(p / est.noise_power(link, cut_index));
}

/// A hop of a multi-link path: the link and the CUT's index on it.
struct PathHop {
    const LinkConfig* link = nullptr;
    std::size_t cut_index = 0;
};

/// SNR in dB over a path; noise powers of the hops add.
inline double estimate_path_snr(std::span<const PathHop> hops, const Estimator& est) {
    if (hops.empty()) throw DomainError("estimate_path_snr: empty path");
    double noise = 0.0;
    for (const auto& h : hops) noise += est.noise_power(*h.link, h.cut_index);
    const double p = hops.front().link->channels.at(hops.front().cut_index).power_w();
    return linear_to_db(p / noise);
}

struct ErrorReport {
    std::string backend;
    std::vector<double> errors_db;  // signed, estimator - oracle
    double mean_abs = 0.0;
    double mean_signed = 0.0;
    double p50_abs = 0.0;
    double p99_abs = 0.0;
    double max_abs = 0.0;

    std::size_t count() const { return errors_db.size(); }

    /// (|error|, cumulative fraction) pairs, one per sample.
    std::vector<std::pair<double, double>> cdf() const {
        std::vector<double> a;
        a.reserve(errors_db.size());
        for (double e : errors_db) a.push_back(std::abs(e));
        std::sort(a.begin(), a.end());
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i < a.size(); ++i)
            out.emplace_back(a[i], static_cast<double>(i + 1) / static_cast<double>(a.size()));
        return out;
    }
};

/// Nearest-rank percentile of |x| (q in (0, 1]).
inline double abs_percentile(const std::vector<double>& x, double q) {
    if (x.empty()) throw DomainError("percentile of empty sample");
    std::vector<double> a;
    for (double v : x) a.push_back(std::abs(v));
    std::sort(a.begin(), a.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(a.size())));
    return a[std::clamp<std::size_t>(rank, 1, a.size()) - 1];
}

inline ErrorReport summarize_errors(std::string backend, std::vector<double> errors) {
    if (errors.empty()) throw DomainError("evaluate: no samples");
    ErrorReport r;
    r.backend = std::move(backend);
    r.errors_db = std::move(errors);
    double sa = 0.0, ss = 0.0;
    for (double e : r.errors_db) {
        sa += std::abs(e);
        ss += e;
        r.max_abs = std::max(r.max_abs, std::abs(e));
    }
    r.mean_abs = sa / static_cast<double>(r.count());
    r.mean_signed = ss / static_cast<double>(r.count());
    r.p50_abs = abs_percentile(r.errors_db, 0.50);
    r.p99_abs = abs_percentile(r.errors_db, 0.99);
    return r;
}

/// SNR error of `est` against `reference` for every channel of every link.
/// Errors are ordered by (link, channel).
inline ErrorReport evaluate(std::span<const LinkConfig> links, const Estimator& est,
                            const Estimator& reference, unsigned threads = 1) {
    if (links.empty()) throw DomainError("evaluate: no links given");
    std::vector<std::vector<double>> per_link(links.size());
    parallel_for(links.size(), threads, [&](std::size_t i) {
        const auto& link = links[i];
        for (std::size_t c = 0; c < link.channels.size(); ++c)
            per_link[i].push_back(estimate_snr(link, c, est) - estimate_snr(link, c, reference));
    });
    std::vector<double> errors;
    for (auto& v : per_link) errors.insert(errors.end(), v.begin(), v.end());
    return summarize_errors(std::string(to_string(est.backend())), std::move(errors));
}

inline std::string cdf_csv(const ErrorReport& r) {
    std::string out = "error_db,cumulative_fraction\n";
    for (const auto& [e, f] : r.cdf()) out += fmt::format("{},{}\n", e, f);
    return out;
}

inline nlohmann::json report_json(const ErrorReport& r) {
    return {{"backend", r.backend},       {"count", r.count()},
            {"mean", r.mean_abs},         {"mean_signed", r.mean_signed},
            {"p50", r.p50_abs},           {"p99", r.p99_abs},
            {"max", r.max_abs},           {"signed_errors_db", r.errors_db}};
}

}  // namespace nliconquer
