#pragma once

// Per-call latency of the three NLI backends on one dense spectrum.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dataset.hpp"
#include "gbm.hpp"
#include "nli.hpp"
#include "phys.hpp"

namespace nliconquer {

/// `channels` configurations drawn uniformly from the valid set and packed
/// from slot 0; redrawn until they fit the band.
inline LinkConfig dense_link(std::size_t channels, std::uint64_t seed, double span_length_km = 80.0,
                             int span_count = 12) {
    std::mt19937_64 rng(seed);
    const auto& configs = valid_configs();
    std::uniform_int_distribution<std::size_t> pick(0, configs.size() - 1);
    LinkConfig link;
    link.span_length_km = span_length_km;
    link.span_count = span_count;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        link.channels.clear();
        int slot = 0;
        for (std::size_t i = 0; i < channels; ++i) {
            const auto& c = configs[pick(rng)];
            link.channels.push_back(make_channel(c, slot));
            slot += c.slots();
        }
        if (slot <= link.band_slots) return link;
    }
    throw DomainError("dense_link: cannot fit " + std::to_string(channels) + " channels");
}

struct BenchResult {
    std::size_t channels = 0;
    double ml_predict_us = 0.0;    // model evaluation on a ready feature vector
    double ml_estimator_us = 0.0;  // feature extraction from cached SCI + model
    double closed_form_us = 0.0;
    double oracle_us = 0.0;        // cold coefficient cache

    bool ml_faster_than_closed_form() const { return ml_predict_us < closed_form_us; }
    bool closed_form_faster_than_oracle() const { return closed_form_us < oracle_us; }
    double oracle_over_ml() const { return oracle_us / ml_predict_us; }
};

namespace bench_detail {

/// Median over `batches` of the mean per-call time in microseconds.
template <class F>
double median_us(F&& f, int calls, int batches) {
    std::vector<double> t;
    for (int b = 0; b < batches; ++b) {
        const auto t0 = std::chrono::steady_clock::now();
        for (int i = 0; i < calls; ++i) f();
        t.push_back(std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0)
                        .count() /
                    calls);
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

}  // namespace bench_detail

inline BenchResult run_bench(const FiberParams& fiber, const gbm::GbmModel& model,
                             std::size_t channels = 80, std::uint64_t seed = 42, int calls = 2000,
                             int batches = 7, int oracle_runs = 3) {
    const auto link = dense_link(channels, seed);
    const std::size_t cut = link.channels.size() / 2;
    BenchResult r;
    r.channels = link.channels.size();

    // Cold oracle first; its store then serves the ML feature lookups.
    std::vector<double> oracle;
    SciStore warm;
    for (int i = 0; i < oracle_runs; ++i) {
        SciStore cold;
        const OracleCoefficients coeffs(fiber, cold);
        const auto t0 = std::chrono::steady_clock::now();
        const double v = oracle_nli(coeffs, link, cut);
        oracle.push_back(
            std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count());
        if (!(v > 0.0)) throw DomainError("bench: oracle returned a non-positive value");
    }
    std::sort(oracle.begin(), oracle.end());
    r.oracle_us = oracle[oracle.size() / 2];

    const OracleCoefficients coeffs(fiber, warm);
    const auto features = extract_features(link, cut, coeffs);
    volatile double sink = 0.0;
    r.ml_predict_us =
        bench_detail::median_us([&] { sink = sink + model.predict(features); }, calls, batches);
    r.ml_estimator_us = bench_detail::median_us(
        [&] { sink = sink + model.predict(extract_features(link, cut, coeffs)); }, calls, batches);
    r.closed_form_us = bench_detail::median_us(
        [&] { sink = sink + closed_form_nli(fiber, link, cut); }, calls, batches);
    return r;
}

inline std::string bench_table(const BenchResult& r) {
    std::string out = fmt::format("latency per call, {}-channel spectrum, CUT in the middle\n", r.channels);
    out += fmt::format("  {:<34}{:>14.3f} us\n", "ML predict", r.ml_predict_us);
    out += fmt::format("  {:<34}{:>14.3f} us\n", "ML estimator (features + predict)", r.ml_estimator_us);
    out += fmt::format("  {:<34}{:>14.3f} us\n", "closed-form GN", r.closed_form_us);
    out += fmt::format("  {:<34}{:>14.3f} us\n", "oracle (cold cache)", r.oracle_us);
    out += fmt::format("  oracle / ML predict: {:.0f}x\n", r.oracle_over_ml());
    return out;
}

}  // namespace nliconquer
