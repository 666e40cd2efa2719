#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "nliconquer/dataset.hpp"

using namespace nliconquer;
namespace fs = std::filesystem;

namespace {

const FiberParams fiber;

GenerationParams small_params(std::size_t links = 12) {
    GenerationParams p;
    p.link_count = links;
    p.seed = 7;
    p.span_lengths_km = {80.0};
    return p;
}

SciStore& shared_store() {
    static SciStore store;
    return store;
}

}  // namespace

TEST(SampleLink, FillStaysInsideTargetWindow) {
    GenerationParams p;
    for (std::uint64_t id = 0; id < 300; ++id) {
        auto rng = link_rng(p.seed, id);
        const auto link = sample_link_config(rng, p);
        EXPECT_NO_THROW(link.validate());
        const double fill = static_cast<double>(link.occupied_slots()) / link.band_slots;
        EXPECT_LE(fill, p.fill_max);
        // A draw stops only when the next channel (at most 8 slots) overshoots.
        EXPECT_GT(link.occupied_slots() + 8, static_cast<int>(p.fill_min * link.band_slots));
        EXPECT_GE(link.span_count, p.span_count_min);
        EXPECT_LE(link.span_count, p.span_count_max);
        EXPECT_TRUE(std::ranges::count(p.span_lengths_km, link.span_length_km) == 1);
        for (std::size_t i = 1; i < link.channels.size(); ++i)
            EXPECT_GT(link.channels[i].start_slot, link.channels[i - 1].start_slot);
    }
}

TEST(SampleLink, DeterministicPerLinkId) {
    GenerationParams p;
    auto a = link_rng(p.seed, 3), b = link_rng(p.seed, 3), c = link_rng(p.seed, 4);
    const auto la = sample_link_config(a, p), lb = sample_link_config(b, p), lc = sample_link_config(c, p);
    EXPECT_EQ(la, lb);
    EXPECT_NE(la, lc);
}

TEST(SampleLink, FullFillPacksTheBand) {
    GenerationParams p;
    p.fill_min = p.fill_max = 1.0;
    p.band_slots = 40;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        const auto link = sample_link_config(rng, p);
        EXPECT_GT(link.occupied_slots(), 32);
        EXPECT_NO_THROW(link.validate());
    }
}

TEST(Features, PaddingSentinelsForSparseLinks) {
    LinkConfig l;
    l.channels = {make_channel({Modulation::QPSK, 100}, 0), make_channel({Modulation::QAM16, 400}, 10)};
    const OracleCoefficients c(fiber, shared_store());
    const auto f = extract_features(l, 0, c);
    EXPECT_EQ(f[feature::neighbor_spacing], l.channels[1].center_freq_ghz - l.channels[0].center_freq_ghz);
    for (std::size_t i = 1; i < neighbor_count; ++i) {
        EXPECT_EQ(f[feature::neighbor_sci + i], missing_sci_db);
        EXPECT_EQ(f[feature::neighbor_spacing + i], missing_spacing_ghz);
    }
    EXPECT_EQ(f[feature::channel_count], 2.0);
    EXPECT_EQ(f[feature::cut_power], 0.0);
    EXPECT_EQ(f[feature::span_length], 80.0);
    EXPECT_EQ(f[feature::span_count], 1.0);
    EXPECT_THROW(extract_features(l, 2, c), DomainError);
}

TEST(Features, NeighboursMatchBruteForceOrder) {
    LinkConfig l;
    // Twelve 4-slot channels with irregular gaps; CUT in the middle.
    int slot = 0;
    for (int gap : {0, 1, 0, 3, 0, 0, 2, 0, 5, 0, 1, 0}) {
        slot += gap;
        l.channels.push_back(make_channel({Modulation::QPSK, 100}, slot));
        slot += 4;
    }
    const OracleCoefficients c(fiber, shared_store());
    const std::size_t cut = 5;
    const auto f = extract_features(l, cut, c);
    std::vector<double> spacings;
    for (std::size_t k = 0; k < l.channels.size(); ++k)
        if (k != cut) spacings.push_back(l.channels[k].center_freq_ghz - l.channels[cut].center_freq_ghz);
    std::ranges::sort(spacings, [](double a, double b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
    });
    for (std::size_t i = 0; i < neighbor_count; ++i) EXPECT_EQ(f[feature::neighbor_spacing + i], spacings[i]) << i;
    for (std::size_t i = 1; i < neighbor_count; ++i)
        EXPECT_LE(std::abs(f[feature::neighbor_spacing + i - 1]), std::abs(f[feature::neighbor_spacing + i]));
}

TEST(Labels, SingleChannelIsLinkSci) {
    const OracleCoefficients c(fiber, shared_store());
    LinkConfig l;
    l.channels = {make_channel({Modulation::QAM16, 300}, 100)};
    l.span_count = 1;
    const double one = label(l, 0, c);
    EXPECT_NEAR(one, linear_to_db(c.sci(l.channels[0].symbol_rate_gbd, 80.0)), 1e-12);
    EXPECT_NEAR(one, extract_features(l, 0, c)[feature::cut_sci], 1e-12);
    l.span_count = 20;
    EXPECT_NEAR(label(l, 0, c), one + 10.0 * std::log10(20.0), 1e-9);
}

TEST(Labels, AddingAnInterfererRaisesTheLabel) {
    const OracleCoefficients c(fiber, shared_store());
    LinkConfig l;
    l.channels = {make_channel({Modulation::QPSK, 100}, 0)};
    const double alone = label(l, 0, c);
    l.channels.push_back(make_channel({Modulation::QPSK, 100}, 390));
    const double far = label(l, 0, c);
    EXPECT_GT(far, alone);
    l.channels.back() = make_channel({Modulation::QPSK, 100}, 4);
    EXPECT_GT(label(l, 0, c), far);
}

TEST(Labels, MirroredSpectrumGivesSameLabels) {
    const OracleCoefficients c(fiber, shared_store());
    auto rng = link_rng(11, 0);
    auto p = small_params();
    const auto link = sample_link_config(rng, p);
    LinkConfig mirror = link;
    mirror.channels.clear();
    for (auto it = link.channels.rbegin(); it != link.channels.rend(); ++it)
        mirror.channels.push_back(
            make_channel(it->config(), link.band_slots - it->start_slot - it->slot_count));
    const std::size_t n = link.channels.size();
    for (std::size_t i = 0; i < n; i += 5)
        EXPECT_NEAR(label(link, i, c), label(mirror, n - 1 - i, c), 1e-6) << i;
}

TEST(Splits, WholeLinksAndFractions) {
    for (std::size_t n : {10u, 97u, 500u}) {
        GenerationParams p;
        p.link_count = n;
        const auto s = assign_splits(p);
        const auto count = [&](Split x) { return static_cast<double>(std::ranges::count(s, x)); };
        EXPECT_NEAR(count(Split::Train), 0.7 * n, 1.0);
        EXPECT_NEAR(count(Split::Val), 0.1 * n, 1.0);
        EXPECT_EQ(count(Split::Train) + count(Split::Val) + count(Split::Test), static_cast<double>(n));
    }
}

TEST(Generate, DeterministicAcrossThreadCounts) {
    const auto p = small_params();
    const OracleCoefficients c(fiber, shared_store());
    const auto a = generate(p, c, 1);
    const auto b = generate(p, c, 4);
    EXPECT_EQ(a.links, b.links);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.val, b.val);
    EXPECT_EQ(a.test, b.test);
    std::size_t channels = 0;
    for (const auto& l : a.links) channels += l.channels.size();
    EXPECT_EQ(a.train.size() + a.val.size() + a.test.size(), channels);
    for (const auto* rows : {&a.train, &a.val, &a.test})
        for (const auto& r : *rows) EXPECT_EQ(a.rows(a.link_split[r.link_id]).data(), rows->data());
}

TEST(Generate, WriteReadRoundTrip) {
    const auto p = small_params(6);
    const OracleCoefficients c(fiber, shared_store());
    const auto ds = generate(p, c, 2);
    const auto dir = fs::temp_directory_path() / "nliconquer_test_dataset";
    fs::remove_all(dir);
    write_dataset(ds, dir);
    const auto back = read_dataset(dir);
    EXPECT_EQ(back.links, ds.links);
    EXPECT_EQ(back.train, ds.train);
    EXPECT_EQ(back.val, ds.val);
    EXPECT_EQ(back.test, ds.test);
    EXPECT_EQ(back.link_split, ds.link_split);
    const auto m = read_json(dir / "manifest.json");
    EXPECT_EQ(m.at("link_config_count").get<std::size_t>(), 6u);
    EXPECT_EQ(m.at("feature_names").size(), feature_count);
    EXPECT_EQ(m.at("seed").get<std::uint64_t>(), p.seed);
}

TEST(Generate, RejectsBadParameters) {
    auto p = small_params();
    p.fill_min = 0.9;
    p.fill_max = 0.8;
    const OracleCoefficients c(fiber, shared_store());
    EXPECT_THROW(generate(p, c), DomainError);
    p = small_params();
    p.link_count = 0;
    EXPECT_THROW(generate(p, c), DomainError);
}

TEST(Csv, MalformedRowsAreRejected) {
    const auto path = fs::temp_directory_path() / "nliconquer_bad.csv";
    write_file(path, csv_header() + "1,2,3\n");
    EXPECT_THROW(read_rows_csv(path), std::runtime_error);
    write_file(path, "nope\n");
    EXPECT_THROW(read_rows_csv(path), std::runtime_error);
}

TEST(FeatureNames, CountAndUniqueness) {
    const auto& n = feature_names();
    EXPECT_EQ(n.size(), feature_count);
    EXPECT_EQ(std::set<std::string>(n.begin(), n.end()).size(), feature_count);
}
