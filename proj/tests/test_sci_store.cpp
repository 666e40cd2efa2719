#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "nliconquer/sci_store.hpp"

using namespace nliconquer;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "nliconquer_test_sci_store";
    fs::create_directories(dir);
    const auto p = dir / name;
    fs::remove(p);
    return p;
}

}  // namespace

TEST(CoeffKey, QuantizesToHundredths) {
    EXPECT_EQ(CoeffKey::sci(35.0, 80.0), CoeffKey::sci(35.004, 79.996));
    EXPECT_NE(CoeffKey::sci(35.0, 80.0), CoeffKey::sci(35.01, 80.0));
    const auto k = CoeffKey::xci(35.0, 52.5, -43.75, 80.0);
    EXPECT_EQ(k.kind(), CoeffKind::XCI);
    EXPECT_DOUBLE_EQ(k.delta_f_ghz(), -43.75);
    EXPECT_NE(k, CoeffKey::xci(35.0, 52.5, 43.75, 80.0));
    EXPECT_EQ(CoeffKey::sci(35.0, 80.0).kind(), CoeffKind::SCI);
}

TEST(SciStore, GetPutIsBitExact) {
    SciStore s;
    const double eta = 212.57491234567891;
    s.put(CoeffKey::sci(35, 80), eta);
    ASSERT_TRUE(s.get(CoeffKey::sci(35, 80)));
    EXPECT_EQ(*s.get(CoeffKey::sci(35, 80)), eta);
    EXPECT_FALSE(s.get(CoeffKey::sci(35, 81)));
    EXPECT_THROW(s.put(CoeffKey::sci(35, 80), 0.0), DomainError);
    EXPECT_THROW(s.put(CoeffKey::sci(35, 80), std::nan("")), DomainError);
}

TEST(SciStore, FlushAndReloadRoundTrip) {
    const auto path = temp_file("roundtrip.jsonl");
    std::vector<std::pair<CoeffKey, double>> want;
    {
        SciStore s(path);
        for (int i = 1; i <= 50; ++i) {
            const auto k = CoeffKey::xci(10.0 + i * 0.37, 20.0 + i, -1000.0 + i * 41.3, 80.0);
            const double eta = 1.0 / (i * 3.0) + 1e-17 * i;
            s.put(k, eta);
            want.emplace_back(k, eta);
        }
        s.put(CoeffKey::sci(35, 80), 212.5749);
        want.emplace_back(CoeffKey::sci(35, 80), 212.5749);
        s.flush();
    }
    SciStore back(path);
    EXPECT_EQ(back.size(), want.size());
    for (const auto& [k, eta] : want) {
        ASSERT_TRUE(back.get(k));
        EXPECT_EQ(*back.get(k), eta);
    }
}

TEST(SciStore, FlushIsAppendOnlyAndLastRecordWins) {
    const auto path = temp_file("lastwins.jsonl");
    {
        SciStore s(path);
        s.put(CoeffKey::sci(35, 80), 1.0);
        s.flush();
        s.put(CoeffKey::sci(35, 80), 2.0);
        s.flush();
        s.flush();
    }
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 2);
    SciStore back(path);
    EXPECT_EQ(*back.get(CoeffKey::sci(35, 80)), 2.0);
}

TEST(SciStore, CorruptLineReportsLocation) {
    const auto path = temp_file("corrupt.jsonl");
    std::ofstream(path) << format_record(CoeffKey::sci(35, 80), 1.0) << "\n{\"rc\":35}\n";
    try {
        SciStore s(path);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
}

TEST(SciStore, CountsHitsAndMisses) {
    SciStore s;
    int computed = 0;
    auto f = [&](const CoeffKey&) {
        ++computed;
        return 3.0;
    };
    EXPECT_EQ(s.get_or_compute(CoeffKey::sci(35, 80), f), 3.0);
    EXPECT_EQ(s.get_or_compute(CoeffKey::sci(35, 80), f), 3.0);
    EXPECT_EQ(s.get_or_compute(CoeffKey::sci(35.001, 80), f), 3.0);
    EXPECT_EQ(computed, 1);
    EXPECT_EQ(s.misses(), 1u);
    EXPECT_EQ(s.hits(), 2u);
    s.reset_counters();
    EXPECT_EQ(s.hits() + s.misses(), 0u);
}

TEST(SciStore, ComputedValueIsValidated) {
    SciStore s;
    EXPECT_THROW(s.get_or_compute(CoeffKey::sci(35, 80), [](const CoeffKey&) { return -1.0; }),
                 DomainError);
    EXPECT_EQ(s.size(), 0u);
}

TEST(SciStore, ConcurrentComputeAgrees) {
    SciStore s;
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t)
        pool.emplace_back([&] {
            for (int i = 0; i < 500; ++i)
                s.get_or_compute(CoeffKey::sci(10.0 + i, 80.0),
                                 [](const CoeffKey& k) { return k.cut_rate_gbd() * 2.0; });
        });
    for (auto& t : pool) t.join();
    EXPECT_EQ(s.size(), 500u);
    EXPECT_EQ(s.hits() + s.misses(), 4000u);
    for (const auto& [k, eta] : s.entries()) EXPECT_EQ(eta, k.cut_rate_gbd() * 2.0);
}

TEST(SciStore, FlushedFileIsSortedByKey) {
    const auto path = temp_file("sorted.jsonl");
    SciStore s(path);
    s.put(CoeffKey::sci(50, 80), 1.0);
    s.put(CoeffKey::sci(20, 80), 1.0);
    s.put(CoeffKey::sci(35, 80), 1.0);
    s.flush();
    std::ifstream in(path);
    std::string a, b, c;
    std::getline(in, a);
    std::getline(in, b);
    std::getline(in, c);
    EXPECT_EQ(a, format_record(CoeffKey::sci(20, 80), 1.0));
    EXPECT_EQ(c, format_record(CoeffKey::sci(50, 80), 1.0));
}
