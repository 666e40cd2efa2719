#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "nliconquer/phys.hpp"

using namespace nliconquer;

TEST(SymbolRate, HundredGigQpskIs35GBd) { EXPECT_DOUBLE_EQ(symbol_rate(100, Modulation::QPSK), 35.0); }

TEST(SymbolRate, TwoHundredGig16QamIs35GBd) {
    EXPECT_DOUBLE_EQ(symbol_rate(200, Modulation::QAM16), 35.0);
}

TEST(SymbolRate, SixHundredGigQpskIsOutOfRange) {
    const double rs = symbol_rate(600, Modulation::QPSK);
    EXPECT_DOUBLE_EQ(rs, 210.0);
    EXPECT_FALSE(symbol_rate_in_range(rs));
}

TEST(SymbolRate, RejectsRatesOffTheGrid) {
    EXPECT_THROW(symbol_rate(50, Modulation::QPSK), DomainError);
    EXPECT_THROW(symbol_rate(650, Modulation::QPSK), DomainError);
    EXPECT_THROW(symbol_rate(125, Modulation::QAM16), DomainError);
}

TEST(Modulation, ParsesKnownNamesAndRejectsOthers) {
    EXPECT_EQ(parse_modulation("QPSK"), Modulation::QPSK);
    EXPECT_EQ(parse_modulation("16QAM"), Modulation::QAM16);
    EXPECT_EQ(parse_modulation("32QAM"), Modulation::QAM32);
    EXPECT_EQ(parse_modulation("64QAM"), Modulation::QAM64);
    EXPECT_THROW(parse_modulation("8PSK"), DomainError);
    for (auto m : all_modulations) EXPECT_EQ(parse_modulation(to_string(m)), m);
}

TEST(LaunchPower, AnchoredAtZeroDbmFor35GBd) {
    EXPECT_EQ(launch_power(35.0), 0.0);
    EXPECT_NEAR(launch_power(70.0), 3.0103, 1e-4);
    EXPECT_NEAR(launch_power(17.5), -3.0103, 1e-4);
    EXPECT_THROW(launch_power(0.0), DomainError);
    EXPECT_THROW(launch_power(-1.0), DomainError);
}

TEST(LaunchPower, StrictlyIncreasing) {
    double prev = launch_power(1.0);
    for (double rs = 1.5; rs <= 120.0; rs += 0.5) {
        const double p = launch_power(rs);
        EXPECT_GT(p, prev) << rs;
        prev = p;
    }
}

TEST(SlotFootprint, Examples) {
    EXPECT_EQ(slot_footprint(35.0), 4);
    EXPECT_EQ(slot_footprint(87.5), 8);
    EXPECT_EQ(slot_footprint(12.5 / 1.1), 1);
    EXPECT_EQ(slot_footprint(12.5 / 1.1 + 0.01), 2);
}

TEST(EffectiveLength, Examples) {
    EXPECT_NEAR(effective_length(0.2, 80.0), 21.17, 0.005);
    EXPECT_NEAR(effective_length(1e-9, 80.0), 80.0, 1e-3);
    EXPECT_NEAR(effective_length(0.2, 1e5), 21.71, 0.005);
    EXPECT_NEAR(asymptotic_effective_length(0.2), 21.71, 0.005);
}

TEST(EffectiveLength, BelowBothLengthAndAsymptote) {
    for (double a : {0.05, 0.2, 0.3})
        for (double l : {1.0, 20.0, 60.0, 80.0, 120.0, 500.0}) {
            const double le = effective_length(a, l);
            EXPECT_LT(le, l);
            EXPECT_LT(le, asymptotic_effective_length(a));
        }
}

TEST(Ase, SingleSpanValue) {
    const FiberParams f;
    EXPECT_NEAR(ase_noise(f, 80.0, 1, 35.0), 5.50e-7, 0.005e-7);
}

TEST(Ase, TwelveSpans) {
    const FiberParams f;
    EXPECT_NEAR(ase_noise(f, 80.0, 12, 35.0), 6.60e-6, 0.01e-6);
}

TEST(Ase, LinearInSpanCountExactly) {
    const FiberParams f;
    const double one = ase_noise(f, 100.0, 1, 49.0);
    for (int n = 1; n <= 50; ++n) EXPECT_EQ(ase_noise(f, 100.0, n, 49.0), n * one);
}

TEST(Ase, VanishesForZeroLength) {
    const FiberParams f;
    EXPECT_EQ(ase_noise(f, 0.0, 3, 35.0), 0.0);
    EXPECT_THROW(ase_noise(f, 80.0, 0, 35.0), DomainError);
}

TEST(FiberParams, Validation) {
    FiberParams f;
    EXPECT_NO_THROW(f.validate());
    f.alpha_db_per_km = 0.0;
    EXPECT_THROW(f.validate(), DomainError);
    f = {};
    f.gamma_per_w_km = -1.0;
    EXPECT_THROW(f.validate(), DomainError);
    f = {};
    f.beta2_ps2_per_km = 0.0;
    EXPECT_THROW(f.validate(), DomainError);
}

TEST(ValidConfigs, SymbolRatesWithinRange) {
    const auto& configs = valid_configs();
    EXPECT_EQ(configs.size(), 35u);
    std::set<double> rates;
    for (const auto& c : configs) {
        EXPECT_TRUE(symbol_rate_in_range(c.symbol_rate_gbd())) << to_string(c);
        rates.insert(c.symbol_rate_gbd());
    }
    EXPECT_EQ(rates.size(), 25u);
}

TEST(Channel, DerivedFieldsConsistent) {
    for (const auto& cfg : valid_configs())
        for (int start : {0, 7, 100, 311}) {
            const auto ch = make_channel(cfg, start);
            EXPECT_DOUBLE_EQ(ch.center_freq_ghz, (start + ch.slot_count / 2.0) * 12.5);
            EXPECT_DOUBLE_EQ(ch.symbol_rate_gbd, cfg.symbol_rate_gbd());
            EXPECT_DOUBLE_EQ(ch.launch_power_dbm, launch_power(ch.symbol_rate_gbd));
            EXPECT_EQ(ch.slot_count, slot_footprint(ch.symbol_rate_gbd));
            EXPECT_EQ(std::fmod(ch.center_freq_ghz, 6.25), 0.0);
            EXPECT_EQ(ch.config(), cfg);
        }
    EXPECT_THROW(make_channel({Modulation::QPSK, 600}, 0), DomainError);
    EXPECT_THROW(make_channel({Modulation::QPSK, 100}, -1), DomainError);
}

TEST(LinkConfig, RejectsOverlapAndOverflow) {
    LinkConfig l;
    l.channels.push_back(make_channel({Modulation::QPSK, 100}, 0));
    l.channels.push_back(make_channel({Modulation::QPSK, 100}, 4));
    EXPECT_NO_THROW(l.validate());
    EXPECT_EQ(l.occupied_slots(), 8);
    l.channels.push_back(make_channel({Modulation::QPSK, 100}, 6));
    EXPECT_THROW(l.validate(), DomainError);
    l.channels.pop_back();
    l.channels.push_back(make_channel({Modulation::QPSK, 100}, 398));
    EXPECT_THROW(l.validate(), DomainError);
    l.channels.pop_back();
    l.span_count = 0;
    EXPECT_THROW(l.validate(), DomainError);
}

TEST(Units, DbmRoundTrip) {
    EXPECT_DOUBLE_EQ(dbm_to_watt(0.0), 1e-3);
    EXPECT_NEAR(watt_to_dbm(dbm_to_watt(3.7)), 3.7, 1e-12);
}
