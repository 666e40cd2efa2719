#include <gtest/gtest.h>

#include <set>

#include "nliconquer/planner.hpp"

using namespace nliconquer;

namespace {

const FiberParams fiber;

Topology two_nodes(double length_km, int slots = 400) {
    Topology t;
    t.name = "pair";
    t.nodes = {"A", "B"};
    t.links = {{"A", "B", length_km, 80.0, slots}};
    t.pairs = {{"A", "B"}};
    return t;
}

}  // namespace

TEST(Thresholds, TableAndOrdering) {
    EXPECT_EQ(required_snr(Modulation::QPSK), 7.0);
    EXPECT_EQ(required_snr(Modulation::QAM16), 13.5);
    EXPECT_EQ(required_snr(Modulation::QAM32), 16.6);
    EXPECT_EQ(required_snr(Modulation::QAM64), 19.7);
    for (std::size_t i = 1; i < all_modulations.size(); ++i)
        EXPECT_LT(required_snr(all_modulations[i - 1]), required_snr(all_modulations[i]));
}

TEST(Candidates, OrderAndCap) {
    EXPECT_TRUE(candidate_configs(0).size() > 0);
    const auto c = candidate_configs(400);
    ASSERT_FALSE(c.empty());
    EXPECT_EQ(c.front().data_rate_gbps, 400);
    EXPECT_EQ(c.front().modulation, Modulation::QAM16);
    for (std::size_t i = 1; i < c.size(); ++i) {
        EXPECT_GE(c[i - 1].data_rate_gbps, c[i].data_rate_gbps);
        if (c[i - 1].data_rate_gbps == c[i].data_rate_gbps)
            EXPECT_LT(required_snr(c[i - 1]), required_snr(c[i]));
    }
    EXPECT_EQ(candidate_configs(30).front().data_rate_gbps, 100);
    EXPECT_EQ(candidate_configs(120).front().data_rate_gbps, 150);
    EXPECT_EQ(candidate_configs(10000).size(), valid_configs().size());
}

TEST(Traffic, GrowthAndGranularity) {
    const auto m = generate_traffic(10, 5, 42);
    ASSERT_EQ(m.pair_count(), 10u);
    ASSERT_EQ(m.years(), 5);
    for (std::size_t p = 0; p < 10; ++p) {
        EXPECT_GE(m.at(p, 1), 100);
        EXPECT_LE(m.at(p, 1), 400);
        for (int y = 1; y <= 5; ++y) EXPECT_EQ(m.at(p, y) % 50, 0);
        for (int y = 2; y <= 5; ++y) {
            EXPECT_GE(m.at(p, y), 1.2 * m.at(p, y - 1) - 1e-9);
            EXPECT_LE(m.at(p, y), 1.4 * m.at(p, y - 1) + 50);
        }
    }
    EXPECT_EQ(m.gbps, generate_traffic(10, 5, 42).gbps);
    EXPECT_NE(m.gbps, generate_traffic(10, 5, 43).gbps);
    EXPECT_THROW(generate_traffic(10, 0, 1), DomainError);
    EXPECT_EQ(round_up_to(301.0, 50), 350);
    EXPECT_EQ(round_up_to(300.0, 50), 300);
}

TEST(Topology, DefaultLineAndRouting) {
    const auto t = default_topology();
    EXPECT_NO_THROW(t.validate());
    EXPECT_EQ(t.pairs.size(), 10u);
    const auto r = t.route("N5", "N2");
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0], (Hop{3, 1}));
    EXPECT_EQ(r[2], (Hop{1, 1}));
    EXPECT_EQ(t.links[0].span_count(), 8);
    EXPECT_THROW(t.route("N1", "N9"), DomainError);
}

TEST(Topology, ShortestPathPrefersShorterDetour) {
    Topology t;
    t.nodes = {"A", "B", "C"};
    t.links = {{"A", "B", 1000.0}, {"A", "C", 300.0}, {"C", "B", 300.0}};
    const auto r = t.route("A", "B");
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].link, 1u);
    EXPECT_EQ(r[1], (Hop{2, 0}));
}

TEST(Topology, JsonRoundTripAndDefaultPairs) {
    const auto t = default_topology();
    nlohmann::json j = t;
    const auto back = j.get<Topology>();
    EXPECT_EQ(back.nodes, t.nodes);
    EXPECT_EQ(back.links.size(), t.links.size());
    EXPECT_EQ(back.pairs.size(), t.pairs.size());
    j.erase("pairs");
    EXPECT_EQ(j.get<Topology>().pairs.size(), 10u);
    j["links"][0]["b"] = "nowhere";
    EXPECT_THROW(j.get<Topology>(), DomainError);
}

TEST(Topology, ShippedFileLoads) {
    const auto t = read_json(NLICONQUER_SOURCE_DIR "/data/nordunet.json").get<Topology>();
    EXPECT_GE(t.nodes.size(), 2u);
    EXPECT_FALSE(t.pairs.empty());
}

TEST(Rmsa, ZeroDeficitPlacesNothing) {
    const auto t = two_nodes(80.0);
    NetworkState s(t);
    const auto r = rmsa_place(s, 0, 0, Estimator::closed_form(fiber));
    EXPECT_TRUE(r.placed.empty());
    EXPECT_FALSE(r.blocking);
}

TEST(Rmsa, ShortPathGetsOneFourHundredGigLightpath) {
    const auto t = two_nodes(80.0);
    NetworkState s(t);
    const auto r = rmsa_place(s, 0, 400, Estimator::closed_form(fiber));
    ASSERT_EQ(r.placed.size(), 1u);
    EXPECT_EQ(r.placed[0].config.data_rate_gbps, 400);
    EXPECT_EQ(r.placed[0].start_slot, 0);
    EXPECT_FALSE(r.blocking);
}

TEST(Rmsa, LongPathFallsBackToRobustFormats) {
    const auto t = two_nodes(4000.0);
    NetworkState s(t);
    const auto gn = Estimator::closed_form(fiber);
    const auto r = rmsa_place(s, 0, 400, gn);
    ASSERT_FALSE(r.blocking);
    int total = 0;
    for (const auto& lp : r.placed) {
        total += lp.config.data_rate_gbps;
        EXPECT_NE(lp.config.modulation, Modulation::QAM64);
    }
    EXPECT_GE(total, 400);
}

TEST(Rmsa, BlockingReasons) {
    const auto gn = Estimator::closed_form(fiber);
    {
        const auto t = two_nodes(80.0, 4);
        NetworkState s(t);
        const auto r = rmsa_place(s, 0, 600, gn, 2);
        ASSERT_TRUE(r.blocking);
        EXPECT_EQ(r.blocking->reason, "spectrum");
        EXPECT_EQ(r.blocking->year, 2);
        EXPECT_EQ(r.blocking->unmet_gbps + static_cast<int>(r.placed.size()) * r.placed[0].config.data_rate_gbps, 600);
    }
    {
        const auto t = two_nodes(40000.0);
        NetworkState s(t);
        const auto r = rmsa_place(s, 0, 100, gn);
        ASSERT_TRUE(r.blocking);
        EXPECT_EQ(r.blocking->reason, "qot");
        EXPECT_TRUE(r.placed.empty());
        EXPECT_TRUE(s.lightpaths().empty());
        EXPECT_TRUE(s.consistent());
    }
}

TEST(Rmsa, NewLightpathMayNotPushNeighboursBelowMargin) {
    // The greedy first pass leaves a high-order lightpath right at its margin;
    // anything added next to it would degrade it, so later requests block on
    // QoT even though each newcomer alone would be fine.
    const auto t = two_nodes(1600.0);
    NetworkState s(t);
    const auto gn = Estimator::closed_form(fiber);
    const auto first = rmsa_place(s, 0, 600, gn);
    ASSERT_FALSE(first.blocking);
    const auto n = s.lightpaths().size();
    const auto second = rmsa_place(s, 0, 100, gn);
    ASSERT_TRUE(second.blocking);
    EXPECT_EQ(second.blocking->reason, "qot");
    EXPECT_EQ(s.lightpaths().size(), n);

    NetworkState alone(t);
    alone.add(Lightpath{0, 0, t.route("A", "B"), 200, 4, {Modulation::QPSK, 100}, 1});
    EXPECT_TRUE(qot_feasible(alone, gn, 1));

    const auto views = s.link_views();
    for (const auto& lp : s.lightpaths())
        EXPECT_GE(s.lightpath_snr(lp, views, gn), required_snr(lp.config) + planning_margin_db) << lp.id;
}

TEST(NetworkState, BidirectionalOccupancyAndContinuity) {
    const auto t = default_topology();
    NetworkState s(t);
    const auto path = t.route("N1", "N4");
    s.add(Lightpath{0, 2, path, 10, 4, {Modulation::QPSK, 100}, 1});
    for (const auto& h : path)
        for (int d = 0; d < 2; ++d) EXPECT_FALSE(s.spectrum(Hop{h.link, d}).is_free(10, 4));
    EXPECT_TRUE(s.spectrum(Hop{3, 0}).is_free(10, 4));
    const auto starts = s.free_starts(path, 4);
    EXPECT_EQ(starts.front(), 0);
    EXPECT_TRUE(std::find(starts.begin(), starts.end(), 10) == starts.end());
    EXPECT_EQ(s.provisioned(2), 100);
    s.remove_last();
    EXPECT_TRUE(s.lightpaths().empty());
    EXPECT_TRUE(s.consistent());
}

TEST(Plan, ZeroTrafficPlacesNothing) {
    const auto t = default_topology();
    TrafficMatrix m;
    m.gbps.assign(t.pairs.size(), std::vector<int>(3, 0));
    const auto gn = Estimator::closed_form(fiber);
    const auto r = plan(t, m, gn, gn);
    EXPECT_EQ(r.total_lightpaths(), 0u);
    EXPECT_TRUE(r.all_satisfied());
    EXPECT_EQ(r.cumulative_per_year, (std::vector<int>{0, 0, 0}));
}

TEST(Plan, InvariantsOnDefaultNetwork) {
    const auto t = default_topology();
    const auto m = generate_traffic(t.pairs.size(), 5, 2);
    const auto gn = Estimator::closed_form(fiber);
    const auto r = plan(t, m, gn, gn, 4);
    ASSERT_EQ(r.satisfied.size(), 5u);
    // Satisfaction matches provisioned capacity per year.
    for (int y = 1; y <= 5; ++y)
        for (std::size_t p = 0; p < t.pairs.size(); ++p) {
            int cap = 0;
            for (const auto& lp : r.lightpaths)
                if (lp.pair == p && lp.year <= y) cap += lp.config.data_rate_gbps;
            EXPECT_EQ(r.satisfied[y - 1][p], cap >= m.at(p, y));
        }
    // Lightpaths follow the shortest route and never overlap on a link.
    std::map<std::size_t, std::set<int>> used;
    for (const auto& lp : r.lightpaths) {
        EXPECT_EQ(lp.path, t.route(t.pairs[lp.pair].a, t.pairs[lp.pair].b));
        for (const auto& h : lp.path)
            for (int s = lp.start_slot; s < lp.start_slot + lp.slot_count; ++s)
                EXPECT_TRUE(used[h.link].insert(s).second);
    }
    int sum = 0;
    for (int n : r.new_per_year) sum += n;
    EXPECT_EQ(static_cast<std::size_t>(sum), r.total_lightpaths());
    // GN graded against itself never violates the margin it planned with.
    EXPECT_EQ(r.margin_violations, 0);
    const auto j = plan_json(t, r);
    EXPECT_EQ(j.at("lightpaths").size(), r.total_lightpaths());
    EXPECT_TRUE(j.at("analogue").get<bool>());
}

TEST(Plan, DeterministicAcrossThreads) {
    const auto t = default_topology();
    const auto m = generate_traffic(t.pairs.size(), 3, 9);
    const auto gn = Estimator::closed_form(fiber);
    EXPECT_EQ(plan_json(t, plan(t, m, gn, gn, 1)).dump(), plan_json(t, plan(t, m, gn, gn, 4)).dump());
    TrafficMatrix wrong;
    wrong.gbps.assign(3, std::vector<int>(1, 100));
    EXPECT_THROW(plan(t, wrong, gn, gn), DomainError);
}
