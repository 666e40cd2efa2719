#pragma once

// Multi-period routing, modulation and spectrum assignment on a small
// topology, with a pluggable QoT estimator acting as the PCE.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "io.hpp"
#include "parallel.hpp"
#include "phys.hpp"
#include "qot.hpp"
#include "specopt.hpp"

namespace nliconquer {

inline constexpr double planning_margin_db = 0.5;

/// Back-to-back SNR threshold per modulation format, before margin.
inline double required_snr(Modulation m) {
    switch (m) {
    case Modulation::QPSK: return 7.0;
    case Modulation::QAM16: return 13.5;
    case Modulation::QAM32: return 16.6;
    case Modulation::QAM64: return 19.7;
    }
    throw DomainError("required_snr: unknown modulation format");
}

inline double required_snr(const ChannelConfig& c) { return required_snr(c.modulation); }

struct TopoLink {
    std::string a, b;
    double length_km = 0.0;
    double span_km = 80.0;
    int slots = constants::default_band_slots;

    int span_count() const { return static_cast<int>(std::ceil(length_km / span_km - 1e-9)); }
    double span_length_km() const { return length_km / span_count(); }
};

struct DemandPair {
    std::string a, b;
    std::string label() const { return a + "-" + b; }
};

/// A hop is a link traversed in one direction (0: a -> b, 1: b -> a).
struct Hop {
    std::size_t link = 0;
    int dir = 0;
    friend bool operator==(const Hop&, const Hop&) = default;
};

struct Topology {
    std::string name;
    std::vector<std::string> nodes;
    std::vector<TopoLink> links;
    std::vector<DemandPair> pairs;

    std::size_t node_index(const std::string& n) const {
        const auto it = std::find(nodes.begin(), nodes.end(), n);
        if (it == nodes.end()) throw DomainError("topology: unknown node '" + n + "'");
        return static_cast<std::size_t>(it - nodes.begin());
    }

    void validate() const {
        if (nodes.empty()) throw DomainError("topology: no nodes");
        for (const auto& l : links) {
            node_index(l.a);
            node_index(l.b);
            if (l.a == l.b) throw DomainError("topology: self-loop at " + l.a);
            if (!(l.length_km > 0.0) || !(l.span_km > 0.0))
                throw DomainError("topology: link " + l.a + "-" + l.b + " needs positive lengths");
            if (l.slots < 1) throw DomainError("topology: link " + l.a + "-" + l.b + " has no slots");
        }
        for (const auto& p : pairs) {
            node_index(p.a);
            node_index(p.b);
            if (p.a == p.b) throw DomainError("topology: demand pair with identical ends");
        }
        for (std::size_t n = 1; n < nodes.size(); ++n) route(nodes[0], nodes[n]);
    }

    /// Shortest path by length (Dijkstra, ties to lower link index).
    std::vector<Hop> route(const std::string& from, const std::string& to) const {
        const std::size_t s = node_index(from), t = node_index(to);
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(nodes.size(), inf);
        std::vector<std::optional<Hop>> via(nodes.size());
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
        dist[s] = 0.0;
        q.push({0.0, s});
        while (!q.empty()) {
            const auto [d, u] = q.top();
            q.pop();
            if (d > dist[u]) continue;
            for (std::size_t i = 0; i < links.size(); ++i) {
                const std::size_t la = node_index(links[i].a), lb = node_index(links[i].b);
                if (la != u && lb != u) continue;
                const std::size_t v = la == u ? lb : la;
                const double nd = d + links[i].length_km;
                if (nd < dist[v]) {
                    dist[v] = nd;
                    via[v] = Hop{i, la == u ? 0 : 1};
                    q.push({nd, v});
                }
            }
        }
        if (dist[t] == inf) throw DomainError("topology: no route " + from + " -> " + to);
        std::vector<Hop> path;
        for (std::size_t v = t; v != s;) {
            const Hop h = *via[v];
            path.push_back(h);
            v = node_index(h.dir == 0 ? links[h.link].a : links[h.link].b);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }
};

inline void to_json(nlohmann::json& j, const Topology& t) {
    nlohmann::json links = nlohmann::json::array(), pairs = nlohmann::json::array();
    for (const auto& l : t.links)
        links.push_back({{"a", l.a}, {"b", l.b}, {"length_km", l.length_km},
                         {"span_km", l.span_km}, {"slots", l.slots}});
    for (const auto& p : t.pairs) pairs.push_back({p.a, p.b});
    j = {{"name", t.name}, {"nodes", t.nodes}, {"links", links}, {"pairs", pairs}};
}

inline void from_json(const nlohmann::json& j, Topology& t) {
    t.name = j.value("name", std::string("topology"));
    t.nodes = j.at("nodes").get<std::vector<std::string>>();
    t.links.clear();
    for (const auto& l : j.at("links"))
        t.links.push_back({l.at("a").get<std::string>(), l.at("b").get<std::string>(),
                           l.at("length_km").get<double>(), l.value("span_km", 80.0),
                           l.value("slots", constants::default_band_slots)});
    t.pairs.clear();
    if (j.contains("pairs")) {
        for (const auto& p : j.at("pairs")) t.pairs.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
    } else {
        for (std::size_t a = 0; a < t.nodes.size(); ++a)
            for (std::size_t b = a + 1; b < t.nodes.size(); ++b) t.pairs.push_back({t.nodes[a], t.nodes[b]});
    }
    t.validate();
}

/// Five nodes in a line with all ten unordered node pairs as demands.
inline Topology default_topology() {
    Topology t;
    t.name = "nordunet-analogue";
    t.nodes = {"N1", "N2", "N3", "N4", "N5"};
    const double lengths[] = {640.0, 560.0, 480.0, 800.0};
    for (std::size_t i = 0; i < 4; ++i) t.links.push_back({t.nodes[i], t.nodes[i + 1], lengths[i], 80.0, 400});
    for (std::size_t a = 0; a < t.nodes.size(); ++a)
        for (std::size_t b = a + 1; b < t.nodes.size(); ++b) t.pairs.push_back({t.nodes[a], t.nodes[b]});
    return t;
}

/// gbps[pair][year - 1]
struct TrafficMatrix {
    std::vector<std::vector<int>> gbps;

    std::size_t pair_count() const { return gbps.size(); }
    int years() const { return gbps.empty() ? 0 : static_cast<int>(gbps.front().size()); }
    int at(std::size_t pair, int year) const { return gbps.at(pair).at(static_cast<std::size_t>(year - 1)); }
};

inline int round_up_to(double x, int step) {
    return static_cast<int>(std::ceil(x / step - 1e-9)) * step;
}

inline TrafficMatrix generate_traffic(std::size_t pairs, int years, std::uint64_t seed) {
    if (years < 1) throw DomainError("traffic: years must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> start(2, 8);  // x 50 Gbit/s
    std::uniform_real_distribution<double> growth(1.2, 1.4);
    TrafficMatrix m;
    m.gbps.resize(pairs);
    for (auto& row : m.gbps) {
        row.push_back(start(rng) * 50);
        for (int y = 1; y < years; ++y) row.push_back(round_up_to(row.back() * growth(rng), 50));
    }
    return m;
}

inline std::string traffic_csv(const Topology& topo, const TrafficMatrix& m) {
    std::string out = "pair,year,gbps\n";
    for (std::size_t p = 0; p < m.pair_count(); ++p)
        for (int y = 1; y <= m.years(); ++y)
            out += fmt::format("{},{},{}\n", topo.pairs.at(p).label(), y, m.at(p, y));
    return out;
}

struct Lightpath {
    std::size_t id = 0;
    std::size_t pair = 0;
    std::vector<Hop> path;  // source to destination
    int start_slot = 0;
    int slot_count = 0;
    ChannelConfig config;
    int year = 0;
};

struct BlockingRecord {
    int year = 0;
    std::size_t pair = 0;
    int unmet_gbps = 0;
    std::string reason;
};

/// Spectra of every (link, direction) and the lightpaths occupying them.
/// A lightpath is bidirectional: it holds the same slots in both directions.
class NetworkState {
public:
    explicit NetworkState(const Topology& topo) : topo_(&topo) {
        for (const auto& l : topo.links) {
            spectra_.push_back({Spectrum(l.slots), Spectrum(l.slots)});
            owners_.push_back({});
        }
    }

    const Topology& topology() const { return *topo_; }
    const std::vector<Lightpath>& lightpaths() const { return lightpaths_; }
    const Spectrum& spectrum(const Hop& h) const { return spectra_[h.link][static_cast<std::size_t>(h.dir)]; }

    int provisioned(std::size_t pair) const {
        int s = 0;
        for (const auto& lp : lightpaths_)
            if (lp.pair == pair) s += lp.config.data_rate_gbps;
        return s;
    }

    /// Start slots free on every hop in both directions, ascending.
    std::vector<int> free_starts(const std::vector<Hop>& path, int count) const {
        std::vector<int> out;
        const int band = spectrum(path.front()).band_slots();
        for (int s = 0; s + count <= band; ++s) {
            bool ok = true;
            for (const auto& h : path)
                for (std::size_t d = 0; d < 2 && ok; ++d) ok = spectra_[h.link][d].is_free(s, count);
            if (ok) out.push_back(s);
        }
        return out;
    }

    void add(Lightpath lp) {
        lp.id = lightpaths_.size();
        const Channel ch = make_channel(lp.config, lp.start_slot);
        for (const auto& h : lp.path)
            for (std::size_t d = 0; d < 2; ++d) {
                spectra_[h.link][d].place(ch);
                owners_[h.link][d].push_back(lp.id);
            }
        lightpaths_.push_back(std::move(lp));
    }

    void remove_last() {
        const auto& lp = lightpaths_.back();
        for (const auto& h : lp.path)
            for (std::size_t d = 0; d < 2; ++d) {
                spectra_[h.link][d].remove_last();
                owners_[h.link][d].pop_back();
            }
        lightpaths_.pop_back();
    }

    /// Link views of every (link, direction), indexed [link][dir].
    std::vector<std::array<LinkConfig, 2>> link_views() const {
        std::vector<std::array<LinkConfig, 2>> out;
        for (std::size_t i = 0; i < spectra_.size(); ++i) {
            const auto& l = topo_->links[i];
            out.push_back({spectra_[i][0].as_link(l.span_length_km(), l.span_count()),
                           spectra_[i][1].as_link(l.span_length_km(), l.span_count())});
        }
        return out;
    }

    /// Worst-direction SNR of a lightpath; noise adds over hops.
    double lightpath_snr(const Lightpath& lp, const std::vector<std::array<LinkConfig, 2>>& views,
                         const Estimator& est) const {
        double worst = std::numeric_limits<double>::infinity();
        for (int d = 0; d < 2; ++d) {
            std::vector<PathHop> hops;
            for (const auto& h : lp.path) {
                const int dir = d == 0 ? h.dir : 1 - h.dir;
                const auto& own = owners_[h.link][static_cast<std::size_t>(dir)];
                const auto idx = static_cast<std::size_t>(std::find(own.begin(), own.end(), lp.id) - own.begin());
                hops.push_back({&views[h.link][static_cast<std::size_t>(dir)], idx});
            }
            worst = std::min(worst, estimate_path_snr(hops, est));
        }
        return worst;
    }

    bool consistent() const {
        for (std::size_t i = 0; i < spectra_.size(); ++i)
            for (const auto& s : spectra_[i])
                if (!s.consistent()) return false;
        return true;
    }

private:
    const Topology* topo_;
    std::vector<std::array<Spectrum, 2>> spectra_;
    std::vector<std::array<std::vector<std::size_t>, 2>> owners_;
    std::vector<Lightpath> lightpaths_;
};

struct RmsaResult {
    std::vector<Lightpath> placed;
    std::optional<BlockingRecord> blocking;
};

/// Candidate configurations for a remaining deficit: rates above the deficit
/// (rounded up to the rate grid) are skipped unless nothing smaller exists;
/// then rate descending, threshold ascending.
inline std::vector<ChannelConfig> candidate_configs(int deficit_gbps) {
    const int cap = std::max(constants::min_data_rate_gbps,
                             round_up_to(deficit_gbps, constants::data_rate_step_gbps));
    std::vector<ChannelConfig> out;
    for (const auto& c : valid_configs())
        if (c.data_rate_gbps <= cap) out.push_back(c);
    std::stable_sort(out.begin(), out.end(), [](const ChannelConfig& x, const ChannelConfig& y) {
        if (x.data_rate_gbps != y.data_rate_gbps) return x.data_rate_gbps > y.data_rate_gbps;
        return required_snr(x) < required_snr(y);
    });
    return out;
}

/// Checks the most recently added lightpath and every earlier one sharing a
/// link with it against threshold + margin.
inline bool qot_feasible(const NetworkState& state, const Estimator& est, unsigned threads) {
    const auto& lps = state.lightpaths();
    const auto& fresh = lps.back();
    std::vector<std::size_t> check{fresh.id};
    for (const auto& lp : lps) {
        if (lp.id == fresh.id) continue;
        const bool shares = std::any_of(lp.path.begin(), lp.path.end(), [&](const Hop& h) {
            return std::any_of(fresh.path.begin(), fresh.path.end(),
                               [&](const Hop& f) { return f.link == h.link; });
        });
        if (shares) check.push_back(lp.id);
    }
    const auto views = state.link_views();
    std::vector<char> ok(check.size(), 0);
    parallel_for(check.size(), threads, [&](std::size_t i) {
        const auto& lp = lps[check[i]];
        ok[i] = state.lightpath_snr(lp, views, est) >= required_snr(lp.config) + planning_margin_db;
    });
    return std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
}

/// Candidates are tried in order; within a candidate, free slot ranges are tried
/// first-fit, so a QoT rejection moves on to the next range before the next
/// configuration.
inline RmsaResult rmsa_place(NetworkState& state, std::size_t pair, int deficit_gbps,
                             const Estimator& est, int year = 1, unsigned threads = 1) {
    RmsaResult res;
    const auto& topo = state.topology();
    const auto path = topo.route(topo.pairs.at(pair).a, topo.pairs.at(pair).b);
    int deficit = deficit_gbps;
    while (deficit > 0) {
        bool placed = false, any_slot = false;
        for (const auto& cfg : candidate_configs(deficit)) {
            for (int start : state.free_starts(path, cfg.slots())) {
                any_slot = true;
                state.add(Lightpath{0, pair, path, start, cfg.slots(), cfg, year});
                if (qot_feasible(state, est, threads)) {
                    res.placed.push_back(state.lightpaths().back());
                    deficit -= cfg.data_rate_gbps;
                    placed = true;
                    break;
                }
                state.remove_last();
            }
            if (placed) break;
        }
        if (!placed) {
            res.blocking = BlockingRecord{year, pair, deficit,
                                          any_slot ? "qot" : "spectrum"};
            break;
        }
    }
    return res;
}

struct OracleCheck {
    std::size_t lightpath = 0;
    double snr_db = 0.0;
    double required_db = 0.0;
    bool below_threshold = false;
    bool below_margin = false;
};

struct PlanReport {
    std::string estimator;
    std::vector<Lightpath> lightpaths;
    std::vector<int> new_per_year;
    std::vector<int> cumulative_per_year;
    std::map<std::string, int> per_config;
    std::vector<std::vector<bool>> satisfied;  // [year - 1][pair]
    std::vector<BlockingRecord> blocking;
    std::vector<OracleCheck> oracle_checks;
    int threshold_violations = 0;
    int margin_violations = 0;

    bool all_satisfied() const {
        for (const auto& y : satisfied)
            for (bool b : y)
                if (!b) return false;
        return true;
    }
    std::size_t total_lightpaths() const { return lightpaths.size(); }
};

inline PlanReport plan(const Topology& topo, const TrafficMatrix& traffic, const Estimator& est,
                       const Estimator& oracle, unsigned threads = 1) {
    if (traffic.pair_count() != topo.pairs.size())
        throw DomainError("plan: traffic has " + std::to_string(traffic.pair_count()) +
                          " pairs, topology has " + std::to_string(topo.pairs.size()));
    PlanReport rep;
    rep.estimator = std::string(to_string(est.backend()));
    NetworkState state(topo);
    for (int y = 1; y <= traffic.years(); ++y) {
        const std::size_t before = state.lightpaths().size();
        for (std::size_t p = 0; p < topo.pairs.size(); ++p) {
            const int deficit = traffic.at(p, y) - state.provisioned(p);
            if (deficit <= 0) continue;
            auto r = rmsa_place(state, p, deficit, est, y, threads);
            if (r.blocking) rep.blocking.push_back(*r.blocking);
        }
        std::vector<bool> sat;
        for (std::size_t p = 0; p < topo.pairs.size(); ++p)
            sat.push_back(state.provisioned(p) >= traffic.at(p, y));
        rep.satisfied.push_back(std::move(sat));
        rep.new_per_year.push_back(static_cast<int>(state.lightpaths().size() - before));
        rep.cumulative_per_year.push_back(static_cast<int>(state.lightpaths().size()));
    }
    rep.lightpaths = state.lightpaths();
    for (const auto& lp : rep.lightpaths) ++rep.per_config[to_string(lp.config)];

    const auto views = state.link_views();
    rep.oracle_checks.resize(rep.lightpaths.size());
    parallel_for(rep.lightpaths.size(), threads, [&](std::size_t i) {
        const auto& lp = rep.lightpaths[i];
        auto& c = rep.oracle_checks[i];
        c.lightpath = lp.id;
        c.snr_db = state.lightpath_snr(lp, views, oracle);
        c.required_db = required_snr(lp.config);
        c.below_threshold = c.snr_db < c.required_db;
        c.below_margin = c.snr_db < c.required_db + planning_margin_db;
    });
    for (const auto& c : rep.oracle_checks) {
        rep.threshold_violations += c.below_threshold;
        rep.margin_violations += c.below_margin;
    }
    return rep;
}

inline nlohmann::json plan_json(const Topology& topo, const PlanReport& r) {
    nlohmann::json lps = nlohmann::json::array();
    for (const auto& lp : r.lightpaths) {
        nlohmann::json links = nlohmann::json::array();
        for (const auto& h : lp.path) links.push_back(topo.links[h.link].a + "-" + topo.links[h.link].b);
        const auto& c = r.oracle_checks.at(lp.id);
        lps.push_back({{"id", lp.id},
                       {"pair", topo.pairs[lp.pair].label()},
                       {"links", links},
                       {"start_slot", lp.start_slot},
                       {"slot_count", lp.slot_count},
                       {"config", to_string(lp.config)},
                       {"year", lp.year},
                       {"oracle_snr_db", c.snr_db},
                       {"required_snr_db", c.required_db}});
    }
    nlohmann::json blocking = nlohmann::json::array();
    for (const auto& b : r.blocking)
        blocking.push_back({{"year", b.year}, {"pair", topo.pairs[b.pair].label()},
                            {"unmet_gbps", b.unmet_gbps}, {"reason", b.reason}});
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& c : r.oracle_checks)
        if (c.below_margin)
            violations.push_back({{"lightpath", c.lightpath}, {"oracle_snr_db", c.snr_db},
                                  {"required_snr_db", c.required_db},
                                  {"below_threshold", c.below_threshold}});
    return {{"analogue", true},
            {"substitutes", {"topology lengths", "traffic model", "snr thresholds", "margin"}},
            {"topology", topo.name},
            {"estimator", r.estimator},
            {"margin_db", planning_margin_db},
            {"total_lightpaths", r.total_lightpaths()},
            {"new_per_year", r.new_per_year},
            {"cumulative_per_year", r.cumulative_per_year},
            {"per_config", r.per_config},
            {"all_satisfied", r.all_satisfied()},
            {"satisfied", r.satisfied},
            {"blocking", blocking},
            {"threshold_violations", r.threshold_violations},
            {"margin_violations", r.margin_violations},
            {"violations", violations},
            {"lightpaths", lps}};
}

}  // namespace nliconquer
