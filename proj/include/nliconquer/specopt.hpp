#pragma once

// Spectral assignment on a single link: first-fit versus an exhaustive sweep
// that places each new channel where the summed NLI coefficient of all
// channels is smallest.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "io.hpp"
#include "parallel.hpp"
#include "phys.hpp"
#include "qot.hpp"

namespace nliconquer {

class PlacementError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Slot occupancy of one fiber direction plus the channels placed on it.
class Spectrum {
public:
    explicit Spectrum(int band_slots = constants::default_band_slots)
        : used_(static_cast<std::size_t>(band_slots), false) {}

    int band_slots() const { return static_cast<int>(used_.size()); }
    const std::vector<Channel>& channels() const { return channels_; }

    bool is_free(int start, int count) const {
        if (start < 0 || count < 1 || start + count > band_slots()) return false;
        for (int s = start; s < start + count; ++s)
            if (used_[static_cast<std::size_t>(s)]) return false;
        return true;
    }

    std::vector<int> feasible_starts(int count) const {
        std::vector<int> out;
        for (int s = 0; s + count <= band_slots(); ++s)
            if (is_free(s, count)) out.push_back(s);
        return out;
    }

    void place(const Channel& ch) {
        if (!is_free(ch.start_slot, ch.slot_count))
            throw PlacementError("slots " + std::to_string(ch.start_slot) + ".." +
                                 std::to_string(ch.end_slot() - 1) + " are not free");
        for (int s = ch.start_slot; s < ch.end_slot(); ++s) used_[static_cast<std::size_t>(s)] = true;
        channels_.push_back(ch);
    }

    void remove_last() {
        if (channels_.empty()) return;
        const auto& ch = channels_.back();
        for (int s = ch.start_slot; s < ch.end_slot(); ++s) used_[static_cast<std::size_t>(s)] = false;
        channels_.pop_back();
    }

    int occupied() const {
        int n = 0;
        for (bool b : used_) n += b;
        return n;
    }

    bool consistent() const {
        std::vector<bool> check(used_.size(), false);
        for (const auto& c : channels_)
            for (int s = c.start_slot; s < c.end_slot(); ++s) {
                if (s < 0 || s >= band_slots() || check[static_cast<std::size_t>(s)]) return false;
                check[static_cast<std::size_t>(s)] = true;
            }
        return check == used_;
    }

    LinkConfig as_link(double span_length_km, int span_count) const {
        LinkConfig l;
        l.span_length_km = span_length_km;
        l.span_count = span_count;
        l.band_slots = band_slots();
        l.channels = channels_;
        return l;
    }

private:
    std::vector<bool> used_;
    std::vector<Channel> channels_;
};

inline int first_fit_place(const Spectrum& spectrum, const ChannelConfig& demand) {
    const int need = demand.slots();
    for (int s = 0; s + need <= spectrum.band_slots(); ++s)
        if (spectrum.is_free(s, need)) return s;
    throw PlacementError("no free run of " + std::to_string(need) + " slots for " +
                         to_string(demand));
}

/// Sum over all channels of the link of eta (1/W^2, linear).
inline double total_eta(const LinkConfig& link, const Estimator& est) {
    double s = 0.0;
    for (std::size_t i = 0; i < link.channels.size(); ++i) s += est.eta(link, i);
    return s;
}

struct LinkGeometry {
    double span_length_km = 80.0;
    int span_count = 12;
};

/// Objective value of placing `demand` at `start` on top of `spectrum`.
inline double placement_objective(const Spectrum& spectrum, const ChannelConfig& demand, int start,
                                  const LinkGeometry& geom, const Estimator& est) {
    LinkConfig link = spectrum.as_link(geom.span_length_km, geom.span_count);
    link.channels.push_back(make_channel(demand, start));
    return total_eta(link, est);
}

struct SweepResult {
    std::vector<int> starts;
    std::vector<double> objective;
    std::size_t best = 0;

    int chosen_slot() const { return starts[best]; }
};

/// Evaluates the objective at every feasible start slot. The argmin is the
/// lowest objective, ties to the lower slot, whatever the thread count.
inline SweepResult sweep_placements(const Spectrum& spectrum, const ChannelConfig& demand,
                                    const LinkGeometry& geom, const Estimator& est,
                                    unsigned threads = 1) {
    SweepResult r;
    r.starts = spectrum.feasible_starts(demand.slots());
    if (r.starts.empty())
        throw PlacementError("no free run of " + std::to_string(demand.slots()) + " slots for " +
                             to_string(demand));
    r.objective.resize(r.starts.size());
    parallel_for(r.starts.size(), threads, [&](std::size_t i) {
        r.objective[i] = placement_objective(spectrum, demand, r.starts[i], geom, est);
    });
    for (std::size_t i = 1; i < r.starts.size(); ++i)
        if (r.objective[i] < r.objective[r.best]) r.best = i;
    return r;
}

inline int optimize_place(const Spectrum& spectrum, const ChannelConfig& demand,
                          const LinkGeometry& geom, const Estimator& est, unsigned threads = 1) {
    return sweep_placements(spectrum, demand, geom, est, threads).chosen_slot();
}

struct ScenarioParams {
    LinkGeometry geometry{80.0, 12};
    double fill = 0.5;
    std::uint64_t seed = 42;
    int band_slots = constants::default_band_slots;
    unsigned threads = 1;
};

/// Demand sequence: uniform draws from the valid configurations until the next
/// one would push the occupied slots past fill * band_slots.
inline std::vector<ChannelConfig> draw_demands(const ScenarioParams& p) {
    std::mt19937_64 rng(p.seed);
    const auto& configs = valid_configs();
    std::uniform_int_distribution<std::size_t> pick(0, configs.size() - 1);
    const int target = static_cast<int>(std::floor(p.fill * p.band_slots));
    std::vector<ChannelConfig> out;
    int used = 0;
    while (true) {
        const auto& c = configs[pick(rng)];
        if (used + c.slots() > target) break;
        out.push_back(c);
        used += c.slots();
    }
    return out;
}

struct PlacementStep {
    ChannelConfig demand;
    int first_fit_slot = 0;      // first-fit slot on the optimizer's spectrum at that moment
    int chosen_slot = 0;
    double objective_first_fit = 0.0;
    double objective_chosen = 0.0;
};

struct PlacementReport {
    std::string estimator;
    std::vector<ChannelConfig> demands;
    std::vector<Channel> first_fit_layout;  // demand order
    std::vector<Channel> optimized_layout;  // demand order
    std::vector<double> snr_first_fit_db;   // oracle, demand order
    std::vector<double> snr_optimized_db;   // oracle, demand order
    std::vector<PlacementStep> steps;
    double average_gain_db = 0.0;
    double min_gain_db = 0.0;
    std::uint64_t nli_computations = 0;       // estimator calls, one per channel per candidate
    std::uint64_t candidate_evaluations = 0;  // feasible start slots swept
    double wall_seconds = 0.0;
};

/// Places one demand sequence twice (first-fit, and optimized with `est`) and
/// grades both layouts with `oracle`.
inline PlacementReport run_scenario(const ScenarioParams& p, const Estimator& est,
                                    const Estimator& oracle) {
    PlacementReport rep;
    rep.estimator = std::string(to_string(est.backend()));
    rep.demands = draw_demands(p);
    const auto t0 = std::chrono::steady_clock::now();

    Spectrum ff(p.band_slots), opt(p.band_slots);
    for (const auto& d : rep.demands) ff.place(make_channel(d, first_fit_place(ff, d)));

    est.reset_calls();
    for (const auto& d : rep.demands) {
        const auto sweep = sweep_placements(opt, d, p.geometry, est, p.threads);
        PlacementStep step;
        step.demand = d;
        step.first_fit_slot = first_fit_place(opt, d);
        step.chosen_slot = sweep.chosen_slot();
        step.objective_chosen = sweep.objective[sweep.best];
        // first-fit is the lowest feasible start, i.e. the first swept candidate
        step.objective_first_fit = sweep.objective.front();
        rep.candidate_evaluations += sweep.starts.size();
        opt.place(make_channel(d, step.chosen_slot));
        rep.steps.push_back(step);
    }
    rep.nli_computations = est.calls();
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    rep.first_fit_layout = ff.channels();
    rep.optimized_layout = opt.channels();
    const auto ff_link = ff.as_link(p.geometry.span_length_km, p.geometry.span_count);
    const auto opt_link = opt.as_link(p.geometry.span_length_km, p.geometry.span_count);
    double sum = 0.0;
    rep.min_gain_db = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.demands.size(); ++i) {
        rep.snr_first_fit_db.push_back(estimate_snr(ff_link, i, oracle));
        rep.snr_optimized_db.push_back(estimate_snr(opt_link, i, oracle));
        const double g = rep.snr_optimized_db.back() - rep.snr_first_fit_db.back();
        sum += g;
        rep.min_gain_db = std::min(rep.min_gain_db, g);
    }
    rep.average_gain_db = rep.demands.empty() ? 0.0 : sum / static_cast<double>(rep.demands.size());
    if (rep.demands.empty()) rep.min_gain_db = 0.0;
    return rep;
}

/// Report without wall time, so that reruns compare byte-identically.
inline nlohmann::json report_json(const PlacementReport& r, const ScenarioParams& p) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : r.steps)
        steps.push_back({{"demand", to_string(s.demand)},
                         {"first_fit_slot", s.first_fit_slot},
                         {"chosen_slot", s.chosen_slot},
                         {"objective_first_fit", s.objective_first_fit},
                         {"objective_chosen", s.objective_chosen}});
    return {{"estimator", r.estimator},
            {"span_length_km", p.geometry.span_length_km},
            {"span_count", p.geometry.span_count},
            {"fill", p.fill},
            {"seed", p.seed},
            {"band_slots", p.band_slots},
            {"demand_count", r.demands.size()},
            {"average_gain_db", r.average_gain_db},
            {"min_gain_db", r.min_gain_db},
            {"nli_computations", r.nli_computations},
            {"candidate_evaluations", r.candidate_evaluations},
            {"snr_first_fit_db", r.snr_first_fit_db},
            {"snr_optimized_db", r.snr_optimized_db},
            {"steps", steps}};
}

inline nlohmann::json layouts_json(const PlacementReport& r) {
    return {{"first_fit", r.first_fit_layout}, {"optimized", r.optimized_layout}};
}

}  // namespace nliconquer
