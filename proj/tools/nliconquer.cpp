// nliconquer command-line front end.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nliconquer/bench.hpp"
#include "nliconquer/config.hpp"
#include "nliconquer/dataset.hpp"
#include "nliconquer/gbm.hpp"
#include "nliconquer/io.hpp"
#include "nliconquer/planner.hpp"
#include "nliconquer/qot.hpp"
#include "nliconquer/specopt.hpp"

namespace fs = std::filesystem;
using namespace nliconquer;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_domain = 1;
constexpr int exit_usage = 2;

struct Globals {
    std::vector<fs::path> configs;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<fs::path> store;
};

RunConfig resolve(const Globals& g) {
    RunConfig cfg = load_config(g.configs);
    if (g.seed) cfg.apply_seed(*g.seed);
    if (g.threads) cfg.threads = *g.threads;
    if (g.store) cfg.store_path = *g.store;
    if (cfg.threads == 0) cfg.threads = std::max(1u, std::thread::hardware_concurrency());
    cfg.fiber.validate();
    return cfg;
}

/// Coefficient store plus the oracle view on it, pinned to the fiber.
struct Oracle {
    SciStore store;
    OracleCoefficients coeffs;

    explicit Oracle(const RunConfig& cfg)
        : store((check_store_fiber(cfg.store_path, cfg.fiber), cfg.store_path)),
          coeffs(cfg.fiber, store) {}
};

std::shared_ptr<const gbm::GbmModel> load_model(const fs::path& path) {
    if (!fs::exists(path))
        throw DomainError("no model at " + path.string() +
                          "; run `nliconquer train` first or pass --model");
    return std::make_shared<const gbm::GbmModel>(gbm::deserialize(read_file(path)));
}

Estimator make_estimator(Backend b, const RunConfig& cfg, const Oracle& oracle,
                         const fs::path& model_path) {
    switch (b) {
    case Backend::ML: return Estimator::ml(oracle.coeffs, load_model(model_path));
    case Backend::ClosedForm: return Estimator::closed_form(cfg.fiber);
    case Backend::Oracle: return Estimator::oracle(oracle.coeffs);
    }
    throw DomainError("invalid estimator");
}

gbm::Samples to_samples(const std::vector<FeatureRow>& rows) {
    gbm::Samples s;
    for (const auto& r : rows) s.push(r.features, r.label_eta_db);
    return s;
}

int cmd_gen_dataset(const Globals& g, std::optional<fs::path> out, std::optional<std::size_t> links) {
    RunConfig cfg = resolve(g);
    if (out) cfg.dataset_dir = *out;
    if (links) cfg.generation.link_count = *links;
    Oracle oracle(cfg);
    const auto ds = generate(cfg.generation, oracle.coeffs, cfg.threads);
    oracle.store.flush();
    write_dataset(ds, cfg.dataset_dir);
    write_config_echo(cfg, cfg.dataset_dir);
    fmt::print("links {}  rows train/val/test {}/{}/{}  coefficients computed {}  reused {}\n",
               ds.links.size(), ds.train.size(), ds.val.size(), ds.test.size(),
               oracle.store.misses(), oracle.store.hits());
    fmt::print("wrote {}\n", cfg.dataset_dir.string());
    return exit_ok;
}

int cmd_train(const Globals& g, std::optional<fs::path> data, std::optional<fs::path> out,
              bool tune_grid) {
    RunConfig cfg = resolve(g);
    if (data) cfg.dataset_dir = *data;
    if (out) cfg.model_path = *out / "model.json";
    const auto ds = read_dataset(cfg.dataset_dir);
    const auto train_set = to_samples(ds.train);
    const auto val_set = to_samples(ds.val);
    auto params = cfg.gbm;
    params.threads = cfg.threads;
    const fs::path dir = cfg.model_path.parent_path();

    gbm::GbmModel model;
    if (tune_grid) {
        const auto result = gbm::tune(train_set, val_set, params, {}, feature_names());
        std::string table = "max_depth,learning_rate,row_subsample,trees,val_rmse\n";
        for (const auto& e : result.entries)
            table += fmt::format("{},{},{},{},{}\n", e.params.max_depth, e.params.learning_rate,
                                 e.params.row_subsample, e.trees, e.val_rmse);
        write_file(dir / "tuning.csv", table);
        model = result.best_model;
        cfg.gbm.max_depth = model.params.max_depth;
        cfg.gbm.learning_rate = model.params.learning_rate;
        cfg.gbm.row_subsample = model.params.row_subsample;
    } else {
        model = gbm::train(train_set, val_set, params, feature_names());
    }
    write_file(cfg.model_path, gbm::serialize(model));
    write_file(dir / "training_log.csv", gbm::history_csv(model));
    std::string imp = "feature,gain,share\n";
    for (const auto& i : gbm::feature_importance(model))
        imp += fmt::format("{},{},{}\n", i.feature, i.gain, i.share);
    write_file(dir / "importance.csv", imp);
    write_config_echo(cfg, dir);
    fmt::print("trees {}  val rmse {:.4f} dB  wrote {}\n", model.best_round,
               gbm::validation_rmse(model, val_set), cfg.model_path.string());
    return exit_ok;
}

int cmd_eval(const Globals& g, std::optional<fs::path> data, std::optional<fs::path> model_path,
             std::optional<fs::path> out) {
    RunConfig cfg = resolve(g);
    if (data) cfg.dataset_dir = *data;
    if (model_path) cfg.model_path = *model_path;
    if (out) cfg.report_dir = *out;
    auto model = load_model(cfg.model_path);
    const auto ds = read_dataset(cfg.dataset_dir);
    std::vector<LinkConfig> test;
    for (std::size_t i = 0; i < ds.links.size(); ++i)
        if (ds.link_split[i] == Split::Test) test.push_back(ds.links[i]);
    Oracle oracle(cfg);
    const auto reference = Estimator::oracle(oracle.coeffs);
    const auto ml = Estimator::ml(oracle.coeffs, model);
    const auto gn = Estimator::closed_form(cfg.fiber);
    const auto rm = evaluate(test, ml, reference, cfg.threads);
    const auto rg = evaluate(test, gn, reference, cfg.threads);
    oracle.store.flush();
    write_file(cfg.report_dir / "cdf.csv", cdf_csv(rm));
    write_file(cfg.report_dir / "cdf_gn.csv", cdf_csv(rg));
    write_json(cfg.report_dir / "report.json", report_json(rm));
    write_json(cfg.report_dir / "report_gn.json", report_json(rg));
    write_config_echo(cfg, cfg.report_dir);
    fmt::print("{:<8}{:>8}{:>12}{:>12}{:>12}\n", "backend", "count", "mean dB", "p50 dB", "p99 dB");
    for (const auto* r : {&rm, &rg})
        fmt::print("{:<8}{:>8}{:>12.4f}{:>12.4f}{:>12.4f}\n", r->backend, r->count(), r->mean_abs,
                   r->p50_abs, r->p99_abs);
    fmt::print("quadrature calls {}\n", oracle.store.misses());
    return exit_ok;
}

struct OptimizeArgs {
    int spans = 12;
    double span_km = 80.0;
    double fill = 0.5;
    std::string estimator = "ml";
    std::optional<fs::path> model;
    fs::path out = "out/optimize/report.json";
};

int cmd_optimize(const Globals& g, const OptimizeArgs& a) {
    RunConfig cfg = resolve(g);
    if (a.model) cfg.model_path = *a.model;
    const Backend backend = parse_backend(a.estimator);
    ScenarioParams p;
    p.geometry = {a.span_km, a.spans};
    p.fill = a.fill;
    p.seed = cfg.seed;
    p.threads = cfg.threads;
    if (a.spans < 1 || !(a.span_km > 0.0)) throw DomainError("optimize-spectrum: need --spans >= 1 and --span-km > 0");
    if (!(a.fill > 0.0 && a.fill <= 1.0)) throw DomainError("optimize-spectrum: --fill must be in (0, 1]");
    Oracle oracle(cfg);
    const auto est = make_estimator(backend, cfg, oracle, cfg.model_path);
    const auto grader = Estimator::oracle(oracle.coeffs);
    const auto rep = run_scenario(p, est, grader);
    oracle.store.flush();
    write_json(a.out, report_json(rep, p));
    const fs::path dir = a.out.has_parent_path() ? a.out.parent_path() : fs::path(".");
    write_json(dir / "layouts.json", layouts_json(rep));
    write_config_echo(cfg, dir);
    fmt::print("demands {}  average gain {:.3f} dB  worst channel {:+.3f} dB  NLI computations {}  {:.1f} s\n",
               rep.demands.size(), rep.average_gain_db, rep.min_gain_db, rep.nli_computations,
               rep.wall_seconds);
    return exit_ok;
}

struct PlanArgs {
    std::optional<fs::path> topology;
    int years = 5;
    std::string estimator = "ml";
    std::optional<fs::path> model;
    fs::path out = "out/plan";
};

int cmd_plan(const Globals& g, const PlanArgs& a) {
    RunConfig cfg = resolve(g);
    if (a.model) cfg.model_path = *a.model;
    const Backend backend = parse_backend(a.estimator);
    Topology topo = default_topology();
    if (a.topology) topo = read_json(*a.topology).get<Topology>();
    const auto traffic = generate_traffic(topo.pairs.size(), a.years, cfg.seed);
    Oracle oracle(cfg);
    const auto est = make_estimator(backend, cfg, oracle, cfg.model_path);
    const auto grader = Estimator::oracle(oracle.coeffs);
    const auto rep = plan(topo, traffic, est, grader, cfg.threads);
    oracle.store.flush();
    write_json(a.out / "plan.json", plan_json(topo, rep));
    write_file(a.out / "traffic.csv", traffic_csv(topo, traffic));
    write_config_echo(cfg, a.out);
    fmt::print("estimator {}  lightpaths {}  all requests met {}  blocked {}  oracle violations {}\n",
               rep.estimator, rep.total_lightpaths(), rep.all_satisfied() ? "yes" : "no",
               rep.blocking.size(), rep.threshold_violations);
    return exit_ok;
}

int cmd_bench(const Globals& g, std::optional<fs::path> model_path, std::size_t channels) {
    RunConfig cfg = resolve(g);
    if (model_path) cfg.model_path = *model_path;
    const auto model = load_model(cfg.model_path);
    const auto r = run_bench(cfg.fiber, *model, channels, cfg.seed);
    fmt::print("{}", bench_table(r));
    const bool ok = r.ml_faster_than_closed_form() && r.closed_form_faster_than_oracle();
    fmt::print("ordering ML < closed-form < oracle: {}\n", ok ? "holds" : "VIOLATED");
    return ok ? exit_ok : exit_domain;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EGN-style NLI estimation: oracle, closed-form GN and SCI-fed gradient boosting"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.configs, "TOML config file(s), merged in order")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Global seed");
    app.add_option("--threads", g.threads, "Worker threads (0: all cores); results do not depend on it");
    app.add_option("--store", g.store, "Coefficient cache file (JSON lines)");

    auto* gen = app.add_subcommand("gen-dataset", "Generate random links and their feature rows");
    std::optional<fs::path> gen_out;
    std::optional<std::size_t> gen_links;
    gen->add_option("--out", gen_out, "Dataset directory");
    gen->add_option("--links", gen_links, "Number of links")->check(CLI::PositiveNumber);

    auto* train = app.add_subcommand("train", "Train the gradient-boosted NLI model");
    std::optional<fs::path> train_data, train_out;
    bool tune_grid = false;
    train->add_option("--data", train_data, "Dataset directory");
    train->add_option("--out", train_out, "Model directory");
    train->add_flag("--tune", tune_grid, "Grid-search depth, learning rate and subsample on validation RMSE");

    auto* ev = app.add_subcommand("eval", "SNR error of ML and closed-form GN against the oracle on the test split");
    std::optional<fs::path> eval_data, eval_model, eval_out;
    ev->add_option("--data", eval_data, "Dataset directory");
    ev->add_option("--model", eval_model, "Model file");
    ev->add_option("--out", eval_out, "Report directory");

    auto* opt = app.add_subcommand("optimize-spectrum", "First-fit versus NLI-aware channel placement on one link");
    OptimizeArgs oa;
    opt->add_option("--spans", oa.spans, "Span count")->capture_default_str();
    opt->add_option("--span-km", oa.span_km, "Span length in km")->capture_default_str();
    opt->add_option("--fill", oa.fill, "Target fraction of occupied slots")->capture_default_str();
    opt->add_option("--estimator", oa.estimator, "ml, gn or oracle")
        ->check(CLI::IsMember({"ml", "gn", "oracle"}))
        ->capture_default_str();
    opt->add_option("--model", oa.model, "Model file (ml estimator)");
    opt->add_option("--out", oa.out, "Report file; layouts.json is written next to it")->capture_default_str();

    auto* pl = app.add_subcommand("plan", "Multi-year planning with the estimator as path computation engine");
    PlanArgs pa;
    pl->add_option("--topology", pa.topology, "Topology JSON")->check(CLI::ExistingFile);
    pl->add_option("--years", pa.years, "Planning years")->check(CLI::PositiveNumber)->capture_default_str();
    pl->add_option("--estimator", pa.estimator, "ml, gn or oracle")
        ->check(CLI::IsMember({"ml", "gn", "oracle"}))
        ->capture_default_str();
    pl->add_option("--model", pa.model, "Model file (ml estimator)");
    pl->add_option("--out", pa.out, "Output directory")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "Per-call latency of ML, closed-form GN and the oracle");
    std::optional<fs::path> bench_model;
    std::size_t bench_channels = 80;
    bench->add_option("--model", bench_model, "Model file");
    bench->add_option("--channels", bench_channels, "Channels on the benchmark spectrum")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*gen) return cmd_gen_dataset(g, gen_out, gen_links);
        if (*train) return cmd_train(g, train_data, train_out, tune_grid);
        if (*ev) return cmd_eval(g, eval_data, eval_model, eval_out);
        if (*opt) return cmd_optimize(g, oa);
        if (*pl) return cmd_plan(g, pa);
        if (*bench) return cmd_bench(g, bench_model, bench_channels);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_domain;
    }
    return exit_usage;
}
