#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "nliconquer/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string output;
};

// Runs the CLI inside `cwd` with stdout and stderr captured.
Run cli(const fs::path& cwd, const std::string& args) {
    const auto log = cwd / "cli_output.txt";
    const std::string cmd = "cd '" + cwd.string() + "' && env -u NLICONQUER_CONFIG '" NLICONQUER_CLI "' " +
                            args + " > '" + log.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = nliconquer::read_file(log);
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("nliconquer_test_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    const auto d = fresh_dir("usage");
    EXPECT_EQ(cli(d, "no-such-command").code, 2);
    EXPECT_EQ(cli(d, "--config missing.toml gen-dataset").code, 2);
    EXPECT_EQ(cli(d, "plan --years 0").code, 2);
    EXPECT_EQ(cli(d, "optimize-spectrum --estimator bogus").code, 2);
    EXPECT_EQ(cli(d, "--help").code, 0);
}

TEST(Cli, MissingModelIsADomainError) {
    const auto d = fresh_dir("nomodel");
    const auto r = cli(d, "eval --model nowhere/model.json");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("nliconquer train"), std::string::npos) << r.output;
}

TEST(Cli, SmallPipelineEndToEnd) {
    const auto d = fresh_dir("pipeline");
    nliconquer::write_file(d / "small.toml",
                           "[generation]\nlink_count = 16\nspan_lengths_km = [80.0]\n"
                           "[gbm]\nn_trees = 20\n[paths]\nstore = \"store.jsonl\"\n");
    const std::string base = "--config small.toml --threads 2 ";

    auto r = cli(d, base + "gen-dataset --out ds");
    ASSERT_EQ(r.code, 0) << r.output;
    for (const char* f : {"train.csv", "val.csv", "test.csv", "links.jsonl", "manifest.json", "resolved_config.toml"})
        EXPECT_TRUE(fs::exists(d / "ds" / f)) << f;
    EXPECT_TRUE(fs::exists(d / "store.jsonl"));
    EXPECT_TRUE(fs::exists(d / "store.jsonl.fiber.json"));

    r = cli(d, base + "train --data ds --out model");
    ASSERT_EQ(r.code, 0) << r.output;
    for (const char* f : {"model.json", "training_log.csv", "importance.csv", "resolved_config.toml"})
        EXPECT_TRUE(fs::exists(d / "model" / f)) << f;

    r = cli(d, base + "eval --data ds --model model/model.json --out eval");
    ASSERT_EQ(r.code, 0) << r.output;
    for (const char* f : {"cdf.csv", "cdf_gn.csv", "report.json", "report_gn.json"})
        EXPECT_TRUE(fs::exists(d / "eval" / f)) << f;
    // Everything the test split needs was computed during generation.
    EXPECT_NE(r.output.find("quadrature calls 0"), std::string::npos) << r.output;

    r = cli(d, base + "optimize-spectrum --estimator ml --model model/model.json --fill 0.1 --out opt/report.json");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(fs::exists(d / "opt" / "layouts.json"));

    r = cli(d, base + "plan --estimator gn --years 2 --out plan");
    ASSERT_EQ(r.code, 0) << r.output;
    const auto plan = nliconquer::read_json(d / "plan" / "plan.json");
    EXPECT_EQ(plan.at("estimator").get<std::string>(), "gn");
    EXPECT_TRUE(fs::exists(d / "plan" / "traffic.csv"));

    // A store computed for another fiber is refused.
    nliconquer::write_file(d / "other.toml", "[fiber]\ngamma_per_w_km = 2.0\n");
    r = cli(d, base + "--config other.toml gen-dataset --out ds2");
    EXPECT_EQ(r.code, 1) << r.output;
}
