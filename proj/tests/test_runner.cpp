#include <adequacy/runner.hpp>

#include "test_workspace.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

using namespace adequacy;
using adequacy::scratch::slurp;
using adequacy::scratch::TempDir;

TEST(Sha256, KnownDigests) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ArtifactWriter, AtomicWriteLeavesNoTempFile) {
    TempDir dir;
    write_file_atomic(dir / "sub" / "a.txt", "one");
    write_file_atomic(dir / "sub" / "a.txt", "two");
    EXPECT_EQ(slurp(dir / "sub" / "a.txt"), "two");
    EXPECT_FALSE(std::filesystem::exists(dir / "sub" / "a.txt.tmp"));
}

TEST(ArtifactWriter, ManifestListsChecksums) {
    TempDir dir;
    ArtifactWriter w(dir.path());
    w.write("b.csv", "x,y\n1,2\n");
    w.write("a.txt", [](std::ostream& out) { out << "hello"; });
    w.finish("test", RunConfig{});
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(m["subcommand"], "test");
    ASSERT_EQ(m["artifacts"].size(), 3u);
    std::vector<std::string> names;
    for (const auto& a : m["artifacts"]) {
        names.push_back(a["file"]);
        const auto content = slurp(dir / a["file"].get<std::string>());
        EXPECT_EQ(a["sha256"], sha256_hex(content));
        EXPECT_EQ(a["bytes"], content.size());
    }
    EXPECT_EQ(names, (std::vector<std::string>{"a.txt", "b.csv", "config.json"}));
}

TEST(WindTag, FormatsShortest) {
    EXPECT_EQ(wind_tag(15.0), "wind15gw");
    EXPECT_EQ(wind_tag(2.5), "wind2.5gw");
}

TEST(Runner, GenDataWritesLoadableFiles) {
    TempDir dir;
    const auto c = scratch::small_config(dir.path());
    const auto inputs = load_inputs(c);
    EXPECT_EQ(inputs.dataset.years.size(), 3u);
    EXPECT_EQ(inputs.dataset.years.front().demand_mw.size(), 240u);
    EXPECT_GT(inputs.fleet.units.size(), 10u);
}

TEST(Runner, IndicesPerWindLevel) {
    TempDir dir;
    const auto c = scratch::small_config(dir.path());
    const auto files = run_subcommand("indices", c);
    EXPECT_EQ(files, (std::vector<std::string>{"config.json", "indices_wind20gw.json", "indices_wind5gw.json"}));
    const auto lo = nlohmann::json::parse(slurp(c.out_dir / "indices_wind5gw.json"));
    const auto hi = nlohmann::json::parse(slurp(c.out_dir / "indices_wind20gw.json"));
    EXPECT_GE(lo["aggregate"]["eeu_mwh"].get<double>(), hi["aggregate"]["eeu_mwh"].get<double>());
    EXPECT_EQ(lo["per_year"].size(), 3u);
    EXPECT_TRUE(std::filesystem::exists(c.out_dir / "manifest.json"));
}

TEST(Runner, CalibrationHitsTarget) {
    TempDir dir;
    const auto c = scratch::small_config(dir.path());
    run_subcommand("calibrate", c);
    std::istringstream in(slurp(c.out_dir / "calibration.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "wind_gw,target_eeu_mwh,shift_mw,achieved_eeu_mwh,lole_hours,iterations");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        ASSERT_EQ(f.size(), 6u);
        EXPECT_NEAR(std::stod(f[3]), 500.0, 500.0 * 1e-3);
    }
    EXPECT_EQ(rows, 2);
}

TEST(Runner, ExperimentsAreByteDeterministic) {
    TempDir dir;
    auto c = scratch::small_config(dir.path());
    c.out_dir = dir / "first";
    run_subcommand("experiment-fig2", c);
    c.out_dir = dir / "second";
    c.analysis.threads = 2;
    const auto files = run_subcommand("experiment-fig2", c);
    for (const auto& f : files) {
        if (f == "config.json") continue;
        EXPECT_EQ(slurp(dir / "first" / f), slurp(dir / "second" / f)) << f;
    }
    EXPECT_NE(std::find(files.begin(), files.end(), "fig2_eu_wind5gw.csv"), files.end());
    EXPECT_NE(std::find(files.begin(), files.end(), "fig2_summary.csv"), files.end());
}

TEST(Runner, EverySubcommandRuns) {
    TempDir dir;
    auto c = scratch::small_config(dir.path());
    c.analysis.leave_out_year = load_inputs(c).dataset.labels().back();
    for (const auto& sc : subcommands()) {
        const std::string name = sc.name;
        if (name == "serve" || name == "gen-data") continue;
        c.out_dir = dir / name;
        const auto files = run_subcommand(name, c);
        EXPECT_GE(files.size(), 2u) << name;
        EXPECT_TRUE(std::filesystem::exists(c.out_dir / "manifest.json")) << name;
    }
}

TEST(Runner, LeaveOneOutNeedsAYear) {
    TempDir dir;
    const auto c = scratch::small_config(dir.path());
    EXPECT_THROW(run_subcommand("leave-one-out", c), ValidationError);
    EXPECT_THROW(run_subcommand("bogus", c), ValidationError);
}

TEST(Runner, InfeasibleCalibrationIsAComputationError) {
    TempDir dir;
    auto c = scratch::small_config(dir.path());
    c.analysis.target_eeu_mwh = 1e15;
    EXPECT_THROW(run_subcommand("calibrate", c), ComputationError);
}

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ADEQUACY_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
    TempDir dir;
    const auto c = scratch::small_config(dir.path());
    auto j = to_json(c);
    std::ofstream(dir / "run.json") << j.dump();
    const std::string cfg = "--config " + (dir / "run.json").string();
    const std::string out = " --out-dir " + (dir / "cli").string();

    EXPECT_EQ(run_cli(""), 1);
    EXPECT_EQ(run_cli("bogus"), 1);
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli("indices " + cfg + out), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "cli" / "indices_wind5gw.json"));
    EXPECT_EQ(run_cli("indices " + cfg + out + " --alpha 1.5"), 1);
    EXPECT_EQ(run_cli("calibrate " + cfg + out + " --target-eeu-mwh 1e15"), 2);
    EXPECT_EQ(run_cli("indices --config " + (dir / "missing.json").string()), 1);
}

TEST(Cli, FlagsOverrideConfig) {
    TempDir dir;
    const auto c = scratch::small_config(dir.path());
    std::ofstream(dir / "run.json") << to_json(c).dump();
    ASSERT_EQ(run_cli("indices --config " + (dir / "run.json").string() + " --out-dir " + (dir / "o").string() +
                      " --wind-gw 7,9 --seed 42"),
              0);
    const auto echoed = nlohmann::json::parse(slurp(dir / "o" / "config.json"));
    EXPECT_EQ(echoed["scenario"]["wind_gw"], (std::vector<double>{7.0, 9.0}));
    EXPECT_EQ(echoed["analysis"]["seed"], 42);
    EXPECT_TRUE(std::filesystem::exists(dir / "o" / "indices_wind9gw.json"));
}
