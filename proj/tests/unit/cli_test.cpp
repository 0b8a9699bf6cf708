#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "autosd/cli.hpp"
#include "autosd/orchestrator.hpp"
#include "autosd/session_io.hpp"
#include "autosd/text_util.hpp"
#include "test_support.hpp"

namespace autosd {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string demo(const std::string& name) { return (testing::fixture_dir() / "demo_bug" / name).string(); }

std::vector<std::string> replay_repair(const std::string& out) {
    return {"repair",         "--bug-config",    demo("bug.json"),    "--backend", "replay",
            "--replay-script", demo("three_step.replay"), "--probe-fixture", demo("probes.json"),
            "--n",            "2",               "--out",             out,         "--quiet"};
}

TEST(Cli, UnknownCommandIsAConfigError) {
    EXPECT_EQ(cli({"frobnicate"}).code, kExitConfig);
    EXPECT_EQ(cli({}).code, kExitConfig);
}

TEST(Cli, HelpSucceeds) {
    auto r = cli({"--help"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_NE(r.out.find("repair"), std::string::npos);
}

TEST(Cli, MissingBugConfig) {
    TempDir dir;
    auto r = cli({"repair", "--bug-config", (dir / "nope.json").string(), "--backend", "replay", "--replay-script",
                  demo("three_step.replay"), "--out", dir.path().string()});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("config error"), std::string::npos);
}

TEST(Cli, ReplayWithoutScript) {
    TempDir dir;
    EXPECT_EQ(cli({"repair", "--bug-config", demo("bug.json"), "--backend", "replay", "--out", dir.path().string()}).code,
              kExitConfig);
}

TEST(Cli, HttpWithoutEnvironmentIsUnavailable) {
    unsetenv("AUTOSD_API_BASE");
    unsetenv("AUTOSD_API_KEY");
    unsetenv("AUTOSD_MODEL");
    TempDir dir;
    auto r = cli({"repair", "--bug-config", demo("bug.json"), "--backend", "http", "--out", dir.path().string()});
    EXPECT_EQ(r.code, kExitBackendUnavailable);
    EXPECT_NE(r.err.find("AUTOSD_API_BASE"), std::string::npos);
}

TEST(Cli, PassingBugIsNotReproducible) {
    TempDir dir;
    fs::create_directories(dir / "p");
    write_file((dir / "p/m.py").string(), "def f():\n    return 1\n");
    write_file((dir / "p/t.py").string(), "import m\nassert m.f() == 1\n");
    write_file((dir / "bug.json").string(),
               R"({"id":"ok","project_root":"p","buggy_file":"m.py","method_span":[1,2],)"
               R"("failing_test_command":"python3 -B -S t.py"})");
    auto r = cli({"repair", "--bug-config", (dir / "bug.json").string(), "--backend", "replay", "--replay-script",
                  demo("three_step.replay"), "--out", (dir / "out").string(), "--quiet"});
    EXPECT_EQ(r.code, kExitNotReproducible) << r.err;
}

TEST(Cli, ReplayRepairWritesSessionsReportsAndSummary) {
    TempDir dir;
    auto r = cli(replay_repair(dir.path().string()));
    ASSERT_EQ(r.code, kExitOk) << r.err;
    for (int attempt : {0, 1}) {
        auto path = session_path(dir.path(), "running-max", attempt);
        ASSERT_TRUE(fs::exists(path)) << path;
        auto s = deserialize_session(read_file(path.string()));
        EXPECT_TRUE(s.confident);
        ASSERT_TRUE(s.patch);
        EXPECT_EQ(s.patch->evaluation, PatchEvaluation::Plausible);
        auto md = path;
        EXPECT_TRUE(fs::exists(md.replace_extension(".md")));
    }
    EXPECT_TRUE(fs::exists(dir / "summary.txt"));
    EXPECT_TRUE(fs::exists(dir / "results.json"));
    EXPECT_EQ(r.out, read_file((dir / "summary.txt").string()));
}

TEST(Cli, ReplayMismatchIsAConfigError) {
    TempDir dir;
    auto args = replay_repair(dir.path().string());
    args.push_back("--ablate-debugger");
    EXPECT_EQ(cli(args).code, kExitConfig);
}

TEST(Cli, RenderAndEvaluate) {
    TempDir dir;
    ASSERT_EQ(cli(replay_repair(dir.path().string())).code, kExitOk);
    auto session = session_path(dir.path(), "running-max", 0).string();
    auto md = cli({"render", "--session", session});
    EXPECT_EQ(md.code, kExitOk);
    EXPECT_NE(md.out.find("`<DEBUGGING DONE>`"), std::string::npos);
    auto html = cli({"render", "--session", session, "--format", "html", "--out", (dir / "x.html").string()});
    EXPECT_EQ(html.code, kExitOk);
    EXPECT_NE(read_file((dir / "x.html").string()).find("<html"), std::string::npos);
    EXPECT_EQ(cli({"render", "--session", session, "--format", "pdf"}).code, kExitConfig);

    auto ev = cli({"evaluate", "--sessions", dir.path().string(), "--out", (dir / "eval.json").string()});
    EXPECT_EQ(ev.code, kExitOk) << ev.err;
    EXPECT_TRUE(fs::exists(dir / "eval.json"));
}

TEST(Cli, RenderRejectsBrokenSession) {
    TempDir dir;
    write_file((dir / "bad.session").string(), "{\"schema\": 1}");
    EXPECT_EQ(cli({"render", "--session", (dir / "bad.session").string()}).code, kExitConfig);
    EXPECT_EQ(cli({"evaluate", "--sessions", dir.path().string()}).code, kExitConfig);
}

TEST(Cli, EvaluateEmptyDirectory) {
    TempDir dir;
    auto r = cli({"evaluate", "--sessions", dir.path().string()});
    EXPECT_EQ(r.code, kExitOk);
}

TEST(Cli, BenchgenAndBaseline) {
    TempDir dir;
    auto out = (dir / "bench").string();
    auto r = cli({"benchgen", "--corpus", (testing::fixture_dir() / "corpus").string(), "--size", "4", "--seed", "3",
                  "--out", out, "--timeout", "3"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("generated"), std::string::npos);
    auto b = cli({"baseline", "--manifest", out + "/manifest.json", "--reruns", "2", "--attempts", "2", "--out",
                  (dir / "base.json").string(), "--timeout", "3"});
    EXPECT_EQ(b.code, kExitOk) << b.err;
    EXPECT_TRUE(fs::exists(dir / "base.json"));
    EXPECT_EQ(cli({"benchgen", "--corpus", out, "--out", out, "--disable", "Nope"}).code, kExitConfig);
}

}  // namespace
}  // namespace autosd
