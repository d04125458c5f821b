#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <sys/wait.h>

#include "leafscope/io.hpp"
#include "leafscope/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result cli(const std::string& args) {
    const std::string cmd = std::string(LEAFSCOPE_CLI) + " " + args + " 2>/dev/null";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe.get())) > 0) out.append(buf, n);
    const int status = pclose(pipe.release());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

const std::string kConfigs = std::string(LEAFSCOPE_SOURCE_DIR) + "/configs";

fs::path scratch() {
    const auto d = fs::temp_directory_path() / "leafscope_cli_test";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST(Cli, RunWritesReport) {
    const auto out = scratch() / "report.csv";
    const Result r = cli("run --config " + kConfigs + "/pipeline.yaml --out " + out.string());
    ASSERT_EQ(r.code, 0);
    const auto recs = leafscope::read_report(out.string());
    EXPECT_EQ(recs.size(), 3u);
    for (const auto& rec : recs) EXPECT_TRUE(rec.complete());
}

TEST(Cli, RunToStdoutIsDeterministic) {
    const Result a = cli("run --config " + kConfigs + "/pipeline.yaml --out -");
    const Result b = cli("run --config " + kConfigs + "/pipeline.yaml --out -");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.rfind(leafscope::kReportHeader, 0), 0u);
}

TEST(Cli, MissingConfigFails) {
    EXPECT_NE(cli("run --config /nonexistent/run.yaml").code, 0);
}

TEST(Cli, BadConfigFails) {
    const auto bad = scratch() / "bad.yaml";
    leafscope::io::write_file(bad.string(), "scene: {lidar: {retro_min_range: 3, retro_max_range: 2}}\n");
    EXPECT_EQ(cli("run --config " + bad.string()).code, 2);
}

TEST(Cli, UnwritableOutputIsIoError) {
    EXPECT_EQ(cli("run --config " + kConfigs + "/pipeline.yaml --out /nonexistent/dir/r.csv").code, 3);
}

TEST(Cli, SimulateWritesFrame) {
    const auto out = scratch() / "frame.csv";
    ASSERT_EQ(cli("simulate --scene " + kConfigs + "/scene.yaml --out " + out.string()).code, 0);
    const std::string text = leafscope::io::read_file(out.string());
    EXPECT_EQ(text.rfind("x,y,z,range,intensity,ring,azimuth,material\n", 0), 0u);
    EXPECT_NE(text.find(",retro\n"), std::string::npos);
}

TEST(Cli, DetectListsClusters) {
    const Result r = cli("detect --scene " + kConfigs + "/scene.yaml");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("cluster 0"), std::string::npos);
    EXPECT_NE(r.out.find("valid yes"), std::string::npos);
}

TEST(Cli, SteerPrintsCommand) {
    const Result r = cli("steer --target 1.5 0 -0.1");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("pitch_deg 0\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("in_envelope true"), std::string::npos);
    const Result far = cli("steer --rig " + kConfigs + "/scene.yaml --target -1 1 -0.1");
    ASSERT_EQ(far.code, 0);
    EXPECT_NE(far.out.find("in_envelope false"), std::string::npos);
}

TEST(Cli, FocusPrintsPower) {
    const Result r = cli("focus --distance 1 2");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("distance_m 1 power_D 1\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("distance_m 2 power_D 0.5\n"), std::string::npos) << r.out;
    EXPECT_EQ(cli("focus --distance 1 --calibration " + kConfigs + "/calibration.txt").code, 0);
    EXPECT_EQ(cli("focus --distance -1").code, 2);
}

TEST(Cli, InterrogatePrintsReadings) {
    const Result r = cli("interrogate --scene " + kConfigs + "/scene.yaml --sensor 0 --noise 0");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("band_nm,intensity,saturated"), std::string::npos);
    EXPECT_NE(r.out.find("state_score 0.7"), std::string::npos) << r.out;
    EXPECT_EQ(cli("interrogate --scene " + kConfigs + "/scene.yaml --sensor 9").code, 2);
}

TEST(Cli, UsageErrorsAreNonZero) {
    EXPECT_NE(cli("").code, 0);
    EXPECT_NE(cli("steer --target 1 2").code, 0);
}
