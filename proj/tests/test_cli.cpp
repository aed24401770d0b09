#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Out {
    int code;
    std::string text;
};

Out sh(const std::string& args)
{
    std::string cmd = std::string(RYDTRANS_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    std::string text;
    std::array<char, 4096> buf;
    while (auto n = fread(buf.data(), 1, buf.size(), p)) text.append(buf.data(), n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, text};
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    auto d = fs::temp_directory_path() / ("rydtrans_cli_" + name);
    fs::remove_all(d);
    return d;
}

}

TEST(Cli, ListIsStable)
{
    auto a = sh("list"), b = sh("list");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.text, b.text);
    int lines = 0;
    std::istringstream in(a.text);
    std::string l;
    bool ssh = false;
    while (std::getline(in, l)) {
        ++lines;
        if (l.rfind("ssh-spectrum ", 0) == 0) ssh = l.find("N=100") != std::string::npos;
    }
    EXPECT_GE(lines, 14);
    EXPECT_TRUE(ssh);
}

TEST(Cli, UsageErrors)
{
    auto r = sh("run no-such-scenario");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.text.find("unknown scenario"), std::string::npos);
    EXPECT_EQ(sh("").code, 2);
    EXPECT_EQ(sh("run").code, 2);
    EXPECT_EQ(sh("defaults swap-gate").code, 0);
}

TEST(Cli, ConfigErrors)
{
    auto d = scratch("cfg");
    EXPECT_EQ(sh("run ssh-phase-diagram --out " + d.string() + " --set r_a=3MHz").code, 3);
    EXPECT_EQ(sh("run ssh-phase-diagram --out " + d.string() + " --set broken").code, 3);
    EXPECT_EQ(sh("run ssh-phase-diagram --out " + d.string() + " --config /nonexistent.json").code, 3);
    EXPECT_EQ(sh("run transport2 --out " + d.string() + " --set system.geometry.n=10").code, 3);
    fs::remove_all(d);
}

TEST(Cli, ArtifactsAndSummaryLine)
{
    auto d = scratch("art");
    auto r = sh("run ssh-phase-diagram --out " + d.string());
    ASSERT_EQ(r.code, 0) << r.text;
    auto s = nlohmann::json::parse(r.text);
    EXPECT_EQ(s["scenario"], "ssh-phase-diagram");
    EXPECT_TRUE(s.contains("config_hash"));
    EXPECT_TRUE(s.contains("version"));
    EXPECT_EQ(s["seed"], 1);
    for (auto& f : s["files"]) EXPECT_TRUE(fs::exists(d / f.get<std::string>())) << f;
    EXPECT_EQ(nlohmann::json::parse(slurp(d / "summary.json"))["config_hash"], s["config_hash"]);

    // no overwrite without --force
    EXPECT_EQ(sh("run ssh-phase-diagram --out " + d.string()).code, 2);
    EXPECT_EQ(sh("run ssh-phase-diagram --force --out " + d.string()).code, 0);
    fs::remove_all(d);
}

TEST(Cli, ByteIdenticalReruns)
{
    auto a = scratch("rep_a"), b = scratch("rep_b");
    const std::string args = "run noise-mc --seed 7 --set noise.n_trajectories=3 --set samples_per_peak=20";
    ASSERT_EQ(sh(args + " --out " + a.string()).code, 0);
    ASSERT_EQ(sh(args + " --threads 2 --out " + b.string()).code, 0);
    for (auto& e : fs::directory_iterator(a)) {
        auto name = e.path().filename();
        if (name == "summary.json") {
            auto x = nlohmann::json::parse(slurp(e.path())), y = nlohmann::json::parse(slurp(b / name));
            x.erase("timestamp");
            y.erase("timestamp");
            EXPECT_EQ(x, y);
        } else {
            EXPECT_EQ(slurp(e.path()), slurp(b / name)) << name;
        }
    }
    auto c = scratch("rep_c");
    ASSERT_EQ(sh("run noise-mc --seed 8 --set noise.n_trajectories=3 --set samples_per_peak=20 --out " + c.string()).code, 0);
    EXPECT_NE(slurp(a / "config.json"), "");
    EXPECT_NE(nlohmann::json::parse(slurp(a / "summary.json"))["config_hash"], nullptr);
    for (auto& p : {a, b, c}) fs::remove_all(p);
}
