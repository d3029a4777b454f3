// SPDX-License-Identifier: Apache-2.0
#include "scsp/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace fs = std::filesystem;
using scsp::cli::run;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string model_path(const std::string& name) { return std::string(SCSP_MODELS_DIR) + "/" + name; }

class TempFile {
public:
    explicit TempFile(const std::string& text, const std::string& ext = ".scsp") {
        static int counter = 0;
        path_ = (fs::temp_directory_path() / ("scsp_cli_test_" + std::to_string(::getpid()) + "_" +
                                              std::to_string(counter++) + ext))
                    .string();
        std::ofstream(path_) << text;
    }
    ~TempFile() { fs::remove(path_); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

} // namespace

TEST(Cli, SolveWorkedModel) {
    auto r = invoke({"solve", model_path("m1.scsp"), "--stable"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("status: ok\n"), std::string::npos);
    EXPECT_NE(r.out.find("objective: 3/2 (1.5)\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("  x [] = 1\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("scenarios: 2\n"), std::string::npos);
    EXPECT_NE(r.out.find("wall_ms: 0.000\n"), std::string::npos);
}

TEST(Cli, CheckReportsThetaRange) {
    TempFile bad("int x in 0..1 stage 1;\nstoch w in {0:1/2, 1:1/2} stage 1;\nchance(0/1) x = w;\n");
    auto r = invoke({"check", bad.path()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("THETA_RANGE"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find(bad.path() + ":3:8"), std::string::npos) << r.err;

    auto ok = invoke({"check", model_path("m2.scsp")});
    EXPECT_EQ(ok.code, 0);
}

TEST(Cli, VerifyAgrees) {
    auto r = invoke({"verify", model_path("m2.scsp")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("pipeline: feasible 5/3\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("oracle: feasible 5/3\n"), std::string::npos);
    EXPECT_NE(r.out.find("result: agree\n"), std::string::npos);
}

TEST(Cli, InfeasibleModelExitsTwo) {
    TempFile m("int x in 0..1 stage 1; stoch w in {0:1/2, 1:1/2} stage 1; chance(3/4) x = w;"
               "maximize expected x + w;");
    auto r = invoke({"solve", m.path(), "--format", "json", "--stable"});
    EXPECT_EQ(r.code, 2);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["status"], "infeasible");
    EXPECT_TRUE(j["objective"].is_null());
    auto v = invoke({"verify", m.path()});
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("pipeline: infeasible\noracle: infeasible\n"), std::string::npos) << v.out;
}

TEST(Cli, JsonReport) {
    auto r = invoke({"solve", model_path("m2.scsp"), "--format", "json", "--stable"});
    ASSERT_EQ(r.code, 0);
    auto j = nlohmann::ordered_json::parse(r.out);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"status", "objective", "objective_approx", "policy", "stats"}));
    EXPECT_EQ(j["objective"], "5/3");
    ASSERT_EQ(j["policy"].size(), 3u);
    EXPECT_EQ(j["policy"][1]["variable"], "x2");
    EXPECT_EQ(j["policy"][1]["history"], "w1=1");
    EXPECT_EQ(j["policy"][1]["value"], 1);
    EXPECT_EQ(j["stats"]["wall_ms"], 0.0);
}

TEST(Cli, StableOutputIsByteIdentical) {
    for (const char* name : {"m1.scsp", "m2.scsp"}) {
        for (const char* fmt : {"text", "json"}) {
            auto a = invoke({"solve", model_path(name), "--format", fmt, "--stable"});
            auto b = invoke({"solve", model_path(name), "--format", fmt, "--stable"});
            EXPECT_EQ(a.out, b.out);
        }
    }
}

TEST(Cli, CompileThenSolveFlat) {
    TempFile out("", ".flat");
    auto c = invoke({"compile", model_path("m1.scsp"), "-o", out.path()});
    ASSERT_EQ(c.code, 0) << c.err;
    std::ifstream in(out.path());
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "scsp-flat 1");
    auto s = invoke({"solve-flat", out.path(), "--stable"});
    EXPECT_EQ(s.code, 0);
    EXPECT_NE(s.out.find("objective: 3/2"), std::string::npos) << s.out;
}

TEST(Cli, ErrorPaths) {
    EXPECT_EQ(invoke({}).code, 1);
    EXPECT_EQ(invoke({"frobnicate"}).code, 1);
    auto missing = invoke({"solve", "/nonexistent/model.scsp"});
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.err.find("error[IO]"), std::string::npos);
    EXPECT_EQ(invoke({"solve", model_path("m1.scsp"), "--format", "xml"}).code, 1);

    TempFile big("int x in 0..1 stage 1; stoch a in {0:1/2,1:1/2} stage 1; stoch b in {0:1/2,1:1/2} stage 1;"
                 "x >= 0;");
    auto cap = invoke({"solve", big.path(), "--max-scenarios", "3"});
    EXPECT_EQ(cap.code, 1);
    EXPECT_NE(cap.err.find("error[SIZE_LIMIT]"), std::string::npos);

    TempFile flat("scsp-flat 1\nvar 0 0\n", ".flat");
    auto f = invoke({"solve-flat", flat.path()});
    EXPECT_EQ(f.code, 1);
    EXPECT_NE(f.err.find("error[FLAT_FORMAT]"), std::string::npos);

    TempFile syntax("int x in 0..;");
    auto p = invoke({"check", syntax.path()});
    EXPECT_EQ(p.code, 1);
    EXPECT_NE(p.err.find("PARSE_EXPECTED"), std::string::npos);
}

TEST(Cli, HelpExitsZero) {
    auto r = invoke({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("verify"), std::string::npos);
}

// Each corpus model ships with the `verify` output it must reproduce.
TEST(Cli, CorpusMatchesExpectedVerifyOutput) {
    int seen = 0;
    for (const auto& e : fs::directory_iterator(SCSP_MODELS_DIR)) {
        if (e.path().extension() != ".scsp") continue;
        fs::path expected = e.path();
        expected.replace_extension(".expected");
        ASSERT_TRUE(fs::exists(expected)) << expected;
        std::ifstream in(expected);
        std::stringstream want;
        want << in.rdbuf();
        auto r = invoke({"verify", e.path().string()});
        EXPECT_EQ(r.code, 0) << e.path();
        EXPECT_EQ(r.out, want.str()) << e.path();
        ++seen;
    }
    EXPECT_GE(seen, 5);
}
