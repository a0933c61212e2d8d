#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ustat_cli/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("ustat_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write(const std::string& name, const std::string& text) {
        std::ofstream(dir_ / name) << text;
        return dir_ / name;
    }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        args.insert(args.begin(), "ustat");
        return ustat::cli::run(args, out_, err_);
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream f(p);
        std::stringstream s;
        s << f.rdbuf();
        return s.str();
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

}  // namespace

TEST_F(CliTest, ComputeInlineData) {
    const auto cfg = write("c.json", R"({"kernel": {"name": "product", "m": 2}, "data": [1, -1, 2]})");
    ASSERT_EQ(run({"compute", "--config", cfg.string()}), 0) << err_.str();
    const json j = json::parse(out_.str());
    EXPECT_EQ(j["value"].get<double>(), -1.0);
    EXPECT_EQ(j["n"], 3);
    EXPECT_EQ(j["m"], 2);
    EXPECT_EQ(j["running_max"], json({1.0, 1.0}));
}

TEST_F(CliTest, ComputeFromCsvAndBernoulliOne) {
    write("x.csv", "value\n1\n-1\n2\n0.5\n");
    const auto cfg = write("c.json", R"({"kernel": "product", "data_file": ")" + (dir_ / "x.csv").string() + R"("})");
    ASSERT_EQ(run({"compute", "--config", cfg.string()}), 0) << err_.str();
    const double complete = json::parse(out_.str())["value"].get<double>();
    const auto inc = write("i.json", R"({"kernel": "product", "data_file": ")" + (dir_ / "x.csv").string() +
                                         R"(", "design": {"variant": "bernoulli", "p_n": 1.0}})");
    ASSERT_EQ(run({"compute", "--config", inc.string()}), 0) << err_.str();
    EXPECT_EQ(json::parse(out_.str())["value"].get<double>(), complete);
}

TEST_F(CliTest, ComputeSyntheticIsSeeded) {
    const auto cfg = write("c.json", R"({"kernel": "covariance", "distribution": "gaussian", "n": 50})");
    ASSERT_EQ(run({"compute", "--config", cfg.string(), "--seed", "3"}), 0);
    const std::string a = out_.str();
    ASSERT_EQ(run({"compute", "--config", cfg.string(), "--seed", "3", "--threads", "4"}), 0);
    EXPECT_EQ(out_.str(), a);
    ASSERT_EQ(run({"compute", "--config", cfg.string(), "--seed", "4"}), 0);
    EXPECT_NE(out_.str(), a);
}

TEST_F(CliTest, MissingKernelIsUsageError) {
    const auto cfg = write("c.json", R"({"data": [1, 2, 3]})");
    EXPECT_EQ(run({"compute", "--config", cfg.string()}), 2);
    EXPECT_NE(err_.str().find("kernel"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"compute"}), 2);
    EXPECT_EQ(run({"frobnicate"}), 2);
    EXPECT_EQ(run({"compute", "--config", (dir_ / "missing.json").string()}), 2);
    const auto bad = write("bad.json", "{not json");
    EXPECT_EQ(run({"compute", "--config", bad.string()}), 2);
    EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, DecomposeCertifiesOrders) {
    const auto sum = write("s.json", R"({"kernel": "sum", "distribution": {"family": "uniform", "a": -1, "b": 1},
                                        "inner": 256, "outer": 256})");
    ASSERT_EQ(run({"decompose", "--config", sum.string()}), 0) << err_.str();
    EXPECT_EQ(json::parse(out_.str())["report"]["order"], 1);
    const auto prod = write("p.json", R"({"kernel": {"name": "product", "m": 3}, "distribution": "rademacher"})");
    ASSERT_EQ(run({"decompose", "--config", prod.string()}), 0);
    const json j = json::parse(out_.str());
    EXPECT_EQ(j["report"]["order"], 3);
    EXPECT_EQ(j["report"]["degenerate"], true);
}

TEST_F(CliTest, DecomposeLevelOnNonSymmetricKernelIsUsageError) {
    const auto cfg = write("c.json", R"({"kernel": "sign", "distribution": "rademacher", "level": 1})");
    EXPECT_EQ(run({"decompose", "--config", cfg.string()}), 2);
    EXPECT_NE(err_.str().find("level"), std::string::npos);
}

TEST_F(CliTest, DecomposeComponentReport) {
    const auto cfg = write("c.json", R"({"kernel": "covariance", "distribution": "rademacher", "level": 2,
                                        "reconstruction_samples": 10})");
    ASSERT_EQ(run({"decompose", "--config", cfg.string()}), 0) << err_.str();
    const json j = json::parse(out_.str());
    EXPECT_EQ(j["component"]["degenerate"], true);
    EXPECT_LE(j["reconstruction"]["max_deviation"].get<double>(), 1e-12);
}

TEST_F(CliTest, ExperimentRunWritesManifestAndReports) {
    const auto cfg = write("e.json", R"({"experiment": "moment", "kernel": "product", "distribution": "rademacher",
                                        "params": {"N_grid": [4, 8, 16]}})");
    const auto out1 = dir_ / "run1", out8 = dir_ / "run8";
    const int code = run({"experiment", "run", "--config", cfg.string(), "--out", out1.string(), "--replications",
                          "300", "--threads", "1"});
    ASSERT_TRUE(code == 0 || code == 1) << err_.str();
    EXPECT_NE(out_.str().find("moment:"), std::string::npos);
    const json manifest = json::parse(slurp(out1 / "manifest.json"));
    EXPECT_EQ(manifest["seed"], 0);
    EXPECT_EQ(manifest["config_hash"].get<std::string>().size(), 16u);
    for (const auto& f : manifest["outputs"]) EXPECT_TRUE(fs::exists(out1 / f.get<std::string>())) << f;
    EXPECT_TRUE(fs::exists(out1 / "moment.csv"));
    const json report = json::parse(slurp(out1 / "report.json"));
    EXPECT_EQ(report["config"]["replications"], 300);
    EXPECT_FALSE(report.dump().find("started_at") != std::string::npos);

    ASSERT_EQ(run({"experiment", "run", "--config", cfg.string(), "--out", out8.string(), "--replications", "300",
                   "--threads", "8"}),
              code);
    EXPECT_EQ(slurp(out1 / "report.json"), slurp(out8 / "report.json"));
    EXPECT_EQ(slurp(out1 / "moment.csv"), slurp(out8 / "moment.csv"));
}

TEST_F(CliTest, ExperimentErrors) {
    const auto unknown = write("u.json", R"({"experiment": "nope", "kernel": "product", "distribution": "rademacher"})");
    EXPECT_EQ(run({"experiment", "run", "--config", unknown.string(), "--out", (dir_ / "o").string()}), 2);
    EXPECT_NE(err_.str().find("experiment"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir_ / "o"));
    const auto ok = write("ok.json", R"({"experiment": "moment", "kernel": "product", "distribution": "rademacher"})");
    EXPECT_EQ(run({"experiment", "run", "--config", ok.string()}), 2);  // --out missing
    EXPECT_EQ(run({"experiment", "run", "--config", ok.string(), "--out", "x", "--threads", "0"}), 2);
}

TEST_F(CliTest, SeedFlagOverridesConfig) {
    const auto cfg = write("e.json", R"({"experiment": "moment", "kernel": "product", "distribution": "rademacher",
                                        "seed": 9, "replications": 50, "params": {"N_grid": [4, 8]}})");
    ASSERT_LE(run({"experiment", "run", "--config", cfg.string(), "--out", (dir_ / "a").string()}), 1);
    EXPECT_EQ(json::parse(slurp(dir_ / "a" / "report.json"))["seed"], 9);
    ASSERT_LE(run({"experiment", "run", "--config", cfg.string(), "--out", (dir_ / "b").string(), "--seed", "0"}), 1);
    EXPECT_EQ(json::parse(slurp(dir_ / "b" / "report.json"))["seed"], 0);
}

TEST(SampleFile, ParsesSeparatorsAndRejectsJunk) {
    const auto p = fs::temp_directory_path() / "ustat_sample_test.csv";
    std::ofstream(p) << "1, 2;3\n4.5e0\n";
    EXPECT_EQ(ustat::cli::read_sample_file(p), (std::vector<double>{1, 2, 3, 4.5}));
    std::ofstream(p) << "1\nabc2\n";
    EXPECT_THROW((void)ustat::cli::read_sample_file(p), std::runtime_error);
    fs::remove(p);
}
