// Runs the cidx executable and checks exit codes and written files.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::string kCli = CIDX_CLI;
const std::string kData = CIDX_DATA_DIR;
const std::string kMarket = " --market " + kData + "/itraxx_s9_2009-09-30.json";
const std::string kModel = " --model " + kData + "/models/itraxx_5y.json";

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("cidx_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, const std::string& stderr_file = "/dev/null") {
    const std::string cmd = kCli + " " + args + " > /dev/null 2> " + stderr_file;
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("price-everything" + kMarket + kModel), 2);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("price-cds" + kMarket + kModel), 2);  // --maturity missing
    EXPECT_EQ(run("price-cdo" + kMarket + kModel + " --maturity 5Y --method fancy"), 2);
}

TEST(Cli, InputErrorsExitOneWithJson) {
    const auto err = scratch() / "err.json";
    EXPECT_EQ(run("price-cds" + kMarket + kModel + " --maturity 5Y --spread 0.01", err.string()), 1);
    const auto e = json::parse(slurp(err));
    EXPECT_EQ(e["code"], "UnitError");
    EXPECT_EQ(e["status"], "unit_error");
}

TEST(Cli, UnreachableIndexQuoteExitsThree) {
    auto market = json::parse(slurp(kData + "/itraxx_s9_2009-09-30.json"));
    market["quotes"][0]["index"]["price"] = "20%";
    const auto path = scratch() / "bad_market.json";
    std::ofstream(path) << market.dump();
    const auto err = scratch() / "err3.json";
    EXPECT_EQ(run("price-cds --market " + path.string() + kModel + " --maturity 5Y", err.string()), 3);
    EXPECT_EQ(json::parse(slurp(err))["code"], "NoSolution");
}

TEST(Cli, PriceCdoWritesEquityUpfront) {
    const auto out = scratch() / "cdo.json";
    ASSERT_EQ(run("price-cdo" + kMarket + kModel + " --maturity 5Y --out " + out.string()), 0);
    const auto r = json::parse(slurp(out));
    EXPECT_NEAR(r["tranches"][0]["upfront"].get<double>(), 0.3678, 0.01);
}

TEST(Cli, LossDistCsvRowsSumToOne) {
    const auto out = scratch() / "ld.json";
    const auto csv = scratch() / "ld.csv";
    ASSERT_EQ(run("loss-dist" + kMarket + kModel + " --horizon 5Y --out " + out.string() + " --csv " + csv.string()), 0);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "k,value");
    double sum = 0.0;
    int rows = 0;
    while (std::getline(in, line)) {
        sum += std::stod(line.substr(line.find(',') + 1));
        ++rows;
    }
    EXPECT_EQ(rows, 126);
    EXPECT_NEAR(sum, 1.0, 1e-8);
    EXPECT_EQ(slurp(csv).find('\r'), std::string::npos);
}

TEST(Cli, IdenticalInputsGiveIdenticalBytes) {
    const std::string mc = "mc-price" + kMarket + kModel + " --product cdo --maturity 5Y --paths 10000 --seed 11";
    const std::string ld = "loss-dist" + kMarket + kModel + " --horizon 3 --curve put";
    for (int i = 0; i < 2; ++i) {
        const auto tag = std::to_string(i);
        ASSERT_EQ(run(mc + " --out " + (scratch() / ("mc" + tag + ".json")).string()), 0);
        ASSERT_EQ(run(ld + " --out " + (scratch() / ("ld" + tag + ".json")).string() + " --csv " +
                      (scratch() / ("ld" + tag + ".csv")).string()),
                  0);
    }
    EXPECT_EQ(slurp(scratch() / "mc0.json"), slurp(scratch() / "mc1.json"));
    EXPECT_EQ(slurp(scratch() / "ld0.json"), slurp(scratch() / "ld1.json"));
    EXPECT_EQ(slurp(scratch() / "ld0.csv"), slurp(scratch() / "ld1.csv"));
    EXPECT_FALSE(slurp(scratch() / "mc0.json").empty());
}
