#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rootpeel/cli.hpp"

using namespace rootpeel;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "rootpeel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "rootpeel_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

const std::string four_points = std::string(ROOTPEEL_TEST_DATA) + "/four_points.csv";

}  // namespace

TEST(Cli, PeelFourPoint) {
  const auto r = run({"peel", "--input", four_points});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("peeled 2 of 4 generators"), std::string::npos) << r.out;
  const auto csv = run({"peel", "--input", four_points, "--format", "csv"});
  EXPECT_EQ(csv.code, 0);
  EXPECT_EQ(csv.out.rfind("generator,root,reason,zero_interval,birth_sigma,thresholds\n", 0), 0u);
}

TEST(Cli, EmptyInputIsDataError) {
  const auto p = write_file("empty.csv", "");
  const auto r = run({"peel", "--input", p.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error: empty input"), std::string::npos) << r.err;
  EXPECT_EQ(run({"peel", "--input", scratch("missing.csv").string()}).code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"peel", "--input", four_points, "--bogus"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"peel"}).code, 1);
  EXPECT_EQ(run({"barcode", "--input", four_points, "--sigma", "1", "--eps", "2"}).code, 1);
  EXPECT_EQ(run({"simulate", "--sampler", "nope"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, BConstant) {
  const auto r = run({"b-constant", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "b(1)=0.666666666667, c(1)=0.333333333333\n");
  EXPECT_EQ(run({"b-constant", "0"}).code, 2);
}

TEST(Cli, OtherSubcommands) {
  const auto nn = run({"nn", "--input", four_points, "--format", "csv"});
  EXPECT_EQ(nn.code, 0);
  EXPECT_NE(nn.out.find("3,2,2,true,true"), std::string::npos) << nn.out;
  const auto bars = run({"barcode", "--input", four_points});
  EXPECT_EQ(bars.code, 0);
  EXPECT_EQ(bars.out, "birth,death\n0,2\n0,2.5\n0,3\n0,inf\n");
  const auto st = run({"staircode", "--input", four_points, "--point", "3"});
  EXPECT_EQ(st.code, 0);
  EXPECT_NE(st.out.find("\"point\": 3"), std::string::npos);
  EXPECT_EQ(run({"staircode", "--input", four_points, "--point", "9"}).code, 2);
}

TEST(Cli, OutputIsDeterministic) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"peel", "--input", four_points},
        {"nn", "--input", four_points},
        {"peel", "--input", four_points, "--density-mode", "random", "--seed", "4"},
        {"simulate", "--n", "60", "--trials", "3", "--seed", "9"},
        {"simulate", "--n", "40", "--trials", "2", "--sampler", "mixture", "--density-mode", "kde",
         "--format", "json"},
        {"simulate", "--n", "30", "--trials", "3", "--table1"}}) {
    const auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
  }
}

TEST(Cli, PeelThenOracleCheckRoundTrip) {
  Rng rng(2024);
  for (int t = 0; t < 15; ++t) {
    const std::size_t n = 1 + rng.below(8);
    std::ostringstream csv;
    csv << "x,y,f\n";
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse coordinates so ties and duplicates show up.
      const double x = static_cast<double>(rng.below(4)), y = static_cast<double>(rng.below(3));
      csv << x << ',' << y << ',' << rng.below(3) << '\n';
    }
    const auto in = write_file("rt_" + std::to_string(t) + ".csv", csv.str());
    const auto trace = scratch("rt_" + std::to_string(t) + ".json");
    const auto p = run({"peel", "--input", in.string(), "--output", trace.string()});
    ASSERT_EQ(p.code, 0) << p.err;
    const auto o = run({"oracle-check", trace.string(), "--input", in.string()});
    EXPECT_EQ(o.code, 0) << csv.str() << o.out << o.err;
    EXPECT_NE(o.out.find(" records pass"), std::string::npos);
  }
}

TEST(Cli, OracleCheckRejectsLargeInputAndBadTraces) {
  std::ostringstream csv;
  for (int i = 0; i < 9; ++i) csv << i * 1.5 << ',' << (i % 4) << '\n';
  const auto big = write_file("big.csv", csv.str());
  const auto trace = scratch("big.json");
  ASSERT_EQ(run({"peel", "--input", big.string(), "--density-column", "1", "--output", trace.string()}).code, 0);
  const auto r = run({"oracle-check", trace.string(), "--input", big.string(), "--density-column", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("n <= 8"), std::string::npos);

  const auto bad = write_file("bad.json", "{not json");
  EXPECT_EQ(run({"oracle-check", bad.string(), "--input", four_points}).code, 2);
  const auto ex_trace = scratch("four_points.json");
  ASSERT_EQ(run({"peel", "--input", four_points, "--output", ex_trace.string()}).code, 0);
  // Wrong point count between trace and input.
  const auto three = write_file("three.csv", "x,f\n0,0\n1,1\n3,2\n");
  EXPECT_EQ(run({"oracle-check", ex_trace.string(), "--input", three.string()}).code, 2);
}

TEST(Cli, TamperedTraceFails) {
  const auto trace = scratch("tamper.json");
  ASSERT_EQ(run({"peel", "--input", four_points, "--output", trace.string()}).code, 0);
  std::ifstream f(trace);
  auto j = io::json::parse(f);
  // Claim x1 is rooted at x0, which it is not.
  j["records"][0]["generator"] = 1;
  j["records"][0]["root"] = 0;
  const auto bad = write_file("tampered.json", j.dump());
  const auto r = run({"oracle-check", bad.string(), "--input", four_points});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos) << r.out;
}
