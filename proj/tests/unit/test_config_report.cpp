#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "weyl/config.hpp"
#include "weyl/errors.hpp"
#include "weyl/report.hpp"

using namespace weyl;

namespace {

const char* kValid = R"({
  "schema_version": 1,
  "seed": 9,
  "experiments": [{
    "name": "ho",
    "model": {"geometry": {"kind": "Line1D"}, "potential": {"form": "Harmonic", "stiffness": [1.0]}},
    "pair": {"mode": "compactify", "margin": 2.0},
    "lambda": 1.0,
    "hbar_grid": [0.1, 0.05, 0.03],
    "checks": ["WeylConvergence", "RelativeInequality"]
  }]
})";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kValid;
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse_experiment_file(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesValidFile) {
  const ExperimentFile f = parse_experiment_file(kValid);
  ASSERT_EQ(f.experiments.size(), 1u);
  const SweepConfig& c = f.experiments[0];
  EXPECT_EQ(c.name, "ho");
  EXPECT_EQ(c.pair.mode, PairMode::Compactify);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.hbar_grid.size(), 3u);
  EXPECT_TRUE(c.has(Check::RelativeInequality));
  EXPECT_FALSE(c.has(Check::RankLemma));
  EXPECT_EQ(f.output_dir, "weyl-out");
}

TEST(Config, UnknownCheckIsNamed) {
  const std::string msg = error_of(with(R"("RelativeInequality"])", R"("Frobnicate"])"));
  EXPECT_NE(msg.find("experiments[0].checks[1]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("Frobnicate"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyIsNamed) {
  const std::string msg = error_of(with(R"("lambda": 1.0)", R"("lambda": 1.0, "lamda": 2.0)"));
  EXPECT_NE(msg.find("lamda"), std::string::npos) << msg;
}

TEST(Config, HbarGridMustDecrease) {
  const std::string msg = error_of(with("[0.1, 0.05, 0.03]", "[0.05, 0.1, 0.03]"));
  EXPECT_NE(msg.find("hbar_grid[1]"), std::string::npos) << msg;
}

TEST(Config, HbarMustBePositive) {
  const std::string msg = error_of(with("[0.1, 0.05, 0.03]", "[0.1, 0.05, -0.03]"));
  EXPECT_NE(msg.find("hbar_grid[2]"), std::string::npos) << msg;
  EXPECT_NE(msg.find("positive"), std::string::npos) << msg;
}

TEST(Config, RejectsWrongSchemaVersionAndBadJson) {
  EXPECT_FALSE(error_of(with(R"("schema_version": 1)", R"("schema_version": 7)")).empty());
  EXPECT_FALSE(error_of("{ not json").empty());
}

TEST(Config, FingerprintIgnoresJobs) {
  SweepConfig a = parse_experiment_file(kValid).experiments[0];
  SweepConfig b = a;
  b.jobs = 4;
  EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
  b.lambda = 1.5;
  EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
  EXPECT_EQ(config_fingerprint(a).size(), 16u);
}

TEST(Report, CsvHeader) {
  EXPECT_EQ(csv_header(),
            "hbar,n_count,scaled_count,volume,remainder,counting_method,truncation_ratio,relative_forward,"
            "relative_reverse,ims_suite,rank_lemma");
}

TEST(Report, CsvRowsAndJsonRoundTrip) {
  SweepConfig c = parse_experiment_file(kValid).experiments[0];
  const SweepReport r = run_weyl_sweep(c);
  ASSERT_TRUE(r.complete) << r.failure_detail;

  const std::string csv = to_csv(r);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, csv_header());
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++n;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10) << line;
  }
  EXPECT_EQ(n, r.rows.size());

  const std::string json = to_json(r);
  const nlohmann::ordered_json doc = nlohmann::ordered_json::parse(json);
  EXPECT_EQ(doc.dump(2) + "\n", json);
  EXPECT_EQ(doc["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(doc["rows"].size(), r.rows.size());
  EXPECT_EQ(doc["rows"][0]["n_count"].get<std::size_t>(), r.rows[0].n_count);
  EXPECT_EQ(doc["provenance"]["config_hash"], config_fingerprint(c));
}

TEST(Report, WritesAllFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "weyl_report_test";
  std::filesystem::remove_all(dir);
  SweepConfig c = parse_experiment_file(kValid).experiments[0];
  c.checks = {Check::WeylConvergence};
  c.pair.mode = PairMode::None;
  const SweepReport r = run_weyl_sweep(c);
  write_report_files(r, dir);
  for (const char* ext : {".csv", ".json", ".dat", ".gp"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / (std::string("ho") + ext))) << ext;
  }
  std::ifstream in(dir / "ho.json");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), to_json(r));
  std::filesystem::remove_all(dir);
}
