#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cla/cli.hpp"
#include "fixtures.hpp"

using namespace cla;
using namespace cla::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << s;
}

json lewis_config(bool noiseless) {
  json community = {{"n_speakers", 1}, {"n_listeners", 1}, {"epsilon", noiseless ? 0.0 : 0.2}, {"temp_msg", 1.0}};
  if (noiseless) {
    community["zero_temp_msg"] = true;
    community["codebook_k"] = 3;
  }
  return {{"game",
           {{"kind", "lewis"},
            {"vocab", {"a", "b", "c"}},
            {"max_msg_len", 1},
            {"horizon", 1},
            {"gamma", 1.0},
            {"reward_params", {{"correct", 1.0}}},
            {"layout", {{"candidates", {"x", "y", "z"}}, {"target", 0}}}}},
          {"community", community},
          {"inference", {{"alpha", 1.0}}},
          {"run", {{"n_episodes", 300}, {"seed", 7}, {"out", "out"}}}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir("cli");
    config_ = dir_ / "config.json";
    spit(config_, lewis_config(false).dump(2));
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "cla");
    out_.str("");
    err_.str("");
    return cli::run_command(args, out_, err_);
  }
  int run_in(const std::string& cmd, const fs::path& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{cmd, "--config", config_.string(), "--out", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }

  fs::path dir_, config_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, UnknownSubcommandIsAUsageError) {
  EXPECT_EQ(run({"bogus"}), cli::kUsage);
  EXPECT_NE(err_.str().find("unknown subcommand 'bogus'"), std::string::npos);
  EXPECT_NE(err_.str().find("gen-community"), std::string::npos);
  EXPECT_EQ(run({}), cli::kUsage);
  EXPECT_EQ(run({"collect", "--n", "many"}), cli::kUsage);
}

TEST_F(Cli, HelpListsEveryFlag) {
  EXPECT_EQ(run({"collect", "--help"}), cli::kOk);
  for (const char* flag : {"--config", "--seed", "--n", "--alpha", "--out", "--canonical", "CLA_CONFIG"})
    EXPECT_NE(out_.str().find(flag), std::string::npos) << flag;
}

TEST_F(Cli, MissingOrBadConfigExitsWithConfigCode) {
  ::unsetenv(cli::kConfigEnv);
  EXPECT_EQ(run({"collect"}), cli::kConfig);
  EXPECT_EQ(run({"collect", "--config", (dir_ / "nope.json").string()}), cli::kConfig);
  spit(dir_ / "bad.json", R"({"game": {"kind": "chess"}})");
  EXPECT_EQ(run({"collect", "--config", (dir_ / "bad.json").string()}), cli::kConfig);
  EXPECT_EQ(run_in("fit-wernicke", dir_ / "o", {"--alpha", "0"}), cli::kConfig);
}

TEST_F(Cli, ConfigFromEnvironment) {
  ::setenv(cli::kConfigEnv, config_.string().c_str(), 1);
  EXPECT_EQ(run({"collect", "--out", (dir_ / "env").string(), "--n", "10"}), cli::kOk) << err_.str();
  ::unsetenv(cli::kConfigEnv);
  EXPECT_EQ(load((dir_ / "env" / "dataset.jsonl").string()).records.size(), 10u);
}

TEST_F(Cli, FullPipelineWritesEveryArtifact) {
  const auto out = dir_ / "run";
  for (const char* cmd : {"gen-community", "collect", "fit-broca", "fit-wernicke", "detect"}) {
    ASSERT_EQ(run_in(cmd, out), cli::kOk) << cmd << ": " << err_.str();
  }
  EXPECT_EQ(slurp(out / "report.csv").substr(0, slurp(out / "report.csv").find('\n')),
            "kind,listeners_detected,max_listening_statistic,signalling_detected,signalling_statistic,"
            "signalling_p_value");
  ASSERT_EQ(run_in("eval-speaker", out), cli::kOk) << err_.str();
  EXPECT_EQ(slurp(out / "report.csv").substr(0, std::string(kSpeakerCsvHeader).size()), kSpeakerCsvHeader);
  ASSERT_EQ(run_in("eval-listener", out), cli::kOk) << err_.str();
  EXPECT_EQ(slurp(out / "report.csv").substr(0, std::string(kListenerCsvHeader).size()), kListenerCsvHeader);
  for (const char* f : {"community.json", "dataset.jsonl", "broca.json", "wernicke.json", "report.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST_F(Cli, CanonicalCollectIsByteIdentical) {
  ASSERT_EQ(run_in("collect", dir_ / "a", {"--n", "100", "--seed", "7", "--canonical"}), cli::kOk);
  ASSERT_EQ(run_in("collect", dir_ / "b", {"--n", "100", "--seed", "7", "--canonical"}), cli::kOk);
  EXPECT_EQ(slurp(dir_ / "a" / "dataset.jsonl"), slurp(dir_ / "b" / "dataset.jsonl"));
  ASSERT_EQ(run_in("collect", dir_ / "c", {"--n", "100", "--seed", "8", "--canonical"}), cli::kOk);
  EXPECT_NE(slurp(dir_ / "a" / "dataset.jsonl"), slurp(dir_ / "c" / "dataset.jsonl"));
}

TEST_F(Cli, NoiselessListenerIsRecoveredAtLargeAlpha) {
  spit(config_, lewis_config(true).dump(2));
  const auto out = dir_ / "nl";
  ASSERT_EQ(run_in("collect", out), cli::kOk) << err_.str();
  ASSERT_EQ(run_in("fit-wernicke", out, {"--alpha", "1000"}), cli::kOk) << err_.str();
  ASSERT_EQ(run_in("eval-listener", out, {"--n", "200"}), cli::kOk) << err_.str();
  const auto report = json::parse(slurp(out / "report.json"));
  EXPECT_EQ(report.at("model").at("recovery_rate").get<double>(), 1.0) << report.dump(2);
}

TEST_F(Cli, CorruptDatasetIsAnIoError) {
  const auto out = dir_ / "bad";
  ASSERT_EQ(run_in("collect", out, {"--n", "5"}), cli::kOk);
  auto text = slurp(out / "dataset.jsonl");
  spit(out / "dataset.jsonl", text.substr(0, text.size() - 15));
  EXPECT_EQ(run_in("fit-broca", out), cli::kIo);
  EXPECT_NE(err_.str().find("dataset.jsonl:6"), std::string::npos) << err_.str();
}

TEST_F(Cli, ArtifactsFromAnotherGameAreAMismatch) {
  const auto out = dir_ / "mm";
  ASSERT_EQ(run_in("collect", out, {"--n", "5"}), cli::kOk);
  auto other = lewis_config(false);
  other["game"]["layout"]["candidates"] = {"x", "y", "z", "w"};
  other["game"]["vocab"] = {"a", "b", "c", "d"};
  spit(config_, other.dump(2));
  EXPECT_EQ(run_in("fit-broca", out), cli::kMismatch) << err_.str();
}

TEST_F(Cli, OracleCheckPasses) {
  EXPECT_EQ(run_in("oracle-check", dir_ / "oc"), cli::kOk) << out_.str() << err_.str();
  EXPECT_NE(out_.str().find(", 0 failed"), std::string::npos) << out_.str();
}
