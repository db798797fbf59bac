#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"

using namespace cla;
using namespace cla::testing;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << s;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::invalid_argument;
}

class DatasetFiles : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = scratch_dir("dataset"); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::filesystem::path dir_;
};

}  // namespace

TEST(Collect, CountsAndDeterminism) {
  const auto c = build_community(config_for(market2x2(), 0.2), 3);
  const auto a = collect(c, 100, 5), b = collect(c, 100, 5);
  EXPECT_EQ(a.records.size(), 100u);
  EXPECT_EQ(to_jsonl(a), to_jsonl(b));
  EXPECT_NE(to_jsonl(a), to_jsonl(collect(c, 100, 6)));
}

TEST(Collect, EpisodesDoNotDependOnDatasetSize) {
  const auto c = build_community(config_for(lewis4(), 0.3), 1);
  const auto small = collect(c, 20, 9), large = collect(c, 60, 9);
  for (std::size_t i = 0; i < small.records.size(); ++i) EXPECT_EQ(small.records[i], large.records[i]);
}

TEST(Collect, NoiselessCommunityReproducesTargets) {
  const auto c = deterministic_community(market2x2());
  for (const auto& r : collect(c, 200, 4).records) EXPECT_EQ(r.trajectory, *r.hidden_target);
}

TEST(Collect, RejectsNonPositiveCount) { EXPECT_THROW(collect(build_community(config_for(lewis3()), 0), 0, 1), Error); }

TEST(Collect, ObservationsHideTheTarget) {
  const auto d = collect(build_community(config_for(lewis3(), 0.5), 0), 10, 0);
  const auto o = d.observations();
  ASSERT_EQ(o.size(), 10u);
  for (std::size_t i = 0; i < o.size(); ++i) {
    EXPECT_EQ(o[i].message, d.records[i].message);
    EXPECT_EQ(o[i].trajectory, d.records[i].trajectory);
  }
}

TEST_F(DatasetFiles, RoundTripOnRandomDatasets) {
  Rng rng(123);
  for (int k = 0; k < 40; ++k) {
    const auto d = random_dataset(rng);
    save(d, path("d.jsonl"));
    const auto back = load(path("d.jsonl"), d.meta.game);
    EXPECT_EQ(back, d) << "dataset " << k;
    EXPECT_EQ(to_jsonl(back), slurp(path("d.jsonl")));
  }
}

TEST_F(DatasetFiles, EmptyDatasetIsHeaderOnly) {
  auto d = collect(build_community(config_for(lewis3()), 0), 1, 0);
  d.records.clear();
  save(d, path("e.jsonl"));
  const auto text = slurp(path("e.jsonl"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_TRUE(load(path("e.jsonl")).records.empty());
}

TEST_F(DatasetFiles, TruncatedLastLineNamesTheLine) {
  const auto d = collect(build_community(config_for(lewis3()), 0), 5, 0);
  auto text = to_jsonl(d);
  text.resize(text.size() - 20);
  spit(path("t.jsonl"), text);
  try {
    load(path("t.jsonl"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("t.jsonl:6"), std::string::npos) << e.what();
  }
}

TEST_F(DatasetFiles, FingerprintAndVersionChecks) {
  const auto d = collect(build_community(config_for(lewis3()), 0), 5, 0);
  save(d, path("f.jsonl"));
  EXPECT_EQ(code_of([&] { load(path("f.jsonl"), lewis4()); }), ErrorCode::fingerprint_mismatch);

  auto text = to_jsonl(d);
  const auto pos = text.find("\"format_version\":1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 18, "\"format_version\":2");
  spit(path("v.jsonl"), text);
  EXPECT_EQ(code_of([&] { load(path("v.jsonl")); }), ErrorCode::format_version);
}

TEST_F(DatasetFiles, MalformedContentIsAParseError) {
  EXPECT_EQ(code_of([&] { load(path("missing.jsonl")); }), ErrorCode::io_error);
  spit(path("empty.jsonl"), "");
  EXPECT_EQ(code_of([&] { load(path("empty.jsonl")); }), ErrorCode::parse_error);

  const auto d = collect(build_community(config_for(lewis3()), 0), 3, 0);
  auto lines = to_jsonl(d);
  const auto key = lines.find("\"key\":\"start/");
  ASSERT_NE(key, std::string::npos);
  lines[key + 13] = lines[key + 13] == '0' ? '1' : '0';  // key no longer matches its steps
  spit(path("k.jsonl"), lines);
  EXPECT_EQ(code_of([&] { load(path("k.jsonl")); }), ErrorCode::parse_error);

  auto extra = to_jsonl(d);
  extra.insert(extra.find("\"listener_id\""), "\"surprise\":1,");
  spit(path("x.jsonl"), extra);
  EXPECT_EQ(code_of([&] { load(path("x.jsonl")); }), ErrorCode::parse_error);
}

TEST(DatasetStream, ReadsFromAnyStream) {
  const auto d = collect(build_community(config_for(lewis4(), 0.1), 2), 12, 8);
  std::istringstream is(to_jsonl(d));
  EXPECT_EQ(read_jsonl(is), d);
}
