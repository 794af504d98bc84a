#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "cdkn.hpp"

using namespace cdkn;

TEST(Io, RoundTrip) {
  const auto file = generate_example("theta", {{"k", 4}});
  const auto path = (std::filesystem::temp_directory_path() / "cdkn_roundtrip.json").string();
  save_space(path, file);
  const auto back = load_space_file(path);
  std::remove(path.c_str());
  ASSERT_EQ(back.space.size(), file.space.size());
  EXPECT_EQ(back.space.ids(), file.space.ids());
  EXPECT_EQ(back.space.name(), file.space.name());
  for (PointIndex i = 0; i < back.space.size(); ++i) {
    EXPECT_EQ(back.space.mass(i), file.space.mass(i));
    for (PointIndex j = 0; j < back.space.size(); ++j) EXPECT_EQ(back.space.dist(i, j), file.space.dist(i, j));
  }
}

TEST(Io, EdgeListClosure) {
  const auto f = parse_space(R"({"format": "cdkn-space/1", "points": ["a", "b", "c", "d"],
    "metric": {"edges": [["a","b",1], ["b","c",1], ["c","d",1], ["d","a",1]]},
    "metadata": {"K": 0, "N": "inf"}})");
  EXPECT_DOUBLE_EQ(f.space.dist(0, 2), 2.0);
  EXPECT_NEAR(f.space.mass(0), 0.25, 1e-15);
  ASSERT_TRUE(f.intended_N);
  EXPECT_TRUE(std::isinf(*f.intended_N));
}

TEST(Io, TriangleViolationIsAMetricError) {
  const std::string text = R"({"format": "cdkn-space/1", "points": ["a", "b", "c"],
    "metric": {"matrix": [[0,1,3],[1,0,1],[3,1,0]]}})";
  try {
    parse_space(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MetricError);
  }
  EXPECT_EQ(parse_space(text, false).space.size(), 3u);
}

TEST(Io, MalformedInputIsAParseError) {
  for (const char* text : {"{", R"({"format": "other"})", R"({"format": "cdkn-space/1", "points": ["a"]})",
                           R"({"format": "cdkn-space/1", "points": ["a","b"], "metric": {"matrix": [[0,1]]}})"}) {
    try {
      parse_space(text);
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ParseError) << text;
    }
  }
}

TEST(Io, GenerateExamples) {
  for (const char* name : {"segment", "grid2d", "circle", "tripod", "theta", "weighted_tree"}) {
    const auto f = generate_example(name);
    EXPECT_TRUE(validate_metric(f.space).ok()) << name;
  }
  EXPECT_EQ(generate_example("segment").space.size(), 65u);
  EXPECT_EQ(*generate_example("grid2d", {{"m", 4}}).intended_N, 2.0);
  try {
    generate_example("sphere");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownExample);
  }
}

TEST(Io, InfiniteRealsAsStrings) {
  EXPECT_EQ(real_to_json(kInfinity), json("inf"));
  EXPECT_TRUE(std::isinf(real_from_json(json("inf"), "x")));
  EXPECT_THROW(real_from_json(json("big"), "x"), Error);
}
