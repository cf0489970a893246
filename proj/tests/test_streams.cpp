#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "bfdedup/streams.hpp"

using namespace bfdedup;

namespace {

auto drain(ElementStream& stream) -> std::vector<std::string> {
  std::vector<std::string> out;
  while (auto e = stream.next()) {
    out.emplace_back(*e);
  }
  return out;
}

auto temp_file(const std::string& name, const std::string& contents) -> std::filesystem::path {
  const auto path = std::filesystem::temp_directory_path() / ("bfdedup_streams_" + name);
  std::ofstream(path, std::ios::binary) << contents;
  return path;
}

} // namespace

TEST(Ids, EncodeDecode) {
  for (std::uint64_t id : {0ULL, 1ULL, 0x0102030405060708ULL, ~0ULL}) {
    const auto bytes = encode_id(id);
    EXPECT_EQ(decode_id(std::string_view(bytes.data(), bytes.size())), id);
  }
  EXPECT_EQ(encode_id(0x0102030405060708ULL)[0], 0x08);
  EXPECT_THROW((void)decode_id("short"), std::invalid_argument);
}

TEST(ControlledStream, AllDistinct) {
  auto stream = generate({.mode = StreamMode::controlled_distinct, .length = 10,
                          .distinct_fraction = 1.0, .seed = 3});
  const auto elements = drain(*stream);
  ASSERT_EQ(elements.size(), 10U);
  EXPECT_EQ(std::set<std::string>(elements.begin(), elements.end()).size(), 10U);
}

TEST(ControlledStream, ExactDistinctCount) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto stream = generate({.mode = StreamMode::controlled_distinct, .length = 1000,
                            .distinct_fraction = 0.6, .seed = seed});
    const auto elements = drain(*stream);
    ASSERT_EQ(elements.size(), 1000U);
    std::set<std::string> seen;
    std::size_t repeats = 0;
    for (const auto& e : elements) {
      repeats += seen.insert(e).second ? 0 : 1;
    }
    EXPECT_EQ(seen.size(), 600U);
    EXPECT_EQ(repeats, 400U);
  }
}

TEST(ControlledStream, NewPositionsSpreadEvenly) {
  // New elements are a uniform subset of positions, so the second half holds
  // about half of them.
  auto stream = generate({.mode = StreamMode::controlled_distinct, .length = 100000,
                          .distinct_fraction = 0.6, .seed = 1});
  std::set<std::string> seen;
  std::size_t fresh_late = 0;
  std::size_t i = 0;
  while (auto e = stream->next()) {
    const bool fresh = seen.emplace(*e).second;
    fresh_late += fresh && i >= 50000 ? 1 : 0;
    ++i;
  }
  EXPECT_NEAR(static_cast<double>(fresh_late), 30000.0, 5 * std::sqrt(60000 * 0.25));
}

TEST(ControlledStream, RejectsBadFraction) {
  EXPECT_THROW((void)generate({.mode = StreamMode::controlled_distinct, .length = 10,
                               .distinct_fraction = 0.0}),
               std::invalid_argument);
  EXPECT_THROW((void)generate({.mode = StreamMode::controlled_distinct, .length = 10,
                               .distinct_fraction = 1.5}),
               std::invalid_argument);
  EXPECT_THROW((void)generate({.mode = StreamMode::controlled_distinct, .length = 10,
                               .distinct_fraction = 0.01}),
               std::invalid_argument);
}

TEST(UniformStream, SingletonUniverseIsConstant) {
  auto stream = generate({.mode = StreamMode::uniform_universe, .length = 50, .universe = 1});
  const auto elements = drain(*stream);
  ASSERT_EQ(elements.size(), 50U);
  EXPECT_EQ(std::set<std::string>(elements.begin(), elements.end()).size(), 1U);
}

TEST(UniformStream, DistinctCountMatchesExpectation) {
  constexpr double kU = 1000;
  constexpr double kN = 2000;
  auto stream = generate({.mode = StreamMode::uniform_universe, .length = 2000,
                          .universe = 1000, .seed = 12});
  const auto elements = drain(*stream);
  const double distinct = static_cast<double>(std::set<std::string>(elements.begin(), elements.end()).size());
  const double expected = kU * (1 - std::pow(1 - 1 / kU, kN));
  // Occupancy variance bound: U * p * (1 - p) with p = 1 - (1-1/U)^N.
  const double p = expected / kU;
  EXPECT_NEAR(distinct, expected, 3 * std::sqrt(kU * p * (1 - p)) + 1);
}

TEST(UniformStream, RejectsEmptyUniverse) {
  EXPECT_THROW((void)generate({.mode = StreamMode::uniform_universe, .length = 5, .universe = 0}),
               std::invalid_argument);
}

TEST(Streams, SameSpecSameStream) {
  for (StreamMode mode : {StreamMode::uniform_universe, StreamMode::controlled_distinct}) {
    const StreamSpec spec{.mode = mode, .length = 5000, .universe = 300,
                          .distinct_fraction = 0.4, .seed = 99};
    EXPECT_EQ(drain(*generate(spec)), drain(*generate(spec)));
    StreamSpec other = spec;
    other.seed = 100;
    EXPECT_NE(drain(*generate(spec)), drain(*generate(other)));
  }
}

TEST(Streams, ModeNames) {
  for (StreamMode mode :
       {StreamMode::uniform_universe, StreamMode::controlled_distinct, StreamMode::file}) {
    EXPECT_EQ(parse_stream_mode(to_string(mode)), mode);
  }
  EXPECT_THROW((void)parse_stream_mode("zipf"), std::invalid_argument);
}

TEST(FileStream, Lines) {
  const auto path = temp_file("lines", "a\nb\na\n");
  EXPECT_EQ(drain(*ingest_file(path)), (std::vector<std::string>{"a", "b", "a"}));
  std::filesystem::remove(path);
}

TEST(FileStream, EmptyFile) {
  const auto path = temp_file("empty", "");
  EXPECT_TRUE(drain(*ingest_file(path)).empty());
  std::filesystem::remove(path);
}

TEST(FileStream, NoTrailingNewline) {
  const auto path = temp_file("notrail", "x\ny\nz");
  EXPECT_EQ(drain(*ingest_file(path)), (std::vector<std::string>{"x", "y", "z"}));
  std::filesystem::remove(path);
}

TEST(FileStream, SkipsEmptyRecordsKeepsBytes) {
  const auto path = temp_file("bytes", "\n a \n\n\tb\n");
  EXPECT_EQ(drain(*ingest_file(path)), (std::vector<std::string>{" a ", "\tb"}));
  std::filesystem::remove(path);
}

TEST(FileStream, MissingFileThrows) {
  EXPECT_THROW((void)ingest_file("/nonexistent/bfdedup/input.txt"), std::runtime_error);
  EXPECT_THROW((void)generate({.mode = StreamMode::file}), std::invalid_argument);
}
