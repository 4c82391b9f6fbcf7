#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "dformkit/io.hpp"
#include "dformkit/random_forms.hpp"

using namespace dformkit;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dformkit_io_" + name)).string();
}

std::string error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(Io, NetworkRoundTripIsExact) {
  random::Engine rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Network net = random::network(rng, {.killing_probability = 0.3});
    const Network back = io::network_from_json(io::json::parse(io::to_json(net).dump()));
    EXPECT_EQ(assemble(back).matrix(), assemble(net).matrix());
    EXPECT_EQ(back.vertices(), net.vertices());
  }
}

TEST(Io, MalformedJsonNamesByteOffset) {
  // 19 bytes of input; the offset is 1-based, so end of input reads as byte 20.
  try {
    io::parse_json("{\"vertices\": [1, 2,", "bad.json");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), "malformed_json");
    EXPECT_NE(std::string(e.what()).find("at byte 20"), std::string::npos) << e.what();
  }
}

TEST(Io, SchemaErrors) {
  EXPECT_EQ(error_code([] { io::network_from_json(io::json::parse(R"({"edges": []})")); }), "schema");
  EXPECT_EQ(error_code([] { io::network_from_json(io::json::parse(R"({"vertices": [0,1], "edges": [{"u": -1, "v": 1, "c": 1}]})")); }),
            "schema");
  EXPECT_EQ(error_code([] { io::parse_values("1, 2, x3"); }), "schema");
  EXPECT_EQ(error_code([] { io::form_from_csv("1,2\n3\n"); }), "schema");
}

TEST(Io, SequenceWithoutInclusionsIsRejected) {
  const auto j = io::json::parse(R"({"levels": [{"vertices": [0, 1], "edges": [{"u": 0, "v": 1, "c": 1}]}]})");
  EXPECT_EQ(error_code([&] { io::sequence_from_json(j); }), "invalid_inclusion");
}

TEST(Io, HandWrittenPathRefinementIsCompatible) {
  // 0 -- 1 with c = 1 refined to 0 -- 2 -- 1 with c = 2 on each half.
  const auto j = io::json::parse(R"({
    "levels": [
      {"vertices": ["0", "1"], "edges": [{"u": 0, "v": 1, "c": 1}]},
      {"vertices": ["0", "1", "1/2"], "edges": [{"u": 0, "v": 2, "c": 2}, {"u": 2, "v": 1, "c": 2}]}
    ],
    "inclusions": [[0, 1]]
  })");
  const auto seq = io::sequence_from_json(j);
  const auto report = check_compatibility(seq);
  EXPECT_TRUE(report.compatible);
  EXPECT_EQ(report.deviation[0], 0.0);
}

TEST(Io, SequenceSaveLoadRoundTrip) {
  const auto seq = build_sierpinski_gasket(3);
  const std::string path = temp_path("gasket.json");
  io::save_sequence(seq, path);
  const auto back = io::load_sequence(path);
  std::remove(path.c_str());
  ASSERT_EQ(back.level_count(), seq.level_count());
  EXPECT_EQ(back.inclusions(), seq.inclusions());
  for (std::size_t n = 0; n < seq.level_count(); ++n) EXPECT_EQ(back.form(n).matrix(), seq.form(n).matrix());
}

TEST(Io, MatrixCsvRoundTripIsExact) {
  random::Engine rng(11);
  const FormMatrix a = assemble(random::network(rng, {.killing_probability = 0.5}));
  EXPECT_EQ(io::form_from_csv(io::matrix_csv(a.matrix())).matrix(), a.matrix());
}

TEST(Io, MeasureForms) {
  EXPECT_EQ(io::measure_from_json(io::json::parse("[1, 2]")).total(), 3.0);
  EXPECT_EQ(io::measure_from_json(io::json::parse(R"({"weights": [0.5, 0.25]})")).total(), 0.75);
  EXPECT_THROW(io::measure_from_json(io::json::parse(R"({"w": [1]})")), ValidationError);
}

TEST(Io, MissingFile) {
  EXPECT_EQ(error_code([] { io::read_text("/nonexistent/dformkit/file.json"); }), "io");
}
