#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "roman/errors.hpp"
#include "roman/io.hpp"
#include "roman/routing.hpp"

using namespace roman;
namespace fs = std::filesystem;

namespace {

const fs::path kData = ROMAN_TEST_DATA;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "roman_test_io";
  fs::create_directories(dir);
  return dir / name;
}

struct Located {
  ErrorKind kind;
  std::size_t line;
  std::size_t column;
};

Located parse_failure(const fs::path& path) {
  try {
    (void)io::load_ts(path);
  } catch (const ParseError& e) {
    return {e.kind(), e.line(), e.column()};
  }
  FAIL("no ParseError for " << path);
  return {ErrorKind::io_error, 0, 0};
}

}  // namespace

TEST_CASE("univariate .ts fixture") {
  const auto ds = io::load_ts(kData / "univariate.ts");
  CHECK(ds.id == "Tiny");
  REQUIRE(ds.size() == 2);
  CHECK(ds.channels() == 1);
  CHECK(ds.length() == 4);
  CHECK(ds.class_names == std::vector<std::string>{"up", "down"});
  CHECK(ds.labels == std::vector<int>{0, 1});
  CHECK(ds.series[1](0, 2) == 2.5);
  CHECK(ds.series[1](0, 3) == -0.1);
  CHECK(ds.provenance.nan_count == 0);
  CHECK_FALSE(ds.provenance.normalized);
}

TEST_CASE("multivariate .ts keeps dimension order") {
  const auto ds = io::load_ts(kData / "multivariate.ts");
  REQUIRE(ds.channels() == 3);
  CHECK(ds.length() == 3);
  CHECK(ds.labels == std::vector<int>{1, 0});
  for (std::size_t c = 0; c < 3; ++c) {
    const double scale = std::pow(10.0, static_cast<double>(c));
    for (std::size_t t = 0; t < 3; ++t) CHECK(ds.series[0](c, t) == scale * static_cast<double>(t + 1));
  }
  CHECK(ds.series[1](2, 0) == 7.0);
}

TEST_CASE("missing values load as NaN and are counted") {
  const auto ds = io::load_ts(kData / "missing.ts");
  CHECK(ds.provenance.nan_count == 1);
  CHECK(std::isnan(ds.series[0](0, 1)));
  CHECK(ds.class_names == std::vector<std::string>{"0", "1"});
}

TEST_CASE("TSV table: numeric labels sort by value") {
  const auto ds = io::load_ts(kData / "table.tsv");
  CHECK(ds.id == "table");
  CHECK(ds.class_names == std::vector<std::string>{"2", "10"});
  CHECK(ds.labels == std::vector<int>{0, 1, 0});
  CHECK(ds.length() == 3);
  CHECK(ds.provenance.nan_count == 1);
}

TEST_CASE("malformed inputs fail with a location") {
  struct Case {
    const char* file;
    ErrorKind kind;
    std::size_t line;
    std::size_t column;
  };
  const Case cases[] = {
      {"bad_value.ts", ErrorKind::parse_error, 3, 5},
      {"unknown_label.ts", ErrorKind::unknown_class_label, 3, 7},
      {"no_classlabel.ts", ErrorKind::parse_error, 1, 1},
      {"equal_length_false.ts", ErrorKind::unequal_length, 2, 14},
      {"ragged.ts", ErrorKind::unequal_length, 4, 0},
      {"ragged_dims.ts", ErrorKind::unequal_length, 3, 5},
      {"unknown_key.ts", ErrorKind::parse_error, 3, 2},
      {"timestamps.ts", ErrorKind::parse_error, 2, 13},
      {"bad_bool.ts", ErrorKind::parse_error, 1, 13},
      {"bad_length.ts", ErrorKind::parse_error, 1, 15},
      {"no_names.ts", ErrorKind::parse_error, 1, 13},
      {"no_data.ts", ErrorKind::parse_error, 0, 0},
      {"missing_label.ts", ErrorKind::parse_error, 3, 0},
      {"no_header.ts", ErrorKind::parse_error, 1, 1},
  };
  for (const auto& c : cases) {
    CAPTURE(c.file);
    const auto got = parse_failure(kData / "malformed" / c.file);
    CHECK(got.kind == c.kind);
    CHECK(got.line == c.line);
    CHECK(got.column == c.column);
  }
  CHECK_THROWS_AS(io::parse_tsv("a\t1\t2\nb\t1\n"), ParseError);
  CHECK_THROWS_AS(io::parse_tsv(",1,2\n"), ParseError);
  CHECK_THROWS_AS(io::load_ts(kData / "does_not_exist.ts"), Error);
}

TEST_CASE("header keys without a value are still located") {
  try {
    (void)io::parse_ts("@classLabel\n@data\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 12);
  }
}

TEST_CASE("preprocessing: imputation and z-normalisation") {
  Series s = Series::univariate({1.0, std::nan(""), 3.0});
  io::preprocess_series(s);
  // Mean fill gives [1, 2, 3]; population sd is sqrt(2/3).
  const double z = 1.0 / std::sqrt(2.0 / 3.0);
  CHECK(s(0, 0) == doctest::Approx(-z).epsilon(1e-15));
  CHECK(s(0, 1) == 0.0);
  CHECK(s(0, 2) == doctest::Approx(z).epsilon(1e-15));

  Series constant(2, 5, 7.0);
  io::preprocess_series(constant);
  for (double v : constant.values()) CHECK(v == 0.0);

  Series all_nan = Series::univariate({std::nan(""), std::nan("")});
  io::preprocess_series(all_nan);
  for (double v : all_nan.values()) CHECK(v == 0.0);

  std::mt19937_64 gen(3);
  std::normal_distribution<double> dist(5.0, 3.0);
  Series x(3, 200);
  for (double& v : x.values()) v = dist(gen);
  io::preprocess_series(x);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0, ss = 0;
    for (double v : x.channel(c)) mean += v / 200.0;
    for (double v : x.channel(c)) ss += (v - mean) * (v - mean);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(ss / 200.0) - 1.0) < 1e-9);
  }
  Series again = x;
  io::preprocess_series(again);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(again.values()[i] - x.values()[i]) < 1e-12);

  auto ds = io::preprocess(io::load_ts(kData / "missing.ts"));
  CHECK(ds.provenance.normalized);
  CHECK(ds.provenance.nan_policy == "series-mean");
  CHECK(ds.series[0].all_finite());
}

TEST_CASE(".ts write and reload") {
  auto ds = io::load_ts(kData / "multivariate.ts");
  ds.series[1](1, 1) = std::nan("");
  ds.series[0](0, 0) = 0.1 + 0.2;
  std::ostringstream out;
  io::write_ts(out, ds);
  const auto back = io::parse_ts(out.str());
  CHECK(back.id == ds.id);
  CHECK(back.class_names == ds.class_names);
  CHECK(back.labels == ds.labels);
  CHECK(back.provenance.nan_count == 1);
  CHECK(back.series[0].bit_equal(ds.series[0]));
  CHECK(std::isnan(back.series[1](1, 1)));
}

TEST_CASE("test split reuses the train vocabulary") {
  const auto path = scratch("reordered.ts");
  {
    std::ofstream f(path);
    f << "@classLabel true down up\n@data\n1,2,3,4:up\n1,2,3,5:down\n";
  }
  const auto ds = io::load_ts(path, {"up", "down"});
  CHECK(ds.class_names == std::vector<std::string>{"up", "down"});
  CHECK(ds.labels == std::vector<int>{0, 1});
  try {
    (void)io::load_ts(path, {"up", "sideways"});
    FAIL("expected unknown_class_label");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unknown_class_label);
  }
}

TEST_CASE("tensor round trip is bit-exact") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> dist;
  io::Tensor t;
  t.dims = {26, 64};
  t.data.resize(26 * 64);
  for (double& v : t.data) v = dist(gen);
  t.data[5] = -0.0;
  t.data[6] = 4.9e-324;
  t.metadata = {{"note", "x"}};
  const auto stem = scratch("tensor");
  io::save_tensor(stem, t);
  const auto back = io::load_tensor(fs::path(stem.string() + ".bin"));
  CHECK(back.dims == t.dims);
  CHECK(back.metadata == t.metadata);
  REQUIRE(back.data.size() == t.data.size());
  CHECK(std::memcmp(back.data.data(), t.data.data(), t.data.size() * 8) == 0);
}

TEST_CASE("tensor integrity errors") {
  io::Tensor t;
  t.dims = {2, 3};
  t.data = {1, 2, 3, 4, 5, 6};
  const auto stem = scratch("damaged");
  const auto json_path = fs::path(stem.string() + ".json");
  const auto bin_path = fs::path(stem.string() + ".bin");
  const auto kind_of = [&] {
    try {
      (void)io::load_tensor(stem);
    } catch (const Error& e) {
      return e.kind();
    }
    FAIL("load unexpectedly succeeded");
    return ErrorKind::invalid_argument;
  };
  const auto rewrite_header = [&](auto&& edit) {
    std::ifstream in(json_path);
    auto header = nlohmann::json::parse(in);
    edit(header);
    std::ofstream(json_path) << header.dump();
  };

  io::save_tensor(stem, t);
  rewrite_header([](auto& h) { h["dims"] = {3, 3}; });
  CHECK(kind_of() == ErrorKind::checksum_mismatch);

  io::save_tensor(stem, t);
  {
    std::fstream f(bin_path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(3);
    f.put('\x7f');
  }
  CHECK(kind_of() == ErrorKind::checksum_mismatch);

  io::save_tensor(stem, t);
  rewrite_header([](auto& h) { h["version"] = 2; });
  CHECK(kind_of() == ErrorKind::version_mismatch);

  io::save_tensor(stem, t);
  rewrite_header([](auto& h) { h["format"] = "other"; });
  CHECK(kind_of() == ErrorKind::io_error);

  t.dims = {4, 4};
  CHECK_THROWS_AS(io::save_tensor(stem, t), Error);
}

TEST_CASE("FNV-1a checksum of a known payload") {
  // Independent byte-wise FNV-1a over the little-endian encoding of 1.0.
  const unsigned char bytes[8] = {0, 0, 0, 0, 0, 0, 0xF0, 0x3F};
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  const double one = 1.0;
  CHECK(io::payload_checksum(std::span<const double>(&one, 1)) == h);
  CHECK(io::payload_checksum({}) == 0xcbf29ce484222325ull);
}

TEST_CASE("routed tensor carries its plan") {
  Series x(1, 512);
  for (std::size_t t = 0; t < 512; ++t) x(0, t) = std::sin(0.05 * static_cast<double>(t));
  const auto config = RomanConfig::with_scales(4);
  const auto routed = apply_roman(x, config);
  const auto tensor = io::routed_tensor(routed, config);
  CHECK(tensor.dims == std::vector<std::size_t>{26, 64});
  const auto& plan = tensor.metadata.at("plan");
  CHECK(plan.at("pseudochannels").at(0) == nlohmann::json::array({1, 1, 1}));
  CHECK(plan.at("total_pseudochannels") == 26);
  CHECK(tensor.metadata.at("config").at("depth").at("scales") == 4);

  const auto back = io::plan_from_json(io::plan_to_json(routed.plan));
  CHECK(back.level_lengths == routed.plan.level_lengths);
  CHECK(back.window_counts == routed.plan.window_counts);
  CHECK(back.starts == routed.plan.starts);
  CHECK(back.order == routed.plan.order);
  CHECK(back.alpha == routed.plan.alpha);
  CHECK(back.base_length == 64);
  CHECK(back.channel_count == 1);

  const auto min_base = io::routed_tensor(routed, RomanConfig::with_min_base(64));
  CHECK(min_base.metadata.at("config").at("depth").at("min_base_length") == 64);
}
