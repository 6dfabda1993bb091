#include <doctest.h>

#include <cmath>
#include <limits>

#include "bweb/digest.hpp"
#include "bweb/error.hpp"
#include "bweb/json_io.hpp"
#include "bweb/report_io.hpp"

using namespace bweb;

TEST_CASE("extended reals in JSON") {
  CHECK(encode_extended(kInf) == "+inf");
  CHECK(decode_extended(encode_extended(-kInf)) == -kInf);
  CHECK(decode_extended(nlohmann::json(1.5)) == 1.5);
  CHECK_THROWS_AS(decode_extended(nlohmann::json("sideways")), ConfigError);
}

TEST_CASE("paths round trip through JSON") {
  std::vector<Path> paths{Path::polygonal({{0, 0}, {1, 2}}),
                          Path::from_minus_infinity({{0, 1}, {2, 3}}),
                          Path::sentinel(Sentinel::minus_infinity, kInf),
                          Path::constant(0.25, -3)};
  auto back = paths_from_json(paths_to_json(paths));
  REQUIRE(back.size() == paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) CHECK(back[i] == paths[i]);
  CHECK(paths_from_json(nlohmann::json{{"paths", paths_to_json(paths)}}).size() == 4);
  CHECK_THROWS_AS(paths_from_json(nlohmann::json::parse(R"([{"start":0,"knots":[[1]]}])")),
                  ConfigError);
  CHECK_THROWS_AS(paths_from_json(nlohmann::json::parse(R"({"nope":1})")), ConfigError);
}

TEST_CASE("report CSV round trip") {
  EstimateReport a;
  a.name = "est_B1";
  a.series = "sup, eps";
  a.x = 0.1;
  a.estimate = 1.0 / 3.0;
  a.std_error = 0.01;
  a.replicas = 10;
  a.target = 0.5;
  a.tolerance = 0.2;
  a.comparison = Comparison::at_most;
  a.seed = 18446744073709551615ull;
  a.config_digest = sha256_hex("x");
  a.decide();
  EstimateReport b;
  b.name = "plain";
  b.estimate = kInf;
  std::vector<EstimateReport> rows{a, b};
  const std::string csv = reports_to_csv(rows);
  CHECK(csv.rfind("schema,name,series,x,", 0) == 0);
  auto back = reports_from_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].series == a.series);
  CHECK(back[0].estimate == a.estimate);
  CHECK(back[0].x == 0.1);
  CHECK(back[0].target == 0.5);
  CHECK(back[0].comparison == Comparison::at_most);
  CHECK(back[0].verdict == a.verdict);
  CHECK(back[0].seed == a.seed);
  CHECK(std::isnan(back[1].x));
  CHECK_FALSE(back[1].target.has_value());
  CHECK(back[1].estimate == kInf);
  CHECK(reports_to_csv(back) == csv);
  CHECK_THROWS_AS(reports_from_csv("a,b,c\n1,2,3\n"), ConfigError);
}

TEST_CASE("csv splitting and number formatting") {
  CHECK(split_csv_line("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(format_number(-kInf) == "-inf");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(std::stod(format_number(0.1)) == 0.1);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
