#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "bqr/csv.hpp"

namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << contents;
  out.close();
  return path;
}

double reparse(const std::string& text) {
  double value = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), value);
  return value;
}

}  // namespace

TEST_CASE("bundled synthetic file loads with the documented shape") {
  const bqr::Dataset data = bqr::load_csv(std::string(BQR_DATA_DIR) + "/synthetic_gini.csv",
                                          "gini", /*add_intercept=*/true);
  CHECK(data.n() == 81);
  CHECK(data.p() == 5);
  REQUIRE(data.column_names.size() == 5);
  CHECK(data.column_names[0] == "intercept");
  CHECK(data.column_names[1] == "educ");
  CHECK(data.column_names[2] == "incpc");
  CHECK(data.column_names[3] == "y2000");
  CHECK(data.column_names[4] == "y2010");
  CHECK(data.X.col(0).minCoeff() == 1.0);
  CHECK(data.y.minCoeff() > 0.0);
  CHECK(data.y.maxCoeff() < 1.0);

  const bqr::Dataset no_icpt = bqr::load_csv(std::string(BQR_DATA_DIR) + "/synthetic_gini.csv",
                                             "gini", /*add_intercept=*/false);
  CHECK(no_icpt.p() == 4);
}

TEST_CASE("degenerate and malformed inputs") {
  CHECK_THROWS_WITH_AS(bqr::load_csv(temp_file("bqr_empty.csv", "").string(), "y", true),
                       doctest::Contains("empty"), std::invalid_argument);

  CHECK_THROWS_WITH_AS(
      bqr::load_csv(temp_file("bqr_header_only.csv", "y,x\n").string(), "y", true),
      doctest::Contains("n = 0"), std::invalid_argument);

  CHECK_THROWS_WITH_AS(
      bqr::load_csv(temp_file("bqr_bad_cell.csv", "y,x\n1.0,2.0\n3.0,oops\n").string(), "y", true),
      doctest::Contains("row 3"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      bqr::load_csv(temp_file("bqr_bad_cell.csv", "y,x\n1.0,2.0\n3.0,oops\n").string(), "y", true),
      doctest::Contains("'x'"), std::invalid_argument);

  CHECK_THROWS_WITH_AS(
      bqr::load_csv(temp_file("bqr_no_resp.csv", "a,b\n1,2\n").string(), "y", true),
      doctest::Contains("response"), std::invalid_argument);

  CHECK_THROWS_WITH_AS(
      bqr::load_csv(temp_file("bqr_ragged.csv", "y,x\n1.0\n").string(), "y", true),
      doctest::Contains("cells"), std::invalid_argument);

  // duplicated covariate column: rank deficient
  std::string collinear = "y,a,b\n";
  for (int i = 0; i < 10; ++i) {
    collinear += std::to_string(i) + "," + std::to_string(i + 1) + "," + std::to_string(2 * i + 2) + "\n";
  }
  CHECK_THROWS_WITH_AS(bqr::load_csv(temp_file("bqr_collinear.csv", collinear).string(), "y", false),
                       doctest::Contains("rank"), std::invalid_argument);
}

TEST_CASE("double formatting round-trips exactly") {
  const double cases[] = {0.0,        0.1,          1.0 / 3.0, -2.5e300, 1e-15,
                          123456.75,  -0.000123456, 2.0,       0.9999999999999999};
  for (double v : cases) {
    CHECK(reparse(bqr::format_double(v)) == v);
  }
  // pathological mantissas survive
  std::uint64_t state = 0x243F6A8885A308D3ULL;
  for (int k = 0; k < 1000; ++k) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    const double v = static_cast<double>(state >> 11) * 0x1.0p-53 * 2000.0 - 1000.0;
    CHECK(reparse(bqr::format_double(v)) == v);
  }
}

TEST_CASE("write_csv output re-parses") {
  const fs::path path = fs::temp_directory_path() / "bqr_roundtrip.csv";
  bqr::write_csv(path.string(), {"y", "x"},
                 {{bqr::format_double(1.25), bqr::format_double(1.0 / 3.0)},
                  {bqr::format_double(-7.5e-3), bqr::format_double(42.0)}});
  const bqr::Dataset data = bqr::load_csv(path.string(), "y", false);
  CHECK(data.n() == 2);
  CHECK(data.y[0] == 1.25);
  CHECK(data.X(0, 0) == 1.0 / 3.0);
  CHECK(data.y[1] == -7.5e-3);
  CHECK(data.X(1, 0) == 42.0);
}
