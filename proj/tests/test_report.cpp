#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlspike/report.hpp"

using namespace nlspike;

namespace {

ErrorReport sample_row(bool nls) {
  ErrorReport r;
  r.op = Operator::softmax;
  r.kind = nls ? "nls" : "hardmax";
  r.d = 8;
  r.H = 5.0;
  r.K = 64;
  r.T = 16;
  r.L = 256;
  r.samples = 10;
  r.seed = 7;
  r.mean_abs = 0.125;
  r.max_abs = 0.5;
  r.mean_rel = 0.1;
  r.max_rel = 1.0 / 3.0;
  if (nls) {
    r.bound = 0.0075;
    r.slack = 0.001;
    r.pass = true;
  }
  return r;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.125) == "0.125");
  CHECK(format_number(5.0) == "5");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(format_number(NAN) == "nan");
  for (double v : {1.0 / 3.0, 3.568e-3, 1e-300, 123456789.125}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("csv schema") {
  const std::vector<ErrorReport> rows{sample_row(true), sample_row(false)};
  const auto csv = reports_to_csv(rows);
  std::stringstream ss(csv);
  std::string header, l1, l2;
  std::getline(ss, header);
  std::getline(ss, l1);
  std::getline(ss, l2);
  CHECK(header == "operator,kind,d,H,K,T,L,samples,seed,mean_abs,max_abs,mean_rel,max_rel,bound,slack,pass");
  const auto f1 = split(l1), f2 = split(l2);
  CHECK(f1.size() == 16);
  CHECK(f2.size() == 16);
  CHECK(f1[0] == "softmax");
  CHECK(f1[1] == "nls");
  CHECK(f1[15] == "1");
  CHECK(f2[13].empty());
  CHECK(f2[15].empty());
  CHECK(std::stod(f1[12]) == 1.0 / 3.0);
}

TEST_CASE("json mirrors csv keys") {
  const std::vector<ErrorReport> rows{sample_row(true), sample_row(false)};
  const auto j = nlohmann::json::parse(reports_to_json(rows));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 2);
  std::vector<std::string> keys;
  for (auto it = j[0].begin(); it != j[0].end(); ++it) keys.push_back(it.key());
  std::vector<std::string> expect = split(kReportCsvHeader);
  std::sort(keys.begin(), keys.end());
  std::sort(expect.begin(), expect.end());
  CHECK(keys == expect);
  CHECK(j[0]["pass"] == true);
  CHECK(j[1]["bound"].is_null());
  CHECK(j[0]["max_rel"].get<double>() == 1.0 / 3.0);

  auto inf_row = sample_row(true);
  inf_row.bound = INFINITY;
  const auto ji = nlohmann::json::parse(reports_to_json(std::vector<ErrorReport>{inf_row}));
  CHECK(ji[0]["bound"] == "inf");
}

TEST_CASE("op count outputs") {
  const std::vector<OpCountReport> rows{{Operator::silu, 64, 1, 0, 10, 20}, {Operator::silu, 64, 2, 0, 20, 40}};
  const auto csv = opcounts_to_csv(rows);
  CHECK(csv == "operator,d,T,macs,acs,shifts\nsilu,64,1,0,10,20\nsilu,64,2,0,20,40\n");
  const auto j = nlohmann::json::parse(opcounts_to_json(rows));
  CHECK(j[1]["shifts"] == 40);
}

TEST_CASE("svg output") {
  std::vector<ErrorReport> rows;
  for (int d : {8, 16, 32}) {
    auto r = sample_row(true);
    r.d = d;
    rows.push_back(r);
    auto b = sample_row(false);
    b.d = d;
    rows.push_back(b);
  }
  const auto svg = reports_to_svg(rows, "d", "softmax error vs d");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("softmax error vs d") != std::string::npos);
  std::size_t lines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  CHECK(lines == 4);
  CHECK(reports_to_svg(rows, "d", "t") == reports_to_svg(rows, "d", "t"));
}

TEST_CASE("file writer") {
  const auto dir = std::filesystem::temp_directory_path() / "nlspike_test_report";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "a.csv", "x\n");
  std::ifstream f(dir / "a.csv");
  std::string s;
  std::getline(f, s);
  CHECK(s == "x");
  CHECK_THROWS_AS(write_text_file(dir / "nope" / "a.csv", "x"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
