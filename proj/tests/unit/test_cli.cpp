#include <cli.hpp>
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "alphacf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = alphacf::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

// Splits a CSV line; quoted fields keep their quotes.
std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v(1);
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      v.emplace_back();
    } else {
      v.back() += c;
    }
  }
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "alphacf_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help and usage errors") {
    auto r = run({"--help"});
    CHECK(r.code == 0);
    for (const char* sub : {"entropy-point", "entropy-scan", "stddev-scan", "density", "natext",
                            "reflect", "orbit"}) {
      CHECK(r.out.find(sub) != std::string::npos);
      CHECK(run({sub, "--help"}).code == 0);
    }
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"entropy-point"}).code == 2);
    CHECK(run({"entropy-point", "--alpha", "x"}).code == 2);
    CHECK(run({"entropy-point", "--alpha", "0.5", "--format", "xml"}).code == 2);
    r = run({"entropy-point", "--alpha", "1.5"});
    CHECK(r.code == 2);
    CHECK(lines(r.err).size() == 1);
  }

  TEST_CASE("entropy point and one-step scan agree") {
    auto p = run({"entropy-point", "--alpha", "0.5", "--n", "500", "--ensemble", "200", "--seed", "42"});
    REQUIRE(p.code == 0);
    const auto pl = lines(p.out);
    REQUIRE(pl.size() == 2);
    CHECK(pl[0] == "alpha,n,N,mean,stddev,stderr,exact,seed,discarded");
    const auto f = fields(pl[1]);
    REQUIRE(f.size() == 9);
    CHECK(std::stod(f[3]) == doctest::Approx(3.418).epsilon(0.01));
    CHECK(f[6] == "3.4183159706112436");
    auto s = run({"entropy-scan", "--alpha-min", "0.5", "--alpha-max", "0.6", "--steps", "1", "--n",
                  "500", "--ensemble", "200", "--seed", "42"});
    REQUIRE(s.code == 0);
    CHECK(s.out == p.out);
    CHECK(s.err.find("rows/s") != std::string::npos);
  }

  TEST_CASE("entropy scan rows and json") {
    auto s = run({"entropy-scan", "--alpha-min", "0.29", "--alpha-max", "0.30", "--steps", "100",
                  "--n", "50", "--ensemble", "10"});
    REQUIRE(s.code == 0);
    CHECK(lines(s.out).size() == 101);
    auto j = run({"entropy-scan", "--alpha-min", "0.29", "--alpha-max", "0.30", "--steps", "3", "--n",
                  "50", "--ensemble", "10", "--format", "json"});
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc.size() == 3);
    CHECK(doc[0]["exact"].is_null());
  }

  TEST_CASE("stddev scan") {
    auto r = run({"stddev-scan", "--alpha", "0.5", "--n-values", "100,400,1600", "--ensemble", "50"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out).size() == 4);
    CHECK(run({"stddev-scan", "--alpha", "0.5", "--n-values", "100,400"}).code == 2);
  }

  TEST_CASE("density") {
    auto r = run({"density", "--alpha", "1.0", "--method", "closed", "--points", "100000"});
    REQUIRE(r.code == 0);
    const auto first = fields(lines(r.out)[1]);
    CHECK(std::stod(first[1]) == doctest::Approx(1.4427).epsilon(1e-4));

    r = run({"density", "--alpha", "0.2", "--method", "closed"});
    CHECK(r.code == 2);
    CHECK(r.err.find("UnsupportedAlpha") != std::string::npos);

    const auto out = scratch("series.csv");
    r = run({"density", "--r", "5", "--method", "series", "--depth", "8", "--points", "50", "--out",
             out.string()});
    REQUIRE(r.code == 0);
    CHECK(lines(slurp(out)).size() == 51);
    const auto meta = nlohmann::json::parse(slurp(out.string() + ".json"));
    CHECK(meta["integral"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(meta["kind"] == "fractional");

    r = run({"density", "--alpha", "0.3", "--method", "series"});
    CHECK(r.code == 2);
    r = run({"density", "--alpha", "0.3", "--method", "ulam", "--bins", "256", "--format", "json"});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["integral"].get<double>() == doctest::Approx(1.0));
  }

  TEST_CASE("natext") {
    auto r = run({"natext", "--r", "3", "--check", "complementarity"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 3);
    CHECK(fields(l[1])[0] == "complementarity");
    CHECK(std::stod(fields(l[1])[2]) < 1e-6);

    const auto pts = scratch("cloud.csv");
    const auto summary = scratch("summary.json");
    r = run({"natext", "--r", "3", "--depth", "8", "--samples", "5000", "--seed", "7", "--points-out",
             pts.string(), "--summary-out", summary.string()});
    CHECK(r.code == 0);
    CHECK(lines(slurp(pts)).size() == 5001);
    CHECK(nlohmann::json::parse(slurp(summary))["r"] == 3);

    r = run({"natext", "--alpha", "0.45", "--prop1", "--samples", "5000"});
    CHECK(r.code == 0);
    CHECK(run({"natext", "--r", "2"}).code == 2);
    CHECK(run({"natext", "--alpha", "0.3"}).code == 2);
  }

  TEST_CASE("natext reports failed checks with exit code 3") {
    auto r = run({"natext", "--r", "3", "--depth", "2", "--check", "complementarity"});
    CHECK(r.code == 3);
    CHECK(r.err.find("covered_fraction") != std::string::npos);
  }

  TEST_CASE("reflect") {
    auto r = run({"reflect", "<3,3;y=3>"});
    REQUIRE(r.code == 0);
    auto f = fields(lines(r.out)[1]);
    CHECK(f[1] == "\"<2^1,3;y=2.5>\"");
    CHECK(std::stod(f[2]) == doctest::Approx(8.0 / 21.0));
    CHECK(std::stod(f[3]) == doctest::Approx(13.0 / 21.0));

    r = run({"reflect", "<2^1;y=2>", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["value"].get<double>() == doctest::Approx(2.0 / 3.0));
    CHECK(j["reflected_value"].get<double>() == doctest::Approx(1.0 / 3.0));

    r = run({"reflect", "<3,x>"});
    CHECK(r.code == 2);
    CHECK(r.err.find("offset 3") != std::string::npos);
  }

  TEST_CASE("orbit") {
    auto r = run({"orbit", "--alpha", "0.2", "--x0", "-0.8", "--n", "5"});
    REQUIRE(r.code == 0);
    const auto l = lines(r.out);
    REQUIRE(l.size() == 6);
    CHECK(fields(l[1])[2] == "2");
    CHECK(fields(l[1])[3] == "-");
    r = run({"orbit", "--alpha", "0.5", "--x0", "0.3141592653589793", "--n", "7"});
    CHECK(lines(r.out).size() == 8);
    CHECK(run({"orbit", "--alpha", "0.5", "--x0", "0.9"}).code == 2);
  }

  TEST_CASE("output does not depend on the thread count") {
    const std::vector<std::string> base{"entropy-point", "--alpha", "0.37", "--n", "300", "--ensemble", "500"};
    auto a = base, b = base;
    a.insert(a.end(), {"--threads", "1"});
    b.insert(b.end(), {"--threads", "8"});
    CHECK(run(a).out == run(b).out);
  }
}
