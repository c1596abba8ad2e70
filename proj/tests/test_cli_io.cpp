#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bubblelab/cli_io.hpp"
#include "bubblelab/diagnostics.hpp"
#include "bubblelab/errors.hpp"

using namespace bubblelab;

TEST_CASE("config: a valid bubble run") {
  const auto c = parse_config("grid_n=256\ninit=bubble:40,0.5,0.5,0,0,0\n");
  CHECK(c.flow.grid_n == 256);
  CHECK(c.flow.init.kind == InitSpec::Kind::Bubble);
  CHECK(c.flow.init.bubble.lambda == 40.0);
  CHECK(c.entries.at("grid_n") == "256");
}

TEST_CASE("config: comments, blanks and lists") {
  const auto c = parse_config("# scan\n\nsubcommand = bubble-scan\nlambdas=20,28,40\ngrid_n=512\n");
  CHECK(c.subcommand == "bubble-scan");
  CHECK(c.lambdas == std::vector<double>{20, 28, 40});
}

TEST_CASE("config: precondition violations") {
  CHECK_THROWS_AS(parse_config("lambda=1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("grid_n=64\ninit=bubble:40,0.5,0.5,0,0,0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("grid_n=8\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("dt_safety=0.3\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("init=bubble:10,1.5,0.5,0,0,0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("subcommand=bake\n"), ValidationError);
}

TEST_CASE("config: malformed input names its line") {
  try {
    parse_config("grid_n=64\n\ncolour=blue\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_config("grid_n=64\ngrid_n=128\n"), ParseError);
  CHECK_THROWS_AS(parse_config("grid_n=sixty\n"), ParseError);
  CHECK_THROWS_AS(parse_config("just words\n"), ParseError);
  CHECK_THROWS_AS(parse_init("bubble:10,0.5"), std::invalid_argument);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("manifest is stable and sensitive to the config") {
  const auto a = make_manifest("flow", {{"grid_n", "64"}});
  const auto b = make_manifest("flow", {{"grid_n", "64"}});
  const auto c = make_manifest("flow", {{"grid_n", "65"}});
  CHECK(a.hash == b.hash);
  CHECK(a.hash != c.hash);
  CHECK(a.hash.size() == 16);
  CHECK(a.text.find("grid_n=64") != std::string::npos);
}

TEST_CASE("empty series is a bare header") {
  std::ostringstream os;
  write_series(os, {});
  CHECK(os.str() == std::string(kFlowColumns) + "\n");
}

TEST_CASE("series round trip through the reader") {
  DiagnosticsRecord r;
  r.t = 0.1;
  r.energy = 1.0 / 3.0;
  r.tension_l2 = 2.5;
  r.lambda = std::nan("");
  r.dist_z = std::nan("");
  r.events = "no_bubble";
  std::stringstream ss;
  write_series(ss, {r, r}, "0123456789abcdef");
  const auto t = read_csv(ss);
  CHECK(t.manifest_hash == "0123456789abcdef");
  CHECK(t.rows() == 2);
  CHECK(t.column("energy")[1] == r.energy);
  CHECK(std::isnan(t.column("lambda")[0]));
  CHECK(t.events[0] == "no_bubble");
}

TEST_CASE("format_real keeps every bit") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_real(v)) == v);
  CHECK(format_real(std::nan("")) == "nan");
  CHECK(format_real(-INFINITY) == "-inf");
}

TEST_CASE("summaries are sorted and carry the manifest") {
  std::ostringstream os;
  write_summary(os, {{"zeta", 1}, {"alpha", 2}}, "abc");
  const std::string s = os.str();
  CHECK(s.find("alpha") < s.find("manifest"));
  CHECK(s.find("manifest") < s.find("zeta"));
}

TEST_CASE("reruns are byte identical") {
  FlowConfig c;
  c.grid_n = 32;
  c.t_end = 0.005;
  c.sample_every = 10;
  c.init.kind = InitSpec::Kind::Bubble;
  c.init.bubble.lambda = 4;
  auto once = [&] {
    std::ostringstream os;
    write_series(os, run(c).records, "feed");
    return os.str();
  };
  const std::string a = once(), b = once();
  CHECK(a.size() > 100);
  CHECK(a == b);
}

TEST_CASE("flow verdict on a synthetic series") {
  std::stringstream ss;
  std::vector<DiagnosticsRecord> recs;
  for (int i = 0; i < 40; ++i) {
    DiagnosticsRecord r;
    r.t = 0.01 * (i + 1);
    r.tension_l2 = 1.0 / (i + 1);
    r.energy = 4 * kPi + 0.5 / (i + 1);
    r.lambda = 5 + i;
    const auto q = loj_ratios(r.lambda, r.tension_l2, r.energy);
    r.ratio_scale = q.scale;
    r.ratio_energy = q.energy;
    r.dist_z = std::nan("");
    recs.push_back(r);
  }
  write_series(ss, recs);
  const auto v = loj_check_flow(read_csv(ss), LojCheckOptions{256, kSphereEnergy});
  CHECK(v["window"]["samples"] == 40);
  CHECK(v["criteria"]["energy_monotone"]["pass"] == true);
  CHECK(v["criteria"].contains("ratio_scale_bounded"));
  CHECK_FALSE(v["criteria"].contains("dist_envelope"));
  nlohmann::json bad = {{"criteria", {{"x", {{"pass", false}}}}}};
  CHECK_FALSE(verdict_passed(bad));
  nlohmann::json good = {{"criteria", {{"x", {{"pass", true}}}}}};
  CHECK(verdict_passed(good));
}
