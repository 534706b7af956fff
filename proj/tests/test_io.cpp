#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "perdec/error.hpp"
#include "perdec/io.hpp"

using namespace perdec;
using namespace perdec::testing;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "perdec_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("doubles survive a text round trip") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 0.45, 1e22, std::numeric_limits<double>::denorm_min(),
                   std::nextafter(1.0, 2.0)}) {
    const std::string text = format_double(x);
    double back = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), back);
    CHECK(back == x);
    CHECK(Json::parse(Json(x).dump()).get<double>() == x);
  }
}

TEST_CASE("instance json round trip is byte stable") {
  const auto first = scratch("a.json"), second = scratch("b.json");
  save_instance(fix_b(), first);
  save_instance(load_instance(first), second);
  CHECK(slurp(first) == slurp(second));
  CHECK(instance_to_json(load_instance(first)) == instance_to_json(fix_b()));
}

TEST_CASE("instance json rejects malformed input") {
  Json j = instance_to_json(fix_a());
  SUBCASE("missing field") {
    j.erase("receivers");
    CHECK_THROWS_AS(instance_from_json(j), Error);
  }
  SUBCASE("wrong type") {
    j["dim"] = "one";
    CHECK_THROWS_AS(instance_from_json(j), Error);
  }
  SUBCASE("unknown hypothesis kind") {
    j["hypotheses"][0]["kind"] = "tree";
    CHECK_THROWS_AS(instance_from_json(j), Error);
  }
  SUBCASE("receiver outside the unit range") {
    j["receivers"][0]["actions"][0]["offset"] = 1.5;
    CHECK_THROWS_AS(instance_from_json(j), Error);
  }
  SUBCASE("joint actions out of order") {
    Json two = instance_to_json(Instance(1, {threshold_receiver(), threshold_receiver()}, prefer_a0_sender(2),
                                         {constant("h", {"x0"}, {0.5})}));
    std::swap(two["sender"]["joint_actions"][1]["actions"], two["sender"]["joint_actions"][2]["actions"]);
    CHECK_THROWS_AS(instance_from_json(two), Error);
  }
  CHECK_THROWS_AS(read_json_file(scratch("does_not_exist.json")), Error);
}

TEST_CASE("dataset csv") {
  std::istringstream in("context_id,y_1,y_2\nc0,0.5,-1\nc1,1,0\n");
  const Dataset d = parse_dataset_csv(in);
  REQUIRE(d.size() == 2);
  CHECK(d[0].context == "c0");
  CHECK(d[0].outcome == Vec{0.5, -1.0});
  std::ostringstream out;
  write_dataset_csv(d, out);
  std::istringstream again(out.str());
  const Dataset e = parse_dataset_csv(again);
  CHECK(e[1].outcome == d[1].outcome);

  for (const char* bad : {"ctx,y_1\nc0,0\n", "context_id,y_1\nc0,abc\n", "context_id,y_1\nc0,0,1\n",
                          "context_id,y_1\n", "context_id,y_2\nc0,0\n"}) {
    std::istringstream b(bad);
    CHECK_THROWS_AS(parse_dataset_csv(b), Error);
  }

  const auto path = scratch("d.csv");
  save_dataset(fix_b_data(), path);
  const Dataset f = load_dataset(path);
  CHECK(f.size() == 20);
  CHECK(f.mean_outcome() == fix_b_data().mean_outcome());
}

TEST_CASE("predictor json") {
  const Instance inst = fix_b();
  const RandomizedPredictor f({0.3, 0.7});
  const auto first = scratch("p.json"), second = scratch("q.json");
  save_predictor(inst, f, first);
  save_predictor(inst, load_predictor(inst, first), second);
  CHECK(slurp(first) == slurp(second));
  CHECK(load_predictor(inst, first).weights() == f.weights());

  Json bad_sum = {{"weights", {{{"hypothesis", "h*"}, {"weight", 0.4}}, {{"hypothesis", "h_mean"}, {"weight", 0.5}}}}};
  CHECK_THROWS_AS(predictor_from_json(inst, bad_sum), Error);
  Json unknown = {{"weights", {{{"hypothesis", "h_unknown"}, {"weight", 1.0}}}}};
  CHECK_THROWS_AS(predictor_from_json(inst, unknown), Error);
  Json negative = {{"weights", {{{"hypothesis", "h*"}, {"weight", 1.5}}, {{"hypothesis", "h_mean"}, {"weight", -0.5}}}}};
  CHECK_THROWS_AS(predictor_from_json(inst, negative), Error);
}
