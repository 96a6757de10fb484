#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "lanolem/datagen.hpp"
#include "lanolem/errors.hpp"
#include "lanolem/io.hpp"
#include "oracles/random.hpp"

using namespace lanolem;

namespace {

Series parse(const std::string& text) {
  std::istringstream in(text);
  return parse_series(in);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("lanolem_io_" + name)).string();
}

}  // namespace

TEST_CASE("series round-trip is bit exact, masks become empty fields") {
  oracle::Rng rng(111);
  MissingMask mask = MissingMask::Constant(5, 2, false);
  mask(2, 1) = true;
  const Series s = make_series(rng.matrix(5, 2, 3.0), 0.0, 0.01, mask);
  std::ostringstream out;
  write_series(out, s, "banner text");
  const std::string text = out.str();
  CHECK(text.rfind("# banner text\nt,x1,x2\n", 0) == 0);

  const Series back = parse(text);
  CHECK(back.t == s.t);
  CHECK((back.mask.array() == mask.array()).all());
  CHECK(std::isnan(back.X(2, 1)));
  for (int r = 0; r < 5; ++r)
    for (int i = 0; i < 2; ++i)
      if (!mask(r, i)) CHECK(back.X(r, i) == s.X(r, i));
}

TEST_CASE("parse_series tolerates comments, CRLF and whitespace") {
  const Series s = parse("# hello\r\nt, a ,b\r\n0, 1.5 , 2\r\n\r\n0.1,,3e-1\r\n");
  CHECK(s.rows() == 2);
  CHECK(s.cols() == 2);
  CHECK(s.X(0, 0) == 1.5);
  CHECK(s.mask(1, 0));
  CHECK(s.X(1, 1) == 0.3);
}

TEST_CASE("malformed series raise IoError") {
  CHECK_THROWS_AS(parse(""), IoError);
  CHECK_THROWS_AS(parse("t,x\n"), IoError);
  CHECK_THROWS_AS(parse("time,x\n0,1\n"), IoError);
  CHECK_THROWS_AS(parse("t,x\n0,1,2\n"), IoError);
  CHECK_THROWS_AS(parse("t,x\n0,abc\n"), IoError);
  CHECK_THROWS_AS(parse("t,x\n,1\n"), IoError);
  CHECK_THROWS_AS(read_series("/nonexistent/file.csv"), IoError);
}

TEST_CASE("mask files: nonzero means missing, shape must match") {
  const std::string path = temp_path("mask.csv");
  write_text(path, "t,x1,x2\n0,0,1\n1,,0\n2,2,0\n");
  const MissingMask m = read_mask(path, 3, 2);
  CHECK(m.count() == 2);
  CHECK(m(0, 1));
  CHECK(m(2, 0));
  CHECK_FALSE(m(1, 0));
  CHECK_THROWS_AS(read_mask(path, 4, 2), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("model JSON round-trip is exact") {
  oracle::Rng rng(112);
  ModelParams theta = oracle::random_linear_model(rng, 3, 2, 3);
  theta.F = rng.matrix(3, theta.k_phi(), 0.01);
  const FitMeta meta{10.0, 50.0, 42, -123.5, 9876.5};
  const ModelFile back = model_from_json(model_to_json(theta, meta));
  CHECK(back.theta.A == theta.A);
  CHECK(back.theta.F == theta.F);
  CHECK(back.theta.b == theta.b);
  CHECK(back.theta.C == theta.C);
  CHECK(back.theta.u == theta.u);
  CHECK(back.theta.Gamma == theta.Gamma);
  CHECK(back.theta.R == theta.R);
  CHECK(back.theta.basis.d_phi() == 3);
  CHECK(back.meta.lambda1 == 10.0);
  CHECK(back.meta.n_iters == 42);
  CHECK(back.meta.mdl_bits == 9876.5);

  const std::string path = temp_path("model.json");
  save_model(path, theta, {});
  CHECK(load_model(path).theta.A == theta.A);
  CHECK_FALSE(load_model(path).meta.mdl_bits.has_value());
  std::filesystem::remove(path);
}

TEST_CASE("malformed model files raise IoError") {
  const ModelParams theta = ModelParams::identity(PolyBasis(2, 2));
  const std::string good = model_to_json(theta, {});
  CHECK_NOTHROW(model_from_json(good));
  CHECK_THROWS_AS(model_from_json("{not json"), IoError);
  CHECK_THROWS_AS(model_from_json("{}"), IoError);

  auto replace = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
  };
  CHECK_THROWS_AS(model_from_json(replace("\"schema_version\": 1", "\"schema_version\": 7")), IoError);
  CHECK_THROWS_AS(model_from_json(replace("\"d_phi\": 2", "\"d_phi\": 5")), IoError);
  CHECK_THROWS_AS(model_from_json(replace("\"k\": 2", "\"k\": 3")), IoError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), IoError);
}

TEST_CASE("truth file round-trip") {
  const TruthFile t{"Lorenz", 0.01, 25.0, 7, make_system("Lorenz").field};
  const TruthFile back = truth_from_json(truth_to_json(t));
  CHECK(back.system == "Lorenz");
  CHECK(back.dt == 0.01);
  CHECK(back.noise_ratio == 25.0);
  CHECK(back.seed == 7);
  CHECK(back.table.values == t.table.values);
  CHECK(back.table.degree == 2);
  CHECK_THROWS_AS(truth_from_json("[]"), IoError);
}
