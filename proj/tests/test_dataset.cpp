#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "mcca/dataset.hpp"
#include "mcca/synthetic.hpp"

using namespace mcca;

namespace {

const std::string kMinimal =
    "unit,feature,time,variable,value\n"
    "a,f,1,1,1.5\n"
    "a,g,1,1,2.5\n"
    "b,f,1,1,-1.0\n"
    "b,g,1,1,0.0\n"
    "c,f,1,1,3.25\n"
    "c,g,1,1,4.0\n";

}  // namespace

TEST_CASE("CSV field splitting honors quotes") {
  const auto plain = csv::split_record("a,b,c");
  REQUIRE(plain == std::vector<std::string>{"a", "b", "c"});
  const auto quoted = csv::split_record("\"x,y\",2,\"he said \"\"hi\"\"\"");
  REQUIRE(quoted.size() == 3);
  REQUIRE(quoted[0] == "x,y");
  REQUIRE(quoted[2] == "he said \"hi\"");
  REQUIRE(csv::quote_field("x,y") == "\"x,y\"");
  REQUIRE(csv::quote_field("plain") == "plain");
}

TEST_CASE("minimal valid file yields the documented shape") {
  const RepeatedMeasuresDataset ds = parse_dataset(kMinimal);
  REQUIRE(ds.n == 3);
  REQUIRE(ds.L == 2);
  REQUIRE(ds.T == 1);
  REQUIRE(ds.p == std::vector<std::size_t>{1, 1});
  REQUIRE(ds.unit_labels == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(ds.feature_names == std::vector<std::string>{"f", "g"});
  REQUIRE_FALSE(ds.has_groups());
  REQUIRE(ds.blocks[0][0](0, 0) == 1.5);
  REQUIRE(ds.blocks[1][2](0, 0) == 4.0);
}

TEST_CASE("a single feature is rejected") {
  const std::string one_feature =
      "unit,feature,time,variable,value\n"
      "a,f,1,1,1\n"
      "a,f,2,1,2\n"
      "b,f,1,1,3\n"
      "b,f,2,1,4\n";
  const std::string msg =
      test::expect_error(ErrorCode::InvalidValue, [&] { parse_dataset(one_feature); });
  REQUIRE(msg.find("2 features") != std::string::npos);
}

TEST_CASE("duplicated rows are rejected with coordinates") {
  const std::string dup = kMinimal + "c,g,1,1,4.0\n";
  const std::string msg =
      test::expect_error(ErrorCode::DuplicateCell, [&] { parse_dataset(dup); });
  REQUIRE(msg.find("unit c") != std::string::npos);
  REQUIRE(msg.find("feature g") != std::string::npos);
}

TEST_CASE("missing cells are rejected with coordinates") {
  std::string missing = kMinimal;
  missing.resize(missing.rfind("c,g"));
  const std::string msg =
      test::expect_error(ErrorCode::MissingCell, [&] { parse_dataset(missing); });
  REQUIRE(msg.find("unit c") != std::string::npos);
  REQUIRE(msg.find("feature g") != std::string::npos);
}

TEST_CASE("malformed fields are rejected") {
  test::expect_error(ErrorCode::InvalidValue, [] { parse_dataset(""); });
  test::expect_error(ErrorCode::InvalidValue,
                     [] { parse_dataset("unit,feature,when,variable,value\n"); });
  test::expect_error(ErrorCode::NonNumericValue, [] {
    parse_dataset("unit,feature,time,variable,value\na,f,one,1,2\n");
  });
  test::expect_error(ErrorCode::NonNumericValue, [] {
    parse_dataset("unit,feature,time,variable,value\na,f,1,0,2\n");
  });
  test::expect_error(ErrorCode::NonNumericValue, [] {
    parse_dataset("unit,feature,time,variable,value\na,f,1,1,two\n");
  });
  test::expect_error(ErrorCode::InvalidValue, [] {
    parse_dataset("unit,feature,time,variable,value\na,f,1,1\n");
  });
}

TEST_CASE("group column must be consistent per unit") {
  const std::string grouped =
      "unit,feature,time,variable,value,group\n"
      "a,f,1,1,1,red\n"
      "a,g,1,1,2,red\n"
      "b,f,1,1,3,blue\n"
      "b,g,1,1,4,blue\n"
      "c,f,1,1,5,red\n"
      "c,g,1,1,6,red\n";
  const RepeatedMeasuresDataset ds = parse_dataset(grouped);
  REQUIRE(ds.has_groups());
  REQUIRE(ds.group_labels == std::vector<std::string>{"red", "blue", "red"});

  std::string torn = grouped;
  torn.replace(torn.rfind("red"), 3, "blue");
  test::expect_error(ErrorCode::InconsistentShape, [&] { parse_dataset(torn); });
}

TEST_CASE("per-unit variable counts must agree") {
  const std::string ragged =
      "unit,feature,time,variable,value\n"
      "a,f,1,1,1\n"
      "a,f,1,2,9\n"
      "a,g,1,1,2\n"
      "b,f,1,1,3\n"
      "b,g,1,1,4\n"
      "c,f,1,1,5\n"
      "c,g,1,1,6\n";
  const std::string msg =
      test::expect_error(ErrorCode::InconsistentShape, [&] { parse_dataset(ragged); });
  REQUIRE(msg.find("feature f") != std::string::npos);
}

TEST_CASE("serialization round-trips bit-exactly") {
  SyntheticSpec spec;
  spec.n = 8;
  spec.L = 3;
  spec.T = 4;
  spec.p = 2;
  spec.seed = 77;
  const RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  const RepeatedMeasuresDataset back = parse_dataset(serialize_dataset(ds));
  REQUIRE(back.n == ds.n);
  REQUIRE(back.L == ds.L);
  REQUIRE(back.T == ds.T);
  REQUIRE(back.p == ds.p);
  REQUIRE(back.unit_labels == ds.unit_labels);
  for (std::size_t l = 0; l < ds.L; ++l)
    for (std::size_t k = 0; k < ds.n; ++k)
      REQUIRE((back.blocks[l][k] - ds.blocks[l][k]).max_abs() == 0.0);
}

TEST_CASE("row order does not affect the parsed dataset") {
  // reversed data rows, same header
  std::istringstream in(kMinimal);
  std::string header, line;
  std::getline(in, header);
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(line);
  std::string reversed = header + "\n";
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) reversed += *it + "\n";

  const RepeatedMeasuresDataset ds = parse_dataset(kMinimal);
  const RepeatedMeasuresDataset rev = parse_dataset(reversed);
  // labels follow first appearance, so look values up by label
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t rl = 0, rk = 0;
      while (rev.feature_names[rl] != ds.feature_names[l]) ++rl;
      while (rev.unit_labels[rk] != ds.unit_labels[k]) ++rk;
      REQUIRE(rev.blocks[rl][rk](0, 0) == ds.blocks[l][k](0, 0));
    }
}

TEST_CASE("standardization gives unit sample variance per variable") {
  SyntheticSpec spec;
  spec.n = 12;
  spec.T = 3;
  spec.seed = 5;
  const RepeatedMeasuresDataset ds = standardize_dataset(gen_latent_dataset(spec));
  for (std::size_t l = 0; l < ds.L; ++l)
    for (std::size_t v = 0; v < ds.p[l]; ++v) {
      double sum = 0.0, sum2 = 0.0;
      const double count = static_cast<double>(ds.n * ds.T);
      for (std::size_t k = 0; k < ds.n; ++k)
        for (std::size_t t = 0; t < ds.T; ++t) {
          sum += ds.blocks[l][k](t, v);
          sum2 += ds.blocks[l][k](t, v) * ds.blocks[l][k](t, v);
        }
      REQUIRE(sum / count == Catch::Approx(0.0).margin(1e-12));
      REQUIRE(sum2 / (count - 1.0) == Catch::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("validation rejects inconsistent in-memory datasets") {
  SyntheticSpec spec;
  spec.seed = 1;
  RepeatedMeasuresDataset ds = gen_latent_dataset(spec);
  validate_dataset(ds);

  RepeatedMeasuresDataset bad = ds;
  bad.blocks[1].pop_back();
  test::expect_error(ErrorCode::InconsistentShape, [&] { validate_dataset(bad); });

  bad = ds;
  bad.blocks[0][3] = Matrix(ds.T + 1, 1);
  test::expect_error(ErrorCode::InconsistentShape, [&] { validate_dataset(bad); });

  bad = ds;
  bad.blocks[0][0](0, 0) = std::nan("");
  test::expect_error(ErrorCode::NonFinite, [&] { validate_dataset(bad); });
}
