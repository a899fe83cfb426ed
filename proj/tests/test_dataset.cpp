#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gridids/dataset.hpp"
#include "gridids/error.hpp"
#include "gridids/power_system.hpp"
#include "support.hpp"

using namespace gridids;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Format;
}

}  // namespace

TEST_CASE("missing tokens") {
  for (const char* t : {"", "NaN", "nan", "inf", "-inf", "Inf", "-Inf", "+inf"}) CHECK(is_missing_token(t));
  for (const char* t : {"0", "1.5", "-3", "infinite"}) CHECK_FALSE(is_missing_token(t));
}

TEST_CASE("power-system schema layout") {
  const auto s = power_system_schema();
  CHECK(s.size() == 128);
  CHECK(s.feature_names.front() == "R1-PA1:VH");
  CHECK(s.feature_names[1] == "R1-PM1:V");
  CHECK(s.index_of("R4-PM12:I") != FeatureSchema::npos);
  CHECK(s.index_of("snort_log4") == 127);
  CHECK(s.names_of_kind(FeatureKind::LogOrStatus).size() == 32);
  CHECK(s.names_of_kind(FeatureKind::Measurement).size() == 96);
  CHECK_NOTHROW(s.validate());
  CHECK(power_system_phasor_groups().size() == 12);
}

TEST_CASE("schema validation") {
  auto s = testing::plain_schema(3);
  s.feature_names[2] = "f0";
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidArgument);
  s = testing::plain_schema(2);
  s.label_column = "f1";
  CHECK(code_of([&] { s.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("default taxonomy") {
  const auto t = LabelTaxonomy::power_system_default();
  CHECK(t.natural_labels.size() == 9);
  CHECK(t.attack_labels.size() == 28);
  CHECK(t.universe().size() == 37);
  CHECK(t.is_natural(41));
  CHECK(t.is_attack(36));
  CHECK_FALSE(t.contains(33));
  CHECK_NOTHROW(t.validate());
  auto bad = t;
  bad.attack_labels.insert(1);
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("csv loading matches columns by name") {
  testing::TempDir dir("csv");
  const auto p = dir.write("a.csv", "\xEF\xBB\xBF" "b,marker,a,extra\n2,7,1,x\nNaN,8,,y\n\n4,9,inf,z\n");
  const auto header = read_csv_header(p);
  CHECK(header == std::vector<std::string>{"b", "marker", "a", "extra"});

  FeatureSchema s;
  s.feature_names = {"a", "b"};
  s.feature_kinds = {FeatureKind::Measurement, FeatureKind::Measurement};
  const auto raw = load_csv(p, s);
  REQUIRE(raw.rows() == 3);
  CHECK(raw.labels == std::vector<int>{7, 8, 9});
  CHECK(raw.values(0, 0) == 1.0);
  CHECK(raw.values(0, 1) == 2.0);
  CHECK(std::isnan(raw.values(1, 0)));
  CHECK(std::isnan(raw.values(1, 1)));
  CHECK(std::isnan(raw.values(2, 1)) == false);
  CHECK(std::isnan(raw.values(2, 0)));

  const auto inferred = infer_schema(p);
  CHECK(inferred.feature_names == std::vector<std::string>{"b", "a", "extra"});
}

TEST_CASE("csv loading errors") {
  testing::TempDir dir("csverr");
  FeatureSchema s;
  s.feature_names = {"a"};
  s.feature_kinds = {FeatureKind::Measurement};
  CHECK(code_of([&] { load_csv(dir.write("empty.csv", ""), s); }) == ErrorCode::EmptyFile);
  CHECK(code_of([&] { load_csv(dir.write("header.csv", "a,marker\n"), s); }) == ErrorCode::EmptyFile);
  CHECK(code_of([&] { load_csv(dir.write("nocol.csv", "b,marker\n1,2\n"), s); }) == ErrorCode::MissingColumn);
  CHECK(code_of([&] { load_csv(dir.write("label.csv", "a,marker\n1,Attack\n"), s); }) == ErrorCode::LabelParse);
  CHECK(code_of([&] { load_csv(dir.file("absent.csv"), s); }) == ErrorCode::Io);
  CHECK(code_of([&] { infer_schema(dir.write("nolabel.csv", "a,b\n1,2\n")); }) == ErrorCode::MissingColumn);
}

TEST_CASE("several files concatenate in order") {
  testing::TempDir dir("multi");
  FeatureSchema s;
  s.feature_names = {"a"};
  s.feature_kinds = {FeatureKind::Measurement};
  const std::vector<std::filesystem::path> paths{dir.write("1.csv", "a,marker\n1,1\n2,1\n"),
                                                 dir.write("2.csv", "marker,a\n3,30\n")};
  const auto raw = load_csv(paths, s);
  CHECK(raw.labels == std::vector<int>{1, 1, 3});
  CHECK(raw.values(2, 0) == 30.0);
}

namespace {

RawDataset raw_with_gaps() {
  RawDataset r;
  r.schema = testing::plain_schema(2);
  const double nan = std::nan("");
  r.values = Matrix(4, 2, std::vector<double>{1, nan, 3, 10, nan, 20, 8, 40});
  r.labels = {0, 1, 0, 1};
  return r;
}

}  // namespace

TEST_CASE("imputation policies") {
  const auto raw = raw_with_gaps();
  const auto mean = impute_missing(raw, ImputePolicy::Mean);
  CHECK(mean.values(2, 0) == doctest::Approx(4.0));
  CHECK(mean.values(0, 1) == doctest::Approx(70.0 / 3));
  const auto median = impute_missing(raw, ImputePolicy::Median);
  CHECK(median.values(2, 0) == 3.0);
  CHECK(median.values(0, 1) == 20.0);
  const auto zero = impute_missing(raw, ImputePolicy::Zero);
  CHECK(zero.values(2, 0) == 0.0);
  CHECK(zero.values(0, 1) == 0.0);
  const auto drop = impute_missing(raw, ImputePolicy::Drop);
  CHECK(drop.rows() == 2);
  CHECK(drop.labels == std::vector<int>{1, 1});
  CHECK(drop.values(1, 1) == 40.0);
}

TEST_CASE("even-count median averages the middle pair") {
  RawDataset r;
  r.schema = testing::plain_schema(1);
  r.values = Matrix(5, 1, std::vector<double>{4, 1, std::nan(""), 3, 2});
  r.labels = {0, 0, 0, 0, 0};
  CHECK(fit_imputer(r, ImputePolicy::Median).fill[0] == 2.5);
}

TEST_CASE("imputer fitted on a row subset") {
  const auto raw = raw_with_gaps();
  const std::vector<std::size_t> rows{0, 3};
  const auto stats = fit_imputer(raw, ImputePolicy::Mean, rows);
  CHECK(stats.fill[0] == doctest::Approx(4.5));
  CHECK(stats.fill[1] == doctest::Approx(40.0));
}

TEST_CASE("imputation failures") {
  RawDataset r;
  r.schema = testing::plain_schema(1);
  r.values = Matrix(2, 1, std::nan(""));
  r.labels = {0, 1};
  CHECK(code_of([&] { fit_imputer(r, ImputePolicy::Mean); }) == ErrorCode::AllMissingColumn);
  CHECK(code_of([&] { impute_missing(r, ImputePolicy::Drop); }) == ErrorCode::EmptyResult);
}

TEST_CASE("imputation leaves no missing values") {
  Rng rng(3);
  RawDataset r;
  r.schema = testing::plain_schema(5);
  r.values = Matrix(0, 5);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> row(5);
    for (auto& v : row) v = rng.uniform01() < 0.1 ? std::nan("") : rng.normal();
    r.values.append_row(row);
    r.labels.push_back(i % 3);
  }
  for (auto policy : {ImputePolicy::Mean, ImputePolicy::Median, ImputePolicy::Zero, ImputePolicy::Drop}) {
    const auto d = impute_missing(r, policy);
    CHECK(std::none_of(d.values.data().begin(), d.values.data().end(), [](double v) { return std::isnan(v); }));
  }
}

TEST_CASE("stratified split keeps class proportions") {
  std::vector<int> labels;
  for (int c = 0; c < 5; ++c)
    for (int i = 0; i < 10 * (c + 1); ++i) labels.push_back(c);
  Rng rng(1);
  rng.shuffle(labels.begin(), labels.end());
  const auto idx = split_indices(labels, 0.8, 42);
  std::map<int, std::size_t> train_counts;
  for (auto i : idx.train) ++train_counts[labels[i]];
  for (int c = 0; c < 5; ++c) CHECK(train_counts[c] == static_cast<std::size_t>(std::llround(0.8 * 10 * (c + 1))));

  std::vector<std::size_t> all = idx.train;
  all.insert(all.end(), idx.test.begin(), idx.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(labels.size());
  std::iota(expect.begin(), expect.end(), std::size_t{0});
  CHECK(all == expect);
  CHECK(std::is_sorted(idx.train.begin(), idx.train.end()));
  CHECK(std::is_sorted(idx.test.begin(), idx.test.end()));

  const auto again = split_indices(labels, 0.8, 42);
  CHECK(again.train == idx.train);
  CHECK(split_indices(labels, 0.8, 43).train != idx.train);
}

TEST_CASE("every class appears on both sides of a stratified split") {
  const std::vector<int> labels{1, 1, 2, 2, 2, 3, 3};
  for (double frac : {0.1, 0.5, 0.99}) {
    const auto idx = split_indices(labels, frac, 7);
    std::set<int> tr, te;
    for (auto i : idx.train) tr.insert(labels[i]);
    for (auto i : idx.test) te.insert(labels[i]);
    CHECK(tr.size() == 3);
    CHECK(te.size() == 3);
  }
  const std::vector<int> single{1, 2, 2};
  CHECK(code_of([&] { split_indices(single, 0.5, 1); }) == ErrorCode::ClassTooSmall);
  CHECK(code_of([&] { split_indices(labels, 1.0, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("shuffle split sizes") {
  std::vector<int> labels(50, 0);
  const auto idx = split_indices(labels, 0.8, 5, SplitMode::Shuffle);
  CHECK(idx.train.size() == 40);
  CHECK(idx.test.size() == 10);
}

TEST_CASE("class population") {
  const std::vector<int> labels{3, 1, 3, 3};
  const auto d = class_population(labels);
  CHECK(d.n_classes() == 2);
  CHECK(d.total() == 4);
  CHECK(d.counts.at(3) == 3);
  CHECK(d.proportions.at(1) == 0.25);
  CHECK_THROWS_AS(class_population(std::vector<int>{}), Error);
}
