#include "margin_guard/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "margin_guard/random.hpp"

namespace mg = margin_guard;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    dir_ = fs::temp_directory_path() /
           ("mg_io_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter_++));
    fs::create_directories(dir_);
  }
  ~TempDir() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

 private:
  fs::path dir_;
  static int counter_;
};
int TempDir::counter_ = 0;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST(DatasetCsv, ZeroOneLabelsMapToMinusPlus) {
  TempDir tmp;
  write_file(tmp.path("d.csv"), "a,b,label\n1,2,0\n3,4,1\n");
  const auto ds = mg::read_dataset_csv(tmp.path("d.csv"));
  EXPECT_EQ(ds.points.rows(), 2);
  EXPECT_EQ(ds.labels[0], -1);
  EXPECT_EQ(ds.labels[1], 1);
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_FALSE(ds.has_groups());
}

TEST(DatasetCsv, PlusMinusPassThroughAndGroups) {
  TempDir tmp;
  write_file(tmp.path("d.csv"),
             "f1,label,group,f2\n0.5,-1,g1,1.5\n0.25,1,g2,2.5\n");
  const auto ds = mg::read_dataset_csv(tmp.path("d.csv"));
  EXPECT_EQ(ds.labels[0], -1);
  EXPECT_EQ(ds.labels[1], 1);
  ASSERT_TRUE(ds.has_groups());
  EXPECT_EQ(ds.groups[1], "g2");
  EXPECT_DOUBLE_EQ(ds.points(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(ds.points(0, 1), 1.5);  // group column skipped
}

TEST(DatasetCsv, Errors) {
  TempDir tmp;
  write_file(tmp.path("nolabel.csv"), "a,b\n1,2\n");
  EXPECT_THROW(mg::read_dataset_csv(tmp.path("nolabel.csv")),
               std::domain_error);
  write_file(tmp.path("mixed.csv"), "a,label\n1,0\n2,-1\n");
  EXPECT_THROW(mg::read_dataset_csv(tmp.path("mixed.csv")), std::domain_error);
  write_file(tmp.path("badlabel.csv"), "a,label\n1,2\n");
  EXPECT_THROW(mg::read_dataset_csv(tmp.path("badlabel.csv")),
               std::domain_error);
  write_file(tmp.path("ragged.csv"), "a,label\n1,1,3\n");
  EXPECT_THROW(mg::read_dataset_csv(tmp.path("ragged.csv")),
               std::domain_error);
  EXPECT_THROW(mg::read_dataset_csv(tmp.path("missing.csv")),
               std::domain_error);
}

TEST(ExplanationsCsv, RoundTrip) {
  TempDir tmp;
  mg::Rng rng(211);
  mg::ExplanationSet e;
  e.points.resize(7, 3);
  e.labels.resize(7);
  e.margins.resize(7);
  for (int i = 0; i < 7; ++i) {
    e.points.row(i) = mg::gaussian_vector(3, rng).transpose();
    e.margins[i] = mg::gaussian_vector(1, rng)[0];
    e.labels[i] = e.margins[i] >= 0 ? 1 : -1;
  }
  mg::write_explanations_csv(tmp.path("e.csv"), e);
  const auto back = mg::read_explanations_csv(tmp.path("e.csv"));
  ASSERT_EQ(back.size(), e.size());
  for (int i = 0; i < 7; ++i) {
    EXPECT_EQ(back.labels[i], e.labels[i]);
    EXPECT_NEAR(back.margins[i], e.margins[i], 1e-10);
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(back.points(i, j), e.points(i, j), 1e-10);
    }
  }
}

TEST(CurveCsv, RoundTripWithMissing) {
  TempDir tmp;
  mg::CertaintyCurve c;
  c.grid = {0, 5, 10};
  c.values = {0.9, std::numeric_limits<double>::quiet_NaN(), 0.25};
  c.stddevs = {0.01, std::numeric_limits<double>::quiet_NaN(), 0.02};
  c.repeats = 4;
  c.metric_name = "top5";
  c.r = 0.2;
  mg::write_curve_csv(tmp.path("c.csv"), c);
  const auto back = mg::read_curve_csv(tmp.path("c.csv"));
  ASSERT_EQ(back.grid.size(), 3u);
  EXPECT_EQ(back.metric_name, "top5");
  EXPECT_EQ(back.repeats, 4);
  EXPECT_DOUBLE_EQ(back.r, 0.2);
  EXPECT_NEAR(back.values[0], 0.9, 1e-12);
  EXPECT_TRUE(std::isnan(back.values[1]));
  EXPECT_NEAR(back.values[2], 0.25, 1e-12);
}

TEST(ModelJson, RoundTrip) {
  TempDir tmp;
  mg::LinearModel m;
  m.w = Eigen::VectorXd(3);
  m.w << 0.25, -1.5, 3.0;
  m.b = -0.125;
  mg::write_model_json(tmp.path("m.json"), m);
  const auto back = mg::read_model_json(tmp.path("m.json"));
  EXPECT_EQ(back.w, m.w);
  EXPECT_EQ(back.b, m.b);
}

TEST(ModelJson, MissingWeightsRejected) {
  TempDir tmp;
  write_file(tmp.path("bad.json"), "{\"b\": 0.0}");
  EXPECT_THROW(mg::read_model_json(tmp.path("bad.json")), std::domain_error);
  write_file(tmp.path("garbage.json"), "not json");
  EXPECT_THROW(mg::read_model_json(tmp.path("garbage.json")),
               std::domain_error);
}

TEST(PairsCsv, ColumnsAndContent) {
  TempDir tmp;
  Eigen::MatrixXd pts(2, 2);
  pts << 0.1, 1.0, -0.1, 1.0;
  mg::LinearModel m;
  m.w = Eigen::VectorXd(2);
  m.w << 1, 0;
  mg::BoundaryPairSet pairs;
  pairs.pairs = {{1, 0}};
  mg::write_pairs_csv(tmp.path("p.csv"), pairs, pts, m);
  const std::string content = read_file(tmp.path("p.csv"));
  EXPECT_EQ(content,
            "i,j,dist,margin_i,margin_j\n1,0,0.2,-0.1,0.1\n");
}

TEST(CertaintyReportOutputs, JsonAndFlatCsv) {
  TempDir tmp;
  mg::CertaintyReport rep;
  rep.per_pair = {{0, 0.5}, {1, -0.25}, {2, 1.0}};
  rep.max_pi = 1.0;
  rep.top5_mean = 1.0;
  rep.mean_pi = 0.41666666666666663;
  rep.n_samples = 4;
  rep.stderr_bound = 0.3;
  mg::write_certainty_report_csv(tmp.path("r.csv"), rep);
  EXPECT_EQ(read_file(tmp.path("r.csv")),
            "pair,pi_hat\n0,0.5\n1,-0.25\n2,1\n");
  mg::write_certainty_report_json(tmp.path("r.json"), rep);
  std::ifstream in(tmp.path("r.json"));
  nlohmann::json j;
  in >> j;
  EXPECT_EQ(j["n_samples"].get<long long>(), 4);
  EXPECT_DOUBLE_EQ(j["max_pi"].get<double>(), 1.0);
  ASSERT_EQ(j["per_pair"].size(), 3u);
  EXPECT_DOUBLE_EQ(j["per_pair"][1]["pi_hat"].get<double>(), -0.25);
}

TEST(FmtDouble, Deterministic) {
  EXPECT_EQ(mg::fmt_double(0.1), "0.1");
  EXPECT_EQ(mg::fmt_double(-1.0), "-1");
  EXPECT_EQ(mg::fmt_double(0.30000000000000004), "0.3");
}
