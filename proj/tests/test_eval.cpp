#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "cefrlab/eval.hpp"
#include "cefrlab/rng.hpp"
#include "fixtures.hpp"

using namespace cefrlab;

namespace {

const std::vector<CefrLabel> kFive(kClassLevels.begin(), kClassLevels.end());

// Document-level confusion matrix reported for the full feature set.
ConfusionMatrix document_table() {
  return ConfusionMatrix(kFive, {37, 12, 0, 0, 0,      //
                                 12, 121, 18, 5, 1,    //
                                 4, 11, 206, 24, 13,   //
                                 0, 5, 21, 238, 24,    //
                                 0, 0, 0, 12, 103});
}

// Sentence-level confusion matrix reported for the full feature set.
ConfusionMatrix sentence_table() {
  return ConfusionMatrix(kFive, {371, 123, 9, 2, 0,    //
                                 120, 541, 78, 11, 4,  //
                                 27, 136, 212, 23, 10, //
                                 8, 34, 39, 30, 13,    //
                                 0, 18, 21, 9, 35});
}

// Support-weighted F computed straight from the counts.
double oracle_weighted_f(const std::vector<std::vector<double>>& m) {
  const std::size_t k = m.size();
  double total = 0, wf = 0;
  for (std::size_t g = 0; g < k; ++g) total += std::accumulate(m[g].begin(), m[g].end(), 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    double col = 0, row = 0;
    for (std::size_t i = 0; i < k; ++i) col += m[i][c], row += m[c][i];
    const double p = col > 0 ? m[c][c] / col : 0, r = row > 0 ? m[c][c] / row : 0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0;
    wf += f * row / total;
  }
  return wf;
}

std::vector<std::vector<double>> dense(const ConfusionMatrix& cm) {
  std::vector<std::vector<double>> m(cm.size(), std::vector<double>(cm.size()));
  for (std::size_t g = 0; g < cm.size(); ++g)
    for (std::size_t p = 0; p < cm.size(); ++p) m[g][p] = static_cast<double>(cm.at(g, p));
  return m;
}

std::vector<CefrLabel> repeated(std::array<std::size_t, 5> counts) {
  std::vector<CefrLabel> y;
  for (std::size_t k = 0; k < 5; ++k) y.insert(y.end(), counts[k], kClassLevels[k]);
  return y;
}

Sentence words(std::size_t n) {
  Sentence s;
  for (std::size_t i = 0; i < n; ++i) {
    AnnotatedToken t;
    t.index = static_cast<int>(i + 1);
    t.form = t.lemma = "ord";
    t.pos = "NN";
    t.head = i == 0 ? 0 : 1;
    t.deprel = i == 0 ? "ROOT" : "OO";
    s.tokens.push_back(t);
  }
  return s;
}

}  // namespace

TEST_CASE("document confusion matrix") {
  const ConfusionMatrix cm = document_table();
  const MetricsReport r = matrix_metrics(cm);
  CHECK(r.n == 867);
  CHECK(r.accuracy == doctest::Approx(705.0 / 867));
  CHECK(r.adjacent_accuracy == doctest::Approx(839.0 / 867));
  CHECK(std::round(r.accuracy * 1000) / 10 == doctest::Approx(81.3));
  CHECK(row_error_rate(cm, CefrLabel::A2) == doctest::Approx(36.0 / 157));
  CHECK(row_error_rate(cm, CefrLabel::B1) == doctest::Approx(52.0 / 258));
  CHECK(row_error_rate(cm, CefrLabel::B2) == doctest::Approx(50.0 / 288));
  CHECK(r.weighted_f == doctest::Approx(oracle_weighted_f(dense(cm))));
  CHECK(std::round(r.weighted_f * 10) / 10 == doctest::Approx(0.8));
  CHECK(r.per_class[0].precision == doctest::Approx(37.0 / 53));
  CHECK(r.per_class[0].recall == doctest::Approx(37.0 / 49));
  CHECK(r.per_class[4].support == 115);
}

TEST_CASE("sentence confusion matrix") {
  const ConfusionMatrix cm = sentence_table();
  const MetricsReport r = matrix_metrics(cm);
  CHECK(r.n == 1874);
  CHECK(r.accuracy == doctest::Approx(1189.0 / 1874));
  CHECK(r.adjacent_accuracy == doctest::Approx(1730.0 / 1874));
  CHECK(std::round(r.accuracy * 1000) / 10 == doctest::Approx(63.4));
  CHECK(std::round(r.adjacent_accuracy * 100) == 92);
  CHECK(r.weighted_f == doctest::Approx(oracle_weighted_f(dense(cm))));
  CHECK(r.macro_f < r.weighted_f);

  const BinaryCollapse b = collapse_binary(cm);
  CHECK(b.low_low == 1617);
  CHECK(b.low_high == 50);
  CHECK(b.high_low == 120);
  CHECK(b.high_high == 87);
  CHECK(b.accuracy == doctest::Approx(1704.0 / 1874));
  CHECK(b.precision_low == doctest::Approx(1617.0 / 1737));
  CHECK(b.precision_high == doctest::Approx(87.0 / 137));
}

TEST_CASE("metric properties") {
  CHECK_THROWS_AS(matrix_metrics(ConfusionMatrix(kFive)), Error);
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CefrLabel> gold, pred;
    for (int i = 0; i < 50; ++i) {
      gold.push_back(kClassLevels[rng.below(5)]);
      pred.push_back(kClassLevels[rng.below(5)]);
    }
    const MetricsReport r = matrix_metrics(ConfusionMatrix::from_predictions(kFive, gold, pred));
    CHECK(r.accuracy <= r.adjacent_accuracy);
    CHECK(r.accuracy >= 0.0);
    CHECK(r.adjacent_accuracy <= 1.0);
  }
  // Adjacency follows the level values, not the column order.
  ConfusionMatrix shuffled({CefrLabel::C1, CefrLabel::A1, CefrLabel::B2});
  shuffled.add(CefrLabel::C1, CefrLabel::B2);
  shuffled.add(CefrLabel::A1, CefrLabel::B2, 3);
  CHECK(matrix_metrics(shuffled).adjacent_accuracy == doctest::Approx(0.25));
  CHECK_THROWS_AS(shuffled.add(CefrLabel::B1, CefrLabel::A1), Error);
}

TEST_CASE("probability RMSE") {
  const std::vector<std::size_t> gold0 = {0};
  CHECK(rmse_prob(std::vector<std::vector<double>>{{1.0, 0.0}}, gold0) == 0.0);
  CHECK(rmse_prob(std::vector<std::vector<double>>{{0.6, 0.4}}, gold0) == doctest::Approx(0.4));
  CHECK(rmse_prob(std::vector<std::vector<double>>{{0.5, 0.5}}, gold0) == 0.5);
  CHECK(rmse_prob(std::vector<std::vector<double>>{{0.2, 0.2, 0.2, 0.2, 0.2}}, gold0) == 0.4);
  CHECK_THROWS_AS(rmse_prob(std::vector<std::vector<double>>{{1.0}}, std::vector<std::size_t>{}), Error);

  // Majority predictor, one-hot, over the document and sentence class counts.
  auto majority_rmse = [](std::array<std::size_t, 5> counts, std::size_t majority) {
    std::vector<std::vector<double>> p;
    std::vector<std::size_t> g;
    for (std::size_t k = 0; k < 5; ++k)
      for (std::size_t i = 0; i < counts[k]; ++i) {
        std::vector<double> row(5, 0.0);
        row[majority] = 1.0;
        p.push_back(row);
        g.push_back(k);
      }
    return rmse_prob(p, g);
  };
  CHECK(majority_rmse({49, 157, 258, 288, 115}, 3) == doctest::Approx(0.517).epsilon(0.001));
  CHECK(majority_rmse({505, 754, 408, 124, 83}, 1) == doctest::Approx(0.489).epsilon(0.001));
}

TEST_CASE("stratified folds") {
  SUBCASE("one of each class per fold") {
    const auto y = repeated({2, 2, 2, 2, 2});
    const FoldPlan plan = stratified_folds(y, 2, 3);
    for (std::size_t f = 0; f < 2; ++f) {
      std::set<CefrLabel> seen;
      for (auto i : plan.test_indices(f)) seen.insert(y[i]);
      CHECK(seen.size() == 5);
      CHECK(plan.test_indices(f).size() == 5);
    }
  }
  SUBCASE("uneven sizes stay balanced") {
    const auto y = repeated({3, 2, 2, 0, 0});
    const FoldPlan plan = stratified_folds(y, 3, 1);
    std::vector<std::size_t> sizes;
    for (std::size_t f = 0; f < 3; ++f) sizes.push_back(plan.test_indices(f).size());
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{2, 2, 3});
  }
  SUBCASE("train and test partition the instances") {
    const auto y = repeated({5, 7, 3, 9, 4});
    const FoldPlan plan = stratified_folds(y, 4);
    for (std::size_t f = 0; f < 4; ++f) CHECK(plan.train_indices(f).size() + plan.test_indices(f).size() == y.size());
  }
  SUBCASE("deterministic for a seed") {
    const auto y = repeated({5, 7, 3, 9, 4});
    CHECK(stratified_folds(y, 5, 8).fold_of == stratified_folds(y, 5, 8).fold_of);
    CHECK(stratified_folds(y, 5, 8).fold_of != stratified_folds(y, 5, 9).fold_of);
  }
  SUBCASE("k out of range") {
    const auto y = repeated({1, 1, 1, 0, 0});
    CHECK_THROWS_AS(stratified_folds(y, 4), Error);
    CHECK_THROWS_AS(stratified_folds(y, 1), Error);
  }
}

namespace {

void noisy(std::uint64_t seed, const std::vector<CefrLabel>& y, FeatureMatrix& x) {
  Rng rng(seed);
  for (auto l : y) x.push_back({rng.normal(ordinal(l), 0.7), rng.normal(-ordinal(l), 1.5)});
}

}  // namespace

TEST_CASE("cross-validation") {
  const auto y = repeated({6, 6, 6, 24, 6});
  FeatureMatrix x;
  noisy(2, y, x);
  const FoldPlan plan = stratified_folds(y, 4);

  SUBCASE("pooled predictions cover every instance once") {
    ModelSpec spec;
    const CvResult r = cross_validate(x, y, spec, plan);
    CHECK(r.matrix.total() == y.size());
    CHECK(r.records.size() == y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      CHECK(r.records[i].index == i);
      CHECK(std::accumulate(r.records[i].probabilities.begin(), r.records[i].probabilities.end(), 0.0) ==
            doctest::Approx(1.0));
    }
    CHECK(r.report.rmse.has_value());
    CHECK(r.report.accuracy > 0.4);
  }
  SUBCASE("majority accuracy equals the majority share") {
    ModelSpec spec;
    spec.learner = Learner::Majority;
    const CvResult r = cross_validate(x, y, spec, plan);
    CHECK(r.report.accuracy == doctest::Approx(24.0 / 48));
  }
  SUBCASE("deterministic") {
    const CvResult a = cross_validate(x, y, ModelSpec{}, plan);
    const CvResult b = cross_validate(x, y, ModelSpec{}, plan);
    CHECK(a.matrix == b.matrix);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(a.records[i].probabilities == b.records[i].probabilities);
  }
  SUBCASE("permuting the instances permutes the predictions") {
    std::vector<std::size_t> perm(y.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(12);
    rng.shuffle(perm);
    FeatureMatrix xp;
    std::vector<CefrLabel> yp;
    FoldPlan pp = plan;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      xp.push_back(x[perm[i]]);
      yp.push_back(y[perm[i]]);
      pp.fold_of[i] = plan.fold_of[perm[i]];
    }
    const CvResult a = cross_validate(x, y, ModelSpec{}, plan);
    const CvResult b = cross_validate(xp, yp, ModelSpec{}, pp);
    CHECK(a.matrix == b.matrix);
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(b.records[i].predicted == a.records[perm[i]].predicted);
  }
  SUBCASE("separate held-out matrix is used for prediction") {
    FeatureMatrix shifted = x;
    for (auto& row : shifted) row[0] += 100.0;
    const CvResult r = cross_validate(x, shifted, y, ModelSpec{}, plan);
    for (const auto& rec : r.records) CHECK(ordinal(rec.predicted) >= ordinal(CefrLabel::B2));
  }
  SUBCASE("mismatches and regression learners are rejected") {
    ModelSpec spec;
    spec.learner = Learner::LinReg;
    CHECK_THROWS_AS(cross_validate(x, y, spec, plan), Error);
    FoldPlan bad = plan;
    bad.fold_of.pop_back();
    CHECK_THROWS_AS(cross_validate(x, y, ModelSpec{}, bad), Error);
  }
}

TEST_CASE("single-class training part is an error") {
  const std::vector<CefrLabel> y = {CefrLabel::A1, CefrLabel::A1, CefrLabel::A1, CefrLabel::B1};
  const FeatureMatrix x = {{1}, {2}, {3}, {4}};
  FoldPlan plan;
  plan.k = 2;
  plan.fold_of = {0, 0, 0, 1};  // fold 1 trains on A1 only
  CHECK_THROWS_AS(cross_validate(x, y, ModelSpec{}, plan), Error);
}

TEST_CASE("Pearson correlation") {
  using V = std::vector<double>;
  CHECK(pearson(V{1, 2, 3}, V{1, 3, 3}).r == doctest::Approx(std::sqrt(0.75)));
  CHECK(pearson(V{1, 2, 3}, V{2, 4, 6}).r == doctest::Approx(1.0));
  CHECK(pearson(V{1, 2, 3}, V{3, 2, 1}).r == doctest::Approx(-1.0));
  const PearsonResult flat = pearson(V{2, 2, 2}, V{1, 2, 3});
  CHECK(flat.degenerate);
  CHECK(flat.r == 0.0);
  CHECK_THROWS_AS(pearson(V{1}, V{1}), Error);
  CHECK_THROWS_AS(pearson(V{1, 2}, V{1}), Error);
}

TEST_CASE("regression cross-validation") {
  const auto y = repeated({6, 6, 6, 6, 6});
  FeatureMatrix x;
  noisy(5, y, x);
  const RegressionCvResult r = cross_validate_regression(x, y, 1e-6, stratified_folds(y, 5));
  CHECK(r.predictions.size() == y.size());
  CHECK(r.correlation.r > 0.8);
  CHECK(r.rmse > 0.0);
  CHECK(r.rmse < 1.0);
}

TEST_CASE("binary collapse from label sequences") {
  const std::vector<CefrLabel> gold = {CefrLabel::A1, CefrLabel::B1, CefrLabel::B2, CefrLabel::C1};
  const std::vector<CefrLabel> pred = {CefrLabel::A2, CefrLabel::B2, CefrLabel::B2, CefrLabel::A1};
  const BinaryCollapse b = collapse_binary(gold, pred);
  CHECK(b.low_low == 1);
  CHECK(b.low_high == 1);
  CHECK(b.high_low == 1);
  CHECK(b.high_high == 1);
  CHECK(b.accuracy == doctest::Approx(0.5));
}

TEST_CASE("sentence distribution per document level") {
  // Two-class sentence model on length alone: more than five tokens -> C1.
  MlrModel m;
  m.labels = {CefrLabel::A1, CefrLabel::C1};
  m.weights = {0.0, 0.0, 1.0, -5.0};
  m.scaler.means = {0.0};
  m.scaler.stds = {1.0};
  m.feature_names = {"f01_sentence_length"};
  const Predictor predictor{AnyModel{m}};

  std::vector<Document> docs(2);
  docs[0].level = CefrLabel::A1;
  docs[0].sentences = {words(3), words(3), words(8)};
  docs[1].level = CefrLabel::B1;
  docs[1].sentences = {words(8), words(9)};

  const auto kelly = fixtures::kelly("");
  const auto senses = fixtures::senses("");
  const auto map = fixtures::category_map();
  const ExtractionContext ctx{kelly, senses, map};
  const DistributionTable t = sentence_distribution(predictor, docs, ctx);

  CHECK(t.counts[0] == std::array<std::size_t, 5>{2, 0, 0, 0, 1});
  CHECK(t.proportions[0][0] == doctest::Approx(2.0 / 3));
  CHECK(t.proportions[2] == std::array<double, 5>{0, 0, 0, 0, 1});
  CHECK(t.proportions[3] == std::array<double, 5>{0, 0, 0, 0, 0});

  std::ostringstream out;
  write_distribution_csv(out, t);
  CHECK(out.str().rfind("document_level,pred_A1,pred_A2,pred_B1,pred_B2,pred_C1,n_A1", 0) == 0);
  CHECK(out.str().find("\nB1,0.000000,0.000000,0.000000,0.000000,1.000000,0,0,0,0,2\n") != std::string::npos);
}

TEST_CASE("predictor selects model columns by name") {
  MlrModel m;
  m.labels = {CefrLabel::A1, CefrLabel::A2};
  m.weights = {0.0, 0.0, 1.0, -1.0};
  m.scaler.means = {0.0};
  m.scaler.stds = {1.0};
  m.feature_names = {"f05_lix"};
  const Predictor p{AnyModel{m}};
  FeatureVector v{};
  v.at(5) = 3.0;
  CHECK(p.classify(v) == CefrLabel::A2);
  v.at(5) = 0.0;
  CHECK(p.classify(v) == CefrLabel::A1);

  m.feature_names = {"f99_unknown"};
  CHECK_THROWS_AS(Predictor{AnyModel{m}}, Error);
}

TEST_CASE("report writers") {
  ConfusionMatrix cm({CefrLabel::A1, CefrLabel::B1});
  cm.add(CefrLabel::A1, CefrLabel::A1, 3);
  cm.add(CefrLabel::B1, CefrLabel::A1);
  std::ostringstream csv;
  write_confusion_csv(csv, cm);
  CHECK(csv.str() == "gold\\predicted,A1,B1\nA1,3,0\nB1,1,0\n");

  std::ostringstream tsv;
  write_metrics_tsv(tsv, matrix_metrics(cm));
  CHECK(tsv.str().rfind("metric\tvalue\nn\t4\naccuracy\t0.750000\nadjacent_accuracy\t0.750000\n", 0) == 0);
  CHECK(tsv.str().find("support_B1\t1\n") != std::string::npos);

  CvResult cv;
  cv.labels = {CefrLabel::A1, CefrLabel::B1};
  cv.records.push_back({0, CefrLabel::A1, CefrLabel::B1, {0.25, 0.75}});
  std::ostringstream pred;
  write_predictions_tsv(pred, {"doc_1"}, cv);
  CHECK(pred.str() == "unit_id\tgold\tpredicted\tp_A1\tp_B1\ndoc_1\tA1\tB1\t0.250000\t0.750000\n");
}
