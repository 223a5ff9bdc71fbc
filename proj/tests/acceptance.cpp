// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "cefrlab/datagen.hpp"
#include "cefrlab/eval.hpp"
#include "cefrlab/features.hpp"
#include "cefrlab/mlr_objective.hpp"
#include "cefrlab/model.hpp"
#include "cefrlab/rng.hpp"
#include "fixtures.hpp"
#include "golden.hpp"

using namespace cefrlab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

const std::vector<CefrLabel> kFive(kClassLevels.begin(), kClassLevels.end());

ConfusionMatrix document_table() {
  return ConfusionMatrix(kFive, {37, 12, 0, 0, 0, 12, 121, 18, 5, 1, 4, 11, 206, 24, 13, 0, 5, 21, 238, 24,
                                 0, 0, 0, 12, 103});
}

ConfusionMatrix sentence_table() {
  return ConfusionMatrix(kFive, {371, 123, 9, 2, 0, 120, 541, 78, 11, 4, 27, 136, 212, 23, 10, 8, 34, 39, 30, 13,
                                 0, 18, 21, 9, 35});
}

std::vector<CefrLabel> repeated(std::array<std::size_t, 5> counts) {
  std::vector<CefrLabel> y;
  for (std::size_t k = 0; k < 5; ++k) y.insert(y.end(), counts[k], kClassLevels[k]);
  return y;
}

void metric_fixtures(Outcome& o) {
  const MetricsReport d = matrix_metrics(document_table());
  const MetricsReport s = matrix_metrics(sentence_table());
  o.require(near(d.accuracy, 0.8131, 0.0005), "document accuracy");
  o.require(near(d.adjacent_accuracy, 0.9677, 0.0005), "document adjacent accuracy");
  o.require(near(s.accuracy, 0.6345, 0.0005), "sentence accuracy");
  o.require(near(s.adjacent_accuracy, 0.9232, 0.0005), "sentence adjacent accuracy");
  const double a2 = row_error_rate(document_table(), CefrLabel::A2);
  const double b1 = row_error_rate(document_table(), CefrLabel::B1);
  const double b2 = row_error_rate(document_table(), CefrLabel::B2);
  o.require(std::round(a2 * 100) == 23 && std::round(b1 * 100) == 20 && std::round(b2 * 100) == 17,
            "row error rates");
  o.detail << std::fixed << std::setprecision(4) << "doc acc " << d.accuracy << " adj " << d.adjacent_accuracy
           << "; sent acc " << s.accuracy << " adj " << s.adjacent_accuracy << "; errors A2 " << a2 << " B1 " << b1
           << " B2 " << b2;
}

void majority_baselines(Outcome& o) {
  const auto docs = repeated({49, 157, 258, 288, 115});
  const auto sents = repeated({505, 754, 408, 124, 83});
  const MajorityModel md = train_majority(docs), ms = train_majority(sents);
  auto accuracy = [](const MajorityModel& m, const std::vector<CefrLabel>& y) {
    ConfusionMatrix cm(kFive);
    for (auto l : y) cm.add(l, m.label);
    return matrix_metrics(cm).accuracy;
  };
  const double ad = accuracy(md, docs), as = accuracy(ms, sents);
  o.require(md.label == CefrLabel::B2 && ms.label == CefrLabel::A2, "majority labels");
  o.require(std::round(ad * 1000) == 332 && ad == 288.0 / 867, "document majority 33.2%");
  o.require(std::round(as * 1000) == 402 && as == 754.0 / 1874, "sentence majority 40.2%");
  o.detail << std::fixed << std::setprecision(4) << "documents " << to_string(md.label) << ' ' << ad
           << ", sentences " << to_string(ms.label) << ' ' << as;
}

void lix_suite(Outcome& o) {
  o.require(lix(3, 1, 0) == 3.0, "lix(3,1,0)");
  o.require(lix(10, 2, 3) == 35.0, "lix(10,2,3)");
  o.require(lix(0, 0, 0) == 0.0, "lix(0,0,0)");
  const Sentence s1 = fixtures::sentence(
      "# sent_id = a\n# unit = sentence\n# level = A1\n1\tJag\tjag\tPN\t_\t2\tSS\t_\n2\tgår\tgå\tVB\t_\t0\tROOT\t_\n");
  const Sentence s2 = fixtures::sentence(
      "# sent_id = b\n# unit = sentence\n# level = A1\n"
      "1\tvi\tvi\tPN\t_\t2\tSS\t_\n2\tbesöker\tbesöka\tVB\t_\t0\tROOT\t_\n"
      "3\tmånga\tmånga\tJJ\t_\t4\tAT\t_\n4\tmuseer\tmuseum\tNN\t_\t2\tOO\t_\n"
      "5\tunder\tunder\tPP\t_\t2\tRA\t_\n6\tsemestern\tsemester\tNN\t_\t5\tPA\t_\n"
      "7\tmed\tmed\tPP\t_\t2\tRA\t_\n8\tsläktingar\tsläkting\tNN\t_\t7\tPA\t_\n");
  const std::vector<Sentence> text{s1, s2};
  const KellyList kelly = fixtures::kelly("");
  const SenseLexicon senses = fixtures::senses("");
  const CategoryMap map = fixtures::category_map();
  const ExtractionContext ctx{kelly, senses, map};
  const double whole = lix_whole_text(text);
  const double averaged = extract_document_features(Document{"d", CefrLabel::A1, text}, ctx).at(5);
  o.require(whole == 35.0, "whole-text LIX 35");
  o.require(averaged == 23.75, "averaged LIX 23.75");
  o.detail << "examples 3, 35, 0 exact; whole-text " << whole << " vs averaged " << averaged;
}

void optimization(Outcome& o) {
  Rng rng(2024);
  double worst = 0;
  for (int config = 0; config < 5; ++config) {
    const std::size_t n = 15 + rng.below(10), k = 2 + rng.below(4), d = 1 + rng.below(4);
    std::vector<double> z;
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) z.push_back(rng.normal(0, 1));
      y.push_back(i < k ? i : rng.below(k));
    }
    const MlrObjective obj(z, y, k, d, rng.uniform());
    std::vector<double> p(obj.parameter_count());
    for (auto& v : p) v = rng.normal(0, 1);
    const auto g = obj.gradient(p);
    double diff = 0, scale = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto up = p, down = p;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      const double fd = (obj.value(up) - obj.value(down)) / 2e-5;
      diff += (g[i] - fd) * (g[i] - fd);
      scale += g[i] * g[i];
    }
    worst = std::max(worst, std::sqrt(diff / scale));
  }
  o.require(worst < 1e-5, "gradient check");

  // Two points, lambda = 1, against an exhaustive grid over the free pair.
  const MlrModel m = train_mlr({{-1.0}, {1.0}}, std::vector<CefrLabel>{CefrLabel::A1, CefrLabel::A2}, 1.0);
  double best = std::numeric_limits<double>::infinity(), bw = 0, bb = 0;
  for (int i = -2000; i <= 2000; ++i)
    for (int j = -2000; j <= 2000; ++j) {
      const double w = i * 1e-3, b = j * 1e-3;
      const double v = std::log1p(std::exp(w - b)) + std::log1p(std::exp(w + b)) + w * w;
      if (v < best) best = v, bw = w, bb = b;
    }
  const double grid_gap =
      std::max(std::abs(m.predict_proba(std::vector<double>{-1.0})[0] - 1 / (1 + std::exp(bw - bb))),
               std::abs(m.predict_proba(std::vector<double>{1.0})[0] - 1 / (1 + std::exp(-bw - bb))));
  o.require(grid_gap < 1e-3, "grid-search oracle");

  FeatureMatrix x;
  std::vector<CefrLabel> labels;
  Rng data(5);
  for (std::size_t k = 0; k < 3; ++k)
    for (int i = 0; i < 40; ++i) {
      x.push_back({data.normal(k, 1.2), data.normal(2.0 * k, 1.2), data.normal(0, 1)});
      labels.push_back(kClassLevels[k]);
    }
  double previous = std::numeric_limits<double>::infinity();
  std::ostringstream norms;
  bool monotone = true;
  for (double lambda : {1e-8, 1e-2, 1.0, 100.0}) {
    const MlrModel r = train_mlr(x, labels, lambda);
    double s = 0;
    for (std::size_t c = 0; c < r.classes(); ++c)
      for (std::size_t j = 0; j < r.dimension(); ++j) s += r.weight(c, j) * r.weight(c, j);
    monotone = monotone && std::sqrt(s) <= previous;
    previous = std::sqrt(s);
    norms << ' ' << std::setprecision(4) << previous;
  }
  o.require(monotone, "ridge monotonicity");
  o.detail << "max gradient rel. error " << std::setprecision(2) << std::scientific << worst << std::defaultfloat
           << "; grid gap " << grid_gap << "; weight norms" << norms.str();
}

struct CvRun {
  CvResult result;
  std::string artifacts;
  double majority = 0;
};

CvRun synthetic_cv(LevelMode mode) {
  const GeneratedBundle bundle = generate_corpus(GenConfig{});
  const Corpus corpus = parse_corpus_string(bundle.corpus);
  std::istringstream kin(bundle.kelly), sin(bundle.senses), cin(bundle.category_map);
  const KellyList kelly = load_kelly(kin);
  const SenseLexicon senses = load_senses(sin);
  const CategoryMap map = load_category_map(cin);
  const ExtractionContext base{kelly, senses, map, CefrLabel::B1, mode};

  FeatureMatrix x;
  std::vector<CefrLabel> y;
  std::vector<std::string> ids;
  for (const auto& d : corpus.documents) {
    const ExtractionContext ctx = mode == LevelMode::ZeroOut ? base : base.with_reference(d.level);
    x.push_back(select_feature_group(extract_document_features(d, ctx), FeatureGroup::All));
    y.push_back(d.level);
    ids.push_back(d.id);
  }
  const FoldPlan plan = stratified_folds(y, 10, kDefaultSeed);
  ModelSpec spec;
  spec.feature_names = group_feature_names(FeatureGroup::All);
  CvRun run;
  run.result = cross_validate(x, y, spec, plan);
  std::ostringstream out;
  write_metrics_tsv(out, run.result.report);
  write_confusion_csv(out, run.result.matrix);
  write_predictions_tsv(out, ids, run.result);
  run.artifacts = out.str();
  spec.learner = Learner::Majority;
  run.majority = cross_validate(x, y, spec, plan).report.accuracy;
  return run;
}

void end_to_end(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const CvRun gold = synthetic_cv(LevelMode::UseReference);
  const CvRun again = synthetic_cv(LevelMode::UseReference);
  const CvRun zero = synthetic_cv(LevelMode::ZeroOut);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const CvRun* r : {&gold, &zero}) {
    const auto& rep = r->result.report;
    o.require(rep.n >= 500, "at least 100 documents per level");
    o.require(rep.accuracy >= 0.85, "accuracy >= 0.85");
    o.require(rep.adjacent_accuracy >= 0.95, "adjacent accuracy >= 0.95");
    o.require(rep.accuracy > r->majority, "above majority");
  }
  o.require(gold.artifacts == again.artifacts, "byte-identical rerun");
  o.require(seconds < 60, "runtime < 60 s");
  o.detail << std::fixed << std::setprecision(4) << gold.result.report.n << " docs; gold reference acc "
           << gold.result.report.accuracy << " adj " << gold.result.report.adjacent_accuracy << "; zero-out acc "
           << zero.result.report.accuracy << " adj " << zero.result.report.adjacent_accuracy << "; majority "
           << gold.majority << "; rerun identical " << (gold.artifacts == again.artifacts ? "yes" : "no") << "; "
           << std::setprecision(1) << seconds << " s for three runs";
}

void golden_vector(Outcome& o) {
  const KellyList kelly = fixtures::kelly(golden::kCatKelly);
  const SenseLexicon senses = fixtures::senses(golden::kCatSenses);
  const CategoryMap map = fixtures::category_map();
  const ExtractionContext ctx{kelly, senses, map, CefrLabel::A1};
  const Sentence s = fixtures::sentence(golden::kCatSentence);
  const FeatureVector v = extract_sentence_features(s, ctx);
  double worst = 0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) worst = std::max(worst, std::abs(v.values[i] - golden::kCatExpected[i]));
  o.require(worst <= 1e-9, "golden vector");

  // Document of generated sentences against a brute-force mean.
  GenConfig cfg;
  cfg.docs_per_level = {0, 0, 1, 0, 0};
  cfg.sentences_per_level.fill(0);
  const GeneratedBundle b = generate_corpus(cfg);
  const Corpus c = parse_corpus_string(b.corpus);
  std::istringstream kin(b.kelly), sin(b.senses), cin(b.category_map);
  const KellyList gk = load_kelly(kin);
  const SenseLexicon gs = load_senses(sin);
  const CategoryMap gm = load_category_map(cin);
  const ExtractionContext gctx{gk, gs, gm};
  const Document& d = c.documents.at(0);
  const FeatureVector doc = extract_document_features(d, gctx);
  bool exact = true;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    double sum = 0;
    for (const auto& sent : d.sentences) sum += extract_sentence_features(sent, gctx).values[i];
    exact = exact && doc.values[i] == sum / static_cast<double>(d.sentences.size());
  }
  o.require(exact, "document mean");
  o.detail << "max deviation " << worst << "; document of " << d.sentences.size() << " sentences equals the mean "
           << (exact ? "exactly" : "NOT exactly");
}

void serialization(Outcome& o) {
  FeatureMatrix x;
  std::vector<CefrLabel> y;
  Rng rng(8);
  for (std::size_t k = 0; k < 5; ++k)
    for (int i = 0; i < 20; ++i) {
      x.push_back({rng.normal(k, 1), rng.normal(-1.0 * k, 2), rng.normal(0, 1), rng.normal(k * 0.5, 1)});
      y.push_back(kClassLevels[k]);
    }
  const MlrModel m = train_mlr(x, y, 1e-2, {}, {"f01_sentence_length", "f02_avg_token_length", "f05_lix", "f16_avg_kelly_log_freq"});
  std::ostringstream out;
  save_model(out, m);
  std::istringstream in(out.str());
  const MlrModel back = std::get<MlrModel>(load_model(in));
  std::size_t identical = 0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> v = {rng.normal(2, 3), rng.normal(-2, 3), rng.normal(0, 3), rng.normal(1, 3)};
    identical += back.predict_proba(v) == m.predict_proba(v);
  }
  o.require(identical == 100, "bit-identical predictions");
  o.detail << identical << "/100 probability vectors bit-identical";
}

void collapse(Outcome& o) {
  const BinaryCollapse b = collapse_binary(sentence_table());
  o.require(b.low_low == 1617 && b.low_high == 50 && b.high_low == 120 && b.high_high == 87, "2x2 counts");
  o.require(near(b.accuracy, 0.909, 0.0005), "accuracy 0.909");
  o.detail << '(' << b.low_low << ", " << b.low_high << ", " << b.high_low << ", " << b.high_high << ") accuracy "
           << std::fixed << std::setprecision(4) << b.accuracy;
}

void rmse_fixtures(Outcome& o) {
  const std::vector<std::size_t> gold = {0};
  const double perfect = rmse_prob(std::vector<std::vector<double>>{{1, 0, 0, 0, 0}}, gold);
  const double uniform5 = rmse_prob(std::vector<std::vector<double>>{{0.2, 0.2, 0.2, 0.2, 0.2}}, gold);
  const double uniform2 = rmse_prob(std::vector<std::vector<double>>{{0.5, 0.5}}, gold);
  o.require(perfect == 0.0, "perfect 0");
  o.require(uniform5 == 0.4, "uniform K=5 0.4");
  o.require(uniform2 == 0.5, "uniform K=2 0.5");
  o.detail << std::setprecision(17) << "perfect " << perfect << ", uniform K=5 " << uniform5 << ", uniform K=2 "
           << uniform2;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria = {
      {1, metric_fixtures}, {2, majority_baselines}, {3, lix_suite},   {4, optimization}, {5, end_to_end},
      {6, golden_vector},   {7, serialization},      {8, collapse},    {9, rmse_fixtures},
  };
  int failures = 0;
  for (const auto& [number, check] : criteria) {
    Outcome o;
    try {
      check(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::cout << "criterion " << number << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail.str() << std::endl;
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
