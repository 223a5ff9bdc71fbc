#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "cefrlab/cefr.hpp"
#include "cefrlab/corpus.hpp"
#include "cefrlab/datagen.hpp"
#include "cefrlab/eval.hpp"
#include "cefrlab/features.hpp"
#include "cefrlab/lexicon.hpp"
#include "cefrlab/model.hpp"
#include "json.hpp"

#ifndef CEFRLAB_DEFAULT_CATMAP
#define CEFRLAB_DEFAULT_CATMAP "data/suc.catmap"
#endif

namespace cefrlab {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string corpus, kelly, senses, catmap, model, out;
  std::string group = "All";
  std::string level_mode = "use-reference";
  std::string reference_level = "B1";
  std::string unit = "text";
  std::string learner = "mlr";
  double ridge = kDefaultRidge;
  std::size_t k = 10;
  std::uint64_t seed = kDefaultSeed;
  // gen
  std::size_t docs_per_level = 100;
  std::size_t sentences_per_level = 100;
  std::size_t lexicon_size = 600;
  double mixed_prob = 0.0;
};

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Single place every report stream comes from: the --out file, or `out`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error("cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

struct Resources {
  KellyList kelly;
  SenseLexicon senses;
  CategoryMap map;
};

std::string resolve_catmap(const Options& o) {
  if (!o.catmap.empty()) return o.catmap;
  if (const char* env = std::getenv("CEFRLAB_CATMAP"); env && *env) return env;
  return CEFRLAB_DEFAULT_CATMAP;
}

Resources load_resources(const Options& o, std::ostream& err) {
  if (o.kelly.empty()) throw UsageError("--kelly is required");
  if (o.senses.empty()) throw UsageError("--senses is required");
  Resources r{load_kelly_file(o.kelly), load_senses_file(o.senses), load_category_map_file(resolve_catmap(o))};
  for (const auto& w : r.kelly.warnings()) err << "warning: " << o.kelly << ": " << w << '\n';
  for (const auto& w : r.senses.warnings()) err << "warning: " << o.senses << ": " << w << '\n';
  for (const auto& w : r.map.warnings) err << "warning: category map: " << w << '\n';
  return r;
}

Corpus load_checked_corpus(const std::string& path) {
  if (path.empty()) throw UsageError("--corpus is required");
  return load_corpus(path);
}

FeatureGroup group_of(const Options& o) {
  auto g = parse_feature_group(o.group);
  if (!g) throw UsageError("unknown feature group '" + o.group + "'");
  return *g;
}

LevelMode mode_of(const Options& o) {
  auto m = parse_level_mode(o.level_mode);
  if (!m) throw UsageError("unknown level mode '" + o.level_mode + "'");
  return *m;
}

CefrLabel reference_of(const Options& o) {
  auto l = parse_level(o.reference_level);
  if (!l) throw UsageError("unknown reference level '" + o.reference_level + "'");
  return *l;
}

Learner learner_of(const Options& o) {
  auto l = parse_learner(o.learner);
  if (!l) throw UsageError("unknown learner '" + o.learner + "'");
  return *l;
}

bool sentence_unit(const Options& o) {
  if (o.unit == "text") return false;
  if (o.unit == "sentence") return true;
  throw UsageError("unknown unit '" + o.unit + "' (expected text or sentence)");
}

// A labeled unit of evaluation: a document or a standalone sentence.
struct Unit {
  std::string id;
  CefrLabel level;
  const Document* doc = nullptr;
  const Sentence* sentence = nullptr;
};

std::vector<Unit> units_of(const Corpus& c, bool sentences) {
  std::vector<Unit> units;
  if (sentences) {
    for (const auto& s : c.standalone_sentences) units.push_back({s.sentence.id, s.level, nullptr, &s.sentence});
  } else {
    for (const auto& d : c.documents) units.push_back({d.id, d.level, &d, nullptr});
  }
  return units;
}

FeatureVector extract_unit(const Unit& u, const ExtractionContext& ctx) {
  return u.doc ? extract_document_features(*u.doc, ctx) : extract_sentence_features(*u.sentence, ctx);
}

// Reference handling for features that compare against a level: training
// sees the gold level, prediction sees the configured reference.
ExtractionContext training_context(const ExtractionContext& base, const Unit& u) {
  return base.level_mode == LevelMode::ZeroOut ? base : base.with_reference(u.level);
}

FeatureMatrix matrix_of(const std::vector<FeatureVector>& vectors, FeatureGroup group) {
  FeatureMatrix x;
  x.reserve(vectors.size());
  for (const auto& v : vectors) x.push_back(select_feature_group(v, group));
  return x;
}

std::vector<CefrLabel> labels_of(const std::vector<Unit>& units) {
  std::vector<CefrLabel> y;
  for (const auto& u : units) y.push_back(u.level);
  return y;
}

std::string invocation_of(const std::vector<std::string>& args) {
  std::string s = "cefrlab";
  for (const auto& a : args) s += ' ' + a;
  return s;
}

void header(std::ostream& out, const std::string& invocation) { out << "# invocation = " << invocation << '\n'; }

// --- subcommands ---------------------------------------------------------

int cmd_validate(const Options& o, std::ostream& out, const std::string& inv) {
  const Corpus c = load_checked_corpus(o.corpus);
  const auto issues = validate_corpus(c);
  Sink sink(o.out, out);
  header(sink.get(), inv);
  std::size_t errors = 0;
  for (const auto& i : issues) {
    sink.get() << format_issue(i) << '\n';
    if (i.severity == Severity::Error) ++errors;
  }
  sink.get() << "# " << errors << " error(s), " << issues.size() - errors << " warning(s)\n";
  return is_clean(issues) ? kExitOk : kExitValidation;
}

int cmd_stats(const Options& o, std::ostream& out, const std::string& inv) {
  const Corpus c = load_checked_corpus(o.corpus);
  Sink sink(o.out, out);
  header(sink.get(), inv);
  write_stats_tsv(sink.get(), corpus_stats(c));
  return kExitOk;
}

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err, const std::string& inv,
                bool reference_given) {
  const Corpus c = load_checked_corpus(o.corpus);
  const Resources r = load_resources(o, err);
  const ExtractionContext base{r.kelly, r.senses, r.map, reference_of(o), mode_of(o)};
  const auto units = units_of(c, sentence_unit(o));
  Sink sink(o.out, out);
  auto& s = sink.get();
  header(s, inv);
  s << "unit_id\tlevel";
  for (auto name : feature_names()) s << '\t' << name;
  s << '\n';
  for (const auto& u : units) {
    // Without an explicit --reference-level the gold level is the reference,
    // as during training.
    const ExtractionContext ctx = reference_given ? base : training_context(base, u);
    const FeatureVector v = extract_unit(u, ctx);
    s << u.id << '\t' << to_string(u.level);
    for (double d : v.values) s << '\t' << format_double(d);
    s << '\n';
  }
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err, const std::string& inv) {
  if (o.model.empty()) throw UsageError("--model is required");
  const Corpus c = load_checked_corpus(o.corpus);
  const Resources r = load_resources(o, err);
  const FeatureGroup group = group_of(o);
  const Learner learner = learner_of(o);
  const ExtractionContext base{r.kelly, r.senses, r.map, reference_of(o), mode_of(o)};
  const auto units = units_of(c, sentence_unit(o));
  if (units.empty()) throw Error("no " + o.unit + " units in " + o.corpus);

  std::vector<FeatureVector> vectors;
  for (const auto& u : units) vectors.push_back(extract_unit(u, training_context(base, u)));
  const FeatureMatrix x = matrix_of(vectors, group);
  const auto y = labels_of(units);
  auto names = group_feature_names(group);

  AnyModel model;
  switch (learner) {
    case Learner::Mlr: {
      TrainOptions opts;
      MlrModel m = train_mlr(x, y, o.ridge, opts, names);
      out << "iterations\t" << m.info.iterations << "\nconverged\t" << (m.info.converged ? "yes" : "no")
          << "\nfinal_nll\t" << format_double(m.info.final_nll) << '\n';
      for (const auto& w : m.info.warnings) err << "warning: " << w << '\n';
      model = std::move(m);
      break;
    }
    case Learner::LinReg:
      model = train_linreg(x, y, o.ridge, names);
      break;
    case Learner::Majority:
      model = train_majority(y, names);
      break;
  }
  out << "units\t" << units.size() << "\nfeatures\t" << names.size() << "\nmodel\t" << o.model << '\n';
  save_model_file(o.model, model, inv);
  return kExitOk;
}

void write_regression(std::ostream& s, const std::vector<Unit>& units, const RegressionCvResult& r) {
  s << "pearson_r\t" << std::fixed << std::setprecision(6) << r.correlation.r << "\nrmse\t" << r.rmse << '\n';
  s << "unit_id\tgold\tprediction\n";
  for (std::size_t i = 0; i < units.size(); ++i)
    s << units[i].id << '\t' << to_string(units[i].level) << '\t' << r.predictions[i] << '\n';
  s.unsetf(std::ios::floatfield);
}

// Held-out units are extracted like training units (gold reference) unless a
// reference level is given, which reproduces prediction-time extraction.
int cmd_cv(const Options& o, std::ostream& out, std::ostream& err, const std::string& inv, bool reference_given) {
  const Corpus c = load_checked_corpus(o.corpus);
  const Resources r = load_resources(o, err);
  const FeatureGroup group = group_of(o);
  const Learner learner = learner_of(o);
  const ExtractionContext base{r.kelly, r.senses, r.map, reference_of(o), mode_of(o)};
  const auto units = units_of(c, sentence_unit(o));
  if (units.empty()) throw Error("no " + o.unit + " units in " + o.corpus);

  std::vector<FeatureVector> train_vectors, test_vectors;
  for (const auto& u : units) {
    train_vectors.push_back(extract_unit(u, training_context(base, u)));
    test_vectors.push_back(extract_unit(u, reference_given ? base : training_context(base, u)));
  }
  const FeatureMatrix xtr = matrix_of(train_vectors, group);
  const FeatureMatrix xte = matrix_of(test_vectors, group);
  const auto y = labels_of(units);
  const FoldPlan plan = stratified_folds(y, o.k, o.seed);

  if (!o.out.empty()) fs::create_directories(o.out);
  auto path = [&](const char* name) { return o.out.empty() ? std::string() : (fs::path(o.out) / name).string(); };

  if (learner == Learner::LinReg) {
    if (xtr != xte)
      err << "warning: regression cv trains and tests on the prediction-time features\n";
    const auto res = cross_validate_regression(xte, y, o.ridge, plan);
    for (const auto& w : res.warnings) err << "warning: " << w << '\n';
    Sink sink(path("regression.tsv"), out);
    header(sink.get(), inv);
    write_regression(sink.get(), units, res);
    return kExitOk;
  }

  ModelSpec spec;
  spec.learner = learner;
  spec.ridge = o.ridge;
  spec.feature_names = group_feature_names(group);
  const CvResult res = cross_validate(xtr, xte, y, spec, plan);
  for (const auto& w : res.warnings) err << "warning: " << w << '\n';

  {
    Sink sink(path("metrics.tsv"), out);
    header(sink.get(), inv);
    sink.get() << "features\t" << spec.feature_names.size() << '\n';
    write_metrics_tsv(sink.get(), res.report);
  }
  if (!o.out.empty()) {
    Sink cm(path("confusion.csv"), out);
    header(cm.get(), inv);
    write_confusion_csv(cm.get(), res.matrix);
    Sink pred(path("predictions.tsv"), out);
    header(pred.get(), inv);
    std::vector<std::string> ids;
    for (const auto& u : units) ids.push_back(u.id);
    write_predictions_tsv(pred.get(), ids, res);
  }
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err, const std::string& inv) {
  if (o.model.empty()) throw UsageError("--model is required");
  const AnyModel model = load_model_file(o.model);
  const Predictor predictor(model);
  const Corpus c = load_checked_corpus(o.corpus);
  const Resources r = load_resources(o, err);
  const ExtractionContext ctx{r.kelly, r.senses, r.map, reference_of(o), mode_of(o)};
  const auto units = units_of(c, sentence_unit(o));

  Sink sink(o.out, out);
  auto& s = sink.get();
  header(s, inv);
  s << "unit_id\tgold\tpredicted";
  for (auto l : predictor.labels()) s << "\tp_" << to_string(l);
  s << '\n';
  for (const auto& u : units) {
    const FeatureVector v = extract_unit(u, ctx);
    const auto p = predictor.probabilities(v);
    s << u.id << '\t' << to_string(u.level) << '\t' << to_string(predictor.labels()[argmax_lowest(p)]);
    for (double d : p) s << '\t' << format_double(d);
    s << '\n';
  }
  return kExitOk;
}

int cmd_distribution(const Options& o, std::ostream& out, std::ostream& err, const std::string& inv) {
  if (o.model.empty()) throw UsageError("--model is required");
  const AnyModel model = load_model_file(o.model);
  const Predictor predictor(model);
  const Corpus c = load_checked_corpus(o.corpus);
  const Resources r = load_resources(o, err);
  const ExtractionContext ctx{r.kelly, r.senses, r.map, reference_of(o), mode_of(o)};
  const auto table = sentence_distribution(predictor, c.documents, ctx);
  Sink sink(o.out, out);
  header(sink.get(), inv);
  write_distribution_csv(sink.get(), table);
  return kExitOk;
}

int cmd_gen(const Options& o, std::ostream& out, const std::string& inv) {
  if (o.out.empty()) throw UsageError("--out is required");
  GenConfig cfg;
  cfg.seed = o.seed;
  cfg.docs_per_level.fill(o.docs_per_level);
  cfg.sentences_per_level.fill(o.sentences_per_level);
  cfg.lexicon_size = o.lexicon_size;
  cfg.mixed_sentence_prob = o.mixed_prob;
  GeneratedBundle b = generate_corpus(cfg);
  const std::string line = "# invocation = " + inv + "\n";
  b.corpus = line + b.corpus;
  b.kelly = line + b.kelly;
  b.senses = line + b.senses;
  b.category_map = line + b.category_map;
  auto manifest = nlohmann::ordered_json::parse(b.manifest);
  manifest["invocation"] = inv;
  b.manifest = manifest.dump(2) + "\n";
  write_bundle(o.out, b);
  out << "wrote " << o.out << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"CEFR level classification toolkit", "cefrlab"};
  app.require_subcommand(1);
  Options o;

  auto corpus_opt = [&](CLI::App* c) { c->add_option("--corpus", o.corpus, "Annotated corpus file"); };
  auto resource_opts = [&](CLI::App* c) {
    c->add_option("--kelly", o.kelly, "Kelly list TSV");
    c->add_option("--senses", o.senses, "Sense lexicon TSV");
    c->add_option("--catmap", o.catmap, "Category map (default: $CEFRLAB_CATMAP, then the bundled SUC map)");
  };
  auto level_opts = [&](CLI::App* c) {
    c->add_option("--level-mode", o.level_mode, "use-reference or zero-out");
    c->add_option("--reference-level", o.reference_level, "Reference level for prediction (A1..C1)");
  };
  auto unit_opt = [&](CLI::App* c) { c->add_option("--unit", o.unit, "text (documents) or sentence"); };
  auto out_opt = [&](CLI::App* c, const char* what) { c->add_option("--out", o.out, what); };

  auto* validate = app.add_subcommand("validate", "Check a corpus for structural problems");
  corpus_opt(validate);
  out_opt(validate, "Issue report path");

  auto* stats = app.add_subcommand("stats", "Per-level text and sentence counts");
  corpus_opt(stats);
  out_opt(stats, "Stats TSV path");

  auto* extract = app.add_subcommand("extract", "Write the feature table");
  corpus_opt(extract);
  resource_opts(extract);
  level_opts(extract);
  unit_opt(extract);
  out_opt(extract, "Feature TSV path");

  auto* train = app.add_subcommand("train", "Train and save a model");
  corpus_opt(train);
  resource_opts(train);
  level_opts(train);
  unit_opt(train);
  train->add_option("--model", o.model, "Output model path");
  train->add_option("--group", o.group, "All, Lex, Len, Morph, Synt or Sem");
  train->add_option("--ridge", o.ridge, "Ridge strength");
  train->add_option("--learner", o.learner, "mlr, linreg or majority");

  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  corpus_opt(cv);
  resource_opts(cv);
  level_opts(cv);
  unit_opt(cv);
  cv->add_option("--group", o.group, "All, Lex, Len, Morph, Synt or Sem");
  cv->add_option("--ridge", o.ridge, "Ridge strength");
  cv->add_option("--learner", o.learner, "mlr, linreg or majority");
  cv->add_option("--k", o.k, "Number of folds");
  cv->add_option("--seed", o.seed, "Fold assignment seed");
  out_opt(cv, "Report directory");

  auto* predict = app.add_subcommand("predict", "Classify every unit of a corpus");
  predict->add_option("corpus,--corpus", o.corpus, "Annotated corpus file");
  resource_opts(predict);
  level_opts(predict);
  unit_opt(predict);
  predict->add_option("--model", o.model, "Model file");
  out_opt(predict, "Prediction TSV path");

  auto* distribution = app.add_subcommand("distribution", "Sentence-level predictions per document level");
  corpus_opt(distribution);
  resource_opts(distribution);
  level_opts(distribution);
  distribution->add_option("--model", o.model, "Sentence-level model file");
  out_opt(distribution, "Distribution CSV path");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus bundle");
  gen->add_option("--seed", o.seed, "Generator seed");
  gen->add_option("--docs-per-level", o.docs_per_level, "Documents per level");
  gen->add_option("--sentences-per-level", o.sentences_per_level, "Standalone sentences per level");
  gen->add_option("--lexicon-size", o.lexicon_size, "Content lexicon size");
  gen->add_option("--mixed-prob", o.mixed_prob, "Share of document sentences drawn at another level");
  out_opt(gen, "Bundle directory");

  std::vector<std::string> argv_store{"cefrlab"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const std::string inv = invocation_of(args);
  const bool reference_given = extract->count("--reference-level") > 0 || cv->count("--reference-level") > 0;
  try {
    if (*validate) return cmd_validate(o, out, inv);
    if (*stats) return cmd_stats(o, out, inv);
    if (*extract) return cmd_extract(o, out, err, inv, reference_given);
    if (*train) return cmd_train(o, out, err, inv);
    if (*cv) return cmd_cv(o, out, err, inv, reference_given);
    if (*predict) return cmd_predict(o, out, err, inv);
    if (*distribution) return cmd_distribution(o, out, err, inv);
    if (*gen) return cmd_gen(o, out, inv);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cefrlab
