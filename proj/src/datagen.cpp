#include "cefrlab/datagen.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cefrlab/corpus.hpp"
#include "cefrlab/rng.hpp"
#include "json.hpp"

namespace cefrlab {

namespace {

struct Lexeme {
  std::string lemma;
  std::string pos;
  int level = 0;  // 0 = A1 .. 5 = C2
  bool neuter = false;
  double log_freq = 0.0;
  int senses = 1;
  bool in_kelly = true;
};

struct ClosedWord {
  const char* form;
  const char* lemma;
  const char* pos;
  const char* msd;
  int level;
};

// Function words shared by every level.
constexpr ClosedWord kClosed[] = {
    {"jag", "jag", "PN", "UTR|SIN|DEF|SUB", 0},  {"du", "du", "PN", "UTR|SIN|DEF|SUB", 0},
    {"han", "han", "PN", "UTR|SIN|DEF|SUB", 0},  {"hon", "hon", "PN", "UTR|SIN|DEF|SUB", 0},
    {"vi", "vi", "PN", "UTR|PLU|DEF|SUB", 0},    {"de", "de", "PN", "UTR|PLU|DEF|SUB", 0},
    {"den", "den", "PN", "UTR|SIN|DEF|SUB", 0},  {"det", "det", "PN", "NEU|SIN|DEF|SUB", 0},
    {"i", "i", "PP", "", 0},                     {"på", "på", "PP", "", 0},
    {"till", "till", "PP", "", 0},               {"med", "med", "PP", "", 0},
    {"av", "av", "PP", "", 0},                   {"för", "för", "PP", "", 0},
    {"från", "från", "PP", "", 1},               {"under", "under", "PP", "", 1},
    {"och", "och", "KN", "", 0},                 {"men", "men", "KN", "", 0},
    {"eller", "eller", "KN", "", 1},             {"att", "att", "SN", "", 0},
    {"när", "när", "SN", "", 0},                 {"eftersom", "eftersom", "SN", "", 1},
    {"medan", "medan", "SN", "", 2},             {"fast", "fast", "SN", "", 2},
    {"som", "som", "HP", "-|-|-", 0},            {"där", "där", "HA", "", 1},
    {"inte", "inte", "AB", "", 0},               {"också", "också", "AB", "", 0},
    {"upp", "upp", "PL", "", 1},                 {"ut", "ut", "PL", "", 1},
    {".", ".", "MAD", "", 0},                    {",", ",", "MID", "", 0},
};

constexpr ClosedWord kDeterminers[] = {
    {"en", "en", "DT", "UTR|SIN|IND", 0},
    {"ett", "en", "DT", "NEU|SIN|IND", 0},
};

constexpr ClosedWord kModals[] = {
    {"kan", "kunna", "VB", "PRS|AKT", 0},
    {"vill", "vilja", "VB", "PRS|AKT", 0},
    {"ska", "skola", "VB", "PRS|AKT", 1},
    {"måste", "måste", "VB", "PRS|AKT", 1},
};

constexpr ClosedWord kHave = {"har", "ha", "VB", "PRS|AKT", 0};
constexpr ClosedWord kBe = {"är", "vara", "VB", "PRS|AKT", 0};

const char* const kPronounForms[] = {"jag", "du", "han", "hon", "vi", "de", "den", "det"};
const char* const kPrepositions[] = {"i", "på", "till", "med", "av", "för", "från", "under"};

std::vector<std::string> split_msd(std::string_view msd) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < msd.size()) {
    auto bar = msd.find('|', start);
    if (bar == std::string_view::npos) bar = msd.size();
    out.emplace_back(msd.substr(start, bar - start));
    start = bar + 1;
  }
  return out;
}

// Token under construction; head is a 0-based position or -1 for the root.
struct GenToken {
  std::string form, lemma, pos;
  std::vector<std::string> msd;
  int head = -1;
  std::string deprel;
};

class Generator {
 public:
  explicit Generator(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) { build_lexicon(); }

  Corpus corpus() {
    Corpus c;
    for (std::size_t lvl = 0; lvl < 5; ++lvl) {
      for (std::size_t d = 0; d < cfg_.docs_per_level[lvl]; ++d) {
        Document doc;
        doc.id = "doc_" + std::string(to_string(kClassLevels[lvl])) + "_" + std::to_string(d + 1);
        doc.level = kClassLevels[lvl];
        const double mean = cfg_.sentences_per_doc_mean[lvl];
        const long n = std::max(1L, std::lround(rng_.normal(mean, 0.25 * mean)));
        for (long s = 0; s < n; ++s) {
          std::size_t sent_level = lvl;
          if (cfg_.mixed_sentence_prob > 0.0 && rng_.bernoulli(cfg_.mixed_sentence_prob)) {
            sent_level = static_cast<std::size_t>(rng_.below(4));
            if (sent_level >= lvl) ++sent_level;
          }
          Sentence sent = sentence(sent_level);
          sent.id = doc.id + "." + std::to_string(s + 1);
          doc.sentences.push_back(std::move(sent));
        }
        c.documents.push_back(std::move(doc));
      }
    }
    for (std::size_t lvl = 0; lvl < 5; ++lvl) {
      for (std::size_t i = 0; i < cfg_.sentences_per_level[lvl]; ++i) {
        Sentence sent = sentence(lvl);
        sent.id = "sent_" + std::string(to_string(kClassLevels[lvl])) + "_" + std::to_string(i + 1);
        c.standalone_sentences.push_back({std::move(sent), kClassLevels[lvl]});
      }
    }
    return c;
  }

  KellyList kelly() const {
    KellyList list;
    auto closed = [&](const ClosedWord& w) {
      list.add({w.lemma, w.pos, kLexiconLevels[static_cast<std::size_t>(w.level)], 7.0 - 0.5 * w.level});
    };
    for (const auto& w : kClosed) closed(w);
    closed(kDeterminers[0]);
    for (const auto& w : kModals) closed(w);
    closed(kHave);
    closed(kBe);
    for (const auto& lx : lexicon_)
      if (lx.in_kelly)
        list.add({lx.lemma, lx.pos, kLexiconLevels[static_cast<std::size_t>(lx.level)], lx.log_freq});
    return list;
  }

  SenseLexicon senses() const {
    SenseLexicon lex;
    for (const auto& w : kClosed)
      if (std::string_view(w.pos) != "MAD" && std::string_view(w.pos) != "MID") lex.add(w.lemma, w.pos, 2);
    for (const auto& w : kModals) lex.add(w.lemma, w.pos, 3);
    lex.add(kHave.lemma, kHave.pos, 4);
    lex.add(kBe.lemma, kBe.pos, 4);
    for (const auto& lx : lexicon_) lex.add(lx.lemma, lx.pos, lx.senses);
    return lex;
  }

 private:
  void build_lexicon() {
    std::set<std::string> used;
    for (const auto& w : kClosed) used.insert(w.lemma);
    for (const auto& w : kModals) used.insert(w.lemma);
    used.insert("ha");
    used.insert("vara");
    used.insert("en");
    lexicon_.reserve(cfg_.lexicon_size);
    for (std::size_t i = 0; i < cfg_.lexicon_size; ++i) {
      Lexeme lx;
      const std::size_t r = i % 20;
      lx.pos = r < 8 ? "NN" : r < 13 ? "VB" : r < 17 ? "JJ" : "AB";
      lx.level = static_cast<int>((i / 20) % 6);
      do {
        lx.lemma = make_word(lx.level);
        if (lx.pos == "VB") lx.lemma += 'a';
        if (lx.pos == "AB") lx.lemma += "igt";
      } while (!used.insert(lx.lemma).second);
      lx.neuter = rng_.bernoulli(0.3);
      lx.log_freq = 6.0 - 1.0 * lx.level + rng_.normal(0.0, 0.4);
      lx.senses = 1 + static_cast<int>(rng_.below(static_cast<std::uint64_t>(4 - lx.level / 2)));
      lx.in_kelly = !rng_.bernoulli(cfg_.kelly_dropout);
      pools_[pos_slot(lx.pos)][static_cast<std::size_t>(lx.level)].push_back(lexicon_.size());
      lexicon_.push_back(std::move(lx));
    }
  }

  static std::size_t pos_slot(std::string_view pos) {
    if (pos == "NN") return 0;
    if (pos == "VB") return 1;
    if (pos == "JJ") return 2;
    return 3;
  }

  std::string make_word(int level) {
    static const std::vector<std::string> consonants = {"b", "d", "f", "g", "h", "j", "k", "l", "m",
                                                        "n", "p", "r", "s", "t", "v", "sk", "st", "tr"};
    static const std::vector<std::string> vowels = {"a", "e", "i", "o", "u", "y", "å", "ä", "ö"};
    const int syllables = 1 + level / 2 + static_cast<int>(rng_.below(2));
    std::string w;
    for (int s = 0; s < syllables; ++s) {
      w += consonants[rng_.below(consonants.size())];
      w += vowels[rng_.below(vowels.size())];
      if (rng_.bernoulli(0.4)) w += consonants[rng_.below(12)];
    }
    return w;
  }

  const Lexeme& draw(std::string_view pos, std::size_t text_level) {
    const auto& pool = pools_[pos_slot(pos)];
    std::vector<double> weights(6, 0.0);
    for (std::size_t l = 0; l < 6; ++l)
      if (!pool[l].empty()) weights[l] = cfg_.lexeme_level_weights[text_level][l];
    const std::size_t level = rng_.weighted(weights);
    return lexicon_[pool[level][rng_.below(pool[level].size())]];
  }

  int push(GenToken t) {
    toks_.push_back(std::move(t));
    return static_cast<int>(toks_.size()) - 1;
  }

  int push_closed(const ClosedWord& w, int head, std::string deprel) {
    return push({w.form, w.lemma, w.pos, split_msd(w.msd), head, std::move(deprel)});
  }

  const ClosedWord& closed_word(std::string_view form) const {
    for (const auto& w : kClosed)
      if (form == w.form) return w;
    return kClosed[0];
  }

  // Appends a noun phrase; dependents point at the noun, the noun at `head`.
  int noun_phrase(std::size_t lvl, int head, const std::string& deprel) {
    const Lexeme& noun = draw("NN", lvl);
    std::vector<int> deps;
    if (rng_.bernoulli(0.5)) deps.push_back(push_closed(kDeterminers[noun.neuter ? 1 : 0], -1, "DT"));
    if (rng_.bernoulli(0.05 * static_cast<double>(lvl))) {
      const Lexeme& v = draw("VB", lvl);
      const std::string stem = v.lemma.substr(0, v.lemma.size() - 1);
      const bool past = rng_.bernoulli(0.5);
      deps.push_back(push({stem + (past ? "ad" : "ande"), v.lemma, "PC",
                           {past ? "PRF" : "PRS", "UTR", "SIN", "IND", "NOM"}, -1, "AT"}));
    }
    if (rng_.bernoulli(0.15 + 0.1 * static_cast<double>(lvl))) {
      const Lexeme& a = draw("JJ", lvl);
      deps.push_back(push({a.lemma, a.lemma, "JJ", {"POS", "UTR", "SIN", "IND", "NOM"}, -1, "AT"}));
    }
    GenToken n;
    n.pos = "NN";
    const std::string gender = noun.neuter ? "NEU" : "UTR";
    if (rng_.bernoulli(cfg_.long_word_prob[lvl])) {
      const Lexeme& second = draw("NN", lvl);
      n.form = noun.lemma + second.lemma;
      n.lemma = rng_.bernoulli(0.5) ? n.form : std::string();
      n.msd = {second.neuter ? "NEU" : "UTR", "SIN", "IND", "NOM"};
    } else if (rng_.bernoulli(0.4)) {
      n.form = noun.lemma + (noun.neuter ? "et" : "en");
      n.lemma = noun.lemma;
      n.msd = {gender, "SIN", "DEF", "NOM"};
    } else {
      n.form = noun.lemma;
      n.lemma = noun.lemma;
      n.msd = {gender, "SIN", "IND", "NOM"};
    }
    n.head = head;
    n.deprel = deprel;
    const int idx = push(std::move(n));
    for (int d : deps) toks_[static_cast<std::size_t>(d)].head = idx;
    if (rng_.bernoulli(0.04 * static_cast<double>(lvl))) {
      const int prep = push_closed(closed_word(kPrepositions[rng_.below(8)]), idx, "ET");
      noun_phrase(lvl, prep, "PA");
    }
    return idx;
  }

  int subject(std::size_t lvl, int head) {
    if (rng_.bernoulli(0.5)) return push_closed(closed_word(kPronounForms[rng_.below(8)]), head, "SS");
    return noun_phrase(lvl, head, "SS");
  }

  // Finite verb group; returns {finite index, lexical verb index}.
  std::pair<int, int> verb_group(std::size_t lvl, int head, const std::string& deprel) {
    const Lexeme& v = draw("VB", lvl);
    const std::string stem = v.lemma.substr(0, v.lemma.size() - 1);
    const double l = static_cast<double>(lvl);
    const std::vector<double> w = {1.0, 0.2 + 0.2 * l, 0.1 * l, 0.1 + 0.05 * l, 0.06 * l};
    switch (rng_.weighted(w)) {
      case 0: {
        int i = push({stem + "ar", v.lemma, "VB", {"PRS", "AKT"}, head, deprel});
        return {i, i};
      }
      case 1: {
        int i = push({stem + "ade", v.lemma, "VB", {"PRT", "AKT"}, head, deprel});
        return {i, i};
      }
      case 2: {
        int aux = push_closed(kHave, head, deprel);
        int main = push({stem + "at", v.lemma, "VB", {"SUP", "AKT"}, aux, "VG"});
        return {aux, main};
      }
      case 3: {
        int aux = push_closed(kModals[rng_.below(4)], head, deprel);
        int main = push({v.lemma, v.lemma, "VB", {"INF", "AKT"}, aux, "VG"});
        return {aux, main};
      }
      default: {
        int i = push({stem + "as", v.lemma, "VB", {"PRS", "SFO"}, head, deprel});
        return {i, i};
      }
    }
  }

  // Subject-verb-object clause. Returns the finite verb.
  int clause(std::size_t lvl, int head, const std::string& deprel) {
    const int subj = subject(lvl, -1);
    auto [fin, main] = verb_group(lvl, head, deprel);
    toks_[static_cast<std::size_t>(subj)].head = fin;
    if (toks_[static_cast<std::size_t>(main)].msd.back() != "SFO") noun_phrase(lvl, main, "OO");
    return fin;
  }

  int cleft(std::size_t lvl) {
    const int det = push_closed(closed_word("det"), -1, "FS");
    const int be = push_closed(kBe, -1, "ROOT");
    toks_[static_cast<std::size_t>(det)].head = be;
    const int np = noun_phrase(lvl, be, "SP");
    const int som = push_closed(closed_word("som"), -1, "SS");
    auto [fin, main] = verb_group(lvl, np, "EF");
    toks_[static_cast<std::size_t>(som)].head = fin;
    noun_phrase(lvl, main, "OO");
    return be;
  }

  Sentence sentence(std::size_t lvl) {
    toks_.clear();
    const double mean = cfg_.sentence_length_mean[lvl];
    const long target = std::max(3L, std::lround(rng_.normal(mean, 0.2 * mean)));

    int root;
    if (rng_.bernoulli(0.03 * static_cast<double>(lvl))) {
      root = cleft(lvl);
    } else {
      root = clause(lvl, -1, "ROOT");
    }
    while (static_cast<long>(toks_.size()) + 1 < target) {
      const double u = rng_.uniform();
      if (rng_.bernoulli(cfg_.subordinate_prob[lvl])) {
        const int sn = push_closed(closed_word(lvl >= 2 && rng_.bernoulli(0.5) ? "eftersom" : "att"), -1, "UK");
        const int verb = clause(lvl, root, "UA");
        toks_[static_cast<std::size_t>(sn)].head = verb;
      } else if (u < 0.3) {
        const Lexeme& a = draw("AB", lvl);
        push({a.lemma, a.lemma, "AB", {"POS"}, root, "AA"});
      } else if (u < 0.6) {
        const int prep = push_closed(closed_word(kPrepositions[rng_.below(8)]), root, "RA");
        noun_phrase(lvl, prep, "PA");
      } else if (u < 0.75 && lvl >= 1) {
        // noun followed by a relative clause
        const int noun = noun_phrase(lvl, root, "OA");
        const int som = push_closed(closed_word("som"), -1, "SS");
        const int fin = verb_group(lvl, noun, "EF").first;
        toks_[static_cast<std::size_t>(som)].head = fin;
      } else {
        const int kn = push_closed(closed_word(rng_.bernoulli(0.7) ? "och" : "men"), -1, "++");
        const int verb = clause(lvl, root, "CJ");
        toks_[static_cast<std::size_t>(kn)].head = verb;
      }
    }
    push_closed(closed_word("."), root, "IP");
    return finish();
  }

  Sentence finish() {
    Sentence s;
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      const GenToken& g = toks_[i];
      AnnotatedToken t;
      t.index = static_cast<int>(i) + 1;
      t.form = g.form;
      t.lemma = g.lemma;
      t.pos = g.pos;
      t.msd = g.msd;
      t.head = g.head + 1;
      t.deprel = g.deprel;
      s.tokens.push_back(std::move(t));
    }
    return s;
  }

  const GenConfig& cfg_;
  Rng rng_;
  std::vector<Lexeme> lexicon_;
  std::array<std::array<std::vector<std::size_t>, 6>, 4> pools_{};
  std::vector<GenToken> toks_;
};

std::string header_comment(const GenConfig& cfg) {
  return "# generator = cefrlab-datagen\n# rng = " + std::string(Rng::kAlgorithm) +
         "\n# seed = " + std::to_string(cfg.seed) + "\n";
}

}  // namespace

void validate_config(const GenConfig& cfg) {
  if (cfg.lexicon_size == 0) throw Error("generator config: lexicon_size must be > 0");
  if (cfg.lexicon_size < 120)
    throw Error("generator config: lexicon_size must be >= 120 to cover every level and part of speech");
  for (std::size_t l = 0; l < 5; ++l) {
    if (!(cfg.sentences_per_doc_mean[l] > 0.0) || !(cfg.sentence_length_mean[l] > 0.0))
      throw Error("generator config: means must be > 0");
    for (double p : {cfg.long_word_prob[l], cfg.subordinate_prob[l]})
      if (!(p >= 0.0 && p <= 1.0)) throw Error("generator config: probabilities must lie in [0, 1]");
    double row = 0.0;
    for (double w : cfg.lexeme_level_weights[l]) {
      if (!(w >= 0.0)) throw Error("generator config: lexeme weights must be >= 0");
      row += w;
    }
    if (!(row > 0.0)) throw Error("generator config: every level needs a positive lexeme weight");
  }
  for (double p : {cfg.mixed_sentence_prob, cfg.kelly_dropout})
    if (!(p >= 0.0 && p <= 1.0)) throw Error("generator config: probabilities must lie in [0, 1]");
}

CategoryMap generator_category_map() {
  CategoryMap m;
  m.pos.noun = {"NN", "PM"};
  m.pos.verb = {"VB"};
  m.pos.adjective = {"JJ"};
  m.pos.adverb = {"AB"};
  m.pos.pronoun = {"PN", "HP"};
  m.pos.preposition = {"PP"};
  m.pos.particle = {"PL"};
  m.pos.punctuation = {"MAD", "MID", "PAD"};
  m.pos.subjunction = {"SN"};
  m.pos.conjunction = {"KN"};
  m.pos.relative = {"HA", "HD", "HP", "HS"};
  m.pos.participle = {"PC"};
  m.pos.function_word = {"DT", "HA", "HD", "HP", "HS", "IE", "KN", "PL", "PN", "PP", "PS", "SN"};
  m.deprel.pre_modifier = {"AT"};
  m.deprel.post_modifier = {"ET"};
  m.deprel.subordinate = {"UA"};
  m.deprel.relative_clause = {"EF"};
  m.deprel.prep_complement = {"PA"};
  m.msd.neuter = {"NEU"};
  m.msd.preterite = {"PRT"};
  m.msd.present = {"PRS"};
  m.msd.supine = {"SUP"};
  m.msd.past_participle = {"PRF"};
  m.msd.present_participle = {"PRS"};
  m.msd.passive = {"SFO"};
  m.lexemes.modal = {"kunna", "vilja", "skola", "måste"};
  m.lexemes.pronoun_3sg = {"han", "hon", "den", "det"};
  return m;
}

GeneratedBundle generate_corpus(const GenConfig& cfg) {
  validate_config(cfg);
  Generator gen(cfg);
  GeneratedBundle b;
  const std::string header = header_comment(cfg);

  std::ostringstream corpus;
  corpus << header;
  write_corpus(corpus, gen.corpus());
  b.corpus = corpus.str();

  std::ostringstream kelly;
  kelly << header;
  write_kelly(kelly, gen.kelly());
  b.kelly = kelly.str();

  std::ostringstream senses;
  senses << header;
  write_senses(senses, gen.senses());
  b.senses = senses.str();

  std::ostringstream catmap;
  catmap << header;
  write_category_map(catmap, generator_category_map());
  b.category_map = catmap.str();

  nlohmann::ordered_json m;
  m["generator"] = "cefrlab-datagen";
  m["rng"] = std::string(Rng::kAlgorithm);
  m["seed"] = cfg.seed;
  m["docs_per_level"] = cfg.docs_per_level;
  m["sentences_per_level"] = cfg.sentences_per_level;
  m["sentences_per_doc_mean"] = cfg.sentences_per_doc_mean;
  m["sentence_length_mean"] = cfg.sentence_length_mean;
  m["lexicon_size"] = cfg.lexicon_size;
  m["lexeme_level_weights"] = cfg.lexeme_level_weights;
  m["long_word_prob"] = cfg.long_word_prob;
  m["subordinate_prob"] = cfg.subordinate_prob;
  m["mixed_sentence_prob"] = cfg.mixed_sentence_prob;
  m["kelly_dropout"] = cfg.kelly_dropout;
  b.manifest = m.dump(2) + "\n";
  return b;
}

void write_bundle(const std::string& dir, const GeneratedBundle& bundle) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, const std::string& text) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
  };
  put("corpus.tsv", bundle.corpus);
  put("kelly.tsv", bundle.kelly);
  put("senses.tsv", bundle.senses);
  put("categories.catmap", bundle.category_map);
  put("manifest.json", bundle.manifest);
}

}  // namespace cefrlab
