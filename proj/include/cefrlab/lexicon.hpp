#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cefrlab/cefr.hpp"

namespace cefrlab {

struct KellyEntry {
  std::string lemma;
  std::string pos;
  CefrLabel level = CefrLabel::A1;  // A1..C2
  double log_freq = 0.0;            // natural log of frequency per million
};

enum class MatchKind { Exact, LemmaOnly };

struct KellyMatch {
  const KellyEntry* entry = nullptr;
  MatchKind kind = MatchKind::Exact;
};

/// CEFR-graded frequency word list. Lookup tries (lemma, pos) and falls back
/// to the first entry loaded for the lemma alone.
class KellyList {
 public:
  /// Returns false (and records a warning) when (lemma, pos) is already present.
  bool add(KellyEntry e);

  std::optional<KellyMatch> lookup(std::string_view lemma, std::string_view pos) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<KellyEntry>& entries() const { return entries_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<KellyEntry> entries_;
  std::map<std::pair<std::string, std::string>, std::size_t, std::less<>> by_key_;
  std::map<std::string, std::size_t, std::less<>> by_lemma_;
  std::vector<std::string> warnings_;
};

/// lemma, pos, level (A1..C2), log_freq; tab-separated; optional header line.
KellyList load_kelly(std::istream& in);
KellyList load_kelly_file(const std::string& path);
void write_kelly(std::ostream& out, const KellyList& list);

struct SenseMatch {
  int senses = 0;
  MatchKind kind = MatchKind::Exact;
};

class SenseLexicon {
 public:
  /// Throws when senses < 1. Returns false on duplicate key (first wins).
  bool add(const std::string& lemma, const std::string& pos, int senses);

  std::optional<SenseMatch> lookup(std::string_view lemma, std::string_view pos) const;

  std::size_t size() const { return by_key_.size(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  struct Row {
    std::string lemma, pos;
    int senses;
  };
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<Row> rows_;
  std::map<std::pair<std::string, std::string>, int, std::less<>> by_key_;
  std::map<std::string, int, std::less<>> by_lemma_;
  std::vector<std::string> warnings_;
};

/// lemma, pos, sense_count; tab-separated; optional header line.
SenseLexicon load_senses(std::istream& in);
SenseLexicon load_senses_file(const std::string& path);
void write_senses(std::ostream& out, const SenseLexicon& lex);

using TagSet = std::set<std::string, std::less<>>;

// Maps the tagset of the annotated corpus onto the categories the feature
// catalog counts. Lexemes are stored lowercased.
struct CategoryMap {
  struct Pos {
    TagSet noun, verb, adjective, adverb, pronoun, preposition, particle, punctuation,
        subjunction, conjunction, relative, participle, function_word;
  } pos;
  struct Deprel {
    TagSet pre_modifier, post_modifier, subordinate, relative_clause, prep_complement;
  } deprel;
  struct Msd {
    TagSet neuter, preterite, present, supine, past_participle, present_participle;
    TagSet passive;  // optional
  } msd;
  struct Lexemes {
    TagSet modal, pronoun_3sg;
  } lexemes;

  std::vector<std::string> warnings;

  bool is_lexical(std::string_view tag) const {
    return pos.noun.contains(tag) || pos.verb.contains(tag) || pos.adjective.contains(tag) ||
           pos.adverb.contains(tag);
  }
};

/// INI-like text: `[pos]`, `[deprel]`, `[msd]`, `[lexemes]` sections holding
/// `name = a, b, c` lines; `#` starts a comment. Throws on a missing or empty
/// required category and on overlapping lexical categories; unknown keys only
/// produce warnings.
CategoryMap load_category_map(std::istream& in);
CategoryMap load_category_map_file(const std::string& path);
void write_category_map(std::ostream& out, const CategoryMap& map);

}  // namespace cefrlab
