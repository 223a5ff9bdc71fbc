#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cefrlab/cefr.hpp"

namespace cefrlab {

struct AnnotatedToken {
  int index = 0;                  // 1-based
  std::string form;
  std::string lemma;              // empty = lemmatizer found no lemma
  std::string pos;
  std::vector<std::string> msd;   // morphological features, file order
  int head = 0;                   // 0 = root
  std::string deprel;

  bool operator==(const AnnotatedToken&) const = default;
};

struct Sentence {
  std::string id;
  std::vector<AnnotatedToken> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string id;
  CefrLabel level = CefrLabel::A1;
  std::vector<Sentence> sentences;

  bool operator==(const Document&) const = default;
};

struct LabeledSentence {
  Sentence sentence;
  CefrLabel level = CefrLabel::A1;

  bool operator==(const LabeledSentence&) const = default;
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<LabeledSentence> standalone_sentences;

  bool operator==(const Corpus&) const = default;
};

/// Reads the tab-separated corpus format. Strict: the first malformed line
/// throws FormatError carrying its line number.
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus_string(std::string_view text);
Corpus load_corpus(const std::string& path);

/// Writes `corpus` in the format read by parse_corpus: documents first, then
/// standalone sentences.
void write_corpus(std::ostream& out, const Corpus& corpus);
std::string serialize_corpus(const Corpus& corpus);

enum class Severity { Warning, Error };

struct Issue {
  Severity severity = Severity::Error;
  std::string kind;      // "missing root", "empty document", ...
  std::string unit_id;   // document or sentence id
  std::string detail;
};

std::string format_issue(const Issue& issue);

/// Structural checks that do not abort parsing. Multiple roots are reported as
/// warnings; everything else as errors.
std::vector<Issue> validate_corpus(const Corpus& corpus);

/// True when `issues` holds no Severity::Error entry.
bool is_clean(const std::vector<Issue>& issues);

struct LevelStats {
  std::string label;          // "A1".."C1" or "Total"
  std::size_t texts = 0;
  double mean_sentences = 0.0;
  std::size_t sentences = 0;  // standalone sentences
};

/// One row per level A1..C1 followed by a "Total" row. The total mean is the
/// mean over all documents.
std::vector<LevelStats> corpus_stats(const Corpus& corpus);

void write_stats_tsv(std::ostream& out, const std::vector<LevelStats>& rows);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

/// ASCII + Latin-1 supplement lowercasing over UTF-8 (covers å, ä, ö, é ...).
std::string utf8_lower(std::string_view s);

}  // namespace cefrlab
