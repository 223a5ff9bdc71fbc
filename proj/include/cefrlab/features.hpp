#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cefrlab/cefr.hpp"
#include "cefrlab/corpus.hpp"
#include "cefrlab/lexicon.hpp"

namespace cefrlab {

inline constexpr std::size_t kFeatureCount = 61;

/// Column names of the catalog, in catalog order (#1 first).
const std::array<std::string_view, kFeatureCount>& feature_names();

/// 0-based column of a catalog name, if any.
std::optional<std::size_t> feature_index(std::string_view name);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  /// 1-based access by catalog number.
  double& at(std::size_t number) { return values.at(number - 1); }
  double at(std::size_t number) const { return values.at(number - 1); }

  std::span<const double> view() const { return values; }
  bool operator==(const FeatureVector&) const = default;
};

enum class FeatureGroup { All, Lex, Len, Morph, Synt, Sem };

std::string_view to_string(FeatureGroup g);
std::optional<FeatureGroup> parse_feature_group(std::string_view s);

/// 0-based catalog columns that make up `group`, ascending.
std::vector<std::size_t> group_indices(FeatureGroup group);
std::vector<std::string> group_feature_names(FeatureGroup group);

std::vector<double> select_feature_group(const FeatureVector& v, FeatureGroup group);

/// Picks columns by catalog index.
std::vector<double> select_columns(const FeatureVector& v, std::span<const std::size_t> columns);

// Building blocks. Every ratio with a zero denominator yields 0.

/// Readability index: words per sentence plus the percentage of long words.
double lix(std::size_t word_count, std::size_t sentence_count, std::size_t long_word_count);

/// Incidence score: category count per 1000 tokens.
double inc_sc(std::size_t category_count, std::size_t token_count);

/// Share of a category among lexical (noun, verb, adjective, adverb) tokens.
double variation(std::size_t category_count, std::size_t lexical_count);

struct TtrPair {
  double bilog = 0.0;  // ln(types) / ln(tokens); 1 when tokens <= 1
  double root = 0.0;   // types / sqrt(tokens); 0 when tokens == 0
};
TtrPair ttr_pair(std::size_t type_count, std::size_t token_count);

/// (nouns + prepositions + participles) / (pronouns + adverbs + verbs).
double nominal_ratio(std::size_t nominal_count, std::size_t verbal_count);

struct DependencyStats {
  double avg_arc_length = 0.0;
  std::size_t long_arcs = 0;   // arcs longer than 5
  std::size_t root_depth = 0;  // most arcs on any root-to-token path
  double right_ratio = 0.0;
  double left_ratio = 0.0;
};

/// Throws Error("not a tree") on cyclic head chains or out-of-range heads.
DependencyStats dependency_stats(const Sentence& sentence);

/// LIX over a whole text (all tokens, all sentences) rather than per sentence.
double lix_whole_text(std::span<const Sentence> sentences);

enum class LevelMode { UseReference, ZeroOut };

std::string_view to_string(LevelMode m);
std::optional<LevelMode> parse_level_mode(std::string_view s);

struct ExtractionContext {
  const KellyList& kelly;
  const SenseLexicon& senses;
  const CategoryMap& map;
  CefrLabel reference_level = CefrLabel::B1;
  LevelMode level_mode = LevelMode::UseReference;

  ExtractionContext with_reference(CefrLabel level) const {
    return {kelly, senses, map, level, level_mode};
  }
};

/// Raw counts that do not appear in the vector itself.
struct ExtractionDiagnostics {
  std::size_t tokens = 0;
  std::size_t extra_long_words = 0;
  std::size_t kelly_matches = 0;
  std::size_t kelly_fallbacks = 0;  // matched on lemma only
  std::size_t sense_matches = 0;
  std::size_t sense_fallbacks = 0;

  ExtractionDiagnostics& operator+=(const ExtractionDiagnostics& o);
};

FeatureVector extract_sentence_features(const Sentence& sentence, const ExtractionContext& ctx,
                                        ExtractionDiagnostics* diagnostics = nullptr);

/// Componentwise mean. Throws on an empty input.
FeatureVector aggregate_document(std::span<const FeatureVector> vectors);

/// Per-sentence extraction followed by aggregate_document. The caller decides
/// the reference level through `ctx`.
FeatureVector extract_document_features(const Document& doc, const ExtractionContext& ctx,
                                        ExtractionDiagnostics* diagnostics = nullptr);

}  // namespace cefrlab
