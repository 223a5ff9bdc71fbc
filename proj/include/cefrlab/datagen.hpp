#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "cefrlab/lexicon.hpp"

namespace cefrlab {

// Level-indexed arrays run A1..C1.
struct GenConfig {
  std::uint64_t seed = 42;
  std::array<std::size_t, 5> docs_per_level{100, 100, 100, 100, 100};
  std::array<std::size_t, 5> sentences_per_level{100, 100, 100, 100, 100};  // standalone
  std::array<double, 5> sentences_per_doc_mean{5.0, 6.0, 7.0, 8.0, 9.0};
  std::array<double, 5> sentence_length_mean{6.0, 9.0, 12.0, 15.0, 18.0};
  std::size_t lexicon_size = 600;
  // Sampling weight of a lexicon level (A1..C2, columns) for text level (rows).
  std::array<std::array<double, 6>, 5> lexeme_level_weights{{
      {1.00, 0.08, 0.01, 0.005, 0.002, 0.001},
      {0.80, 1.00, 0.08, 0.01, 0.005, 0.002},
      {0.60, 0.80, 1.00, 0.08, 0.01, 0.005},
      {0.50, 0.60, 0.80, 1.00, 0.08, 0.02},
      {0.40, 0.50, 0.60, 0.80, 1.00, 0.20},
  }};
  std::array<double, 5> long_word_prob{0.02, 0.05, 0.10, 0.15, 0.20};
  std::array<double, 5> subordinate_prob{0.05, 0.15, 0.30, 0.45, 0.60};
  // Share of document sentences generated at a uniformly drawn other level.
  double mixed_sentence_prob = 0.0;
  // Share of content lemmas left out of the Kelly list.
  double kelly_dropout = 0.05;
};

/// Throws Error on an inconsistent configuration.
void validate_config(const GenConfig& cfg);

struct GeneratedBundle {
  std::string corpus;
  std::string kelly;
  std::string senses;
  std::string category_map;
  std::string manifest;  // JSON: generator, rng, seed and every config field
};

/// Deterministic for a given configuration: identical configs give
/// byte-identical bundles.
GeneratedBundle generate_corpus(const GenConfig& cfg);

/// The category map matching the generator's SUC-style tags.
CategoryMap generator_category_map();

/// Writes corpus.tsv, kelly.tsv, senses.tsv, categories.catmap and
/// manifest.json into `dir` (created if missing).
void write_bundle(const std::string& dir, const GeneratedBundle& bundle);

}  // namespace cefrlab
