#pragma once

#include <sstream>
#include <string>

#include "cefrlab/corpus.hpp"
#include "cefrlab/lexicon.hpp"

namespace fixtures {

// Small SUC-style map shared by the feature tests.
inline const char* const kCategoryMap = R"([pos]
noun = NN, PM
verb = VB
adjective = JJ
adverb = AB
pronoun = PN, HP
preposition = PP
particle = PL
punctuation = MAD, MID, PAD
subjunction = SN
conjunction = KN
relative = HA, HD, HP, HS
participle = PC
function_word = DT, HA, HD, HP, HS, IE, KN, PL, PN, PP, PS, SN

[deprel]
pre_modifier = AT
post_modifier = ET
subordinate = UA
relative_clause = EF
prep_complement = PA

[msd]
neuter = NEU
preterite = PRT
present = PRS
supine = SUP
past_participle = PRF
present_participle = PRS
passive = SFO

[lexemes]
modal = kunna, skola, vilja, måste
pronoun_3sg = han, hon, den, det
)";

inline cefrlab::CategoryMap category_map() {
  std::istringstream in(kCategoryMap);
  return cefrlab::load_category_map(in);
}

inline cefrlab::KellyList kelly(const std::string& tsv) {
  std::istringstream in(tsv);
  return cefrlab::load_kelly(in);
}

inline cefrlab::SenseLexicon senses(const std::string& tsv) {
  std::istringstream in(tsv);
  return cefrlab::load_senses(in);
}

// First sentence of the first unit in a corpus text.
inline cefrlab::Sentence sentence(const std::string& corpus_text) {
  auto c = cefrlab::parse_corpus_string(corpus_text);
  if (!c.documents.empty()) return c.documents.front().sentences.front();
  return c.standalone_sentences.front().sentence;
}

}  // namespace fixtures
