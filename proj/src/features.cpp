#include "cefrlab/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

namespace cefrlab {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "f01_sentence_length",
    "f02_avg_token_length",
    "f03_extra_long_words",
    "f04_n_characters",
    "f05_lix",
    "f06_a1_lemma_incsc",
    "f07_a2_lemma_incsc",
    "f08_b1_lemma_incsc",
    "f09_b2_lemma_incsc",
    "f10_c1_lemma_incsc",
    "f11_c2_lemma_incsc",
    "f12_difficult_word_incsc",
    "f13_difficult_noun_verb_incsc",
    "f14_out_of_kelly_incsc",
    "f15_missing_lemma_incsc",
    "f16_avg_kelly_log_freq",
    "f17_avg_dep_length",
    "f18_long_arcs_incsc",
    "f19_max_root_depth",
    "f20_right_arc_ratio",
    "f21_left_arc_ratio",
    "f22_modifier_variation",
    "f23_pre_modifier_incsc",
    "f24_post_modifier_incsc",
    "f25_subordinate_incsc",
    "f26_relative_clause_incsc",
    "f27_prep_complement_incsc",
    "f28_avg_senses_per_token",
    "f29_noun_senses_per_noun",
    "f30_modal_to_verb",
    "f31_particle_incsc",
    "f32_3sg_pronoun_incsc",
    "f33_punctuation_incsc",
    "f34_subjunction_incsc",
    "f35_s_verb_incsc",
    "f36_s_verb_to_verb",
    "f37_adjective_incsc",
    "f38_adjective_variation",
    "f39_adverb_incsc",
    "f40_adverb_variation",
    "f41_noun_incsc",
    "f42_noun_variation",
    "f43_verb_incsc",
    "f44_verb_variation",
    "f45_nominal_ratio",
    "f46_noun_to_verb",
    "f47_function_word_incsc",
    "f48_lex_to_non_lex",
    "f49_lex_to_all",
    "f50_neuter_noun_incsc",
    "f51_conj_subj_incsc",
    "f52_past_participle_to_verb",
    "f53_present_participle_to_verb",
    "f54_past_verb_to_verb",
    "f55_present_verb_to_verb",
    "f56_supine_to_verb",
    "f57_relative_structure_incsc",
    "f58_bilog_ttr",
    "f59_sqrt_ttr",
    "f60_pron_to_noun",
    "f61_pron_to_prep",
};

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

bool has_any(const std::vector<std::string>& msd, const TagSet& markers) {
  return std::any_of(msd.begin(), msd.end(), [&](const std::string& f) { return markers.contains(f); });
}

// Catalog number ranges per group, inclusive.
struct Range {
  std::size_t first, last;
};

Range group_range(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Len: return {1, 5};
    case FeatureGroup::Lex: return {6, 16};
    case FeatureGroup::Synt: return {17, 27};
    case FeatureGroup::Sem: return {28, 29};
    case FeatureGroup::Morph: return {30, 61};
    case FeatureGroup::All: return {1, 61};
  }
  return {1, 61};
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() { return kNames; }

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return i;
  return std::nullopt;
}

std::string_view to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::All: return "All";
    case FeatureGroup::Lex: return "Lex";
    case FeatureGroup::Len: return "Len";
    case FeatureGroup::Morph: return "Morph";
    case FeatureGroup::Synt: return "Synt";
    case FeatureGroup::Sem: return "Sem";
  }
  return "All";
}

std::optional<FeatureGroup> parse_feature_group(std::string_view s) {
  for (auto g : {FeatureGroup::All, FeatureGroup::Lex, FeatureGroup::Len, FeatureGroup::Morph,
                 FeatureGroup::Synt, FeatureGroup::Sem})
    if (to_string(g) == s) return g;
  return std::nullopt;
}

std::vector<std::size_t> group_indices(FeatureGroup group) {
  auto [first, last] = group_range(group);
  std::vector<std::size_t> idx;
  for (std::size_t n = first; n <= last; ++n) idx.push_back(n - 1);
  return idx;
}

std::vector<std::string> group_feature_names(FeatureGroup group) {
  std::vector<std::string> names;
  for (auto i : group_indices(group)) names.emplace_back(kNames[i]);
  return names;
}

std::vector<double> select_columns(const FeatureVector& v, std::span<const std::size_t> columns) {
  std::vector<double> out;
  out.reserve(columns.size());
  for (auto c : columns) out.push_back(v.values.at(c));
  return out;
}

std::vector<double> select_feature_group(const FeatureVector& v, FeatureGroup group) {
  auto idx = group_indices(group);
  return select_columns(v, idx);
}

double lix(std::size_t word_count, std::size_t sentence_count, std::size_t long_word_count) {
  if (word_count == 0 || sentence_count == 0) return 0.0;
  return static_cast<double>(word_count) / static_cast<double>(sentence_count) +
         100.0 * static_cast<double>(long_word_count) / static_cast<double>(word_count);
}

double inc_sc(std::size_t category_count, std::size_t token_count) {
  if (token_count == 0) return 0.0;
  return 1000.0 / static_cast<double>(token_count) * static_cast<double>(category_count);
}

double variation(std::size_t category_count, std::size_t lexical_count) {
  return ratio(category_count, lexical_count);
}

TtrPair ttr_pair(std::size_t type_count, std::size_t token_count) {
  TtrPair t;
  if (token_count <= 1) {
    t.bilog = 1.0;
  } else if (type_count > 0) {
    t.bilog = std::log(static_cast<double>(type_count)) / std::log(static_cast<double>(token_count));
  }
  if (token_count > 0)
    t.root = static_cast<double>(type_count) / std::sqrt(static_cast<double>(token_count));
  return t;
}

double nominal_ratio(std::size_t nominal_count, std::size_t verbal_count) {
  return ratio(nominal_count, verbal_count);
}

DependencyStats dependency_stats(const Sentence& sentence) {
  const auto& toks = sentence.tokens;
  const int n = static_cast<int>(toks.size());
  DependencyStats st;
  for (const auto& t : toks)
    if (t.head < 0 || t.head > n || t.head == t.index)
      throw Error("not a tree: invalid head in sentence " + sentence.id);

  // depth[i] = arcs between token i+1 and its root; -1 = unknown, -2 = on current path
  std::vector<int> depth(toks.size(), -1);
  for (int start = 0; start < n; ++start) {
    std::vector<int> path;
    int cur = start;
    while (cur >= 0 && depth[cur] == -1) {
      depth[cur] = -2;
      path.push_back(cur);
      cur = toks[cur].head - 1;
    }
    if (cur >= 0 && depth[cur] == -2) throw Error("not a tree: cycle in sentence " + sentence.id);
    int base = cur < 0 ? -1 : depth[cur];
    for (auto it = path.rbegin(); it != path.rend(); ++it) depth[*it] = ++base;
  }

  std::size_t arcs = 0, right = 0, total_len = 0;
  for (int i = 0; i < n; ++i) {
    const auto& t = toks[i];
    st.root_depth = std::max<std::size_t>(st.root_depth, static_cast<std::size_t>(depth[i]));
    if (t.head == 0) continue;
    const int len = std::abs(t.index - t.head);
    ++arcs;
    total_len += static_cast<std::size_t>(len);
    if (len > 5) ++st.long_arcs;
    if (t.index > t.head) ++right;
  }
  st.avg_arc_length = ratio(total_len, arcs);
  st.right_ratio = ratio(right, arcs);
  st.left_ratio = ratio(arcs - right, arcs);
  return st;
}

double lix_whole_text(std::span<const Sentence> sentences) {
  std::size_t words = 0, long_words = 0;
  for (const auto& s : sentences)
    for (const auto& t : s.tokens) {
      ++words;
      if (utf8_length(t.form) > 6) ++long_words;
    }
  return lix(words, sentences.size(), long_words);
}

std::string_view to_string(LevelMode m) {
  return m == LevelMode::ZeroOut ? "zero-out" : "use-reference";
}

std::optional<LevelMode> parse_level_mode(std::string_view s) {
  if (s == "use-reference") return LevelMode::UseReference;
  if (s == "zero-out") return LevelMode::ZeroOut;
  return std::nullopt;
}

ExtractionDiagnostics& ExtractionDiagnostics::operator+=(const ExtractionDiagnostics& o) {
  tokens += o.tokens;
  extra_long_words += o.extra_long_words;
  kelly_matches += o.kelly_matches;
  kelly_fallbacks += o.kelly_fallbacks;
  sense_matches += o.sense_matches;
  sense_fallbacks += o.sense_fallbacks;
  return *this;
}

FeatureVector extract_sentence_features(const Sentence& sentence, const ExtractionContext& ctx,
                                        ExtractionDiagnostics* diagnostics) {
  const CategoryMap& cm = ctx.map;
  const std::size_t n = sentence.tokens.size();

  std::size_t chars = 0, long6 = 0, long13 = 0;
  std::array<std::size_t, 6> kelly_level{};
  std::size_t difficult = 0, difficult_nv = 0, out_of_kelly = 0, missing_lemma = 0;
  double log_freq_sum = 0.0;
  std::size_t kelly_matched = 0, kelly_fallback = 0;
  std::size_t pre_mod = 0, post_mod = 0, subord = 0, rel_clause = 0, prep_comp = 0;
  std::size_t sense_sum = 0, sense_found = 0, sense_fallback = 0;
  std::size_t noun_sense_sum = 0, noun_sense_found = 0;
  std::size_t nouns = 0, verbs = 0, adjectives = 0, adverbs = 0, pronouns = 0, prepositions = 0;
  std::size_t particles = 0, punct = 0, subjunctions = 0, conjunctions = 0, participles = 0;
  std::size_t modals = 0, pron3sg = 0, s_verbs = 0, function_words = 0, neuter_nouns = 0;
  std::size_t past_part = 0, pres_part = 0, preterite = 0, present = 0, supine = 0, relative = 0;
  std::set<std::string> types;

  for (const auto& t : sentence.tokens) {
    const std::size_t len = utf8_length(t.form);
    const std::string lower_form = utf8_lower(t.form);
    chars += len;
    if (len > 6) ++long6;
    if (len > 13) ++long13;
    types.insert(lower_form);

    const bool is_noun = cm.pos.noun.contains(t.pos);
    const bool is_verb = cm.pos.verb.contains(t.pos);
    const bool is_punct = cm.pos.punctuation.contains(t.pos);

    if (t.lemma.empty()) {
      ++missing_lemma;
    } else if (!is_punct) {
      if (auto m = ctx.kelly.lookup(t.lemma, t.pos)) {
        ++kelly_matched;
        if (m->kind == MatchKind::LemmaOnly) ++kelly_fallback;
        kelly_level[static_cast<std::size_t>(ordinal(m->entry->level) - 1)] += 1;
        log_freq_sum += m->entry->log_freq;
        if (ordinal(m->entry->level) > ordinal(ctx.reference_level)) {
          ++difficult;
          if (is_noun || is_verb) ++difficult_nv;
        }
      } else {
        ++out_of_kelly;
      }
    }
    if (!t.lemma.empty()) {
      if (auto s = ctx.senses.lookup(t.lemma, t.pos)) {
        ++sense_found;
        sense_sum += static_cast<std::size_t>(s->senses);
        if (s->kind == MatchKind::LemmaOnly) ++sense_fallback;
        if (is_noun) {
          ++noun_sense_found;
          noun_sense_sum += static_cast<std::size_t>(s->senses);
        }
      }
    }

    if (cm.deprel.pre_modifier.contains(t.deprel)) ++pre_mod;
    if (cm.deprel.post_modifier.contains(t.deprel)) ++post_mod;
    if (cm.deprel.subordinate.contains(t.deprel)) ++subord;
    if (cm.deprel.relative_clause.contains(t.deprel)) ++rel_clause;
    if (cm.deprel.prep_complement.contains(t.deprel)) ++prep_comp;

    const std::string lexeme = t.lemma.empty() ? lower_form : utf8_lower(t.lemma);
    if (is_noun) {
      ++nouns;
      if (has_any(t.msd, cm.msd.neuter)) ++neuter_nouns;
    }
    if (is_verb) {
      ++verbs;
      if (cm.lexemes.modal.contains(lexeme)) ++modals;
      if ((!lower_form.empty() && lower_form.back() == 's') || has_any(t.msd, cm.msd.passive))
        ++s_verbs;
      if (has_any(t.msd, cm.msd.preterite)) ++preterite;
      if (has_any(t.msd, cm.msd.present)) ++present;
      if (has_any(t.msd, cm.msd.supine)) ++supine;
    }
    if (cm.pos.adjective.contains(t.pos)) ++adjectives;
    if (cm.pos.adverb.contains(t.pos)) ++adverbs;
    if (cm.pos.pronoun.contains(t.pos)) {
      ++pronouns;
      if (cm.lexemes.pronoun_3sg.contains(lexeme)) ++pron3sg;
    }
    if (cm.pos.preposition.contains(t.pos)) ++prepositions;
    if (cm.pos.particle.contains(t.pos)) ++particles;
    if (is_punct) ++punct;
    if (cm.pos.subjunction.contains(t.pos)) ++subjunctions;
    if (cm.pos.conjunction.contains(t.pos)) ++conjunctions;
    if (cm.pos.participle.contains(t.pos)) {
      ++participles;
      if (has_any(t.msd, cm.msd.past_participle)) ++past_part;
      if (has_any(t.msd, cm.msd.present_participle)) ++pres_part;
    }
    if (cm.pos.relative.contains(t.pos)) ++relative;
    if (cm.pos.function_word.contains(t.pos)) ++function_words;
  }

  const std::size_t lexical = nouns + verbs + adjectives + adverbs;
  const DependencyStats dep = dependency_stats(sentence);
  const TtrPair ttr = ttr_pair(types.size(), n);

  FeatureVector v;
  v.at(1) = static_cast<double>(n);
  v.at(2) = ratio(chars, n);
  v.at(3) = inc_sc(long13, n);
  v.at(4) = static_cast<double>(chars);
  v.at(5) = lix(n, 1, long6);
  for (std::size_t l = 0; l < 6; ++l) v.at(6 + l) = inc_sc(kelly_level[l], n);
  if (ctx.level_mode == LevelMode::UseReference) {
    v.at(12) = inc_sc(difficult, n);
    v.at(13) = inc_sc(difficult_nv, n);
  }
  v.at(14) = inc_sc(out_of_kelly, n);
  v.at(15) = inc_sc(missing_lemma, n);
  v.at(16) = kelly_matched ? log_freq_sum / static_cast<double>(kelly_matched) : 0.0;

  v.at(17) = dep.avg_arc_length;
  v.at(18) = inc_sc(dep.long_arcs, n);
  v.at(19) = static_cast<double>(dep.root_depth);
  v.at(20) = dep.right_ratio;
  v.at(21) = dep.left_ratio;
  v.at(22) = variation(pre_mod + post_mod, lexical);
  v.at(23) = inc_sc(pre_mod, n);
  v.at(24) = inc_sc(post_mod, n);
  v.at(25) = inc_sc(subord, n);
  v.at(26) = inc_sc(rel_clause, n);
  v.at(27) = inc_sc(prep_comp, n);

  v.at(28) = ratio(sense_sum, sense_found);
  v.at(29) = ratio(noun_sense_sum, noun_sense_found);

  v.at(30) = ratio(modals, verbs);
  v.at(31) = inc_sc(particles, n);
  v.at(32) = inc_sc(pron3sg, n);
  v.at(33) = inc_sc(punct, n);
  v.at(34) = inc_sc(subjunctions, n);
  v.at(35) = inc_sc(s_verbs, n);
  v.at(36) = ratio(s_verbs, verbs);
  v.at(37) = inc_sc(adjectives, n);
  v.at(38) = variation(adjectives, lexical);
  v.at(39) = inc_sc(adverbs, n);
  v.at(40) = variation(adverbs, lexical);
  v.at(41) = inc_sc(nouns, n);
  v.at(42) = variation(nouns, lexical);
  v.at(43) = inc_sc(verbs, n);
  v.at(44) = variation(verbs, lexical);
  v.at(45) = nominal_ratio(nouns + prepositions + participles, pronouns + adverbs + verbs);
  v.at(46) = ratio(nouns, verbs);
  v.at(47) = inc_sc(function_words, n);
  v.at(48) = ratio(lexical, n - lexical);
  v.at(49) = ratio(lexical, n);
  v.at(50) = inc_sc(neuter_nouns, n);
  v.at(51) = inc_sc(conjunctions + subjunctions, n);
  v.at(52) = ratio(past_part, verbs);
  v.at(53) = ratio(pres_part, verbs);
  v.at(54) = ratio(preterite, verbs);
  v.at(55) = ratio(present, verbs);
  v.at(56) = ratio(supine, verbs);
  v.at(57) = inc_sc(relative, n);
  v.at(58) = ttr.bilog;
  v.at(59) = ttr.root;
  v.at(60) = ratio(pronouns, nouns);
  v.at(61) = ratio(pronouns, prepositions);

  if (diagnostics) {
    diagnostics->tokens += n;
    diagnostics->extra_long_words += long13;
    diagnostics->kelly_matches += kelly_matched;
    diagnostics->kelly_fallbacks += kelly_fallback;
    diagnostics->sense_matches += sense_found;
    diagnostics->sense_fallbacks += sense_fallback;
  }
  return v;
}

FeatureVector aggregate_document(std::span<const FeatureVector> vectors) {
  if (vectors.empty()) throw Error("cannot aggregate an empty list of feature vectors");
  FeatureVector mean;
  for (const auto& v : vectors)
    for (std::size_t i = 0; i < kFeatureCount; ++i) mean.values[i] += v.values[i];
  const double k = static_cast<double>(vectors.size());
  for (auto& x : mean.values) x /= k;
  return mean;
}

FeatureVector extract_document_features(const Document& doc, const ExtractionContext& ctx,
                                        ExtractionDiagnostics* diagnostics) {
  std::vector<FeatureVector> per_sentence;
  per_sentence.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences)
    per_sentence.push_back(extract_sentence_features(s, ctx, diagnostics));
  return aggregate_document(per_sentence);
}

}  // namespace cefrlab
