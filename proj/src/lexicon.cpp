#include "cefrlab/lexicon.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <iomanip>
#include <limits>
#include <ostream>

#include "cefrlab/corpus.hpp"
#include "cefrlab/text_util.hpp"

namespace cefrlab {

namespace {

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_header(const std::vector<std::string_view>& cols) {
  return !cols.empty() && utf8_lower(trim(cols[0])) == "lemma";
}

// Reads non-empty, non-comment lines split on tabs.
template <typename Fn>
void for_each_row(std::istream& in, std::size_t expected_cols, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    const bool header = first_row && is_header(cols);
    first_row = false;
    if (header) continue;
    if (cols.size() != expected_cols)
      throw FormatError("expected " + std::to_string(expected_cols) + " columns, found " +
                            std::to_string(cols.size()),
                        line_no);
    fn(line_no, cols);
  }
}

}  // namespace

bool KellyList::add(KellyEntry e) {
  auto key = std::make_pair(e.lemma, e.pos);
  if (by_key_.contains(key)) {
    warnings_.push_back("duplicate Kelly entry (" + e.lemma + ", " + e.pos + "): kept first");
    return false;
  }
  entries_.push_back(std::move(e));
  const std::size_t idx = entries_.size() - 1;
  by_key_.emplace(std::move(key), idx);
  by_lemma_.try_emplace(entries_[idx].lemma, idx);
  return true;
}

std::optional<KellyMatch> KellyList::lookup(std::string_view lemma, std::string_view pos) const {
  if (auto it = by_key_.find(std::make_pair(std::string(lemma), std::string(pos)));
      it != by_key_.end())
    return KellyMatch{&entries_[it->second], MatchKind::Exact};
  if (auto it = by_lemma_.find(lemma); it != by_lemma_.end())
    return KellyMatch{&entries_[it->second], MatchKind::LemmaOnly};
  return std::nullopt;
}

KellyList load_kelly(std::istream& in) {
  KellyList list;
  for_each_row(in, 4, [&](std::size_t line_no, const std::vector<std::string_view>& cols) {
    auto level = parse_level(trim(cols[2]), /*allow_c2=*/true);
    if (!level) throw FormatError("unparsable level '" + std::string(cols[2]) + "'", line_no);
    auto freq = parse_double(trim(cols[3]));
    if (!freq || !std::isfinite(*freq))
      throw FormatError("non-numeric frequency '" + std::string(cols[3]) + "'", line_no);
    list.add({std::string(trim(cols[0])), std::string(trim(cols[1])), *level, *freq});
  });
  return list;
}

KellyList load_kelly_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open Kelly list: " + path);
  try {
    return load_kelly(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_kelly(std::ostream& out, const KellyList& list) {
  out << "lemma\tpos\tlevel\tlog_freq\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : list.entries())
    out << e.lemma << '\t' << e.pos << '\t' << to_string(e.level) << '\t' << e.log_freq << '\n';
}

bool SenseLexicon::add(const std::string& lemma, const std::string& pos, int senses) {
  if (senses < 1) throw Error("sense count must be >= 1 for (" + lemma + ", " + pos + ")");
  if (!by_key_.try_emplace(std::make_pair(lemma, pos), senses).second) {
    warnings_.push_back("duplicate sense entry (" + lemma + ", " + pos + "): kept first");
    return false;
  }
  by_lemma_.try_emplace(lemma, senses);
  rows_.push_back({lemma, pos, senses});
  return true;
}

std::optional<SenseMatch> SenseLexicon::lookup(std::string_view lemma, std::string_view pos) const {
  if (auto it = by_key_.find(std::make_pair(std::string(lemma), std::string(pos)));
      it != by_key_.end())
    return SenseMatch{it->second, MatchKind::Exact};
  if (auto it = by_lemma_.find(lemma); it != by_lemma_.end())
    return SenseMatch{it->second, MatchKind::LemmaOnly};
  return std::nullopt;
}

SenseLexicon load_senses(std::istream& in) {
  SenseLexicon lex;
  for_each_row(in, 3, [&](std::size_t line_no, const std::vector<std::string_view>& cols) {
    auto n = parse_int(trim(cols[2]));
    if (!n) throw FormatError("non-integer sense count '" + std::string(cols[2]) + "'", line_no);
    if (*n < 1) throw FormatError("sense count must be >= 1", line_no);
    lex.add(std::string(trim(cols[0])), std::string(trim(cols[1])), *n);
  });
  return lex;
}

SenseLexicon load_senses_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sense lexicon: " + path);
  try {
    return load_senses(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_senses(std::ostream& out, const SenseLexicon& lex) {
  out << "lemma\tpos\tsenses\n";
  for (const auto& r : lex.rows()) out << r.lemma << '\t' << r.pos << '\t' << r.senses << '\n';
}

namespace {

struct CategorySlot {
  std::string_view section;
  std::string_view key;
  bool required;
  bool may_be_empty;
  std::function<TagSet&(CategoryMap&)> get;
};

const std::vector<CategorySlot>& category_slots() {
  static const std::vector<CategorySlot> slots = {
      {"pos", "noun", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.noun; }},
      {"pos", "verb", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.verb; }},
      {"pos", "adjective", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.adjective; }},
      {"pos", "adverb", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.adverb; }},
      {"pos", "pronoun", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.pronoun; }},
      {"pos", "preposition", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.preposition; }},
      {"pos", "particle", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.particle; }},
      {"pos", "punctuation", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.punctuation; }},
      {"pos", "subjunction", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.subjunction; }},
      {"pos", "conjunction", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.conjunction; }},
      {"pos", "relative", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.relative; }},
      {"pos", "participle", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.participle; }},
      {"pos", "function_word", true, false, [](CategoryMap& m) -> TagSet& { return m.pos.function_word; }},
      {"deprel", "pre_modifier", true, false, [](CategoryMap& m) -> TagSet& { return m.deprel.pre_modifier; }},
      {"deprel", "post_modifier", true, false, [](CategoryMap& m) -> TagSet& { return m.deprel.post_modifier; }},
      {"deprel", "subordinate", true, false, [](CategoryMap& m) -> TagSet& { return m.deprel.subordinate; }},
      {"deprel", "relative_clause", true, false, [](CategoryMap& m) -> TagSet& { return m.deprel.relative_clause; }},
      {"deprel", "prep_complement", true, false, [](CategoryMap& m) -> TagSet& { return m.deprel.prep_complement; }},
      {"msd", "neuter", true, false, [](CategoryMap& m) -> TagSet& { return m.msd.neuter; }},
      {"msd", "preterite", true, false, [](CategoryMap& m) -> TagSet& { return m.msd.preterite; }},
      {"msd", "present", true, false, [](CategoryMap& m) -> TagSet& { return m.msd.present; }},
      {"msd", "supine", true, false, [](CategoryMap& m) -> TagSet& { return m.msd.supine; }},
      {"msd", "past_participle", true, false, [](CategoryMap& m) -> TagSet& { return m.msd.past_participle; }},
      {"msd", "present_participle", true, false, [](CategoryMap& m) -> TagSet& { return m.msd.present_participle; }},
      {"msd", "passive", false, true, [](CategoryMap& m) -> TagSet& { return m.msd.passive; }},
      {"lexemes", "modal", true, true, [](CategoryMap& m) -> TagSet& { return m.lexemes.modal; }},
      {"lexemes", "pronoun_3sg", true, true, [](CategoryMap& m) -> TagSet& { return m.lexemes.pronoun_3sg; }},
  };
  return slots;
}

}  // namespace

CategoryMap load_category_map(std::istream& in) {
  CategoryMap map;
  const auto& slots = category_slots();
  std::vector<bool> seen(slots.size(), false);
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw FormatError("malformed section header", line_no);
      section = std::string(trim(body.substr(1, body.size() - 2)));
      if (section != "pos" && section != "deprel" && section != "msd" && section != "lexemes")
        map.warnings.push_back("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }
    auto eq = body.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected 'name = values'", line_no);
    std::string_view key = trim(body.substr(0, eq));
    std::size_t slot = slots.size();
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i].section == section && slots[i].key == key) slot = i;
    if (slot == slots.size()) {
      map.warnings.push_back("line " + std::to_string(line_no) + ": unknown category '" +
                             std::string(key) + "' in [" + section + "]");
      continue;
    }
    seen[slot] = true;
    TagSet& set = slots[slot].get(map);
    const bool lexeme = slots[slot].section == "lexemes";
    for (auto v : split(body.substr(eq + 1), ',')) {
      v = trim(v);
      if (!v.empty()) set.insert(lexeme ? utf8_lower(v) : std::string(v));
    }
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].required && !seen[i])
      throw FormatError("missing category: " + std::string(slots[i].key));
    if (seen[i] && !slots[i].may_be_empty && slots[i].get(map).empty())
      throw FormatError("empty category: " + std::string(slots[i].key));
  }
  const std::vector<std::pair<const char*, const TagSet*>> lexical = {
      {"noun", &map.pos.noun}, {"verb", &map.pos.verb},
      {"adjective", &map.pos.adjective}, {"adverb", &map.pos.adverb}};
  for (std::size_t a = 0; a < lexical.size(); ++a)
    for (std::size_t b = a + 1; b < lexical.size(); ++b)
      for (const auto& tag : *lexical[a].second)
        if (lexical[b].second->contains(tag))
          throw FormatError("tag '" + tag + "' is in both " + lexical[a].first + " and " +
                            lexical[b].first);
  return map;
}

CategoryMap load_category_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open category map: " + path);
  try {
    return load_category_map(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_category_map(std::ostream& out, const CategoryMap& map) {
  CategoryMap copy = map;
  std::string_view section;
  for (const auto& slot : category_slots()) {
    const TagSet& set = slot.get(copy);
    if (!slot.required && set.empty()) continue;
    if (slot.section != section) {
      if (!section.empty()) out << '\n';
      section = slot.section;
      out << '[' << section << "]\n";
    }
    out << slot.key << " =";
    bool first = true;
    for (const auto& v : set) {
      out << (first ? " " : ", ") << v;
      first = false;
    }
    out << '\n';
  }
}

}  // namespace cefrlab
