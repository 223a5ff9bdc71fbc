#include "cefrlab/corpus.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "cefrlab/text_util.hpp"

namespace cefrlab {

namespace {

enum class UnitKind { None, Text, Sentence };

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

class CorpusReader {
 public:
  Corpus read(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || trim(line).empty()) {
        on_blank();
      } else if (line[0] == '#') {
        on_comment(line);
      } else {
        on_token(line);
      }
    }
    if (!tokens_.empty()) finish_sentence();
    else if (pending_sent_id_) throw FormatError("sentence with zero tokens", sent_id_line_);
    return std::move(corpus_);
  }

 private:
  void on_blank() {
    if (!tokens_.empty()) {
      finish_sentence();
    } else if (pending_sent_id_) {
      throw FormatError("sentence with zero tokens", sent_id_line_);
    }
  }

  void on_comment(const std::string& line) {
    if (!tokens_.empty()) throw FormatError("comment inside a sentence block", line_no_);
    std::string_view body = trim(std::string_view(line).substr(1));
    auto eq = body.find('=');
    if (eq == std::string_view::npos) return;
    std::string_view key = trim(body.substr(0, eq));
    std::string_view value = trim(body.substr(eq + 1));

    if (key == "doc_id") {
      pending_doc_id_ = std::string(value);
      doc_id_line_ = line_no_;
      if (!unit_fresh_) unit_ = UnitKind::Text;
      current_doc_ = std::nullopt;
    } else if (key == "sent_id") {
      pending_sent_id_ = std::string(value);
      sent_id_line_ = line_no_;
    } else if (key == "level") {
      auto lvl = parse_level(value);
      if (!lvl) throw FormatError("unknown level '" + std::string(value) + "'", line_no_);
      level_ = *lvl;
      level_line_ = line_no_;
      level_fresh_ = true;
    } else if (key == "unit") {
      unit_fresh_ = true;
      if (value == "text") {
        unit_ = UnitKind::Text;
      } else if (value == "sentence") {
        unit_ = UnitKind::Sentence;
        current_doc_ = std::nullopt;
      } else {
        throw FormatError("unsupported unit kind '" + std::string(value) + "'", line_no_);
      }
    }
  }

  void on_token(const std::string& line) {
    std::vector<std::string_view> cols = split(line, '\t');
    if (cols.size() != 8)
      throw FormatError("expected 8 tab-separated columns, found " + std::to_string(cols.size()),
                        line_no_);
    AnnotatedToken tok;
    auto index = parse_int(cols[0]);
    if (!index) throw FormatError("non-integer token index '" + std::string(cols[0]) + "'", line_no_);
    if (*index != static_cast<int>(tokens_.size()) + 1)
      throw FormatError("token index " + std::to_string(*index) + " is not contiguous (expected " +
                            std::to_string(tokens_.size() + 1) + ")",
                        line_no_);
    tok.index = *index;
    if (cols[1].empty()) throw FormatError("empty FORM column", line_no_);
    tok.form = std::string(cols[1]);
    tok.lemma = cols[2] == "_" ? std::string() : std::string(cols[2]);
    tok.pos = std::string(cols[3]);
    if (cols[4] != "_" && !cols[4].empty()) {
      for (auto f : split(cols[4], '|'))
        if (!f.empty()) tok.msd.emplace_back(f);
    }
    auto head = parse_int(cols[5]);
    if (!head) throw FormatError("non-integer head '" + std::string(cols[5]) + "'", line_no_);
    if (*head < 0) throw FormatError("negative head", line_no_);
    if (*head == tok.index) throw FormatError("token is its own head", line_no_);
    tok.head = *head;
    tok.deprel = std::string(cols[6]);
    tokens_.push_back(std::move(tok));
    token_lines_.push_back(line_no_);
  }

  void finish_sentence() {
    const int n = static_cast<int>(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].head > n)
        throw FormatError("head " + std::to_string(tokens_[i].head) + " exceeds sentence length " +
                              std::to_string(n),
                          token_lines_[i]);
    }
    const std::size_t first_line = token_lines_.front();

    Sentence s;
    s.tokens = std::move(tokens_);
    tokens_.clear();
    token_lines_.clear();

    if (unit_ == UnitKind::Sentence) {
      if (!level_) throw FormatError("standalone sentence without a level", first_line);
      s.id = pending_sent_id_ ? *pending_sent_id_
                              : "sent" + std::to_string(corpus_.standalone_sentences.size() + 1);
      corpus_.standalone_sentences.push_back({std::move(s), *level_});
      pending_doc_id_.reset();
    } else {
      if (pending_doc_id_) {
        if (!level_fresh_) throw FormatError("document without a level", doc_id_line_);
        Document d;
        d.id = *pending_doc_id_;
        d.level = *level_;
        corpus_.documents.push_back(std::move(d));
        current_doc_ = corpus_.documents.size() - 1;
        pending_doc_id_.reset();
      }
      if (!current_doc_)
        throw FormatError("sentence outside any document (missing doc_id or unit)", first_line);
      Document& d = corpus_.documents[*current_doc_];
      if (level_fresh_ && *level_ != d.level)
        throw FormatError("level change inside document without a new doc_id", level_line_);
      s.id = pending_sent_id_ ? *pending_sent_id_
                              : d.id + "." + std::to_string(d.sentences.size() + 1);
      d.sentences.push_back(std::move(s));
    }
    pending_sent_id_.reset();
    level_fresh_ = false;
    unit_fresh_ = false;
  }

  Corpus corpus_;
  std::size_t line_no_ = 0;
  std::vector<AnnotatedToken> tokens_;
  std::vector<std::size_t> token_lines_;

  UnitKind unit_ = UnitKind::None;
  std::optional<CefrLabel> level_;
  std::size_t level_line_ = 0;
  bool level_fresh_ = false;  // level comment seen since the last sentence block
  bool unit_fresh_ = false;
  std::optional<std::string> pending_doc_id_;
  std::size_t doc_id_line_ = 0;
  std::optional<std::string> pending_sent_id_;
  std::size_t sent_id_line_ = 0;
  std::optional<std::size_t> current_doc_;
};

void write_sentence(std::ostream& out, const Sentence& s) {
  out << "# sent_id = " << s.id << '\n';
  for (const auto& t : s.tokens) {
    out << t.index << '\t' << t.form << '\t' << (t.lemma.empty() ? "_" : t.lemma) << '\t' << t.pos
        << '\t';
    if (t.msd.empty()) {
      out << '_';
    } else {
      for (std::size_t i = 0; i < t.msd.size(); ++i) out << (i ? "|" : "") << t.msd[i];
    }
    out << '\t' << t.head << '\t' << t.deprel << "\t_\n";
  }
  out << '\n';
}

void check_sentence(const Sentence& s, std::vector<Issue>& issues) {
  const int n = static_cast<int>(s.tokens.size());
  if (n == 0) {
    issues.push_back({Severity::Error, "empty sentence", s.id, ""});
    return;
  }
  std::set<int> seen;
  bool indices_ok = true;
  for (int i = 0; i < n; ++i) {
    const auto& t = s.tokens[i];
    if (!seen.insert(t.index).second) {
      issues.push_back({Severity::Error, "duplicate index", s.id, std::to_string(t.index)});
      indices_ok = false;
    } else if (t.index != i + 1) {
      issues.push_back({Severity::Error, "non-contiguous index", s.id, std::to_string(t.index)});
      indices_ok = false;
    }
  }
  int roots = 0;
  bool heads_ok = true;
  for (const auto& t : s.tokens) {
    if (t.head == 0) ++roots;
    if (t.head < 0 || t.head > n || t.head == t.index) {
      issues.push_back({Severity::Error, "invalid head", s.id,
                        "token " + std::to_string(t.index) + " head " + std::to_string(t.head)});
      heads_ok = false;
    }
  }
  if (roots == 0) issues.push_back({Severity::Error, "missing root", s.id, ""});
  if (roots > 1)
    issues.push_back({Severity::Warning, "multiple roots", s.id, std::to_string(roots) + " roots"});
  if (!indices_ok || !heads_ok || roots == 0) return;
  for (const auto& t : s.tokens) {
    int cur = t.index;
    int steps = 0;
    while (cur != 0 && steps <= n) {
      cur = s.tokens[cur - 1].head;
      ++steps;
    }
    if (cur != 0) {
      issues.push_back({Severity::Error, "not a tree", s.id,
                        "cycle through token " + std::to_string(t.index)});
      return;
    }
  }
}

}  // namespace

Corpus parse_corpus(std::istream& in) { return CorpusReader().read(in); }

Corpus parse_corpus_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  try {
    return parse_corpus(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus.documents) {
    out << "# doc_id = " << d.id << "\n# unit = text\n# level = " << to_string(d.level) << '\n';
    for (const auto& s : d.sentences) write_sentence(out, s);
  }
  for (const auto& ls : corpus.standalone_sentences) {
    out << "# unit = sentence\n# level = " << to_string(ls.level) << '\n';
    write_sentence(out, ls.sentence);
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  return out.str();
}

std::string format_issue(const Issue& issue) {
  std::string s = issue.severity == Severity::Error ? "error" : "warning";
  s += '\t' + issue.kind + '\t' + issue.unit_id;
  if (!issue.detail.empty()) s += '\t' + issue.detail;
  return s;
}

std::vector<Issue> validate_corpus(const Corpus& corpus) {
  std::vector<Issue> issues;
  for (const auto& d : corpus.documents) {
    if (d.sentences.empty()) issues.push_back({Severity::Error, "empty document", d.id, ""});
    if (ordinal(d.level) > ordinal(CefrLabel::C1))
      issues.push_back({Severity::Error, "invalid level", d.id, std::string(to_string(d.level))});
    for (const auto& s : d.sentences) check_sentence(s, issues);
  }
  for (const auto& ls : corpus.standalone_sentences) {
    if (ordinal(ls.level) > ordinal(CefrLabel::C1))
      issues.push_back(
          {Severity::Error, "invalid level", ls.sentence.id, std::string(to_string(ls.level))});
    check_sentence(ls.sentence, issues);
  }
  return issues;
}

bool is_clean(const std::vector<Issue>& issues) {
  for (const auto& i : issues)
    if (i.severity == Severity::Error) return false;
  return true;
}

std::vector<LevelStats> corpus_stats(const Corpus& corpus) {
  std::vector<LevelStats> rows;
  std::array<std::size_t, 5> sent_total{};
  for (CefrLabel l : kClassLevels) rows.push_back({std::string(to_string(l)), 0, 0.0, 0});
  for (const auto& d : corpus.documents) {
    if (ordinal(d.level) > 5) continue;
    auto i = class_index(d.level);
    rows[i].texts += 1;
    sent_total[i] += d.sentences.size();
  }
  for (const auto& ls : corpus.standalone_sentences)
    if (ordinal(ls.level) <= 5) rows[class_index(ls.level)].sentences += 1;

  LevelStats total{"Total", 0, 0.0, 0};
  std::size_t all_sents = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].texts > 0)
      rows[i].mean_sentences = static_cast<double>(sent_total[i]) / static_cast<double>(rows[i].texts);
    total.texts += rows[i].texts;
    total.sentences += rows[i].sentences;
    all_sents += sent_total[i];
  }
  if (total.texts > 0) total.mean_sentences = static_cast<double>(all_sents) / static_cast<double>(total.texts);
  rows.push_back(total);
  return rows;
}

void write_stats_tsv(std::ostream& out, const std::vector<LevelStats>& rows) {
  out << "level\ttexts\tmean_sentences\tsentences\n";
  for (const auto& r : rows) {
    out << r.label << '\t' << r.texts << '\t' << std::fixed << std::setprecision(2)
        << r.mean_sentences << std::defaultfloat << '\t' << r.sentences << '\n';
  }
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string utf8_lower(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(out[i]);
    if (c >= 'A' && c <= 'Z') {
      out[i] = static_cast<char>(c + 32);
    } else if (c == 0xC3 && i + 1 < out.size()) {
      unsigned char d = static_cast<unsigned char>(out[i + 1]);
      if (d >= 0x80 && d <= 0x9E && d != 0x97) out[i + 1] = static_cast<char>(d + 0x20);
      ++i;
    }
  }
  return out;
}

}  // namespace cefrlab
