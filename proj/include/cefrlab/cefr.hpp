#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cefrlab {

/// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data; carries the 1-based line number when known (0 otherwise).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Ordinal proficiency scale. Numeric values are the ordinal encoding used by
// regression and adjacency computations. C2 only occurs in lexicon entries.
enum class CefrLabel : int { A1 = 1, A2 = 2, B1 = 3, B2 = 4, C1 = 5, C2 = 6 };

inline constexpr std::array<CefrLabel, 5> kClassLevels = {
    CefrLabel::A1, CefrLabel::A2, CefrLabel::B1, CefrLabel::B2, CefrLabel::C1};

inline constexpr std::array<CefrLabel, 6> kLexiconLevels = {
    CefrLabel::A1, CefrLabel::A2, CefrLabel::B1,
    CefrLabel::B2, CefrLabel::C1, CefrLabel::C2};

constexpr int ordinal(CefrLabel l) { return static_cast<int>(l); }

/// 0-based position on the A1..C1 classification scale.
constexpr std::size_t class_index(CefrLabel l) { return static_cast<std::size_t>(ordinal(l) - 1); }

std::string_view to_string(CefrLabel l);

/// Parses "A1".."C2" (case-sensitive). C2 is accepted only when `allow_c2`.
std::optional<CefrLabel> parse_level(std::string_view s, bool allow_c2 = false);

CefrLabel level_from_ordinal(int v);

}  // namespace cefrlab
