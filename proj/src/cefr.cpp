#include "cefrlab/cefr.hpp"

namespace cefrlab {

std::string_view to_string(CefrLabel l) {
  switch (l) {
    case CefrLabel::A1: return "A1";
    case CefrLabel::A2: return "A2";
    case CefrLabel::B1: return "B1";
    case CefrLabel::B2: return "B2";
    case CefrLabel::C1: return "C1";
    case CefrLabel::C2: return "C2";
  }
  return "?";
}

std::optional<CefrLabel> parse_level(std::string_view s, bool allow_c2) {
  if (s == "A1") return CefrLabel::A1;
  if (s == "A2") return CefrLabel::A2;
  if (s == "B1") return CefrLabel::B1;
  if (s == "B2") return CefrLabel::B2;
  if (s == "C1") return CefrLabel::C1;
  if (allow_c2 && s == "C2") return CefrLabel::C2;
  return std::nullopt;
}

CefrLabel level_from_ordinal(int v) {
  if (v < 1 || v > 6) throw Error("level ordinal out of range: " + std::to_string(v));
  return static_cast<CefrLabel>(v);
}

}  // namespace cefrlab
