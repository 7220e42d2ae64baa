#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fmlog/error.hpp"

namespace fmlog::syntax {

struct Token {
  enum class Kind { Ident, Var, TyVar, Int, Str, Punct, End };

  Kind kind = Kind::End;
  std::string text;
  // Int literals hold their magnitude; the sign is handled by the parser.
  std::uint64_t magnitude = 0;
  Location loc;

  bool is(Kind k, std::string_view t) const { return kind == k && text == t; }
  bool punct(std::string_view t) const { return is(Kind::Punct, t); }
  bool keyword(std::string_view t) const { return is(Kind::Ident, t); }
};

/// Splits `source` into tokens; the last token is always End. Throws
/// `errorKind` on malformed input.
std::vector<Token> tokenize(std::string_view source, ErrorKind errorKind = ErrorKind::SyntaxError);

bool isKeyword(std::string_view word);

}  // namespace fmlog::syntax
