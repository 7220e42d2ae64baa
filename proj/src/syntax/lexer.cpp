#include "lexer.hpp"

#include <array>
#include <cctype>

namespace fmlog::syntax {

namespace {

constexpr std::array<std::string_view, 14> kKeywords = {
    "define", "type", "declare", "fun", "input", "output", "match",
    "with",   "end",  "let",     "in",  "if",    "then",   "else",
};

// Longest first.
constexpr std::array<std::string_view, 21> kPuncts = {
    ":-", "=>", "==", "!=", "<=", ">=", "(", ")", ",", ".", ":",
    "|",  "=",  "!",  "<",  ">",  "+", "-", "*", "/", "%",
};

bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

bool isKeyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

std::vector<Token> tokenize(std::string_view src, ErrorKind errorKind) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }

    Token tok;
    tok.loc = {line, col};
    std::size_t start = i;

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() && identChar(src[i])) advance(1);
      tok.text = std::string(src.substr(start, i - start));
      tok.kind = (std::isupper(static_cast<unsigned char>(c)) || c == '_') ? Token::Kind::Var : Token::Kind::Ident;
    } else if (c == '\'') {
      advance(1);
      if (i >= src.size() || !std::isalpha(static_cast<unsigned char>(src[i])))
        throw Error(errorKind, "expected type variable name after '", tok.loc);
      while (i < src.size() && identChar(src[i])) advance(1);
      tok.text = std::string(src.substr(start, i - start));
      tok.kind = Token::Kind::TyVar;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::uint64_t v = 0;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
        v = v * 10 + static_cast<std::uint64_t>(src[i] - '0');
        if (v > 2147483648ULL) throw Error(errorKind, "integer literal out of 32-bit range", tok.loc);
        advance(1);
      }
      if (i < src.size() && identChar(src[i])) throw Error(errorKind, "malformed integer literal", tok.loc);
      tok.text = std::string(src.substr(start, i - start));
      tok.magnitude = v;
      tok.kind = Token::Kind::Int;
    } else if (c == '"') {
      advance(1);
      std::string value;
      bool closed = false;
      while (i < src.size()) {
        char d = src[i];
        if (d == '"') {
          advance(1);
          closed = true;
          break;
        }
        if (d == '\\') {
          if (i + 1 >= src.size() || (src[i + 1] != '"' && src[i + 1] != '\\'))
            throw Error(errorKind, "unsupported escape in string literal", {line, col});
          value.push_back(src[i + 1]);
          advance(2);
          continue;
        }
        value.push_back(d);
        advance(1);
      }
      if (!closed) throw Error(errorKind, "unterminated string literal", tok.loc);
      tok.text = std::move(value);
      tok.kind = Token::Kind::Str;
    } else {
      bool matched = false;
      for (auto p : kPuncts) {
        if (src.substr(i, p.size()) == p) {
          tok.text = std::string(p);
          tok.kind = Token::Kind::Punct;
          advance(p.size());
          matched = true;
          break;
        }
      }
      if (!matched) throw Error(errorKind, std::string("unexpected character '") + c + "'", tok.loc);
    }
    out.push_back(std::move(tok));
  }

  Token end;
  end.kind = Token::Kind::End;
  end.loc = {line, col};
  out.push_back(end);
  return out;
}

}  // namespace fmlog::syntax
