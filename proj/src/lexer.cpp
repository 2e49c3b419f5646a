#include "popmc/lexer.hpp"

#include <array>
#include <cctype>

namespace popmc {

std::vector<Token> tokenize(std::string_view src) {
  static constexpr std::array<std::string_view, 8> kTwoChar = {"->", "<=", ">=", "==", "!=", "&&", "||", ".."};
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      tok.kind = TokenKind::Identifier;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.' && !(j + 1 < src.size() && src[j + 1] == '.')) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      tok.kind = TokenKind::Symbol;
      std::size_t len = 1;
      if (i + 1 < src.size()) {
        const std::string_view two = src.substr(i, 2);
        for (auto t : kTwoChar) {
          if (two == t) len = 2;
        }
      }
      static constexpr std::string_view kSingles = ";:,@()[]{}+-*/^=<>!&|.";
      if (len == 1 && kSingles.find(c) == std::string_view::npos) {
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      tok.text = std::string(src.substr(i, len));
      advance(len);
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokenKind::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

const Token& TokenStream::peek(std::size_t ahead) const {
  const std::size_t k = std::min(pos_ + ahead, tokens_.size() - 1);
  return tokens_[k];
}

const Token& TokenStream::next() {
  const Token& t = tokens_[pos_];
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return t;
}

bool TokenStream::check(std::string_view s) const {
  const Token& t = peek();
  return t.kind != TokenKind::End && t.kind != TokenKind::Number && t.text == s;
}

bool TokenStream::accept(std::string_view s) {
  if (!check(s)) return false;
  next();
  return true;
}

const Token& TokenStream::expect(std::string_view s) {
  if (!check(s)) fail("expected '" + std::string(s) + "'");
  return next();
}

const Token& TokenStream::expect_identifier() {
  if (peek().kind != TokenKind::Identifier) fail("expected identifier");
  return next();
}

const Token& TokenStream::expect_number() {
  if (peek().kind != TokenKind::Number) fail("expected number");
  return next();
}

void TokenStream::fail(const std::string& msg) const { fail_at(peek(), msg); }

void TokenStream::fail_at(const Token& tok, const std::string& msg) const {
  std::string found = tok.kind == TokenKind::End ? "end of input" : "'" + tok.text + "'";
  throw ParseError(msg + ", found " + found, tok.line, tok.column);
}

}  // namespace popmc
