#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "popmc/error.hpp"

namespace popmc {

enum class TokenKind { Identifier, Number, Symbol, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  int line = 1;
  int column = 1;
};

// Shared tokenizer for the model and property languages. `#` starts a
// comment running to end of line.
std::vector<Token> tokenize(std::string_view source);

// Cursor over a token vector with the usual expect/accept helpers.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool at_end() const { return peek().kind == TokenKind::End; }

  bool accept(std::string_view symbol_or_keyword);
  const Token& expect(std::string_view symbol_or_keyword);
  const Token& expect_identifier();
  const Token& expect_number();
  bool check(std::string_view symbol_or_keyword) const;

  [[noreturn]] void fail(const std::string& msg) const;
  [[noreturn]] void fail_at(const Token& tok, const std::string& msg) const;

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace popmc
