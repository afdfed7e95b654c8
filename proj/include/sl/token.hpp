#pragma once

#include <string>

namespace sl {

enum class Tok {
  Ident,
  IntLit,
  FloatLit,
  StrLit,
  Newline,
  Eof,
  // keywords
  KwFn,
  KwWhile,
  KwIf,
  KwElse,
  KwReturn,
  KwBreak,
  KwContinue,
  KwTrue,
  KwFalse,
  KwAnd,
  KwOr,
  KwNot,
  // punctuation
  LParen,
  RParen,
  LBracket,
  RBracket,
  LBrace,
  RBrace,
  Comma,
  Dot,
  Colon,
  Semicolon,
  Amp,
  Assign,
  PlusEq,
  MinusEq,
  StarEq,
  SlashEq,
  Plus,
  Minus,
  Star,
  Slash,
  Lt,
  Le,
  Gt,
  Ge,
  EqEq,
  Ne,
};

const char* tok_name(Tok t);

struct Token {
  Tok kind;
  std::string lexeme;  // exact source slice
  std::string text;    // decoded value for StrLit, otherwise empty
  int line = 1;        // 1-based
  int column = 1;      // 1-based

  bool is_keyword() const {
    return kind >= Tok::KwFn && kind <= Tok::KwNot;
  }
};

}  // namespace sl
