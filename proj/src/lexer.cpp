#include "sl/lexer.hpp"

#include <cctype>
#include <unordered_map>

#include "sl/diag.hpp"

namespace sl {

namespace {

const std::unordered_map<std::string_view, Tok>& keyword_table() {
  static const std::unordered_map<std::string_view, Tok> table = {
      {"fn", Tok::KwFn},         {"while", Tok::KwWhile},
      {"if", Tok::KwIf},         {"else", Tok::KwElse},
      {"return", Tok::KwReturn}, {"break", Tok::KwBreak},
      {"continue", Tok::KwContinue}, {"true", Tok::KwTrue},
      {"false", Tok::KwFalse},   {"and", Tok::KwAnd},
      {"or", Tok::KwOr},         {"not", Tok::KwNot},
  };
  return table;
}

bool is_ident_start(char c) {
  return c == '_' || std::isalpha(static_cast<unsigned char>(c));
}

bool is_ident_part(char c) {
  return c == '_' || std::isalnum(static_cast<unsigned char>(c));
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct Lexer {
  std::string_view src;
  size_t pos = 0;
  int line = 1;
  int col = 1;
  std::vector<Token> out;

  char peek(size_t k = 0) const {
    return pos + k < src.size() ? src[pos + k] : '\0';
  }

  void bump() {
    if (src[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  [[noreturn]] void fail(int l, int c, std::string msg) {
    throw CompileError(Diag{DiagKind::LexError, {l, c}, std::move(msg), {}});
  }

  void push(Tok kind, size_t start, int l, int c, std::string text = {}) {
    out.push_back(Token{kind, std::string(src.substr(start, pos - start)),
                        std::move(text), l, c});
  }

  void run() {
    while (pos < src.size()) {
      char ch = peek();
      int l = line, c = col;
      size_t start = pos;

      if (ch == '\n') {
        bump();
        out.push_back(Token{Tok::Newline, "\n", {}, l, c});
        continue;
      }
      if (ch == ' ' || ch == '\t' || ch == '\r') {
        bump();
        continue;
      }
      if (ch == '#') {
        while (pos < src.size() && peek() != '\n') bump();
        continue;
      }
      if (is_ident_start(ch)) {
        while (pos < src.size() && is_ident_part(peek())) bump();
        auto word = src.substr(start, pos - start);
        auto it = keyword_table().find(word);
        push(it != keyword_table().end() ? it->second : Tok::Ident, start, l, c);
        continue;
      }
      if (is_digit(ch)) {
        while (is_digit(peek())) bump();
        bool is_float = false;
        if (peek() == '.' && is_digit(peek(1))) {
          is_float = true;
          bump();  // '.'
          while (is_digit(peek())) bump();
          if (peek() == 'e' || peek() == 'E') {
            size_t save = pos;
            int save_line = line, save_col = col;
            bump();
            if (peek() == '+' || peek() == '-') bump();
            if (is_digit(peek())) {
              while (is_digit(peek())) bump();
            } else {
              pos = save;
              line = save_line;
              col = save_col;
            }
          }
        }
        push(is_float ? Tok::FloatLit : Tok::IntLit, start, l, c);
        continue;
      }
      if (ch == '"') {
        bump();
        std::string decoded;
        while (true) {
          if (pos >= src.size() || peek() == '\n')
            fail(l, c, "unterminated string literal");
          char d = peek();
          if (d == '"') {
            bump();
            break;
          }
          if (d == '\\') {
            bump();
            if (pos >= src.size()) fail(l, c, "unterminated string literal");
            char e = peek();
            switch (e) {
              case 'n': decoded += '\n'; break;
              case 't': decoded += '\t'; break;
              case 'r': decoded += '\r'; break;
              case '"': decoded += '"'; break;
              case '\\': decoded += '\\'; break;
              default:
                fail(line, col, std::string("unknown escape '\\") + e + "'");
            }
            bump();
            continue;
          }
          decoded += d;
          bump();
        }
        push(Tok::StrLit, start, l, c, std::move(decoded));
        continue;
      }

      auto two = src.substr(pos, 2);
      Tok kind;
      if (two == "*=") kind = Tok::StarEq;
      else if (two == "/=") kind = Tok::SlashEq;
      else if (two == "+=") kind = Tok::PlusEq;
      else if (two == "-=") kind = Tok::MinusEq;
      else if (two == "==") kind = Tok::EqEq;
      else if (two == "!=") kind = Tok::Ne;
      else if (two == "<=") kind = Tok::Le;
      else if (two == ">=") kind = Tok::Ge;
      else {
        switch (ch) {
          case '(': kind = Tok::LParen; break;
          case ')': kind = Tok::RParen; break;
          case '[': kind = Tok::LBracket; break;
          case ']': kind = Tok::RBracket; break;
          case '{': kind = Tok::LBrace; break;
          case '}': kind = Tok::RBrace; break;
          case ',': kind = Tok::Comma; break;
          case '.': kind = Tok::Dot; break;
          case ':': kind = Tok::Colon; break;
          case ';': kind = Tok::Semicolon; break;
          case '&': kind = Tok::Amp; break;
          case '=': kind = Tok::Assign; break;
          case '+': kind = Tok::Plus; break;
          case '-': kind = Tok::Minus; break;
          case '*': kind = Tok::Star; break;
          case '/': kind = Tok::Slash; break;
          case '<': kind = Tok::Lt; break;
          case '>': kind = Tok::Gt; break;
          default:
            fail(l, c, std::string("unknown character '") + ch + "'");
        }
        bump();
        push(kind, start, l, c);
        continue;
      }
      bump();
      bump();
      push(kind, start, l, c);
    }
    out.push_back(Token{Tok::Eof, "", {}, line, col});
  }
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
  Lexer lx{source, 0, 1, 1, {}};
  lx.run();
  return std::move(lx.out);
}

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::IntLit: return "integer literal";
    case Tok::FloatLit: return "float literal";
    case Tok::StrLit: return "string literal";
    case Tok::Newline: return "newline";
    case Tok::Eof: return "end of input";
    case Tok::KwFn: return "'fn'";
    case Tok::KwWhile: return "'while'";
    case Tok::KwIf: return "'if'";
    case Tok::KwElse: return "'else'";
    case Tok::KwReturn: return "'return'";
    case Tok::KwBreak: return "'break'";
    case Tok::KwContinue: return "'continue'";
    case Tok::KwTrue: return "'true'";
    case Tok::KwFalse: return "'false'";
    case Tok::KwAnd: return "'and'";
    case Tok::KwOr: return "'or'";
    case Tok::KwNot: return "'not'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::Semicolon: return "';'";
    case Tok::Amp: return "'&'";
    case Tok::Assign: return "'='";
    case Tok::PlusEq: return "'+='";
    case Tok::MinusEq: return "'-='";
    case Tok::StarEq: return "'*='";
    case Tok::SlashEq: return "'/='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::EqEq: return "'=='";
    case Tok::Ne: return "'!='";
  }
  return "?";
}

}  // namespace sl
