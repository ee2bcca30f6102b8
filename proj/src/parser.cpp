#include "munity/parser.hpp"

#include <cctype>
#include <cstring>
#include <functional>
#include <set>

namespace munity {

namespace {

struct Spelling {
  const char* src;
  Tok kind;
  const char* text;
};

// Longest spellings first within each leading byte.
const Spelling kSpellings[] = {
    {"\xCE\xBB", Tok::Ident, "lambda"},      // λ
    {"\xE2\x8A\xA5", Tok::Ident, "null"},    // ⊥
    {"\xE2\x88\xA7", Tok::Ident, "and"},     // ∧
    {"\xE2\x88\xA8", Tok::Ident, "or"},      // ∨
    {"\xC2\xAC", Tok::Ident, "not"},         // ¬
    {"\xE2\x87\x92", Tok::Ident, "implies"}, // ⇒
    {"\xE2\x89\xA0", Tok::Punct, "/="},      // ≠
    {"\xE2\x89\xA4", Tok::Punct, "<="},      // ≤
    {"\xE2\x89\xA5", Tok::Punct, ">="},      // ≥
    {"\xE2\x89\xA1", Tok::Punct, "=="},      // ≡
    {"\xE2\x80\xA2", Tok::Punct, "++"},      // •
    {"\xE2\x88\xA5", Tok::Punct, "||"},      // ∥
    {"\xE2\x9F\xA8", Tok::Punct, "<"},       // ⟨
    {"\xE2\x9F\xA9", Tok::Punct, ">"},       // ⟩
    {"\xC3\x97", Tok::Punct, "*"},           // ×
    {"\xE2\x88\x92", Tok::Punct, "-"},       // −
    {":=", Tok::Punct, ":="},
    {"::", Tok::Punct, "::"},
    {"||", Tok::Punct, "||"},
    {"++", Tok::Punct, "++"},
    {"/=", Tok::Punct, "/="},
    {"!=", Tok::Punct, "/="},
    {"<=", Tok::Punct, "<="},
    {">=", Tok::Punct, ">="},
    {"==", Tok::Punct, "=="},
    {"=>", Tok::Punct, "=>"},
    {"/\\", Tok::Ident, "and"},
    {"\\/", Tok::Ident, "or"},
    {"~", Tok::Ident, "not"},
};

const char kSingles[] = "()[],;.:+-*/=<>";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

const std::set<std::string> kReserved = {
    "and", "or", "not", "implies", "mod", "if", "then", "else", "true", "false",
    "null", "rec", "program", "system", "end", "declare", "always", "initially",
    "assign", "components", "interactions", "priority", "inhibit", "when",
    "reacts-to"};

const std::set<std::string> kSectionWords = {
    "declare", "always", "initially", "assign", "end", "components",
    "interactions", "program"};

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    SourcePos pos{line, col};
    if (c == '{') {
      std::size_t close = text.find('}', i);
      if (close == std::string_view::npos) throw ParseError(pos, "unterminated comment");
      advance(close - i + 1);
      continue;
    }
    Token t;
    t.pos = pos;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(text.substr(i, j - i));
      if (t.text == "reacts" && text.substr(j, 3) == "-to" &&
          (j + 3 >= text.size() || !ident_char(text[j + 3]))) {
        j += 3;
        t.text = "reacts-to";
      }
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      std::int64_t v = 0;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
        if (v > (INT64_MAX - (text[j] - '0')) / 10)
          throw ParseError(pos, "integer literal out of range");
        v = v * 10 + (text[j] - '0');
        ++j;
      }
      t.kind = Tok::Int;
      t.ival = v;
      t.text = std::string(text.substr(i, j - i));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '#' || c == '@') {
      std::size_t j = i + 1;
      while (j < text.size() && ident_char(text[j])) ++j;
      if (j == i + 1) throw ParseError(pos, std::string("expected name after '") + c + "'");
      t.kind = c == '#' ? Tok::Symbol : Tok::Location;
      t.text = std::string(text.substr(i + 1, j - i - 1));
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    bool matched = false;
    for (const auto& sp : kSpellings) {
      std::size_t n = std::strlen(sp.src);
      if (text.substr(i, n) == sp.src) {
        t.kind = sp.kind;
        t.text = sp.text;
        advance(n);
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::strchr(kSingles, c) != nullptr) {
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      advance(1);
      out.push_back(std::move(t));
      continue;
    }
    throw ParseError(pos, std::string("unexpected character '") + c + "'");
  }
  Token end;
  end.kind = Tok::End;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::map<std::string, bool> programs)
      : toks_(tokenize(text)), programs_(std::move(programs)) {
    // Pre-scan program headers so qualified references parse correctly.
    for (std::size_t i = 0; i + 1 < toks_.size(); ++i) {
      if (is_ident(toks_[i], "program") && toks_[i + 1].kind == Tok::Ident) {
        bool params = i + 2 < toks_.size() && is_punct(toks_[i + 2], "(");
        programs_[toks_[i + 1].text] = params;
      }
    }
  }

  // ---- token helpers ----
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  static bool is_punct(const Token& t, const char* s) {
    return t.kind == Tok::Punct && t.text == s;
  }
  static bool is_ident(const Token& t, const char* s) {
    return t.kind == Tok::Ident && t.text == s;
  }
  bool at_punct(const char* s, std::size_t k = 0) const { return is_punct(peek(k), s); }
  bool at_word(const char* s, std::size_t k = 0) const { return is_ident(peek(k), s); }
  bool at_end() const { return peek().kind == Tok::End; }

  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept_punct(const char* s) {
    if (!at_punct(s)) return false;
    next();
    return true;
  }
  bool accept_word(const char* s) {
    if (!at_word(s)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }
  [[noreturn]] static void fail_at(const Token& t, const std::string& msg) {
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.pos, msg + ", found " + found);
  }
  void expect_punct(const char* s) {
    if (!accept_punct(s)) fail(std::string("expected '") + s + "'");
  }
  void expect_word(const char* s) {
    if (!accept_word(s)) fail(std::string("expected '") + s + "'");
  }
  std::string expect_name(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || kReserved.count(t.text))
      fail(std::string("expected ") + what);
    next();
    return t.text;
  }
  std::string dashed_name(const char* what) {
    std::string s = expect_name(what);
    while (at_punct("-") && peek(1).kind == Tok::Ident) {
      next();
      s += "-" + next().text;
    }
    return s;
  }

  bool is_program(const std::string& name) const { return programs_.count(name) > 0; }
  bool program_has_params(const std::string& name) const {
    auto it = programs_.find(name);
    return it != programs_.end() && it->second;
  }

  bool can_start_operand(const Token& t) const {
    switch (t.kind) {
      case Tok::Int: case Tok::Symbol: case Tok::Location: return true;
      case Tok::Punct: return t.text == "(" || t.text == "[" || t.text == "-";
      case Tok::Ident:
        if (!kReserved.count(t.text)) return true;
        return t.text == "true" || t.text == "false" || t.text == "null" ||
               t.text == "not" || t.text == "if" || t.text == "rec";
      default: return false;
    }
  }

  // ---- expressions ----
  Expr expr() { return implies(); }

  Expr implies() {
    Expr lhs = disj();
    if (at_word("implies")) {
      SourcePos p = next().pos;
      return Expr::binary(Op::Implies, lhs, implies(), p);
    }
    return lhs;
  }
  Expr disj() {
    Expr lhs = conj();
    while (at_word("or")) {
      SourcePos p = next().pos;
      lhs = Expr::binary(Op::Or, lhs, conj(), p);
    }
    return lhs;
  }
  Expr conj() {
    Expr lhs = negation();
    while (at_word("and")) {
      SourcePos p = next().pos;
      lhs = Expr::binary(Op::And, lhs, negation(), p);
    }
    return lhs;
  }
  Expr negation() {
    if (at_word("not")) {
      SourcePos p = next().pos;
      return Expr::unary(Op::Not, negation(), p);
    }
    return compare();
  }
  Expr compare() {
    Expr lhs = additive();
    static const std::pair<const char*, Op> ops[] = {
        {"=", Op::Eq}, {"/=", Op::Ne}, {"<", Op::Lt}, {"<=", Op::Le},
        {">=", Op::Ge}};
    for (const auto& [s, op] : ops) {
      if (at_punct(s)) {
        SourcePos p = next().pos;
        return Expr::binary(op, lhs, additive(), p);
      }
    }
    if (at_punct(">") && can_start_operand(peek(1))) {
      // `>` also closes families and transactions; treat it as a comparison
      // only when a full operand follows.
      std::size_t save = pos_;
      SourcePos p = next().pos;
      try {
        Expr rhs = additive();
        return Expr::binary(Op::Gt, lhs, rhs, p);
      } catch (const ParseError&) {
        pos_ = save;
      }
    }
    return lhs;
  }
  Expr additive() {
    Expr lhs = multiplicative();
    for (;;) {
      Op op;
      if (at_punct("+")) op = Op::Add;
      else if (at_punct("-")) op = Op::Sub;
      else if (at_punct("++")) op = Op::Append;
      else return lhs;
      SourcePos p = next().pos;
      lhs = Expr::binary(op, lhs, multiplicative(), p);
    }
  }
  Expr multiplicative() {
    Expr lhs = unary_minus();
    for (;;) {
      Op op;
      if (at_punct("*")) op = Op::Mul;
      else if (at_punct("/")) op = Op::Div;
      else if (at_word("mod")) op = Op::Mod;
      else return lhs;
      SourcePos p = next().pos;
      lhs = Expr::binary(op, lhs, unary_minus(), p);
    }
  }
  Expr unary_minus() {
    if (at_punct("-")) {
      SourcePos p = next().pos;
      return Expr::unary(Op::Neg, unary_minus(), p);
    }
    return postfix(primary());
  }
  Expr postfix(Expr e) {
    for (;;) {
      if (at_punct(".") && peek(1).kind == Tok::Ident) {
        SourcePos p = next().pos;
        ExprNode n;
        n.kind = ExprKind::Field;
        n.pos = p;
        n.name = next().text;
        n.args.push_back(e);
        e = Expr::make(std::move(n));
      } else if (at_punct("[")) {
        SourcePos p = next().pos;
        ExprNode n;
        n.kind = ExprKind::Index;
        n.pos = p;
        n.args.push_back(e);
        n.args.push_back(expr());
        expect_punct("]");
        e = Expr::make(std::move(n));
      } else {
        return e;
      }
    }
  }
  std::vector<Expr> call_args() {
    std::vector<Expr> args;
    expect_punct("(");
    if (!at_punct(")")) {
      do {
        args.push_back(expr());
      } while (accept_punct(","));
    }
    expect_punct(")");
    return args;
  }
  Expr primary() {
    const Token& t = peek();
    SourcePos p = t.pos;
    switch (t.kind) {
      case Tok::Int: next(); return Expr::literal(Value::integer(t.ival), p);
      case Tok::Symbol: next(); return Expr::literal(Value::symbol(t.text), p);
      case Tok::Location: next(); return Expr::literal(Value::location(t.text), p);
      case Tok::End: fail("expected expression");
      case Tok::Punct:
        if (t.text == "(") {
          next();
          Expr e = expr();
          expect_punct(")");
          return e;
        }
        if (t.text == "[") {
          next();
          ExprNode n;
          n.kind = ExprKind::SeqLit;
          n.pos = p;
          if (!at_punct("]")) {
            do {
              n.args.push_back(expr());
            } while (accept_punct(","));
          }
          expect_punct("]");
          return Expr::make(std::move(n));
        }
        fail("expected expression");
      case Tok::Ident: break;
    }
    const std::string& w = t.text;
    if (w == "true" || w == "false") {
      next();
      return Expr::literal(Value::boolean(w == "true"), p);
    }
    if (w == "null") {
      next();
      return Expr::literal(Value::bottom(), p);
    }
    if (w == "if") {
      next();
      ExprNode n;
      n.kind = ExprKind::Cond;
      n.pos = p;
      n.args.push_back(expr());
      expect_word("then");
      n.args.push_back(expr());
      expect_word("else");
      n.args.push_back(expr());
      return Expr::make(std::move(n));
    }
    if (w == "rec" && at_punct("(", 1)) {
      next();
      next();
      ExprNode n;
      n.kind = ExprKind::RecordLit;
      n.pos = p;
      if (!at_punct(")")) {
        do {
          n.fields.push_back(expect_name("field name"));
          expect_punct(":");
          n.args.push_back(expr());
        } while (accept_punct(","));
      }
      expect_punct(")");
      return Expr::make(std::move(n));
    }
    if (kReserved.count(w)) fail("expected expression");
    next();
    if (is_program(w)) {
      bool with_args = at_punct("(");
      if (with_args || !program_has_params(w)) {
        ExprNode n;
        n.kind = ExprKind::InstanceRef;
        n.pos = p;
        n.program = w;
        if (with_args) n.args = call_args();
        if (at_punct(".") && peek(1).kind == Tok::Ident) {
          next();
          n.kind = ExprKind::Qualified;
          n.name = next().text;
        }
        return Expr::make(std::move(n));
      }
    }
    if (at_punct("(")) {
      ExprNode n;
      n.kind = ExprKind::Call;
      n.pos = p;
      n.name = w;
      n.builtin = builtin_by_name(w);
      n.args = call_args();
      return Expr::make(std::move(n));
    }
    return Expr::var(w, p);
  }

  // ---- types and sections ----
  TypeSpec type() {
    TypeSpec t;
    std::string w = expect_name_or_word("type");
    if (w == "boolean" || w == "bool") t.kind = TypeSpec::Kind::Bool;
    else if (w == "integer" || w == "int") t.kind = TypeSpec::Kind::Int;
    else if (w == "location") t.kind = TypeSpec::Kind::Location;
    else if (w == "address") t.kind = TypeSpec::Kind::Address;
    else if (w == "message") t.kind = TypeSpec::Kind::Message;
    else if (w == "record") t.kind = TypeSpec::Kind::Record;
    else if (w == "any") t.kind = TypeSpec::Kind::Any;
    else if (w == "queue") {
      t.kind = TypeSpec::Kind::Queue;
      expect_word("of");
      t.elem.push_back(type());
    } else if (w == "array") {
      t.kind = TypeSpec::Kind::Array;
      expect_punct("[");
      t.size = expr();
      expect_punct("]");
      expect_word("of");
      t.elem.push_back(type());
    } else {
      throw ParseError(toks_[pos_ - 1].pos, "unknown type '" + w + "'");
    }
    return t;
  }
  std::string expect_name_or_word(const char* what) {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    return next().text;
  }

  bool at_section_word() const {
    return peek().kind == Tok::Ident && kSectionWords.count(peek().text);
  }
  bool at_entry_name() const {
    const Token& t = peek();
    return t.kind == Tok::Ident && (t.text == "lambda" || !kReserved.count(t.text));
  }

  void declare_section(ProgramDef& prog) {
    while (accept_punct("||") || accept_punct(";") || at_entry_name()) {
      if (!at_entry_name()) continue;
      Decl d;
      d.pos = peek().pos;
      do {
        d.names.push_back(expect_name("variable name"));
      } while (accept_punct(","));
      expect_punct(":");
      d.type = type();
      prog.declare.push_back(std::move(d));
    }
  }
  void always_section(ProgramDef& prog) {
    while (accept_punct("||") || accept_punct(";") || at_entry_name()) {
      if (!at_entry_name()) continue;
      Alias a;
      a.pos = peek().pos;
      a.name = expect_name("alias name");
      expect_punct("==");
      a.value = expr();
      prog.always.push_back(std::move(a));
    }
  }
  void initially_section(ProgramDef& prog) {
    while (accept_punct("||") || accept_punct(";") || at_entry_name()) {
      if (!at_entry_name()) continue;
      Init in;
      in.pos = peek().pos;
      in.name = next().text;
      expect_punct("=");
      in.value = expr();
      prog.initially.push_back(std::move(in));
    }
  }

  // ---- statements ----
  LValue lvalue() {
    LValue lv;
    lv.pos = peek().pos;
    if ((at_word("head") || at_word("at")) && at_punct("(", 1)) {
      bool head = next().text == "head";
      next();
      lv = lvalue();
      Selector s;
      s.kind = head ? Selector::Kind::Head : Selector::Kind::At;
      if (!head) {
        expect_punct(",");
        s.index = expr();
      }
      expect_punct(")");
      lv.path.push_back(std::move(s));
    } else {
      const Token& t = peek();
      if (t.kind != Tok::Ident || (kReserved.count(t.text) && t.text != "lambda"))
        fail("expected assignment target");
      next();
      if (is_program(t.text) && (at_punct("(") || at_punct("."))) {
        lv.qualified = true;
        lv.program = t.text;
        if (at_punct("(")) lv.args = call_args();
        expect_punct(".");
        lv.var = expect_name("variable name");
      } else {
        lv.var = t.text;
      }
    }
    for (;;) {
      if (at_punct(".") && peek(1).kind == Tok::Ident) {
        next();
        Selector s;
        s.kind = Selector::Kind::Field;
        s.field = next().text;
        lv.path.push_back(std::move(s));
      } else if (at_punct("[")) {
        next();
        Selector s;
        s.kind = Selector::Kind::Index;
        s.index = expr();
        expect_punct("]");
        lv.path.push_back(std::move(s));
      } else {
        return lv;
      }
    }
  }

  Expr guard_expr(const Token& kw) {
    if (!can_start_operand(peek()))
      throw ParseError(kw.pos, "missing expression after '" + kw.text + "'");
    return expr();
  }

  Assignment assignment() {
    Assignment a;
    a.pos = peek().pos;
    do {
      a.targets.push_back(lvalue());
    } while (accept_punct(","));
    expect_punct(":=");
    do {
      a.values.push_back(expr());
    } while (accept_punct(","));
    return a;
  }

  Statement statement() {
    Statement s;
    s.pos = peek().pos;
    if (peek().kind == Tok::Ident && !kReserved.count(peek().text) && at_punct("::", 1)) {
      s.label = next().text;
      next();
    }
    if (at_punct("<")) {
      next();
      s.transaction = true;
      for (;;) {
        Assignment a = assignment();
        if (at_word("if")) {
          const Token& kw = next();
          a.guard = guard_expr(kw);
        }
        s.body.push_back(std::move(a));
        if (!accept_punct(";")) break;
      }
      expect_punct(">");
    } else {
      s.body.push_back(assignment());
    }
    if (at_word("if")) {
      const Token& kw = next();
      s.guard = guard_expr(kw);
    } else if (at_word("reacts-to")) {
      const Token& kw = next();
      s.guard = guard_expr(kw);
      s.reactive = true;
    }
    return s;
  }

  Quantifier quantifier_header() {
    // Positioned after `<`; accepts `[]` or `||` as the family operator.
    Quantifier q;
    if (at_punct("[") && at_punct("]", 1)) {
      next();
      next();
    } else if (!accept_punct("||")) {
      fail("expected '[]' after '<'");
    }
    q.var = expect_name("bound variable");
    expect_punct(":");
    q.lo = additive();
    if (!accept_punct("<=")) fail("expected '<=' in family range");
    if (expect_name("bound variable") != q.var) fail("family range must mention the bound variable");
    if (accept_punct("<=")) q.inclusive = true;
    else expect_punct("<");
    q.hi = additive();
    expect_punct("::");
    return q;
  }

  bool at_family() const {
    return at_punct("<") && ((at_punct("[", 1) && at_punct("]", 2)) || at_punct("||", 1));
  }

  Item item(bool interactions) {
    Item it;
    it.pos = peek().pos;
    if (at_family()) {
      next();
      it.kind = Item::Kind::Family;
      it.quant = quantifier_header();
      it.children = item_list(interactions, true);
      expect_punct(">");
    } else if (at_word("inhibit")) {
      if (!interactions) fail("inhibit is only allowed in the interactions section");
      next();
      it.kind = Item::Kind::Inhibit;
      it.inhibit.pos = it.pos;
      it.inhibit.program = expect_name("program name");
      if (at_punct("(")) it.inhibit.args = call_args();
      expect_punct(".");
      it.inhibit.label = expect_name("statement label");
      expect_word("when");
      it.inhibit.when = expr();
    } else {
      it.kind = Item::Kind::Stmt;
      it.stmt = statement();
    }
    return it;
  }

  bool at_item_list_end() const {
    return at_end() || at_punct(">") || at_word("priority") || at_section_word();
  }

  std::vector<Item> item_list(bool interactions, bool nested) {
    std::vector<Item> items;
    accept_punct("||");
    while (!at_item_list_end()) {
      items.push_back(item(interactions));
      if (!accept_punct("||")) break;
    }
    if (!at_item_list_end()) fail(nested ? "expected '||' or '>'" : "expected '||'");
    return items;
  }

  std::vector<PriorityBlock> block_section(bool interactions) {
    std::vector<PriorityBlock> blocks;
    if (at_word("priority")) {
      while (at_word("priority")) {
        next();
        PriorityBlock b;
        b.header = true;
        if (peek().kind != Tok::Int) fail("expected priority number");
        b.priority = static_cast<int>(next().ival);
        expect_punct(":");
        b.items = item_list(interactions, false);
        blocks.push_back(std::move(b));
      }
      if (!at_section_word() && !at_end()) fail("expected 'priority' or 'end'");
      return blocks;
    }
    PriorityBlock b;
    b.items = item_list(interactions, false);
    if (!b.items.empty()) blocks.push_back(std::move(b));
    return blocks;
  }

  ProgramDef program() {
    ProgramDef prog;
    prog.pos = peek().pos;
    expect_word("program");
    prog.name = expect_name("program name");
    if (accept_punct("(")) {
      if (!at_punct(")")) {
        do {
          prog.params.push_back(expect_name("parameter name"));
        } while (accept_punct(","));
      }
      expect_punct(")");
    }
    if (accept_word("at")) {
      expect_word("lambda");
      prog.at_lambda = true;
    }
    if (accept_word("declare")) declare_section(prog);
    if (accept_word("always")) always_section(prog);
    if (accept_word("initially")) initially_section(prog);
    if (accept_word("assign")) prog.blocks = block_section(false);
    expect_word("end");
    return prog;
  }

  ComponentItem component_item() {
    ComponentItem ci;
    if (at_family()) {
      next();
      ci.family = true;
      ci.quant = quantifier_header();
      ci.children = component_list(true);
      expect_punct(">");
      return ci;
    }
    ci.comp.program = expect_name("program name");
    if (at_punct("(")) ci.comp.args = call_args();
    if (accept_word("at")) ci.comp.at = expr();
    return ci;
  }

  std::vector<ComponentItem> component_list(bool nested) {
    std::vector<ComponentItem> out;
    accept_punct("||");
    while (!at_item_list_end()) {
      out.push_back(component_item());
      if (!accept_punct("||")) break;
    }
    if (!at_item_list_end()) fail(nested ? "expected '||' or '>'" : "expected '||'");
    return out;
  }

  SystemDef system() {
    SystemDef sys;
    sys.pos = peek().pos;
    expect_word("system");
    sys.name = dashed_name("system name");
    if (accept_punct("(")) {
      if (!at_punct(")")) {
        do {
          Param p;
          p.name = expect_name("parameter name");
          expect_punct("=");
          p.value = expr();
          sys.params.push_back(std::move(p));
        } while (accept_punct(","));
      }
      expect_punct(")");
    }
    while (at_word("program")) sys.programs.push_back(program());
    expect_word("components");
    sys.components = component_list(false);
    if (accept_word("interactions")) sys.interactions = block_section(true);
    expect_word("end");
    return sys;
  }

  // ---- property files ----
  std::vector<PropertyDecl> properties() {
    std::vector<PropertyDecl> out;
    static const std::pair<const char*, PropertyDecl::Kind> kinds[] = {
        {"invariant", PropertyDecl::Kind::Invariant},
        {"co", PropertyDecl::Kind::Co},
        {"transient", PropertyDecl::Kind::Transient},
        {"ensures", PropertyDecl::Kind::Ensures},
        {"leadsto", PropertyDecl::Kind::LeadsTo}};
    while (!at_end()) {
      if (accept_punct(";")) continue;
      PropertyDecl d;
      d.pos = peek().pos;
      bool found = false;
      for (const auto& [w, k] : kinds) {
        if (at_word(w)) {
          d.kind = k;
          found = true;
        }
      }
      if (!found) fail("expected property kind (invariant, co, transient, ensures, leadsto)");
      next();
      d.name = dashed_name("property name");
      if (accept_word("forall")) {
        d.bound_var = expect_name("bound variable");
        expect_word("over");
        d.bound_over = expr();
      }
      expect_punct(":");
      d.p = expr();
      bool binary = d.kind == PropertyDecl::Kind::Co ||
                    d.kind == PropertyDecl::Kind::Ensures ||
                    d.kind == PropertyDecl::Kind::LeadsTo;
      if (binary) {
        expect_punct("=>");
        d.q = expr();
      }
      out.push_back(std::move(d));
    }
    return out;
  }

  void expect_end() {
    if (!at_end()) fail("unexpected trailing input");
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, bool> programs_;
};

// ---- post-parse checks ----

std::set<std::string> declared_names(const ProgramDef& p) {
  std::set<std::string> out{"lambda"};
  for (const auto& d : p.declare) out.insert(d.names.begin(), d.names.end());
  return out;
}

void check_program(const ProgramDef& p) {
  std::set<std::string> declared = declared_names(p);
  std::set<std::string> seen;
  for (const auto& d : p.declare) {
    for (const auto& n : d.names) {
      if (!seen.insert(n).second)
        throw ParseError(d.pos, "variable '" + n + "' declared twice in " + p.name);
    }
  }
  std::set<std::string> aliases;
  for (const auto& a : p.always) {
    if (declared.count(a.name))
      throw ParseError(a.pos, "alias '" + a.name + "' shadows a declared variable");
    if (!aliases.insert(a.name).second)
      throw ParseError(a.pos, "alias '" + a.name + "' defined twice");
  }
  for (const auto& in : p.initially) {
    if (!declared.count(in.name))
      throw ParseError(in.pos, "initially names undeclared variable '" + in.name + "'");
  }
  std::set<int> priorities;
  for (const auto& b : p.blocks) {
    if (!priorities.insert(b.priority).second)
      throw ParseError(p.pos, "duplicate priority " + std::to_string(b.priority) + " in " + p.name);
  }
  std::set<std::string> labels;
  for (const auto& b : p.blocks) {
    for_each_statement(b.items, [&](const Statement& s) {
      if (!s.label.empty() && !labels.insert(s.label).second)
        throw ParseError(s.pos, "duplicate label '" + s.label + "' in " + p.name);
      for (const auto& a : s.body) {
        if (a.targets.size() != a.values.size())
          throw ParseError(a.pos, "assignment has " + std::to_string(a.targets.size()) +
                                      " targets but " + std::to_string(a.values.size()) +
                                      " values");
        for (const auto& t : a.targets) {
          if (t.qualified)
            throw ParseError(t.pos, "qualified target '" + t.program + "." + t.var +
                                        "' outside the interactions section");
          if (aliases.count(t.var))
            throw ParseError(t.pos, "cannot assign to derived name '" + t.var + "'");
          if (!declared.count(t.var))
            throw ParseError(t.pos, "assignment to undeclared variable '" + t.var + "'");
        }
      }
    });
  }
}

void check_qualified(const SystemDef& sys, const Expr& e) {
  walk(e, [&](const ExprNode& n) {
    if (n.kind != ExprKind::Qualified && n.kind != ExprKind::InstanceRef) return;
    const ProgramDef* p = sys.find_program(n.program);
    if (!p) throw ResolveError("unknown program '" + n.program + "' at " + n.pos.str());
    if (n.args.size() != p->params.size())
      throw ResolveError("program '" + n.program + "' takes " +
                         std::to_string(p->params.size()) + " arguments at " + n.pos.str());
    if (n.kind == ExprKind::Qualified) {
      bool ok = declared_names(*p).count(n.name) > 0;
      for (const auto& a : p->always) ok = ok || a.name == n.name;
      if (!ok)
        throw ResolveError("program '" + n.program + "' has no variable '" + n.name +
                           "' at " + n.pos.str());
    }
  });
}

void check_component(const SystemDef& sys, const ComponentItem& ci) {
  if (ci.family) {
    for (const auto& c : ci.children) check_component(sys, c);
    return;
  }
  const ProgramDef* p = sys.find_program(ci.comp.program);
  if (!p) throw ResolveError("component references unknown program '" + ci.comp.program + "'");
  if (ci.comp.args.size() != p->params.size())
    throw ResolveError("component " + ci.comp.program + " expects " +
                       std::to_string(p->params.size()) + " arguments");
}

void check_system(const SystemDef& sys) {
  std::set<std::string> names;
  for (const auto& p : sys.programs) {
    if (!names.insert(p.name).second)
      throw ParseError(p.pos, "program '" + p.name + "' defined twice");
    check_program(p);
  }
  for (const auto& c : sys.components) check_component(sys, c);
  std::set<int> priorities;
  for (const auto& b : sys.interactions) {
    if (!priorities.insert(b.priority).second)
      throw ParseError(sys.pos, "duplicate interaction priority " + std::to_string(b.priority));
    for_each_statement(b.items, [&](const Statement& s) {
      for (const auto& a : s.body) {
        if (a.targets.size() != a.values.size())
          throw ParseError(a.pos, "assignment arity mismatch");
        for (const auto& t : a.targets) {
          if (!t.qualified)
            throw ResolveError("interaction target '" + t.var + "' at " + t.pos.str() +
                               " must be qualified");
          const ProgramDef* p = sys.find_program(t.program);
          if (!p) throw ResolveError("unknown program '" + t.program + "' at " + t.pos.str());
          for (const auto& al : p->always) {
            if (al.name == t.var)
              throw ResolveError("cannot assign to derived name " + t.program + "." + t.var);
          }
          if (!declared_names(*p).count(t.var))
            throw ResolveError("program '" + t.program + "' has no variable '" + t.var + "'");
          for (const auto& sel : t.path) check_qualified(sys, sel.index);
        }
        for (const auto& v : a.values) check_qualified(sys, v);
        check_qualified(sys, a.guard);
      }
      check_qualified(sys, s.guard);
    });
    for_each_inhibition(b.items, [&](const Inhibition& in) {
      const ProgramDef* p = sys.find_program(in.program);
      if (!p)
        throw ResolveError("inhibition at " + in.pos.str() + " names unknown program '" +
                           in.program + "'");
      bool found = false;
      for (const Statement* s : p->statements()) found = found || s->label == in.label;
      if (!found)
        throw ResolveError("inhibition target " + in.program + "." + in.label +
                           " not found (at " + in.pos.str() + ")");
      check_qualified(sys, in.when);
    });
  }
}

void apply_overrides(SystemDef& sys, const ParamOverrides& overrides) {
  for (const auto& [name, v] : overrides) {
    bool found = false;
    for (auto& p : sys.params) {
      if (p.name == name) {
        p.value = Expr::literal(Value::integer(v));
        found = true;
      }
    }
    if (!found) throw ConfigError("system " + sys.name + " has no parameter '" + name + "'");
  }
}

}  // namespace

ProgramDef parse_program(std::string_view text) {
  Parser p(text, {});
  ProgramDef prog = p.program();
  p.expect_end();
  check_program(prog);
  return prog;
}

SystemDef parse_system(std::string_view text, const ParamOverrides& overrides) {
  Parser p(text, {});
  SystemDef sys = p.system();
  p.expect_end();
  apply_overrides(sys, overrides);
  check_system(sys);
  return sys;
}

SystemDef wrap_program(ProgramDef program) {
  SystemDef sys;
  sys.name = program.name;
  sys.pos = program.pos;
  ComponentItem ci;
  ci.comp.program = program.name;
  for (const auto& param : program.params) {
    // Parameters of a lone program become system parameters defaulting to 0.
    Param sp;
    sp.name = param;
    sp.value = Expr::literal(Value::integer(0));
    sys.params.push_back(sp);
    ci.comp.args.push_back(Expr::var(param));
  }
  sys.components.push_back(std::move(ci));
  sys.programs.push_back(std::move(program));
  return sys;
}

SystemDef parse_source(std::string_view text, const ParamOverrides& overrides) {
  auto toks = tokenize(text);
  if (!toks.empty() && toks[0].kind == Tok::Ident && toks[0].text == "program") {
    SystemDef sys = wrap_program(parse_program(text));
    apply_overrides(sys, overrides);
    return sys;
  }
  return parse_system(text, overrides);
}

Expr parse_expression(std::string_view text, const std::map<std::string, bool>& programs) {
  Parser p(text, programs);
  Expr e = p.expr();
  p.expect_end();
  return e;
}

std::map<std::string, bool> program_signatures(const SystemDef& sys) {
  std::map<std::string, bool> out;
  for (const auto& p : sys.programs) out[p.name] = !p.params.empty();
  return out;
}

const char* to_string(PropertyDecl::Kind k) {
  switch (k) {
    case PropertyDecl::Kind::Invariant: return "invariant";
    case PropertyDecl::Kind::Co: return "co";
    case PropertyDecl::Kind::Transient: return "transient";
    case PropertyDecl::Kind::Ensures: return "ensures";
    case PropertyDecl::Kind::LeadsTo: return "leadsto";
  }
  return "?";
}

std::vector<PropertyDecl> parse_properties(std::string_view text,
                                           const std::map<std::string, bool>& programs) {
  Parser p(text, programs);
  return p.properties();
}

}  // namespace munity
