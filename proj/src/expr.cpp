#include "qdlab/expr.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace qdlab {

namespace {

ExprPtr make(Expr e) { return std::make_shared<Expr>(std::move(e)); }

}  // namespace

ExprPtr Expr::constant(Complex c) {
  Expr e;
  e.op = Op::kConst;
  e.value = c;
  return make(std::move(e));
}

ExprPtr Expr::z() {
  Expr e;
  e.op = Op::kZ;
  e.depends_on_z = true;
  return make(std::move(e));
}

static ExprPtr binary(Expr::Op op, ExprPtr a, ExprPtr b) {
  Expr e;
  e.op = op;
  e.depends_on_z = a->depends_on_z || b->depends_on_z;
  e.a = std::move(a);
  e.b = std::move(b);
  return make(std::move(e));
}

ExprPtr Expr::add(ExprPtr a, ExprPtr b) { return binary(Op::kAdd, std::move(a), std::move(b)); }
ExprPtr Expr::sub(ExprPtr a, ExprPtr b) { return binary(Op::kSub, std::move(a), std::move(b)); }
ExprPtr Expr::mul(ExprPtr a, ExprPtr b) { return binary(Op::kMul, std::move(a), std::move(b)); }
ExprPtr Expr::div(ExprPtr a, ExprPtr b) { return binary(Op::kDiv, std::move(a), std::move(b)); }

ExprPtr Expr::pow(ExprPtr a, long num, long den) {
  if (den == 0) fail(ErrorCode::kBadInput, "pow with zero denominator");
  Expr e;
  e.op = Op::kPow;
  e.pow_num = num;
  e.pow_den = den;
  e.depends_on_z = a->depends_on_z;
  e.a = std::move(a);
  return make(std::move(e));
}

ExprPtr Expr::exp(ExprPtr a) {
  Expr e;
  e.op = Op::kExp;
  e.depends_on_z = a->depends_on_z;
  e.a = std::move(a);
  return make(std::move(e));
}

ExprPtr Expr::pullback(std::shared_ptr<const ConformalMapBase> map, std::string name,
                       ExprPtr psi) {
  Expr e;
  e.op = Op::kPullback;
  e.map = std::move(map);
  e.map_name = std::move(name);
  e.depends_on_z = true;
  e.a = std::move(psi);
  return make(std::move(e));
}

Complex eval_expr(const Expr& e, Complex z) {
  switch (e.op) {
    case Expr::Op::kConst:
      return e.value;
    case Expr::Op::kZ:
      return z;
    case Expr::Op::kAdd:
      return eval_expr(*e.a, z) + eval_expr(*e.b, z);
    case Expr::Op::kSub:
      return eval_expr(*e.a, z) - eval_expr(*e.b, z);
    case Expr::Op::kMul:
      return eval_expr(*e.a, z) * eval_expr(*e.b, z);
    case Expr::Op::kDiv:
      return eval_expr(*e.a, z) / eval_expr(*e.b, z);
    case Expr::Op::kPow:
      return std::pow(eval_expr(*e.a, z),
                      Complex(double(e.pow_num) / double(e.pow_den), 0.0));
    case Expr::Op::kExp:
      return std::exp(eval_expr(*e.a, z));
    case Expr::Op::kPullback: {
      if (!e.map) fail(ErrorCode::kMapNotConverged, "unresolved map '" + e.map_name + "'");
      if (!e.map->converged())
        fail(ErrorCode::kMapNotConverged, "map '" + e.map_name + "' failed its tolerance");
      Complex fp = e.map->derivative(z);
      Complex psi = e.a->depends_on_z ? eval_expr(*e.a, e.map->map(z)) : eval_expr(*e.a, z);
      return fp * fp * psi;
    }
  }
  fail(ErrorCode::kBadInput, "corrupt expression node");
}

namespace {

struct Token {
  std::string text;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == ')') {
      if (!cur.empty()) out.push_back({cur}), cur.clear();
      out.push_back({std::string(1, c)});
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back({cur}), cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back({cur});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const MapResolver& resolver)
      : toks_(std::move(toks)), resolver_(resolver) {}

  ExprPtr parse() {
    ExprPtr e = parse_expr();
    if (pos_ != toks_.size()) fail(ErrorCode::kBadInput, "trailing tokens in expression");
    return e;
  }

 private:
  const Token& peek() const {
    if (pos_ >= toks_.size()) fail(ErrorCode::kBadInput, "unexpected end of expression");
    return toks_[pos_];
  }
  Token next() {
    Token t = peek();
    ++pos_;
    return t;
  }
  void expect(const std::string& s) {
    if (next().text != s) fail(ErrorCode::kBadInput, "expected '" + s + "'");
  }
  double number() {
    Token t = next();
    try {
      return std::stod(t.text);
    } catch (...) {
      fail(ErrorCode::kBadInput, "expected a number, got '" + t.text + "'");
    }
  }

  ExprPtr parse_expr() {
    expect("(");
    std::string head = next().text;
    ExprPtr e;
    if (head == "dz2") {
      e = Expr::dz2();
    } else if (head == "z") {
      e = Expr::z();
    } else if (head == "const") {
      double re = number(), im = number();
      e = Expr::constant({re, im});
    } else if (head == "add" || head == "sub" || head == "mul" || head == "div") {
      ExprPtr a = parse_expr(), b = parse_expr();
      if (head == "add") e = Expr::add(a, b);
      if (head == "sub") e = Expr::sub(a, b);
      if (head == "mul") e = Expr::mul(a, b);
      if (head == "div") e = Expr::div(a, b);
    } else if (head == "pow") {
      ExprPtr a = parse_expr();
      long num = long(number()), den = long(number());
      e = Expr::pow(a, num, den);
    } else if (head == "exp") {
      e = Expr::exp(parse_expr());
    } else if (head == "pullback") {
      std::string name = next().text;
      ExprPtr psi = parse_expr();
      std::shared_ptr<const ConformalMapBase> map;
      if (name == "identity") {
        map = std::make_shared<IdentityMap>();
      } else if (resolver_) {
        map = resolver_(name);
      }
      if (!map) fail(ErrorCode::kBadInput, "unknown map '" + name + "'");
      e = Expr::pullback(std::move(map), name, psi);
    } else {
      fail(ErrorCode::kBadInput, "unknown operator '" + head + "'");
    }
    expect(")");
    return e;
  }

  std::vector<Token> toks_;
  const MapResolver& resolver_;
  std::size_t pos_ = 0;
};

void print_rec(const Expr& e, std::ostringstream& out) {
  switch (e.op) {
    case Expr::Op::kConst:
      if (e.value == Complex(1.0, 0.0)) {
        out << "(dz2)";
      } else {
        out << "(const " << e.value.real() << " " << e.value.imag() << ")";
      }
      return;
    case Expr::Op::kZ:
      out << "(z)";
      return;
    case Expr::Op::kAdd:
    case Expr::Op::kSub:
    case Expr::Op::kMul:
    case Expr::Op::kDiv: {
      const char* name = e.op == Expr::Op::kAdd   ? "add"
                         : e.op == Expr::Op::kSub ? "sub"
                         : e.op == Expr::Op::kMul ? "mul"
                                                  : "div";
      out << "(" << name << " ";
      print_rec(*e.a, out);
      out << " ";
      print_rec(*e.b, out);
      out << ")";
      return;
    }
    case Expr::Op::kPow:
      out << "(pow ";
      print_rec(*e.a, out);
      out << " " << e.pow_num << " " << e.pow_den << ")";
      return;
    case Expr::Op::kExp:
      out << "(exp ";
      print_rec(*e.a, out);
      out << ")";
      return;
    case Expr::Op::kPullback:
      out << "(pullback " << e.map_name << " ";
      print_rec(*e.a, out);
      out << ")";
      return;
  }
}

}  // namespace

ExprPtr parse_sexpr(const std::string& text, const MapResolver& resolver) {
  return Parser(tokenize(text), resolver).parse();
}

std::string print_sexpr(const ExprPtr& e) {
  std::ostringstream out;
  print_rec(*e, out);
  return out.str();
}

}  // namespace qdlab
