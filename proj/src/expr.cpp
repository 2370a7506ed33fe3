#include "reach/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace reach {

using Kind = ExprNode::Kind;
using NodePtr = std::shared_ptr<const ExprNode>;

const char* func_name(FuncKind f) {
    switch (f) {
        case FuncKind::Sin: return "sin";
        case FuncKind::Cos: return "cos";
        case FuncKind::Tan: return "tan";
        case FuncKind::Exp: return "exp";
        case FuncKind::Log: return "log";
        case FuncKind::Sqrt: return "sqrt";
        case FuncKind::Abs: return "abs";
        case FuncKind::Tanh: return "tanh";
    }
    return "?";
}

namespace {

NodePtr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

NodePtr make_lit(double v) {
    ExprNode n;
    n.kind = Kind::Literal;
    n.value = v;
    return make(std::move(n));
}

bool node_equal(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Kind::Literal: return a.value == b.value;
        case Kind::Variable: return a.name == b.name;
        case Kind::Time: return true;
        case Kind::Neg: return node_equal(*a.a, *b.a);
        case Kind::Pow: return a.exponent == b.exponent && node_equal(*a.a, *b.a);
        case Kind::Call: return a.func == b.func && node_equal(*a.a, *b.a);
        default: return node_equal(*a.a, *b.a) && node_equal(*a.b, *b.b);
    }
}

double apply_func(FuncKind f, double x) {
    switch (f) {
        case FuncKind::Sin: return std::sin(x);
        case FuncKind::Cos: return std::cos(x);
        case FuncKind::Tan: return std::tan(x);
        case FuncKind::Exp: return std::exp(x);
        case FuncKind::Log:
            if (x <= 0.0) throw EvalError("log of non-positive value");
            return std::log(x);
        case FuncKind::Sqrt:
            if (x < 0.0) throw EvalError("sqrt of negative value");
            return std::sqrt(x);
        case FuncKind::Abs: return std::fabs(x);
        case FuncKind::Tanh: return std::tanh(x);
    }
    throw EvalError("unknown function");
}

}  // namespace

std::shared_ptr<const ExprNode> Expr::literal_node(double v) { return make_lit(v); }

Expr lit(double v) {
    if (!std::isfinite(v)) throw EvalError("literal must be finite");
    return Expr(make_lit(v));
}

Expr var(const std::string& name) {
    ExprNode n;
    n.kind = Kind::Variable;
    n.name = name;
    return Expr(make(std::move(n)));
}

Expr time_symbol() {
    ExprNode n;
    n.kind = Kind::Time;
    return Expr(make(std::move(n)));
}

bool structurally_equal(const Expr& a, const Expr& b) { return node_equal(a.node(), b.node()); }

namespace {

bool is_lit(const Expr& e, double* out = nullptr) {
    if (e.node().kind != Kind::Literal) return false;
    if (out) *out = e.node().value;
    return true;
}

Expr binary(Kind k, const Expr& a, const Expr& b) {
    ExprNode n;
    n.kind = k;
    n.a = a.ptr();
    n.b = b.ptr();
    return Expr(make(std::move(n)));
}

}  // namespace

Expr add(const Expr& a, const Expr& b) {
    double x, y;
    if (is_lit(a, &x) && is_lit(b, &y) && std::isfinite(x + y)) return lit(x + y);
    if (a.is_literal(0.0)) return b;
    if (b.is_literal(0.0)) return a;
    // x + (-x) and (-x) + x cancel exactly.
    if (b.node().kind == Kind::Neg && node_equal(a.node(), *b.node().a)) return lit(0.0);
    if (a.node().kind == Kind::Neg && node_equal(*a.node().a, b.node())) return lit(0.0);
    return binary(Kind::Add, a, b);
}

Expr sub(const Expr& a, const Expr& b) {
    double x, y;
    if (is_lit(a, &x) && is_lit(b, &y) && std::isfinite(x - y)) return lit(x - y);
    if (b.is_literal(0.0)) return a;
    if (a.is_literal(0.0)) return neg(b);
    if (node_equal(a.node(), b.node())) return lit(0.0);
    return binary(Kind::Sub, a, b);
}

Expr mul(const Expr& a, const Expr& b) {
    double x, y;
    if (is_lit(a, &x) && is_lit(b, &y) && std::isfinite(x * y)) return lit(x * y);
    if (a.is_literal(0.0) || b.is_literal(0.0)) return lit(0.0);
    if (a.is_literal(1.0)) return b;
    if (b.is_literal(1.0)) return a;
    return binary(Kind::Mul, a, b);
}

Expr div(const Expr& a, const Expr& b) {
    double x, y;
    if (is_lit(a, &x) && is_lit(b, &y) && y != 0.0 && std::isfinite(x / y)) return lit(x / y);
    if (a.is_literal(0.0)) return lit(0.0);
    if (b.is_literal(1.0)) return a;
    return binary(Kind::Div, a, b);
}

Expr neg(const Expr& a) {
    double x;
    if (is_lit(a, &x)) return lit(-x);
    if (a.node().kind == Kind::Neg) return Expr(a.node().a);
    ExprNode n;
    n.kind = Kind::Neg;
    n.a = a.ptr();
    return Expr(make(std::move(n)));
}

Expr pow_int(const Expr& base, long long exponent) {
    if (exponent == 0) return lit(1.0);
    if (exponent == 1) return base;
    double x;
    if (is_lit(base, &x)) {
        const double v = std::pow(x, static_cast<double>(exponent));
        if (std::isfinite(v)) return lit(v);
    }
    ExprNode n;
    n.kind = Kind::Pow;
    n.exponent = exponent;
    n.a = base.ptr();
    return Expr(make(std::move(n)));
}

Expr call(FuncKind f, const Expr& arg) {
    double x;
    if (is_lit(arg, &x)) {
        try {
            const double v = apply_func(f, x);
            if (std::isfinite(v)) return lit(v);
        } catch (const EvalError&) {
            // Leave unfolded; evaluation will report the domain error.
        }
    }
    ExprNode n;
    n.kind = Kind::Call;
    n.func = f;
    n.a = arg.ptr();
    return Expr(make(std::move(n)));
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
    enum class Type { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
    Type type = Type::End;
    double number = 0.0;
    std::string text;
    std::size_t offset = 0;
};

const char* token_name(Token::Type t) {
    switch (t) {
        case Token::Type::Number: return "number";
        case Token::Type::Ident: return "identifier";
        case Token::Type::Plus: return "'+'";
        case Token::Type::Minus: return "'-'";
        case Token::Type::Star: return "'*'";
        case Token::Type::Slash: return "'/'";
        case Token::Type::Caret: return "'^'";
        case Token::Type::LParen: return "'('";
        case Token::Type::RParen: return "')'";
        case Token::Type::End: return "end of input";
    }
    return "?";
}

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_ = Token{};
        tok_.offset = pos_;
        if (pos_ >= src_.size()) {
            tok_.type = Token::Type::End;
            return;
        }
        const char c = src_[pos_];
        switch (c) {
            case '+': tok_.type = Token::Type::Plus; ++pos_; return;
            case '-': tok_.type = Token::Type::Minus; ++pos_; return;
            case '*': tok_.type = Token::Type::Star; ++pos_; return;
            case '/': tok_.type = Token::Type::Slash; ++pos_; return;
            case '^': tok_.type = Token::Type::Caret; ++pos_; return;
            case '(': tok_.type = Token::Type::LParen; ++pos_; return;
            case ')': tok_.type = Token::Type::RParen; ++pos_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.data() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin || !std::isfinite(v))
                throw ParseError("malformed number at offset " + std::to_string(pos_), pos_, {"number"});
            tok_.type = Token::Type::Number;
            tok_.number = v;
            tok_.text.assign(begin, static_cast<std::size_t>(end - begin));
            pos_ += static_cast<std::size_t>(end - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            tok_.type = Token::Type::Ident;
            tok_.text = src_.substr(pos_, end - pos_);
            pos_ = end;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "' at offset " + std::to_string(pos_),
                         pos_, {"number", "identifier", "'('"});
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    Token tok_;
};

class Parser {
  public:
    explicit Parser(const std::string& src) : lex_(src) {}

    Expr run() {
        Expr e = expr();
        if (lex_.peek().type != Token::Type::End)
            fail({"'+'", "'-'", "'*'", "'/'", "end of input"});
        return e;
    }

  private:
    [[noreturn]] void fail(std::vector<std::string> expected) {
        const Token& t = lex_.peek();
        std::ostringstream os;
        os << "syntax error at offset " << t.offset << ": unexpected " << token_name(t.type)
           << "; expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) os << (i ? " or " : "") << expected[i];
        throw ParseError(os.str(), t.offset, std::move(expected));
    }

    Expr expr() {
        Expr e = term();
        while (true) {
            const Token::Type t = lex_.peek().type;
            if (t == Token::Type::Plus) {
                lex_.take();
                e = add(e, term());
            } else if (t == Token::Type::Minus) {
                lex_.take();
                e = sub(e, term());
            } else {
                return e;
            }
        }
    }

    Expr term() {
        Expr e = factor();
        while (true) {
            const Token::Type t = lex_.peek().type;
            if (t == Token::Type::Star) {
                lex_.take();
                e = mul(e, factor());
            } else if (t == Token::Type::Slash) {
                lex_.take();
                e = div(e, factor());
            } else {
                return e;
            }
        }
    }

    Expr factor() {
        if (lex_.peek().type == Token::Type::Minus) {
            lex_.take();
            return neg(power());
        }
        return power();
    }

    Expr power() {
        Expr base = atom();
        if (lex_.peek().type != Token::Type::Caret) return base;
        lex_.take();
        long long sign = 1;
        if (lex_.peek().type == Token::Type::Minus) {
            lex_.take();
            sign = -1;
        }
        if (lex_.peek().type != Token::Type::Number) fail({"integer exponent"});
        const Token t = lex_.take();
        long long n = 0;
        const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), n);
        if (ec != std::errc{} || ptr != t.text.data() + t.text.size())
            throw ParseError("exponent must be an integer literal at offset " + std::to_string(t.offset),
                             t.offset, {"integer exponent"});
        return pow_int(base, sign * n);
    }

    Expr atom() {
        const Token& t = lex_.peek();
        switch (t.type) {
            case Token::Type::Number: return lit(lex_.take().number);
            case Token::Type::LParen: {
                lex_.take();
                Expr e = expr();
                if (lex_.peek().type != Token::Type::RParen) fail({"')'"});
                lex_.take();
                return e;
            }
            case Token::Type::Ident: {
                const Token id = lex_.take();
                if (lex_.peek().type != Token::Type::LParen) {
                    if (id.text == "t") return time_symbol();
                    return var(id.text);
                }
                lex_.take();
                Expr arg = expr();
                if (lex_.peek().type != Token::Type::RParen) fail({"')'"});
                lex_.take();
                static const std::pair<const char*, FuncKind> table[] = {
                    {"sin", FuncKind::Sin},   {"cos", FuncKind::Cos}, {"tan", FuncKind::Tan},
                    {"exp", FuncKind::Exp},   {"log", FuncKind::Log}, {"sqrt", FuncKind::Sqrt},
                    {"abs", FuncKind::Abs},   {"tanh", FuncKind::Tanh},
                };
                for (const auto& [name, kind] : table)
                    if (id.text == name) return call(kind, arg);
                throw ParseError("unknown function '" + id.text + "' at offset " + std::to_string(id.offset),
                                 id.offset, {"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh"});
            }
            default: fail({"number", "identifier", "'('"});
        }
    }

    Lexer lex_;
};

}  // namespace

Expr parse(const std::string& source) { return Parser(source).run(); }

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

// Precedence levels: Add/Sub 1, Mul/Div 2, Neg 3, Pow 4, atoms 5.
int precedence(const ExprNode& n) {
    switch (n.kind) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Neg: return 3;
        case Kind::Pow: return 4;
        default: return 5;
    }
}

void print_node(std::ostream& os, const ExprNode& n, int min_prec);

void print_child(std::ostream& os, const ExprNode& child, int min_prec) {
    if (precedence(child) < min_prec) {
        os << '(';
        print_node(os, child, 0);
        os << ')';
    } else {
        print_node(os, child, 0);
    }
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void print_node(std::ostream& os, const ExprNode& n, int) {
    switch (n.kind) {
        case Kind::Literal:
            if (n.value < 0.0 || (n.value == 0.0 && std::signbit(n.value))) {
                os << '(' << format_double(n.value) << ')';
            } else {
                os << format_double(n.value);
            }
            return;
        case Kind::Variable: os << n.name; return;
        case Kind::Time: os << 't'; return;
        case Kind::Add:
            print_child(os, *n.a, 1);
            os << " + ";
            print_child(os, *n.b, 2);
            return;
        case Kind::Sub:
            print_child(os, *n.a, 1);
            os << " - ";
            print_child(os, *n.b, 2);
            return;
        case Kind::Mul:
            print_child(os, *n.a, 2);
            os << "*";
            print_child(os, *n.b, 3);
            return;
        case Kind::Div:
            print_child(os, *n.a, 2);
            os << "/";
            print_child(os, *n.b, 3);
            return;
        case Kind::Neg:
            os << '-';
            print_child(os, *n.a, 3);
            return;
        case Kind::Pow:
            print_child(os, *n.a, 5);
            os << '^' << n.exponent;
            return;
        case Kind::Call:
            os << func_name(n.func) << '(';
            print_node(os, *n.a, 0);
            os << ')';
            return;
    }
}

}  // namespace

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print_node(os, e.node(), 0);
    return os.str();
}

// ---------------------------------------------------------------------------
// Variables / resolution
// ---------------------------------------------------------------------------

namespace {
void collect(const ExprNode& n, std::set<std::string>& out) {
    switch (n.kind) {
        case Kind::Variable: out.insert(n.name); return;
        case Kind::Literal:
        case Kind::Time: return;
        default:
            if (n.a) collect(*n.a, out);
            if (n.b) collect(*n.b, out);
    }
}

NodePtr resolve_node(const NodePtr& p, const std::vector<std::string>& states) {
    const ExprNode& n = *p;
    switch (n.kind) {
        case Kind::Literal:
        case Kind::Time: return p;
        case Kind::Variable: {
            for (std::size_t i = 0; i < states.size(); ++i) {
                if (states[i] == n.name) {
                    ExprNode copy = n;
                    copy.index = static_cast<int>(i);
                    return make(std::move(copy));
                }
            }
            throw EvalError("undeclared variable '" + n.name + "'");
        }
        default: {
            ExprNode copy = n;
            if (n.a) copy.a = resolve_node(n.a, states);
            if (n.b) copy.b = resolve_node(n.b, states);
            return make(std::move(copy));
        }
    }
}
}  // namespace

std::set<std::string> variables(const Expr& e) {
    std::set<std::string> out;
    collect(e.node(), out);
    return out;
}

Expr resolve(const Expr& e, const std::vector<std::string>& states) {
    return Expr(resolve_node(e.ptr(), states));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

double eval_node(const ExprNode& n, const std::map<std::string, double>* env,
                 std::span<const double> values, double t) {
    switch (n.kind) {
        case Kind::Literal: return n.value;
        case Kind::Time: return t;
        case Kind::Variable: {
            if (env) {
                const auto it = env->find(n.name);
                if (it == env->end()) throw EvalError("unbound variable '" + n.name + "'");
                return it->second;
            }
            if (n.index < 0 || static_cast<std::size_t>(n.index) >= values.size())
                throw EvalError("unresolved variable '" + n.name + "'");
            return values[static_cast<std::size_t>(n.index)];
        }
        case Kind::Add: return eval_node(*n.a, env, values, t) + eval_node(*n.b, env, values, t);
        case Kind::Sub: return eval_node(*n.a, env, values, t) - eval_node(*n.b, env, values, t);
        case Kind::Mul: return eval_node(*n.a, env, values, t) * eval_node(*n.b, env, values, t);
        case Kind::Div: {
            const double num = eval_node(*n.a, env, values, t);
            const double den = eval_node(*n.b, env, values, t);
            if (den == 0.0) throw EvalError("division by zero");
            return num / den;
        }
        case Kind::Neg: return -eval_node(*n.a, env, values, t);
        case Kind::Pow: {
            const double base = eval_node(*n.a, env, values, t);
            if (base == 0.0 && n.exponent < 0) throw EvalError("zero raised to a negative power");
            return std::pow(base, static_cast<double>(n.exponent));
        }
        case Kind::Call: return apply_func(n.func, eval_node(*n.a, env, values, t));
    }
    throw EvalError("corrupt expression node");
}

}  // namespace

double eval(const Expr& e, const std::map<std::string, double>& env, double t) {
    const double v = eval_node(e.node(), &env, {}, t);
    if (!std::isfinite(v)) throw EvalError("expression evaluated to a non-finite value");
    return v;
}

double eval(const Expr& e, std::span<const double> values, double t) {
    const double v = eval_node(e.node(), nullptr, values, t);
    if (!std::isfinite(v)) throw EvalError("expression evaluated to a non-finite value");
    return v;
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

namespace {

Expr diff_node(const Expr& e, const std::string& v) {
    const ExprNode& n = e.node();
    switch (n.kind) {
        case Kind::Literal:
        case Kind::Time: return lit(0.0);
        case Kind::Variable: return lit(n.name == v ? 1.0 : 0.0);
        case Kind::Add: return add(diff_node(Expr(n.a), v), diff_node(Expr(n.b), v));
        case Kind::Sub: return sub(diff_node(Expr(n.a), v), diff_node(Expr(n.b), v));
        case Kind::Mul: {
            const Expr a(n.a), b(n.b);
            return add(mul(diff_node(a, v), b), mul(a, diff_node(b, v)));
        }
        case Kind::Div: {
            const Expr a(n.a), b(n.b);
            return sub(div(diff_node(a, v), b), div(mul(a, diff_node(b, v)), pow_int(b, 2)));
        }
        case Kind::Neg: return neg(diff_node(Expr(n.a), v));
        case Kind::Pow: {
            const Expr base(n.a);
            return mul(mul(lit(static_cast<double>(n.exponent)), pow_int(base, n.exponent - 1)),
                       diff_node(base, v));
        }
        case Kind::Call: {
            const Expr u(n.a);
            const Expr du = diff_node(u, v);
            switch (n.func) {
                case FuncKind::Sin: return mul(call(FuncKind::Cos, u), du);
                case FuncKind::Cos: return neg(mul(call(FuncKind::Sin, u), du));
                case FuncKind::Tan:
                    return mul(add(lit(1.0), pow_int(call(FuncKind::Tan, u), 2)), du);
                case FuncKind::Exp: return mul(call(FuncKind::Exp, u), du);
                case FuncKind::Log: return div(du, u);
                case FuncKind::Sqrt: return div(du, mul(lit(2.0), call(FuncKind::Sqrt, u)));
                case FuncKind::Tanh:
                    return mul(sub(lit(1.0), pow_int(call(FuncKind::Tanh, u), 2)), du);
                case FuncKind::Abs:
                    throw EvalError("abs() is not differentiable; rewrite the model without it");
            }
            throw EvalError("unknown function in differentiate");
        }
    }
    throw EvalError("corrupt expression node");
}

}  // namespace

Expr differentiate(const Expr& e, const std::string& v) { return diff_node(e, v); }

// ---------------------------------------------------------------------------
// Interval evaluation
// ---------------------------------------------------------------------------

namespace {

Interval ieval_node(const ExprNode& n, const std::map<std::string, Interval>* env,
                    std::span<const Interval> values, const Interval& t) {
    switch (n.kind) {
        case Kind::Literal: return Interval::point(n.value);
        case Kind::Time: return t;
        case Kind::Variable: {
            if (env) {
                const auto it = env->find(n.name);
                if (it == env->end()) throw EvalError("unbound variable '" + n.name + "'");
                return it->second;
            }
            if (n.index < 0 || static_cast<std::size_t>(n.index) >= values.size())
                throw EvalError("unresolved variable '" + n.name + "'");
            return values[static_cast<std::size_t>(n.index)];
        }
        case Kind::Add: return ieval_node(*n.a, env, values, t) + ieval_node(*n.b, env, values, t);
        case Kind::Sub: return ieval_node(*n.a, env, values, t) - ieval_node(*n.b, env, values, t);
        case Kind::Mul: return ieval_node(*n.a, env, values, t) * ieval_node(*n.b, env, values, t);
        case Kind::Div: return ieval_node(*n.a, env, values, t) / ieval_node(*n.b, env, values, t);
        case Kind::Neg: return -ieval_node(*n.a, env, values, t);
        case Kind::Pow: return int_pow(ieval_node(*n.a, env, values, t), n.exponent);
        case Kind::Call: {
            const Interval u = ieval_node(*n.a, env, values, t);
            switch (n.func) {
                case FuncKind::Sin: return iv_sin(u);
                case FuncKind::Cos: return iv_cos(u);
                case FuncKind::Tan: return iv_tan(u);
                case FuncKind::Exp: return iv_exp(u);
                case FuncKind::Log: return iv_log(u);
                case FuncKind::Sqrt: return iv_sqrt(u);
                case FuncKind::Abs: return iv_abs(u);
                case FuncKind::Tanh: return iv_tanh(u);
            }
            throw EvalError("unknown function");
        }
    }
    throw EvalError("corrupt expression node");
}

}  // namespace

Interval eval_interval(const Expr& e, const std::map<std::string, Interval>& env, const Interval& t) {
    return ieval_node(e.node(), &env, {}, t);
}

Interval eval_interval(const Expr& e, std::span<const Interval> values, const Interval& t) {
    return ieval_node(e.node(), nullptr, values, t);
}

}  // namespace reach
