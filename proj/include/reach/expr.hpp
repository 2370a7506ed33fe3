#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "reach/errors.hpp"
#include "reach/interval.hpp"

namespace reach {

enum class FuncKind { Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Tanh };

const char* func_name(FuncKind f);

/// One node of an expression tree. Nodes are immutable and shared between
/// trees; all rewriting builds new nodes.
struct ExprNode {
    enum class Kind { Literal, Variable, Time, Add, Sub, Mul, Div, Neg, Pow, Call };

    Kind kind;
    double value = 0.0;                    // Literal
    std::string name;                      // Variable
    int index = -1;                        // Variable, resolved against a state list
    long long exponent = 0;                // Pow
    FuncKind func = FuncKind::Sin;         // Call
    std::shared_ptr<const ExprNode> a, b;  // children
};

/// Immutable scalar expression over named variables and the time symbol `t`.
class Expr {
  public:
    Expr() : node_(literal_node(0.0)) {}
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

    const ExprNode& node() const { return *node_; }
    std::shared_ptr<const ExprNode> ptr() const { return node_; }

    bool is_literal(double v) const {
        return node_->kind == ExprNode::Kind::Literal && node_->value == v;
    }

  private:
    static std::shared_ptr<const ExprNode> literal_node(double v);
    std::shared_ptr<const ExprNode> node_;
};

// Constructors apply light simplification: literal folding, 0/1 identities,
// x - x -> 0, double negation. No distribution or reordering.
Expr lit(double v);
Expr var(const std::string& name);
Expr time_symbol();
Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr mul(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr neg(const Expr& a);
Expr pow_int(const Expr& base, long long exponent);
Expr call(FuncKind f, const Expr& arg);

bool structurally_equal(const Expr& a, const Expr& b);

/// Parse `source` into an expression.
///
/// Grammar:
///   expr   := term (("+"|"-") term)*
///   term   := factor (("*"|"/") factor)*
///   factor := ("-")? power
///   power  := atom ("^" integer)?
///   atom   := number | ident | ident "(" expr ")" | "(" expr ")"
///
/// Throws ParseError with the byte offset and expected-token set.
Expr parse(const std::string& source);

/// Render to text such that parse(to_string(e)) == e structurally.
std::string to_string(const Expr& e);

/// Names of all variables referenced (excludes `t`).
std::set<std::string> variables(const Expr& e);

/// Return a copy with every Variable node's index set to its position in
/// `states`. Throws EvalError for names not present.
Expr resolve(const Expr& e, const std::vector<std::string>& states);

double eval(const Expr& e, const std::map<std::string, double>& env, double t);

/// Fast path: requires a resolved expression; `values[i]` binds state i.
double eval(const Expr& e, std::span<const double> values, double t);

/// Exact symbolic partial derivative with respect to `v`.
/// abs() is rejected: the vector fields this library accepts must be C^1.
Expr differentiate(const Expr& e, const std::string& v);

Interval eval_interval(const Expr& e, const std::map<std::string, Interval>& env, const Interval& t);

/// Fast path: requires a resolved expression; `values[i]` encloses state i.
Interval eval_interval(const Expr& e, std::span<const Interval> values, const Interval& t);

}  // namespace reach
