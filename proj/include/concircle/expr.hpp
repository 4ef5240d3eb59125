#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "concircle/jet.hpp"

namespace concircle {

enum class ExprKind { Number, Ident, Neg, Add, Sub, Mul, Div, Pow, Call };

/// The nine elementary functions of the metric DSL.
enum class ExprFn { Sin, Cos, Tan, Exp, Ln, Sqrt, Sinh, Cosh, Tanh };

struct ExprNode {
    ExprKind kind;
    double number = 0.0;      // Number
    std::string ident;        // Ident
    ExprFn fn = ExprFn::Sin;  // Call
    int exponent = 0;         // Pow (integer, validated at parse)
    std::unique_ptr<ExprNode> lhs, rhs;
    std::size_t pos = 0, end = 0; // byte span in the source string
};

/// Parsed expression. The node tree is immutable and shared, so Expr is a
/// cheap value type safe to share across threads.
class Expr {
public:
    Expr() = default;
    Expr(std::shared_ptr<const ExprNode> root, std::string source)
        : root_(std::move(root)), source_(std::move(source)) {}

    bool empty() const { return root_ == nullptr; }
    const ExprNode& root() const { return *root_; }
    const std::string& source() const { return source_; }

private:
    std::shared_ptr<const ExprNode> root_;
    std::string source_;
};

/// Recursive-descent parse with precedence ^ > unary minus > * / > + -,
/// left associativity for binary operators, right associativity for ^.
/// Every identifier must appear in `symbols`; ^ exponents must be integer
/// literals. Throws ParseError with byte offset on any violation.
Expr parse_expr(const std::string& source, const std::vector<std::string>& symbols);

/// Evaluates with jet arithmetic. `env` must bind every identifier in the
/// expression; all jets must share one dimension. Jet domain errors are
/// re-thrown tagged with the offending subexpression's source span.
Jet3 eval_expr(const Expr& expr, const std::map<std::string, Jet3>& env);

/// Minimal-parenthesis rendering; reparsing yields a structurally
/// identical tree.
std::string print_expr(const Expr& expr);

/// Rendering with identifiers substituted per `rename` (used when factor
/// coordinates are suffixed to keep product chart names disjoint).
std::string print_expr_renamed(const Expr& expr,
                               const std::map<std::string, std::string>& rename);

/// All identifiers referenced by the expression (deduplicated, sorted).
std::vector<std::string> expr_identifiers(const Expr& expr);

/// True if `name` is one of the nine elementary function names, which are
/// reserved words in the DSL.
bool is_reserved_function(const std::string& name);

bool expr_equal(const Expr& a, const Expr& b);

} // namespace concircle
