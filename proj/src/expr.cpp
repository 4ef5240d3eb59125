#include "concircle/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "concircle/errors.hpp"

namespace concircle {
namespace {

const std::array<std::pair<const char*, ExprFn>, 9> kFunctions = {{
    {"sin", ExprFn::Sin},
    {"cos", ExprFn::Cos},
    {"tan", ExprFn::Tan},
    {"exp", ExprFn::Exp},
    {"ln", ExprFn::Ln},
    {"sqrt", ExprFn::Sqrt},
    {"sinh", ExprFn::Sinh},
    {"cosh", ExprFn::Cosh},
    {"tanh", ExprFn::Tanh},
}};

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    std::string text;
    double value = 0.0;
    bool is_integer = false;
    std::size_t pos = 0, end = 0;
};

std::vector<Token> tokenize(const std::string& src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            bool integral = true;
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            if (i < src.size() && src[i] == '.') {
                integral = false;
                ++i;
                if (i >= src.size() || !std::isdigit(static_cast<unsigned char>(src[i])))
                    throw ParseError("digit expected after decimal point", i);
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                integral = false;
                ++i;
                if (i < src.size() && (src[i] == '+' || src[i] == '-')) ++i;
                if (i >= src.size() || !std::isdigit(static_cast<unsigned char>(src[i])))
                    throw ParseError("digit expected in exponent", i);
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            Token t{Tok::Number, src.substr(start, i - start), 0.0, integral, start, i};
            auto [ptr, ec] = std::from_chars(src.data() + start, src.data() + i, t.value);
            if (ec != std::errc() || ptr != src.data() + i)
                throw ParseError("malformed number literal", start);
            out.push_back(std::move(t));
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
                ++i;
            out.push_back({Tok::Ident, src.substr(start, i - start), 0.0, false, start, i});
            continue;
        }
        Tok k;
        switch (c) {
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case '/': k = Tok::Slash; break;
            case '^': k = Tok::Caret; break;
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", i);
        }
        out.push_back({k, src.substr(start, 1), 0.0, false, start, start + 1});
        ++i;
    }
    out.push_back({Tok::End, "", 0.0, false, src.size(), src.size()});
    return out;
}

using NodePtr = std::unique_ptr<ExprNode>;

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& symbols)
        : src_(src), tokens_(tokenize(src)), symbols_(symbols.begin(), symbols.end()) {}

    NodePtr parse() {
        if (tokens_.front().kind == Tok::End)
            throw ParseError("empty expression", 0);
        NodePtr e = sum();
        if (peek().kind != Tok::End)
            throw ParseError("unexpected token '" + peek().text + "'", peek().pos);
        return e;
    }

private:
    const Token& peek() const { return tokens_[cursor_]; }
    Token take() { return tokens_[cursor_++]; }
    bool accept(Tok k) {
        if (peek().kind == k) {
            ++cursor_;
            return true;
        }
        return false;
    }

    static NodePtr make(ExprKind kind, std::size_t pos, std::size_t end) {
        auto n = std::make_unique<ExprNode>();
        n->kind = kind;
        n->pos = pos;
        n->end = end;
        return n;
    }

    NodePtr sum() {
        NodePtr lhs = term();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const Token op = take();
            NodePtr rhs = term();
            NodePtr n = make(op.kind == Tok::Plus ? ExprKind::Add : ExprKind::Sub,
                             lhs->pos, rhs->end);
            n->lhs = std::move(lhs);
            n->rhs = std::move(rhs);
            lhs = std::move(n);
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const Token op = take();
            NodePtr rhs = unary();
            NodePtr n = make(op.kind == Tok::Star ? ExprKind::Mul : ExprKind::Div,
                             lhs->pos, rhs->end);
            n->lhs = std::move(lhs);
            n->rhs = std::move(rhs);
            lhs = std::move(n);
        }
        return lhs;
    }

    NodePtr unary() {
        if (peek().kind == Tok::Minus) {
            const Token op = take();
            NodePtr child = unary();
            NodePtr n = make(ExprKind::Neg, op.pos, child->end);
            n->lhs = std::move(child);
            return n;
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (peek().kind == Tok::Caret) {
            take();
            std::size_t end = 0;
            const long long e = exponent(end);
            if (e > 64 || e < -64)
                throw ParseError("exponent magnitude exceeds 64", peek().pos);
            NodePtr n = make(ExprKind::Pow, base->pos, end);
            n->exponent = static_cast<int>(e);
            n->lhs = std::move(base);
            return n;
        }
        return base;
    }

    // exponent := ['-'] INT ['^' exponent]; integer towers fold right to a
    // single integer, so x^2^3 means x^(2^3).
    long long exponent(std::size_t& end) {
        bool negative = false;
        if (accept(Tok::Minus)) negative = true;
        const Token t = peek();
        if (t.kind != Tok::Number || !t.is_integer)
            throw ParseError("exponent must be an integer literal", t.pos);
        take();
        long long v = static_cast<long long>(t.value);
        end = t.end;
        if (peek().kind == Tok::Caret) {
            take();
            const long long inner = exponent(end);
            if (inner < 0)
                throw ParseError("negative exponent inside a power tower", t.pos);
            long long folded = 1;
            for (long long k = 0; k < inner; ++k) {
                folded *= v;
                if (folded > 1'000'000 || folded < -1'000'000)
                    throw ParseError("exponent tower overflows", t.pos);
            }
            v = folded;
        }
        return negative ? -v : v;
    }

    NodePtr atom() {
        const Token t = peek();
        switch (t.kind) {
            case Tok::Number: {
                take();
                NodePtr n = make(ExprKind::Number, t.pos, t.end);
                n->number = t.value;
                return n;
            }
            case Tok::Ident: {
                take();
                const auto fn =
                    std::find_if(kFunctions.begin(), kFunctions.end(),
                                 [&](const auto& f) { return f.first == t.text; });
                if (fn != kFunctions.end()) {
                    if (!accept(Tok::LParen))
                        throw ParseError("function '" + t.text +
                                             "' must be followed by '('",
                                         t.pos);
                    NodePtr arg = sum();
                    if (!accept(Tok::RParen))
                        throw ParseError("missing ')' after argument of '" + t.text + "'",
                                         peek().pos);
                    NodePtr n = make(ExprKind::Call, t.pos, tokens_[cursor_ - 1].end);
                    n->fn = fn->second;
                    n->lhs = std::move(arg);
                    return n;
                }
                if (!symbols_.count(t.text))
                    throw ParseError("unknown identifier '" + t.text + "'", t.pos);
                NodePtr n = make(ExprKind::Ident, t.pos, t.end);
                n->ident = t.text;
                return n;
            }
            case Tok::LParen: {
                take();
                NodePtr inner = sum();
                if (!accept(Tok::RParen))
                    throw ParseError("unbalanced parentheses", peek().pos);
                // grouping is erased, but the span keeps the parentheses
                inner->pos = t.pos;
                inner->end = tokens_[cursor_ - 1].end;
                return inner;
            }
            default:
                throw ParseError("expected a number, identifier, or '('", t.pos);
        }
    }

    const std::string& src_;
    std::vector<Token> tokens_;
    std::set<std::string> symbols_;
    std::size_t cursor_ = 0;
};

Jet3 eval_node(const ExprNode& n, const std::map<std::string, Jet3>& env,
               const std::string& source, int dim) {
    switch (n.kind) {
        case ExprKind::Number:
            return Jet3::constant(n.number, dim);
        case ExprKind::Ident: {
            const auto it = env.find(n.ident);
            if (it == env.end())
                throw ArgumentError("unbound identifier '" + n.ident + "'");
            return it->second;
        }
        case ExprKind::Neg:
            return -eval_node(*n.lhs, env, source, dim);
        case ExprKind::Add:
            return eval_node(*n.lhs, env, source, dim) + eval_node(*n.rhs, env, source, dim);
        case ExprKind::Sub:
            return eval_node(*n.lhs, env, source, dim) - eval_node(*n.rhs, env, source, dim);
        case ExprKind::Mul:
            return eval_node(*n.lhs, env, source, dim) * eval_node(*n.rhs, env, source, dim);
        case ExprKind::Div: {
            const Jet3 a = eval_node(*n.lhs, env, source, dim);
            const Jet3 b = eval_node(*n.rhs, env, source, dim);
            try {
                return a / b;
            } catch (const DomainError& e) {
                throw DomainError(std::string(e.what()) + " in '" +
                                  source.substr(n.pos, n.end - n.pos) + "'");
            }
        }
        case ExprKind::Pow: {
            const Jet3 a = eval_node(*n.lhs, env, source, dim);
            try {
                return pow_int(a, n.exponent);
            } catch (const DomainError& e) {
                throw DomainError(std::string(e.what()) + " in '" +
                                  source.substr(n.pos, n.end - n.pos) + "'");
            }
        }
        case ExprKind::Call: {
            const Jet3 a = eval_node(*n.lhs, env, source, dim);
            try {
                switch (n.fn) {
                    case ExprFn::Sin: return sin(a);
                    case ExprFn::Cos: return cos(a);
                    case ExprFn::Tan: return tan(a);
                    case ExprFn::Exp: return exp(a);
                    case ExprFn::Ln: return ln(a);
                    case ExprFn::Sqrt: return sqrt(a);
                    case ExprFn::Sinh: return sinh(a);
                    case ExprFn::Cosh: return cosh(a);
                    case ExprFn::Tanh: return tanh(a);
                }
            } catch (const DomainError& e) {
                throw DomainError(std::string(e.what()) + " in '" +
                                  source.substr(n.pos, n.end - n.pos) + "'");
            }
            throw ArgumentError("unreachable: bad function tag");
        }
    }
    throw ArgumentError("unreachable: bad node kind");
}

int precedence(const ExprNode& n) {
    switch (n.kind) {
        case ExprKind::Add:
        case ExprKind::Sub: return 1;
        case ExprKind::Mul:
        case ExprKind::Div: return 2;
        case ExprKind::Neg: return 3;
        case ExprKind::Pow: return 4;
        default: return 5;
    }
}

const char* fn_name(ExprFn f) {
    for (const auto& [name, fn] : kFunctions)
        if (fn == f) return name;
    return "?";
}

std::string format_number(double v) {
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_node(const ExprNode& n, int min_prec, std::string& out,
                const std::map<std::string, std::string>* rename = nullptr) {
    const bool parens = precedence(n) < min_prec;
    if (parens) out += '(';
    switch (n.kind) {
        case ExprKind::Number:
            out += format_number(n.number);
            break;
        case ExprKind::Ident:
            if (rename) {
                const auto it = rename->find(n.ident);
                out += it == rename->end() ? n.ident : it->second;
            } else {
                out += n.ident;
            }
            break;
        case ExprKind::Neg:
            out += '-';
            print_node(*n.lhs, 3, out, rename);
            break;
        case ExprKind::Add:
            print_node(*n.lhs, 1, out, rename);
            out += " + ";
            print_node(*n.rhs, 2, out, rename);
            break;
        case ExprKind::Sub:
            print_node(*n.lhs, 1, out, rename);
            out += " - ";
            print_node(*n.rhs, 2, out, rename);
            break;
        case ExprKind::Mul:
            print_node(*n.lhs, 2, out, rename);
            out += " * ";
            print_node(*n.rhs, 3, out, rename);
            break;
        case ExprKind::Div:
            print_node(*n.lhs, 2, out, rename);
            out += " / ";
            print_node(*n.rhs, 3, out, rename);
            break;
        case ExprKind::Pow:
            print_node(*n.lhs, 5, out, rename);
            out += '^';
            if (n.exponent < 0) out += '-';
            out += std::to_string(std::abs(static_cast<long long>(n.exponent)));
            break;
        case ExprKind::Call:
            out += fn_name(n.fn);
            out += '(';
            print_node(*n.lhs, 0, out, rename);
            out += ')';
            break;
    }
    if (parens) out += ')';
}

void collect_identifiers(const ExprNode& n, std::set<std::string>& out) {
    if (n.kind == ExprKind::Ident) out.insert(n.ident);
    if (n.lhs) collect_identifiers(*n.lhs, out);
    if (n.rhs) collect_identifiers(*n.rhs, out);
}

bool node_equal(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprKind::Number: return a.number == b.number;
        case ExprKind::Ident: return a.ident == b.ident;
        case ExprKind::Pow:
            return a.exponent == b.exponent && node_equal(*a.lhs, *b.lhs);
        case ExprKind::Call:
            return a.fn == b.fn && node_equal(*a.lhs, *b.lhs);
        case ExprKind::Neg:
            return node_equal(*a.lhs, *b.lhs);
        default:
            return node_equal(*a.lhs, *b.lhs) && node_equal(*a.rhs, *b.rhs);
    }
}

} // namespace

Expr parse_expr(const std::string& source, const std::vector<std::string>& symbols) {
    Parser p(source, symbols);
    return Expr(std::shared_ptr<const ExprNode>(p.parse().release()), source);
}

Jet3 eval_expr(const Expr& expr, const std::map<std::string, Jet3>& env) {
    if (expr.empty()) throw ArgumentError("evaluating an empty expression");
    if (env.empty()) throw ArgumentError("empty evaluation environment");
    const int dim = env.begin()->second.dim();
    return eval_node(expr.root(), env, expr.source(), dim);
}

std::string print_expr(const Expr& expr) {
    if (expr.empty()) return "";
    std::string out;
    print_node(expr.root(), 0, out);
    return out;
}

std::string print_expr_renamed(const Expr& expr,
                               const std::map<std::string, std::string>& rename) {
    if (expr.empty()) return "";
    std::string out;
    print_node(expr.root(), 0, out, &rename);
    return out;
}

std::vector<std::string> expr_identifiers(const Expr& expr) {
    std::set<std::string> s;
    if (!expr.empty()) collect_identifiers(expr.root(), s);
    return {s.begin(), s.end()};
}

bool is_reserved_function(const std::string& name) {
    return std::any_of(kFunctions.begin(), kFunctions.end(),
                       [&](const auto& f) { return f.first == name; });
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    return node_equal(a.root(), b.root());
}

} // namespace concircle
