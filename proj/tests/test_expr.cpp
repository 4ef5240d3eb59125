#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "concircle/errors.hpp"
#include "concircle/expr.hpp"

using namespace concircle;

namespace {

const std::vector<std::string> kXY = {"x", "y"};
const std::vector<std::string> kFX = {"f", "x"};
const std::vector<std::string> kZ = {"z"};

Jet3 eval1(const std::string& src, double x,
           const std::vector<std::string>& syms = {"x"}) {
    Expr e = parse_expr(src, syms);
    return eval_expr(e, {{"x", Jet3::variable(0, x, 1)}});
}

// random AST generator for the round-trip property
std::unique_ptr<ExprNode> random_ast(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 8);
    std::uniform_real_distribution<double> num(0.0, 9.5);
    auto n = std::make_unique<ExprNode>();
    switch (pick(rng)) {
        case 0:
            n->kind = ExprKind::Number;
            n->number = std::round(num(rng) * 4) / 4;
            break;
        case 1:
            n->kind = ExprKind::Ident;
            n->ident = (rng() & 1) ? "x" : "y";
            break;
        case 2:
            n->kind = ExprKind::Neg;
            n->lhs = random_ast(rng, depth - 1);
            break;
        case 3:
        case 4:
        case 5: {
            const ExprKind kinds[] = {ExprKind::Add, ExprKind::Sub, ExprKind::Mul,
                                      ExprKind::Div};
            n->kind = kinds[rng() % 4];
            n->lhs = random_ast(rng, depth - 1);
            n->rhs = random_ast(rng, depth - 1);
            break;
        }
        case 6: {
            n->kind = ExprKind::Pow;
            n->exponent = static_cast<int>(rng() % 7) - 3;
            n->lhs = random_ast(rng, depth - 1);
            break;
        }
        default: {
            n->kind = ExprKind::Call;
            const ExprFn fns[] = {ExprFn::Sin, ExprFn::Cos,  ExprFn::Tan,
                                  ExprFn::Exp, ExprFn::Ln,   ExprFn::Sqrt,
                                  ExprFn::Sinh, ExprFn::Cosh, ExprFn::Tanh};
            n->fn = fns[rng() % 9];
            n->lhs = random_ast(rng, depth - 1);
            break;
        }
    }
    return n;
}

} // namespace

TEST_CASE("grammar-forced shapes") {
    Expr e = parse_expr("f^2 * sin(x)^2", kFX);
    const ExprNode& r = e.root();
    REQUIRE(r.kind == ExprKind::Mul);
    CHECK(r.lhs->kind == ExprKind::Pow);
    CHECK(r.lhs->lhs->kind == ExprKind::Ident);
    CHECK(r.lhs->lhs->ident == "f");
    CHECK(r.lhs->exponent == 2);
    CHECK(r.rhs->kind == ExprKind::Pow);
    CHECK(r.rhs->lhs->kind == ExprKind::Call);
    CHECK(r.rhs->lhs->fn == ExprFn::Sin);

    Expr neg = parse_expr("-x^2", {"x"});
    REQUIRE(neg.root().kind == ExprKind::Neg);
    CHECK(neg.root().lhs->kind == ExprKind::Pow);
    CHECK(neg.root().lhs->exponent == 2);

    Expr div = parse_expr("1/z^2", kZ);
    REQUIRE(div.root().kind == ExprKind::Div);
    CHECK(div.root().lhs->kind == ExprKind::Number);
    CHECK(div.root().rhs->kind == ExprKind::Pow);
}

TEST_CASE("precedence and associativity") {
    // left associative subtraction: 1 - 2 - 3 = (1-2)-3
    Expr e = parse_expr("1 - 2 - 3", {});
    REQUIRE(e.root().kind == ExprKind::Sub);
    CHECK(e.root().lhs->kind == ExprKind::Sub);

    // * binds tighter than +
    Expr f = parse_expr("1 + 2 * 3", {});
    REQUIRE(f.root().kind == ExprKind::Add);
    CHECK(f.root().rhs->kind == ExprKind::Mul);

    // integer power towers fold right-associatively: x^2^3 = x^8
    Expr g = parse_expr("x^2^3", {"x"});
    REQUIRE(g.root().kind == ExprKind::Pow);
    CHECK(g.root().exponent == 8);

    // negative exponents
    Expr h = parse_expr("x^-2", {"x"});
    CHECK(h.root().exponent == -2);
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK_THROWS_AS(parse_expr("", {}), ParseError);
    CHECK_THROWS_AS(parse_expr("x + ", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_expr("(x + 1", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_expr("x + q", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_expr("x^2.5", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_expr("x^y", {"x", "y"}), ParseError);
    CHECK_THROWS_AS(parse_expr("2x", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_expr("sin x", {"x"}), ParseError);
    CHECK_THROWS_AS(parse_expr("sin", {"x"}), ParseError);

    try {
        parse_expr("x + unknown_one", {"x"});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
        CHECK(std::string(e.what()).find("unknown_one") != std::string::npos);
    }
}

TEST_CASE("evaluation examples") {
    Jet3 sq = eval1("x^2", 3.0);
    CHECK(sq.value() == 9.0);
    CHECK(sq.derivative({0}) == 6.0);
    CHECK(sq.derivative({0, 0}) == 2.0);

    Jet3 s2 = eval1("sin(x)^2", M_PI / 3);
    CHECK(s2.value() == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(s2.derivative({0}) ==
          doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));

    Expr e = parse_expr("1/z^2", kZ);
    Jet3 r = eval_expr(e, {{"z", Jet3::variable(0, 2.0, 1)}});
    CHECK(r.value() == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(r.derivative({0}) == doctest::Approx(-0.25).epsilon(1e-13));
}

TEST_CASE("domain errors are tagged with the source span") {
    try {
        eval1("1 + ln(x - 2)", 1.0);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("ln(x - 2)") != std::string::npos);
    }
    try {
        eval1("1/(x - 1)", 1.0);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("1/(x - 1)") != std::string::npos);
    }
}

TEST_CASE("round-trip: print then reparse is structurally identical") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 1000; ++trial) {
        auto root = random_ast(rng, 6);
        Expr original(std::shared_ptr<const ExprNode>(root.release()), "");
        const std::string text = print_expr(original);
        CAPTURE(text);
        Expr back = parse_expr(text, kXY);
        CHECK(expr_equal(original, back));
    }
}

TEST_CASE("evaluation corpus matches closed forms") {
    struct Entry {
        const char* src;
        std::function<double(double, double)> f;
    };
    const std::vector<Entry> corpus = {
        {"x + y", [](double x, double y) { return x + y; }},
        {"x - y", [](double x, double y) { return x - y; }},
        {"x * y", [](double x, double y) { return x * y; }},
        {"x / y", [](double x, double y) { return x / y; }},
        {"-x", [](double x, double) { return -x; }},
        {"x^3", [](double x, double) { return x * x * x; }},
        {"x^-1", [](double x, double) { return 1 / x; }},
        {"sin(x) * cos(y)", [](double x, double y) { return std::sin(x) * std::cos(y); }},
        {"tan(x / 2)", [](double x, double) { return std::tan(x / 2); }},
        {"exp(x - y)", [](double x, double y) { return std::exp(x - y); }},
        {"ln(x + 2)", [](double x, double) { return std::log(x + 2); }},
        {"sqrt(x + 3)", [](double x, double) { return std::sqrt(x + 3); }},
        {"sinh(x) + cosh(y)", [](double x, double y) { return std::sinh(x) + std::cosh(y); }},
        {"tanh(x * y)", [](double x, double y) { return std::tanh(x * y); }},
        {"(x + y)^2", [](double x, double y) { return (x + y) * (x + y); }},
        {"1 + 2 * x - y / 4", [](double x, double y) { return 1 + 2 * x - y / 4; }},
        {"x^2 * y^2", [](double x, double y) { return x * x * y * y; }},
        {"-(x - y)^3", [](double x, double y) { return -std::pow(x - y, 3); }},
        {"exp(sin(x))", [](double x, double) { return std::exp(std::sin(x)); }},
        {"1/(1 + x^2)", [](double x, double) { return 1 / (1 + x * x); }},
    };
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.4, 1.6);
    for (const auto& entry : corpus) {
        Expr e = parse_expr(entry.src, kXY);
        for (int trial = 0; trial < 100; ++trial) {
            const double x = u(rng), y = u(rng);
            Jet3 jet = eval_expr(e, {{"x", Jet3::variable(0, x, 2)},
                                     {"y", Jet3::variable(1, y, 2)}});
            const double expect = entry.f(x, y);
            CAPTURE(entry.src);
            CHECK(std::abs(jet.value() - expect) <=
                  1e-12 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("fuzz: random token streams never crash the parser") {
    const std::vector<std::string> tokens = {
        "x", "y",  "1", "2.5", "0.3", "+", "-",  "*",   "/",    "^",
        "(", ")",  "sin", "cos", "exp", "ln", "sqrt", "tanh", "q_unknown", "17"};
    std::mt19937_64 rng(99);
    int ok = 0, err = 0;
    for (int trial = 0; trial < 20000; ++trial) {
        std::string src;
        const int len = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < len; ++i) {
            src += tokens[rng() % tokens.size()];
            src += ' ';
        }
        try {
            parse_expr(src, kXY);
            ++ok;
        } catch (const ParseError&) {
            ++err;
        }
        // anything else escapes and fails the test
    }
    CHECK(ok + err == 20000);
    CHECK(ok > 0);
    CHECK(err > 0);
}
