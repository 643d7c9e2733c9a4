#include "expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace mln {

struct Expression::Node {
    enum class Kind { Num, VarX, VarT, Add, Sub, Mul, Div, Pow, Neg, Fun } kind;
    double num = 0;
    std::string fun;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

struct Parser {
    const std::string& src;
    size_t pos = 0;

    explicit Parser(const std::string& s) : src(s) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression error at position " +
                          std::to_string(pos) + ": " + what + " in '" + src +
                          "'");
    }

    void skip() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
            ++pos;
    }

    bool eat(char c) {
        skip();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip();
        return pos < src.size() ? src[pos] : '\0';
    }

    NodePtr make(Expression::Node n) {
        return std::make_shared<Expression::Node>(std::move(n));
    }

    Expression::Node blank(Expression::Node::Kind k) {
        Expression::Node n{};
        n.kind = k;
        return n;
    }

    NodePtr number() {
        skip();
        size_t end = pos;
        while (end < src.size() &&
               (std::isdigit(static_cast<unsigned char>(src[end])) ||
                src[end] == '.' || src[end] == 'e' || src[end] == 'E' ||
                ((src[end] == '+' || src[end] == '-') && end > pos &&
                 (src[end - 1] == 'e' || src[end - 1] == 'E'))))
            ++end;
        if (end == pos) fail("expected a number");
        Expression::Node n;
        n.kind = Expression::Node::Kind::Num;
        try {
            n.num = std::stod(src.substr(pos, end - pos));
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos = end;
        return make(std::move(n));
    }

    NodePtr identifier() {
        skip();
        size_t end = pos;
        while (end < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[end])) ||
                src[end] == '_'))
            ++end;
        std::string name = src.substr(pos, end - pos);
        pos = end;
        using K = Expression::Node::Kind;
        if (name == "x") return make(blank(K::VarX));
        if (name == "t") return make(blank(K::VarT));
        if (name == "pi") {
            Expression::Node n = blank(K::Num);
            n.num = M_PI;
            return make(std::move(n));
        }
        static const char* fns[] = {"sin", "cos", "exp", "sqrt", "abs", "pos",
                                    "indicator"};
        for (const char* f : fns) {
            if (name != f) continue;
            if (!eat('(')) fail("expected '(' after " + name);
            Expression::Node n = blank(K::Fun);
            n.fun = name;
            n.a = expr();
            if (name == std::string("indicator")) {
                if (!eat(',')) fail("indicator(a,b) needs two arguments");
                n.b = expr();
            }
            if (!eat(')')) fail("missing ')'");
            return make(std::move(n));
        }
        fail("unknown identifier '" + name + "'");
    }

    NodePtr primary() {
        skip();
        if (eat('(')) {
            NodePtr e = expr();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        const char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("expected a value");
    }

    NodePtr power() {  // right-associative
        NodePtr base = primary();
        if (eat('^')) {
            Expression::Node n = blank(Expression::Node::Kind::Pow);
            n.a = base;
            n.b = unary();
            return make(std::move(n));
        }
        return base;
    }

    NodePtr unary() {
        if (eat('-')) {
            Expression::Node n = blank(Expression::Node::Kind::Neg);
            n.a = unary();
            return make(std::move(n));
        }
        eat('+');
        return power();
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (true) {
            if (eat('*')) {
                Expression::Node n = blank(Expression::Node::Kind::Mul);
                n.a = lhs;
                n.b = unary();
                lhs = make(std::move(n));
            } else if (eat('/')) {
                Expression::Node n = blank(Expression::Node::Kind::Div);
                n.a = lhs;
                n.b = unary();
                lhs = make(std::move(n));
            } else {
                return lhs;
            }
        }
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (true) {
            if (eat('+')) {
                Expression::Node n = blank(Expression::Node::Kind::Add);
                n.a = lhs;
                n.b = term();
                lhs = make(std::move(n));
            } else if (eat('-')) {
                Expression::Node n = blank(Expression::Node::Kind::Sub);
                n.a = lhs;
                n.b = term();
                lhs = make(std::move(n));
            } else {
                return lhs;
            }
        }
    }
};

double eval_node(const Expression::Node& n, double x, double t) {
    using K = Expression::Node::Kind;
    switch (n.kind) {
        case K::Num: return n.num;
        case K::VarX: return x;
        case K::VarT: return t;
        case K::Add: return eval_node(*n.a, x, t) + eval_node(*n.b, x, t);
        case K::Sub: return eval_node(*n.a, x, t) - eval_node(*n.b, x, t);
        case K::Mul: return eval_node(*n.a, x, t) * eval_node(*n.b, x, t);
        case K::Div: return eval_node(*n.a, x, t) / eval_node(*n.b, x, t);
        case K::Pow:
            return std::pow(eval_node(*n.a, x, t), eval_node(*n.b, x, t));
        case K::Neg: return -eval_node(*n.a, x, t);
        case K::Fun: {
            const double a = eval_node(*n.a, x, t);
            if (n.fun == "sin") return std::sin(a);
            if (n.fun == "cos") return std::cos(a);
            if (n.fun == "exp") return std::exp(a);
            if (n.fun == "sqrt") return std::sqrt(a);
            if (n.fun == "abs") return std::abs(a);
            if (n.fun == "pos") return a > 0 ? a : 0.0;
            // indicator(a,b): 1 when a <= x <= b
            const double b = eval_node(*n.b, x, t);
            return (x >= a && x <= b) ? 1.0 : 0.0;
        }
    }
    return 0;
}

}  // namespace

Expression::Expression() = default;
Expression::~Expression() = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;
Expression::Expression(const Expression&) = default;
Expression& Expression::operator=(const Expression&) = default;

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    e.text_ = text;
    return e;
}

double Expression::eval(double x, double t) const {
    if (!root_) throw ConfigError("empty expression");
    return eval_node(*root_, x, t);
}

}  // namespace mln
