#pragma once

#include <memory>
#include <string>

#include "errors.hpp"

namespace mln {

// Closed-form expression in the variables x and t: arithmetic with + - * / ^,
// the constant pi, the functions sin, cos, exp, sqrt, abs, pos (positive
// part), and indicator(a,b) = 1 when a <= x <= b.  Used for manufactured
// data and targets in config files.
class Expression {
public:
    static Expression parse(const std::string& text);

    double eval(double x, double t = 0.0) const;
    const std::string& text() const { return text_; }

    Expression(Expression&&) noexcept;
    Expression& operator=(Expression&&) noexcept;
    Expression(const Expression&);
    Expression& operator=(const Expression&);
    ~Expression();

    struct Node;  // exposed for the evaluator implementation

private:
    Expression();
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace mln
