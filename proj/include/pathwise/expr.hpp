#pragma once

// Tiny arithmetic-expression compiler for user-supplied coefficient functions
// of one variable x. Grammar:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := unary ('^' factor)?          (right-associative power)
//   unary  := '-' unary | primary
//   primary:= number | 'x' | name '(' expr ')' | '(' expr ')'
//
// Functions: sqrt, exp, log, tanh, sinh, cosh, sin, cos, abs, max0
// (max0(y) = max(y, 0), handy for square-root diffusions).

#include <functional>
#include <string>

#include "pathwise/path.hpp"

namespace pathwise {

// Throws validation_error with a helpful message on malformed input.
std::function<double(double)> compile_expression(const std::string& source);

}  // namespace pathwise
