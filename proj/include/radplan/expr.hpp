#pragma once

#include <memory>
#include <string>

#include "radplan/nonlinearity.hpp"

namespace radplan {

/// Compiles a coefficient expression in the variable r into a callable.
/// Grammar: numbers, r, + - * / ^ (right-assoc), unary minus, parentheses,
/// and the functions exp, log, sqrt. Throws std::invalid_argument with the
/// offending position on parse errors.
ScalarFn compile_expr(const std::string& text);

}  // namespace radplan
