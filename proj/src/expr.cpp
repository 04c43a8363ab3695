#include "radplan/expr.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace radplan {

namespace {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt };

struct Node {
    Op op;
    double value = 0.0;
    std::unique_ptr<Node> lhs, rhs;
};

double eval(const Node& n, double r) {
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return r;
        case Op::Add: return eval(*n.lhs, r) + eval(*n.rhs, r);
        case Op::Sub: return eval(*n.lhs, r) - eval(*n.rhs, r);
        case Op::Mul: return eval(*n.lhs, r) * eval(*n.rhs, r);
        case Op::Div: return eval(*n.lhs, r) / eval(*n.rhs, r);
        case Op::Pow: return std::pow(eval(*n.lhs, r), eval(*n.rhs, r));
        case Op::Neg: return -eval(*n.lhs, r);
        case Op::Exp: return std::exp(eval(*n.lhs, r));
        case Op::Log: return std::log(eval(*n.lhs, r));
        case Op::Sqrt: return std::sqrt(eval(*n.lhs, r));
    }
    return 0.0;
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    std::unique_ptr<Node> parse() {
        auto n = expr();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("expression error at position " +
                                    std::to_string(pos_) + ": " + why);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    std::unique_ptr<Node> make(Op op, std::unique_ptr<Node> l = nullptr,
                               std::unique_ptr<Node> r = nullptr) {
        auto n = std::make_unique<Node>();
        n->op = op;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return n;
    }

    std::unique_ptr<Node> expr() {
        auto n = term();
        for (;;) {
            if (consume('+'))
                n = make(Op::Add, std::move(n), term());
            else if (consume('-'))
                n = make(Op::Sub, std::move(n), term());
            else
                return n;
        }
    }

    std::unique_ptr<Node> term() {
        auto n = unary();
        for (;;) {
            if (consume('*'))
                n = make(Op::Mul, std::move(n), unary());
            else if (consume('/'))
                n = make(Op::Div, std::move(n), unary());
            else
                return n;
        }
    }

    std::unique_ptr<Node> unary() {
        if (consume('-')) return make(Op::Neg, unary());
        return power();
    }

    std::unique_ptr<Node> power() {
        auto base = primary();
        if (consume('^')) return make(Op::Pow, std::move(base), unary());
        return base;
    }

    std::unique_ptr<Node> primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return ident();
        if (consume('(')) {
            auto n = expr();
            if (!consume(')')) fail("missing ')'");
            return n;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::unique_ptr<Node> number() {
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) ||
                text_[end] == '.' || text_[end] == 'e' || text_[end] == 'E' ||
                ((text_[end] == '+' || text_[end] == '-') && end > pos_ &&
                 (text_[end - 1] == 'e' || text_[end - 1] == 'E'))))
            ++end;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text_.substr(pos_, end - pos_), &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ += used;
        auto n = make(Op::Const);
        n->value = v;
        return n;
    }

    std::unique_ptr<Node> ident() {
        std::size_t end = pos_;
        while (end < text_.size() &&
               std::isalpha(static_cast<unsigned char>(text_[end])))
            ++end;
        std::string name = text_.substr(pos_, end - pos_);
        pos_ = end;
        if (name == "r") return make(Op::Var);
        Op op;
        if (name == "exp")
            op = Op::Exp;
        else if (name == "log")
            op = Op::Log;
        else if (name == "sqrt")
            op = Op::Sqrt;
        else
            fail("unknown identifier '" + name + "'");
        if (!consume('(')) fail("expected '(' after function name");
        auto arg = expr();
        if (!consume(')')) fail("missing ')'");
        return make(op, std::move(arg));
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace

ScalarFn compile_expr(const std::string& text) {
    Parser parser(text);
    std::shared_ptr<const Node> ast = parser.parse();
    return [ast](double r) { return eval(*ast, r); };
}

}  // namespace radplan
