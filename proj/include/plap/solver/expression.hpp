#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "plap/core/error.hpp"

namespace plap {

/// Closed-form scalar expressions in t, x, y. Grammar:
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | 't' | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
///   func    := sin cos exp log abs sqrt sign step
///
/// `step(a)` is 1 for a >= 0 and 0 otherwise. abs, sign and step are
/// differentiated almost everywhere.
class Expr {
  public:
    enum class Op { constant, var_t, var_x, var_y, add, sub, mul, div, neg, pow, sin, cos, exp, log, abs, sqrt, sign, step };

    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double v) { return Expr(std::make_shared<Node>(Node{Op::constant, v, {}, {}})); }
    static Expr var(char name) {
        switch (name) {
        case 't':
            return make(Op::var_t);
        case 'x':
            return make(Op::var_x);
        case 'y':
            return make(Op::var_y);
        default:
            throw DescriptorError(std::string("unknown variable '") + name + "'");
        }
    }

    static Expr parse(const std::string& text) {
        Parser p{text, 0};
        Expr e = p.expr();
        p.skip();
        if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
        return e;
    }

    double eval(double t, double x = 0.0, double y = 0.0) const { return eval_node(*node_, t, x, y); }

    /// d/d(var) for var in {'t', 'x', 'y'}.
    Expr derivative(char var) const {
        const Op target = var == 't' ? Op::var_t : var == 'x' ? Op::var_x : var == 'y' ? Op::var_y : Op::constant;
        if (target == Op::constant) throw DescriptorError(std::string("cannot differentiate in '") + var + "'");
        return diff(*this, target);
    }

    bool is_constant() const { return node_->op == Op::constant; }
    bool is_zero() const { return is_constant() && node_->value == 0.0; }
    double constant_value() const { return node_->value; }
    /// True if the variable occurs anywhere in the tree.
    bool depends_on(char var) const {
        const Op target = var == 't' ? Op::var_t : var == 'x' ? Op::var_x : Op::var_y;
        return contains(*node_, target);
    }

    std::string str() const { return print(*node_); }

    friend Expr operator+(const Expr& a, const Expr& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.is_constant() && b.is_constant()) return constant(a.constant_value() + b.constant_value());
        return make(Op::add, a, b);
    }
    friend Expr operator-(const Expr& a, const Expr& b) {
        if (b.is_zero()) return a;
        if (a.is_zero()) return -b;
        if (a.is_constant() && b.is_constant()) return constant(a.constant_value() - b.constant_value());
        return make(Op::sub, a, b);
    }
    friend Expr operator*(const Expr& a, const Expr& b) {
        if (a.is_zero() || b.is_zero()) return constant(0.0);
        if (a.is_constant() && a.constant_value() == 1.0) return b;
        if (b.is_constant() && b.constant_value() == 1.0) return a;
        if (a.is_constant() && b.is_constant()) return constant(a.constant_value() * b.constant_value());
        return make(Op::mul, a, b);
    }
    friend Expr operator/(const Expr& a, const Expr& b) {
        if (a.is_zero()) return constant(0.0);
        if (b.is_constant() && b.constant_value() == 1.0) return a;
        if (a.is_constant() && b.is_constant()) return constant(a.constant_value() / b.constant_value());
        return make(Op::div, a, b);
    }
    friend Expr operator-(const Expr& a) {
        if (a.is_constant()) return constant(-a.constant_value());
        return make(Op::neg, a);
    }
    friend Expr pow(const Expr& a, const Expr& b) {
        if (b.is_constant() && b.constant_value() == 1.0) return a;
        if (b.is_zero()) return constant(1.0);
        if (a.is_constant() && b.is_constant()) return constant(std::pow(a.constant_value(), b.constant_value()));
        return make(Op::pow, a, b);
    }
    static Expr apply(Op f, const Expr& a) {
        if (a.is_constant()) return constant(eval_unary(f, a.constant_value()));
        return make(f, a);
    }

  private:
    struct Node {
        Op op;
        double value;
        std::shared_ptr<const Node> a;
        std::shared_ptr<const Node> b;
    };

    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static Expr make(Op op) { return Expr(std::make_shared<Node>(Node{op, 0.0, {}, {}})); }
    static Expr make(Op op, const Expr& a) { return Expr(std::make_shared<Node>(Node{op, 0.0, a.node_, {}})); }
    static Expr make(Op op, const Expr& a, const Expr& b) {
        return Expr(std::make_shared<Node>(Node{op, 0.0, a.node_, b.node_}));
    }
    static Expr wrap(const std::shared_ptr<const Node>& n) { return Expr(n); }

    static double eval_unary(Op f, double v) {
        switch (f) {
        case Op::sin:
            return std::sin(v);
        case Op::cos:
            return std::cos(v);
        case Op::exp:
            return std::exp(v);
        case Op::log:
            return std::log(v);
        case Op::abs:
            return std::abs(v);
        case Op::sqrt:
            return std::sqrt(v);
        case Op::sign:
            return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
        case Op::step:
            return v >= 0.0 ? 1.0 : 0.0;
        case Op::neg:
            return -v;
        default:
            throw DescriptorError("not a unary function");
        }
    }

    static double eval_node(const Node& n, double t, double x, double y) {
        switch (n.op) {
        case Op::constant:
            return n.value;
        case Op::var_t:
            return t;
        case Op::var_x:
            return x;
        case Op::var_y:
            return y;
        case Op::add:
            return eval_node(*n.a, t, x, y) + eval_node(*n.b, t, x, y);
        case Op::sub:
            return eval_node(*n.a, t, x, y) - eval_node(*n.b, t, x, y);
        case Op::mul:
            return eval_node(*n.a, t, x, y) * eval_node(*n.b, t, x, y);
        case Op::div:
            return eval_node(*n.a, t, x, y) / eval_node(*n.b, t, x, y);
        case Op::pow:
            return std::pow(eval_node(*n.a, t, x, y), eval_node(*n.b, t, x, y));
        default:
            return eval_unary(n.op, eval_node(*n.a, t, x, y));
        }
    }

    static bool contains(const Node& n, Op target) {
        if (n.op == target) return true;
        return (n.a && contains(*n.a, target)) || (n.b && contains(*n.b, target));
    }

    static Expr diff(const Expr& e, Op target) {
        const Node& n = *e.node_;
        switch (n.op) {
        case Op::constant:
            return constant(0.0);
        case Op::var_t:
        case Op::var_x:
        case Op::var_y:
            return constant(n.op == target ? 1.0 : 0.0);
        default:
            break;
        }
        const Expr a = wrap(n.a);
        const Expr da = diff(a, target);
        switch (n.op) {
        case Op::add:
            return da + diff(wrap(n.b), target);
        case Op::sub:
            return da - diff(wrap(n.b), target);
        case Op::mul: {
            const Expr b = wrap(n.b);
            return da * b + a * diff(b, target);
        }
        case Op::div: {
            const Expr b = wrap(n.b);
            return (da * b - a * diff(b, target)) / (b * b);
        }
        case Op::neg:
            return -da;
        case Op::pow: {
            const Expr b = wrap(n.b);
            const Expr db = diff(b, target);
            Expr out = constant(0.0);
            if (!da.is_zero()) out = out + b * pow(a, b - constant(1.0)) * da;
            if (!db.is_zero()) out = out + e * apply(Op::log, a) * db;
            return out;
        }
        case Op::sin:
            return apply(Op::cos, a) * da;
        case Op::cos:
            return -(apply(Op::sin, a) * da);
        case Op::exp:
            return e * da;
        case Op::log:
            return da / a;
        case Op::abs:
            return apply(Op::sign, a) * da;
        case Op::sqrt:
            return da / (constant(2.0) * e);
        case Op::sign:
        case Op::step:
            return constant(0.0);
        default:
            throw DescriptorError("cannot differentiate expression");
        }
    }

    static std::string print(const Node& n) {
        auto bin = [&](const char* op) { return "(" + print(*n.a) + op + print(*n.b) + ")"; };
        auto fn = [&](const char* name) { return std::string(name) + "(" + print(*n.a) + ")"; };
        switch (n.op) {
        case Op::constant: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            return n.value < 0 ? std::string("(") + buf + ")" : buf;
        }
        case Op::var_t:
            return "t";
        case Op::var_x:
            return "x";
        case Op::var_y:
            return "y";
        case Op::add:
            return bin("+");
        case Op::sub:
            return bin("-");
        case Op::mul:
            return bin("*");
        case Op::div:
            return bin("/");
        case Op::pow:
            return bin("^");
        case Op::neg:
            return "(-" + print(*n.a) + ")";
        case Op::sin:
            return fn("sin");
        case Op::cos:
            return fn("cos");
        case Op::exp:
            return fn("exp");
        case Op::log:
            return fn("log");
        case Op::abs:
            return fn("abs");
        case Op::sqrt:
            return fn("sqrt");
        case Op::sign:
            return fn("sign");
        case Op::step:
            return fn("step");
        }
        return "?";
    }

    struct Parser {
        const std::string& s;
        std::size_t pos;

        [[noreturn]] void fail(const std::string& why) const {
            throw DescriptorError("expression '" + s + "' at " + std::to_string(pos) + ": " + why);
        }
        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool eat(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        Expr expr() {
            Expr e = term();
            for (;;) {
                if (eat('+'))
                    e = e + term();
                else if (eat('-'))
                    e = e - term();
                else
                    return e;
            }
        }
        Expr term() {
            Expr e = unary();
            for (;;) {
                if (eat('*'))
                    e = e * unary();
                else if (eat('/'))
                    e = e / unary();
                else
                    return e;
            }
        }
        Expr unary() {
            if (eat('-')) return -unary();
            if (eat('+')) return unary();
            return power();
        }
        Expr power() {
            Expr base = primary();
            if (eat('^')) return pow(base, unary());
            return base;
        }
        Expr primary() {
            skip();
            if (pos >= s.size()) fail("unexpected end");
            const char c = s[pos];
            if (eat('(')) {
                Expr e = expr();
                if (!eat(')')) fail("expected ')'");
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                const double v = std::strtod(begin, &end);
                if (end == begin) fail("bad number");
                pos += static_cast<std::size_t>(end - begin);
                return constant(v);
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                const std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                const std::string name = s.substr(start, pos - start);
                if (name == "t" || name == "x" || name == "y") return var(name[0]);
                if (name == "pi") return constant(M_PI);
                static const std::pair<const char*, Op> funcs[] = {
                    {"sin", Op::sin}, {"cos", Op::cos},   {"exp", Op::exp},   {"log", Op::log},
                    {"abs", Op::abs}, {"sqrt", Op::sqrt}, {"sign", Op::sign}, {"step", Op::step}};
                for (const auto& [fname, op] : funcs) {
                    if (name == fname) {
                        if (!eat('(')) fail("expected '(' after " + name);
                        Expr arg = expr();
                        if (!eat(')')) fail("expected ')'");
                        return apply(op, arg);
                    }
                }
                pos = start;
                fail("unknown name '" + name + "'");
            }
            fail("unexpected '" + std::string(1, c) + "'");
        }
    };

    std::shared_ptr<const Node> node_;
};

/// Parses a ';'-separated list, one expression per component.
inline std::vector<Expr> parse_components(const std::string& text) {
    std::vector<Expr> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t end = text.find(';', start);
        out.push_back(Expr::parse(text.substr(start, end == std::string::npos ? std::string::npos : end - start)));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

} // namespace plap
