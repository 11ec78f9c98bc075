#pragma once

// Analytic field expressions in t, x, y.
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := unary ('^' factor)?          right-associative
//   unary  := '-' unary | atom
//   atom   := number | 't' | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func   := 'sin' | 'cos' | 'exp' | 'tanh'

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>

namespace gaugewalk::expr {

enum class Var { T, X, Y };
enum class Func { Sin, Cos, Exp, Tanh };
enum class BinOp { Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number { double value; };
struct Variable { Var var; };
struct Pi {};
struct Negate { NodePtr operand; };
struct Binary { BinOp op; NodePtr lhs; NodePtr rhs; };
struct Call { Func func; NodePtr arg; };

struct Node {
    std::variant<Number, Variable, Pi, Negate, Binary, Call> kind;
    std::size_t offset = 0;  // byte offset of the node in its source
};

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(std::size_t offset, const std::string& msg)
        : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": " + msg), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class EvalError : public std::runtime_error {
public:
    EvalError(std::string node, const std::string& msg)
        : std::runtime_error(node + ": " + msg), node_(std::move(node)) {}
    const std::string& node() const noexcept { return node_; }

private:
    std::string node_;
};

inline const char* name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Exp: return "exp";
        case Func::Tanh: return "tanh";
    }
    return "?";
}

inline const char* symbol(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Pow: return "^";
    }
    return "?";
}

/// Immutable parsed expression; cheap to copy and safe to evaluate concurrently.
class ExprAst {
public:
    ExprAst() = default;
    explicit ExprAst(NodePtr root) : root_(std::move(root)) {}

    const Node* root() const noexcept { return root_.get(); }
    bool valid() const noexcept { return root_ != nullptr; }

    double operator()(double t, double x, double y) const;
    bool uses(Var v) const { return uses(root_.get(), v); }

private:
    static bool uses(const Node* n, Var v) {
        if (!n) return false;
        return std::visit(
            [&](const auto& k) -> bool {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Variable>) return k.var == v;
                else if constexpr (std::is_same_v<K, Negate>) return uses(k.operand.get(), v);
                else if constexpr (std::is_same_v<K, Binary>) return uses(k.lhs.get(), v) || uses(k.rhs.get(), v);
                else if constexpr (std::is_same_v<K, Call>) return uses(k.arg.get(), v);
                else return false;
            },
            n->kind);
    }

    NodePtr root_;
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse_all() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ < src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    static constexpr int kMaxDepth = 256;

    [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(pos_, msg); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth_ > kMaxDepth) p.fail("expression nested too deeply");
        }
        ~DepthGuard() { --p.depth_; }
    };

    NodePtr expression() {
        DepthGuard guard(*this);
        NodePtr lhs = term();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('+')) lhs = make({Binary{BinOp::Add, lhs, term()}, at});
            else if (accept('-')) lhs = make({Binary{BinOp::Sub, lhs, term()}, at});
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = factor();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('*')) lhs = make({Binary{BinOp::Mul, lhs, factor()}, at});
            else if (accept('/')) lhs = make({Binary{BinOp::Div, lhs, factor()}, at});
            else return lhs;
        }
    }

    NodePtr factor() {
        DepthGuard guard(*this);
        NodePtr base = unary();
        skip_ws();
        const std::size_t at = pos_;
        if (accept('^')) return make({Binary{BinOp::Pow, base, factor()}, at});
        return base;
    }

    NodePtr unary() {
        DepthGuard guard(*this);
        skip_ws();
        const std::size_t at = pos_;
        if (accept('-')) return make({Negate{unary()}, at});
        return atom();
    }

    NodePtr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
            return n;
        };
        std::size_t n = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) {
            pos_ = start;
            fail("malformed number");
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;  // "2e" is the number 2 followed by an identifier
        }
        double v = 0.0;
        const char* first = src_.data() + start;
        const char* last = src_.data() + pos_;
        const auto res = std::from_chars(first, last, v);
        if (res.ec == std::errc::result_out_of_range || !std::isfinite(v)) {
            pos_ = start;
            fail("number out of range");
        }
        if (res.ec != std::errc() || res.ptr != last) {
            pos_ = start;
            fail("malformed number");
        }
        return make({Number{v}, start});
    }

    NodePtr atom() {
        skip_ws();
        const std::size_t at = pos_;
        if (pos_ >= src_.size()) fail("expected an expression");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string_view id = src_.substr(at, pos_ - at);
            if (id == "t") return make({Variable{Var::T}, at});
            if (id == "x") return make({Variable{Var::X}, at});
            if (id == "y") return make({Variable{Var::Y}, at});
            if (id == "pi") return make({Pi{}, at});
            Func f;
            if (id == "sin") f = Func::Sin;
            else if (id == "cos") f = Func::Cos;
            else if (id == "exp") f = Func::Exp;
            else if (id == "tanh") f = Func::Tanh;
            else {
                pos_ = at;
                fail("unknown identifier '" + std::string(id) + "'");
            }
            if (!accept('(')) fail("expected '(' after " + std::string(id));
            NodePtr arg = expression();
            if (!accept(')')) fail("expected ')'");
            return make({Call{f, arg}, at});
        }
        if (c == ')') fail("unbalanced ')'");
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

inline std::string describe(const Node& n) {
    const std::string where = " at offset " + std::to_string(n.offset);
    return std::visit(
        [&](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Binary>) return std::string("'") + symbol(k.op) + "'" + where;
            else if constexpr (std::is_same_v<K, Call>) return std::string(name(k.func)) + where;
            else if constexpr (std::is_same_v<K, Negate>) return "negation" + where;
            else return "leaf" + where;
        },
        n.kind);
}

inline double eval_node(const Node& n, double t, double x, double y) {
    const double v = std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Number>) return k.value;
            else if constexpr (std::is_same_v<K, Variable>) return k.var == Var::T ? t : k.var == Var::X ? x : y;
            else if constexpr (std::is_same_v<K, Pi>) return 3.141592653589793;
            else if constexpr (std::is_same_v<K, Negate>) return -eval_node(*k.operand, t, x, y);
            else if constexpr (std::is_same_v<K, Call>) {
                const double a = eval_node(*k.arg, t, x, y);
                switch (k.func) {
                    case Func::Sin: return std::sin(a);
                    case Func::Cos: return std::cos(a);
                    case Func::Exp: return std::exp(a);
                    case Func::Tanh: return std::tanh(a);
                }
                return 0.0;
            } else {
                const double a = eval_node(*k.lhs, t, x, y);
                const double b = eval_node(*k.rhs, t, x, y);
                switch (k.op) {
                    case BinOp::Add: return a + b;
                    case BinOp::Sub: return a - b;
                    case BinOp::Mul: return a * b;
                    case BinOp::Div:
                        if (b == 0.0) throw EvalError(describe(n), "division by zero");
                        return a / b;
                    case BinOp::Pow: return std::pow(a, b);
                }
                return 0.0;
            }
        },
        n.kind);
    if (!std::isfinite(v)) throw EvalError(describe(n), "result is not finite");
    return v;
}

inline void print(const Node& n, std::string& out) {
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Number>) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", k.value);
                out += buf;
            } else if constexpr (std::is_same_v<K, Variable>) {
                out += k.var == Var::T ? "t" : k.var == Var::X ? "x" : "y";
            } else if constexpr (std::is_same_v<K, Pi>) {
                out += "pi";
            } else if constexpr (std::is_same_v<K, Negate>) {
                out += "(-";
                print(*k.operand, out);
                out += ")";
            } else if constexpr (std::is_same_v<K, Call>) {
                out += name(k.func);
                out += "(";
                print(*k.arg, out);
                out += ")";
            } else {
                out += "(";
                print(*k.lhs, out);
                out += " ";
                out += symbol(k.op);
                out += " ";
                print(*k.rhs, out);
                out += ")";
            }
        },
        n.kind);
}

inline bool same_structure(const Node& a, const Node& b) {
    if (a.kind.index() != b.kind.index()) return false;
    return std::visit(
        [&](const auto& ka) -> bool {
            using K = std::decay_t<decltype(ka)>;
            const K& kb = std::get<K>(b.kind);
            if constexpr (std::is_same_v<K, Number>) return ka.value == kb.value;
            else if constexpr (std::is_same_v<K, Variable>) return ka.var == kb.var;
            else if constexpr (std::is_same_v<K, Pi>) return true;
            else if constexpr (std::is_same_v<K, Negate>) return same_structure(*ka.operand, *kb.operand);
            else if constexpr (std::is_same_v<K, Call>) return ka.func == kb.func && same_structure(*ka.arg, *kb.arg);
            else return ka.op == kb.op && same_structure(*ka.lhs, *kb.lhs) && same_structure(*ka.rhs, *kb.rhs);
        },
        a.kind);
}

}  // namespace detail

/// Parses `source`; throws SyntaxError with the byte offset of the first problem.
inline ExprAst parse(std::string_view source) { return ExprAst(detail::Parser(source).parse_all()); }

inline double eval(const ExprAst& ast, double t, double x, double y) {
    if (!ast.valid()) throw EvalError("root", "empty expression");
    return detail::eval_node(*ast.root(), t, x, y);
}

inline double ExprAst::operator()(double t, double x, double y) const { return eval(*this, t, x, y); }

/// Fully parenthesized rendering that reparses to the same tree.
inline std::string to_string(const ExprAst& ast) {
    std::string out;
    if (ast.valid()) detail::print(*ast.root(), out);
    return out;
}

inline bool structurally_equal(const ExprAst& a, const ExprAst& b) {
    if (!a.valid() || !b.valid()) return a.valid() == b.valid();
    return detail::same_structure(*a.root(), *b.root());
}

}  // namespace gaugewalk::expr
