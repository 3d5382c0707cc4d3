#include "nltf/fexpr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace nltf {

using Node = FExpr::Node;
using Op = Node::Op;

namespace {

struct Token {
    enum class Kind { Num, Ident, Sym, End } kind = Kind::End;
    double num = 0.0;
    std::string text;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { next(); }

    const Token& peek() const { return cur_; }
    Token take() {
        Token t = cur_;
        next();
        return t;
    }

private:
    void next() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        cur_ = Token{};
        cur_.pos = i_;
        if (i_ >= src_.size()) {
            cur_.kind = Token::Kind::End;
            return;
        }
        char c = src_[i_];
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i_ + 1 < src_.size() &&
                                                            std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
            const char* begin = src_.c_str() + i_;
            char* end = nullptr;
            cur_.num = std::strtod(begin, &end);
            if (end == begin) throw ParseError("invalid number", i_);
            cur_.kind = Token::Kind::Num;
            i_ += static_cast<std::size_t>(end - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
                ++j;
            cur_.kind = Token::Kind::Ident;
            cur_.text = src_.substr(i_, j - i_);
            i_ = j;
            return;
        }
        // multi-character comparison operators
        static const char* two[] = {"<=", ">=", "==", "!="};
        for (const char* op : two)
            if (src_.compare(i_, 2, op) == 0) {
                cur_.kind = Token::Kind::Sym;
                cur_.text = op;
                i_ += 2;
                return;
            }
        if (std::string("+-*/^()<>,").find(c) != std::string::npos) {
            cur_.kind = Token::Kind::Sym;
            cur_.text = std::string(1, c);
            ++i_;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", i_);
    }

    const std::string& src_;
    std::size_t i_ = 0;
    Token cur_;
};

struct FunctionSpec {
    Op op;
    int arity;
};

const std::map<std::string, FunctionSpec>& functions() {
    static const std::map<std::string, FunctionSpec> fns = {
        {"exp", {Op::Exp, 1}}, {"log", {Op::Log, 1}},  {"sqrt", {Op::Sqrt, 1}},
        {"abs", {Op::Abs, 1}}, {"pow", {Op::Pow, 2}},  {"cond", {Op::Cond, 3}},
    };
    return fns;
}

class Parser {
public:
    Parser(const std::string& src, int dim, const std::vector<std::string>& params)
        : lex_(src), dim_(dim), params_(params) {}

    Node parse_all() {
        Node n = comparison();
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::End) throw ParseError("unexpected trailing input", t.pos);
        return n;
    }

private:
    bool is_sym(const char* s) const {
        return lex_.peek().kind == Token::Kind::Sym && lex_.peek().text == s;
    }

    Node comparison() {
        Node lhs = additive();
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::Sym) {
            Op op;
            if (t.text == "<") op = Op::Lt;
            else if (t.text == ">") op = Op::Gt;
            else if (t.text == "<=") op = Op::Le;
            else if (t.text == ">=") op = Op::Ge;
            else if (t.text == "==") op = Op::Eq;
            else if (t.text == "!=") op = Op::Ne;
            else return lhs;
            lex_.take();
            Node n;
            n.op = op;
            n.kids.push_back(std::move(lhs));
            n.kids.push_back(additive());
            return n;
        }
        return lhs;
    }

    Node additive() {
        Node n = term();
        while (is_sym("+") || is_sym("-")) {
            bool plus = is_sym("+");
            lex_.take();
            Node parent;
            parent.op = plus ? Op::Add : Op::Sub;
            parent.kids.push_back(std::move(n));
            parent.kids.push_back(term());
            n = std::move(parent);
        }
        return n;
    }

    Node term() {
        Node n = factor();
        while (is_sym("*") || is_sym("/")) {
            bool mul = is_sym("*");
            lex_.take();
            Node parent;
            parent.op = mul ? Op::Mul : Op::Div;
            parent.kids.push_back(std::move(n));
            parent.kids.push_back(factor());
            n = std::move(parent);
        }
        return n;
    }

    Node factor() {
        if (is_sym("-")) {
            lex_.take();
            Node n;
            n.op = Op::Neg;
            n.kids.push_back(factor());
            return n;
        }
        return power();
    }

    Node power() {
        Node base = atom();
        if (is_sym("^")) {
            lex_.take();
            Node n;
            n.op = Op::Pow;
            n.kids.push_back(std::move(base));
            n.kids.push_back(factor()); // right associative, allows 2^-3
            return n;
        }
        return base;
    }

    Node atom() {
        Token t = lex_.take();
        if (t.kind == Token::Kind::Num) {
            Node n;
            n.op = Op::Num;
            n.num = t.num;
            return n;
        }
        if (t.kind == Token::Kind::Ident) return identifier(std::move(t));
        if (t.kind == Token::Kind::Sym && t.text == "(") {
            Node n = comparison();
            expect(")");
            return n;
        }
        throw ParseError("expected a value", t.pos);
    }

    Node identifier(Token t) {
        auto fn = functions().find(t.text);
        if (fn != functions().end()) {
            expect("(");
            Node n;
            n.op = fn->second.op;
            while (true) {
                n.kids.push_back(comparison());
                if (is_sym(",")) {
                    lex_.take();
                    continue;
                }
                break;
            }
            expect(")");
            if (static_cast<int>(n.kids.size()) != fn->second.arity)
                throw ParseError("function " + t.text + " expects " + std::to_string(fn->second.arity) +
                                     " arguments, got " + std::to_string(n.kids.size()),
                                 t.pos);
            return n;
        }
        if (t.text == "h") {
            Node n;
            n.op = Op::VarH;
            return n;
        }
        if (t.text.size() >= 2 && t.text[0] == 'z') {
            bool digits = true;
            for (std::size_t i = 1; i < t.text.size(); ++i)
                digits = digits && std::isdigit(static_cast<unsigned char>(t.text[i]));
            if (digits) {
                int idx = std::atoi(t.text.c_str() + 1);
                if (idx < 1 || idx > dim_)
                    throw ParseError("variable " + t.text + " out of range for dimension " + std::to_string(dim_),
                                     t.pos);
                Node n;
                n.op = Op::VarZ;
                n.index = idx - 1;
                return n;
            }
        }
        for (std::size_t i = 0; i < params_.size(); ++i)
            if (params_[i] == t.text) {
                Node n;
                n.op = Op::VarParam;
                n.index = static_cast<int>(i);
                return n;
            }
        throw ParseError("unknown identifier '" + t.text + "'", t.pos);
    }

    void expect(const char* sym) {
        const Token& t = lex_.peek();
        if (t.kind != Token::Kind::Sym || t.text != sym)
            throw ParseError(std::string("expected '") + sym + "'", t.pos);
        lex_.take();
    }

    Lexer lex_;
    int dim_;
    const std::vector<std::string>& params_;
};

bool node_uses_h(const Node& n) {
    if (n.op == Op::VarH) return true;
    for (const Node& k : n.kids)
        if (node_uses_h(k)) return true;
    return false;
}

[[noreturn]] void domain(const char* what, double arg) {
    fail_domain(std::string("domain error in ") + what + " (argument " + std::to_string(arg) + ")");
}

double eval_node(const Node& n, const FEvalContext& ctx);

double checked(double v, const char* what) {
    if (!std::isfinite(v)) fail_domain(std::string("non-finite result in ") + what);
    return v;
}

double eval_pow(double base, double expo) {
    if (base == 0.0 && expo < 0.0) domain("pow: zero base with negative exponent", base);
    if (base < 0.0 && expo != std::floor(expo)) domain("pow: negative base with non-integer exponent", base);
    return checked(std::pow(base, expo), "pow");
}

double eval_node(const Node& n, const FEvalContext& ctx) {
    switch (n.op) {
        case Op::Num: return n.num;
        case Op::VarZ: {
            if (n.index >= static_cast<int>(ctx.z.size())) fail_domain("evaluation point has too few coordinates");
            return ctx.z[n.index];
        }
        case Op::VarH:
            if (!ctx.h) fail_domain("expression references h but no entropy value is bound");
            return *ctx.h;
        case Op::VarParam: {
            if (n.index >= static_cast<int>(ctx.params.size())) fail_domain("missing parameter value");
            return ctx.params[n.index];
        }
        case Op::Add: return checked(eval_node(n.kids[0], ctx) + eval_node(n.kids[1], ctx), "+");
        case Op::Sub: return checked(eval_node(n.kids[0], ctx) - eval_node(n.kids[1], ctx), "-");
        case Op::Mul: return checked(eval_node(n.kids[0], ctx) * eval_node(n.kids[1], ctx), "*");
        case Op::Div: {
            double a = eval_node(n.kids[0], ctx);
            double b = eval_node(n.kids[1], ctx);
            if (b == 0.0) domain("division by zero", b);
            return checked(a / b, "/");
        }
        case Op::Pow: return eval_pow(eval_node(n.kids[0], ctx), eval_node(n.kids[1], ctx));
        case Op::Neg: return -eval_node(n.kids[0], ctx);
        case Op::Exp: return checked(std::exp(eval_node(n.kids[0], ctx)), "exp");
        case Op::Log: {
            double a = eval_node(n.kids[0], ctx);
            if (a <= 0.0) domain("log of non-positive value", a);
            return checked(std::log(a), "log");
        }
        case Op::Sqrt: {
            double a = eval_node(n.kids[0], ctx);
            if (a < 0.0) domain("sqrt of negative value", a);
            return std::sqrt(a);
        }
        case Op::Abs: return std::abs(eval_node(n.kids[0], ctx));
        case Op::Lt: return eval_node(n.kids[0], ctx) < eval_node(n.kids[1], ctx) ? 1.0 : 0.0;
        case Op::Gt: return eval_node(n.kids[0], ctx) > eval_node(n.kids[1], ctx) ? 1.0 : 0.0;
        case Op::Le: return eval_node(n.kids[0], ctx) <= eval_node(n.kids[1], ctx) ? 1.0 : 0.0;
        case Op::Ge: return eval_node(n.kids[0], ctx) >= eval_node(n.kids[1], ctx) ? 1.0 : 0.0;
        case Op::Eq: return eval_node(n.kids[0], ctx) == eval_node(n.kids[1], ctx) ? 1.0 : 0.0;
        case Op::Ne: return eval_node(n.kids[0], ctx) != eval_node(n.kids[1], ctx) ? 1.0 : 0.0;
        case Op::Cond: {
            double test = eval_node(n.kids[0], ctx);
            bool taken_first = test != 0.0;
            // both branches evaluate strictly, except that a domain error in
            // the branch not taken is skipped
            auto eval_untaken = [&](const Node& k) {
                try {
                    (void)eval_node(k, ctx);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::Domain) throw;
                }
            };
            if (taken_first) {
                double a = eval_node(n.kids[1], ctx);
                eval_untaken(n.kids[2]);
                return a;
            }
            double b = eval_node(n.kids[2], ctx);
            eval_untaken(n.kids[1]);
            return b;
        }
    }
    fail_numeric("corrupt expression node");
}

int precedence(Op op) {
    switch (op) {
        case Op::Lt:
        case Op::Gt:
        case Op::Le:
        case Op::Ge:
        case Op::Eq:
        case Op::Ne: return 0;
        case Op::Add:
        case Op::Sub: return 1;
        case Op::Mul:
        case Op::Div: return 2;
        case Op::Neg: return 3;
        case Op::Pow: return 4;
        default: return 5;
    }
}

void print_node(const Node& n, const std::vector<std::string>& params, std::string& out) {
    auto child = [&](const Node& k, bool parens) {
        if (parens) out.push_back('(');
        print_node(k, params, out);
        if (parens) out.push_back(')');
    };
    auto binary = [&](const char* sym) {
        int p = precedence(n.op);
        child(n.kids[0], precedence(n.kids[0].op) < p);
        out += sym;
        child(n.kids[1], precedence(n.kids[1].op) <= p); // keep left-assoc reading safe
    };
    switch (n.op) {
        case Op::Num: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n.num);
            out += buf;
            return;
        }
        case Op::VarZ: out += "z" + std::to_string(n.index + 1); return;
        case Op::VarH: out += "h"; return;
        case Op::VarParam: out += params[n.index]; return;
        case Op::Add: binary(" + "); return;
        case Op::Sub: binary(" - "); return;
        case Op::Mul: binary("*"); return;
        case Op::Div: binary("/"); return;
        case Op::Pow: {
            child(n.kids[0], precedence(n.kids[0].op) <= precedence(Op::Pow));
            out += "^";
            child(n.kids[1], precedence(n.kids[1].op) < precedence(Op::Pow));
            return;
        }
        case Op::Neg:
            out += "-";
            child(n.kids[0], precedence(n.kids[0].op) < precedence(Op::Neg));
            return;
        case Op::Exp:
        case Op::Log:
        case Op::Sqrt:
        case Op::Abs:
        case Op::Cond: {
            const char* name = n.op == Op::Exp    ? "exp"
                               : n.op == Op::Log  ? "log"
                               : n.op == Op::Sqrt ? "sqrt"
                               : n.op == Op::Abs  ? "abs"
                                                  : "cond";
            out += name;
            out.push_back('(');
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                if (i) out += ", ";
                print_node(n.kids[i], params, out);
            }
            out.push_back(')');
            return;
        }
        case Op::Lt: binary(" < "); return;
        case Op::Gt: binary(" > "); return;
        case Op::Le: binary(" <= "); return;
        case Op::Ge: binary(" >= "); return;
        case Op::Eq: binary(" == "); return;
        case Op::Ne: binary(" != "); return;
    }
}

} // namespace

FExpr FExpr::parse(const std::string& src, int dim, const std::vector<std::string>& params) {
    if (src.empty()) throw ParseError("empty expression", 0);
    if (dim < 1) fail_config("expression dimension must be >= 1");
    Parser p(src, dim, params);
    FExpr f;
    f.root_ = p.parse_all();
    f.dim_ = dim;
    f.params_ = params;
    f.uses_h_ = node_uses_h(f.root_);
    return f;
}

double FExpr::eval(const FEvalContext& ctx) const {
    if (static_cast<int>(ctx.z.size()) < dim_) fail_domain("evaluation point has too few coordinates");
    double v = eval_node(root_, ctx);
    if (!std::isfinite(v)) fail_domain("expression evaluated to a non-finite value");
    return v;
}

std::string FExpr::print() const {
    std::string out;
    print_node(root_, params_, out);
    return out;
}

std::vector<double> numeric_gradient(const FExpr& f, const FEvalContext& ctx, double step) {
    int d = f.dim();
    std::vector<double> z(ctx.z.begin(), ctx.z.end());
    FEvalContext local{std::span<const double>(z), ctx.params, ctx.h};
    std::vector<double> g(d, 0.0);
    for (int i = 0; i < d; ++i) {
        double s = step * (std::abs(z[i]) + 1.0);
        double zi = z[i];
        z[i] = zi + s;
        double fp = f.eval(local);
        z[i] = zi - s;
        double fm = f.eval(local);
        z[i] = zi;
        g[i] = (fp - fm) / (2.0 * s);
    }
    return g;
}

std::vector<std::vector<double>> numeric_hessian(const FExpr& f, const FEvalContext& ctx, double step) {
    int d = f.dim();
    std::vector<double> z(ctx.z.begin(), ctx.z.end());
    FEvalContext local{std::span<const double>(z), ctx.params, ctx.h};
    std::vector<std::vector<double>> hess(d, std::vector<double>(d, 0.0));
    double f0 = f.eval(local);
    std::vector<double> s(d);
    for (int i = 0; i < d; ++i) s[i] = step * (std::abs(z[i]) + 1.0);
    for (int i = 0; i < d; ++i) {
        double zi = z[i];
        z[i] = zi + s[i];
        double fp = f.eval(local);
        z[i] = zi - s[i];
        double fm = f.eval(local);
        z[i] = zi;
        hess[i][i] = (fp - 2.0 * f0 + fm) / (s[i] * s[i]);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            double zi = z[i], zj = z[j];
            z[i] = zi + s[i];
            z[j] = zj + s[j];
            double fpp = f.eval(local);
            z[j] = zj - s[j];
            double fpm = f.eval(local);
            z[i] = zi - s[i];
            z[j] = zj + s[j];
            double fmp = f.eval(local);
            z[j] = zj - s[j];
            double fmm = f.eval(local);
            z[i] = zi;
            z[j] = zj;
            double v = (fpp - fpm - fmp + fmm) / (4.0 * s[i] * s[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    return hess;
}

FPreset fexpr_preset(const std::string& name, int dim) {
    if (name == "potts") {
        std::string src = "sqrt(";
        for (int i = 1; i <= dim; ++i) {
            if (i > 1) src += " + ";
            src += "z" + std::to_string(i) + "^2";
        }
        src += ")";
        return {src, {}};
    }
    if (name == "alpha_family") {
        if (dim != 1) fail_config("preset alpha_family requires dimension 1");
        return {"alpha/(z1^2 - 2)", {"alpha"}};
    }
    if (name == "cinf_bump") {
        if (dim != 1) fail_config("preset cinf_bump requires dimension 1");
        return {"cond(z1 > 0, 3*exp(-1/z1), 0)", {}};
    }
    if (name == "beta_quadratic") {
        if (dim != 2) fail_config("preset beta_quadratic requires dimension 2");
        return {"beta*(z1^2 + z2^2)/2", {"beta"}};
    }
    if (name == "neg_h_quartic") {
        if (dim != 2) fail_config("preset neg_h_quartic requires dimension 2");
        return {"-h - z1^2*z2^2", {}};
    }
    fail_config("unknown F preset '" + name + "'");
}

} // namespace nltf
