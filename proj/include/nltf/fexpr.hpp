#ifndef NLTF_FEXPR_HPP
#define NLTF_FEXPR_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nltf/errors.hpp"

namespace nltf {

// Evaluation context for an F expression: the point z, parameter values in
// the order reported by FExpr::param_names(), and the entropy value bound to
// the reserved symbol h when the expression references it.
struct FEvalContext {
    std::span<const double> z;
    std::span<const double> params = {};
    std::optional<double> h = std::nullopt;
};

// Parsed expression tree for F: R^d -> R over variables z1..zd, the reserved
// symbol h, numeric literals and named parameters. Immutable after parse.
class FExpr {
public:
    static FExpr parse(const std::string& src, int dim, const std::vector<std::string>& params = {});

    double eval(const FEvalContext& ctx) const;
    std::string print() const;

    int dim() const { return dim_; }
    bool references_h() const { return uses_h_; }
    const std::vector<std::string>& param_names() const { return params_; }

    struct Node {
        enum class Op : unsigned char {
            Num, VarZ, VarH, VarParam,
            Add, Sub, Mul, Div, Pow, Neg,
            Exp, Log, Sqrt, Abs,
            Lt, Gt, Le, Ge, Eq, Ne,
            Cond
        };
        Op op = Op::Num;
        double num = 0.0;
        int index = 0;
        std::vector<Node> kids;
    };

private:
    FExpr() = default;

    Node root_;
    int dim_ = 0;
    bool uses_h_ = false;
    std::vector<std::string> params_;
};

// Central-difference derivatives; per-coordinate step is step*(|z_i|+1).
std::vector<double> numeric_gradient(const FExpr& f, const FEvalContext& ctx, double step = 1e-5);
// Symmetric by construction ((H+H^T)/2), row-major d x d.
std::vector<std::vector<double>> numeric_hessian(const FExpr& f, const FEvalContext& ctx, double step = 1e-5);

// Built-in F families addressable by name from configs and the CLI.
struct FPreset {
    std::string source;
    std::vector<std::string> param_names;
};
FPreset fexpr_preset(const std::string& name, int dim);

} // namespace nltf

#endif
