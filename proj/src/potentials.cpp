#include "nltf/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nltf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t pow_size(int m, int k) {
    std::size_t s = 1;
    for (int i = 0; i < k; ++i) {
        if (s > (static_cast<std::size_t>(1) << 40) / static_cast<std::size_t>(m))
            fail_cap("potential table size m^depth too large");
        s *= static_cast<std::size_t>(m);
    }
    return s;
}

std::string word_to_string(const Word& w) {
    bool wide = std::any_of(w.begin(), w.end(), [](Symbol s) { return s >= 10; });
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i && wide) out.push_back(',');
        out += std::to_string(w[i]);
    }
    return out;
}

} // namespace

Potential::Potential(const SymbolicSystem& sys, int depth, std::vector<double> dense_table)
    : m_(sys.alphabet_size()), depth_(depth), table_(std::move(dense_table)) {
    if (depth < 1) fail_config("potential depth must be >= 1");
    std::size_t want = pow_size(m_, depth);
    if (table_.size() != want)
        fail_config("dense potential table has size " + std::to_string(table_.size()) + ", expected " +
                    std::to_string(want));
    for (WordCursor c(sys, depth); c.valid(); c.advance()) {
        double v = table_[code_of(c.word(), 0)];
        if (!std::isfinite(v))
            fail_config("potential value for admissible word " + word_to_string(c.word()) +
                        " is missing or not finite");
    }
}

Potential Potential::from_map(const SymbolicSystem& sys, int depth, const std::map<Word, double>& table) {
    if (depth < 1) fail_config("potential depth must be >= 1");
    int m = sys.alphabet_size();
    std::size_t size = pow_size(m, depth);
    std::vector<double> dense(size, kNaN);
    for (const auto& [w, v] : table) {
        if (static_cast<int>(w.size()) != depth)
            fail_config("potential table word " + word_to_string(w) + " has length " + std::to_string(w.size()) +
                        ", expected depth " + std::to_string(depth));
        if (!word_admissible(sys, w))
            fail_config("potential table word " + word_to_string(w) + " is not admissible");
        std::size_t code = 0;
        for (Symbol s : w) code = code * m + static_cast<std::size_t>(s);
        dense[code] = v;
    }
    // constructor verifies that every admissible word is covered
    return Potential(sys, depth, std::move(dense));
}

std::size_t Potential::code_of(const Word& w, std::size_t offset) const {
    std::size_t code = 0;
    for (int j = 0; j < depth_; ++j) code = code * m_ + static_cast<std::size_t>(w[offset + j]);
    return code;
}

double Potential::value(const Word& w) const {
    if (static_cast<int>(w.size()) != depth_) fail_config("potential lookup word length mismatch");
    return table_[code_of(w, 0)];
}

double Potential::max_abs() const {
    double best = 0.0;
    for (double v : table_)
        if (std::isfinite(v)) best = std::max(best, std::abs(v));
    return best;
}

Potential Potential::scaled(double factor) const {
    std::vector<double> dense = table_;
    for (double& v : dense) v *= factor;
    return Potential(Raw{}, m_, depth_, std::move(dense));
}

Potential Potential::shifted(double constant) const {
    std::vector<double> dense = table_;
    for (double& v : dense) v += constant;
    return Potential(Raw{}, m_, depth_, std::move(dense));
}

Potential lift_depth(const SymbolicSystem& sys, const Potential& p, int new_depth) {
    if (new_depth < p.depth()) fail_config("lift_depth target smaller than current depth");
    if (new_depth == p.depth()) return p;
    int m = sys.alphabet_size();
    std::size_t size = pow_size(m, new_depth);
    std::vector<double> dense(size, kNaN);
    std::size_t tail = 1;
    for (int i = 0; i < new_depth - p.depth(); ++i) tail *= static_cast<std::size_t>(m);
    for (WordCursor c(sys, new_depth); c.valid(); c.advance()) {
        const Word& w = c.word();
        std::size_t code = 0;
        for (Symbol s : w) code = code * m + static_cast<std::size_t>(s);
        dense[code] = p.value_by_code(code / tail); // value of the depth-k prefix
    }
    return Potential(sys, new_depth, std::move(dense));
}

Potential add(const SymbolicSystem& sys, const Potential& a, const Potential& b) {
    int k = std::max(a.depth(), b.depth());
    Potential la = lift_depth(sys, a, k);
    Potential lb = lift_depth(sys, b, k);
    std::vector<double> dense = la.dense_table();
    const auto& tb = lb.dense_table();
    for (std::size_t i = 0; i < dense.size(); ++i) dense[i] += tb[i];
    return Potential(sys, k, std::move(dense));
}

Potential scale(const Potential& p, double factor) { return p.scaled(factor); }
Potential shift(const Potential& p, double constant) { return p.shifted(constant); }

Potential coboundary(const SymbolicSystem& sys, const Potential& g) {
    int k = g.depth() + 1;
    int m = sys.alphabet_size();
    std::size_t size = pow_size(m, k);
    std::vector<double> dense(size, kNaN);
    for (WordCursor c(sys, k); c.valid(); c.advance()) {
        const Word& w = c.word();
        std::size_t code = 0;
        for (Symbol s : w) code = code * m + static_cast<std::size_t>(s);
        std::size_t head = code / m;        // w[0..k-2]
        std::size_t tail = code % pow_size(m, k - 1); // w[1..k-1]
        dense[code] = g.value_by_code(tail) - g.value_by_code(head);
    }
    return Potential(sys, k, std::move(dense));
}

PotentialFamily::PotentialFamily(SymbolicSystem sys, std::vector<Potential> components)
    : sys_(std::move(sys)), depth_(1), components_(std::move(components)) {
    if (components_.empty()) fail_config("potential family must have at least one component");
    for (const Potential& p : components_) {
        if (p.alphabet_size() != sys_.alphabet_size())
            fail_config("potential alphabet size does not match the system");
        depth_ = std::max(depth_, p.depth());
    }
    for (Potential& p : components_)
        if (p.depth() < depth_) p = lift_depth(sys_, p, depth_);
}

double PotentialFamily::max_abs() const {
    double best = 0.0;
    for (const Potential& p : components_) best = std::max(best, p.max_abs());
    return best;
}

BirkhoffVector birkhoff_sum(const PotentialFamily& fam, const Word& w) {
    int k = fam.depth();
    int n = static_cast<int>(w.size()) - k + 1;
    if (n < 1)
        fail_config("birkhoff_sum word length " + std::to_string(w.size()) + " shorter than depth " +
                    std::to_string(k));
    if (!word_admissible(fam.system(), w)) fail_config("birkhoff_sum word is not admissible");
    BirkhoffVector out;
    out.n = n;
    out.sums.assign(fam.dim(), 0.0);
    int m = fam.system().alphabet_size();
    std::size_t mod = 1;
    for (int i = 0; i < k - 1; ++i) mod *= static_cast<std::size_t>(m);
    std::size_t code = fam.component(0).code_of(w, 0);
    for (int j = 0;; ++j) {
        for (int i = 0; i < fam.dim(); ++i) out.sums[i] += fam.component(i).value_by_code(code);
        if (j + 1 >= n) break;
        code = (code % mod) * m + static_cast<std::size_t>(w[j + k]);
    }
    return out;
}

Potential combine(const PotentialFamily& fam, std::span<const double> q) {
    if (static_cast<int>(q.size()) != fam.dim()) fail_config("combine weight dimension mismatch");
    Potential acc = fam.component(0).scaled(q[0]);
    for (int i = 1; i < fam.dim(); ++i) acc = add(fam.system(), acc, fam.component(i).scaled(q[i]));
    return acc;
}

Depth1Family to_depth1(const PotentialFamily& fam, const Caps& caps) {
    Depth1Family out{higher_block_recode(fam.system(), fam.depth(), caps), {}};
    int nstates = out.block.sys.alphabet_size();
    out.values.assign(fam.dim(), std::vector<double>(nstates, 0.0));
    for (int s = 0; s < nstates; ++s) {
        const Word& w = out.block.states[s];
        for (int i = 0; i < fam.dim(); ++i) out.values[i][s] = fam.component(i).value(w);
    }
    return out;
}

std::vector<double> combine_depth1(const Depth1Family& fam, std::span<const double> q) {
    if (static_cast<int>(q.size()) != fam.dim()) fail_config("combine weight dimension mismatch");
    int n = fam.block.sys.alphabet_size();
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < fam.dim(); ++i)
        for (int s = 0; s < n; ++s) out[s] += q[i] * fam.values[i][s];
    return out;
}

} // namespace nltf
