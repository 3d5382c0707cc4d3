#ifndef NLTF_POTENTIALS_HPP
#define NLTF_POTENTIALS_HPP

#include <map>
#include <span>
#include <vector>

#include "nltf/sft.hpp"

namespace nltf {

// Locally constant potential of finite depth k: a real value for every
// admissible k-word. Stored densely over all m^k word codes; inadmissible
// slots hold NaN and must never be read.
class Potential {
public:
    Potential(const SymbolicSystem& sys, int depth, std::vector<double> dense_table);
    static Potential from_map(const SymbolicSystem& sys, int depth, const std::map<Word, double>& table);

    int depth() const { return depth_; }
    int alphabet_size() const { return m_; }
    double value_by_code(std::size_t code) const { return table_[code]; }
    double value(const Word& w) const; // w must be an admissible depth-word
    double max_abs() const;
    const std::vector<double>& dense_table() const { return table_; }

    // Word code arithmetic: code = sum of w[j] * m^(k-1-j).
    std::size_t code_of(const Word& w, std::size_t offset) const;

    Potential scaled(double factor) const;
    Potential shifted(double constant) const;

private:
    struct Raw {};
    Potential(Raw, int m, int depth, std::vector<double> table)
        : m_(m), depth_(depth), table_(std::move(table)) {}

    int m_;
    int depth_;
    std::vector<double> table_;
};

// Lift to a larger depth; the new table is constant on extensions, so all
// Birkhoff sums are unchanged.
Potential lift_depth(const SymbolicSystem& sys, const Potential& p, int new_depth);
Potential add(const SymbolicSystem& sys, const Potential& a, const Potential& b);
Potential scale(const Potential& p, double factor);
Potential shift(const Potential& p, double constant);

// g(T x) - g(x) as a depth (g.depth()+1) potential.
Potential coboundary(const SymbolicSystem& sys, const Potential& g);

class PotentialFamily {
public:
    PotentialFamily(SymbolicSystem sys, std::vector<Potential> components);

    int dim() const { return static_cast<int>(components_.size()); }
    int depth() const { return depth_; }
    const Potential& component(int i) const { return components_[i]; }
    const SymbolicSystem& system() const { return sys_; }
    double max_abs() const;

private:
    SymbolicSystem sys_;
    int depth_;
    std::vector<Potential> components_; // all lifted to the common depth
};

struct BirkhoffVector {
    std::vector<double> sums;
    int n = 0;
};

// Exact Birkhoff sums on cylinders: for depth-k components the word must have
// length n + k - 1 and sums[i] = sum over the n windows of component i.
BirkhoffVector birkhoff_sum(const PotentialFamily& fam, const Word& w);

// <q, Phi> as a single depth-k potential.
Potential combine(const PotentialFamily& fam, std::span<const double> q);

// Depth-1 presentation on the block-recoded system: component values indexed
// by block state. This is what the transfer-operator layer consumes.
struct Depth1Family {
    BlockSystem block;
    std::vector<std::vector<double>> values; // [component][state]
    int dim() const { return static_cast<int>(values.size()); }
};

Depth1Family to_depth1(const PotentialFamily& fam, const Caps& caps = {});

// <q, values> per state for an already-recoded family.
std::vector<double> combine_depth1(const Depth1Family& fam, std::span<const double> q);

} // namespace nltf

#endif
