#ifndef NLTF_SFT_HPP
#define NLTF_SFT_HPP

#include <cstdint>
#include <vector>

#include "nltf/errors.hpp"

namespace nltf {

using Symbol = int;
using Word = std::vector<Symbol>;

// Enumeration limits. Exceeding a cap is an error, never a silent truncation.
struct Caps {
    long long words = 1LL << 24;  // admissible words per enumeration
    long long states = 4096;      // states of a block-recoded system
    long long cycles = 1LL << 20; // simple cycles / periodic orbits
};

// Subshift of finite type over symbols 0..m-1 with a 0/1 transition matrix.
// Construction rejects non-mixing systems: the matrix must be primitive and
// every row and column must contain at least one 1.
class SymbolicSystem {
public:
    SymbolicSystem(int alphabet_size, const std::vector<std::vector<int>>& transition);

    int alphabet_size() const { return m_; }
    bool allowed(Symbol a, Symbol b) const { return trans_[static_cast<std::size_t>(a) * m_ + b] != 0; }
    const std::vector<std::uint8_t>& transition() const { return trans_; }

    // Number of admissible words of length n (sum of entries of transition^(n-1)).
    long long word_count(int n) const;
    // Perron root of the transition matrix; log of it is h_top.
    double spectral_radius() const;

private:
    int m_;
    std::vector<std::uint8_t> trans_;
};

// Primitivity test on a raw 0/1 matrix: some power <= m^2 is entrywise positive.
// Usable before construction (SymbolicSystem itself only holds primitive matrices).
bool is_primitive(int alphabet_size, const std::vector<std::vector<int>>& transition);
bool is_primitive(const SymbolicSystem& sys);

bool word_admissible(const SymbolicSystem& sys, const Word& w);

// Suffix-count table for lexicographic ranking of admissible words of a fixed
// length: suffix_count(j, a) = number of admissible length-j extensions after
// symbol a. Shared by the cursor and the block-partitioned kernels.
class WordIndex {
public:
    WordIndex(const SymbolicSystem& sys, int length);
    long long total() const { return total_; }
    int length() const { return n_; }
    long long suffix_count(int remaining, Symbol a) const {
        return counts_[static_cast<std::size_t>(remaining) * m_ + a];
    }
    // Word at a given lexicographic rank in [0, total).
    Word unrank(long long rank) const;

private:
    bool allowed(Symbol a, Symbol b) const { return trans_[static_cast<std::size_t>(a) * m_ + b] != 0; }

    int m_;
    int n_;
    long long total_;
    std::vector<std::uint8_t> trans_;
    std::vector<long long> counts_; // [remaining][symbol]
};

// Lexicographic walk over the admissible words of one length.
class WordCursor {
public:
    WordCursor(const SymbolicSystem& sys, int length);
    WordCursor(const SymbolicSystem& sys, const WordIndex& index, long long start_rank);

    bool valid() const { return valid_; }
    const Word& word() const { return w_; }
    void advance();

private:
    const SymbolicSystem* sys_;
    Word w_;
    bool valid_;
};

// Materialized lexicographic enumeration; guarded by caps.words.
std::vector<Word> admissible_words(const SymbolicSystem& sys, int n, const Caps& caps = {});

struct CycleSet {
    std::vector<Word> cycles; // simple cycles as state sequences, deterministic order
};

// All simple cycles of the depth-recoded transition graph.
CycleSet simple_cycles(const SymbolicSystem& sys, int state_space_depth, const Caps& caps = {});

// Higher-block presentation: states are the admissible k-words of the source
// system, edges encode (k-1)-overlap compatibility.
struct BlockSystem {
    SymbolicSystem sys;
    std::vector<Word> states; // state index -> source k-word
    int block_depth = 1;
};

BlockSystem higher_block_recode(const SymbolicSystem& sys, int k, const Caps& caps = {});

} // namespace nltf

#endif
