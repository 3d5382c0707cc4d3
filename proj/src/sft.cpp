#include "nltf/sft.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nltf {

namespace {

std::vector<std::uint8_t> flatten_checked(int m, const std::vector<std::vector<int>>& rows) {
    if (m <= 0) fail_config("alphabet_size must be positive");
    if (static_cast<int>(rows.size()) != m)
        fail_config("transition must have " + std::to_string(m) + " rows, got " + std::to_string(rows.size()));
    std::vector<std::uint8_t> flat(static_cast<std::size_t>(m) * m, 0);
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(rows[i].size()) != m)
            fail_config("transition row " + std::to_string(i) + " must have " + std::to_string(m) +
                        " entries, got " + std::to_string(rows[i].size()));
        for (int j = 0; j < m; ++j) {
            int v = rows[i][j];
            if (v != 0 && v != 1)
                fail_config("transition[" + std::to_string(i) + "][" + std::to_string(j) + "] must be 0 or 1");
            flat[static_cast<std::size_t>(i) * m + j] = static_cast<std::uint8_t>(v);
        }
    }
    return flat;
}

bool primitive_flat(int m, const std::vector<std::uint8_t>& a) {
    // Boolean powers of the matrix up to m^2; a positive power <=> primitive.
    std::vector<std::uint8_t> p = a;
    auto all_positive = [m](const std::vector<std::uint8_t>& x) {
        return std::all_of(x.begin(), x.end(), [](std::uint8_t v) { return v != 0; });
    };
    if (all_positive(p)) return true;
    std::vector<std::uint8_t> next(static_cast<std::size_t>(m) * m);
    long long limit = static_cast<long long>(m) * m;
    for (long long e = 2; e <= limit; ++e) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                std::uint8_t v = 0;
                for (int k = 0; k < m; ++k)
                    if (p[static_cast<std::size_t>(i) * m + k] && a[static_cast<std::size_t>(k) * m + j]) {
                        v = 1;
                        break;
                    }
                next[static_cast<std::size_t>(i) * m + j] = v;
            }
        p.swap(next);
        if (all_positive(p)) return true;
    }
    return false;
}

} // namespace

SymbolicSystem::SymbolicSystem(int alphabet_size, const std::vector<std::vector<int>>& transition)
    : m_(alphabet_size), trans_(flatten_checked(alphabet_size, transition)) {
    for (int i = 0; i < m_; ++i) {
        bool row = false, col = false;
        for (int j = 0; j < m_; ++j) {
            row = row || trans_[static_cast<std::size_t>(i) * m_ + j];
            col = col || trans_[static_cast<std::size_t>(j) * m_ + i];
        }
        if (!row) fail_config("transition row " + std::to_string(i) + " has no admissible successor");
        if (!col) fail_config("transition column " + std::to_string(i) + " has no admissible predecessor");
    }
    if (!primitive_flat(m_, trans_))
        fail_config("transition matrix is not primitive (system not topologically mixing)");
}

bool is_primitive(int alphabet_size, const std::vector<std::vector<int>>& transition) {
    auto flat = flatten_checked(alphabet_size, transition);
    return primitive_flat(alphabet_size, flat);
}

bool is_primitive(const SymbolicSystem& sys) {
    return primitive_flat(sys.alphabet_size(), sys.transition());
}

long long SymbolicSystem::word_count(int n) const {
    if (n < 1) fail_config("word length must be >= 1");
    std::vector<long long> v(m_, 1);
    for (int step = 1; step < n; ++step) {
        std::vector<long long> next(m_, 0);
        for (int a = 0; a < m_; ++a) {
            long long s = 0;
            for (int b = 0; b < m_; ++b)
                if (trans_[static_cast<std::size_t>(a) * m_ + b]) {
                    s += v[b];
                    if (s < 0) fail_cap("word count overflow at length " + std::to_string(n));
                }
            next[a] = s;
        }
        v.swap(next);
    }
    long long total = 0;
    for (long long x : v) {
        total += x;
        if (total < 0) fail_cap("word count overflow at length " + std::to_string(n));
    }
    return total;
}

double SymbolicSystem::spectral_radius() const {
    std::vector<double> v(m_, 1.0 / m_), w(m_, 0.0);
    double lambda = 0.0;
    for (int it = 0; it < 100000; ++it) {
        double norm = 0.0;
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            for (int j = 0; j < m_; ++j)
                if (trans_[static_cast<std::size_t>(i) * m_ + j]) s += v[j];
            w[i] = s;
            norm += s;
        }
        for (int i = 0; i < m_; ++i) w[i] /= norm;
        double prev = lambda;
        lambda = norm;
        v.swap(w);
        if (it > 0 && std::abs(lambda - prev) <= 1e-14 * std::abs(lambda)) break;
    }
    return lambda;
}

bool word_admissible(const SymbolicSystem& sys, const Word& w) {
    if (w.empty()) return false;
    for (Symbol s : w)
        if (s < 0 || s >= sys.alphabet_size()) return false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (!sys.allowed(w[i], w[i + 1])) return false;
    return true;
}

WordIndex::WordIndex(const SymbolicSystem& sys, int length)
    : m_(sys.alphabet_size()), n_(length), trans_(sys.transition()) {
    if (length < 1) fail_config("word length must be >= 1");
    counts_.assign(static_cast<std::size_t>(length) * m_, 0);
    // counts_[r][a] = admissible words of length r+1 starting at symbol a
    for (int a = 0; a < m_; ++a) counts_[a] = 1;
    for (int r = 1; r < length; ++r)
        for (int a = 0; a < m_; ++a) {
            long long s = 0;
            for (int b = 0; b < m_; ++b)
                if (allowed(a, b)) {
                    s += counts_[static_cast<std::size_t>(r - 1) * m_ + b];
                    if (s < 0) fail_cap("word count overflow");
                }
            counts_[static_cast<std::size_t>(r) * m_ + a] = s;
        }
    total_ = 0;
    for (int a = 0; a < m_; ++a) {
        total_ += counts_[static_cast<std::size_t>(length - 1) * m_ + a];
        if (total_ < 0) fail_cap("word count overflow");
    }
}

Word WordIndex::unrank(long long rank) const {
    if (rank < 0 || rank >= total_) fail_numeric("word rank out of range");
    Word w(n_);
    long long r = rank;
    for (int pos = 0; pos < n_; ++pos) {
        int remaining = n_ - 1 - pos;
        bool placed = false;
        for (int b = 0; b < m_ && !placed; ++b) {
            if (pos > 0 && !allowed(w[pos - 1], b)) continue;
            long long c = counts_[static_cast<std::size_t>(remaining) * m_ + b];
            if (r < c) {
                w[pos] = b;
                placed = true;
            } else {
                r -= c;
            }
        }
        if (!placed) fail_numeric("word unranking failed (inconsistent counts)");
    }
    return w;
}

namespace {

// Fill positions [from, n) with the smallest admissible continuation.
// Always possible: every symbol has at least one successor.
void min_fill(const SymbolicSystem& sys, Word& w, std::size_t from) {
    int m = sys.alphabet_size();
    for (std::size_t j = from; j < w.size(); ++j) {
        if (j == 0) {
            w[j] = 0;
            continue;
        }
        for (int b = 0; b < m; ++b)
            if (sys.allowed(w[j - 1], b)) {
                w[j] = b;
                break;
            }
    }
}

} // namespace

WordCursor::WordCursor(const SymbolicSystem& sys, int length) : sys_(&sys), w_(length), valid_(true) {
    if (length < 1) fail_config("word length must be >= 1");
    min_fill(sys, w_, 0);
}

WordCursor::WordCursor(const SymbolicSystem& sys, const WordIndex& index, long long start_rank)
    : sys_(&sys), valid_(true) {
    if (start_rank >= index.total()) {
        valid_ = false;
        w_.assign(index.length(), 0);
        return;
    }
    w_ = index.unrank(start_rank);
}

void WordCursor::advance() {
    int m = sys_->alphabet_size();
    for (int pos = static_cast<int>(w_.size()) - 1; pos >= 0; --pos) {
        for (int b = w_[pos] + 1; b < m; ++b) {
            if (pos > 0 && !sys_->allowed(w_[pos - 1], b)) continue;
            w_[pos] = b;
            min_fill(*sys_, w_, static_cast<std::size_t>(pos) + 1);
            return;
        }
    }
    valid_ = false;
}

std::vector<Word> admissible_words(const SymbolicSystem& sys, int n, const Caps& caps) {
    long long count = sys.word_count(n);
    if (count > caps.words)
        fail_cap("admissible word count " + std::to_string(count) + " exceeds cap " + std::to_string(caps.words));
    std::vector<Word> out;
    out.reserve(static_cast<std::size_t>(count));
    for (WordCursor c(sys, n); c.valid(); c.advance()) out.push_back(c.word());
    return out;
}

CycleSet simple_cycles(const SymbolicSystem& sys, int state_space_depth, const Caps& caps) {
    BlockSystem block = higher_block_recode(sys, state_space_depth, caps);
    const SymbolicSystem& g = block.sys;
    int n = g.alphabet_size();

    CycleSet out;
    // Canonical form: each simple cycle listed once, starting at its smallest
    // state; DFS only visits states greater than the start.
    std::vector<int> path;
    std::vector<char> on_path(n, 0);
    for (int start = 0; start < n; ++start) {
        path.assign(1, start);
        std::fill(on_path.begin(), on_path.end(), 0);
        on_path[start] = 1;
        // iterative DFS with explicit next-neighbor stack
        std::vector<int> next_symbol(1, 0);
        while (!path.empty()) {
            int cur = path.back();
            int& nb = next_symbol.back();
            bool descended = false;
            while (nb < n) {
                int b = nb++;
                if (!g.allowed(cur, b)) continue;
                if (b == start) {
                    if (static_cast<long long>(out.cycles.size()) >= caps.cycles)
                        fail_cap("simple cycle count exceeds cap " + std::to_string(caps.cycles));
                    Word cyc(path.begin(), path.end());
                    out.cycles.push_back(std::move(cyc));
                    continue;
                }
                if (b < start || on_path[b]) continue;
                path.push_back(b);
                on_path[b] = 1;
                next_symbol.push_back(0);
                descended = true;
                break;
            }
            if (!descended) {
                on_path[path.back()] = 0;
                path.pop_back();
                next_symbol.pop_back();
            }
        }
    }
    // Cycles are state sequences in the recoded graph; translate back to the
    // source alphabet (first symbol of each block state).
    if (state_space_depth > 1) {
        for (Word& c : out.cycles)
            for (Symbol& s : c) s = block.states[s][0];
    }
    return out;
}

BlockSystem higher_block_recode(const SymbolicSystem& sys, int k, const Caps& caps) {
    if (k < 1) fail_config("block depth must be >= 1");
    if (k == 1) {
        BlockSystem out{sys, {}, 1};
        out.states.reserve(sys.alphabet_size());
        for (int a = 0; a < sys.alphabet_size(); ++a) out.states.push_back(Word{a});
        return out;
    }
    long long count = sys.word_count(k);
    if (count > caps.states)
        fail_cap("block state count " + std::to_string(count) + " exceeds cap " + std::to_string(caps.states));
    std::vector<Word> states = admissible_words(sys, k, caps);
    int n = static_cast<int>(states.size());
    std::vector<std::vector<int>> trans(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            // overlap condition: states[i][1..k-1] == states[j][0..k-2]; the
            // final edge of states[j] is admissible since j is an admissible word
            bool ok = true;
            for (int t = 0; t + 1 < k && ok; ++t) ok = states[i][t + 1] == states[j][t];
            if (ok) trans[i][j] = 1;
        }
    return BlockSystem{SymbolicSystem(n, trans), std::move(states), k};
}

} // namespace nltf
