#include "nltf/word_sum.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <vector>

namespace nltf {

namespace {

struct LogSumAccumulator {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0; // sum of exp(term - max)

    void add(double term) {
        if (term > max) {
            sum = sum * std::exp(max - term) + 1.0;
            max = term;
        } else {
            sum += std::exp(term - max);
        }
    }
    bool empty() const { return sum == 0.0; }
    double value() const { return max + std::log(sum); }
};

struct TermEvaluator {
    const PotentialFamily& fam;
    const FExpr& f;
    std::span<const double> params;
    int n;
    double ln_base;
    int k;
    int m;
    std::size_t window_mod;
    std::vector<double> z_buf;

    TermEvaluator(const WordSumSpec& spec)
        : fam(*spec.family),
          f(*spec.f),
          params(spec.params),
          n(spec.n),
          ln_base(std::log(spec.log_base)),
          k(spec.family->depth()),
          m(spec.family->system().alphabet_size()),
          z_buf(spec.family->dim(), 0.0) {
        window_mod = 1;
        for (int i = 0; i < k - 1; ++i) window_mod *= static_cast<std::size_t>(m);
    }

    // ln(base) * n * F(S_n Phi(w) / n)
    double term(const Word& w) {
        int d = fam.dim();
        for (int i = 0; i < d; ++i) z_buf[i] = 0.0;
        std::size_t code = fam.component(0).code_of(w, 0);
        for (int j = 0;; ++j) {
            for (int i = 0; i < d; ++i) z_buf[i] += fam.component(i).value_by_code(code);
            if (j + 1 >= n) break;
            code = (code % window_mod) * static_cast<std::size_t>(m) + static_cast<std::size_t>(w[j + k]);
        }
        for (int i = 0; i < d; ++i) z_buf[i] /= static_cast<double>(n);
        double value;
        try {
            value = f.eval(FEvalContext{std::span<const double>(z_buf), params, std::nullopt});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Domain) throw;
            std::string at = "(";
            for (int i = 0; i < d; ++i) {
                if (i) at += ", ";
                at += std::to_string(z_buf[i]);
            }
            at += ")";
            fail_domain(std::string(e.what()) + " while weighting word sums at z = " + at);
        }
        return ln_base * static_cast<double>(n) * value;
    }
};

long long checked_word_count(const WordSumSpec& spec, const Caps& caps, int& length_out) {
    if (spec.n < 1) fail_config("word sum window must be >= 1");
    int length = spec.n + spec.family->depth() - 1;
    long long total = spec.family->system().word_count(length);
    if (total > caps.words)
        fail_cap("word sum over " + std::to_string(total) + " words exceeds cap " + std::to_string(caps.words));
    length_out = length;
    return total;
}

} // namespace

double word_log_sum_serial(const WordSumSpec& spec, const Caps& caps) {
    int length = 0;
    checked_word_count(spec, caps, length);
    TermEvaluator ev(spec);
    LogSumAccumulator acc;
    for (WordCursor c(spec.family->system(), length); c.valid(); c.advance()) acc.add(ev.term(c.word()));
    if (acc.empty()) fail_numeric("empty word sum");
    return acc.value();
}

double word_log_sum_blocked(const WordSumSpec& spec, const Caps& caps) {
    int length = 0;
    long long total = checked_word_count(spec, caps, length);
    const SymbolicSystem& sys = spec.family->system();
    WordIndex index(sys, length);

    long long nblocks = total < 4096 ? 1 : 256;
    std::vector<LogSumAccumulator> partial(static_cast<std::size_t>(nblocks));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nblocks));

#ifdef NLTF_HAVE_OPENMP
#pragma omp parallel
#endif
    {
        TermEvaluator ev(spec); // per-thread scratch
#ifdef NLTF_HAVE_OPENMP
#pragma omp for schedule(dynamic)
#endif
        for (long long b = 0; b < nblocks; ++b) {
            try {
                long long begin = total * b / nblocks;
                long long end = total * (b + 1) / nblocks;
                LogSumAccumulator acc;
                WordCursor c(sys, index, begin);
                for (long long r = begin; r < end; ++r, c.advance()) acc.add(ev.term(c.word()));
                partial[static_cast<std::size_t>(b)] = acc;
            } catch (...) {
                errors[static_cast<std::size_t>(b)] = std::current_exception();
            }
        }
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e); // first failing block in partition order

    // combine per-block partials in partition order
    double gmax = -std::numeric_limits<double>::infinity();
    for (const LogSumAccumulator& p : partial)
        if (!p.empty() && p.max > gmax) gmax = p.max;
    double sum = 0.0;
    for (const LogSumAccumulator& p : partial)
        if (!p.empty()) sum += p.sum * std::exp(p.max - gmax);
    if (sum == 0.0) fail_numeric("empty word sum");
    return gmax + std::log(sum);
}

} // namespace nltf
