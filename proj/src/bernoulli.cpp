#include "bsu/bernoulli.hpp"

#include <mutex>

namespace bsu {

const std::vector<Rat>& bernoulli_numbers(size_t n) {
    static std::vector<Rat> table;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    if (table.size() > n) return table;
    if (table.empty()) table.push_back(Rat(1));
    // sum_{j<m+1} C(m+1,j) B_j = 0  =>  B_m = -1/(m+1) * sum_{j<m} C(m+1,j) B_j
    for (size_t m = table.size(); m <= n; ++m) {
        Rat s(0);
        for (size_t j = 0; j < m; ++j) s += Rat(binomial(m + 1, j)) * table[j];
        table.push_back(-s / Rat(Int(m + 1)));
    }
    return table;
}

Rat bernoulli_poly(unsigned k, const Rat& x) {
    const auto& B = bernoulli_numbers(k);
    // B_k(x) = sum_i C(k,i) B_i x^{k-i}, evaluated by Horner in x.
    Rat acc(0);
    for (unsigned i = 0; i <= k; ++i) {
        acc *= x;
        acc += Rat(binomial(k, i)) * B[i];
    }
    return acc;
}

} // namespace bsu
