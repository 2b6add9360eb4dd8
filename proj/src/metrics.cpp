#include "sqrn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqrn {

double shannon_entropy(const ByteHistogram& h) {
    if (h.total == 0) throw std::invalid_argument("shannon_entropy: empty histogram");
    const double total = static_cast<double>(h.total);
    double bits = 0.0;
    for (uint64_t c : h.counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        bits -= p * std::log2(p);
    }
    return bits;
}

double min_entropy(const ByteHistogram& h) {
    if (h.total == 0) throw std::invalid_argument("min_entropy: empty histogram");
    const uint64_t max_count = *std::max_element(h.counts.begin(), h.counts.end());
    return -std::log2(static_cast<double>(max_count) / static_cast<double>(h.total));
}

double visibility(uint64_t n_early, uint64_t n_late) {
    if (n_early + n_late == 0) throw std::invalid_argument("visibility: no counts");
    const double e = static_cast<double>(n_early);
    const double l = static_cast<double>(n_late);
    return std::abs(e - l) / (e + l);
}

} // namespace sqrn
