#ifndef KFWER_TESTS_SUPPORT_HPP
#define KFWER_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "kfwer/resampling.hpp"
#include "kfwer/rng.hpp"
#include "kfwer/stat_kernels.hpp"

namespace support {

using table = std::vector<std::vector<double>>;

inline kfwer::resample_matrix to_resamples(const table& rows) {
    kfwer::matrix m(rows.size(), rows.front().size());
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t c = 0; c < rows[a].size(); ++c) m(a, c) = rows[a][c];
    return {std::move(m), kfwer::resample_matrix::kind_t::bootstrap_centered};
}

struct instance {
    std::vector<double> statistics;
    table rows;
};

/// Small random step-down instance. Statistics are shifted upward for a random
/// prefix so that multi-step runs are common; `ties` rounds everything to a
/// coarse grid.
inline instance random_instance(kfwer::random_stream& rng, std::size_t s_max = 8, std::size_t b_max = 40,
                                bool ties = false) {
    const std::size_t s = 2 + rng.below(s_max - 1);
    const std::size_t B = 5 + rng.below(b_max - 4);
    auto draw = [&] { return ties ? std::round(2.0 * rng.normal()) / 2.0 : rng.normal(); };
    instance out;
    out.rows.assign(B, std::vector<double>(s));
    for (auto& row : out.rows)
        for (auto& x : row) x = draw();
    const std::size_t signals = rng.below(s + 1);
    out.statistics.resize(s);
    for (std::size_t i = 0; i < s; ++i) {
        double t = draw();
        if (i < signals) t += 1.0 + 3.0 * rng.uniform();
        out.statistics[i] = t;
    }
    return out;
}

} // namespace support

#endif // KFWER_TESTS_SUPPORT_HPP
