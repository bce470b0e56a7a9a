#pragma once

#include <cstdint>
#include <vector>

namespace stav {

struct BallResult {
    std::vector<double> center;
    double radius = 0.0;
};

// Exact minimum enclosing ball by Welzl's move-to-front recursion over
// support sets of at most d+1 points. Deterministic: the input is shuffled
// with a fixed-seed generator. Intended for d <= 10, n <= a few hundred.
// The returned radius is re-tightened to max_i dist(center, p_i), so the
// containment invariant holds exactly as reported.
BallResult exact_meb(const std::vector<std::vector<double>>& points,
                     std::uint64_t shuffle_seed = 0x5eb5eedULL);

}  // namespace stav
