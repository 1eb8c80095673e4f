#pragma once

#include <algorithm>
#include <array>

#include <Eigen/Core>

// Reference 4-decimal tables for the built-in four-stage instance, k = 0..3.
namespace mflq::testing::reference {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Mat23 = std::array<std::array<double, 3>, 2>;

inline constexpr double kTableTolerance = 5e-4;

inline constexpr std::array<Mat3, 4> S = {{
    {{{0.5227, 0.3542, 0.1966}, {0.3542, 1.9655, 0.3170}, {0.1966, 0.3170, 1.7009}}},
    {{{0.5188, 0.3513, 0.1951}, {0.3513, 1.9595, 0.3130}, {0.1951, 0.3130, 1.6943}}},
    {{{0.4862, 0.3264, 0.1861}, {0.3264, 1.9219, 0.2928}, {0.1861, 0.2928, 1.6660}}},
    {{{0.3747, 0.2421, 0.1492}, {0.2421, 1.7652, 0.1849}, {0.1492, 0.1849, 1.4532}}},
}};

inline constexpr std::array<Mat3, 4> T = {{
    {{{4.3329, 1.7927, -0.2507}, {1.7927, 4.4213, 0.4463}, {-0.2507, 0.4463, 3.4720}}},
    {{{4.2341, 1.7868, -0.2366}, {1.7868, 4.4007, 0.4611}, {-0.2366, 0.4611, 3.4411}}},
    {{{3.4908, 1.6119, -0.0389}, {1.6119, 4.2394, 0.4881}, {-0.0389, 0.4881, 3.3283}}},
    {{{1.4782, 0.3777, 0.3734}, {0.3777, 3.2001, 0.5548}, {0.3734, 0.5548, 2.4932}}},
}};

inline constexpr std::array<Mat23, 4> M = {{
    {{{-0.3286, -0.4234, -0.3474}, {-0.3189, -0.4351, -0.7770}}},
    {{{-0.3436, -0.4156, -0.3531}, {-0.3137, -0.4381, -0.7687}}},
    {{{-0.4029, -0.3946, -0.3315}, {-0.2938, -0.4160, -0.7519}}},
    {{{-0.2418, -0.2552, -0.3178}, {-0.1351, -0.2213, -0.5101}}},
}};

inline constexpr std::array<Mat23, 4> L = {{
    {{{-0.3455, -0.3271, -0.4240}, {-0.2467, -0.2937, -0.4941}}},
    {{{-0.3436, -0.3235, -0.4207}, {-0.2446, -0.2897, -0.4885}}},
    {{{-0.3290, -0.3009, -0.4043}, {-0.2298, -0.2692, -0.4650}}},
    {{{-0.2552, -0.2084, -0.2954}, {-0.1744, -0.1608, -0.3028}}},
}};

/// Sum of the tabulated T_0 entries: ζᵀ T_0 ζ for ζ = (1, 1, 1).
inline constexpr double kOptimalCostOnes = 16.2028;

/// Largest |computed − tabulated| over a table sequence.
template <typename Table, typename Seq>
double max_table_error(const Table& table, const Seq& computed) {
    double worst = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) {
        for (std::size_t i = 0; i < table[k].size(); ++i) {
            for (std::size_t j = 0; j < table[k][i].size(); ++j) {
                const double diff = computed[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - table[k][i][j];
                worst = std::max(worst, diff < 0 ? -diff : diff);
            }
        }
    }
    return worst;
}

}  // namespace mflq::testing::reference
