#pragma once

#include <cstddef>
#include <vector>

namespace initlab {

/// Order-statistic filter over a growing tail window: entry i is the median
/// of the most recent ceil(2/3 * (i+1)) raw samples.  Even windows average
/// the two central order statistics.
std::vector<double> running_median(const std::vector<double>& raw);

struct ConvergenceReport {
    double t_conv = 0.0;        ///< earliest time after which the filtered
                                ///< series stays inside the band
    std::size_t index = 0;      ///< sample index of t_conv
    double final_value = 0.0;   ///< last filtered value
    double band = 0.0;          ///< half-width of the acceptance band
    double tol = 0.0;
    bool absolute_band = false; ///< band fell back to tol * max|raw|
};

/// Finds the earliest index j such that |filtered[i] - final| <= band for all
/// i >= j, where band = tol * |final|, or tol * max|raw| when the final value
/// is zero.  Throws InvalidArgument on empty input, mismatched lengths, or a
/// non-positive tolerance.
ConvergenceReport convergence_time(const std::vector<double>& t,
                                   const std::vector<double>& raw,
                                   const std::vector<double>& filtered,
                                   double tol);

}  // namespace initlab
