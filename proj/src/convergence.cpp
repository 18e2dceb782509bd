#include "initlab/convergence.hpp"

#include <algorithm>
#include <cmath>

#include "initlab/grid.hpp"

namespace initlab {

std::vector<double> running_median(const std::vector<double>& raw) {
    std::vector<double> out(raw.size());
    std::vector<double> window;
    window.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        // ceil(2*(i+1)/3) without floating point.
        const std::size_t w = (2 * (i + 1) + 2) / 3;
        window.assign(raw.begin() + static_cast<std::ptrdiff_t>(i + 1 - w),
                      raw.begin() + static_cast<std::ptrdiff_t>(i + 1));
        const std::size_t lo = (w - 1) / 2;
        const std::size_t hi = w / 2;
        std::nth_element(window.begin(),
                         window.begin() + static_cast<std::ptrdiff_t>(lo),
                         window.end());
        const double a = window[lo];
        std::nth_element(window.begin(),
                         window.begin() + static_cast<std::ptrdiff_t>(hi),
                         window.end());
        const double b = window[hi];
        out[i] = 0.5 * (a + b);
    }
    return out;
}

ConvergenceReport convergence_time(const std::vector<double>& t,
                                   const std::vector<double>& raw,
                                   const std::vector<double>& filtered,
                                   double tol) {
    if (t.empty()) {
        throw InvalidArgument("convergence_time: empty series");
    }
    if (t.size() != raw.size() || t.size() != filtered.size()) {
        throw InvalidArgument("convergence_time: series length mismatch");
    }
    if (!(tol > 0.0)) {
        throw InvalidArgument("convergence_time: tol must be positive");
    }

    ConvergenceReport report;
    report.tol = tol;
    report.final_value = filtered.back();

    double band = tol * std::abs(report.final_value);
    if (band == 0.0) {
        double max_abs = 0.0;
        for (double r : raw) max_abs = std::max(max_abs, std::abs(r));
        band = tol * max_abs;
        report.absolute_band = true;
    }
    report.band = band;

    // Walk backwards: the convergence index is the start of the longest
    // suffix that stays inside the band.  The last sample always qualifies
    // (it is its own reference), so j ends at most at size() - 1.
    std::size_t j = t.size();
    while (j > 0 && std::abs(filtered[j - 1] - report.final_value) <= band) {
        --j;
    }
    report.index = j;
    report.t_conv = t[j];
    return report;
}

}  // namespace initlab
