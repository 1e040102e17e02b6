#pragma once

// Finite-difference gradient checking shared by the unit tests and the
// acceptance suite. Central differences in float64 against the analytic
// backward pass.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "xfish/nn.hpp"

namespace xfish::testsupport {

struct GradCheckResult {
    double max_rel_err = 0.0;
    int checked = 0;
};

inline double rel_err(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale < 1e-10) return 0.0;  // both effectively zero; FD noise dominates
    return std::abs(a - b) / std::max(scale, 1.0e-4);
}

/// Compares analytic gradients already stored in `params[i]->grad` against
/// central finite differences of `loss_fn`, on up to `coords_per_tensor`
/// deterministically sampled coordinates per tensor.
inline GradCheckResult check_gradients(const std::vector<nn::Param*>& params,
                                       const std::function<double()>& loss_fn,
                                       int coords_per_tensor = 24, double h = 1e-6,
                                       std::uint64_t seed = 12345) {
    std::mt19937_64 rng(seed);
    GradCheckResult result;
    for (nn::Param* p : params) {
        std::vector<std::size_t> coords;
        if (p->value.size() <= static_cast<std::size_t>(coords_per_tensor)) {
            for (std::size_t i = 0; i < p->value.size(); ++i) coords.push_back(i);
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, p->value.size() - 1);
            for (int i = 0; i < coords_per_tensor; ++i) coords.push_back(pick(rng));
        }
        for (std::size_t idx : coords) {
            const double saved = p->value[idx];
            const double step = h * std::max(1.0, std::abs(saved));
            p->value[idx] = saved + step;
            const double up = loss_fn();
            p->value[idx] = saved - step;
            const double down = loss_fn();
            p->value[idx] = saved;
            const double fd = (up - down) / (2.0 * step);
            result.max_rel_err = std::max(result.max_rel_err, rel_err(fd, p->grad[idx]));
            ++result.checked;
        }
    }
    return result;
}

}  // namespace xfish::testsupport
