#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "ilreg/error.hpp"

namespace ilreg {

// Downhill simplex configuration. Coefficients are the standard set; the
// convergence test requires both the value spread and the simplex diameter
// to fall below their thresholds.
struct SimplexConfig {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    double init_step = 0.05;  // per-parameter offset of the initial simplex
    // Optional per-parameter offsets; when set (size == dimension) they
    // override init_step so the simplex can match each parameter's scale.
    std::vector<double> init_steps;
    double tol_f = 1e-7;
    double tol_x = 1e-5;
    int max_evals = 2000;  // budget per run
    int restarts = 3;      // maximum reinitializations at a converged minimum

    double step_for(size_t i) const {
        return i < init_steps.size() ? init_steps[i] : init_step;
    }

    void validate() const {
        if (!(reflection > 0.0 && expansion > 0.0 && contraction > 0.0 && shrink > 0.0 &&
              init_step > 0.0 && tol_f > 0.0 && tol_x > 0.0 && max_evals > 0))
            throw ConfigError("simplex parameters must be positive");
        for (double s : init_steps)
            if (!(s > 0.0)) throw ConfigError("per-parameter simplex offsets must be positive");
        if (restarts < 0) throw ConfigError("restarts must be >= 0");
    }
};

struct SimplexResult {
    std::vector<double> argmin;
    double value = 0.0;
    int evals = 0;
};

using SimplexObjective = std::function<double(const std::vector<double>&)>;
// Invoked once per iteration with (iteration, best value, simplex diameter).
using SimplexCallback = std::function<void(int, double, double)>;

// Deterministic Nelder-Mead minimization. The objective must be total over
// the search space (invalid regions should return a finite worst-case value
// so the simplex can back out of them).
inline SimplexResult nelder_mead(const SimplexObjective& objective,
                                 const std::vector<double>& start, const SimplexConfig& cfg,
                                 const SimplexCallback& on_iter = {}) {
    cfg.validate();
    const size_t k = start.size();
    if (k == 0) throw DomainError("cannot optimize a zero-dimensional objective");

    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return objective(x);
    };

    std::vector<std::vector<double>> xs(k + 1, start);
    for (size_t i = 0; i < k; ++i) xs[i + 1][i] += cfg.step_for(i);
    std::vector<double> fs(k + 1);
    for (size_t i = 0; i <= k; ++i) fs[i] = eval(xs[i]);
    if (!std::isfinite(fs[0]))
        throw ConfigError("objective is not finite at the start point");

    std::vector<size_t> order(k + 1);
    auto sort_order = [&]() {
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return fs[a] < fs[b]; });
    };

    auto diameter = [&]() {
        const auto& best = xs[order[0]];
        double d = 0.0;
        for (size_t i = 1; i <= k; ++i) {
            double s = 0.0;
            for (size_t j = 0; j < k; ++j) {
                const double dj = xs[order[i]][j] - best[j];
                s += dj * dj;
            }
            d = std::max(d, std::sqrt(s));
        }
        return d;
    };

    int iter = 0;
    sort_order();
    while (true) {
        const size_t best = order[0];
        const size_t second_worst = order[k - 1];
        const size_t worst = order[k];

        const double diam = diameter();
        if (on_iter) on_iter(iter, fs[best], diam);
        if ((fs[worst] - fs[best] <= cfg.tol_f && diam <= cfg.tol_x) || evals >= cfg.max_evals)
            break;
        ++iter;

        std::vector<double> centroid(k, 0.0);
        for (size_t i = 0; i <= k; ++i) {
            if (i == worst) continue;
            for (size_t j = 0; j < k; ++j) centroid[j] += xs[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(k);

        auto blend = [&](const std::vector<double>& from, double t) {
            std::vector<double> p(k);
            for (size_t j = 0; j < k; ++j) p[j] = centroid[j] + t * (from[j] - centroid[j]);
            return p;
        };

        const std::vector<double> xr = blend(xs[worst], -cfg.reflection);
        const double fr = eval(xr);

        if (fr < fs[best]) {
            const std::vector<double> xe = blend(xr, cfg.expansion);
            const double fe = eval(xe);
            if (fe < fr) {
                xs[worst] = xe;
                fs[worst] = fe;
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
        } else if (fr < fs[second_worst]) {
            xs[worst] = xr;
            fs[worst] = fr;
        } else {
            bool shrink_needed = false;
            if (fr < fs[worst]) {
                const std::vector<double> xc = blend(xr, cfg.contraction);
                const double fc = eval(xc);
                if (fc <= fr) {
                    xs[worst] = xc;
                    fs[worst] = fc;
                } else {
                    shrink_needed = true;
                }
            } else {
                const std::vector<double> xc = blend(xs[worst], cfg.contraction);
                const double fc = eval(xc);
                if (fc < fs[worst]) {
                    xs[worst] = xc;
                    fs[worst] = fc;
                } else {
                    shrink_needed = true;
                }
            }
            if (shrink_needed) {
                const std::vector<double> anchor = xs[order[0]];
                for (size_t i = 0; i <= k; ++i) {
                    if (i == order[0]) continue;
                    for (size_t j = 0; j < k; ++j)
                        xs[i][j] = anchor[j] + cfg.shrink * (xs[i][j] - anchor[j]);
                    fs[i] = eval(xs[i]);
                }
            }
        }
        sort_order();
    }

    SimplexResult result;
    result.argmin = xs[order[0]];
    result.value = fs[order[0]];
    result.evals = evals;
    return result;
}

}  // namespace ilreg
