#include "fcsn/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fcsn {

double GradCheckReport::max_rel_err() const {
    double m = 0.0;
    for (const GroupReport& g : groups) m = std::max(m, g.max_rel_err);
    return m;
}

std::string GradCheckReport::summary() const {
    std::string out;
    char line[256];
    for (const GroupReport& g : groups) {
        std::snprintf(line, sizeof(line), "%-40s max_rel_err=%.3e checked=%zu %s\n", g.name.c_str(), g.max_rel_err,
                      g.checked, g.pass ? "ok" : "FAIL");
        out += line;
    }
    std::snprintf(line, sizeof(line), "overall: max_rel_err=%.3e tolerance=%.1e step=%.1e -> %s\n", max_rel_err(),
                  tolerance, step, pass ? "PASS" : "FAIL");
    out += line;
    return out;
}

GradCheckReport grad_check(const std::function<double()>& loss_fn, const std::function<void()>& backward_fn,
                           const std::vector<GradCheckGroup>& groups, double step, double tolerance,
                           int samples_per_group, uint64_t seed) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");
    if (tolerance <= 0.0) throw std::invalid_argument("grad_check: tolerance must be positive");

    backward_fn();
    std::vector<std::vector<double>> analytic(groups.size());
    for (size_t gi = 0; gi < groups.size(); ++gi)
        analytic[gi].assign(groups[gi].grads, groups[gi].grads + groups[gi].count);

    GradCheckReport report;
    report.step = step;
    report.tolerance = tolerance;
    std::mt19937_64 rng(seed);

    for (size_t gi = 0; gi < groups.size(); ++gi) {
        const GradCheckGroup& grp = groups[gi];
        std::vector<size_t> idx;
        if (samples_per_group <= 0 || static_cast<size_t>(samples_per_group) >= grp.count) {
            idx.resize(grp.count);
            for (size_t i = 0; i < grp.count; ++i) idx[i] = i;
        } else {
            for (int i = 0; i < samples_per_group; ++i) idx.push_back(uniform_index(rng, grp.count));
            std::sort(idx.begin(), idx.end());
            idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        }

        GroupReport gr;
        gr.name = grp.name;
        gr.checked = idx.size();
        for (size_t i : idx) {
            const double saved = grp.values[i];
            grp.values[i] = saved + step;
            const double lp = loss_fn();
            grp.values[i] = saved - step;
            const double lm = loss_fn();
            grp.values[i] = saved;
            const double numeric = (lp - lm) / (2.0 * step);
            const double a = analytic[gi][i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-6});
            gr.max_rel_err = std::max(gr.max_rel_err, std::fabs(a - numeric) / denom);
        }
        gr.pass = gr.max_rel_err < tolerance;
        report.pass = report.pass && gr.pass;
        report.groups.push_back(std::move(gr));
    }
    return report;
}

} // namespace fcsn
