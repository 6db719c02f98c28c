#pragma once

// Poverty and inequality outputs: Gini over wealth, a relative poverty
// headcount over trailing-window income, and a basic-need deprivation index,
// recorded once per step.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polisim/agent.hpp"
#include "polisim/errors.hpp"
#include "polisim/world.hpp"

namespace polisim {

// Mean absolute difference over twice the mean: sum_ij |x_i - x_j| / (2 n^2 mu),
// computed from the sorted prefix-sum identity in O(n log n). All-zero input
// returns 0 by convention.
inline double gini(const std::vector<double>& values) {
    if (values.empty()) {
        throw ValidationError("gini: empty value list");
    }
    double total = 0.0;
    for (double v : values) {
        if (v < 0.0) throw ContractViolation("gini: negative value");
        total += v;
    }
    if (total == 0.0) return 0.0;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    // sum_ij |x_i - x_j| = 2 * sum_i (i * x_(i) - prefix_i), 0-based ranks.
    double abs_diff_sum = 0.0;
    double prefix = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        abs_diff_sum += static_cast<double>(i) * sorted[i] - prefix;
        prefix += sorted[i];
    }
    abs_diff_sum *= 2.0;
    const double n = static_cast<double>(sorted.size());
    return abs_diff_sum / (2.0 * n * total);
}

inline double gini_currency(const std::vector<Currency>& values) {
    std::vector<double> as_double(values.begin(), values.end());
    return gini(as_double);
}

struct HeadcountResult {
    double ratio = 0.0;
    double line = 0.0;
};

// Relative poverty: line = fraction of the median income (lower-middle median
// for even n), ratio counts incomes strictly below the line.
inline HeadcountResult poverty_headcount(const std::vector<Currency>& incomes, double line_fraction) {
    if (incomes.empty()) {
        throw ValidationError("poverty_headcount: empty income list");
    }
    if (line_fraction <= 0.0 || line_fraction > 1.0) {
        throw ContractViolation("poverty_headcount: line fraction outside (0,1]");
    }
    std::vector<Currency> sorted = incomes;
    std::sort(sorted.begin(), sorted.end());
    const Currency median = sorted[(sorted.size() - 1) / 2];
    const double line = line_fraction * static_cast<double>(median);
    std::size_t below = 0;
    for (Currency v : sorted) {
        if (static_cast<double>(v) < line) ++below;
    }
    return {static_cast<double>(below) / static_cast<double>(sorted.size()), line};
}

// Fraction of agents with at least one listed need strictly under the
// threshold. Needs absent from an agent's state are ignored.
inline double deprivation_index(const std::vector<AgentState>& agents, double threshold,
                                const std::vector<std::string>& basic_needs) {
    if (agents.empty()) {
        throw ValidationError("deprivation_index: empty agent list");
    }
    if (threshold < 0.0 || threshold > 1.0) {
        throw ContractViolation("deprivation_index: threshold outside [0,1]");
    }
    std::size_t deprived = 0;
    for (const auto& agent : agents) {
        for (const auto& need : basic_needs) {
            auto it = agent.needs.nsl.find(need);
            if (it != agent.needs.nsl.end() && it->second < threshold) {
                ++deprived;
                break;
            }
        }
    }
    return static_cast<double>(deprived) / static_cast<double>(agents.size());
}

struct StepMetrics {
    std::int64_t step = 0;
    double gini_wealth = 0.0;
    double poverty_line = 0.0;
    double headcount_ratio = 0.0;
    double deprivation_index = 0.0;
    std::vector<std::pair<std::string, double>> mean_nsl;  // catalog order
};

struct MetricsConfig {
    double line_fraction = 0.6;
    std::int64_t income_window = 30;
    std::string basic_category = "basic";  // category whose needs feed deprivation_index
};

// Accumulates per-step wealth snapshots so headcount income can be a trailing
// wealth delta (clamped at zero: losses are not negative income). Metrics are
// recorded at the top of each step, before that step's deliberation.
class MetricsRecorder {
public:
    explicit MetricsRecorder(MetricsConfig config) : config_(std::move(config)) {}

    const MetricsConfig& config() const { return config_; }
    const std::vector<StepMetrics>& series() const { return series_; }

    StepMetrics record_step(const WorldState& world) {
        std::vector<Currency> wealth;
        wealth.reserve(world.agents.size());
        for (const auto& agent : world.agents) wealth.push_back(agent.wealth);
        wealth_history_.push_back(wealth);

        const std::size_t now = wealth_history_.size() - 1;
        const std::size_t ref =
            now > static_cast<std::size_t>(config_.income_window)
                ? now - static_cast<std::size_t>(config_.income_window)
                : 0;
        std::vector<Currency> incomes(wealth.size(), 0);
        for (std::size_t i = 0; i < wealth.size(); ++i) {
            incomes[i] = std::max<Currency>(0, wealth[i] - wealth_history_[ref][i]);
        }

        StepMetrics m;
        m.step = world.step;
        m.gini_wealth = gini_currency(wealth);
        const HeadcountResult hc = poverty_headcount(incomes, config_.line_fraction);
        m.poverty_line = hc.line;
        m.headcount_ratio = hc.ratio;
        m.deprivation_index = deprivation_index(world.agents, world.catalog.deprivation_threshold,
                                                basic_needs_of(world.catalog));
        for (const auto& need : world.catalog.all_needs()) {
            double sum = 0.0;
            for (const auto& agent : world.agents) sum += agent.needs.nsl.at(need);
            m.mean_nsl.emplace_back(need, sum / static_cast<double>(world.agents.size()));
        }
        series_.push_back(m);
        return m;
    }

private:
    std::vector<std::string> basic_needs_of(const NeedCatalog& catalog) const {
        if (const NeedCategory* cat = catalog.find_category(config_.basic_category)) {
            return cat->needs;
        }
        return catalog.all_needs();
    }

    MetricsConfig config_;
    std::vector<StepMetrics> series_;
    std::vector<std::vector<Currency>> wealth_history_;
};

}  // namespace polisim
