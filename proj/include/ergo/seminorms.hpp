// seminorms.hpp — finite-scale estimators of the box seminorms for commuting
// transformations, realized as nested interval averages.
//
// The box measure is never materialized: the degree-d quantity is estimated by
// the recursion value(d, f)^(2^d) = avg_{n < N_d} value(d-1, T_d^n f conj f),
// with the base level avg_{n < N_1} Re integral(conj f * T_1^n f) clipped at 0
// before roots. Every estimate ships with a schedule-doubling diagnostic.

#pragma once

#include <string>
#include <vector>

#include "ergo/correlation.hpp"
#include "ergo/systems.hpp"

namespace ergo {

struct WindowSchedule {
    std::vector<long long> lengths;  // N_1 .. N_d, innermost first

    static WindowSchedule uniform(int d, long long n) {
        return WindowSchedule{std::vector<long long>(static_cast<std::size_t>(d), n)};
    }
    WindowSchedule doubled() const {
        WindowSchedule w = *this;
        for (auto& l : w.lengths) l *= 2;
        return w;
    }
    int depth() const { return static_cast<int>(lengths.size()); }
};

struct SeminormEstimate {
    double value{0.0};
    double doubled_value{0.0};
    double diagnostic{0.0};       // |value - doubled| / max(value, 1e-6)
    double clip_magnitude{0.0};   // largest negative base average clipped to 0
    WindowSchedule schedule;
    std::vector<std::string> transforms;
};

SeminormEstimate box_seminorm(const System& sys, const Observable& f,
                              std::vector<std::string> transforms, const WindowSchedule& schedule);

struct PermutationCheckReport {
    std::vector<SeminormEstimate> estimates;  // one per distinct transform order
    std::vector<std::vector<std::string>> orders;
    double max_relative_difference{0.0};
};

PermutationCheckReport permutation_check(const System& sys, const Observable& f,
                                         std::vector<std::string> transforms,
                                         const WindowSchedule& schedule);

struct CollapseCheckReport {
    bool refused{false};          // hypothesis audit failed; nothing computed
    AuditReport audit;
    SeminormEstimate mixed;       // |||f|||_{T_1..T_d}
    std::vector<SeminormEstimate> collapsed;  // |||f|||_{T_i,..,T_i} per i
    std::vector<double> relative_differences;
};

CollapseCheckReport ergodic_collapse_check(const System& sys, const Observable& f,
                                           std::vector<std::string> transforms,
                                           const WindowSchedule& schedule);

struct AverageBoundReport {
    double average_l2{0.0};     // || (1/N) sum_n prod_i S_i^n f_i ||_L2
    double seminorm_bound{0.0}; // |||f_1|||_{T_1..T_d} with T_1 = S_1, T_i = S_1 S_i^{-1}
    double slack{0.0};          // bound - average
    SeminormEstimate bound_estimate;
};

// requires sup-norm bounds <= 1 for f_2..f_d (checked via the bound fields)
AverageBoundReport average_bound_check(const System& sys, std::span<const Observable> fs,
                                       std::vector<std::string> transforms,
                                       const WindowSchedule& schedule, long long n_range);

}  // namespace ergo
