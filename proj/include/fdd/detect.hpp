#pragma once

// Online fault triggering: threshold moving on the calibrated failure
// probability plus a one-sided CUSUM accumulator,
//   C_i = max(0, C_{i-1} + (x_i - T_fp - kappa)),  trigger when C_i > T_cs.
// T_cs = 0 degenerates to plain thresholding x_i > T_fp.

#include <cstdint>
#include <optional>
#include <stdexcept>

namespace fdd::detect {

struct CusumParams {
    double t_fp = 0.75;  // failure probability threshold
    double t_cs = 4.0;   // CUSUM trigger threshold
    double slack = 0.02; // kappa
};

class CusumState {
public:
    explicit CusumState(CusumParams params) : p_(params) {}

    // Feeds one calibrated failure probability. Once triggered the state is
    // frozen until reset().
    void step(double x) {
        if (x < 0.0 || x > 1.0)
            throw std::invalid_argument("CusumState::step: probability outside [0,1]");
        if (triggered_) return;
        ++index_;
        if (p_.t_cs <= 0.0) {
            if (x > p_.t_fp) {
                triggered_ = true;
                trigger_index_ = index_;
            }
            return;
        }
        double next = c_ + (x - p_.t_fp - p_.slack);
        c_ = next > 0.0 ? next : 0.0;
        if (c_ > p_.t_cs) {
            triggered_ = true;
            trigger_index_ = index_;
        }
    }

    void reset() {
        c_ = 0.0;
        index_ = -1;
        triggered_ = false;
        trigger_index_.reset();
    }

    double accumulator() const { return c_; }
    bool triggered() const { return triggered_; }
    std::optional<std::int64_t> trigger_index() const { return trigger_index_; }
    const CusumParams& params() const { return p_; }

private:
    CusumParams p_;
    double c_ = 0.0;
    std::int64_t index_ = -1;
    bool triggered_ = false;
    std::optional<std::int64_t> trigger_index_;
};

// Prevalence-shift threshold: T_fp' = r / (r + r') for train prevalence r
// and deployment prevalence r'.
inline double adapt_threshold(double r_train, double r_deploy) {
    if (r_train <= 0.0 || r_train >= 1.0 || r_deploy <= 0.0 || r_deploy >= 1.0)
        throw std::invalid_argument("adapt_threshold: prevalence must be in (0,1)");
    return r_train / (r_train + r_deploy);
}

// With balanced per-class data and n fault classes vs one nominal class,
// the fault prevalence is n/(n+1).
inline double default_threshold(int n_fault_classes, bool balanced = true) {
    if (n_fault_classes < 1)
        throw std::invalid_argument("default_threshold: need >= 1 fault class");
    if (!balanced) return 0.5;
    return static_cast<double>(n_fault_classes) / (n_fault_classes + 1.0);
}

} // namespace fdd::detect
