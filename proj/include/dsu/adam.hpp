#pragma once

#include <vector>

#include "dsu/layers.hpp"

namespace dsu {

// Standard adaptive-moment optimizer over an explicit parameter group.
class Adam {
public:
    explicit Adam(std::vector<Param*> params, double lr = 1e-4, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    // One update from the accumulated gradients. Throws NumericError naming
    // the parameter if any gradient is non-finite.
    void step();

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }
    long step_count() const { return t_; }
    void set_step_count(long t) { t_ = t; }

private:
    std::vector<Param*> params_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

} // namespace dsu
