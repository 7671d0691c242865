#include "dsu/adam.hpp"

#include <cmath>

namespace dsu {

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Param* p : params_) {
        for (std::size_t i = 0; i < p->size(); ++i) {
            const float g = p->g[i];
            if (!std::isfinite(g))
                throw NumericError("adam: non-finite gradient in parameter " + p->name);
            p->m[i] = static_cast<float>(beta1_ * p->m[i] + (1.0 - beta1_) * g);
            p->v2[i] = static_cast<float>(beta2_ * p->v2[i] + (1.0 - beta2_) * g * g);
            const double mhat = p->m[i] / bc1;
            const double vhat = p->v2[i] / bc2;
            p->v[i] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
        }
    }
}

} // namespace dsu
