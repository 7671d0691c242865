#include "dsu/attentive.hpp"

#include <algorithm>
#include <cmath>

namespace dsu {

AttentiveWeights attentive_weights(const std::vector<double>& losses, TrainStep step) {
    if (losses.empty()) throw DataError("attentive_weights: empty batch");
    for (const double l : losses)
        if (!std::isfinite(l)) throw NumericError("attentive_weights: non-finite loss");

    AttentiveWeights w;
    w.step = step;
    if (step == TrainStep::One) {
        w.alpha.assign(losses.size(), 1.0);
        return w;
    }
    const double m = *std::max_element(losses.begin(), losses.end());
    double z = 0.0;
    std::vector<double> e(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) {
        e[i] = std::exp(losses[i] - m);
        z += e[i];
    }
    w.alpha.resize(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) w.alpha[i] = (z - e[i]) / z;
    return w;
}

double attentive_bce(const std::vector<double>& per_sample_bce, const AttentiveWeights& w) {
    if (per_sample_bce.size() != w.alpha.size())
        throw DataError("attentive_bce: weight count mismatch");
    const double z = w.sum();
    if (!(z > 0.0)) throw NumericError("attentive_bce: weight sum is zero");
    double s = 0.0;
    for (std::size_t i = 0; i < per_sample_bce.size(); ++i) s += w.alpha[i] * per_sample_bce[i];
    return s / z;
}

std::vector<double> attentive_coefficients(const AttentiveWeights& w) {
    const double z = w.sum();
    if (!(z > 0.0)) throw NumericError("attentive_coefficients: weight sum is zero");
    std::vector<double> c(w.alpha.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = w.alpha[i] / z;
    return c;
}

} // namespace dsu
