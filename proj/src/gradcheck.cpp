// SPDX-License-Identifier: Apache-2.0
#include "codetrans/gradcheck.hpp"

#include <cmath>

namespace codetrans {

GradCheckResult gradient_check(const ModelParams& params, const std::vector<SeqPair>& batch,
                               double step) {
    ModelParams grads = ModelParams::zeros_like(params);
    loss_and_gradients(params, batch, grads);

    ModelParams probe = params;  // mutated element-by-element
    auto probe_reg = probe.registry();
    auto grad_reg = grads.registry();

    GradCheckResult result;
    for (std::size_t t = 0; t < probe_reg.size(); ++t) {
        Eigen::MatrixXd* tensor = probe_reg[t].second;
        const Eigen::MatrixXd* grad = grad_reg[t].second;
        for (int r = 0; r < tensor->rows(); ++r) {
            for (int c = 0; c < tensor->cols(); ++c) {
                double saved = (*tensor)(r, c);
                (*tensor)(r, c) = saved + step;
                double loss_plus = loss(probe, batch);
                (*tensor)(r, c) = saved - step;
                double loss_minus = loss(probe, batch);
                (*tensor)(r, c) = saved;

                double g_fd = (loss_plus - loss_minus) / (2.0 * step);
                double g_bp = (*grad)(r, c);
                double denom = std::max({std::abs(g_fd), std::abs(g_bp), 1e-8});
                double rel = std::abs(g_bp - g_fd) / denom;
                if (rel > result.max_rel_error) {
                    result.max_rel_error = rel;
                    result.worst_tensor = probe_reg[t].first;
                }
            }
        }
    }
    return result;
}

}  // namespace codetrans
