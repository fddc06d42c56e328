// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "codetrans/model.hpp"

namespace codetrans {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_tensor;
};

// Compares backprop gradients against central finite differences over every
// parameter element. Relative error per element:
//   |g_bp - g_fd| / max(|g_bp|, |g_fd|, 1e-8)
// Meant for tiny double-precision models (dims <= 8, |V| <= 20).
GradCheckResult gradient_check(const ModelParams& params, const std::vector<SeqPair>& batch,
                               double step = 1e-5);

}  // namespace codetrans
