#pragma once

#include "csvm/core.hpp"
#include "csvm/kernel.hpp"

#include <vector>

namespace csvm {

/// f(x) = sum_i c_i K(x_i, x) + b with ambiguity band |f| <= margin.
/// Keeps every training point; rows with c_i ~ 0 are inert.
struct CsvmModel {
    Vector coefficients;
    double intercept = 0.0;
    double margin = 0.0;
    KernelSpec kernel;
    Matrix support_features;
    std::vector<Label> support_labels;
    Vector weights_final;

    [[nodiscard]] Eigen::Index dims() const { return support_features.cols(); }
};

} // namespace csvm
