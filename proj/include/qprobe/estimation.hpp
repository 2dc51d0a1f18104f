#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

#include "qprobe/dataset.hpp"
#include "qprobe/error.hpp"
#include "qprobe/graph.hpp"

namespace qprobe {

enum class AteMethod { TrivialZero, LinearAdjusted, Stratified };

std::string_view to_string(AteMethod m);

struct AteEstimate {
    std::string treatment;
    std::string outcome;
    double value = 0.0;
    AteMethod method = AteMethod::TrivialZero;
    std::vector<std::string> adjustment;
    /// Share of rows in strata that contain both treatment arms (stratified only).
    double retained_weight = 1.0;
};

/// Backdoor adjustment set used for identification: the treatment's parents.
std::vector<Node> adjustment_set(const Dag& g, Node t, Node o);

/// Least squares coefficients; the minimum-norm solution for rank-deficient
/// designs.
template <typename DesignDerived, typename ResponseDerived>
Eigen::Matrix<typename DesignDerived::Scalar, Eigen::Dynamic, 1> ols(const Eigen::MatrixBase<DesignDerived>& design,
                                                                     const Eigen::MatrixBase<ResponseDerived>& response) {
    using Scalar = typename DesignDerived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (design.rows() != response.rows() || response.cols() != 1) {
        throw ArgumentError("ols: design has " + std::to_string(design.rows()) + " rows, response has " +
                            std::to_string(response.rows()));
    }
    if (design.rows() < 1) {
        throw ArgumentError("ols: empty design");
    }
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    return cod.solve(response.template cast<Scalar>());
}

/// Coefficient of the treatment in an OLS regression of the outcome on an
/// intercept, the treatment and the adjustment set. Exactly zero (TrivialZero)
/// when g has no directed path t -> o. Nodes are resolved against the dataset
/// by label.
AteEstimate estimate_ate_linear(const BinaryDataset& d, const Dag& g, Node t, Node o);

/// Plug-in backdoor estimate over adjustment-set strata. Strata lacking
/// either arm are dropped and the remaining weights renormalized. Throws
/// EstimationError if no stratum has both arms.
AteEstimate estimate_ate_stratified(const BinaryDataset& d, const Dag& g, Node t, Node o);

} // namespace qprobe
