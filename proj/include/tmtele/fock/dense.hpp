#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "tmtele/fock/density_operator.hpp"

namespace tmtele::fock {

// Row/column index of a packed basis key in the full (cutoff+1)^modes space.
inline std::size_t dense_index(BasisKey key, std::size_t modes, int cutoff) {
    std::size_t idx = 0;
    for (std::size_t i = modes; i-- > 0;) idx = idx * (cutoff + 1) + occupation(key, i);
    return idx;
}

inline std::size_t dense_dimension(const DensityOperator& state) {
    std::size_t d = 1;
    for (std::size_t i = 0; i < state.size(); ++i) d *= static_cast<std::size_t>(state.cutoff() + 1);
    return d;
}

inline Eigen::MatrixXcd to_dense(const DensityOperator& state, std::size_t max_dimension = 4096) {
    const std::size_t dim = dense_dimension(state);
    if (dim > max_dimension) throw std::length_error("to_dense: dimension exceeds limit");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& [k, v] : state.entries())
        m(static_cast<Eigen::Index>(dense_index(k.ket, state.size(), state.cutoff())),
          static_cast<Eigen::Index>(dense_index(k.bra, state.size(), state.cutoff()))) = v;
    return m;
}

inline double min_eigenvalue(const DensityOperator& state) {
    const Eigen::MatrixXcd m = to_dense(state);
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

}  // namespace tmtele::fock
