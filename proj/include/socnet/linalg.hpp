#pragma once

// Small dense kernels shared by the regression code. Everything is templated
// on the Eigen expression type so callers can pass blocks and maps directly.

#include "socnet/common.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace socnet::linalg {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
typename Derived::RealScalar rank_tolerance(const Eigen::MatrixBase<Derived>& X) {
    using Real = typename Derived::RealScalar;
    return Real(std::max(X.rows(), X.cols())) * Eigen::NumTraits<Real>::epsilon() * Real(16);
}

// Indices of columns that lie in the span of the columns before them.
template <typename Derived>
std::vector<Eigen::Index> dependent_columns(const Eigen::MatrixBase<Derived>& X) {
    using Scalar = typename Derived::Scalar;
    std::vector<Eigen::Index> out;
    Matrix<Scalar> kept(X.rows(), 0);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        Matrix<Scalar> trial(X.rows(), kept.cols() + 1);
        trial << kept, X.col(j);
        Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(trial);
        qr.setThreshold(rank_tolerance(trial));
        if (qr.rank() < trial.cols())
            out.push_back(j);
        else
            kept = std::move(trial);
    }
    return out;
}

// Throws CollinearityError naming every dependent column when X is rank
// deficient.
template <typename Derived>
void require_full_rank(const Eigen::MatrixBase<Derived>& X, const std::vector<std::string>& names) {
    using Scalar = typename Derived::Scalar;
    Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(X);
    qr.setThreshold(rank_tolerance(X));
    if (qr.rank() == X.cols() && X.rows() >= X.cols()) return;
    std::string list;
    for (auto j : dependent_columns(X)) {
        if (!list.empty()) list += ", ";
        list += names.at(std::size_t(j));
    }
    if (list.empty()) list = "fewer rows than terms";
    throw CollinearityError(list);
}

template <typename DerivedX, typename DerivedY>
Vector<typename DerivedX::Scalar> least_squares(const Eigen::MatrixBase<DerivedX>& X,
                                                const Eigen::MatrixBase<DerivedY>& y) {
    return X.colPivHouseholderQr().solve(y);
}

// Symmetric square root S with S*S = V. Negative eigenvalues (numerically
// indefinite input) are clipped to zero and reported through `projected`.
template <typename Derived>
Matrix<typename Derived::Scalar> symmetric_sqrt(const Eigen::MatrixBase<Derived>& V, bool* projected = nullptr) {
    using Scalar = typename Derived::Scalar;
    const Matrix<Scalar> sym = (V + V.transpose()) / Scalar(2);
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sym);
    Vector<Scalar> lambda = es.eigenvalues();
    const Scalar scale = std::max(Scalar(1e-300), lambda.cwiseAbs().maxCoeff());
    bool clipped = false;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) < -Scalar(1e-10) * scale) clipped = true;
        lambda(i) = lambda(i) > Scalar(0) ? std::sqrt(lambda(i)) : Scalar(0);
    }
    if (projected) *projected = clipped;
    return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace socnet::linalg
