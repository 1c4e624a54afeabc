#pragma once

// Independence-working-correlation GEE on a dense design: iteratively
// reweighted least squares for the coefficients, clustered sandwich
// B^-1 M B^-1 for their covariance.

#include "socnet/common.hpp"
#include "socnet/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace socnet {

enum class Link { identity, logit };
enum class ClusterKey { ego, dyad };

inline std::string_view to_string(Link l) { return l == Link::identity ? "identity" : "logit"; }
inline Link parse_link(std::string_view s) {
    if (s == "identity") return Link::identity;
    if (s == "logit") return Link::logit;
    throw DataError("unknown link '" + std::string(s) + "' (expected identity or logit)");
}
inline std::string_view to_string(ClusterKey k) { return k == ClusterKey::ego ? "ego" : "dyad"; }

struct SolverOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;     // relative coefficient change
    double separation_bound = 30; // |beta| beyond this on the linear scale = separation
    bool small_sample_correction = false; // G / (G - 1)
};

template <typename Scalar>
Scalar inverse_link(Link link, Scalar eta) {
    if (link == Link::identity) return eta;
    return eta >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-eta)) : std::exp(eta) / (Scalar(1) + std::exp(eta));
}

template <typename Scalar>
struct GeeSolution {
    linalg::Vector<Scalar> beta;
    linalg::Matrix<Scalar> covariance;
    int iterations = 0;
    std::size_t n_clusters = 0;
};

// Clustered sandwich for given per-row working weights and raw residuals.
template <typename DerivedX, typename DerivedW, typename DerivedR>
linalg::Matrix<typename DerivedX::Scalar> cluster_sandwich(const Eigen::MatrixBase<DerivedX>& X,
                                                           const Eigen::MatrixBase<DerivedW>& weights,
                                                           const Eigen::MatrixBase<DerivedR>& residuals,
                                                           std::span<const long> clusters, bool small_sample,
                                                           std::size_t* n_clusters = nullptr) {
    using Scalar = typename DerivedX::Scalar;
    const auto p = X.cols();
    std::vector<long> labels(clusters.begin(), clusters.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    const auto G = Eigen::Index(labels.size());
    linalg::Matrix<Scalar> scores = linalg::Matrix<Scalar>::Zero(G, p);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto g = std::lower_bound(labels.begin(), labels.end(), clusters[std::size_t(i)]) - labels.begin();
        scores.row(g) += residuals(i) * X.row(i);
    }
    const linalg::Matrix<Scalar> bread = X.transpose() * weights.asDiagonal() * X;
    const linalg::Matrix<Scalar> bread_inv = bread.ldlt().solve(linalg::Matrix<Scalar>::Identity(p, p));
    const linalg::Matrix<Scalar> meat = scores.transpose() * scores;
    linalg::Matrix<Scalar> cov = bread_inv * meat * bread_inv;
    cov = (cov + cov.transpose()) / Scalar(2);
    if (small_sample && G > 1) cov *= Scalar(G) / Scalar(G - 1);
    if (n_clusters) *n_clusters = std::size_t(G);
    return cov;
}

template <typename DerivedX, typename DerivedY>
GeeSolution<typename DerivedX::Scalar> solve_gee(const Eigen::MatrixBase<DerivedX>& X,
                                                 const Eigen::MatrixBase<DerivedY>& y,
                                                 std::span<const long> clusters, Link link,
                                                 const SolverOptions& opt, const std::vector<std::string>& names) {
    using Scalar = typename DerivedX::Scalar;
    using Vec = linalg::Vector<Scalar>;
    if (X.rows() != y.rows() || std::size_t(X.rows()) != clusters.size())
        throw DataError("design, outcome and cluster labels differ in length");
    if (X.rows() == 0) throw DataError("no rows to fit");
    linalg::require_full_rank(X, names);
    if (link == Link::logit)
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y(i) != Scalar(0) && y(i) != Scalar(1)) throw DataError("logit link requires a binary (0/1) outcome");

    GeeSolution<Scalar> sol;
    Vec weights = Vec::Ones(X.rows());
    Vec mu(X.rows());
    if (link == Link::identity) {
        sol.beta = linalg::least_squares(X, y);
        sol.iterations = 1;
        mu = X * sol.beta;
    } else {
        sol.beta = Vec::Zero(X.cols());
        bool converged = false;
        for (int it = 1; it <= opt.max_iterations; ++it) {
            const Vec eta = X * sol.beta;
            for (Eigen::Index i = 0; i < eta.size(); ++i) {
                mu(i) = inverse_link(link, eta(i));
                weights(i) = std::max(mu(i) * (Scalar(1) - mu(i)), Scalar(1e-300));
            }
            const Vec score = X.transpose() * (y - mu);
            const linalg::Matrix<Scalar> info = X.transpose() * weights.asDiagonal() * X;
            const Vec step = info.ldlt().solve(score);
            sol.beta += step;
            sol.iterations = it;
            if (!sol.beta.allFinite() || sol.beta.cwiseAbs().maxCoeff() > Scalar(opt.separation_bound)) {
                std::string worst;
                Eigen::Index k = 0;
                sol.beta.cwiseAbs().maxCoeff(&k);
                if (std::size_t(k) < names.size()) worst = " (term '" + names[std::size_t(k)] + "')";
                throw NumericalError("logit separation: coefficients diverge beyond |beta| > " +
                                     std::to_string(int(opt.separation_bound)) + worst);
            }
            const Scalar scale = std::max(sol.beta.cwiseAbs().maxCoeff(), Scalar(1e-8));
            if (step.cwiseAbs().maxCoeff() <= Scalar(opt.tolerance) * scale) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw NumericalError("IRLS did not converge within " + std::to_string(opt.max_iterations) + " iterations");
        const Vec eta = X * sol.beta;
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            mu(i) = inverse_link(link, eta(i));
            weights(i) = mu(i) * (Scalar(1) - mu(i));
        }
    }
    const Vec resid = y - mu;
    sol.covariance = cluster_sandwich(X, weights, resid, clusters, opt.small_sample_correction, &sol.n_clusters);
    return sol;
}

} // namespace socnet
