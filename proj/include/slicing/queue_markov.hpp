#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "slicing/model_core.hpp"

namespace slicing {

struct TransitionMatrix {
    Eigen::MatrixXd p;

    int dim() const { return static_cast<int>(p.rows()); }
    double operator()(int i, int j) const { return p(i, j); }
};

struct PhaseMatrices {
    TransitionMatrix reserved;
    TransitionMatrix mixed;
};

// Queue right after an intermittent slot to queue right after the next one:
// j = max(min(i + m, Q) - 1, 0) with m ~ Bin(T_int, alpha).
inline TransitionMatrix oma_post_tx_matrix(int T_int, double alpha, int Q)
{
    if (T_int < 1 || Q < 1) throw std::invalid_argument("oma_post_tx_matrix: T_int >= 1 and Q >= 1 required");
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(Q + 1, Q + 1);
    for (int i = 0; i <= Q; ++i)
        for (int m = 0; m <= T_int; ++m) {
            int j = std::max(std::min(i + m, Q) - 1, 0);
            P(i, j) += binomial_pmf(m, T_int, alpha);
        }
    return {P};
}

// The three-case formula exactly as printed; kept for comparison only (row 0 and the j = Q column differ).
inline TransitionMatrix oma_post_tx_matrix_printed(int T_int, double alpha, int Q)
{
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(Q + 1, Q + 1);
    for (int i = 0; i <= Q; ++i)
        for (int j = 0; j <= Q; ++j) {
            if (j < i - 1) continue;
            if (j < Q) {
                P(i, j) = binomial_pmf(j - i + 1, T_int, alpha);
            } else {
                double s = 0.0;
                for (int m = Q - i + 1; m <= T_int; ++m) s += binomial_pmf(m, T_int, alpha);
                P(i, j) = s;
            }
        }
    return {P};
}

inline PhaseMatrices pnoma_phase_matrices(double alpha, int Q)
{
    if (Q < 1) throw std::invalid_argument("pnoma_phase_matrices: Q >= 1 required");
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(Q + 1, Q + 1);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(Q + 1, Q + 1);
    for (int i = 0; i < Q; ++i) {
        R(i, i + 1) = alpha;
        R(i, i) = 1.0 - alpha;
    }
    R(Q, Q) = 1.0;
    X(0, 0) = 1.0;
    X(Q, Q - 1) = 1.0;
    for (int i = 1; i < Q; ++i) {
        X(i, i) = alpha;
        X(i, i - 1) = 1.0 - alpha;
    }
    return {{R}, {X}};
}

inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& A, int e)
{
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd base = A;
    while (e > 0) {
        if (e & 1) result = result * base;
        base = base * base;
        e >>= 1;
    }
    return result;
}

inline TransitionMatrix compose_frame_matrix(const TransitionMatrix& reserved, const TransitionMatrix& mixed, int N, int M)
{
    if (reserved.p.rows() != mixed.p.rows() || reserved.p.rows() != reserved.p.cols() || mixed.p.rows() != mixed.p.cols())
        throw std::invalid_argument("compose_frame_matrix: dimension mismatch");
    if (M < 1 || M > N) throw std::invalid_argument("compose_frame_matrix: 1 <= M <= N required");
    return {matrix_power(reserved.p, N - M) * matrix_power(mixed.p, M)};
}

// Solves pi (I - P) = 0 with the last equation replaced by sum(pi) = 1.
inline QueueDistribution steady_state(const TransitionMatrix& P)
{
    const int n = P.dim();
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - P.p.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> rank_check(A);
    rank_check.setThreshold(1e-12);
    if (rank_check.rank() < n - 1) throw std::runtime_error("non-ergodic chain");
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw std::runtime_error("non-ergodic chain");
    Eigen::VectorXd x = lu.solve(b);
    QueueDistribution d{std::vector<double>(static_cast<std::size_t>(n))};
    for (int i = 0; i < n; ++i) d.probs[static_cast<std::size_t>(i)] = std::max(0.0, x(i));
    double s = 0.0;
    for (double v : d.probs) s += v;
    for (double& v : d.probs) v /= s;
    return d;
}

// Stationary law of the chain started from the empty queue: restricts to states reachable from 0.
inline QueueDistribution stationary_from_empty(const TransitionMatrix& P)
{
    const int n = P.dim();
    std::vector<int> reach{0};
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    seen[0] = true;
    for (std::size_t h = 0; h < reach.size(); ++h)
        for (int j = 0; j < n; ++j)
            if (!seen[static_cast<std::size_t>(j)] && P.p(reach[h], j) > 0.0) {
                seen[static_cast<std::size_t>(j)] = true;
                reach.push_back(j);
            }
    std::sort(reach.begin(), reach.end());
    const int r = static_cast<int>(reach.size());
    TransitionMatrix sub{Eigen::MatrixXd(r, r)};
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) sub.p(a, b) = P.p(reach[a], reach[b]);
    QueueDistribution s = steady_state(sub);
    QueueDistribution out{std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    for (int a = 0; a < r; ++a) out.probs[static_cast<std::size_t>(reach[a])] = s.probs[static_cast<std::size_t>(a)];
    return out;
}

inline QueueDistribution propagate(const QueueDistribution& pi, const Eigen::MatrixXd& P)
{
    Eigen::RowVectorXd v(static_cast<Eigen::Index>(pi.probs.size()));
    for (std::size_t i = 0; i < pi.probs.size(); ++i) v(static_cast<Eigen::Index>(i)) = pi.probs[i];
    Eigen::RowVectorXd w = v * P;
    QueueDistribution out{std::vector<double>(pi.probs.size())};
    for (std::size_t i = 0; i < pi.probs.size(); ++i) out.probs[i] = std::max(0.0, w(static_cast<Eigen::Index>(i)));
    return out;
}

// One intermittent transmission: i -> max(i-1, 0).
inline QueueDistribution oma_departure(const QueueDistribution& pi)
{
    QueueDistribution out{std::vector<double>(pi.probs.size(), 0.0)};
    for (std::size_t i = 0; i < pi.probs.size(); ++i) out.probs[i == 0 ? 0 : i - 1] += pi.probs[i];
    return out;
}

// Queue law n slots into the period (OMA: after the intermittent slot; PNOMA: after the frame start).
inline QueueDistribution slot_distribution(const AccessConfig& cfg, const QueueDistribution& pi0, int n, double alpha)
{
    const int Q = pi0.capacity();
    if (cfg.scheme == Scheme::OMA) {
        if (n < 0 || n > cfg.T_int) throw std::out_of_range("slot_distribution: n out of range");
        QueueDistribution out{std::vector<double>(static_cast<std::size_t>(Q) + 1, 0.0)};
        for (int q = 0; q < Q; ++q)
            for (int s = 0; s <= q; ++s) out.probs[q] += pi0.probs[s] * binomial_pmf(q - s, n, alpha);
        double full = 0.0;
        for (int s = 0; s <= Q; ++s)
            for (int m = Q - s; m <= n; ++m) full += pi0.probs[s] * binomial_pmf(m, n, alpha);
        out.probs[Q] = full;
        return out;
    }
    const int N = cfg.N, M = cfg.mixed();
    if (n < 0 || n > N) throw std::out_of_range("slot_distribution: n out of range");
    PhaseMatrices ph = pnoma_phase_matrices(alpha, Q);
    Eigen::MatrixXd P = matrix_power(ph.reserved.p, std::min(n, N - M)) * matrix_power(ph.mixed.p, std::max(n - N + M, 0));
    return propagate(pi0, P);
}

}  // namespace slicing
