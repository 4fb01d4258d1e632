#pragma once

#include <span>
#include <vector>

#include "iscc/beampattern.hpp"
#include "iscc/radio.hpp"

namespace iscc {

/// Per-device communication (Nt x d) and radar (Nt x (Nt-d)) precoders
/// together with the covariance factor Q they are built from.
struct BeamformerSet {
    std::vector<CMatrix> W_c;
    std::vector<CMatrix> W_r;
    std::vector<CMatrix> Q;
};

/// Receive filters U (d x M), weights G and MSE matrices E (d x d).
struct ReceiverState {
    std::vector<CMatrix> U;
    std::vector<CMatrix> G;
    std::vector<CMatrix> E;
};

/// Immutable per-realization data for the beamforming subproblem: channels,
/// covariance factors, and the total received covariance
///   Sigma = sum_i H_i Q_i Q_i^H H_i^H + sigma^2 I,
/// which is fixed because every device's transmit covariance is.
class BeamformingContext {
public:
    BeamformingContext(const ChannelSet& channels, std::span<const CovarianceTarget> targets, int streams,
                       double bandwidth_hz);

    int devices() const { return static_cast<int>(factors_.size()); }
    int streams() const { return streams_; }
    int tx_antennas() const { return static_cast<int>(factors_.front().rows()); }
    double bandwidth() const { return bandwidth_; }
    const ChannelSet& channels() const { return channels_; }
    const CMatrix& factor(int k) const { return factors_[static_cast<std::size_t>(k)]; }
    const CMatrix& target(int k) const { return targets_[static_cast<std::size_t>(k)]; }
    const CMatrix& total_covariance() const { return sigma_; }

    /// Sigma^{-1} B.
    CMatrix solve_total(const CMatrix& B) const { return sigma_llt_.solve(B); }

    /// W = Q: identity in the whitened coordinates.
    BeamformerSet initial_beamformers() const;

    /// Rate of device k from its MMSE error, B log2 det(E*^{-1}).
    double rate(int k, const CMatrix& W_c) const;

private:
    ChannelSet channels_;
    std::vector<CMatrix> targets_;
    std::vector<CMatrix> factors_;
    int streams_;
    double bandwidth_;
    CMatrix sigma_;
    Eigen::LLT<CMatrix> sigma_llt_;
};

/// U* = W_c^H H_k^H Sigma^{-1}.
CMatrix mmse_receiver(const BeamformingContext& ctx, int k, const CMatrix& W_c);

/// E = I - U H W_c - (U H W_c)^H + U Sigma U^H for an arbitrary receiver U.
CMatrix mse_matrix(const BeamformingContext& ctx, int k, const CMatrix& U, const CMatrix& W_c);

/// G* = E^{-1}; throws std::runtime_error when E is not positive definite.
CMatrix weight_update(const CMatrix& E);

struct ProcrustesSolution {
    CMatrix W_c;  // Nt x d, orthonormal columns
    CMatrix W_r;  // Nt x (Nt - d), orthogonal complement
};

/// Maximizes Re Tr(T^H X) over X with orthonormal columns: X = A_d B^H from
/// the SVD T = A S B^H; the radar block takes the remaining left singular
/// vectors. Singular vectors are sign-normalized (first significant entry
/// real positive) so the output is deterministic.
ProcrustesSolution solve_procrustes(const CMatrix& T, int d);

/// Closed-form precoder update of device k for fixed U and G; returns
/// (Q X_c, Q X_r).
ProcrustesSolution opp_update(const BeamformingContext& ctx, int k, const CMatrix& U, const CMatrix& G);

struct BeamformingOptions {
    double inner_tol = 1e-6;
    int inner_max_iter = 100;
    double outer_tol = 1e-6;
    int outer_max_iter = 50;
    bool record_trace = false;
};

struct BeamformingTrace {
    /// For each MM iteration, the weighted WMMSE objective at entry and after
    /// every U, G and W block update.
    std::vector<std::vector<double>> wmmse;
    /// sum_k o_k / R_k at start and after each MM iteration.
    std::vector<double> mm_objective;
    /// Largest ||W W^H - R||_F / ||R||_F after each precoder update.
    std::vector<double> covariance_error;
};

struct BeamformingResult {
    BeamformerSet beamformers;
    ReceiverState receivers;
    std::vector<double> rates;  // bits/s
    std::vector<double> mm_weights;
    double objective = 0.0;     // sum_k o_k / R_k, +inf when infeasible
    bool feasible = true;       // false when a weighted device has zero rate
    int outer_iterations = 0;
    int inner_iterations = 0;
    BeamformingTrace trace;
};

/// Minimizes sum_k o_k / R_k subject to W_k W_k^H = R_k: a majorization-
/// minimization loop whose surrogate sum_k z_k R_k is maximized by WMMSE
/// block-coordinate descent with closed-form Procrustes precoder updates.
/// Weights of zero drop a device from the objective; its precoder is still
/// updated. All-zero weights run a single sweep and report objective 0.
BeamformingResult solve_beamforming(const BeamformingContext& ctx, std::span<const double> weights,
                                    const BeamformingOptions& opts = {});

/// ||W_c W_c^H + W_r W_r^H - R||_F / ||R||_F.
double covariance_error(const CMatrix& W_c, const CMatrix& W_r, const CMatrix& R);

}  // namespace iscc
