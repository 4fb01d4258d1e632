#include "iscc/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace iscc {

BeamformingContext::BeamformingContext(const ChannelSet& channels, std::span<const CovarianceTarget> targets,
                                       int streams, double bandwidth_hz)
    : channels_(channels), streams_(streams), bandwidth_(bandwidth_hz) {
    if (targets.size() != channels.H.size()) throw std::invalid_argument("one covariance target per device required");
    if (channels.H.empty()) throw std::invalid_argument("no devices");
    const auto M = channels.H.front().rows();
    sigma_ = channels.noise_var * CMatrix::Identity(M, M);
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const CMatrix& R = targets[k].R;
        if (R.rows() != channels.H[k].cols()) throw std::invalid_argument("covariance size does not match Nt");
        if (streams < 1 || streams > R.rows()) throw std::invalid_argument("streams must satisfy 1 <= d <= Nt");
        targets_.push_back(R);
        factors_.push_back(covariance_factor(R));
        const CMatrix HQ = channels.H[k] * factors_.back();
        sigma_.noalias() += HQ * HQ.adjoint();
    }
    sigma_ = 0.5 * (sigma_ + sigma_.adjoint()).eval();
    sigma_llt_.compute(sigma_);
    if (sigma_llt_.info() != Eigen::Success) throw std::runtime_error("received covariance not positive definite");
}

BeamformerSet BeamformingContext::initial_beamformers() const {
    BeamformerSet set;
    const int d = streams_;
    for (const auto& Q : factors_) {
        set.W_c.push_back(Q.leftCols(d));
        set.W_r.push_back(Q.rightCols(Q.cols() - d));
        set.Q.push_back(Q);
    }
    return set;
}

double BeamformingContext::rate(int k, const CMatrix& W_c) const {
    const CMatrix HW = channels_.H[static_cast<std::size_t>(k)] * W_c;
    CMatrix E = CMatrix::Identity(W_c.cols(), W_c.cols()) - HW.adjoint() * sigma_llt_.solve(HW);
    E = 0.5 * (E + E.adjoint()).eval();
    const double nats = -log_det_hpd(E);
    return std::max(0.0, bandwidth_ * nats / std::numbers::ln2);
}

CMatrix mmse_receiver(const BeamformingContext& ctx, int k, const CMatrix& W_c) {
    const CMatrix HW = ctx.channels().H[static_cast<std::size_t>(k)] * W_c;
    // (Sigma^{-1} H W)^H = W^H H^H Sigma^{-1} since Sigma is Hermitian
    return ctx.solve_total(HW).adjoint();
}

CMatrix mse_matrix(const BeamformingContext& ctx, int k, const CMatrix& U, const CMatrix& W_c) {
    const CMatrix UHW = U * ctx.channels().H[static_cast<std::size_t>(k)] * W_c;
    CMatrix E = CMatrix::Identity(U.rows(), U.rows()) - UHW - UHW.adjoint() + U * ctx.total_covariance() * U.adjoint();
    return 0.5 * (E + E.adjoint());
}

CMatrix weight_update(const CMatrix& E) {
    Eigen::LLT<CMatrix> llt(E);
    if (llt.info() != Eigen::Success) throw std::runtime_error("weight_update: MSE matrix not positive definite");
    CMatrix G = llt.solve(CMatrix::Identity(E.rows(), E.cols()));
    return 0.5 * (G + G.adjoint());
}

namespace {

// Rotate a singular pair so the first significant entry of the left vector is
// real and positive.
void normalize_phase(CMatrix& A, CMatrix& B, Eigen::Index col) {
    const auto a = A.col(col);
    const double tol = 1e-12 * std::max(1.0, a.norm());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double mag = std::abs(a(i));
        if (mag > tol) {
            const Complex unit = std::conj(a(i)) / mag;
            A.col(col) *= unit;
            if (col < B.cols()) B.col(col) *= unit;
            return;
        }
    }
}

}  // namespace

ProcrustesSolution solve_procrustes(const CMatrix& T, int d) {
    const auto nt = T.rows();
    if (T.cols() != d || d < 1 || d > nt) throw std::invalid_argument("solve_procrustes: T must be Nt x d");
    Eigen::JacobiSVD<CMatrix> svd(T, Eigen::ComputeFullU | Eigen::ComputeFullV);
    CMatrix A = svd.matrixU();
    CMatrix B = svd.matrixV();
    for (Eigen::Index i = 0; i < nt; ++i) normalize_phase(A, B, i);
    return {A.leftCols(d) * B.adjoint(), A.rightCols(nt - d)};
}

ProcrustesSolution opp_update(const BeamformingContext& ctx, int k, const CMatrix& U, const CMatrix& G) {
    const CMatrix& Q = ctx.factor(k);
    // T = Q^H H^H U^H G^H
    const CMatrix T = (G * U * ctx.channels().H[static_cast<std::size_t>(k)] * Q).adjoint();
    auto x = solve_procrustes(T, ctx.streams());
    return {Q * x.W_c, Q * x.W_r};
}

double covariance_error(const CMatrix& W_c, const CMatrix& W_r, const CMatrix& R) {
    CMatrix C = W_c * W_c.adjoint();
    if (W_r.cols() > 0) C.noalias() += W_r * W_r.adjoint();
    return (C - R).norm() / R.norm();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tr(G E) - log det G
double wmmse_term(const CMatrix& G, const CMatrix& E) { return (G * E).trace().real() - log_det_hpd(G); }

struct InnerState {
    std::vector<CMatrix> U, G;
};

double weighted_wmmse(const BeamformingContext& ctx, std::span<const double> z, const InnerState& st,
                      const BeamformerSet& W, std::vector<double>* terms = nullptr) {
    double total = 0.0;
    for (int k = 0; k < ctx.devices(); ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const double t = wmmse_term(st.G[ku], mse_matrix(ctx, k, st.U[ku], W.W_c[ku]));
        if (terms) (*terms)[ku] = t;
        total += z[ku] * t;
    }
    return total;
}

double ratio_objective(std::span<const double> o, std::span<const double> rates) {
    double obj = 0.0;
    for (std::size_t k = 0; k < o.size(); ++k) {
        if (o[k] <= 0) continue;
        if (rates[k] <= 0) return kInf;
        obj += o[k] / rates[k];
    }
    return obj;
}

// Surrogate weights z_k = (o_k / R_k^2) / (sum_i o_i / R_i)^2.
std::vector<double> mm_weights(std::span<const double> o, std::span<const double> rates) {
    std::vector<double> z(o.size(), 0.0);
    const double denom = ratio_objective(o, rates);
    for (std::size_t k = 0; k < o.size(); ++k) {
        if (o[k] <= 0) continue;
        if (!std::isfinite(denom) || rates[k] <= 0)
            z[k] = o[k];  // any positive weight: the WMMSE sweep does not depend on it
        else
            z[k] = o[k] / (rates[k] * rates[k]) / (denom * denom);
    }
    return z;
}

// One U -> G -> W sweep over all devices.
void sweep(const BeamformingContext& ctx, InnerState& st, BeamformerSet& W, std::span<const double> z,
           std::vector<double>* trace, std::vector<double>* cov_trace) {
    const int K = ctx.devices();
    for (int k = 0; k < K; ++k) st.U[static_cast<std::size_t>(k)] = mmse_receiver(ctx, k, W.W_c[static_cast<std::size_t>(k)]);
    if (trace) trace->push_back(weighted_wmmse(ctx, z, st, W));
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        st.G[ku] = weight_update(mse_matrix(ctx, k, st.U[ku], W.W_c[ku]));
    }
    if (trace) trace->push_back(weighted_wmmse(ctx, z, st, W));
    double worst = 0.0;
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        auto upd = opp_update(ctx, k, st.U[ku], st.G[ku]);
        W.W_c[ku] = std::move(upd.W_c);
        W.W_r[ku] = std::move(upd.W_r);
        if (cov_trace) worst = std::max(worst, covariance_error(W.W_c[ku], W.W_r[ku], ctx.target(k)));
    }
    if (trace) trace->push_back(weighted_wmmse(ctx, z, st, W));
    if (cov_trace) cov_trace->push_back(worst);
}

}  // namespace

BeamformingResult solve_beamforming(const BeamformingContext& ctx, std::span<const double> weights,
                                    const BeamformingOptions& opts) {
    const int K = ctx.devices();
    const int d = ctx.streams();
    const auto M = ctx.channels().H.front().rows();
    if (weights.size() != static_cast<std::size_t>(K)) throw std::invalid_argument("one weight per device required");

    BeamformingResult res;
    res.beamformers = ctx.initial_beamformers();
    auto& W = res.beamformers;

    InnerState st;
    st.U.assign(static_cast<std::size_t>(K), CMatrix::Zero(d, M));
    st.G.assign(static_cast<std::size_t>(K), CMatrix::Identity(d, d));

    auto compute_rates = [&] {
        std::vector<double> r(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) r[static_cast<std::size_t>(k)] = ctx.rate(k, W.W_c[static_cast<std::size_t>(k)]);
        return r;
    };

    const bool any_weight = std::any_of(weights.begin(), weights.end(), [](double o) { return o > 0; });
    if (!any_weight) {
        const std::vector<double> z(static_cast<std::size_t>(K), 0.0);
        sweep(ctx, st, W, z, nullptr, nullptr);
        res.rates = compute_rates();
        res.mm_weights = z;
        res.objective = 0.0;
        res.inner_iterations = 1;
    } else {
        res.rates = compute_rates();
        double objective = ratio_objective(weights, res.rates);
        if (opts.record_trace) res.trace.mm_objective.push_back(objective);

        std::vector<double> prev_terms(static_cast<std::size_t>(K)), terms(static_cast<std::size_t>(K));
        for (int outer = 1; outer <= opts.outer_max_iter; ++outer) {
            const auto z = mm_weights(weights, res.rates);
            std::vector<double>* trace = nullptr;
            if (opts.record_trace) {
                res.trace.wmmse.emplace_back();
                trace = &res.trace.wmmse.back();
            }
            double entry = weighted_wmmse(ctx, z, st, W, &prev_terms);
            if (trace) trace->push_back(entry);

            // The stopping test is per device and unweighted: device terms are
            // decoupled under fixed covariances, so the iterates do not depend
            // on the positive weights z.
            for (int inner = 1; inner <= opts.inner_max_iter; ++inner) {
                sweep(ctx, st, W, z, trace, opts.record_trace ? &res.trace.covariance_error : nullptr);
                ++res.inner_iterations;
                weighted_wmmse(ctx, z, st, W, &terms);
                bool settled = true;
                for (std::size_t k = 0; k < terms.size(); ++k)
                    if (std::abs(terms[k] - prev_terms[k]) > opts.inner_tol * (1.0 + std::abs(prev_terms[k])))
                        settled = false;
                prev_terms = terms;
                if (settled) break;
            }

            res.rates = compute_rates();
            const double next = ratio_objective(weights, res.rates);
            if (opts.record_trace) res.trace.mm_objective.push_back(next);
            res.outer_iterations = outer;
            res.mm_weights = z;
            const bool done = (!std::isfinite(next) && !std::isfinite(objective)) ||
                              std::abs(objective - next) <= opts.outer_tol * std::abs(objective);
            objective = next;
            if (done) break;
        }
        res.objective = objective;
    }

    const double zero_rate = 1e-12 * ctx.bandwidth();
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (weights[ku] > 0 && res.rates[ku] <= zero_rate) res.feasible = false;
    }
    if (!res.feasible) res.objective = kInf;

    res.receivers.U = st.U;
    res.receivers.G = st.G;
    for (int k = 0; k < K; ++k)
        res.receivers.E.push_back(
            mse_matrix(ctx, k, st.U[static_cast<std::size_t>(k)], W.W_c[static_cast<std::size_t>(k)]));
    return res;
}

}  // namespace iscc
