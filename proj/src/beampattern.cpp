#include "iscc/beampattern.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace iscc {

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

std::vector<double> angle_grid(double step_deg) {
    const int n = static_cast<int>(std::lround(180.0 / step_deg));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) grid.push_back(deg2rad(-90.0 + 180.0 * i / n));
    return grid;
}

std::vector<double> desired_pattern(std::span<const double> targets_rad, double width_rad,
                                    std::span<const double> grid_rad) {
    // strict inequality; the slack keeps grid points that sit exactly on the
    // mainlobe edge outside regardless of degree/radian rounding
    const double half = width_rad / 2.0 - 1e-12;
    std::vector<double> phi(grid_rad.size(), 0.0);
    for (std::size_t q = 0; q < grid_rad.size(); ++q)
        for (double t : targets_rad)
            if (std::abs(grid_rad[q] - t) < half) phi[q] = 1.0;
    return phi;
}

CMatrix project_psd(const CMatrix& A) {
    const CMatrix H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(H);
    const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().adjoint();
}

namespace {

void set_diagonal(CMatrix& A, double value) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) A(i, i) = value;
}

// Dykstra's projection onto {PSD} ∩ {diag = value}.
CMatrix project_feasible(const CMatrix& Y, double value) {
    CMatrix x = Y;
    CMatrix p = CMatrix::Zero(Y.rows(), Y.cols());
    CMatrix q = CMatrix::Zero(Y.rows(), Y.cols());
    const double scale = std::max(value * Y.rows(), 1e-300);
    for (int it = 0; it < 500; ++it) {
        const CMatrix y = project_psd(x + p);
        p = x + p - y;
        CMatrix x_next = y + q;
        set_diagonal(x_next, value);
        q = y + q - x_next;
        const double change = (x_next - x).norm();
        x = std::move(x_next);
        if (change <= 1e-13 * scale) break;
    }
    return x;
}

// Exact feasibility: clip eigenvalues, then rescale by a diagonal congruence
// so the diagonal is exactly `value` (congruence preserves PSD).
CMatrix polish(const CMatrix& A, double value) {
    CMatrix R = project_psd(A);
    const auto n = R.rows();
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = R(i, i).real();
        s(i) = d > 0 ? std::sqrt(value / d) : 0.0;
    }
    if ((s.array() == 0.0).any()) return value * CMatrix::Identity(n, n);
    R = s.asDiagonal() * R * s.asDiagonal();
    R = 0.5 * (R + R.adjoint()).eval();
    set_diagonal(R, value);
    return R;
}

struct LsProblem {
    CMatrix A;               // Nt x Q steering matrix
    Eigen::VectorXd phi;     // desired pattern
    double phi_sq = 0.0;

    Eigen::VectorXd gains(const CMatrix& R) const {
        const CMatrix RA = R * A;
        return (A.conjugate().cwiseProduct(RA)).colwise().sum().real().transpose();
    }
    double best_scale(const Eigen::VectorXd& p) const {
        return phi_sq > 0 ? std::max(0.0, phi.dot(p) / phi_sq) : 0.0;
    }
    double objective(double gamma, const Eigen::VectorXd& p) const { return (gamma * phi - p).squaredNorm(); }
    CMatrix gradient(double gamma, const Eigen::VectorXd& p) const {
        const Eigen::VectorXd r = gamma * phi - p;
        return -2.0 * A * r.asDiagonal() * A.adjoint();
    }
};

}  // namespace

SynthResult synth_covariance(std::span<const double> targets_rad, double width_rad, double tx_power_w, int nt,
                             std::span<const double> grid_rad, const SynthOptions& opts) {
    if (grid_rad.empty()) throw std::invalid_argument("synth_covariance: empty grid");
    if (!(tx_power_w > 0) || nt < 1) throw std::invalid_argument("synth_covariance: need P_t > 0 and Nt >= 1");

    const std::size_t Q = grid_rad.size();
    LsProblem ls;
    ls.A.resize(nt, static_cast<Eigen::Index>(Q));
    for (std::size_t q = 0; q < Q; ++q)
        ls.A.col(static_cast<Eigen::Index>(q)) = steering_vector(grid_rad[q], nt, opts.antenna_spacing);
    const auto phi = desired_pattern(targets_rad, width_rad, grid_rad);
    ls.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(Q));
    ls.phi_sq = ls.phi.squaredNorm();

    const double diag_value = tx_power_w / nt;
    const double lipschitz = 2.0 * static_cast<double>(Q) * nt * nt;  // 2 sum ||a a^H||_F^2
    const double base_step = 1.0 / lipschitz;

    SynthResult out;
    CMatrix R = diag_value * CMatrix::Identity(nt, nt);
    Eigen::VectorXd p = ls.gains(R);
    double gamma = ls.best_scale(p);
    double f = ls.objective(gamma, p);
    if (opts.record_history) out.history.push_back(f);

    double step = base_step;
    for (int it = 1; it <= opts.max_iter; ++it) {
        gamma = ls.best_scale(p);
        const double f_scaled = ls.objective(gamma, p);
        const CMatrix grad = ls.gradient(gamma, p);

        CMatrix R_next = R;
        Eigen::VectorXd p_next = p;
        double f_next = f_scaled;
        while (step > base_step * 1e-12) {
            CMatrix candidate = project_feasible(R - step * grad, diag_value);
            Eigen::VectorXd pc = ls.gains(candidate);
            const double fc = ls.objective(gamma, pc);
            if (fc <= f_scaled) {
                R_next = std::move(candidate);
                p_next = std::move(pc);
                f_next = fc;
                break;
            }
            step *= 0.5;
        }

        const double decrease = f - f_next;
        R = std::move(R_next);
        p = std::move(p_next);
        f = f_next;
        out.iterations = it;
        if (opts.record_history) out.history.push_back(f);
        if (decrease <= opts.tol * std::max(f + decrease, std::numeric_limits<double>::min())) {
            out.converged = true;
            break;
        }
    }

    R = polish(R, diag_value);
    p = ls.gains(R);
    out.scale = ls.best_scale(p);
    out.objective = ls.objective(out.scale, p);
    out.target = {std::move(R), diag_value};
    return out;
}

std::vector<BeampatternSample> beampattern(const CMatrix& R, std::span<const double> grid_rad,
                                           double antenna_spacing) {
    std::vector<BeampatternSample> out;
    out.reserve(grid_rad.size());
    for (double theta : grid_rad) {
        const CVector a = steering_vector(theta, static_cast<int>(R.rows()), antenna_spacing);
        const double g = (a.adjoint() * R * a)(0, 0).real();
        out.push_back({theta, std::max(0.0, g)});
    }
    return out;
}

CMatrix covariance_factor(const CMatrix& R) {
    const auto n = R.rows();
    const CMatrix H = 0.5 * (R + R.adjoint());
    const double eps = 1e-10 * H.trace().real() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(H, Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues().minCoeff();
    CMatrix shifted = H;
    if (lambda_min < eps) shifted += (eps + std::max(0.0, -lambda_min)) * CMatrix::Identity(n, n);
    Eigen::LLT<CMatrix> llt(shifted);
    if (llt.info() != Eigen::Success) throw std::runtime_error("covariance_factor: Cholesky failed");
    return llt.matrixL();
}

std::string CovarianceCache::key(std::span<const double> targets_rad, double width_rad, double tx_power_w, int nt,
                                 std::span<const double> grid_rad, const SynthOptions& opts) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the grid bit patterns
    for (double g : grid_rad) {
        h ^= std::bit_cast<std::uint64_t>(g);
        h *= 1099511628211ull;
    }
    std::ostringstream k;
    k.precision(17);
    k << "t=";
    for (double t : targets_rad) k << t << ',';
    k << ";w=" << width_rad << ";p=" << tx_power_w << ";nt=" << nt << ";grid=" << std::hex << h << std::dec
      << ";n=" << grid_rad.size() << ";delta=" << opts.antenna_spacing << ";tol=" << opts.tol
      << ";iter=" << opts.max_iter;
    return k.str();
}

CovarianceTarget CovarianceCache::get(std::span<const double> targets_rad, double width_rad, double tx_power_w, int nt,
                                      std::span<const double> grid_rad, const SynthOptions& opts) {
    const auto k = key(targets_rad, width_rad, tx_power_w, nt, grid_rad, opts);
    {
        std::lock_guard lock(mutex_);
        if (auto it = entries_.find(k); it != entries_.end()) return it->second;
    }
    auto result = synth_covariance(targets_rad, width_rad, tx_power_w, nt, grid_rad, opts);
    std::lock_guard lock(mutex_);
    return entries_.emplace(k, std::move(result.target)).first->second;
}

std::size_t CovarianceCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void CovarianceCache::save(const std::filesystem::path& path) const {
    nlohmann::json doc = nlohmann::json::object();
    {
        std::lock_guard lock(mutex_);
        for (const auto& [k, t] : entries_) {
            nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
            for (Eigen::Index r = 0; r < t.R.rows(); ++r)
                for (Eigen::Index c = 0; c < t.R.cols(); ++c) {
                    re.push_back(t.R(r, c).real());
                    im.push_back(t.R(r, c).imag());
                }
            doc[k] = {{"n", t.R.rows()}, {"per_antenna_power", t.per_antenna_power}, {"re", re}, {"im", im}};
        }
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write covariance cache " + path.string());
    out << doc.dump(1) << '\n';
}

void CovarianceCache::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return;
    nlohmann::json doc;
    in >> doc;
    std::lock_guard lock(mutex_);
    for (const auto& [k, v] : doc.items()) {
        const auto n = v.at("n").get<Eigen::Index>();
        const auto& re = v.at("re");
        const auto& im = v.at("im");
        CovarianceTarget t;
        t.R.resize(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) {
                const auto idx = static_cast<std::size_t>(r * n + c);
                t.R(r, c) = Complex(re.at(idx).get<double>(), im.at(idx).get<double>());
            }
        t.per_antenna_power = v.at("per_antenna_power").get<double>();
        entries_[k] = std::move(t);
    }
}

}  // namespace iscc
