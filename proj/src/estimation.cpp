#include "irsim/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irsim {

TrainingMatrix dft_training_matrix(int tau) {
    if (tau < 2) {
        throw std::invalid_argument("dft_training_matrix: tau must be >= 2");
    }
    TrainingMatrix theta;
    theta.mu.resize(static_cast<size_t>(tau));
    for (int i = 0; i < tau; ++i) {
        const double arg = -2.0 * kPi * i / tau;
        theta.mu[static_cast<size_t>(i)] = Complex{std::cos(arg), std::sin(arg)};
    }
    return theta;
}

BlockEstimate ls_estimate(std::span<const Complex> y, const TrainingMatrix& theta,
                          int block_index) {
    const int tau = theta.tau();
    if (static_cast<int>(y.size()) != tau) {
        throw std::invalid_argument("ls_estimate: pilot count does not match training matrix");
    }
    // Normal equations for the tau x 2 system with rows [1, mu_i].
    Complex mu_sum{0.0, 0.0};
    Complex b0{0.0, 0.0};
    Complex b1{0.0, 0.0};
    for (int i = 0; i < tau; ++i) {
        mu_sum += theta.mu[static_cast<size_t>(i)];
        b0 += y[static_cast<size_t>(i)];
        b1 += std::conj(theta.mu[static_cast<size_t>(i)]) * y[static_cast<size_t>(i)];
    }
    const double a = static_cast<double>(tau);
    const double det = a * a - std::norm(mu_sum);
    if (!(det > 1e-12 * a * a)) {
        throw std::runtime_error("ls_estimate: rank-deficient training matrix");
    }
    BlockEstimate est;
    est.h_d_hat = (a * b0 - mu_sum * b1) / det;
    est.h_r_bar_hat = (a * b1 - std::conj(mu_sum) * b0) / det;
    est.block_index = block_index;
    return est;
}

Complex average_estimate(std::span<const Complex> y) {
    if (y.empty()) {
        throw std::invalid_argument("average_estimate: no pilots given");
    }
    Complex acc{0.0, 0.0};
    for (const auto& v : y) {
        acc += v;
    }
    return acc / static_cast<double>(y.size());
}

namespace {

void check_training_rows(const CMatrix& v_bar) {
    for (int n = 0; n < v_bar.rows; ++n) {
        bool all_zero = true;
        for (int m = 0; m < v_bar.cols; ++m) {
            if (v_bar.at(n, m) != Complex{0.0, 0.0}) {
                all_zero = false;
                break;
            }
        }
        if (all_zero) {
            throw std::invalid_argument("ml estimation: zero training refraction row");
        }
    }
}

bool rows_identical(const CMatrix& v_bar) {
    for (int n = 1; n < v_bar.rows; ++n) {
        for (int m = 0; m < v_bar.cols; ++m) {
            if (std::abs(v_bar.at(n, m) - v_bar.at(0, m)) > 1e-12) {
                return false;
            }
        }
    }
    return v_bar.rows > 1;
}

// w_n(psi) = sum_m V[n,m] * exp(+j*m*pi*psi); the Doppler rotation factors
// multiply these per-block weights to form the model direction xi.
std::vector<Complex> block_weights(const CMatrix& v_bar, double psi) {
    std::vector<Complex> w(static_cast<size_t>(v_bar.rows));
    const Complex step{std::cos(kPi * psi), std::sin(kPi * psi)};
    for (int n = 0; n < v_bar.rows; ++n) {
        Complex acc{0.0, 0.0};
        Complex phase{1.0, 0.0};
        for (int m = 0; m < v_bar.cols; ++m) {
            acc += v_bar.at(n, m) * phase;
            phase *= step;
        }
        w[static_cast<size_t>(n)] = acc;
    }
    return w;
}

struct ScanPoint {
    double objective = -1.0;
    double fd = 0.0;
    double psi = 0.0;
    Complex projection;  // xi^H h at the best point
    double xi_norm_sq = 0.0;
};

// Single objective evaluation with the projection retained.
ScanPoint eval_point(std::span<const Complex> h, const CMatrix& v_bar, double tc_s, double fd,
                     double psi) {
    const auto w = block_weights(v_bar, psi);
    Complex proj{0.0, 0.0};
    double energy = 0.0;
    for (size_t n = 0; n < w.size(); ++n) {
        const double arg = -2.0 * kPi * fd * (static_cast<double>(n) + 1.0) * tc_s;
        proj += Complex{std::cos(arg), std::sin(arg)} * std::conj(w[n]) * h[n];
        energy += std::norm(w[n]);
    }
    ScanPoint p;
    p.objective = energy > 0.0 ? std::norm(proj) / energy : 0.0;
    p.fd = fd;
    p.psi = psi;
    p.projection = proj;
    p.xi_norm_sq = energy;
    return p;
}

int grid_count(double lo, double hi, double step) {
    if (hi < lo) {
        return 1;
    }
    return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

// One scan over [fd_lo, fd_hi] x [psi_lo, psi_hi]; strict improvement keeps
// the lowest (fd, then psi) index on ties.
ScanPoint scan_grid(std::span<const Complex> h, const CMatrix& v_bar, double tc_s, double fd_lo,
                    double fd_hi, double fd_step, double psi_lo, double psi_hi, double psi_step) {
    const int n1 = static_cast<int>(h.size());
    const int n_fd = grid_count(fd_lo, fd_hi, fd_step);
    const int n_psi = grid_count(psi_lo, psi_hi, psi_step);

    // a[p][n] = conj(w_n(psi_p)) * h_n and the per-psi energy sum |w_n|^2.
    std::vector<Complex> a(static_cast<size_t>(n_psi) * n1);
    std::vector<double> energy(static_cast<size_t>(n_psi));
    for (int p = 0; p < n_psi; ++p) {
        const double psi = psi_lo + p * psi_step;
        const auto w = block_weights(v_bar, psi);
        double e = 0.0;
        for (int n = 0; n < n1; ++n) {
            a[static_cast<size_t>(p) * n1 + n] = std::conj(w[static_cast<size_t>(n)]) *
                                                 h[static_cast<size_t>(n)];
            e += std::norm(w[static_cast<size_t>(n)]);
        }
        energy[static_cast<size_t>(p)] = e;
    }

    ScanPoint best;
    std::vector<Complex> rot(static_cast<size_t>(n1));
    for (int f = 0; f < n_fd; ++f) {
        const double fd = fd_lo + f * fd_step;
        for (int n = 0; n < n1; ++n) {
            const double arg = -2.0 * kPi * fd * (n + 1) * tc_s;
            rot[static_cast<size_t>(n)] = Complex{std::cos(arg), std::sin(arg)};
        }
        for (int p = 0; p < n_psi; ++p) {
            const Complex* ap = &a[static_cast<size_t>(p) * n1];
            Complex proj{0.0, 0.0};
            for (int n = 0; n < n1; ++n) {
                proj += rot[static_cast<size_t>(n)] * ap[n];
            }
            const double e = energy[static_cast<size_t>(p)];
            const double obj = e > 0.0 ? std::norm(proj) / e : 0.0;
            if (obj > best.objective) {
                best.objective = obj;
                best.fd = fd;
                best.psi = psi_lo + p * psi_step;
                best.projection = proj;
                best.xi_norm_sq = e;
            }
        }
    }
    return best;
}

}  // namespace

double ml_objective(double fd_hz, SteeringPhase psi, std::span<const Complex> h_r_bar_hats,
                    const CMatrix& v_bar, double tc_s) {
    if (static_cast<int>(h_r_bar_hats.size()) != v_bar.rows) {
        throw std::invalid_argument("ml_objective: estimate count does not match training rows");
    }
    check_training_rows(v_bar);
    const auto w = block_weights(v_bar, psi.value);
    Complex proj{0.0, 0.0};
    double energy = 0.0;
    for (size_t n = 0; n < w.size(); ++n) {
        const double arg = -2.0 * kPi * fd_hz * (static_cast<double>(n) + 1.0) * tc_s;
        proj += Complex{std::cos(arg), std::sin(arg)} * std::conj(w[n]) * h_r_bar_hats[n];
        energy += std::norm(w[n]);
    }
    return energy > 0.0 ? std::norm(proj) / energy : 0.0;
}

MlEstimate ml_estimate(std::span<const Complex> h_r_bar_hats, const CMatrix& v_bar, double tc_s,
                       const GridSpec& grid) {
    if (v_bar.rows < 2) {
        throw std::invalid_argument("ml_estimate: need at least two blocks of estimates");
    }
    if (static_cast<int>(h_r_bar_hats.size()) != v_bar.rows) {
        throw std::invalid_argument("ml_estimate: estimate count does not match training rows");
    }
    if (!(grid.fd_coarse_step_hz > 0.0) || !(grid.psi_coarse_step > 0.0)) {
        throw std::invalid_argument("ml_estimate: grid steps must be > 0");
    }
    if (!(grid.refinement_shrink > 0.0 && grid.refinement_shrink < 1.0)) {
        throw std::invalid_argument("ml_estimate: refinement shrink must be in (0, 1)");
    }
    check_training_rows(v_bar);

    double fd_step = grid.fd_coarse_step_hz;
    double psi_step = grid.psi_coarse_step;
    ScanPoint best = scan_grid(h_r_bar_hats, v_bar, tc_s, grid.fd_min_hz, grid.fd_max_hz, fd_step,
                               -1.0, 1.0, psi_step);
    for (int level = 0; level < grid.refinement_levels; ++level) {
        // The two parameters trade off along a tilted ridge of the objective,
        // so the window keeps a few parent cells of slack around the argmax.
        const double fd_lo = std::max(grid.fd_min_hz, best.fd - 3.0 * fd_step);
        const double fd_hi = std::min(grid.fd_max_hz, best.fd + 3.0 * fd_step);
        const double psi_lo = std::max(-1.0, best.psi - 3.0 * psi_step);
        const double psi_hi = std::min(1.0, best.psi + 3.0 * psi_step);
        fd_step *= grid.refinement_shrink;
        psi_step *= grid.refinement_shrink;
        const ScanPoint refined = scan_grid(h_r_bar_hats, v_bar, tc_s, fd_lo, fd_hi, fd_step,
                                            psi_lo, psi_hi, psi_step);
        if (refined.objective > best.objective) {
            best = refined;
        }
    }

    // Newton polish on the smooth objective, so the reported point is the
    // local peak itself rather than its nearest grid sample. The grid phase
    // can end several final steps away along the ridge, so the step budget
    // allows walking a few coarse cells in total.
    if (grid.refinement_levels > 0) {
        auto obj = [&](double fd, double psi) {
            return eval_point(h_r_bar_hats, v_bar, tc_s, fd, psi).objective;
        };
        for (int iter = 0; iter < 40; ++iter) {
            const double hf = fd_step;
            const double hp = psi_step;
            const double f0 = best.objective;
            const double fp = obj(best.fd + hf, best.psi);
            const double fm = obj(best.fd - hf, best.psi);
            const double pp = obj(best.fd, best.psi + hp);
            const double pm = obj(best.fd, best.psi - hp);
            const double fpp = obj(best.fd + hf, best.psi + hp);
            const double fmm = obj(best.fd - hf, best.psi - hp);
            const double gf = (fp - fm) / (2.0 * hf);
            const double gp = (pp - pm) / (2.0 * hp);
            const double hff = (fp - 2.0 * f0 + fm) / (hf * hf);
            const double hpp = (pp - 2.0 * f0 + pm) / (hp * hp);
            const double hfp =
                (fpp - fp - pp + 2.0 * f0 - fm - pm + fmm) / (2.0 * hf * hp);
            const double det = hff * hpp - hfp * hfp;
            if (!(hff < 0.0) || !(det > 0.0)) {
                break;  // not locally concave; keep the grid answer
            }
            double df = -(hpp * gf - hfp * gp) / det;
            double dp = -(hff * gp - hfp * gf) / det;
            // trust region: one coarse cell per iteration
            df = std::clamp(df, -grid.fd_coarse_step_hz, grid.fd_coarse_step_hz);
            dp = std::clamp(dp, -grid.psi_coarse_step, grid.psi_coarse_step);
            const double fd_new = std::clamp(best.fd + df, grid.fd_min_hz, grid.fd_max_hz);
            const double psi_new = std::clamp(best.psi + dp, -1.0, 1.0);
            const ScanPoint cand = eval_point(h_r_bar_hats, v_bar, tc_s, fd_new, psi_new);
            if (cand.objective <= best.objective) {
                break;
            }
            best = cand;
            if (std::abs(df) < 1e-3 * hf && std::abs(dp) < 1e-3 * hp) {
                break;  // converged well below the reported resolution
            }
        }
    }

    MlEstimate est;
    est.fd_hat_hz = best.fd;
    est.psi_x_hat = SteeringPhase{best.psi};
    est.beta_hat = best.xi_norm_sq > 0.0 ? best.projection / best.xi_norm_sq : Complex{0.0, 0.0};
    est.degenerate_training = rows_identical(v_bar);
    est.final_fd_step_hz = fd_step;
    est.final_psi_step = psi_step;
    return est;
}

std::vector<Complex> ccce_training_refraction(int m_r, int pilot_index) {
    if (m_r < 1) {
        throw std::invalid_argument("ccce_training_refraction: element count must be >= 1");
    }
    const int tau = m_r + 1;
    if (pilot_index < 0 || pilot_index >= tau) {
        throw std::invalid_argument("ccce_training_refraction: pilot index out of range");
    }
    std::vector<Complex> v(static_cast<size_t>(m_r));
    for (int k = 1; k <= m_r; ++k) {
        const double arg = -2.0 * kPi * pilot_index * k / tau;
        v[static_cast<size_t>(k - 1)] = Complex{std::cos(arg), std::sin(arg)};
    }
    return v;
}

CcceEstimate ccce_estimate(std::span<const Complex> y, int m_r) {
    const int tau = m_r + 1;
    if (static_cast<int>(y.size()) != tau) {
        throw std::invalid_argument("ccce_estimate: pilot count must equal m_r + 1");
    }
    // The training matrix is the tau-point DFT, so the LS solve is F^H y / tau.
    CcceEstimate est;
    est.c_hat.resize(static_cast<size_t>(m_r));
    for (int k = 0; k < tau; ++k) {
        Complex acc{0.0, 0.0};
        for (int i = 0; i < tau; ++i) {
            const double arg = 2.0 * kPi * i * k / tau;
            acc += Complex{std::cos(arg), std::sin(arg)} * y[static_cast<size_t>(i)];
        }
        acc /= static_cast<double>(tau);
        if (k == 0) {
            est.h_d_hat = acc;
        } else {
            est.c_hat[static_cast<size_t>(k - 1)] = acc;
        }
    }
    return est;
}

}  // namespace irsim
