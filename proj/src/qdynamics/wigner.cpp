#include "qlab/qdynamics/phase_space.hpp"

#include <cmath>

namespace qlab::qdynamics {

namespace {

// F(m, k) = exp(-2 pi i m k / n)
CMatrix dft_matrix(int n) {
    CMatrix f(n, n);
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            f(m, k) = std::polar(1.0, -2.0 * kPi * static_cast<double>((static_cast<long>(m) * k) % n) / n);
        }
    }
    return f;
}

int wrap(int k, int n) { return ((k % n) + n) % n; }

void check_kernel(const CMatrix& kernel, const PhaseGrid& grid) {
    if (kernel.rows() != grid.nq() || kernel.cols() != grid.nq()) {
        throw GridError("wigner_from_density: kernel size does not match the Q grid");
    }
    if (grid.np() < grid.nq()) {
        throw GridError("wigner_from_density: np < nq aliases kernel separations");
    }
    const double scale = std::max(kernel.cwiseAbs().maxCoeff(), 1e-300);
    if ((kernel - kernel.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("wigner_from_density: kernel is not Hermitian");
    }
}

}  // namespace

WignerField wigner_from_density(const CMatrix& kernel, std::shared_ptr<const PhaseGrid> grid) {
    if (!grid) throw std::invalid_argument("wigner_from_density: null grid");
    check_kernel(kernel, *grid);
    const int nq = grid->nq();
    const int np = grid->np();
    const double pref = grid->dq() / (kPi * grid->hbar());

    // Column j carries a_k = (-1)^k rho(j+k, j-k) at bin k mod np. The (-1)^k
    // accounts for the momentum origin sitting at bin np/2.
    CMatrix even = CMatrix::Zero(np, nq);
    for (int j = 0; j < nq; ++j) {
        const int kmax = std::min(j, nq - 1 - j);
        for (int k = -kmax; k <= kmax; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            even(wrap(k, np), j) = sign * kernel(j + k, j - k);
        }
    }
    // Centers Q_j + dq/2 pair (j+1+k, j-k); separation 2k+1 picks up the
    // half-bin phase exp(-i pi m / np) and the constant i (-1)^k.
    CMatrix odd = CMatrix::Zero(np, nq - 1);
    for (int j = 0; j + 1 < nq; ++j) {
        const int klo = std::max(-j - 1, j - nq + 1);
        const int khi = std::min(nq - 2 - j, j);
        for (int k = klo; k <= khi; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            odd(wrap(k, np), j) = cplx(0.0, sign) * kernel(j + 1 + k, j - k);
        }
    }
    const CMatrix f = dft_matrix(np);
    const CMatrix w_even = f * even;
    CMatrix w_odd = f * odd;
    for (int m = 0; m < np; ++m) w_odd.row(m) *= std::polar(1.0, -kPi * m / np);

    WignerField field;
    field.grid = std::move(grid);
    field.values = pref * w_even.real().transpose();
    field.half = pref * w_odd.real().transpose();
    field.imag_residue =
        pref * std::max(w_even.imag().cwiseAbs().maxCoeff(), w_odd.imag().cwiseAbs().maxCoeff());
    return field;
}

CMatrix density_from_wigner(const WignerField& field) {
    if (!field.grid) throw std::invalid_argument("density_from_wigner: field has no grid");
    const PhaseGrid& grid = *field.grid;
    const int nq = grid.nq();
    const int np = grid.np();
    if (field.values.rows() != nq || field.values.cols() != np) {
        throw GridError("density_from_wigner: field shape does not match its grid");
    }
    if (field.half.rows() != nq - 1 || field.half.cols() != np) {
        throw std::invalid_argument("density_from_wigner: the odd-separation companion array is required");
    }
    const double pref = kPi * grid.hbar() / (grid.dq() * np);
    const CMatrix finv = dft_matrix(np).adjoint();

    const CMatrix a = finv * field.values.transpose().cast<cplx>();
    CMatrix shifted = field.half.transpose().cast<cplx>();
    for (int m = 0; m < np; ++m) shifted.row(m) *= std::polar(1.0, kPi * m / np);
    const CMatrix b = finv * shifted;

    CMatrix kernel = CMatrix::Zero(nq, nq);
    for (int j = 0; j < nq; ++j) {
        const int kmax = std::min(j, nq - 1 - j);
        for (int k = -kmax; k <= kmax; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            kernel(j + k, j - k) = sign * pref * a(wrap(k, np), j);
        }
    }
    for (int j = 0; j + 1 < nq; ++j) {
        const int klo = std::max(-j - 1, j - nq + 1);
        const int khi = std::min(nq - 2 - j, j);
        for (int k = klo; k <= khi; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            kernel(j + 1 + k, j - k) = pref * b(wrap(k, np), j) / cplx(0.0, sign);
        }
    }
    return kernel;
}

RVector momentum_density(const CMatrix& kernel, const PhaseGrid& grid) {
    const int nq = grid.nq();
    if (kernel.rows() != nq || kernel.cols() != nq) {
        throw GridError("momentum_density: kernel size does not match the Q grid");
    }
    RVector out(grid.np());
    const double pref = grid.dq() * grid.dq() / (2.0 * kPi * grid.hbar());
    for (int m = 0; m < grid.np(); ++m) {
        CVector phase(nq);
        for (int a = 0; a < nq; ++a) phase(a) = std::polar(1.0, -grid.p(m) * grid.q(a) / grid.hbar());
        out(m) = pref * (phase.transpose() * kernel * phase.conjugate()).value().real();
    }
    return out;
}

double WignerField::total_mass() const { return values.sum() * grid->dq() * grid->dp(); }

RVector WignerField::q_marginal() const { return values.rowwise().sum() * grid->dp(); }

RVector WignerField::p_marginal() const {
    if (half.size() == 0) return values.colwise().sum().transpose() * grid->dq();
    return 0.5 * grid->dq() * (values.colwise().sum() + half.colwise().sum()).transpose();
}

WignerField gaussian_wigner(std::shared_ptr<const PhaseGrid> grid, double q_mean, double p_mean, double sigma_q,
                            double sigma_p, double correlation) {
    if (!grid) throw std::invalid_argument("gaussian_wigner: null grid");
    if (!(sigma_q > 0.0) || !(sigma_p > 0.0) || std::abs(correlation) >= 1.0) {
        throw std::invalid_argument("gaussian_wigner: widths must be positive and |correlation| < 1");
    }
    const double r2 = 1.0 - correlation * correlation;
    const double norm = 1.0 / (2.0 * kPi * sigma_q * sigma_p * std::sqrt(r2));
    WignerField field;
    field.values.resize(grid->nq(), grid->np());
    for (int j = 0; j < grid->nq(); ++j) {
        const double x = (grid->q(j) - q_mean) / sigma_q;
        for (int m = 0; m < grid->np(); ++m) {
            const double y = (grid->p(m) - p_mean) / sigma_p;
            field.values(j, m) = norm * std::exp(-(x * x - 2.0 * correlation * x * y + y * y) / (2.0 * r2));
        }
    }
    field.grid = std::move(grid);
    return field;
}

}  // namespace qlab::qdynamics
