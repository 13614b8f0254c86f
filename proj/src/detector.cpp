// detector.cpp - grid wavefunctions, unitary Fourier pair, moments

#include "vnmeas/detector.hpp"

#include "vnmeas/errors.hpp"
#include "vnmeas/fft.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace vnmeas {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double PositionGrid::momentum_step(double hbar) const {
    return kTwoPi * hbar / (n_points * dx);
}

double PositionGrid::momentum(int k, double hbar) const {
    return (k - n_points / 2) * momentum_step(hbar);
}

int PositionGrid::index_of(double x) const {
    const double raw = (x - min()) / dx;
    const int j = static_cast<int>(std::lround(raw));
    if (j < 0 || j >= n_points || std::abs(raw - j) > 1e-6)
        throw std::invalid_argument("PositionGrid::index_of: point is off-grid");
    return j;
}

int PositionGrid::momentum_index_of(double p, double hbar) const {
    const double raw = (p - momentum_min(hbar)) / momentum_step(hbar);
    const int k = static_cast<int>(std::lround(raw));
    if (k < 0 || k >= n_points || std::abs(raw - k) > 1e-6)
        throw std::invalid_argument("PositionGrid::momentum_index_of: point is off-grid");
    return k;
}

void PositionGrid::validate() const {
    if (n_points < 16 || n_points % 2 != 0)
        throw std::invalid_argument("PositionGrid: n_points must be even and >= 16");
    if (!(dx > 0.0)) throw std::invalid_argument("PositionGrid: dx must be > 0");
    if (!std::isfinite(center)) throw std::invalid_argument("PositionGrid: center not finite");
}

PositionGrid default_grid(double sigma, double max_shift, int n_points) {
    if (!(sigma > 0.0)) throw std::invalid_argument("default_grid: sigma must be > 0");
    if (max_shift < 0.0) throw std::invalid_argument("default_grid: max_shift must be >= 0");
    PositionGrid grid;
    grid.n_points = n_points;
    grid.dx = (24.0 * sigma + 2.5 * max_shift) / n_points;
    grid.center = 0.0;
    grid.validate();
    return grid;
}

double DetectorWavefunction::norm_squared() const {
    return amplitudes.squaredNorm() * grid.dx;
}

double MomentumAmplitudes::norm_squared() const {
    return amplitudes.squaredNorm() * dp();
}

DetectorWavefunction gaussian_state(const PositionGrid& grid, double sigma, double x0,
                                    double p0, double hbar) {
    grid.validate();
    if (!(hbar > 0.0)) throw std::invalid_argument("gaussian_state: hbar must be > 0");
    if (!(sigma >= 3.0 * grid.dx))
        throw std::invalid_argument("gaussian_state: sigma under-resolved (< 3 dx)");
    if (!(grid.extent() >= 10.0 * sigma))
        throw std::invalid_argument("gaussian_state: grid extent below 10 sigma");

    DetectorWavefunction psi;
    psi.grid = grid;
    psi.hbar = hbar;
    psi.amplitudes.resize(grid.n_points);
    const double norm = std::pow(kTwoPi * sigma * sigma, -0.25);
    for (int j = 0; j < grid.n_points; ++j) {
        const double u = grid.point(j) - x0;
        psi.amplitudes(j) =
            norm * std::exp(Complex(-u * u / (4.0 * sigma * sigma), p0 * u / hbar));
    }
    psi.amplitudes /= std::sqrt(psi.norm_squared());
    return psi;
}

// ψ̃_k = (dx/√(2πħ)) e^{-ik·dp·x_min/ħ} FFT_k[ψ_j e^{-ip_min x_j/ħ}]
Vector position_to_momentum(const PositionGrid& grid, const Vector& amps, double hbar) {
    const int n = grid.n_points;
    const double dp = grid.momentum_step(hbar);
    const double p_min = grid.momentum(0, hbar);
    Vector u(n);
    for (int j = 0; j < n; ++j)
        u(j) = amps(j) * std::polar(1.0, -p_min * grid.point(j) / hbar);
    Vector f = fft::forward(u);
    const double scale = grid.dx / std::sqrt(kTwoPi * hbar);
    for (int k = 0; k < n; ++k)
        f(k) *= scale * std::polar(1.0, -k * dp * grid.min() / hbar);
    return f;
}

// ψ_j = (dp/√(2πħ)) e^{+ip_min x_j/ħ} IFFT_j[ψ̃_k e^{+ik·dp·x_min/ħ}]
Vector momentum_to_position(const PositionGrid& grid, const Vector& amps, double hbar) {
    const int n = grid.n_points;
    const double dp = grid.momentum_step(hbar);
    const double p_min = grid.momentum(0, hbar);
    Vector w(n);
    for (int k = 0; k < n; ++k)
        w(k) = amps(k) * std::polar(1.0, k * dp * grid.min() / hbar);
    Vector f = fft::backward(w);
    const double scale = dp / std::sqrt(kTwoPi * hbar);
    for (int j = 0; j < n; ++j)
        f(j) *= scale * std::polar(1.0, p_min * grid.point(j) / hbar);
    return f;
}

MomentumAmplitudes momentum_representation(const DetectorWavefunction& psi) {
    MomentumAmplitudes mom;
    mom.grid = psi.grid;
    mom.hbar = psi.hbar;
    mom.amplitudes = position_to_momentum(psi.grid, psi.amplitudes, psi.hbar);
    return mom;
}

DetectorWavefunction position_representation(const MomentumAmplitudes& mom) {
    DetectorWavefunction psi;
    psi.grid = mom.grid;
    psi.hbar = mom.hbar;
    psi.amplitudes = momentum_to_position(mom.grid, mom.amplitudes, mom.hbar);
    return psi;
}

Vector translated(const PositionGrid& grid, const Vector& amps, double hbar,
                  double shift) {
    Vector mom = position_to_momentum(grid, amps, hbar);
    for (int k = 0; k < grid.n_points; ++k)
        mom(k) *= std::polar(1.0, -grid.momentum(k, hbar) * shift / hbar);
    return momentum_to_position(grid, mom, hbar);
}

Vector translated(const DetectorWavefunction& psi, double shift) {
    return translated(psi.grid, psi.amplitudes, psi.hbar, shift);
}

Vector momentum_power_applied(const DetectorWavefunction& psi, int n) {
    if (n < 0) throw std::invalid_argument("momentum_power_applied: order must be >= 0");
    Vector mom = position_to_momentum(psi.grid, psi.amplitudes, psi.hbar);
    for (int k = 0; k < psi.grid.n_points; ++k)
        mom(k) *= std::pow(psi.grid.momentum(k, psi.hbar), n);
    return momentum_to_position(psi.grid, mom, psi.hbar);
}

DetectorWavefunction upsampled2(const DetectorWavefunction& psi) {
    const int n = psi.grid.n_points;
    Vector mom = position_to_momentum(psi.grid, psi.amplitudes, psi.hbar);

    PositionGrid fine;
    fine.n_points = 2 * n;
    fine.dx = psi.grid.dx / 2.0;
    fine.center = psi.grid.center;

    // dp is unchanged; the coarse band occupies the middle of the fine band
    Vector padded = Vector::Zero(2 * n);
    padded.segment(n / 2, n) = mom;

    DetectorWavefunction out;
    out.grid = fine;
    out.hbar = psi.hbar;
    out.amplitudes = momentum_to_position(fine, padded, psi.hbar);
    return out;
}

void check_wrap_guard(const PositionGrid& grid, const Vector& amplitudes,
                      double threshold) {
    const int n = grid.n_points;
    const int band = std::max(1, static_cast<int>(std::ceil(0.025 * n)));
    double worst = 0.0;
    for (int j = 0; j < band; ++j) {
        worst = std::max(worst, std::abs(amplitudes(j)));
        worst = std::max(worst, std::abs(amplitudes(n - 1 - j)));
    }
    if (worst >= threshold) {
        std::ostringstream msg;
        msg << "wrap guard: |psi| = " << std::scientific << worst
            << " in the outer 5% of the grid";
        throw WrapGuardViolation(msg.str());
    }
}

namespace {

DetectorMoments moments_once(const DetectorWavefunction& psi, int max_n) {
    const int n = psi.grid.n_points;
    const double dx = psi.grid.dx;
    MomentumAmplitudes mom = momentum_representation(psi);
    const double dp = mom.dp();

    DetectorMoments m;
    m.p_moments.assign(max_n + 1, 0.0);
    m.sym_moments.assign(max_n + 1, 0.0);

    for (int order = 0; order <= max_n; ++order) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k)
            acc += std::pow(mom.point(k), order) * std::norm(mom.amplitudes(k)) * dp;
        m.p_moments[order] = acc;
    }

    // <{p^n,x}>_0/2 = Re Σ ψ*(x)·x·(p^n ψ)(x) dx
    for (int order = 0; order <= max_n; ++order) {
        const Vector pnpsi = momentum_power_applied(psi, order);
        Complex acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += std::conj(psi.amplitudes(j)) * psi.grid.point(j) * pnpsi(j) * dx;
        m.sym_moments[order] = acc.real();
    }

    m.mean_x = m.sym_moments[0];
    m.mean_p = max_n >= 1 ? m.p_moments[1] : 0.0;
    return m;
}

DetectorWavefunction extent_doubled(const DetectorWavefunction& psi) {
    const int n = psi.grid.n_points;
    PositionGrid wide;
    wide.n_points = 2 * n;
    wide.dx = psi.grid.dx;
    wide.center = psi.grid.center;
    DetectorWavefunction out;
    out.grid = wide;
    out.hbar = psi.hbar;
    out.amplitudes = Vector::Zero(2 * n);
    // grid points with the same parity convention line up at offset n/2
    out.amplitudes.segment(n / 2, n) = psi.amplitudes;
    return out;
}

} // namespace

DetectorMoments moments(const DetectorWavefunction& psi, int max_n,
                        bool check_resolution) {
    if (max_n < 0 || max_n > 8)
        throw std::invalid_argument("moments: max_n must be in [0, 8]");
    if (std::abs(psi.norm_squared() - 1.0) > 1e-10)
        throw std::invalid_argument("moments: wavefunction not normalized");

    DetectorMoments m = moments_once(psi, max_n);
    if (std::abs(m.p_moments[0] - 1.0) > 1e-10)
        throw std::runtime_error("moments: momentum normalization drifted");

    if (check_resolution && max_n >= 1) {
        const DetectorMoments wide =
            moments_once(extent_doubled(psi), std::max(max_n, 2));
        // characteristic momentum scale so near-zero moments are not compared
        // against themselves
        const double p_char = std::sqrt(std::max(wide.p_moments[2], 1e-300));
        for (int order = 1; order <= max_n; ++order) {
            const double scale =
                std::max({std::abs(m.p_moments[order]), std::abs(wide.p_moments[order]),
                          std::pow(p_char, order)});
            if (std::abs(m.p_moments[order] - wide.p_moments[order]) / scale > 1e-4)
                throw std::runtime_error(
                    "moments: order " + std::to_string(order) +
                    " drifts under grid doubling; grid resolution too low");
        }
    }
    return m;
}

DetectorMoments gaussian_moments(double sigma, double hbar, int max_n, double x0,
                                 double p0) {
    if (!(sigma > 0.0) || !(hbar > 0.0))
        throw std::invalid_argument("gaussian_moments: sigma and hbar must be > 0");
    if (max_n < 0) throw std::invalid_argument("gaussian_moments: max_n must be >= 0");

    // central moments: <p^{2n}> = (ħ/2σ)^{2n}(2n-1)!!
    std::vector<double> central(max_n + 1, 0.0);
    central[0] = 1.0;
    const double w2 = (hbar / (2.0 * sigma)) * (hbar / (2.0 * sigma));
    for (int n = 2; n <= max_n; n += 2) central[n] = central[n - 2] * w2 * (n - 1);

    DetectorMoments m;
    m.p_moments.assign(max_n + 1, 0.0);
    m.sym_moments.assign(max_n + 1, 0.0);
    for (int n = 0; n <= max_n; ++n) {
        double acc = 0.0;
        double binom = 1.0; // C(n, k)
        for (int k = 0; k <= n; ++k) {
            acc += binom * std::pow(p0, n - k) * central[k];
            binom = binom * (n - k) / (k + 1.0);
        }
        m.p_moments[n] = acc;
        m.sym_moments[n] = x0 * acc;
    }
    m.mean_x = x0;
    m.mean_p = max_n >= 1 ? m.p_moments[1] : p0;
    return m;
}

} // namespace vnmeas
