// spectral.hpp — Herglotz analysis of degree-1 correlation sequences:
// twisted window averages, atom detection by scan + golden-section refinement
// with greedy deflation, and the almost-periodic + residual split.

#pragma once

#include <complex>
#include <vector>

#include "ergo/correlation.hpp"

namespace ergo {

struct SpectralAtom {
    double theta{0.0};                     // frequency in [0,1)
    double mass{0.0};                      // |weight|
    std::complex<double> weight{0.0, 0.0};
};

struct SpectralEstimate {
    long long grid_size{0};
    double mass_floor{0.0};
    std::vector<SpectralAtom> atoms;
    std::vector<double> density;     // periodogram (Fejer-weighted correlogram) on the grid
    double residual_energy{0.0};     // mean |a - sum atoms|^2 over the window
    bool truncated{false};           // stopped at the atom cap with a peak left over
};

// (1/|W|) sum_{n in W} a(n) e(-2 pi i n theta)
std::complex<double> wiener_mass(const CorrelationSeries& s, double theta, const AveragingWindow& w);

SpectralEstimate detect_atoms(const CorrelationSeries& s, const AveragingWindow& w,
                              long long coarse_grid = 0,  // 0: next power of two >= 2|W|
                              double mass_floor = 0.05);

struct HerglotzSplit {
    std::vector<SpectralAtom> atoms;  // psi(n) = sum_j weight_j e(2 pi i n theta_j)
    CorrelationSeries psi;
    CorrelationSeries nu;             // series - psi on the same range
    BesicovitchReport nu_besicovitch;
    NullVerdictReport nu_verdict;     // finite-scale; never asserts nullity
};

HerglotzSplit herglotz_decompose(const CorrelationSeries& s, const AveragingWindow& w,
                                 double mass_floor = 0.05);

struct WienerEnergyReport {
    double mean_square{0.0};   // mean |a|^2 over the window
    double atom_energy{0.0};   // sum of mass^2
    double gap{0.0};           // mean_square - atom_energy (continuous-part energy)
    bool consistent{false};    // gap >= -tolerance
    double tolerance{1e-3};
};

WienerEnergyReport wiener_energy_check(const CorrelationSeries& s, const SpectralEstimate& est,
                                       const AveragingWindow& w, double tolerance = 1e-3);

}  // namespace ergo
