#pragma once

#include <cmath>
#include <numbers>

#include "tmtele/config/experiment.hpp"
#include "tmtele/devices/stations.hpp"

namespace fixtures {

using namespace tmtele;

inline devices::AfcMemoryParams lossless_memory() {
    devices::AfcMemoryParams m;
    m.eta0 = 1.0;
    m.tau_afc_us = 1e300;
    return m;
}

inline DetectorSet ideal_detectors() {
    DetectorSet d;
    d.d1 = {1.0, 0.0, 0.0};
    d.d2 = {1.0, 0.0, 0.0};
    d.signal = {1.0, 0.0, 0.0};
    return d;
}

// Single photon alpha|e> + e^{i phi} beta|l> in the matched or auxiliary modes.
inline fock::DensityOperator photon_qubit(double alpha, double beta, double phi, bool auxiliary, int cutoff = 2) {
    const fock::complex late = beta * std::polar(1.0, phi);
    fock::PureState psi{devices::input_modes(), {}};
    if (auxiliary)
        psi.amplitudes = {{fock::FockBasisState{0, 0, 1, 0}, alpha}, {fock::FockBasisState{0, 0, 0, 1}, late}};
    else
        psi.amplitudes = {{fock::FockBasisState{1, 0, 0, 0}, alpha}, {fock::FockBasisState{0, 1, 0, 0}, late}};
    return fock::to_density(psi, cutoff);
}

// Target qubit a|e> + b|l> on the signal modes.
inline fock::PureState signal_qubit(fock::complex e, fock::complex l) {
    return {{fock::signal_early, fock::signal_late},
            {{fock::FockBasisState{1, 0}, e}, {fock::FockBasisState{0, 1}, l}}};
}

inline fock::DensityOperator signal_state(fock::complex e, fock::complex l, int cutoff = 2) {
    return fock::to_density(signal_qubit(e, l), cutoff);
}

}  // namespace fixtures
