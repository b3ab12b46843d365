#pragma once

#include <cstddef>
#include <vector>

#include "holomera/tensor.hpp"

namespace holomera {

enum class Basis { X, Z };

/// On-site expectations for every site plus connected correlations from one
/// anchor: connected[r-1] = <O_i O_{i+r}> - <O_i><O_{i+r}> for r = 1..L-i.
struct CorrelationProfile {
    std::size_t anchor = 1; // 1-based site index
    std::vector<double> onsite;
    std::vector<double> connected;
};

/// Transverse-field Ising chain with the self-dual perturbation
///   H = sum_i -(X_i X_{i+1} + Z_i) + V (Z_i Z_{i+1} + X_i X_{i+2}),
/// open boundaries, couplings in units of the Ising term.
struct SpinChainModel {
    std::size_t length = 2;
    double coupling_v = 0.0;
};

/// Matrix product operator; site tensors indexed [wl][wr][out][in], all
/// physical dimensions 2. Boundary sites have wl=1 / wr=1.
struct MpoTensor {
    std::size_t wl = 1, wr = 1;
    std::vector<Complex> data;

    Complex& at(std::size_t a, std::size_t b, std::size_t o, std::size_t i) {
        return data[((a * wr + b) * 2 + o) * 2 + i];
    }
    Complex at(std::size_t a, std::size_t b, std::size_t o, std::size_t i) const {
        return data[((a * wr + b) * 2 + o) * 2 + i];
    }
};

struct Mpo {
    std::vector<MpoTensor> sites;
    std::size_t length() const { return sites.size(); }
    std::size_t virtual_dim() const;
};

Mpo build_hamiltonian_mpo(const SpinChainModel& model);

/// Dense 2^L x 2^L matrix of the MPO (row-major, out-index major). L <= 14.
std::vector<Complex> mpo_dense(const Mpo& mpo);

/// y += H x without forming H; amplitude index has site 1 as the most
/// significant bit.
void apply_hamiltonian(const SpinChainModel& model, const Complex* x, Complex* y);

struct GroundState {
    double energy = 0.0;
    Tensor state;    // one leg "amp" of dimension 2^L
    double residual = 0.0;
};

/// Lowest eigenpair of the model Hamiltonian. Dense solve for L <= 10,
/// restarted Lanczos with full reorthogonalization above; L <= 16.
/// Global phase fixed so the largest-magnitude amplitude is real positive.
GroundState exact_ground_state(const SpinChainModel& model);

/// X or Z observables of a normalized 2^L statevector.
CorrelationProfile statevector_observables(const Tensor& state, std::size_t anchor, Basis basis);

} // namespace holomera
