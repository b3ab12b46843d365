#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "holomera/models.hpp"
#include "holomera/tensor.hpp"

namespace holomera {

/// MPS site tensor, [left virtual][physical][right virtual] row-major.
struct MpsTensor {
    std::size_t vl = 1, d = 2, vr = 1;
    std::vector<Complex> data;

    MpsTensor() = default;
    MpsTensor(std::size_t vl_, std::size_t d_, std::size_t vr_)
        : vl(vl_), d(d_), vr(vr_), data(vl_ * d_ * vr_, Complex{}) {}
    Complex& at(std::size_t a, std::size_t s, std::size_t b) {
        return data[(a * d + s) * vr + b];
    }
    Complex at(std::size_t a, std::size_t s, std::size_t b) const {
        return data[(a * d + s) * vr + b];
    }
};

/// Open-boundary matrix product state. Sites and bonds are 1-based in the
/// public API; bond b sits between sites b and b+1. When `center` is set,
/// tensors left of it are left-isometries and tensors right of it are
/// right-isometries; `schmidt[b-1]` holds the Schmidt values at bond b once
/// the canonical sweeps have crossed it.
struct Mps {
    std::vector<MpsTensor> sites;
    int center = -1; // 1-based, -1 = unknown
    std::vector<std::vector<double>> schmidt;

    std::size_t length() const { return sites.size(); }
    std::size_t bond_dim(std::size_t b) const { return sites[b - 1].vr; } // bond b, 1-based
    std::size_t max_bond_dim() const;
    double norm() const;
};

/// Product state with per-site amplitudes drawn from the stream (normalized);
/// deterministic in the seed.
Mps random_product_mps(std::size_t length, std::uint64_t seed);
Mps product_mps(const std::vector<std::array<Complex, 2>>& amplitudes);

/// Moves the orthogonality center, recording Schmidt values on every bond
/// crossed. Optional truncation applies at each crossed bond.
void move_center(Mps& mps, std::size_t to, std::size_t chi_max = kNoRankLimit,
                 double cutoff = 0.0);
/// Full canonicalization: all bonds get Schmidt values, center lands at `to`,
/// and the state is normalized.
void canonicalize(Mps& mps, std::size_t to, std::size_t chi_max = kNoRankLimit,
                  double cutoff = 0.0);

struct DmrgOptions {
    std::size_t chi_max = 256;
    std::size_t sweeps = 10;
    std::uint64_t seed = 0;
    double cutoff = 1e-12;       // relative singular-value cutoff
    double energy_tol = 1e-12;   // stop when a full sweep improves less than this
};

struct DmrgResult {
    Mps mps;
    double energy = 0.0;
    bool converged = false;
    std::vector<double> half_sweep_energies;
    double energy_variance = -1.0; // filled on request
};

/// Two-site DMRG ground-state search for the given MPO.
DmrgResult dmrg_ground_state(const Mpo& h, const DmrgOptions& opt,
                             bool compute_variance = false);

Complex overlap(const Mps& a, const Mps& b);
double mpo_expectation(const Mps& mps, const Mpo& op);
double mpo_variance(const Mps& mps, const Mpo& op);

/// Applies a two-qubit gate u[(out_i out_{i+1}), (in_i in_{i+1})] (row-major
/// 4x4, unitary to 1e-10) to sites (i, i+1). Center must be at i or i+1;
/// it is at i afterwards.
Mps apply_two_site_gate(const Mps& mps, std::size_t i, const std::vector<Complex>& u,
                        std::size_t chi_max = kNoRankLimit, double cutoff = 0.0);

/// Renyi-2 entropy -log sum lambda^4 across bond b; center must be at b or
/// b+1 with Schmidt values available.
double renyi2_across_bond(const Mps& mps, std::size_t b);

CorrelationProfile mps_observables(const Mps& mps, std::size_t anchor, Basis basis);

/// Full 2^L statevector (site 1 = most significant index); L <= 24 guard.
Tensor mps_dense_state(const Mps& mps);
Mps mps_from_dense(const Tensor& state, std::size_t length,
                   std::size_t chi_max = kNoRankLimit, double cutoff = 0.0);

/// Versioned binary container with a JSON manifest; round-trips bit-exactly.
void save_mps(const Mps& mps, const std::string& path, const std::string& extra_manifest = "{}");
Mps load_mps(const std::string& path, std::string* manifest_out = nullptr);

} // namespace holomera
