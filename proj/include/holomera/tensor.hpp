#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace holomera {

using Complex = std::complex<double>;

/// Dense complex tensor with labeled legs, row-major storage.
///
/// Legs are addressed by label; labels must be unique within a tensor.
/// All algebra in this library funnels through contract()/svd_split() so
/// that contractions are deterministic and bit-reproducible.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<std::string> labels;
    std::vector<Complex> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> shape_, std::vector<std::string> labels_);
    Tensor(std::vector<std::size_t> shape_, std::vector<std::string> labels_,
           std::vector<Complex> data_);

    std::size_t rank() const { return shape.size(); }
    std::size_t size() const;
    std::size_t axis_of(const std::string& label) const;
    bool has_label(const std::string& label) const;
    std::size_t dim(const std::string& label) const { return shape[axis_of(label)]; }

    /// Element access by multi-index (row-major).
    Complex& at(const std::vector<std::size_t>& idx);
    const Complex& at(const std::vector<std::size_t>& idx) const;

    /// Returns a copy with axes reordered to the given label order.
    Tensor permuted(const std::vector<std::string>& new_order) const;
    /// Elementwise complex conjugate; labels unchanged.
    Tensor conjugated() const;
    Tensor relabeled(const std::vector<std::string>& new_labels) const;

    double norm() const;
};

/// d x d identity with labels {out, in}.
Tensor identity_tensor(std::size_t d, const std::string& out, const std::string& in);

/// Contract paired legs of a and b. The result carries the unpaired legs of
/// a (in order) followed by those of b. Throws on unknown labels or
/// dimension mismatch; pairs are (label in a, label in b).
Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<std::string, std::string>>& pairs);

struct SvdFactorization {
    Tensor left;                         // isometric: left legs + bond
    std::vector<double> singular_values; // descending, >= 0
    Tensor right;                        // bond + right legs
    double truncation_error = 0.0;       // sum of squared discarded values
};

constexpr std::size_t kNoRankLimit = static_cast<std::size_t>(-1);

/// SVD of t across the cut (left_legs | rest). Singular values below
/// cutoff * s_max are discarded, as is anything past max_rank. The new bond
/// carries `bond_label` on both factors.
SvdFactorization svd_split(const Tensor& t, const std::vector<std::string>& left_legs,
                           std::size_t max_rank = kNoRankLimit, double cutoff = 0.0,
                           const std::string& bond_label = "s");

/// Isometric polar factor W maximizing Re tr(W^dag m), where m is viewed as
/// a matrix with `row_legs` as rows (row count must be >= column count).
/// Degenerate directions are completed from the SVD basis in index order.
Tensor polar_isometry(const Tensor& m, const std::vector<std::string>& row_legs);

/// Haar-distributed unitary as a {row, col}-labeled tensor; deterministic
/// for a given seed across platforms.
Tensor random_unitary(std::size_t dim, std::uint64_t seed,
                      const std::string& out = "out", const std::string& in = "in");

bool allclose(const Tensor& a, const Tensor& b, double atol = 1e-12);

} // namespace holomera
