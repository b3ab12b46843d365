#include "holomera/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "holomera/rng.hpp"

namespace holomera {

using MatrixXcdR = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

std::size_t product(const std::vector<std::size_t>& v) {
    std::size_t p = 1;
    for (auto d : v) p *= d;
    return p;
}

void check_labels_unique(const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j)
            if (labels[i] == labels[j])
                throw std::invalid_argument("duplicate leg label '" + labels[i] + "'");
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<std::string> labels_)
    : shape(std::move(shape_)), labels(std::move(labels_)) {
    if (shape.size() != labels.size())
        throw std::invalid_argument("shape/label rank mismatch");
    for (auto d : shape)
        if (d == 0) throw std::invalid_argument("zero leg dimension");
    check_labels_unique(labels);
    data.assign(product(shape), Complex(0.0, 0.0));
}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<std::string> labels_,
               std::vector<Complex> data_)
    : shape(std::move(shape_)), labels(std::move(labels_)), data(std::move(data_)) {
    if (shape.size() != labels.size())
        throw std::invalid_argument("shape/label rank mismatch");
    check_labels_unique(labels);
    if (data.size() != product(shape))
        throw std::invalid_argument("data length does not match shape");
}

std::size_t Tensor::size() const { return product(shape); }

bool Tensor::has_label(const std::string& label) const {
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::size_t Tensor::axis_of(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
        throw std::invalid_argument("unknown leg label '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
}

Complex& Tensor::at(const std::vector<std::size_t>& idx) {
    return const_cast<Complex&>(static_cast<const Tensor*>(this)->at(idx));
}

const Complex& Tensor::at(const std::vector<std::size_t>& idx) const {
    if (idx.size() != shape.size()) throw std::invalid_argument("index rank mismatch");
    std::size_t off = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (idx[k] >= shape[k]) throw std::out_of_range("index out of range");
        off = off * shape[k] + idx[k];
    }
    return data[off];
}

Tensor Tensor::permuted(const std::vector<std::string>& new_order) const {
    if (new_order.size() != labels.size())
        throw std::invalid_argument("permutation must list every leg exactly once");
    std::vector<std::size_t> axes(new_order.size());
    for (std::size_t k = 0; k < new_order.size(); ++k) axes[k] = axis_of(new_order[k]);
    std::vector<bool> seen(labels.size(), false);
    for (auto a : axes) {
        if (seen[a]) throw std::invalid_argument("permutation repeats a leg");
        seen[a] = true;
    }

    std::vector<std::size_t> new_shape(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) new_shape[k] = shape[axes[k]];

    Tensor out(new_shape, new_order);
    const std::size_t r = shape.size();
    if (r == 0) {
        out.data = data;
        return out;
    }
    // strides of the source in its own order
    std::vector<std::size_t> src_stride(r, 1);
    for (std::size_t k = r - 1; k-- > 0;) src_stride[k] = src_stride[k + 1] * shape[k + 1];
    std::vector<std::size_t> stride_for_new(r);
    for (std::size_t k = 0; k < r; ++k) stride_for_new[k] = src_stride[axes[k]];

    std::vector<std::size_t> idx(r, 0);
    std::size_t n = out.data.size();
    std::size_t src = 0;
    for (std::size_t lin = 0; lin < n; ++lin) {
        out.data[lin] = data[src];
        for (std::size_t k = r; k-- > 0;) {
            ++idx[k];
            src += stride_for_new[k];
            if (idx[k] < new_shape[k]) break;
            src -= stride_for_new[k] * new_shape[k];
            idx[k] = 0;
        }
    }
    return out;
}

Tensor Tensor::conjugated() const {
    Tensor out = *this;
    for (auto& z : out.data) z = std::conj(z);
    return out;
}

Tensor Tensor::relabeled(const std::vector<std::string>& new_labels) const {
    Tensor out = *this;
    if (new_labels.size() != labels.size())
        throw std::invalid_argument("relabel rank mismatch");
    check_labels_unique(new_labels);
    out.labels = new_labels;
    return out;
}

double Tensor::norm() const {
    double s = 0.0;
    for (const auto& z : data) s += std::norm(z);
    return std::sqrt(s);
}

Tensor identity_tensor(std::size_t d, const std::string& out, const std::string& in) {
    Tensor t({d, d}, {out, in});
    for (std::size_t i = 0; i < d; ++i) t.data[i * d + i] = 1.0;
    return t;
}

Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<std::string> a_con, b_con;
    for (const auto& [la, lb] : pairs) {
        if (a.dim(la) != b.dim(lb))
            throw std::invalid_argument("contract: dimension mismatch on '" + la + "'/'" + lb + "'");
        a_con.push_back(la);
        b_con.push_back(lb);
    }
    check_labels_unique(a_con);
    check_labels_unique(b_con);

    std::vector<std::string> a_free, b_free;
    for (const auto& l : a.labels)
        if (std::find(a_con.begin(), a_con.end(), l) == a_con.end()) a_free.push_back(l);
    for (const auto& l : b.labels)
        if (std::find(b_con.begin(), b_con.end(), l) == b_con.end()) b_free.push_back(l);

    std::vector<std::string> a_order = a_free;
    a_order.insert(a_order.end(), a_con.begin(), a_con.end());
    std::vector<std::string> b_order = b_con;
    b_order.insert(b_order.end(), b_free.begin(), b_free.end());

    Tensor ap = a.permuted(a_order);
    Tensor bp = b.permuted(b_order);

    std::size_t m = 1, k = 1, n = 1;
    for (const auto& l : a_free) m *= a.dim(l);
    for (const auto& l : a_con) k *= a.dim(l);
    for (const auto& l : b_free) n *= b.dim(l);

    std::vector<std::string> out_labels = a_free;
    out_labels.insert(out_labels.end(), b_free.begin(), b_free.end());
    std::vector<std::size_t> out_shape;
    for (const auto& l : a_free) out_shape.push_back(a.dim(l));
    for (const auto& l : b_free) out_shape.push_back(b.dim(l));

    Tensor out(out_shape, out_labels);
    Eigen::Map<const MatrixXcdR> ma(ap.data.data(), m, k);
    Eigen::Map<const MatrixXcdR> mb(bp.data.data(), k, n);
    Eigen::Map<MatrixXcdR> mo(out.data.data(), m, n);
    mo.noalias() = ma * mb;
    return out;
}

SvdFactorization svd_split(const Tensor& t, const std::vector<std::string>& left_legs,
                           std::size_t max_rank, double cutoff, const std::string& bond_label) {
    if (left_legs.empty() || left_legs.size() >= t.rank())
        throw std::invalid_argument("svd_split: left legs must be a proper nonempty subset");
    if (cutoff < 0.0) throw std::invalid_argument("svd_split: negative cutoff");
    std::vector<std::string> right_legs;
    for (const auto& l : t.labels)
        if (std::find(left_legs.begin(), left_legs.end(), l) == left_legs.end())
            right_legs.push_back(l);
    for (const auto& l : left_legs) (void)t.axis_of(l);

    std::vector<std::string> order = left_legs;
    order.insert(order.end(), right_legs.begin(), right_legs.end());
    Tensor tp = t.permuted(order);

    std::size_t m = 1, n = 1;
    for (const auto& l : left_legs) m *= t.dim(l);
    for (const auto& l : right_legs) n *= t.dim(l);

    Eigen::Map<const MatrixXcdR> mat(tp.data.data(), m, n);
    Eigen::JacobiSVD<MatrixXcdR> svd;
    Eigen::BDCSVD<MatrixXcdR> bdc;
    bool small = std::min(m, n) <= 96;
    if (small)
        svd.compute(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    else
        bdc.compute(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& S = small ? svd.singularValues() : bdc.singularValues();
    const auto U = small ? svd.matrixU() : bdc.matrixU();
    const auto V = small ? svd.matrixV() : bdc.matrixV();

    std::size_t full = static_cast<std::size_t>(S.size());
    double smax = full ? S(0) : 0.0;
    std::size_t keep = 0;
    for (std::size_t i = 0; i < full; ++i) {
        if (keep >= max_rank) break;
        if (S(i) < cutoff * smax) break;
        ++keep;
    }
    if (keep == 0) keep = 1; // never return an empty factorization
    double err = 0.0;
    for (std::size_t i = keep; i < full; ++i) err += S(i) * S(i);

    std::vector<std::size_t> lshape;
    for (const auto& l : left_legs) lshape.push_back(t.dim(l));
    lshape.push_back(keep);
    std::vector<std::string> llabels = left_legs;
    llabels.push_back(bond_label);
    Tensor left(lshape, llabels);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < keep; ++j) left.data[i * keep + j] = U(i, j);

    std::vector<std::size_t> rshape{keep};
    for (const auto& l : right_legs) rshape.push_back(t.dim(l));
    std::vector<std::string> rlabels{bond_label};
    rlabels.insert(rlabels.end(), right_legs.begin(), right_legs.end());
    Tensor right(rshape, rlabels);
    for (std::size_t j = 0; j < keep; ++j)
        for (std::size_t i = 0; i < n; ++i) right.data[j * n + i] = std::conj(V(i, j));

    SvdFactorization f;
    f.left = std::move(left);
    f.right = std::move(right);
    f.singular_values.assign(S.data(), S.data() + keep);
    f.truncation_error = err;
    return f;
}

Tensor polar_isometry(const Tensor& m, const std::vector<std::string>& row_legs) {
    std::vector<std::string> col_legs;
    for (const auto& l : m.labels)
        if (std::find(row_legs.begin(), row_legs.end(), l) == row_legs.end())
            col_legs.push_back(l);
    std::vector<std::string> order = row_legs;
    order.insert(order.end(), col_legs.begin(), col_legs.end());
    Tensor mp = m.permuted(order);

    std::size_t rows = 1, cols = 1;
    for (const auto& l : row_legs) rows *= m.dim(l);
    for (const auto& l : col_legs) cols *= m.dim(l);
    if (rows < cols)
        throw std::invalid_argument("polar_isometry: rows must be >= cols");

    Eigen::Map<const MatrixXcdR> mat(mp.data.data(), rows, cols);
    Eigen::JacobiSVD<MatrixXcdR> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    MatrixXcdR w = svd.matrixU() * svd.matrixV().adjoint();

    Tensor out = mp;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out.data[i * cols + j] = w(i, j);
    return out.permuted(m.labels);
}

Tensor random_unitary(std::size_t dim, std::uint64_t seed,
                      const std::string& out, const std::string& in) {
    if (dim < 1) throw std::invalid_argument("random_unitary: dim must be >= 1");
    RngStream rng(seed);
    MatrixXcdR g(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            g(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian());
    Eigen::HouseholderQR<MatrixXcdR> qr(g);
    MatrixXcdR q = qr.householderQ() * MatrixXcdR::Identity(dim, dim);
    MatrixXcdR r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (std::size_t j = 0; j < dim; ++j) {
        Complex d = r(j, j);
        Complex phase = (std::abs(d) > 0) ? d / std::abs(d) : Complex(1.0, 0.0);
        q.col(j) *= std::conj(phase);
    }
    Tensor t({dim, dim}, {out, in});
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) t.data[i * dim + j] = q(i, j);
    return t;
}

bool allclose(const Tensor& a, const Tensor& b, double atol) {
    if (a.shape != b.shape || a.labels != b.labels) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (std::abs(a.data[i] - b.data[i]) > atol) return false;
    return true;
}

} // namespace holomera
