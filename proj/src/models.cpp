#include "holomera/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "lanczos_internal.hpp"

namespace holomera {

namespace {

void check_model(const SpinChainModel& m) {
    if (m.length < 2) throw std::invalid_argument("model length must be >= 2");
}

// bit of site i (1-based) in amplitude index: site 1 is most significant
inline std::size_t site_bit(std::size_t idx, std::size_t L, std::size_t i) {
    return (idx >> (L - i)) & 1u;
}

} // namespace

std::size_t Mpo::virtual_dim() const {
    std::size_t w = 1;
    for (const auto& s : sites) w = std::max(w, std::max(s.wl, s.wr));
    return w;
}

Mpo build_hamiltonian_mpo(const SpinChainModel& model) {
    check_model(model);
    const double V = model.coupling_v;
    const std::size_t L = model.length;
    const std::size_t W = 5;

    // finite-state machine rows: 0 ready, 1 saw X (distance 1), 2 saw X
    // (distance 2), 3 saw Z, 4 done
    MpoTensor bulk;
    bulk.wl = W;
    bulk.wr = W;
    bulk.data.assign(W * W * 4, Complex{0.0, 0.0});
    auto set_op = [&](std::size_t a, std::size_t b, char op, double coeff) {
        switch (op) {
            case 'I':
                bulk.at(a, b, 0, 0) += coeff;
                bulk.at(a, b, 1, 1) += coeff;
                break;
            case 'X':
                bulk.at(a, b, 0, 1) += coeff;
                bulk.at(a, b, 1, 0) += coeff;
                break;
            case 'Z':
                bulk.at(a, b, 0, 0) += coeff;
                bulk.at(a, b, 1, 1) += -coeff;
                break;
            default:
                throw std::logic_error("bad op");
        }
    };
    set_op(0, 0, 'I', 1.0);
    set_op(0, 1, 'X', 1.0);
    set_op(0, 3, 'Z', 1.0);
    set_op(0, 4, 'Z', -1.0);
    set_op(1, 2, 'I', 1.0);
    set_op(1, 4, 'X', -1.0);
    set_op(2, 4, 'X', V);
    set_op(3, 4, 'Z', V);
    set_op(4, 4, 'I', 1.0);

    Mpo mpo;
    mpo.sites.resize(L);
    for (std::size_t i = 1; i + 1 < L; ++i) mpo.sites[i] = bulk;

    // boundary projections: first site keeps row 0, last site keeps column 4
    MpoTensor first;
    first.wl = 1;
    first.wr = W;
    first.data.assign(W * 4, Complex{});
    for (std::size_t b = 0; b < W; ++b)
        for (std::size_t o = 0; o < 2; ++o)
            for (std::size_t i = 0; i < 2; ++i) first.at(0, b, o, i) = bulk.at(0, b, o, i);
    MpoTensor last;
    last.wl = W;
    last.wr = 1;
    last.data.assign(W * 4, Complex{});
    for (std::size_t a = 0; a < W; ++a)
        for (std::size_t o = 0; o < 2; ++o)
            for (std::size_t i = 0; i < 2; ++i) last.at(a, 0, o, i) = bulk.at(a, 4, o, i);
    mpo.sites[0] = first;
    mpo.sites[L - 1] = last;
    return mpo;
}

std::vector<Complex> mpo_dense(const Mpo& mpo) {
    const std::size_t L = mpo.length();
    if (L > 14) throw std::invalid_argument("mpo_dense limited to L <= 14");
    const std::size_t dim = std::size_t{1} << L;

    // env[w][out-prefix][in-prefix]
    std::vector<Complex> env{Complex{1.0, 0.0}};
    std::size_t pref = 1, wl = 1;
    for (std::size_t s = 0; s < L; ++s) {
        const auto& t = mpo.sites[s];
        std::vector<Complex> next(t.wr * (pref * 2) * (pref * 2), Complex{});
        for (std::size_t a = 0; a < wl; ++a)
            for (std::size_t po = 0; po < pref; ++po)
                for (std::size_t pi = 0; pi < pref; ++pi) {
                    Complex e = env[(a * pref + po) * pref + pi];
                    if (e == Complex{}) continue;
                    for (std::size_t b = 0; b < t.wr; ++b)
                        for (std::size_t o = 0; o < 2; ++o)
                            for (std::size_t i = 0; i < 2; ++i) {
                                Complex v = t.at(a, b, o, i);
                                if (v == Complex{}) continue;
                                next[(b * (pref * 2) + (po * 2 + o)) * (pref * 2) + (pi * 2 + i)] +=
                                    e * v;
                            }
                }
        env = std::move(next);
        pref *= 2;
        wl = t.wr;
    }
    std::vector<Complex> out(dim * dim);
    for (std::size_t k = 0; k < dim * dim; ++k) out[k] = env[k];
    return out;
}

void apply_hamiltonian(const SpinChainModel& model, const Complex* x, Complex* y) {
    const std::size_t L = model.length;
    const double V = model.coupling_v;
    const std::size_t dim = std::size_t{1} << L;

    for (std::size_t idx = 0; idx < dim; ++idx) {
        // diagonal part: -sum Z_i + V sum Z_i Z_{i+1}
        double diag = 0.0;
        for (std::size_t i = 1; i <= L; ++i) {
            double zi = site_bit(idx, L, i) ? -1.0 : 1.0;
            diag -= zi;
            if (i + 1 <= L && V != 0.0) {
                double zj = site_bit(idx, L, i + 1) ? -1.0 : 1.0;
                diag += V * zi * zj;
            }
        }
        y[idx] += diag * x[idx];
    }
    for (std::size_t i = 1; i <= L; ++i) {
        if (i + 1 <= L) {
            std::size_t mask = (std::size_t{1} << (L - i)) | (std::size_t{1} << (L - i - 1));
            for (std::size_t idx = 0; idx < dim; ++idx) y[idx] -= x[idx ^ mask];
        }
        if (i + 2 <= L && V != 0.0) {
            std::size_t mask = (std::size_t{1} << (L - i)) | (std::size_t{1} << (L - i - 2));
            for (std::size_t idx = 0; idx < dim; ++idx) y[idx] += V * x[idx ^ mask];
        }
    }
}

namespace {

void fix_global_phase(std::vector<Complex>& v) {
    std::size_t imax = 0;
    double best = -1.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        double a = std::abs(v[k]);
        if (a > best + 1e-15) {
            best = a;
            imax = k;
        }
    }
    Complex ph = v[imax] / std::abs(v[imax]);
    for (auto& z : v) z /= ph;
}

} // namespace

GroundState exact_ground_state(const SpinChainModel& model) {
    check_model(model);
    const std::size_t L = model.length;
    if (L > 16) throw std::invalid_argument("exact_ground_state limited to L <= 16");
    const std::size_t dim = std::size_t{1} << L;

    GroundState gs;
    if (L <= 10) {
        // real symmetric in the computational basis
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        std::vector<Complex> col(dim), hcol(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            std::fill(col.begin(), col.end(), Complex{});
            std::fill(hcol.begin(), hcol.end(), Complex{});
            col[c] = 1.0;
            apply_hamiltonian(model, col.data(), hcol.data());
            for (std::size_t r = 0; r < dim; ++r) h(r, c) = hcol[r].real();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        gs.energy = es.eigenvalues()(0);
        std::vector<Complex> v(dim);
        for (std::size_t k = 0; k < dim; ++k) v[k] = es.eigenvectors().col(0)(k);
        fix_global_phase(v);
        std::vector<Complex> hv(dim, Complex{});
        apply_hamiltonian(model, v.data(), hv.data());
        double res = 0;
        for (std::size_t k = 0; k < dim; ++k) res += std::norm(hv[k] - gs.energy * v[k]);
        gs.residual = std::sqrt(res);
        gs.state = Tensor({dim}, {"amp"}, std::move(v));
        return gs;
    }

    std::vector<Complex> v0(dim, Complex{1.0, 0.0});
    auto mv = [&](const Complex* x, Complex* y) { apply_hamiltonian(model, x, y); };
    auto out = detail::lanczos_lowest(mv, dim, std::move(v0));
    if (out.residual > 1e-9)
        throw std::runtime_error("exact_ground_state: Lanczos residual " +
                                 std::to_string(out.residual) + " above 1e-9");
    fix_global_phase(out.vec);
    gs.energy = out.value;
    gs.residual = out.residual;
    gs.state = Tensor({dim}, {"amp"}, std::move(out.vec));
    return gs;
}

CorrelationProfile statevector_observables(const Tensor& state, std::size_t anchor, Basis basis) {
    const std::size_t dim = state.size();
    std::size_t L = 0;
    while ((std::size_t{1} << L) < dim) ++L;
    if ((std::size_t{1} << L) != dim)
        throw std::invalid_argument("state length is not a power of 2");
    if (anchor < 1 || anchor > L) throw std::invalid_argument("anchor site out of range");
    double norm = 0;
    for (const auto& z : state.data) norm += std::norm(z);
    if (std::abs(norm - 1.0) > 1e-8)
        throw std::invalid_argument("statevector_observables: state not normalized");

    const auto& psi = state.data;
    auto expect1 = [&](std::size_t i) {
        double acc = 0.0;
        if (basis == Basis::Z) {
            for (std::size_t idx = 0; idx < dim; ++idx)
                acc += (site_bit(idx, L, i) ? -1.0 : 1.0) * std::norm(psi[idx]);
        } else {
            std::size_t mask = std::size_t{1} << (L - i);
            for (std::size_t idx = 0; idx < dim; ++idx)
                acc += (std::conj(psi[idx]) * psi[idx ^ mask]).real();
        }
        return acc;
    };
    auto expect2 = [&](std::size_t i, std::size_t j) {
        double acc = 0.0;
        if (basis == Basis::Z) {
            for (std::size_t idx = 0; idx < dim; ++idx) {
                double zi = site_bit(idx, L, i) ? -1.0 : 1.0;
                double zj = site_bit(idx, L, j) ? -1.0 : 1.0;
                acc += zi * zj * std::norm(psi[idx]);
            }
        } else {
            std::size_t mask = (std::size_t{1} << (L - i)) | (std::size_t{1} << (L - j));
            for (std::size_t idx = 0; idx < dim; ++idx)
                acc += (std::conj(psi[idx]) * psi[idx ^ mask]).real();
        }
        return acc;
    };

    CorrelationProfile p;
    p.anchor = anchor;
    p.onsite.resize(L);
    for (std::size_t j = 1; j <= L; ++j) p.onsite[j - 1] = expect1(j);
    p.connected.resize(L - anchor);
    for (std::size_t r = 1; anchor + r <= L; ++r)
        p.connected[r - 1] =
            expect2(anchor, anchor + r) - p.onsite[anchor - 1] * p.onsite[anchor + r - 1];
    return p;
}

} // namespace holomera
