#include "holomera/mps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "holomera/io.hpp"
#include "holomera/rng.hpp"
#include "lanczos_internal.hpp"
#include "linalg_internal.hpp"

namespace holomera {

using detail::MatrixXcdR;

namespace {

using CVec = std::vector<Complex>;

void check_site(const Mps& m, std::size_t i) {
    if (i < 1 || i > m.length()) throw std::invalid_argument("site index out of range");
}

// theta[a, s1, s2, b] from sites i, i+1 (0-based)
CVec merge_two(const Mps& m, std::size_t i) {
    const auto& A = m.sites[i];
    const auto& B = m.sites[i + 1];
    CVec theta(A.vl * A.d * B.d * B.vr, Complex{});
    Eigen::Map<const MatrixXcdR> ma(A.data.data(), A.vl * A.d, A.vr);
    Eigen::Map<const MatrixXcdR> mb(B.data.data(), B.vl, B.d * B.vr);
    Eigen::Map<MatrixXcdR> mt(theta.data(), A.vl * A.d, B.d * B.vr);
    mt.noalias() = ma * mb;
    return theta;
}

// split theta[a,s1,s2,b] at the middle bond; toward +1 leaves the center on
// the right site, -1 on the left. Records normalized Schmidt values.
void split_theta(Mps& m, std::size_t i, const CVec& theta, std::size_t a, std::size_t b,
                 std::size_t chi_max, double cutoff, int toward) {
    auto svd = detail::svd_rowmajor(theta.data(), a * 2, 2 * b);
    // floor at machine noise so exact zero modes never inflate the bond
    std::size_t keep = detail::svd_rank(svd.s, chi_max, std::max(cutoff, 1e-15));

    auto& A = m.sites[i];
    auto& B = m.sites[i + 1];
    A = MpsTensor(a, 2, keep);
    B = MpsTensor(keep, 2, b);
    std::vector<double> lam(keep);
    double n2 = 0;
    for (std::size_t k = 0; k < keep; ++k) n2 += svd.s(k) * svd.s(k);
    double nrm = std::sqrt(n2);
    for (std::size_t k = 0; k < keep; ++k) lam[k] = svd.s(k) / (nrm > 0 ? nrm : 1.0);

    if (toward > 0) {
        for (std::size_t r = 0; r < a * 2; ++r)
            for (std::size_t k = 0; k < keep; ++k) A.data[r * keep + k] = svd.u(r, k);
        for (std::size_t k = 0; k < keep; ++k)
            for (std::size_t c = 0; c < 2 * b; ++c) B.data[k * 2 * b + c] = svd.s(k) * svd.vh(k, c);
        m.center = static_cast<int>(i) + 2; // 1-based site i+1
    } else {
        for (std::size_t r = 0; r < a * 2; ++r)
            for (std::size_t k = 0; k < keep; ++k) A.data[r * keep + k] = svd.u(r, k) * svd.s(k);
        for (std::size_t k = 0; k < keep; ++k)
            for (std::size_t c = 0; c < 2 * b; ++c) B.data[k * 2 * b + c] = svd.vh(k, c);
        m.center = static_cast<int>(i) + 1;
    }
    if (m.schmidt.size() != m.length() - 1) m.schmidt.assign(m.length() - 1, {});
    m.schmidt[i] = std::move(lam);
}

} // namespace

std::size_t Mps::max_bond_dim() const {
    std::size_t c = 1;
    for (const auto& s : sites) c = std::max(c, s.vr);
    return c;
}

double Mps::norm() const {
    MatrixXcdR e = MatrixXcdR::Ones(1, 1);
    for (const auto& s : sites) {
        Eigen::Map<const MatrixXcdR> a(s.data.data(), s.vl, s.d * s.vr);
        MatrixXcdR t = e * a; // [vl_bra, d*vr]
        MatrixXcdR tr(s.vl * s.d, s.vr);
        for (std::size_t x = 0; x < s.vl; ++x)
            for (std::size_t ds = 0; ds < s.d; ++ds)
                for (std::size_t y = 0; y < s.vr; ++y) tr(x * s.d + ds, y) = t(x, ds * s.vr + y);
        Eigen::Map<const MatrixXcdR> abra(s.data.data(), s.vl * s.d, s.vr);
        e = abra.adjoint() * tr;
    }
    return std::sqrt(std::abs(e(0, 0).real()));
}

Mps product_mps(const std::vector<std::array<Complex, 2>>& amplitudes) {
    Mps m;
    m.sites.resize(amplitudes.size());
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        MpsTensor t(1, 2, 1);
        double n = std::sqrt(std::norm(amplitudes[i][0]) + std::norm(amplitudes[i][1]));
        t.at(0, 0, 0) = amplitudes[i][0] / n;
        t.at(0, 1, 0) = amplitudes[i][1] / n;
        m.sites[i] = t;
    }
    m.center = 1;
    if (amplitudes.size() > 1) m.schmidt.assign(amplitudes.size() - 1, std::vector<double>{1.0});
    return m;
}

Mps random_product_mps(std::size_t length, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<std::array<Complex, 2>> amps(length);
    for (auto& a : amps) {
        a[0] = Complex(rng.next_gaussian(), rng.next_gaussian());
        a[1] = Complex(rng.next_gaussian(), rng.next_gaussian());
    }
    return product_mps(amps);
}

void move_center(Mps& m, std::size_t to, std::size_t chi_max, double cutoff) {
    check_site(m, to);
    if (m.center < 1) throw std::invalid_argument("move_center requires a known center");
    if (m.schmidt.size() != m.length() - 1) m.schmidt.assign(m.length() - 1, {});
    while (static_cast<std::size_t>(m.center) != to) {
        std::size_t c = static_cast<std::size_t>(m.center);
        std::size_t i = (c < to) ? c - 1 : c - 2; // 0-based left site of the bond
        CVec theta = merge_two(m, i);
        split_theta(m, i, theta, m.sites[i].vl, m.sites[i + 1].vr, chi_max, cutoff,
                    (c < to) ? +1 : -1);
    }
}

void canonicalize(Mps& m, std::size_t to, std::size_t chi_max, double cutoff) {
    check_site(m, to);
    if (m.center < 1) m.center = 1;
    if (m.length() > 1) {
        move_center(m, 1, chi_max, cutoff);
        move_center(m, m.length(), chi_max, cutoff);
        move_center(m, to, chi_max, cutoff);
    }
    auto& c = m.sites[to - 1];
    double n = 0;
    for (auto& z : c.data) n += std::norm(z);
    n = std::sqrt(n);
    if (n > 0)
        for (auto& z : c.data) z /= n;
}

// --- environments shared by DMRG / expectation values ---------------------

namespace {

// env[bra][w][ket], flattened row-major
struct Env {
    std::size_t nb = 1, nw = 1, nk = 1;
    CVec data{Complex{1.0, 0.0}};
};

Env absorb_left(const Env& e, const MpsTensor& a, const MpoTensor& w) {
    std::size_t nb = e.nb, nw = e.nw, nk = a.vr;
    CVec t1(nb * nw * a.d * nk);
    {
        Eigen::Map<const MatrixXcdR> me(e.data.data(), nb * nw, e.nk);
        Eigen::Map<const MatrixXcdR> ma(a.data.data(), a.vl, a.d * a.vr);
        Eigen::Map<MatrixXcdR> mt(t1.data(), nb * nw, a.d * a.vr);
        mt.noalias() = me * ma;
    }
    CVec t2(nb * w.wr * a.d * nk, Complex{});
    for (std::size_t x = 0; x < nb; ++x)
        for (std::size_t wl = 0; wl < w.wl; ++wl)
            for (std::size_t s = 0; s < 2; ++s)
                for (std::size_t k = 0; k < nk; ++k) {
                    Complex v = t1[((x * nw + wl) * 2 + s) * nk + k];
                    if (v == Complex{}) continue;
                    for (std::size_t wr = 0; wr < w.wr; ++wr)
                        for (std::size_t sp = 0; sp < 2; ++sp) {
                            Complex c = w.at(wl, wr, sp, s);
                            if (c == Complex{}) continue;
                            t2[((x * w.wr + wr) * 2 + sp) * nk + k] += c * v;
                        }
                }
    Env out;
    out.nb = a.vr;
    out.nw = w.wr;
    out.nk = nk;
    out.data.assign(out.nb * out.nw * out.nk, Complex{});
    CVec t2r(nb * 2 * w.wr * nk);
    for (std::size_t x = 0; x < nb; ++x)
        for (std::size_t wr = 0; wr < w.wr; ++wr)
            for (std::size_t sp = 0; sp < 2; ++sp)
                for (std::size_t k = 0; k < nk; ++k)
                    t2r[(x * 2 + sp) * (w.wr * nk) + wr * nk + k] =
                        t2[((x * w.wr + wr) * 2 + sp) * nk + k];
    Eigen::Map<const MatrixXcdR> ma(a.data.data(), a.vl * a.d, a.vr);
    Eigen::Map<const MatrixXcdR> mt(t2r.data(), nb * 2, w.wr * nk);
    MatrixXcdR o = ma.adjoint() * mt;
    for (std::size_t bp = 0; bp < out.nb; ++bp)
        for (std::size_t wr = 0; wr < w.wr; ++wr)
            for (std::size_t k = 0; k < nk; ++k)
                out.data[(bp * out.nw + wr) * out.nk + k] = o(bp, wr * nk + k);
    return out;
}

Env absorb_right(const Env& e, const MpsTensor& a, const MpoTensor& w) {
    std::size_t nb = e.nb, nw = e.nw;
    CVec t1(nb * nw * 2 * a.vl, Complex{});
    for (std::size_t k = 0; k < a.vl; ++k)
        for (std::size_t s = 0; s < 2; ++s)
            for (std::size_t kp = 0; kp < a.vr; ++kp) {
                Complex v = a.at(k, s, kp);
                if (v == Complex{}) continue;
                for (std::size_t x = 0; x < nb; ++x)
                    for (std::size_t wr = 0; wr < nw; ++wr)
                        t1[((x * nw + wr) * 2 + s) * a.vl + k] +=
                            v * e.data[(x * nw + wr) * e.nk + kp];
            }
    CVec t2(nb * w.wl * 2 * a.vl, Complex{});
    for (std::size_t x = 0; x < nb; ++x)
        for (std::size_t wr = 0; wr < w.wr; ++wr)
            for (std::size_t s = 0; s < 2; ++s)
                for (std::size_t k = 0; k < a.vl; ++k) {
                    Complex v = t1[((x * nw + wr) * 2 + s) * a.vl + k];
                    if (v == Complex{}) continue;
                    for (std::size_t wl = 0; wl < w.wl; ++wl)
                        for (std::size_t sp = 0; sp < 2; ++sp) {
                            Complex c = w.at(wl, wr, sp, s);
                            if (c == Complex{}) continue;
                            t2[((x * w.wl + wl) * 2 + sp) * a.vl + k] += c * v;
                        }
                }
    Env out;
    out.nb = a.vl;
    out.nw = w.wl;
    out.nk = a.vl;
    out.data.assign(out.nb * out.nw * out.nk, Complex{});
    for (std::size_t b = 0; b < a.vl; ++b)
        for (std::size_t sp = 0; sp < 2; ++sp)
            for (std::size_t x = 0; x < a.vr; ++x) {
                Complex av = std::conj(a.at(b, sp, x));
                if (av == Complex{}) continue;
                for (std::size_t wl = 0; wl < w.wl; ++wl)
                    for (std::size_t k = 0; k < a.vl; ++k)
                        out.data[(b * out.nw + wl) * out.nk + k] +=
                            av * t2[((x * w.wl + wl) * 2 + sp) * a.vl + k];
            }
    return out;
}

struct EffectiveH {
    const Env* le;
    const Env* re;
    const MpoTensor* w1;
    const MpoTensor* w2;
    std::size_t a, b;

    std::size_t dim() const { return a * 4 * b; }

    void apply(const Complex* x, Complex* y) const {
        std::size_t nw0 = le->nw;
        CVec lep(nw0 * a * a);
        for (std::size_t w0 = 0; w0 < nw0; ++w0)
            for (std::size_t ap = 0; ap < a; ++ap)
                for (std::size_t aa = 0; aa < a; ++aa)
                    lep[(w0 * a + ap) * a + aa] = le->data[(ap * nw0 + w0) * le->nk + aa];
        CVec t1(nw0 * a * 4 * b);
        {
            Eigen::Map<const MatrixXcdR> ml(lep.data(), nw0 * a, a);
            Eigen::Map<const MatrixXcdR> mx(x, a, 4 * b);
            Eigen::Map<MatrixXcdR> mt(t1.data(), nw0 * a, 4 * b);
            mt.noalias() = ml * mx;
        }
        CVec t1r(nw0 * 2 * a * 2 * b);
        for (std::size_t w0 = 0; w0 < nw0; ++w0)
            for (std::size_t ap = 0; ap < a; ++ap)
                for (std::size_t s1 = 0; s1 < 2; ++s1)
                    for (std::size_t s2 = 0; s2 < 2; ++s2)
                        for (std::size_t bb = 0; bb < b; ++bb)
                            t1r[(w0 * 2 + s1) * (a * 2 * b) + (ap * 2 + s2) * b + bb] =
                                t1[(w0 * a + ap) * (4 * b) + (s1 * 2 + s2) * b + bb];
        std::size_t nw1 = w1->wr;
        CVec w1p(nw1 * 2 * nw0 * 2, Complex{});
        for (std::size_t p = 0; p < nw0; ++p)
            for (std::size_t q = 0; q < nw1; ++q)
                for (std::size_t sp = 0; sp < 2; ++sp)
                    for (std::size_t s = 0; s < 2; ++s)
                        w1p[(q * 2 + sp) * (nw0 * 2) + p * 2 + s] = w1->at(p, q, sp, s);
        CVec t2(nw1 * 2 * a * 2 * b);
        {
            Eigen::Map<const MatrixXcdR> mw(w1p.data(), nw1 * 2, nw0 * 2);
            Eigen::Map<const MatrixXcdR> mt(t1r.data(), nw0 * 2, a * 2 * b);
            Eigen::Map<MatrixXcdR> mo(t2.data(), nw1 * 2, a * 2 * b);
            mo.noalias() = mw * mt;
        }
        CVec t2r(nw1 * 2 * a * 2 * b);
        for (std::size_t q = 0; q < nw1; ++q)
            for (std::size_t s1p = 0; s1p < 2; ++s1p)
                for (std::size_t ap = 0; ap < a; ++ap)
                    for (std::size_t s2 = 0; s2 < 2; ++s2)
                        for (std::size_t bb = 0; bb < b; ++bb)
                            t2r[(q * 2 + s2) * (a * 2 * b) + (ap * 2 + s1p) * b + bb] =
                                t2[(q * 2 + s1p) * (a * 2 * b) + (ap * 2 + s2) * b + bb];
        std::size_t nw2w = w2->wr;
        CVec w2p(nw2w * 2 * nw1 * 2, Complex{});
        for (std::size_t p = 0; p < nw1; ++p)
            for (std::size_t q = 0; q < nw2w; ++q)
                for (std::size_t sp = 0; sp < 2; ++sp)
                    for (std::size_t s = 0; s < 2; ++s)
                        w2p[(q * 2 + sp) * (nw1 * 2) + p * 2 + s] = w2->at(p, q, sp, s);
        CVec t3(nw2w * 2 * a * 2 * b);
        {
            Eigen::Map<const MatrixXcdR> mw(w2p.data(), nw2w * 2, nw1 * 2);
            Eigen::Map<const MatrixXcdR> mt(t2r.data(), nw1 * 2, a * 2 * b);
            Eigen::Map<MatrixXcdR> mo(t3.data(), nw2w * 2, a * 2 * b);
            mo.noalias() = mw * mt;
        }
        CVec t3r(a * 2 * 2 * nw2w * b);
        for (std::size_t q = 0; q < nw2w; ++q)
            for (std::size_t s2p = 0; s2p < 2; ++s2p)
                for (std::size_t ap = 0; ap < a; ++ap)
                    for (std::size_t s1p = 0; s1p < 2; ++s1p)
                        for (std::size_t bb = 0; bb < b; ++bb)
                            t3r[((ap * 2 + s1p) * 2 + s2p) * (nw2w * b) + q * b + bb] =
                                t3[(q * 2 + s2p) * (a * 2 * b) + (ap * 2 + s1p) * b + bb];
        CVec rep(nw2w * b * b);
        for (std::size_t q = 0; q < nw2w; ++q)
            for (std::size_t bb = 0; bb < b; ++bb)
                for (std::size_t bp = 0; bp < b; ++bp)
                    rep[(q * b + bb) * b + bp] = re->data[(bp * nw2w + q) * re->nk + bb];
        Eigen::Map<const MatrixXcdR> mt(t3r.data(), a * 4, nw2w * b);
        Eigen::Map<const MatrixXcdR> mr(rep.data(), nw2w * b, b);
        Eigen::Map<MatrixXcdR> my(y, a * 4, b);
        my.noalias() += mt * mr;
    }
};

} // namespace

DmrgResult dmrg_ground_state(const Mpo& h, const DmrgOptions& opt, bool compute_variance) {
    if (opt.chi_max < 2) throw std::invalid_argument("dmrg: chi_max must be >= 2");
    if (opt.sweeps < 1) throw std::invalid_argument("dmrg: sweeps must be >= 1");
    const std::size_t L = h.length();
    if (L < 2) throw std::invalid_argument("dmrg: need L >= 2");

    DmrgResult out;
    Mps m = random_product_mps(L, opt.seed);
    canonicalize(m, 1);

    std::vector<Env> lenv(L), renv(L);
    for (std::size_t i = L - 1; i >= 1; --i)
        renv[i - 1] = absorb_right(renv[i], m.sites[i], h.sites[i]);

    double energy = 0.0;
    double last_sweep_energy = 0.0;
    bool have_last = false;

    double tol_scale = 1.0;
    auto local_solve = [&](std::size_t i, double tol) {
        std::size_t a = m.sites[i].vl, b = m.sites[i + 1].vr;
        EffectiveH heff{&lenv[i], &renv[i + 1], &h.sites[i], &h.sites[i + 1], a, b};
        CVec theta = merge_two(m, i);
        auto mv = [&](const Complex* x, Complex* y) { heff.apply(x, y); };
        int block = static_cast<int>(std::min<std::size_t>(heff.dim(), tol < 1e-7 ? 16 : 10));
        auto res = detail::lanczos_lowest(mv, heff.dim(), theta, block, 2, tol * tol_scale, 2);
        energy = res.value;
        return res.vec;
    };

    for (std::size_t sweep = 0; sweep < opt.sweeps; ++sweep) {
        // grow the bond dimension gradually; loose local solves early on
        std::size_t chi_s = std::min<std::size_t>(opt.chi_max, std::size_t{32} << sweep);
        bool final_phase = (chi_s == opt.chi_max) || sweep + 2 >= opt.sweeps;
        double tol = final_phase ? 1e-9 : 1e-5;
        for (std::size_t i = 0; i + 1 < L; ++i) {
            CVec theta = local_solve(i, tol);
            split_theta(m, i, theta, m.sites[i].vl, m.sites[i + 1].vr, chi_s, opt.cutoff, +1);
            lenv[i + 1] = absorb_left(lenv[i], m.sites[i], h.sites[i]);
        }
        out.half_sweep_energies.push_back(energy);
        tol_scale = 1.0 + std::abs(energy);
        for (std::size_t i = L - 1; i >= 1; --i) {
            CVec theta = local_solve(i - 1, tol);
            split_theta(m, i - 1, theta, m.sites[i - 1].vl, m.sites[i].vr, chi_s, opt.cutoff,
                        -1);
            renv[i - 1] = absorb_right(renv[i], m.sites[i], h.sites[i]);
        }
        out.half_sweep_energies.push_back(energy);
        if (!final_phase) { last_sweep_energy = energy; have_last = true; continue; }
        if (have_last && std::abs(energy - last_sweep_energy) < opt.energy_tol) {
            out.converged = true;
            break;
        }
        last_sweep_energy = energy;
        have_last = true;
    }

    canonicalize(m, 1, opt.chi_max, opt.cutoff);
    out.mps = std::move(m);
    out.energy = energy;
    if (compute_variance) out.energy_variance = mpo_variance(out.mps, h);
    return out;
}

Complex overlap(const Mps& a, const Mps& b) {
    if (a.length() != b.length()) throw std::invalid_argument("overlap: length mismatch");
    MatrixXcdR e = MatrixXcdR::Ones(1, 1); // [bra(a), ket(b)]
    for (std::size_t i = 0; i < a.length(); ++i) {
        const auto& ta = a.sites[i];
        const auto& tb = b.sites[i];
        if (ta.d != tb.d) throw std::invalid_argument("overlap: physical dim mismatch");
        Eigen::Map<const MatrixXcdR> mb(tb.data.data(), tb.vl, tb.d * tb.vr);
        MatrixXcdR t = e * mb;
        MatrixXcdR tr(ta.vl * ta.d, tb.vr);
        for (std::size_t x = 0; x < ta.vl; ++x)
            for (std::size_t s = 0; s < ta.d; ++s)
                for (std::size_t y = 0; y < tb.vr; ++y) tr(x * ta.d + s, y) = t(x, s * tb.vr + y);
        Eigen::Map<const MatrixXcdR> ma(ta.data.data(), ta.vl * ta.d, ta.vr);
        e = ma.adjoint() * tr;
    }
    return e(0, 0);
}

double mpo_expectation(const Mps& m, const Mpo& op) {
    Env e;
    for (std::size_t i = 0; i < m.length(); ++i) e = absorb_left(e, m.sites[i], op.sites[i]);
    return e.data[0].real();
}

double mpo_variance(const Mps& m, const Mpo& op) {
    std::size_t L = m.length();
    struct Env2 {
        std::size_t nb = 1, n1 = 1, n2 = 1, nk = 1;
        CVec data{Complex{1.0, 0.0}};
    } e;
    for (std::size_t i = 0; i < L; ++i) {
        const auto& a = m.sites[i];
        const auto& w = op.sites[i];
        Env2 o;
        o.nb = a.vr;
        o.n1 = w.wr;
        o.n2 = w.wr;
        o.nk = a.vr;
        o.data.assign(o.nb * o.n1 * o.n2 * o.nk, Complex{});
        CVec t1(e.nb * e.n1 * e.n2 * 2 * a.vr, Complex{});
        {
            Eigen::Map<const MatrixXcdR> me(e.data.data(), e.nb * e.n1 * e.n2, e.nk);
            Eigen::Map<const MatrixXcdR> ma(a.data.data(), a.vl, 2 * a.vr);
            Eigen::Map<MatrixXcdR> mt(t1.data(), e.nb * e.n1 * e.n2, 2 * a.vr);
            mt.noalias() = me * ma;
        }
        CVec t2(e.nb * e.n1 * w.wr * 2 * a.vr, Complex{});
        for (std::size_t x = 0; x < e.nb * e.n1; ++x)
            for (std::size_t w2 = 0; w2 < e.n2; ++w2)
                for (std::size_t s = 0; s < 2; ++s)
                    for (std::size_t k = 0; k < a.vr; ++k) {
                        Complex v = t1[((x * e.n2 + w2) * 2 + s) * a.vr + k];
                        if (v == Complex{}) continue;
                        for (std::size_t w2p = 0; w2p < w.wr; ++w2p)
                            for (std::size_t sp = 0; sp < 2; ++sp) {
                                Complex c = w.at(w2, w2p, sp, s);
                                if (c == Complex{}) continue;
                                t2[((x * w.wr + w2p) * 2 + sp) * a.vr + k] += c * v;
                            }
                    }
        CVec t3(e.nb * w.wr * w.wr * 2 * a.vr, Complex{});
        for (std::size_t xb = 0; xb < e.nb; ++xb)
            for (std::size_t w1 = 0; w1 < e.n1; ++w1)
                for (std::size_t w2p = 0; w2p < w.wr; ++w2p)
                    for (std::size_t s = 0; s < 2; ++s)
                        for (std::size_t k = 0; k < a.vr; ++k) {
                            Complex v = t2[((((xb * e.n1 + w1) * w.wr) + w2p) * 2 + s) * a.vr + k];
                            if (v == Complex{}) continue;
                            for (std::size_t w1p = 0; w1p < w.wr; ++w1p)
                                for (std::size_t sp = 0; sp < 2; ++sp) {
                                    Complex c = w.at(w1, w1p, sp, s);
                                    if (c == Complex{}) continue;
                                    t3[((((xb * w.wr + w1p) * w.wr) + w2p) * 2 + sp) * a.vr + k] +=
                                        c * v;
                                }
                        }
        for (std::size_t xb = 0; xb < a.vl; ++xb)
            for (std::size_t sp = 0; sp < 2; ++sp)
                for (std::size_t bp = 0; bp < a.vr; ++bp) {
                    Complex av = std::conj(a.at(xb, sp, bp));
                    if (av == Complex{}) continue;
                    for (std::size_t w1p = 0; w1p < w.wr; ++w1p)
                        for (std::size_t w2p = 0; w2p < w.wr; ++w2p)
                            for (std::size_t k = 0; k < a.vr; ++k)
                                o.data[(((bp * w.wr + w1p) * w.wr) + w2p) * a.vr + k] +=
                                    av * t3[((((xb * w.wr + w1p) * w.wr) + w2p) * 2 + sp) * a.vr + k];
                }
        e = std::move(o);
    }
    double h2 = e.data[0].real();
    double h1 = mpo_expectation(m, op);
    return h2 - h1 * h1;
}

Mps apply_two_site_gate(const Mps& mps, std::size_t i, const std::vector<Complex>& u,
                        std::size_t chi_max, double cutoff) {
    check_site(mps, i);
    check_site(mps, i + 1);
    if (u.size() != 16) throw std::invalid_argument("two-site gate must be 4x4");
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            Complex acc{};
            for (std::size_t k = 0; k < 4; ++k) acc += std::conj(u[k * 4 + r]) * u[k * 4 + c];
            if (std::abs(acc - (r == c ? Complex{1} : Complex{0})) > 1e-10)
                throw std::invalid_argument("two-site gate is not unitary");
        }
    if (mps.center != static_cast<int>(i) && mps.center != static_cast<int>(i + 1))
        throw std::invalid_argument("apply_two_site_gate: center must be at i or i+1");

    Mps m = mps;
    std::size_t i0 = i - 1;
    CVec theta = merge_two(m, i0);
    std::size_t a = m.sites[i0].vl, b = m.sites[i0 + 1].vr;
    CVec tout(theta.size(), Complex{});
    for (std::size_t x = 0; x < a; ++x)
        for (std::size_t so = 0; so < 4; ++so) {
            for (std::size_t si = 0; si < 4; ++si) {
                Complex g = u[so * 4 + si];
                if (g == Complex{}) continue;
                for (std::size_t bb = 0; bb < b; ++bb)
                    tout[(x * 4 + so) * b + bb] += g * theta[(x * 4 + si) * b + bb];
            }
        }
    split_theta(m, i0, tout, a, b, chi_max, cutoff, -1);
    return m;
}

double renyi2_across_bond(const Mps& m, std::size_t b) {
    if (b < 1 || b >= m.length()) throw std::invalid_argument("bond index out of range");
    if (m.center != static_cast<int>(b) && m.center != static_cast<int>(b + 1))
        throw std::invalid_argument("renyi2: center must be adjacent to the bond");
    if (m.schmidt.size() < m.length() - 1 || m.schmidt[b - 1].empty())
        throw std::invalid_argument("renyi2: Schmidt values unavailable at this bond");
    double p2 = 0, p4 = 0;
    for (double lam : m.schmidt[b - 1]) {
        p2 += lam * lam;
        p4 += lam * lam * lam * lam;
    }
    double purity = p4 / (p2 * p2);
    return std::max(0.0, -std::log(purity));
}

CorrelationProfile mps_observables(const Mps& m, std::size_t anchor, Basis basis) {
    check_site(m, anchor);
    const std::size_t L = m.length();
    std::array<Complex, 4> O;
    if (basis == Basis::X)
        O = {Complex{0}, Complex{1}, Complex{1}, Complex{0}};
    else
        O = {Complex{1}, Complex{0}, Complex{0}, Complex{-1}};

    std::vector<MatrixXcdR> el(L + 1), er(L + 1);
    el[0] = MatrixXcdR::Ones(1, 1);
    auto advance = [&](std::size_t i, const MatrixXcdR& env, const Complex* op) {
        // env'[x', k'] = sum conj(t[x,so,x']) op[so,si] t[k,si,k'] env[x,k]
        const auto& t = m.sites[i];
        MatrixXcdR o = MatrixXcdR::Zero(t.vr, t.vr);
        for (std::size_t so = 0; so < 2; ++so)
            for (std::size_t si = 0; si < 2; ++si) {
                Complex c = op ? op[so * 2 + si] : (so == si ? Complex{1} : Complex{0});
                if (c == Complex{}) continue;
                MatrixXcdR ab(t.vl, t.vr), ak(t.vl, t.vr);
                for (std::size_t x = 0; x < t.vl; ++x)
                    for (std::size_t y = 0; y < t.vr; ++y) {
                        ab(x, y) = t.at(x, so, y);
                        ak(x, y) = t.at(x, si, y);
                    }
                o += c * (ab.adjoint() * env * ak);
            }
        return o;
    };
    for (std::size_t i = 0; i < L; ++i) el[i + 1] = advance(i, el[i], nullptr);
    er[L] = MatrixXcdR::Ones(1, 1);
    for (std::size_t i = L; i >= 1; --i) {
        const auto& t = m.sites[i - 1];
        MatrixXcdR o = MatrixXcdR::Zero(t.vl, t.vl);
        for (std::size_t s = 0; s < 2; ++s) {
            MatrixXcdR av(t.vl, t.vr);
            for (std::size_t x = 0; x < t.vl; ++x)
                for (std::size_t y = 0; y < t.vr; ++y) av(x, y) = t.at(x, s, y);
            o += av.conjugate() * er[i] * av.transpose();
        }
        er[i - 1] = o;
    }
    double nrm = el[L](0, 0).real();
    if (std::abs(nrm - 1.0) > 1e-8)
        throw std::invalid_argument("mps_observables: state not normalized");

    auto close_with = [&](std::size_t i, const MatrixXcdR& env, const Complex* op) {
        MatrixXcdR v = advance(i, env, op);
        return v.cwiseProduct(er[i + 1].transpose()).sum().real();
    };

    CorrelationProfile p;
    p.anchor = anchor;
    p.onsite.resize(L);
    for (std::size_t j = 0; j < L; ++j) p.onsite[j] = close_with(j, el[j], O.data());
    p.connected.resize(L - anchor);
    MatrixXcdR env = advance(anchor - 1, el[anchor - 1], O.data());
    for (std::size_t j = anchor; j < L; ++j) {
        double oij = close_with(j, env, O.data());
        p.connected[j - anchor] = oij - p.onsite[anchor - 1] * p.onsite[j];
        env = advance(j, env, nullptr);
    }
    return p;
}

Tensor mps_dense_state(const Mps& m) {
    const std::size_t L = m.length();
    if (L > 24) throw std::invalid_argument("mps_dense_state limited to L <= 24");
    CVec cur{Complex{1.0, 0.0}};
    std::size_t pref = 1, vr = 1;
    for (std::size_t i = 0; i < L; ++i) {
        const auto& t = m.sites[i];
        CVec nxt(pref * t.d * t.vr);
        Eigen::Map<const MatrixXcdR> mc(cur.data(), pref, vr);
        Eigen::Map<const MatrixXcdR> mt(t.data.data(), t.vl, t.d * t.vr);
        Eigen::Map<MatrixXcdR> mn(nxt.data(), pref, t.d * t.vr);
        mn.noalias() = mc * mt;
        cur = std::move(nxt);
        pref *= t.d;
        vr = t.vr;
    }
    return Tensor({pref}, {"amp"}, std::move(cur));
}

Mps mps_from_dense(const Tensor& state, std::size_t length, std::size_t chi_max, double cutoff) {
    if (state.size() != (std::size_t{1} << length))
        throw std::invalid_argument("mps_from_dense: size mismatch");
    Mps m;
    m.sites.resize(length);
    CVec rest = state.data;
    std::size_t rows_left = 1;
    std::size_t cols = state.size();
    for (std::size_t i = 0; i + 1 < length; ++i) {
        std::size_t mrows = rows_left * 2;
        std::size_t ncols = cols / 2;
        auto svd = detail::svd_rowmajor(rest.data(), mrows, ncols);
        std::size_t keep = detail::svd_rank(svd.s, chi_max, cutoff);
        MpsTensor t(rows_left, 2, keep);
        for (std::size_t r = 0; r < mrows; ++r)
            for (std::size_t k = 0; k < keep; ++k) t.data[r * keep + k] = svd.u(r, k);
        m.sites[i] = std::move(t);
        CVec nxt(keep * ncols);
        for (std::size_t k = 0; k < keep; ++k)
            for (std::size_t c = 0; c < ncols; ++c) nxt[k * ncols + c] = svd.s(k) * svd.vh(k, c);
        rest = std::move(nxt);
        rows_left = keep;
        cols = ncols;
    }
    MpsTensor last(rows_left, 2, 1);
    last.data = rest;
    m.sites[length - 1] = std::move(last);
    m.center = static_cast<int>(length);
    canonicalize(m, 1, chi_max, cutoff);
    return m;
}

void save_mps(const Mps& m, const std::string& path, const std::string& extra_manifest) {
    nlohmann::json manifest;
    manifest["type"] = "mps";
    manifest["version"] = 1;
    manifest["length"] = m.length();
    manifest["center"] = m.center;
    manifest["chi"] = m.max_bond_dim();
    manifest["dims"] = nlohmann::json::array();
    for (const auto& t : m.sites) manifest["dims"].push_back({t.vl, t.d, t.vr});
    manifest["schmidt_sizes"] = nlohmann::json::array();
    for (const auto& s : m.schmidt) manifest["schmidt_sizes"].push_back(s.size());
    manifest["extra"] = nlohmann::json::parse(extra_manifest);

    std::vector<double> payload;
    for (const auto& t : m.sites)
        for (const auto& z : t.data) {
            payload.push_back(z.real());
            payload.push_back(z.imag());
        }
    for (const auto& s : m.schmidt)
        for (double v : s) payload.push_back(v);
    write_blob_file(path, manifest, payload);
}

Mps load_mps(const std::string& path, std::string* manifest_out) {
    auto [manifest, payload] = read_blob_file(path);
    if (manifest.at("type") != "mps") throw std::runtime_error("not an MPS file: " + path);
    Mps m;
    std::size_t L = manifest.at("length");
    m.center = manifest.at("center");
    m.sites.resize(L);
    std::size_t off = 0;
    for (std::size_t i = 0; i < L; ++i) {
        auto d = manifest.at("dims").at(i);
        MpsTensor t(d.at(0), d.at(1), d.at(2));
        for (auto& z : t.data) {
            z = Complex(payload.at(off), payload.at(off + 1));
            off += 2;
        }
        m.sites[i] = std::move(t);
    }
    m.schmidt.clear();
    for (std::size_t b = 0; b + 1 < L; ++b) {
        std::size_t n = manifest.at("schmidt_sizes").at(b);
        std::vector<double> s(n);
        for (auto& v : s) v = payload.at(off++);
        m.schmidt.push_back(std::move(s));
    }
    if (manifest_out) *manifest_out = manifest.at("extra").dump();
    return m;
}

} // namespace holomera
