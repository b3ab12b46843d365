#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "holomera/models.hpp"
#include "holomera/mps.hpp"
#include "holomera/rng.hpp"
#include "holomera/tensor.hpp"

using namespace holomera;

namespace {

// dense application of a 4x4 gate to adjacent sites (i, i+1), 1-based,
// site 1 = most significant bit
std::vector<Complex> dense_apply_gate(const std::vector<Complex>& psi, std::size_t L,
                                      std::size_t i, const std::vector<Complex>& u) {
    std::vector<Complex> out(psi.size(), Complex{});
    std::size_t sh1 = L - i, sh2 = L - i - 1;
    for (std::size_t idx = 0; idx < psi.size(); ++idx) {
        std::size_t b1 = (idx >> sh1) & 1, b2 = (idx >> sh2) & 1;
        std::size_t in = b1 * 2 + b2;
        for (std::size_t o = 0; o < 4; ++o) {
            Complex g = u[o * 4 + in];
            if (g == Complex{}) continue;
            std::size_t jdx = idx;
            jdx &= ~((std::size_t{1} << sh1) | (std::size_t{1} << sh2));
            jdx |= ((o >> 1) << sh1) | ((o & 1) << sh2);
            out[jdx] += g * psi[idx];
        }
    }
    return out;
}

Mps random_mps(std::size_t L, std::size_t chi, std::uint64_t seed) {
    RngStream rng(seed);
    Mps m;
    m.sites.resize(L);
    std::size_t vl = 1;
    for (std::size_t i = 0; i < L; ++i) {
        std::size_t vr = (i + 1 == L) ? 1 : std::min(chi, std::min(vl * 2, std::size_t{1} << (L - i - 1)));
        MpsTensor t(vl, 2, vr);
        for (auto& z : t.data) z = Complex(rng.next_gaussian(), rng.next_gaussian());
        m.sites[i] = std::move(t);
        vl = vr;
    }
    m.center = 1;
    canonicalize(m, 1);
    return m;
}

bool check_canonical(const Mps& m) {
    // left of center: left isometries; right of center: right isometries
    for (std::size_t i = 0; i + 1 <= m.length(); ++i) {
        const auto& t = m.sites[i];
        bool left_of = static_cast<int>(i + 1) < m.center;
        bool right_of = static_cast<int>(i + 1) > m.center;
        if (left_of) {
            for (std::size_t x = 0; x < t.vr; ++x)
                for (std::size_t y = 0; y < t.vr; ++y) {
                    Complex acc{};
                    for (std::size_t a = 0; a < t.vl; ++a)
                        for (std::size_t s = 0; s < 2; ++s)
                            acc += std::conj(t.at(a, s, x)) * t.at(a, s, y);
                    if (std::abs(acc - (x == y ? Complex{1} : Complex{0})) > 1e-10) return false;
                }
        } else if (right_of) {
            for (std::size_t x = 0; x < t.vl; ++x)
                for (std::size_t y = 0; y < t.vl; ++y) {
                    Complex acc{};
                    for (std::size_t b = 0; b < t.vr; ++b)
                        for (std::size_t s = 0; s < 2; ++s)
                            acc += std::conj(t.at(x, s, b)) * t.at(y, s, b);
                    if (std::abs(acc - (x == y ? Complex{1} : Complex{0})) > 1e-10) return false;
                }
        }
    }
    return true;
}

} // namespace

TEST_CASE("dmrg on the smallest chain reproduces the 4x4 eigensolve") {
    auto mpo = build_hamiltonian_mpo({2, 0.0});
    auto res = dmrg_ground_state(mpo, {.chi_max = 2, .sweeps = 4, .seed = 3});
    CHECK(res.energy == doctest::Approx(-std::sqrt(5.0)).epsilon(1e-10));
    CHECK(check_canonical(res.mps));
}

TEST_CASE("dmrg matches exact diagonalization at L=12") {
    auto mpo = build_hamiltonian_mpo({12, 0.0});
    auto res = dmrg_ground_state(mpo, {.chi_max = 64, .sweeps = 10, .seed = 1});
    auto ed = exact_ground_state({12, 0.0});
    CHECK(std::abs(res.energy - ed.energy) < 1e-8);
    CHECK(res.converged);
}

TEST_CASE("dmrg energy is non-increasing per half-sweep") {
    auto mpo = build_hamiltonian_mpo({10, 4.0});
    auto res = dmrg_ground_state(mpo, {.chi_max = 32, .sweeps = 8, .seed = 17});
    for (std::size_t k = 1; k < res.half_sweep_energies.size(); ++k)
        CHECK(res.half_sweep_energies[k] <= res.half_sweep_energies[k - 1] + 1e-12);
}

TEST_CASE("dmrg L=32 V=4 chi=256 reaches tiny energy variance") {
    auto mpo = build_hamiltonian_mpo({32, 4.0});
    auto res = dmrg_ground_state(mpo, {.chi_max = 256, .sweeps = 10, .seed = 7}, true);
    CHECK(res.energy_variance >= -1e-9);
    CHECK(res.energy_variance <= 1e-6);
}

TEST_CASE("overlap basics") {
    SUBCASE("self overlap of a normalized state is 1") {
        Mps m = random_mps(6, 4, 11);
        CHECK(std::abs(overlap(m, m) - Complex{1.0}) < 1e-12);
    }
    SUBCASE("orthogonal product states") {
        Mps a = product_mps({{Complex{1}, Complex{0}}, {Complex{1}, Complex{0}}});
        Mps b = product_mps({{Complex{1}, Complex{0}}, {Complex{0}, Complex{1}}});
        CHECK(std::abs(overlap(a, b)) < 1e-14);
    }
    SUBCASE("matches the dense inner product") {
        Mps a = random_mps(6, 4, 21);
        Mps b = random_mps(6, 4, 22);
        auto da = mps_dense_state(a);
        auto db = mps_dense_state(b);
        Complex want{};
        for (std::size_t k = 0; k < da.size(); ++k) want += std::conj(da.data[k]) * db.data[k];
        CHECK(std::abs(overlap(a, b) - want) < 1e-12);
    }
    SUBCASE("conjugate symmetry") {
        Mps a = random_mps(5, 4, 31);
        Mps b = random_mps(5, 4, 32);
        CHECK(std::abs(overlap(a, b) - std::conj(overlap(b, a))) < 1e-12);
    }
}

TEST_CASE("two-site gates") {
    SUBCASE("identity leaves the state unchanged") {
        Mps m = random_mps(4, 4, 41);
        move_center(m, 2);
        std::vector<Complex> id(16, Complex{});
        for (int k = 0; k < 4; ++k) id[k * 4 + k] = 1.0;
        Mps m2 = apply_two_site_gate(m, 2, id);
        CHECK(std::abs(std::abs(overlap(m, m2)) - 1.0) < 1e-12);
    }
    SUBCASE("SWAP exchanges product-state sites") {
        Mps m = product_mps({{Complex{1}, Complex{0}}, {Complex{0}, Complex{1}}});
        std::vector<Complex> sw(16, Complex{});
        sw[0 * 4 + 0] = sw[1 * 4 + 2] = sw[2 * 4 + 1] = sw[3 * 4 + 3] = 1.0;
        Mps m2 = apply_two_site_gate(m, 1, sw);
        auto d = mps_dense_state(m2);
        CHECK(std::abs(d.data[2] - Complex{1.0}) < 1e-12); // |10>
    }
    SUBCASE("random unitary matches the dense oracle at L=4") {
        Mps m = random_mps(4, 8, 51);
        move_center(m, 2);
        Tensor u = random_unitary(4, 99);
        std::vector<Complex> g(u.data.begin(), u.data.end());
        Mps m2 = apply_two_site_gate(m, 2, g);
        auto want = dense_apply_gate(mps_dense_state(m).data, 4, 2, g);
        auto got = mps_dense_state(m2);
        for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::abs(got.data[k] - want[k]) < 1e-12);
        CHECK(std::abs(m2.norm() - 1.0) < 1e-12);
    }
    SUBCASE("non-unitary gates are rejected") {
        Mps m = random_mps(4, 4, 61);
        move_center(m, 1);
        std::vector<Complex> bad(16, Complex{0.1});
        CHECK_THROWS_AS(apply_two_site_gate(m, 1, bad), std::invalid_argument);
    }
}

TEST_CASE("renyi-2 across bonds") {
    SUBCASE("product state has zero entropy") {
        Mps m = product_mps({{Complex{1}, Complex{0}},
                             {Complex{0.6}, Complex{0.8}},
                             {Complex{1}, Complex{1}}});
        canonicalize(m, 2);
        CHECK(renyi2_across_bond(m, 1) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(renyi2_across_bond(m, 2) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("Bell pair bond gives log 2") {
        Tensor bell({4}, {"amp"});
        bell.data[0] = 1.0 / std::sqrt(2.0);
        bell.data[3] = 1.0 / std::sqrt(2.0);
        Mps m = mps_from_dense(bell, 2);
        CHECK(renyi2_across_bond(m, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("random state matches the dense purity oracle") {
        Mps m = random_mps(6, 8, 71);
        const std::size_t cut = 3; // bond between sites 3 and 4
        move_center(m, cut);
        auto d = mps_dense_state(m).data;
        // rho_left[a, a'] = sum_b psi[a,b] conj(psi[a',b]), a = 3 leading bits
        const std::size_t nl = 8, nr = 8;
        std::vector<Complex> rho(nl * nl, Complex{});
        for (std::size_t a = 0; a < nl; ++a)
            for (std::size_t ap = 0; ap < nl; ++ap)
                for (std::size_t b = 0; b < nr; ++b)
                    rho[a * nl + ap] += d[a * nr + b] * std::conj(d[ap * nr + b]);
        double purity = 0;
        for (std::size_t a = 0; a < nl; ++a)
            for (std::size_t ap = 0; ap < nl; ++ap)
                purity += (rho[a * nl + ap] * rho[ap * nl + a]).real();
        CHECK(renyi2_across_bond(m, cut) == doctest::Approx(-std::log(purity)).epsilon(1e-10));
    }
}

TEST_CASE("mps observables") {
    SUBCASE("|0...0> in Z basis") {
        Mps m = product_mps(std::vector<std::array<Complex, 2>>(5, {Complex{1}, Complex{0}}));
        auto p = mps_observables(m, 2, Basis::Z);
        for (double v : p.onsite) CHECK(v == doctest::Approx(1.0));
        for (double v : p.connected) CHECK(std::abs(v) < 1e-14);
    }
    SUBCASE("DMRG state matches statevector observables at L=10") {
        auto mpo = build_hamiltonian_mpo({10, 0.0});
        auto res = dmrg_ground_state(mpo, {.chi_max = 64, .sweeps = 8, .seed = 5});
        auto dense = mps_dense_state(res.mps);
        for (Basis basis : {Basis::X, Basis::Z}) {
            auto pm = mps_observables(res.mps, 3, basis);
            auto pd = statevector_observables(dense, 3, basis);
            for (std::size_t j = 0; j < 10; ++j)
                CHECK(std::abs(pm.onsite[j] - pd.onsite[j]) < 1e-9);
            for (std::size_t r = 0; r < pm.connected.size(); ++r)
                CHECK(std::abs(pm.connected[r] - pd.connected[r]) < 1e-9);
        }
    }
}

TEST_CASE("canonical form holds after public operations") {
    Mps m = random_mps(8, 6, 81);
    CHECK(check_canonical(m));
    move_center(m, 5);
    CHECK(check_canonical(m));
    CHECK(std::abs(m.norm() - 1.0) < 1e-10);
    Tensor u = random_unitary(4, 5);
    Mps m2 = apply_two_site_gate(m, 5, u.data);
    CHECK(check_canonical(m2));
}

TEST_CASE("serialization round-trips bit-exactly") {
    Mps m = random_mps(6, 5, 91);
    move_center(m, 3);
    save_mps(m, "/tmp/holomera_test.mps", R"({"model":{"L":6,"V":0.0},"seed":91})");
    std::string extra;
    Mps r = load_mps("/tmp/holomera_test.mps", &extra);
    REQUIRE(r.length() == m.length());
    CHECK(r.center == m.center);
    for (std::size_t i = 0; i < m.length(); ++i) {
        REQUIRE(r.sites[i].data.size() == m.sites[i].data.size());
        for (std::size_t k = 0; k < m.sites[i].data.size(); ++k)
            CHECK(r.sites[i].data[k] == m.sites[i].data[k]); // exact bits
    }
    for (std::size_t b = 0; b < m.schmidt.size(); ++b) CHECK(r.schmidt[b] == m.schmidt[b]);
    CHECK(extra.find("\"seed\":91") != std::string::npos);
}

TEST_CASE("dense round trip") {
    Mps m = random_mps(6, 6, 101);
    auto d = mps_dense_state(m);
    Mps r = mps_from_dense(d, 6);
    CHECK(std::abs(std::abs(overlap(m, r)) - 1.0) < 1e-10);
}
