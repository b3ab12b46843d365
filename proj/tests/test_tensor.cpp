#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "holomera/rng.hpp"
#include "holomera/tensor.hpp"

using namespace holomera;

namespace {

// Independent nested-loop contraction: sums over every paired index
// combination with direct element access. Slow but obviously correct.
Tensor loop_contract(const Tensor& a, const Tensor& b,
                     const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<std::size_t> a_con, b_con;
    for (auto& [la, lb] : pairs) {
        a_con.push_back(a.axis_of(la));
        b_con.push_back(b.axis_of(lb));
    }
    std::vector<std::size_t> a_free, b_free;
    for (std::size_t k = 0; k < a.rank(); ++k)
        if (std::find(a_con.begin(), a_con.end(), k) == a_con.end()) a_free.push_back(k);
    for (std::size_t k = 0; k < b.rank(); ++k)
        if (std::find(b_con.begin(), b_con.end(), k) == b_con.end()) b_free.push_back(k);

    std::vector<std::size_t> out_shape;
    std::vector<std::string> out_labels;
    for (auto k : a_free) { out_shape.push_back(a.shape[k]); out_labels.push_back(a.labels[k]); }
    for (auto k : b_free) { out_shape.push_back(b.shape[k]); out_labels.push_back(b.labels[k]); }
    Tensor out(out_shape, out_labels);

    std::size_t csize = 1;
    for (auto k : a_con) csize *= a.shape[k];

    std::vector<std::size_t> oidx(out_shape.size(), 0);
    for (std::size_t lin = 0; lin < out.size(); ++lin) {
        Complex acc{0.0, 0.0};
        for (std::size_t c = 0; c < csize; ++c) {
            std::vector<std::size_t> ai(a.rank()), bi(b.rank());
            for (std::size_t k = 0; k < a_free.size(); ++k) ai[a_free[k]] = oidx[k];
            for (std::size_t k = 0; k < b_free.size(); ++k) bi[b_free[k]] = oidx[a_free.size() + k];
            std::size_t rem = c;
            for (std::size_t k = a_con.size(); k-- > 0;) {
                std::size_t d = a.shape[a_con[k]];
                ai[a_con[k]] = rem % d;
                bi[b_con[k]] = rem % d;
                rem /= d;
            }
            acc += a.at(ai) * b.at(bi);
        }
        out.data[lin] = acc;
        for (std::size_t k = out_shape.size(); k-- > 0;) {
            if (++oidx[k] < out_shape[k]) break;
            oidx[k] = 0;
        }
    }
    return out;
}

Tensor random_tensor(std::vector<std::size_t> shape, std::vector<std::string> labels,
                     std::uint64_t seed) {
    Tensor t(shape, labels);
    RngStream rng(seed);
    for (auto& z : t.data) z = Complex(rng.next_gaussian(), rng.next_gaussian());
    return t;
}

bool is_isometry_over(const Tensor& w, const std::vector<std::string>& rows, double tol = 1e-12) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (auto& l : rows) pairs.emplace_back(l, l);
    Tensor wc = w.conjugated();
    // relabel the column legs of the conjugate so the product is W^dag W
    std::vector<std::string> newlab = wc.labels;
    for (auto& l : newlab)
        if (std::find(rows.begin(), rows.end(), l) == rows.end()) l = l + "'";
    wc = wc.relabeled(newlab);
    Tensor g = contract(wc, w, pairs);
    std::size_t d = 1;
    for (std::size_t k = 0; k < g.rank() / 2; ++k) d *= g.shape[k];
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            Complex want = (i == j) ? 1.0 : 0.0;
            if (std::abs(g.data[i * d + j] - want) > tol) return false;
        }
    return true;
}

} // namespace

TEST_CASE("contract identity on a vector returns the vector") {
    Tensor id = identity_tensor(2, "o", "i");
    Tensor v({2}, {"i"}, {{0.3, 0.1}, {-0.7, 2.0}});
    Tensor r = contract(id, v, {{"i", "i"}});
    CHECK(r.shape == std::vector<std::size_t>{2});
    CHECK(std::abs(r.data[0] - v.data[0]) < 1e-15);
    CHECK(std::abs(r.data[1] - v.data[1]) < 1e-15);
}

TEST_CASE("full contraction of two 2x2 matrices matches elementwise loop") {
    Tensor a = random_tensor({2, 2}, {"r", "c"}, 11);
    Tensor b = random_tensor({2, 2}, {"r", "c"}, 12);
    Tensor s = contract(a, b, {{"r", "r"}, {"c", "c"}});
    REQUIRE(s.rank() == 0);
    Complex want{0.0, 0.0};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) want += a.at({i, j}) * b.at({i, j});
    CHECK(std::abs(s.data[0] - want) < 1e-13);
}

TEST_CASE("contracting two rank-3 tensors over one leg matches a 4-fold loop") {
    Tensor a = random_tensor({2, 2, 2}, {"x", "y", "z"}, 21);
    Tensor b = random_tensor({2, 2, 2}, {"u", "v", "w"}, 22);
    Tensor r = contract(a, b, {{"z", "u"}});
    Tensor want = loop_contract(a, b, {{"z", "u"}});
    CHECK(allclose(r, want, 1e-13));
}

TEST_CASE("contract agrees with the loop oracle on assorted small shapes") {
    struct Case {
        std::vector<std::size_t> sa, sb;
        std::vector<std::string> la, lb;
        std::vector<std::pair<std::string, std::string>> pairs;
    };
    std::vector<Case> cases = {
        {{2, 3}, {3, 2}, {"a", "b"}, {"c", "d"}, {{"b", "c"}}},
        {{4, 2, 2}, {2, 4}, {"a", "b", "c"}, {"p", "q"}, {{"c", "p"}, {"a", "q"}}},
        {{2, 2, 2, 2}, {2, 2}, {"a", "b", "c", "d"}, {"x", "y"}, {{"b", "x"}}},
        {{8}, {8, 2}, {"m"}, {"m2", "k"}, {{"m", "m2"}}},
    };
    std::uint64_t seed = 100;
    for (auto& c : cases) {
        Tensor a = random_tensor(c.sa, c.la, seed++);
        Tensor b = random_tensor(c.sb, c.lb, seed++);
        CHECK(allclose(contract(a, b, c.pairs), loop_contract(a, b, c.pairs), 1e-12));
    }
}

TEST_CASE("contract is bilinear") {
    Tensor a1 = random_tensor({2, 3}, {"a", "b"}, 31);
    Tensor a2 = random_tensor({2, 3}, {"a", "b"}, 32);
    Tensor b = random_tensor({3, 2}, {"c", "d"}, 33);
    Complex alpha{0.7, -0.4};
    Tensor sum = a1;
    for (std::size_t i = 0; i < sum.data.size(); ++i)
        sum.data[i] = a1.data[i] + alpha * a2.data[i];
    Tensor lhs = contract(sum, b, {{"b", "c"}});
    Tensor r1 = contract(a1, b, {{"b", "c"}});
    Tensor r2 = contract(a2, b, {{"b", "c"}});
    for (std::size_t i = 0; i < lhs.data.size(); ++i)
        CHECK(std::abs(lhs.data[i] - (r1.data[i] + alpha * r2.data[i])) < 1e-12);
}

TEST_CASE("contract rejects mismatched dimensions and unknown labels") {
    Tensor a = random_tensor({2, 3}, {"a", "b"}, 41);
    Tensor b = random_tensor({2, 2}, {"c", "d"}, 42);
    CHECK_THROWS_AS(contract(a, b, {{"b", "c"}}), std::invalid_argument);
    CHECK_THROWS_AS(contract(a, b, {{"nope", "c"}}), std::invalid_argument);
}

TEST_CASE("svd_split of a rank-1 product tensor has one singular value") {
    Tensor u = random_tensor({2}, {"a"}, 51);
    Tensor v = random_tensor({3}, {"b"}, 52);
    Tensor t({2, 3}, {"a", "b"});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 3; ++j) t.at({i, j}) = u.at({i}) * v.at({j});
    auto f = svd_split(t, {"a"});
    REQUIRE(f.singular_values.size() >= 1);
    CHECK(f.truncation_error == 0.0);
    for (std::size_t k = 1; k < f.singular_values.size(); ++k)
        CHECK(f.singular_values[k] < 1e-13);
}

TEST_CASE("svd_split of the reshaped 4x4 identity across the site cut") {
    Tensor t({2, 2, 2, 2}, {"o1", "o2", "i1", "i2"});
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) t.at({a, b, a, b}) = 1.0;
    // I (x) I is a product operator across the (site 1 | site 2) cut: one
    // Schmidt value sqrt2*sqrt2 = 2, factors proportional to identities.
    auto f = svd_split(t, {"o1", "i1"}, kNoRankLimit, 1e-14);
    REQUIRE(f.singular_values.size() == 1);
    CHECK(f.singular_values[0] == doctest::Approx(2.0).epsilon(1e-12));
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            Complex want = (a == b) ? 1.0 / std::sqrt(2.0) : 0.0;
            CHECK(std::abs(f.left.at({a, b, 0}) - want) < 1e-12);
            CHECK(std::abs(std::abs(f.right.at({0, a, b})) - std::abs(want)) < 1e-12);
        }
    Tensor mid({1, 1}, {"s", "s'"});
    mid.at({0, 0}) = f.singular_values[0];
    Tensor rec = contract(contract(f.left, mid, {{"s", "s"}}), f.right.relabeled({"s'", "o2", "i2"}),
                          {{"s'", "s'"}});
    CHECK(allclose(rec.permuted({"o1", "o2", "i1", "i2"}), t, 1e-12));
}

TEST_CASE("svd_split truncation error matches full-rank reference") {
    Tensor t = random_tensor({2, 2, 2, 2}, {"a", "b", "c", "d"}, 61);
    auto full = svd_split(t, {"a", "b"});
    auto trunc = svd_split(t, {"a", "b"}, 2);
    double want = 0.0;
    for (std::size_t k = 2; k < full.singular_values.size(); ++k)
        want += full.singular_values[k] * full.singular_values[k];
    CHECK(trunc.truncation_error == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("svd_split with no truncation reconstructs the input") {
    Tensor t = random_tensor({3, 2, 4}, {"a", "b", "c"}, 71);
    auto f = svd_split(t, {"a", "b"});
    Tensor mid({f.singular_values.size(), f.singular_values.size()}, {"s", "s'"});
    for (std::size_t k = 0; k < f.singular_values.size(); ++k)
        mid.at({k, k}) = f.singular_values[k];
    Tensor rec = contract(contract(f.left, mid, {{"s", "s"}}),
                          f.right.relabeled({"s'", "c"}), {{"s'", "s'"}});
    CHECK(allclose(rec.permuted({"a", "b", "c"}), t, 1e-12));
    CHECK(is_isometry_over(f.left, {"a", "b"}));
}

TEST_CASE("polar_isometry of a unitary returns it") {
    Tensor u = random_unitary(4, 81);
    Tensor w = polar_isometry(u, {"out"});
    CHECK(allclose(w, u, 1e-12));
}

TEST_CASE("polar_isometry of a positive diagonal is the identity") {
    Tensor m({2, 2}, {"r", "c"});
    m.at({0, 0}) = 2.0;
    m.at({1, 1}) = 3.0;
    Tensor w = polar_isometry(m, {"r"});
    CHECK(allclose(w, identity_tensor(2, "r", "c"), 1e-12));
}

TEST_CASE("polar_isometry maximizes Re tr(W^dag m) over random unitaries") {
    Tensor m = random_tensor({4, 4}, {"r", "c"}, 91);
    Tensor w = polar_isometry(m, {"r"});
    auto score = [&](const Tensor& v) {
        Tensor s = contract(v.conjugated(), m, {{"r", "r"}, {"c", "c"}});
        return s.data[0].real();
    };
    double best = score(w);
    for (std::uint64_t k = 0; k < 10000; ++k) {
        Tensor v = random_unitary(4, 1000 + k, "r", "c");
        CHECK(score(v) <= best + 1e-10);
    }
}

TEST_CASE("polar_isometry is isometric and scale/gauge invariant") {
    Tensor m = random_tensor({6, 3}, {"r", "c"}, 101);
    Tensor w = polar_isometry(m, {"r"});
    CHECK(is_isometry_over(w, {"r"}));

    SUBCASE("positive rescaling of the input leaves the factor unchanged") {
        Tensor m2 = m;
        for (auto& z : m2.data) z *= 3.25;
        CHECK(allclose(polar_isometry(m2, {"r"}), w, 1e-12));
    }
    SUBCASE("isometric input times positive diagonal returns the isometry") {
        Tensor d({3, 3}, {"c", "c2"});
        d.at({0, 0}) = 0.5;
        d.at({1, 1}) = 2.5;
        d.at({2, 2}) = 7.0;
        Tensor wd = contract(w, d, {{"c", "c"}}).relabeled({"r", "c"});
        CHECK(allclose(polar_isometry(wd, {"r"}), w, 1e-10));
    }
}

TEST_CASE("random_unitary contracts") {
    SUBCASE("dim 1 gives a unit-modulus scalar") {
        Tensor u = random_unitary(1, 7);
        CHECK(std::abs(std::abs(u.data[0]) - 1.0) < 1e-12);
    }
    SUBCASE("same seed gives identical matrices") {
        Tensor a = random_unitary(4, 12345);
        Tensor b = random_unitary(4, 12345);
        CHECK(a.data == b.data);
    }
    SUBCASE("unitarity") {
        Tensor u = random_unitary(8, 5);
        CHECK(is_isometry_over(u, {"out"}));
    }
    SUBCASE("Haar first moment of |U00|^2") {
        const int n = 10000;
        double sum = 0.0, sumsq = 0.0;
        for (int k = 0; k < n; ++k) {
            Tensor u = random_unitary(2, 50000 + k);
            double x = std::norm(u.data[0]);
            sum += x;
            sumsq += x * x;
        }
        double mean = sum / n;
        double var = sumsq / n - mean * mean;
        double sigma = std::sqrt(var / n);
        CHECK(std::abs(mean - 0.5) < 3.0 * sigma);
    }
}
