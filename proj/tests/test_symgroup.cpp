#include "doctest.h"

#include <algorithm>

#include "equistab/symgroup.hpp"

using namespace equistab;

TEST_CASE("permutation matrix convention") {
    CHECK(permutation_matrix(Perm{}) == Matrix8::Identity());

    // worked example: T e_j = e_{g(j)} for g = (17)(265843), so row 1 has its
    // only 1 in column 7, row 2 in column 3, row 3 in column 4
    const Perm g = Perm::from_cycles("(17)(265843)");
    const Matrix8 m = permutation_matrix(g);
    CHECK(m(0, 6) == 1.0);
    CHECK(m(1, 2) == 1.0);
    CHECK(m(2, 3) == 1.0);
    for (int j = 0; j < 8; ++j) CHECK(m.col(j).sum() == 1.0);

    const Perm r = Perm::from_cycles("(1234)(5678)");
    CHECK(permutation_matrix(r) * permutation_matrix(r) ==
          permutation_matrix(Perm::from_cycles("(13)(24)(57)(68)")));
}

TEST_CASE("cycle parsing") {
    CHECK(Perm::from_cycles("()").is_identity());
    CHECK_THROWS(Perm::from_cycles("(12"));
    CHECK_THROWS(Perm::from_cycles("(19)"));
    CHECK_THROWS(Perm::from_cycles("(11)"));
    CHECK(Perm::from_cycles("(254)(368)").inverse() == Perm::from_cycles("(245)(386)"));
}

TEST_CASE("named groups") {
    CHECK(named_group("Z3t").size() == 3);
    CHECK(named_group("-Z3t").size() == 12);
    CHECK(named_group("+S4").size() == 96);
    CHECK_THROWS(named_group("bogus"));

    for (const auto& base : named_group_labels()) {
        const SymGroup h = named_group(base);
        CHECK(named_group("+" + base).size() == 4 * h.size());
        CHECK(named_group("-" + base).size() == 4 * h.size());
    }
}

TEST_CASE("representation and homomorphism properties") {
    for (const auto& label : {"-Z3t", "+D3", "-D2d"}) {
        const SymGroup h = named_group(label);
        for (const auto& g1 : h.elements) {
            CHECK((g1.matrix() * g1.inverse().matrix() - Matrix8::Identity())
                      .lpNorm<Eigen::Infinity>() == 0.0);
            CHECK(g1.inverse().matrix() == g1.matrix().transpose());
            for (const auto& g2 : h.elements) {
                const GroupElement p = g1.product(g2);
                CHECK(h.contains(p));
                CHECK(p.matrix() == g1.matrix() * g2.matrix());
                CHECK(p.phase == g1.phase.plus_mod1(g2.phase));
            }
        }
    }
}

TEST_CASE("product group") {
    const SymGroup z3t = named_group("Z3t");
    const SymGroup trivial = SymGroup::from_elements({GroupElement{}}, "1");
    CHECK(product_group(z3t, trivial).elements == z3t.elements);

    const SymGroup oz = load_group_file(data_dir() + "/oz.txt", "oz");
    CHECK(product_group(z3t, oz).elements == named_group("-Z3t").elements);
    CHECK(product_group(named_group("D2d"), oz).size() == 16);
}

TEST_CASE("kernel, t0 and level set") {
    const SymGroup mz3t = named_group("-Z3t");
    CHECK(kernel(mz3t).size() == 4);
    CHECK(t_zero(mz3t) == Fraction(1, 6));
    CHECK(t_zero(named_group("-Z4c")) == Fraction(1, 4));
    CHECK(t_zero(named_group("Z3t")) == Fraction(1, 3));
    CHECK_THROWS(t_zero(kernel(mz3t)));

    const auto lvl = level_set(mz3t);
    REQUIRE(lvl.size() == 2);
    const GroupElement e1 = parse_element_line("-1 (254)(368) 1/6");
    const GroupElement e2 = parse_element_line("1 (17)(234856) 1/6");
    CHECK(std::count(lvl.begin(), lvl.end(), e1) == 1);
    CHECK(std::count(lvl.begin(), lvl.end(), e2) == 1);

    // a group where exactly one element attains the minimal phase
    const SymGroup z4c = named_group("Z4c");
    const auto lvl4 = level_set(z4c);
    CHECK(lvl4.size() == 1);
}

TEST_CASE("fixed subspaces") {
    CHECK(fixed_subspace({GroupElement{}}).cols() == 8);
    CHECK(fixed_subspace(kernel(named_group("+S4")).elements).cols() == 1);
    CHECK(fixed_subspace(kernel(named_group("-Z3t")).elements).cols() == 4);

    const auto basis = fixed_subspace(kernel(named_group("-D2d")).elements);
    for (const auto& g : kernel(named_group("-D2d")).elements)
        for (int j = 0; j < basis.cols(); ++j)
            CHECK((g.matrix() * basis.col(j) - basis.col(j)).norm() < 1e-12);
}

TEST_CASE("group validation rejects non-groups") {
    // a set missing inverses/closure
    CHECK_THROWS(SymGroup::from_elements(
        {GroupElement{}, parse_element_line("1 (245)(386) 1/3")}));
}
