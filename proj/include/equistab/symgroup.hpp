#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace equistab {

using Matrix8 = Eigen::Matrix<double, 8, 8>;
using Vector8 = Eigen::Matrix<double, 8, 1>;

/// Exact rational, used for the temporal phase of a symmetry element.
/// Phases are always kept reduced and in [0, 1).
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Fraction() = default;
    Fraction(std::int64_t n, std::int64_t d);

    static Fraction mod1(std::int64_t n, std::int64_t d);

    Fraction plus_mod1(const Fraction& other) const;
    Fraction neg_mod1() const;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool is_zero() const { return num == 0; }
    std::string str() const;

    auto operator<=>(const Fraction&) const = default;
};

/// Permutation of the 8 cube vertices. Images are stored 0-based:
/// img[j] is the image of vertex j+1, minus one.
struct Perm {
    std::array<std::uint8_t, 8> img{0, 1, 2, 3, 4, 5, 6, 7};

    static Perm from_cycles(const std::string& text);  // e.g. "(17)(265843)", "()"
    std::string cycles() const;

    Perm compose(const Perm& rhs) const;  // (this∘rhs)(j) = this(rhs(j))
    Perm inverse() const;
    bool is_identity() const;
    int apply(int j) const { return img[j]; }  // 0-based

    auto operator<=>(const Perm&) const = default;
};

/// Permutation matrix with T e_j = e_{g(j)}. Fixed so that the matrix of
/// (17)(265843) has its row-1 entry in column 7.
Matrix8 permutation_matrix(const Perm& g);

/// One spatio-temporal symmetry (r, h, phi(r,h)).
struct GroupElement {
    int sign = 1;  // +1 or -1
    Perm perm;
    Fraction phase;  // in [0,1)

    GroupElement product(const GroupElement& other) const;
    GroupElement inverse() const;
    bool is_identity() const;
    Matrix8 matrix() const;  // sign * permutation matrix (spatial action only)
    std::string str() const;

    auto operator<=>(const GroupElement&) const = default;
};

/// A finite group of spatio-temporal symmetries (the graph of phi).
struct SymGroup {
    std::vector<GroupElement> elements;  // sorted, duplicate-free
    std::string name;

    /// Sorts, deduplicates and verifies the group axioms: identity,
    /// closure, inverses, and that the phase is a function of (sign, perm).
    /// Throws std::runtime_error on violation.
    static SymGroup from_elements(std::vector<GroupElement> els, std::string name = {});

    std::size_t size() const { return elements.size(); }
    bool contains(const GroupElement& g) const;
};

/// Labels accepted by named_group: the nine base groups
/// S4 D4z D3z D2d Z4c Z3t D4d D3 S4m and their +/- decorated forms.
std::vector<std::string> named_group_labels();
SymGroup named_group(const std::string& label);

/// Element-wise product set H*K, deduplicated; throws if the result does not
/// satisfy the SymGroup invariants.
SymGroup product_group(const SymGroup& h, const SymGroup& k);

/// Elements with phase 0.
SymGroup kernel(const SymGroup& h);

/// Smallest nonzero phase; throws if every phase is zero.
Fraction t_zero(const SymGroup& h);

/// Elements whose phase equals t_zero(h).
std::vector<GroupElement> level_set(const SymGroup& h);

/// Orthonormal basis (columns) of the common +1 eigenspace of the spatial
/// actions r*T_h over the elements of s. Phases are ignored.
Eigen::MatrixXd fixed_subspace(const std::vector<GroupElement>& s);

/// Group data files: one element per line, "<sign> <cycles> <p>/<q>".
GroupElement parse_element_line(const std::string& line);
SymGroup load_group_file(const std::string& path, std::string name = {});

/// Directory holding the group tables (EQUISTAB_DATA_DIR overrides the
/// compiled-in default).
std::string data_dir();

}  // namespace equistab
