#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "equistab/model.hpp"
#include "equistab/symgroup.hpp"

namespace equistab {

using Complex = std::complex<double>;

/// Orthogonal change of basis splitting R^8 into the isotypical pieces
/// W1 (dim 1), W2 (dim 3), W3 (dim 3), W4 (dim 1), in that column order.
struct IsotypicalBasis {
    Matrix8 q;
    /// A0 channel shifts: diag of Q^T (alpha I + (a/2) B) Q is alpha - shift[k]*a.
    static constexpr std::array<int, 8> channel_shift = {0, 1, 1, 1, 2, 2, 2, 3};
    /// Block boundaries [offset, size].
    static constexpr std::array<std::pair<int, int>, 4> blocks = {
        std::pair{0, 1}, std::pair{1, 3}, std::pair{4, 3}, std::pair{7, 1}};
};

const IsotypicalBasis& isotypical_basis();

/// q(lambda) = lambda^2 + c lambda + 1 - d lambda e^{-delta lambda}.
/// delta == 0 implies d == 0 (plain quadratic, delayed part folded into c).
struct QuasiPolynomial {
    double c = 0.0;
    Complex d = 0.0;
    double delta = 0.0;

    Complex eval(Complex lam) const;
    Complex dlambda(Complex lam) const;  // dq/dlambda
};

struct CharSystem {
    std::array<QuasiPolynomial, 8> rows;
    std::string group;
    Params p;
    double period = 0.0;  // T
    double tau = 0.0;     // t0 * T
};

/// Eigenvalues of the Theorem-2 controlled linearization (kernel-average
/// control, no delay): 16 roots of the 8 per-channel quadratics.
std::vector<Complex> equilibrium_spectrum_eq1(const Params& p, const SymGroup& h);

/// Table-3 rows for the level-set controlled linearization. h must be one of
/// -Z4c, -Z3t, +Z4c, +Z3t.
CharSystem char_system_eq2(const Params& p, const SymGroup& h, double period);

/// det over C^8 of the full characteristic matrix
/// lambda^2 I - lambda (A - bI) - b lambda e^{-lambda tau} C + I,
/// with A = alpha I + (a/2) B and C the averaging matrix in the original basis.
Complex char_det16(const Params& p, const Matrix8& avg, double tau, Complex lam);

struct RootCount {
    int unstable = 0;       // roots with Re > margin
    int neutral = 0;        // roots with |Re| <= margin
    int total_in_region = 0;  // argument-principle count inside the contour
    std::vector<Complex> roots;
    double winding_error = 0.0;
};

/// Counts roots in the rectangle [-left, R] x [-M, M] by the argument
/// principle and refines them by complex Newton iteration; the two counts are
/// cross-checked on every call. margin is the neutral classification band.
RootCount count_unstable_roots(const QuasiPolynomial& q, double margin = 1e-9);

/// d lambda / d alpha at a simple root lam0 of the family q(alpha), at fixed T.
Complex crossing_derivative(const std::function<QuasiPolynomial(double)>& family,
                            Complex lam0, double alpha0);

struct HopfTangent {
    double dalpha = 0.0;  // alpha'(omega)
    double dperiod = 0.0; // T'(omega)
};

/// Tangent of the implicitly defined Hopf curve (alpha(omega), T(omega)) with
/// root i*omega, at the base point (alpha0, T0, omega0).
HopfTangent hopf_curve_tangent(const std::function<QuasiPolynomial(double, double)>& family,
                               double alpha0, double period0, double omega0);

/// Complex dimension of the intersection over s of the fixed spaces of
/// e^{2 pi i theta} r T_h acting on the complexified center space
/// E_i + E_{-i} of the uncontrolled linearization at alpha0.
int center_fixed_dim(const std::vector<GroupElement>& s, double alpha0, double a);

/// Basis of the complex center eigendirections w with r T_h w e^{-2 pi i phi} = w
/// for every element of h, restricted to the bifurcation channel at alpha0.
/// Used to seed stabilization experiments.
Eigen::MatrixXcd target_center_directions(const SymGroup& h, double alpha0, double a);

}  // namespace equistab
