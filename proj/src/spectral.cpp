#include "equistab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace equistab {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

// Gram-Schmidt of the columns of seed against the columns already in out.
void append_orthonormal(Eigen::MatrixXd& out, int& filled, const Eigen::VectorXd& v) {
    Eigen::VectorXd w = v;
    for (int k = 0; k < filled; ++k) w -= out.col(k).dot(w) * out.col(k);
    const double n = w.norm();
    if (n > 1e-8) {
        out.col(filled++) = w / n;
    }
}

}  // namespace

const IsotypicalBasis& isotypical_basis() {
    static const IsotypicalBasis basis = [] {
        const Matrix8& b = interaction_matrix();
        const Matrix8 id = Matrix8::Identity();
        // spectral projectors of B, polynomial in B (spectrum {0,-2,-4,-6})
        const Matrix8 p2 = b * (b + 4.0 * id) * (b + 6.0 * id) / -16.0;
        const Matrix8 p3 = b * (b + 2.0 * id) * (b + 6.0 * id) / 16.0;

        IsotypicalBasis out;
        Matrix8& q = out.q;
        q.setZero();
        q.col(0) = Vector8::Ones() / std::sqrt(8.0);
        // bipartition vector: + on {1,3,6,8}, - on {2,4,5,7}
        Vector8 u;
        u << 1, -1, 1, -1, -1, 1, -1, 1;
        q.col(7) = u / std::sqrt(8.0);

        // deterministic bases of the -2 and -4 eigenspaces: Gram-Schmidt on
        // the projected standard basis in index order
        Eigen::MatrixXd w2(8, 3), w3(8, 3);
        int f2 = 0, f3 = 0;
        for (int j = 0; j < 8 && (f2 < 3 || f3 < 3); ++j) {
            if (f2 < 3) append_orthonormal(w2, f2, p2.col(j));
            if (f3 < 3) append_orthonormal(w3, f3, p3.col(j));
        }
        if (f2 != 3 || f3 != 3)
            throw std::runtime_error("isotypical_basis: eigenspace dimension mismatch");
        q.block<8, 3>(0, 1) = w2;
        q.block<8, 3>(0, 4) = w3;
        return out;
    }();
    return basis;
}

// ------------------------------------------------------------ quasipolynomial

Complex QuasiPolynomial::eval(Complex lam) const {
    Complex v = lam * lam + c * lam + 1.0;
    if (d != 0.0) v -= d * lam * std::exp(-delta * lam);
    return v;
}

Complex QuasiPolynomial::dlambda(Complex lam) const {
    Complex v = 2.0 * lam + c;
    if (d != 0.0) v -= d * std::exp(-delta * lam) * (1.0 - delta * lam);
    return v;
}

// ------------------------------------------------- block eigenvalues of avg

namespace {

// Eigenvalues of Q^T avg Q per isotypical coordinate, ordered inside each
// block: nonzero real, complex with positive imaginary part, its conjugate,
// zero. Throws if avg is not block diagonal in the isotypical basis.
std::array<Complex, 8> channel_eigenvalues(const Matrix8& avg) {
    const Matrix8 m = isotypical_basis().q.transpose() * avg * isotypical_basis().q;

    Matrix8 mask = m;
    for (const auto& [off, sz] : IsotypicalBasis::blocks)
        mask.block(off, off, sz, sz).setZero();
    if (mask.cwiseAbs().maxCoeff() > 1e-8)
        throw std::runtime_error(
            "averaging matrix is not block diagonal in the isotypical basis");

    std::array<Complex, 8> out;
    for (const auto& [off, sz] : IsotypicalBasis::blocks) {
        if (sz == 1) {
            out[off] = m(off, off);
            continue;
        }
        Eigen::EigenSolver<Eigen::MatrixXd> es(m.block(off, off, sz, sz));
        std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + sz);
        constexpr double tol = 1e-9;
        auto category = [&](Complex z) {
            if (std::abs(z) < tol) return 3;
            if (z.imag() > tol) return 1;
            if (z.imag() < -tol) return 2;
            return 0;  // nonzero real
        };
        std::sort(ev.begin(), ev.end(), [&](Complex x, Complex y) {
            const int cx = category(x), cy = category(y);
            if (cx != cy) return cx < cy;
            if (std::abs(x.real() - y.real()) > tol) return x.real() > y.real();
            return std::abs(x.imag()) > std::abs(y.imag());
        });
        for (int k = 0; k < sz; ++k) out[off + k] = ev[k];
    }
    return out;
}

}  // namespace

std::vector<Complex> equilibrium_spectrum_eq1(const Params& p, const SymGroup& h) {
    const ControlSpec spec = control_matrix(ControlLaw::KernelAverage, h);
    const auto mu = channel_eigenvalues(spec.avg);
    std::vector<Complex> roots;
    roots.reserve(16);
    for (int k = 0; k < 8; ++k) {
        if (std::abs(mu[k].imag()) > 1e-8)
            throw std::runtime_error("kernel average has a complex channel eigenvalue");
        // channel of A0 - b B0 with B0 = I - avg
        const double m = (p.alpha - IsotypicalBasis::channel_shift[k] * p.a) -
                         p.b * (1.0 - mu[k].real());
        const Complex disc = std::sqrt(Complex(m * m - 4.0, 0.0));
        roots.push_back((m + disc) / 2.0);
        roots.push_back((m - disc) / 2.0);
    }
    return roots;
}

CharSystem char_system_eq2(const Params& p, const SymGroup& h, double period) {
    if (!h.name.empty() && h.name != "-Z4c" && h.name != "-Z3t" && h.name != "+Z4c" &&
        h.name != "+Z3t")
        throw std::runtime_error("char_system_eq2: group " + h.name +
                                 " has no Table-3 column");
    const ControlSpec spec = control_matrix(ControlLaw::LevelSetAverage, h);
    const auto mu = channel_eigenvalues(spec.avg);
    const double tau = spec.delay_fraction.value() * period;

    CharSystem cs;
    cs.group = h.name;
    cs.p = p;
    cs.period = period;
    cs.tau = tau;
    for (int k = 0; k < 8; ++k) {
        QuasiPolynomial& row = cs.rows[k];
        row.c = p.b + IsotypicalBasis::channel_shift[k] * p.a - p.alpha;
        if (p.b != 0.0 && std::abs(mu[k]) > 1e-12) {
            row.d = p.b * mu[k];
            row.delta = tau;
        }
    }
    return cs;
}

Complex char_det16(const Params& p, const Matrix8& avg, double tau, Complex lam) {
    const Matrix8 a = p.alpha * Matrix8::Identity() + 0.5 * p.a * interaction_matrix();
    Eigen::MatrixXcd m = (lam * lam + 1.0) * Eigen::MatrixXcd::Identity(8, 8);
    m -= lam * (a - p.b * Matrix8::Identity()).cast<Complex>();
    m -= p.b * lam * std::exp(-tau * lam) * avg.cast<Complex>();
    return m.determinant();
}

// -------------------------------------------------------------- root counting

namespace {

struct ContourPoint {
    double t;    // parameter along the contour, in [0, 4)
    Complex z;
    Complex q;
};

Complex rect_point(double t, double left, double right, double height) {
    // t in [0,4): bottom, right, top, left edges
    const double seg = std::floor(t);
    const double s = t - seg;
    switch (static_cast<int>(seg)) {
        case 0: return Complex(-left + s * (right + left), -height);
        case 1: return Complex(right, -height + s * 2.0 * height);
        case 2: return Complex(right - s * (right + left), height);
        default: return Complex(-left, height - s * 2.0 * height);
    }
}

double principal_arg_diff(Complex a, Complex b) { return std::arg(b / a); }

}  // namespace

RootCount count_unstable_roots(const QuasiPolynomial& q, double margin) {
    RootCount rc;
    const double scale = 1.0 + std::abs(q.c) + std::abs(q.d);

    if (q.delta == 0.0 && q.d == 0.0) {
        const Complex disc = std::sqrt(Complex(q.c * q.c - 4.0, 0.0));
        for (const Complex r : {(-q.c + disc) / 2.0, (-q.c - disc) / 2.0}) {
            rc.roots.push_back(r);
            if (r.real() > margin) ++rc.unstable;
            else if (r.real() >= -margin) ++rc.neutral;
            if (r.real() > -0.05) ++rc.total_in_region;
        }
        return rc;
    }

    double left = 0.05;
    for (int attempt = 0;; ++attempt) {
        if (attempt > 5)
            throw std::runtime_error("count_unstable_roots: contour hit, perturb margin");
        // |lambda| bound for roots right of -left
        const double r_bound = 1.0 + std::abs(q.c) +
                               std::abs(q.d) * std::exp(q.delta * left) + 0.5;
        const double right = r_bound, height = r_bound;

        // adaptive argument tracking along the rectangle
        std::vector<ContourPoint> pts;
        const int n0 = 512;
        pts.reserve(4 * n0);
        bool hit = false;
        for (int i = 0; i < 4 * n0; ++i) {
            const double t = 4.0 * i / (4.0 * n0);
            const Complex z = rect_point(t, left, right, height);
            const Complex fv = q.eval(z);
            if (std::abs(fv) < 1e-9 * scale) { hit = true; break; }
            pts.push_back({t, z, fv});
        }
        if (hit) { left *= 1.618; continue; }
        pts.push_back({4.0, pts.front().z, pts.front().q});  // close the contour

        double total = 0.0;
        bool refine_hit = false;
        for (std::size_t i = 0; i + 1 < pts.size() && !refine_hit; ++i) {
            // subdivide until the phase step is unambiguous
            std::vector<ContourPoint> stack = {pts[i + 1]};
            ContourPoint cur = pts[i];
            while (!stack.empty()) {
                ContourPoint nxt = stack.back();
                const double darg = principal_arg_diff(cur.q, nxt.q);
                if (std::abs(darg) < 0.5 * kPi || nxt.t - cur.t < 1e-9) {
                    if (nxt.t - cur.t < 1e-9 && std::abs(darg) >= 0.5 * kPi) {
                        refine_hit = true;
                        break;
                    }
                    total += darg;
                    cur = nxt;
                    stack.pop_back();
                } else {
                    const double tm = 0.5 * (cur.t + nxt.t);
                    const Complex zm = rect_point(tm, left, right, height);
                    const Complex fm = q.eval(zm);
                    if (std::abs(fm) < 1e-9 * scale) { refine_hit = true; break; }
                    stack.push_back({tm, zm, fm});
                }
            }
        }
        if (refine_hit) { left *= 1.618; continue; }

        const double winding = total / (2.0 * kPi);
        const long count = std::lround(winding);
        rc.winding_error = std::abs(winding - static_cast<double>(count));
        if (rc.winding_error > 1e-6)
            throw std::runtime_error("count_unstable_roots: increase quadrature");
        rc.total_in_region = static_cast<int>(count);

        // Newton refinement from a seed grid inside the rectangle
        for (double spacing : {0.45, 0.2}) {
            rc.roots.clear();
            const int nx = std::max(2, static_cast<int>(std::ceil((right + left) / spacing)));
            const int ny = std::max(2, static_cast<int>(std::ceil(2.0 * height / spacing)));
            for (int ix = 0; ix <= nx; ++ix) {
                for (int iy = 0; iy <= ny; ++iy) {
                    Complex z(-left + (right + left) * ix / nx,
                              -height + 2.0 * height * iy / ny);
                    bool ok = false;
                    for (int it = 0; it < 60; ++it) {
                        const Complex fv = q.eval(z);
                        const Complex dv = q.dlambda(z);
                        if (std::abs(dv) < 1e-14) break;
                        const Complex step = fv / dv;
                        z -= step;
                        if (std::abs(step) < 1e-13 && std::abs(q.eval(z)) < 1e-10 * scale) {
                            ok = true;
                            break;
                        }
                    }
                    if (!ok) continue;
                    if (z.real() < -left || z.real() > right || std::abs(z.imag()) > height)
                        continue;
                    bool dup = false;
                    for (const Complex r : rc.roots)
                        if (std::abs(r - z) < 1e-6) { dup = true; break; }
                    if (!dup) rc.roots.push_back(z);
                }
            }
            if (static_cast<long>(rc.roots.size()) == count) break;
        }
        if (static_cast<long>(rc.roots.size()) != count)
            throw std::runtime_error(
                "count_unstable_roots: argument-principle count disagrees with "
                "Newton-converged roots");

        for (const Complex r : rc.roots) {
            if (r.real() > margin) ++rc.unstable;
            else if (r.real() >= -margin) ++rc.neutral;
        }
        return rc;
    }
}

// ------------------------------------------------------- crossing derivatives

Complex crossing_derivative(const std::function<QuasiPolynomial(double)>& family,
                            Complex lam0, double alpha0) {
    const QuasiPolynomial q0 = family(alpha0);
    const Complex qlam = q0.dlambda(lam0);
    if (std::abs(qlam) < 1e-8)
        throw std::runtime_error("crossing_derivative: root is not simple");
    const double e = 1e-6 * std::max(1.0, std::abs(alpha0));
    const Complex qa =
        (family(alpha0 + e).eval(lam0) - family(alpha0 - e).eval(lam0)) / (2.0 * e);
    return -qa / qlam;
}

HopfTangent hopf_curve_tangent(const std::function<QuasiPolynomial(double, double)>& family,
                               double alpha0, double period0, double omega0) {
    const QuasiPolynomial q0 = family(alpha0, period0);
    const Complex lam0 = kI * omega0;
    const Complex qlam = q0.dlambda(lam0);
    const double ea = 1e-6 * std::max(1.0, std::abs(alpha0));
    const double et = 1e-6 * std::max(1.0, std::abs(period0));
    const Complex qa =
        (family(alpha0 + ea, period0).eval(lam0) - family(alpha0 - ea, period0).eval(lam0)) /
        (2.0 * ea);
    const Complex qt =
        (family(alpha0, period0 + et).eval(lam0) - family(alpha0, period0 - et).eval(lam0)) /
        (2.0 * et);

    // q_lambda * i + q_alpha * alpha' + q_T * T' = 0
    Eigen::Matrix2d jac;
    jac << qa.real(), qt.real(), qa.imag(), qt.imag();
    if (std::abs(jac.determinant()) < 1e-12)
        throw std::runtime_error("hopf_curve_tangent: singular Jacobian");
    const Complex rhs = -kI * qlam;
    const Eigen::Vector2d sol = jac.colPivHouseholderQr().solve(
        Eigen::Vector2d(rhs.real(), rhs.imag()));
    return HopfTangent{sol(0), sol(1)};
}

// --------------------------------------------------------- center space tests

namespace {

std::vector<int> center_channels(double alpha0, double a) {
    std::vector<int> ch;
    for (int k = 0; k < 8; ++k)
        if (std::abs(alpha0 - IsotypicalBasis::channel_shift[k] * a) < 1e-9)
            ch.push_back(k);
    if (ch.empty())
        throw std::runtime_error("no center channel at the given (alpha0, a)");
    return ch;
}

}  // namespace

int center_fixed_dim(const std::vector<GroupElement>& s, double alpha0, double a) {
    const auto ch = center_channels(alpha0, a);
    const Matrix8& q = isotypical_basis().q;
    const int m = 2 * static_cast<int>(ch.size());

    // basis of E_i + E_{-i} in C^16, states ordered (x, v)
    Eigen::MatrixXcd basis(16, m);
    for (std::size_t j = 0; j < ch.size(); ++j) {
        const Eigen::VectorXcd w = q.col(ch[j]).cast<Complex>();
        basis.col(2 * j).head(8) = w / std::sqrt(2.0);
        basis.col(2 * j).tail(8) = kI * w / std::sqrt(2.0);
        basis.col(2 * j + 1).head(8) = w / std::sqrt(2.0);
        basis.col(2 * j + 1).tail(8) = -kI * w / std::sqrt(2.0);
    }

    Eigen::MatrixXcd stacked(m * static_cast<int>(s.size()), m);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const Complex rot = std::exp(2.0 * kPi * kI * s[k].phase.value());
        Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(16, 16);
        const Eigen::MatrixXcd t = s[k].matrix().cast<Complex>();
        op.block(0, 0, 8, 8) = rot * t;
        op.block(8, 8, 8, 8) = rot * t;
        stacked.block(static_cast<int>(k) * m, 0, m, m) =
            basis.adjoint() * op * basis - Eigen::MatrixXcd::Identity(m, m);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-8) ++rank;
    return m - rank;
}

Eigen::MatrixXcd target_center_directions(const SymGroup& h, double alpha0, double a) {
    const auto ch = center_channels(alpha0, a);
    const Matrix8& q = isotypical_basis().q;
    const int m = static_cast<int>(ch.size());
    Eigen::MatrixXcd qc(8, m);
    for (int j = 0; j < m; ++j) qc.col(j) = q.col(ch[j]).cast<Complex>();

    // r T_h w e^{-2 pi i phi} = w for every element
    Eigen::MatrixXcd stacked(8 * static_cast<int>(h.size()), m);
    for (std::size_t k = 0; k < h.size(); ++k) {
        const auto& g = h.elements[k];
        const Complex rot = std::exp(-2.0 * kPi * kI * g.phase.value());
        stacked.block(8 * static_cast<int>(k), 0, 8, m) =
            rot * g.matrix().cast<Complex>() * qc - qc;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stacked, Eigen::ComputeThinV);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-8) ++rank;
    const Eigen::MatrixXcd coeff = svd.matrixV().rightCols(m - rank);
    return qc * coeff;
}

}  // namespace equistab
