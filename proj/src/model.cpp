#include "equistab/model.hpp"

#include <map>
#include <stdexcept>

namespace equistab {

const Matrix8& interaction_matrix() {
    static const Matrix8 b = [] {
        Matrix8 m;
        m << -3, 1, 0, 1, 1, 0, 0, 0,
              1, -3, 1, 0, 0, 1, 0, 0,
              0, 1, -3, 1, 0, 0, 1, 0,
              1, 0, 1, -3, 0, 0, 0, 1,
              1, 0, 0, 0, -3, 1, 0, 1,
              0, 1, 0, 0, 1, -3, 1, 0,
              0, 0, 1, 0, 0, 1, -3, 1,
              0, 0, 0, 1, 1, 0, 1, -3;
        return m;
    }();
    return b;
}

Vector8 vdp_rhs(const Params& p, const Vector8& x, const Vector8& v) {
    return (p.alpha - x.array().square()).matrix().asDiagonal() * v - x +
           0.5 * p.a * (interaction_matrix() * v);
}

ControlSpec control_matrix(ControlLaw law, const SymGroup& h) {
    ControlSpec spec;
    spec.law = law;
    spec.group = h;
    std::vector<GroupElement> set;
    if (law == ControlLaw::KernelAverage) {
        set = kernel(h).elements;
        spec.delay_fraction = Fraction{};
    } else {
        spec.delay_fraction = t_zero(h);
        set = level_set(h);
    }
    Matrix8 sum = Matrix8::Zero();
    for (const auto& g : set) sum += g.matrix();
    spec.avg = sum / static_cast<double>(set.size());
    return spec;
}

Vector8 controlled_rhs(const Params& p, const ControlSpec& spec, const Vector8& x,
                       const Vector8& v, const Vector8& v_delayed) {
    return vdp_rhs(p, x, v) + p.b * (-v + spec.avg * v_delayed);
}

double equivariance_defect(const GroupElement& g, const Params& p, const Vector8& x,
                           const Vector8& v) {
    const Matrix8 t = g.matrix();
    const Vector8 lhs = vdp_rhs(p, t * x, t * v);
    const Vector8 rhs = t * vdp_rhs(p, x, v);
    return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

double bifurcation_k(const std::string& label) {
    static const std::map<std::string, double> k = {
        {"+S4", 0},  {"-D4z", 1}, {"-D3z", 1}, {"-D2d", 1}, {"-Z4c", 1}, {"-Z3t", 1},
        {"+D4d", 2}, {"+D3", 2},  {"+D2d", 2}, {"+Z4c", 2}, {"+Z3t", 2}, {"-S4m", 3}};
    const auto it = k.find(label);
    if (it == k.end())
        throw std::runtime_error("bifurcation_k: \"" + label + "\" is not a Table-1 branch");
    return it->second;
}

namespace {

// Scalar Van der Pol acceleration with shifted parameter.
double vdp1(double alpha_eff, double x, double v) {
    return (alpha_eff - x * x) * v - x;
}

ReducedSystem case1(double k) {
    ReducedSystem r;
    r.dim = 1;
    r.bifurcation_k = k;
    r.accel = [k](double alpha, double a, double, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>&) {
        Eigen::VectorXd out(1);
        out(0) = vdp1(alpha - k * a, x(0), v(0));
        return out;
    };
    return r;
}

ReducedSystem case2(double k) {
    ReducedSystem r;
    r.dim = 2;
    r.bifurcation_k = k;
    r.accel = [k](double alpha, double a, double, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>&) {
        Eigen::VectorXd out(2);
        out(0) = vdp1(alpha - k * a, x(0), v(0));
        out(1) = vdp1(alpha - k * a, x(1), v(1));
        return out;
    };
    return r;
}

// Two asymmetrically coupled oscillators; c22 is the self-coupling factor in
// the second equation.
ReducedSystem case3(double k, double c22) {
    ReducedSystem r;
    r.dim = 2;
    r.bifurcation_k = k;
    r.accel = [c22](double alpha, double a, double, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>&) {
        Eigen::VectorXd out(2);
        out(0) = vdp1(alpha, x(0), v(0)) + 1.5 * a * (v(1) - v(0));
        out(1) = vdp1(alpha, x(1), v(1)) + 0.5 * a * (v(0) - c22 * v(1));
        return out;
    };
    return r;
}

// Delayed pair; sgn is the sign in front of the delayed terms of the second
// equation (-1 for -Z3t, +1 for +Z3t).
ReducedSystem case4(double k, double sgn) {
    ReducedSystem r;
    r.dim = 2;
    r.bifurcation_k = k;
    r.delay_fractions = {Fraction{1, 3}, Fraction{2, 3}};
    r.accel = [sgn](double alpha, double a, double, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& vdel) {
        const double v2_d1 = vdel.at(0)(1);  // v2(t - T/3)
        const double v2_d2 = vdel.at(1)(1);  // v2(t - 2T/3)
        Eigen::VectorXd out(2);
        out(0) = vdp1(alpha, x(0), v(0)) + 0.5 * a * (v(1) + v2_d1 + v2_d2 - 3.0 * v(0));
        out(1) = vdp1(alpha, x(1), v(1)) +
                 0.5 * a * (v(0) + sgn * (v2_d1 + v2_d2) - 3.0 * v(1));
        return out;
    };
    return r;
}

}  // namespace

ReducedSystem reduced_system(const std::string& label) {
    const double k = bifurcation_k(label);
    if (label == "+S4" || label == "-D4z" || label == "-D2d" || label == "+D4d" ||
        label == "+D2d" || label == "-S4m")
        return case1(k);
    if (label == "-Z4c" || label == "+Z4c") return case2(k);
    if (label == "-D3z") return case3(k, 5.0);
    if (label == "+D3") return case3(k, 1.0);
    if (label == "-Z3t") return case4(k, -1.0);
    if (label == "+Z3t") return case4(k, +1.0);
    throw std::runtime_error("reduced_system: unsupported group " + label);
}

}  // namespace equistab
