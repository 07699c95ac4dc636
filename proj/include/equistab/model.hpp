#pragma once

#include <functional>
#include <string>
#include <vector>

#include "equistab/symgroup.hpp"

namespace equistab {

struct Params {
    double alpha = 0.0;  // bifurcation parameter
    double a = 0.0;      // coupling strength
    double b = 0.0;      // control gain (0 = uncontrolled)
};

/// The fixed cube interaction matrix (diagonal -3, adjacency 1s).
const Matrix8& interaction_matrix();

/// Right side of the uncontrolled second-order system:
/// (alpha - x^2) v - x + (a/2) B v, with componentwise x^2 v.
Vector8 vdp_rhs(const Params& p, const Vector8& x, const Vector8& v);

enum class ControlLaw {
    KernelAverage,    // average over _0H, no delay
    LevelSetAverage,  // average over _1H, delay t0 * T
};

struct ControlSpec {
    ControlLaw law = ControlLaw::KernelAverage;
    SymGroup group;
    Matrix8 avg = Matrix8::Identity();  // (1/|set|) sum of r T_h
    Fraction delay_fraction;            // 0 or t0(H)
};

/// Builds the averaging matrix for the chosen law. The full control term
/// applied to velocities is b * (-v(t) + avg * v(t - delay_fraction*T)).
ControlSpec control_matrix(ControlLaw law, const SymGroup& h);

/// vdp_rhs plus the control term. For KernelAverage pass v_delayed = v.
Vector8 controlled_rhs(const Params& p, const ControlSpec& spec, const Vector8& x,
                       const Vector8& v, const Vector8& v_delayed);

/// || vdp_rhs(r T_h x, r T_h v) - r T_h vdp_rhs(x, v) ||_inf  (phase ignored).
double equivariance_defect(const GroupElement& g, const Params& p, const Vector8& x,
                           const Vector8& v);

/// Restriction of the system to the fixed-point space of the kernel of a
/// Table-1 group, in the explicit small form. dim is the number of
/// oscillator coordinates; delay_fractions lists the delays as fractions of
/// the auxiliary period parameter T (empty for the non-delayed cases).
struct ReducedSystem {
    int dim = 1;
    std::vector<Fraction> delay_fractions;
    double bifurcation_k = 0.0;  // branch bifurcates at alpha0 = k*a
    /// accel(alpha, a, T, x, v, vdel) where vdel[k] holds the velocities at
    /// t - delay_fractions[k]*T.
    std::function<Eigen::VectorXd(double alpha, double a, double T,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                  const std::vector<Eigen::VectorXd>& vdel)>
        accel;
};

/// Table-1 branch bifurcation point alpha0 = k*a; throws on unknown label.
double bifurcation_k(const std::string& label);

ReducedSystem reduced_system(const std::string& label);

}  // namespace equistab
