#pragma once

#include "bcm/forward_solver.hpp"
#include "bcm/signal.hpp"

namespace bcm {

/// kappa(x, t) = T - t on sigma x [0, T] and its odd extension on [0, 2T].
struct KappaProfile {
  Control kappa;
  ExtendedControl extended;
};

/// Trapezoid weights on a uniform lattice of n nodes with spacing d.
Vector trapezoid_weights(Index n, double d);

/// Trapezoid quadrature of f g rho(x, 0) over sigma x [0, t_end]. Throws
/// GridMismatch on different lattices or a weight of the wrong length.
double inner_product_outer(const SampledSignal& f, const SampledSignal& g, const Vector& boundary_rho);

/// Unit-weight version, used for the pairing on sigma x [0, 2T].
double inner_product_plain(const SampledSignal& f, const SampledSignal& g);

/// S^T. The node t = T carries the midpoint of the jump, (f(T) - f(T)) / 2 = 0,
/// which makes the discrete adjoint of S^T exactly 2 N P.
ExtendedControl odd_extend(const Control& f);

/// J^{2T}: cumulative trapezoid, zero at t = 0.
ExtendedControl time_integrate(const ExtendedControl& f);

/// P^{2T}: (f(t) - f(2T - t)) / 2.
ExtendedControl odd_part(const ExtendedControl& f);

/// N^{2T}: keeps the nodes of [0, T].
Control restrict_to_T(const ExtendedControl& f);

/// C^T f = N P J R S f, assembled from the forward solver.
Control apply_ct(const VelocityField& rho, const Control& f, const SimGrid& grid);

/// (u^f(T), u^g(T)) in L_{2,rho} over the nodes with dist(p, sigma) < T,
/// 2D trapezoid weights (half weight on the boundary row).
double ct_form_oracle(const VelocityField& rho, const Control& f, const Control& g, const SimGrid& grid);

/// rho-weighted integral of u over the same region as ct_form_oracle.
double wave_mass(const VelocityField& rho, const Matrix& frame, const SimGrid& grid);

KappaProfile make_kappa(const SimGrid& grid);

}  // namespace bcm
