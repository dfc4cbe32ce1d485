#pragma once

#include <vector>

#include "sua/config.hpp"
#include "sua/image.hpp"

namespace sua {

// Solves the linearized alignment model
//
//   min_v  1/2 sum_p m_p (g_p . v_p + c_p)^2  +  lambda/2 sum_comp v' L^n v
//
// where g = (d/dx, d/dy) of src (central differences inside, one-sided at
// borders), c = src - tgt, and L is the 5-point Neumann Laplacian on the
// grid padded by cfg.padding on every side. The data mask m is 1 on the
// embedded original region and 0 on the padding ring, so the pad acts as the
// reflective extension domain for the smoothness term only. L is exactly
// diagonalized by the DCT-II basis with per-axis eigenvalues
// 2 - 2 cos(pi k / N); the n-th order regularizer therefore has the symbol
// (ex + ey)^n, which equals the multinomial-weighted sum of squared n-th
// mixed partials.
//
// ADMM splitting v = w: the v-update is a per-pixel 2x2 solve of the
// rank-one data term (Sherman-Morrison), the w-update is the diagonal
// frequency-domain inverse above, followed by dual ascent. Stops when the
// relative primal residual drops below cfg.tolerance.
struct VelocitySolve {
    VectorField field;      // cropped to the input dims (the w iterate)
    int iterations = 0;
    double primal_residual = 0.0;
    double objective = 0.0;       // discrete objective at the padded solution
    double objective_zero = 0.0;  // objective at the zero field
    // Padded-grid solution, for oracle comparisons.
    int pad_height = 0;
    int pad_width = 0;
    std::vector<double> vx_pad;
    std::vector<double> vy_pad;
};

VelocitySolve solve_velocity_detailed(const Image& src, const Image& tgt, const AdmmConfig& cfg);
VectorField solve_velocity(const Image& src, const Image& tgt, const AdmmConfig& cfg);

// Discrete objective above, evaluated at an arbitrary padded-grid field.
double velocity_objective(const Image& src, const Image& tgt, const AdmmConfig& cfg,
                          const std::vector<double>& vx_pad, const std::vector<double>& vy_pad);

// All n-th order mixed partials d^n / dx^k1 dy^k2 (k1 + k2 = n), each scaled
// by sqrt(n!/(k1!k2!)) so the summed squared norm realizes ||grad^n .||^2.
// Entry k holds k1 = n-k, k2 = k. Forward differences over a reflect-101
// extension; output dims match the input.
std::vector<Image> nth_gradient(const Image& img, int n);
// Per-component stacks: first dx parts, then dy parts.
std::vector<Image> nth_gradient(const VectorField& field, int n);

}  // namespace sua
