#pragma once

#include <string>
#include <vector>

#include "sua/admm.hpp"
#include "sua/config.hpp"
#include "sua/image.hpp"

namespace sua {

// Matched forward/inverse deformations built from a sequence of small
// velocities:
//   forward = (Id + v_{N-1}/N) o ... o (Id + v_0/N)
//   inverse = (Id - v_0/N) o (Id - v_1/N) o ... o (Id - v_{N-1}/N)
// Both stored as displacement-from-identity fields.
struct DiffeoPair {
    VectorField forward;
    VectorField inverse;
    std::vector<VectorField> velocities;
    int steps = 0;
    std::vector<double> rescale_factors;  // applied per velocity to honor the step bound
};

// Per-factor displacement bound that keeps every small deformation invertible.
inline constexpr double kStepBound = 0.4;

DiffeoPair integrate(const std::vector<VectorField>& velocities, int steps);

// output(p) = bilinear sample of img at p + displacement(p), border-clamped.
Image warp(const Image& img, const VectorField& field);

// Per-class indicator warp + argmax; ties take the smaller class index.
SegMask warp_mask(const SegMask& mask, const VectorField& field);
// Binary masks are Images with values in {0,1}.
Image warp_mask(const Image& mask, const VectorField& field);

EdgeSketch warp_mask_to_edges(const Image& mask, const VectorField& field);

// det of the central-difference Jacobian of (Id + displacement); one-sided
// differences on the border rows/columns.
Image jacobian_determinant(const VectorField& field);

struct RegistrationStep {
    int level = 0;        // 0 = finest
    double ssim_after = 0.0;
    double energy_after = 0.0;
};

struct Registration {
    DiffeoPair pair;
    std::vector<RegistrationStep> accepted;
    double ssim_initial = 0.0;
    double ssim_final = 0.0;
};

// Coarse-to-fine greedy registration: each outer iteration solves the
// linearized velocity model on the current warp, caps the increment at
// kStepBound px, and accepts it only if the warped-source SSIM does not
// decrease. The accepted increments, newest first, times N form the velocity
// list handed to integrate.
Registration register_images(const Image& src, const Image& tgt, const AdmmConfig& cfg);

void save_diffeo_pair(const DiffeoPair& pair, const std::string& forward_path,
                      const std::string& inverse_path, const std::string& meta_path,
                      const AdmmConfig& cfg);

}  // namespace sua
