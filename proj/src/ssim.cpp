#include "sua/ssim.hpp"

#include <stdexcept>

#include "sua/gridops.hpp"

namespace sua {

namespace {
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;
constexpr double kWindowSigma = 1.5;  // 11-tap kernel via radius ceil(3*sigma)

Image hadamard(const Image& a, const Image& b) {
    Image out(a.height, a.width);
    for (size_t i = 0; i < out.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    return out;
}
}  // namespace

Image ssim_map(const Image& a, const Image& b) {
    if (!a.same_dims(b)) throw std::invalid_argument("ssim: image dims differ");
    const Image mu_a = gaussian_blur(a, kWindowSigma);
    const Image mu_b = gaussian_blur(b, kWindowSigma);
    const Image m_aa = gaussian_blur(hadamard(a, a), kWindowSigma);
    const Image m_bb = gaussian_blur(hadamard(b, b), kWindowSigma);
    const Image m_ab = gaussian_blur(hadamard(a, b), kWindowSigma);

    Image out(a.height, a.width);
#pragma omp parallel for
    for (int r = 0; r < a.height; ++r) {
        for (int c = 0; c < a.width; ++c) {
            const size_t i = static_cast<size_t>(r) * a.width + c;
            const double ma = mu_a.data[i], mb = mu_b.data[i];
            const double va = m_aa.data[i] - ma * ma;
            const double vb = m_bb.data[i] - mb * mb;
            const double cov = m_ab.data[i] - ma * mb;
            out.data[i] = ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
                          ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
        }
    }
    return out;
}

double ssim(const Image& a, const Image& b) {
    const Image map = ssim_map(a, b);
    // Row partial sums keep the reduction order independent of the schedule.
    std::vector<double> rows(map.height, 0.0);
#pragma omp parallel for
    for (int r = 0; r < map.height; ++r) {
        double s = 0.0;
        for (int c = 0; c < map.width; ++c) s += map.at(r, c);
        rows[r] = s;
    }
    double total = 0.0;
    for (double s : rows) total += s;
    return total / static_cast<double>(map.size());
}

}  // namespace sua
