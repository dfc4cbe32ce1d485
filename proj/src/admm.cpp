#include "sua/admm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "sua/gridops.hpp"

namespace sua {

namespace {

// FFTW plans and buffers per grid size. A single mutex serializes transforms;
// the solver's per-pixel work carries the parallelism.
class DctCache {
  public:
    static DctCache& instance() {
        static DctCache c;
        return c;
    }

    void forward(int h, int w, std::vector<double>& data) { run(h, w, data, true); }
    void inverse(int h, int w, std::vector<double>& data) {
        run(h, w, data, false);
        const double norm = 1.0 / (4.0 * h * w);
        for (double& v : data) v *= norm;
    }

  private:
    struct Plans {
        double* buf = nullptr;
        fftw_plan fwd = nullptr;
        fftw_plan inv = nullptr;
    };

    void run(int h, int w, std::vector<double>& data, bool fwd) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(h, w);
        auto it = plans_.find(key);
        if (it == plans_.end()) {
            Plans p;
            p.buf = fftw_alloc_real(static_cast<size_t>(h) * w);
            p.fwd = fftw_plan_r2r_2d(h, w, p.buf, p.buf, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
            p.inv = fftw_plan_r2r_2d(h, w, p.buf, p.buf, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
            it = plans_.emplace(key, p).first;
        }
        auto& p = it->second;
        std::copy(data.begin(), data.end(), p.buf);
        fftw_execute(fwd ? p.fwd : p.inv);
        std::copy(p.buf, p.buf + data.size(), data.begin());
    }

    std::mutex mu_;
    std::map<std::pair<int, int>, Plans> plans_;
};

struct Problem {
    int h = 0, w = 0, pad = 0;
    int hp = 0, wp = 0;
    std::vector<double> gx, gy, c;  // padded, zero on the ring
    std::vector<uint8_t> mask;      // 1 on the embedded original region
    std::vector<double> symbol;     // (ex + ey)^n per padded-grid DCT mode
};

Problem build_problem(const Image& src, const Image& tgt, const AdmmConfig& cfg) {
    if (!src.same_dims(tgt)) throw std::invalid_argument("solve_velocity: image dims differ");
    Problem p;
    p.h = src.height;
    p.w = src.width;
    p.pad = cfg.padding;
    p.hp = p.h + 2 * p.pad;
    p.wp = p.w + 2 * p.pad;
    const size_t np = static_cast<size_t>(p.hp) * p.wp;
    p.gx.assign(np, 0.0);
    p.gy.assign(np, 0.0);
    p.c.assign(np, 0.0);
    p.mask.assign(np, 0);

    const Image gx = gradient_x(src);
    const Image gy = gradient_y(src);
    for (int r = 0; r < p.h; ++r)
        for (int col = 0; col < p.w; ++col) {
            const size_t i = static_cast<size_t>(r + p.pad) * p.wp + (col + p.pad);
            const size_t j = static_cast<size_t>(r) * p.w + col;
            p.gx[i] = gx.data[j];
            p.gy[i] = gy.data[j];
            p.c[i] = src.data[j] - tgt.data[j];
            p.mask[i] = 1;
        }

    p.symbol.resize(np);
    for (int r = 0; r < p.hp; ++r) {
        const double ey = 2.0 - 2.0 * std::cos(M_PI * r / p.hp);
        for (int col = 0; col < p.wp; ++col) {
            const double ex = 2.0 - 2.0 * std::cos(M_PI * col / p.wp);
            double s = 1.0;
            for (int k = 0; k < cfg.order; ++k) s *= (ex + ey);
            p.symbol[static_cast<size_t>(r) * p.wp + col] = s;
        }
    }
    return p;
}

// lambda/2 * v' L^n v through the orthonormal DCT coefficients.
double regularizer_energy(const Problem& p, double lambda, const std::vector<double>& comp) {
    std::vector<double> hat = comp;
    DctCache::instance().forward(p.hp, p.wp, hat);
    const double inv_scale = 1.0 / (2.0 * std::sqrt(static_cast<double>(p.hp)) *
                                    std::sqrt(static_cast<double>(p.wp)));
    double acc = 0.0;
    for (int r = 0; r < p.hp; ++r) {
        const double br = r == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
        for (int col = 0; col < p.wp; ++col) {
            const double bc = col == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
            const size_t i = static_cast<size_t>(r) * p.wp + col;
            const double ortho = hat[i] * br * bc * inv_scale;
            acc += p.symbol[i] * ortho * ortho;
        }
    }
    return 0.5 * lambda * acc;
}

double problem_objective(const Problem& p, double lambda, const std::vector<double>& vx,
                         const std::vector<double>& vy) {
    double data = 0.0;
    for (size_t i = 0; i < p.mask.size(); ++i) {
        if (!p.mask[i]) continue;
        const double r = p.gx[i] * vx[i] + p.gy[i] * vy[i] + p.c[i];
        data += r * r;
    }
    return 0.5 * data + regularizer_energy(p, lambda, vx) + regularizer_energy(p, lambda, vy);
}

}  // namespace

VelocitySolve solve_velocity_detailed(const Image& src, const Image& tgt, const AdmmConfig& cfg) {
    Problem p = build_problem(src, tgt, cfg);
    const size_t np = static_cast<size_t>(p.hp) * p.wp;
    const double rho = cfg.rho;

    std::vector<double> vx(np, 0.0), vy(np, 0.0);
    std::vector<double> wx(np, 0.0), wy(np, 0.0);
    std::vector<double> ux(np, 0.0), uy(np, 0.0);

    VelocitySolve out;
    out.pad_height = p.hp;
    out.pad_width = p.wp;
    out.objective_zero = problem_objective(p, cfg.lambda, vx, vy);

    double residual = 0.0;
    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        // v-update: (g g' + rho I) v = rho (w - u) - c g, per pixel.
#pragma omp parallel for
        for (long i = 0; i < static_cast<long>(np); ++i) {
            const double rx = rho * (wx[i] - ux[i]);
            const double ry = rho * (wy[i] - uy[i]);
            if (!p.mask[i]) {
                vx[i] = rx / rho;
                vy[i] = ry / rho;
                continue;
            }
            const double gx = p.gx[i], gy = p.gy[i], c = p.c[i];
            const double bx = rx - c * gx;
            const double by = ry - c * gy;
            const double gg = gx * gx + gy * gy;
            const double gb = gx * bx + gy * by;
            const double s = gb / (rho + gg);
            vx[i] = (bx - gx * s) / rho;
            vy[i] = (by - gy * s) / rho;
        }

        // w-update: diagonal inverse in the DCT domain.
        for (int comp = 0; comp < 2; ++comp) {
            auto& v = comp == 0 ? vx : vy;
            auto& w = comp == 0 ? wx : wy;
            auto& u = comp == 0 ? ux : uy;
            for (size_t i = 0; i < np; ++i) w[i] = v[i] + u[i];
            DctCache::instance().forward(p.hp, p.wp, w);
            for (size_t i = 0; i < np; ++i) w[i] *= rho / (rho + cfg.lambda * p.symbol[i]);
            DctCache::instance().inverse(p.hp, p.wp, w);
        }

        double prim2 = 0.0, vn2 = 0.0, wn2 = 0.0;
        for (size_t i = 0; i < np; ++i) {
            const double dx = vx[i] - wx[i], dy = vy[i] - wy[i];
            prim2 += dx * dx + dy * dy;
            vn2 += vx[i] * vx[i] + vy[i] * vy[i];
            wn2 += wx[i] * wx[i] + wy[i] * wy[i];
            ux[i] += dx;
            uy[i] += dy;
        }
        residual = std::sqrt(prim2) / std::max({std::sqrt(vn2), std::sqrt(wn2), 1e-12});
        if (residual < cfg.tolerance) {
            ++iter;
            break;
        }
    }

    out.iterations = iter;
    out.primal_residual = residual;
    out.objective = problem_objective(p, cfg.lambda, wx, wy);
    out.vx_pad = wx;
    out.vy_pad = wy;

    out.field = VectorField(p.h, p.w);
    for (int r = 0; r < p.h; ++r)
        for (int col = 0; col < p.w; ++col) {
            const size_t ip = static_cast<size_t>(r + p.pad) * p.wp + (col + p.pad);
            out.field.dx[out.field.idx(r, col)] = wx[ip];
            out.field.dy[out.field.idx(r, col)] = wy[ip];
        }
    return out;
}

VectorField solve_velocity(const Image& src, const Image& tgt, const AdmmConfig& cfg) {
    return solve_velocity_detailed(src, tgt, cfg).field;
}

double velocity_objective(const Image& src, const Image& tgt, const AdmmConfig& cfg,
                          const std::vector<double>& vx_pad, const std::vector<double>& vy_pad) {
    Problem p = build_problem(src, tgt, cfg);
    if (vx_pad.size() != p.mask.size() || vy_pad.size() != p.mask.size())
        throw std::invalid_argument("velocity_objective: field size does not match padded grid");
    return problem_objective(p, cfg.lambda, vx_pad, vy_pad);
}

namespace {

// k-fold forward difference along one axis over a reflect-101 extension.
Image forward_diff(const Image& img, int times, bool along_x) {
    Image cur = img;
    for (int t = 0; t < times; ++t) {
        Image next(cur.height, cur.width);
#pragma omp parallel for
        for (int r = 0; r < cur.height; ++r)
            for (int c = 0; c < cur.width; ++c) {
                if (along_x)
                    next.at(r, c) = cur.at(r, reflect101(c + 1, cur.width)) - cur.at(r, c);
                else
                    next.at(r, c) = cur.at(reflect101(r + 1, cur.height), c) - cur.at(r, c);
            }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace

std::vector<Image> nth_gradient(const Image& img, int n) {
    if (n < 1) throw std::invalid_argument("nth_gradient: n must be >= 1");
    if (img.height < n + 1 || img.width < n + 1)
        throw std::invalid_argument("nth_gradient: input dims must be >= n+1");

    auto factorial = [](int k) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };

    std::vector<Image> parts;
    parts.reserve(n + 1);
    for (int k = 0; k <= n; ++k) {
        const int k1 = n - k, k2 = k;
        Image d = forward_diff(forward_diff(img, k1, true), k2, false);
        const double wgt = std::sqrt(factorial(n) / (factorial(k1) * factorial(k2)));
        for (double& v : d.data) v *= wgt;
        parts.push_back(std::move(d));
    }
    return parts;
}

std::vector<Image> nth_gradient(const VectorField& field, int n) {
    Image cx(field.height, field.width), cy(field.height, field.width);
    cx.data = field.dx;
    cy.data = field.dy;
    auto parts = nth_gradient(cx, n);
    auto py = nth_gradient(cy, n);
    parts.insert(parts.end(), std::make_move_iterator(py.begin()),
                 std::make_move_iterator(py.end()));
    return parts;
}

}  // namespace sua
