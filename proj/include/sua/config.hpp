#pragma once

#include <cstdint>
#include <string>

namespace sua {

// Potts clustering. gamma follows the source material defaults (0.35 for
// OCT-like data, 0.45 for MRI/CT-like data); the synthetic 64x64 benchmark
// overrides it because boundary length scales with image size.
struct PottsConfig {
    double gamma = 0.35;          // jump penalty
    int max_outer = 20;           // outer iteration cap
    double stop_decrease = 1e-6;  // stop when energy decrease falls below this
    double coupling_init = 0.05;  // initial quadratic coupling weight
    double coupling_growth = 2.0; // geometric coupling schedule
    double merge_eps = 1e-4;      // value tolerance when merging regions
};

struct StructexConfig {
    double compose_sigma = 2.0;  // Gaussian softening radius for masks, px
};

// Velocity-model solver settings.
struct AdmmConfig {
    int order = 3;              // n in the nth-order gradient regularizer
    double lambda = 5000.0;     // smoothness weight on [0,1] intensities
    double rho = 5.0;           // ADMM balance (penalty) parameter
    int max_iterations = 50;
    double tolerance = 1e-3;    // relative primal residual stop
    int padding = 8;            // reflective pad before frequency-domain smoothing
    int scales = 3;             // coarse-to-fine pyramid depth (used by register)
    double step_cap = 0.4;      // per-step displacement cap, px
    int max_steps_per_scale = 10;
};

struct RenderConfig {
    int width = 16;             // base channel width W
    int epochs = 200;
    int decay_start = 100;      // constant lr until here, then linear to zero
    double learning_rate = 2e-4;
    double lambda1 = 1.0;       // L1 weight
    double lambda2 = 100.0;     // style weight
    int batch_size = 1;
    double dropout = 0.5;       // training only
};

struct SegmenterConfig {
    int width = 8;
    int epochs = 60;
    double learning_rate = 1e-3;
};

struct SynthConfig {
    int size = 64;
    int count_source = 40;
    int count_target = 40;
    std::string family = "bands";  // "bands" or "ellipses"
    int object_count = 3;          // bands or ellipses per image
    double warp_amplitude = 3.0;   // px
    double remap_offset = 0.25;    // source intensity = offset + slope * v
    double remap_slope = 0.65;
    double noise = 0.01;
};

struct MetricsConfig {
    int bins = 256;
};

struct PipelineConfig {
    std::string pairing = "per_image";  // or "global"
    double potts_gamma = 0.1;           // structure-extraction gamma at 64x64
    double admm_lambda = 5000.0;
    int render_epochs = 40;             // desk-scale override
    int render_decay_start = 20;
    double render_dropout = 0.25;
    int segmenter_epochs = 60;
};

struct PathsConfig {
    std::string out = "out";
    std::string source_data;
    std::string target_data;
    std::string renderer;
    std::string segmenter;
};

struct RunConfig {
    uint64_t seed = 1;
    PottsConfig potts;
    StructexConfig structex;
    AdmmConfig admm;
    RenderConfig render;
    SegmenterConfig segmenter;
    SynthConfig synth;
    MetricsConfig metrics;
    PipelineConfig pipeline;
    PathsConfig paths;
};

// JSON (de)serialization. Serialization is canonical: fixed key order and
// shortest-round-trip numbers, so re-serializing a parsed config reproduces
// the input bytes.
std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

}  // namespace sua
