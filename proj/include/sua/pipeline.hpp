#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sua/config.hpp"
#include "sua/diffeo.hpp"
#include "sua/image.hpp"
#include "sua/metrics.hpp"
#include "sua/renderer.hpp"
#include "sua/segmenter.hpp"

namespace sua {

struct PipelineRecord {
    int source_index = 0;
    int selected_target = 0;
    DiffeoPair pair;
    Image composed_source;    // registration input
    Image warped_structure;   // edge sketch after the forward warp
    Image rendered;
    SegMask prediction;       // in target geometry
    SegMask warped_back;      // prediction under the inverse deformation
};

struct PipelineRun {
    std::vector<PipelineRecord> records;
    MetricReport report;
};

// Translation stages only: Potts structure extraction -> composed structure
// -> SSIM target selection (per-image by default, one global pair as a mode)
// -> registration -> warp of the cluster labeling with edge re-extraction ->
// rendering. Persists phi_{i}.suat, phi_inv_{i}.suat, diffeo_{i}.json,
// composed_{i}.png, warped_structure_{i}.png and rendered_{i}.png under
// out_dir when given.
PipelineRun translate_dataset(const Dataset& src, const Dataset& tgt, Renderer& renderer,
                              const RunConfig& cfg, const std::string& out_dir = "");

// Full per-image pipeline: translate, segment the rendered images, warp the
// predictions back with the inverse deformation. Adds pred_{i}.suat and
// warped_back_{i}.suat to the persisted artifacts.
PipelineRun run_pipeline(const Dataset& src, const Dataset& tgt, Renderer& renderer,
                         Segmenter& segmenter, const RunConfig& cfg,
                         const std::string& out_dir = "");

// Rebuild the evaluable parts of a run from persisted artifacts.
PipelineRun load_pipeline_run(const std::string& dir, int count);

// Segmentation metrics of the warped-back predictions against the source
// ground truth plus distribution metrics of the rendered images against the
// mean target histogram; writes report.json and the diagnostic plots when
// out_dir is given.
MetricReport evaluate(PipelineRun& run, const Dataset& src, const Dataset& tgt,
                      const RunConfig& cfg, const std::string& out_dir = "");

// Ablation baselines sharing the pipeline's deformations.
double baseline_no_translation_dice(const Dataset& src, Segmenter& segmenter);
double baseline_registration_only_dice(const PipelineRun& run, const Dataset& src,
                                       Segmenter& segmenter);

// Config slices with the pipeline's desk-scale overrides applied.
AdmmConfig pipeline_admm_config(const RunConfig& cfg);
RenderConfig pipeline_render_config(const RunConfig& cfg);
SegmenterConfig pipeline_segmenter_config(const RunConfig& cfg);

}  // namespace sua
