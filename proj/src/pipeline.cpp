#include "sua/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "sua/io.hpp"
#include "sua/plots.hpp"
#include "sua/potts.hpp"
#include "sua/ssim.hpp"
#include "sua/structex.hpp"
#include "sua/synth.hpp"

namespace sua {

namespace {

SegMask cluster_to_segmask(const ClusterMap& cm) {
    if (cm.region_count > 65535) throw std::runtime_error("pipeline: too many Potts regions");
    SegMask m(cm.height, cm.width, cm.region_count);
    for (size_t i = 0; i < cm.labels.size(); ++i)
        m.labels[i] = static_cast<uint16_t>(cm.labels[i]);
    return m;
}

std::string indexed(const std::string& dir, const char* stem, int i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "/%s_%d%s", stem, i, ext);
    return dir + buf;
}

}  // namespace

AdmmConfig pipeline_admm_config(const RunConfig& cfg) {
    AdmmConfig a = cfg.admm;
    a.lambda = cfg.pipeline.admm_lambda;
    return a;
}

RenderConfig pipeline_render_config(const RunConfig& cfg) {
    RenderConfig r = cfg.render;
    r.epochs = cfg.pipeline.render_epochs;
    r.decay_start = cfg.pipeline.render_decay_start;
    r.dropout = cfg.pipeline.render_dropout;
    return r;
}

SegmenterConfig pipeline_segmenter_config(const RunConfig& cfg) {
    SegmenterConfig s = cfg.segmenter;
    s.epochs = cfg.pipeline.segmenter_epochs;
    return s;
}

PipelineRun translate_dataset(const Dataset& src, const Dataset& tgt, Renderer& renderer,
                              const RunConfig& cfg, const std::string& out_dir) {
    src.validate();
    tgt.validate();
    if (src.items.front().image.height != tgt.items.front().image.height ||
        src.items.front().image.width != tgt.items.front().image.width)
        throw std::invalid_argument("pipeline: source/target dims differ");
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    const double gamma = cfg.pipeline.potts_gamma;
    const double sigma = cfg.structex.compose_sigma;
    const AdmmConfig admm = pipeline_admm_config(cfg);

    std::vector<ComposedStructure> tgt_structs(tgt.items.size());
    for (size_t j = 0; j < tgt.items.size(); ++j) {
        const ClusterMap cm = potts_cluster(tgt.items[j].image, gamma, cfg.potts);
        tgt_structs[j] = compose_structure(structure_mask(cm), tgt.items[j].image, sigma);
    }

    std::vector<ClusterMap> src_maps(src.items.size());
    std::vector<ComposedStructure> src_structs(src.items.size());
    for (size_t i = 0; i < src.items.size(); ++i) {
        src_maps[i] = potts_cluster(src.items[i].image, gamma, cfg.potts);
        src_structs[i] =
            compose_structure(structure_mask(src_maps[i]), src.items[i].image, sigma);
    }

    const bool global_mode = cfg.pipeline.pairing == "global";
    int global_j = 0;
    std::optional<DiffeoPair> global_pair;
    if (global_mode) {
        const auto [gi, gj] = select_pair(src_structs, tgt_structs);
        global_j = gj;
        global_pair = register_images(src_structs[gi].image, tgt_structs[gj].image, admm).pair;
    }

    PipelineRun run;
    for (size_t i = 0; i < src.items.size(); ++i) {
        try {
            PipelineRecord rec;
            rec.source_index = static_cast<int>(i);

            if (global_mode) {
                rec.selected_target = global_j;
                rec.pair = *global_pair;
            } else {
                int best_j = 0;
                double best = -2.0;
                for (size_t j = 0; j < tgt_structs.size(); ++j) {
                    const double s = ssim(src_structs[i].image, tgt_structs[j].image);
                    if (s > best) {
                        best = s;
                        best_j = static_cast<int>(j);
                    }
                }
                rec.selected_target = best_j;
                rec.pair =
                    register_images(src_structs[i].image, tgt_structs[best_j].image, admm).pair;
            }
            rec.composed_source = src_structs[i].image;

            // Warp the cluster labeling, then re-extract edges with the same
            // transition rule used for the training sketches.
            const SegMask warped_labels =
                warp_mask(cluster_to_segmask(src_maps[i]), rec.pair.forward);
            rec.warped_structure = label_edges(warped_labels).as_image();
            rec.rendered = render(renderer, rec.warped_structure);

            if (!out_dir.empty()) {
                const int idx = static_cast<int>(i);
                save_diffeo_pair(rec.pair, indexed(out_dir, "phi", idx, ".suat"),
                                 indexed(out_dir, "phi_inv", idx, ".suat"),
                                 indexed(out_dir, "diffeo", idx, ".json"), admm);
                save_image(rec.composed_source, indexed(out_dir, "composed", idx, ".png"));
                save_image(rec.warped_structure,
                           indexed(out_dir, "warped_structure", idx, ".png"));
                save_image(rec.rendered, indexed(out_dir, "rendered", idx, ".png"));
            }
            run.records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw std::runtime_error("pipeline: image " + std::to_string(i) + ": " + e.what());
        }
    }
    return run;
}

PipelineRun run_pipeline(const Dataset& src, const Dataset& tgt, Renderer& renderer,
                         Segmenter& segmenter, const RunConfig& cfg,
                         const std::string& out_dir) {
    PipelineRun run = translate_dataset(src, tgt, renderer, cfg, out_dir);
    for (auto& rec : run.records) {
        try {
            rec.prediction = segment(segmenter, rec.rendered);
            rec.warped_back = warp_mask(rec.prediction, rec.pair.inverse);
            if (!out_dir.empty()) {
                save_mask(rec.prediction, indexed(out_dir, "pred", rec.source_index, ".suat"));
                save_mask(rec.warped_back,
                          indexed(out_dir, "warped_back", rec.source_index, ".suat"));
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("pipeline: image " + std::to_string(rec.source_index) +
                                     ": " + e.what());
        }
    }
    return run;
}

PipelineRun load_pipeline_run(const std::string& dir, int count) {
    PipelineRun run;
    for (int i = 0; i < count; ++i) {
        PipelineRecord rec;
        rec.source_index = i;
        rec.pair.forward = load_field(indexed(dir, "phi", i, ".suat"));
        rec.pair.inverse = load_field(indexed(dir, "phi_inv", i, ".suat"));
        rec.rendered = load_image(indexed(dir, "rendered", i, ".png"));
        rec.warped_structure = load_image(indexed(dir, "warped_structure", i, ".png"));
        rec.prediction = load_mask(indexed(dir, "pred", i, ".suat"));
        rec.warped_back = load_mask(indexed(dir, "warped_back", i, ".suat"));
        run.records.push_back(std::move(rec));
    }
    return run;
}

MetricReport evaluate(PipelineRun& run, const Dataset& src, const Dataset& tgt,
                      const RunConfig& cfg, const std::string& out_dir) {
    if (run.records.size() != src.items.size())
        throw std::invalid_argument("evaluate: run does not match the source dataset");
    for (const auto& item : src.items)
        if (!item.mask) throw std::invalid_argument("evaluate: source ground truth missing");

    const int bins = cfg.metrics.bins;
    Histogram target_mean;
    target_mean.bins = bins;
    target_mean.mass.assign(bins, 0.0);
    for (const auto& item : tgt.items) {
        const Histogram h = histogram(item.image, bins);
        for (int b = 0; b < bins; ++b) target_mean.mass[b] += h.mass[b];
    }
    for (double& m : target_mean.mass) m /= static_cast<double>(tgt.items.size());

    MetricReport agg;
    int n = 0, n_corr = 0;
    double dbhat_sum = 0.0, corr_sum = 0.0;
    int classes = 0;
    for (const auto& item : src.items) classes = std::max(classes, item.mask->classes);
    std::vector<ClassMetrics> class_sums(classes);
    std::vector<int> class_counts(classes, 0);
    Histogram rendered_mean;
    rendered_mean.bins = bins;
    rendered_mean.mass.assign(bins, 0.0);

    for (size_t i = 0; i < run.records.size(); ++i) {
        SegMask gt = *src.items[i].mask;
        gt.classes = classes;
        SegMask pred = run.records[i].warped_back;
        pred.classes = classes;
        const MetricReport r = segmentation_metrics(pred, gt);
        agg.acc += r.acc;
        agg.dice += r.dice;
        agg.miou += r.miou;
        agg.sen += r.sen;
        agg.spe += r.spe;
        agg.fdr += r.fdr;
        for (int c = 0; c < classes; ++c) {
            if (!r.per_class[c].present) continue;
            class_sums[c].dice += r.per_class[c].dice;
            class_sums[c].iou += r.per_class[c].iou;
            class_sums[c].acc += r.per_class[c].acc;
            class_sums[c].sen += r.per_class[c].sen;
            class_sums[c].spe += r.per_class[c].spe;
            class_sums[c].fdr += r.per_class[c].fdr;
            ++class_counts[c];
        }
        ++n;

        const Histogram hr = histogram(run.records[i].rendered, bins);
        for (int b = 0; b < bins; ++b) rendered_mean.mass[b] += hr.mass[b];
        dbhat_sum += bhattacharyya(hr, target_mean);
        if (const auto c = correlation(hr, target_mean)) {
            corr_sum += *c;
            ++n_corr;
        }
    }
    agg.acc /= n;
    agg.dice /= n;
    agg.miou /= n;
    agg.sen /= n;
    agg.spe /= n;
    agg.fdr /= n;
    agg.d_bhat = dbhat_sum / n;
    if (n_corr > 0) agg.corr = corr_sum / n_corr;
    for (int c = 0; c < classes; ++c) {
        ClassMetrics m;
        m.cls = c;
        m.present = class_counts[c] > 0;
        if (m.present) {
            m.dice = class_sums[c].dice / class_counts[c];
            m.iou = class_sums[c].iou / class_counts[c];
            m.acc = class_sums[c].acc / class_counts[c];
            m.sen = class_sums[c].sen / class_counts[c];
            m.spe = class_sums[c].spe / class_counts[c];
            m.fdr = class_sums[c].fdr / class_counts[c];
        }
        agg.per_class.push_back(m);
    }
    for (double& m : rendered_mean.mass) m /= static_cast<double>(n);

    run.report = agg;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_text_file(out_dir + "/report.json", metric_report_to_json(agg));
        save_image(plot_histogram_overlay(rendered_mean, target_mean),
                   out_dir + "/hist_overlay.png");
        if (!run.records.empty()) {
            save_image(plot_deformation_grid(run.records.front().pair.forward),
                       out_dir + "/deformation_grid.png");
            save_image(normalize_grid(jacobian_determinant(run.records.front().pair.forward)),
                       out_dir + "/jacobian.png");
        }
    }
    return agg;
}

double baseline_no_translation_dice(const Dataset& src, Segmenter& segmenter) {
    double sum = 0.0;
    for (const auto& item : src.items) {
        SegMask pred = segment(segmenter, item.image);
        SegMask gt = *item.mask;
        const int classes = std::max(pred.classes, gt.classes);
        pred.classes = classes;
        gt.classes = classes;
        sum += segmentation_metrics(pred, gt).dice;
    }
    return sum / static_cast<double>(src.items.size());
}

double baseline_registration_only_dice(const PipelineRun& run, const Dataset& src,
                                       Segmenter& segmenter) {
    double sum = 0.0;
    for (size_t i = 0; i < run.records.size(); ++i) {
        const Image warped = warp(src.items[i].image, run.records[i].pair.forward);
        SegMask pred = segment(segmenter, warped);
        SegMask back = warp_mask(pred, run.records[i].pair.inverse);
        SegMask gt = *src.items[i].mask;
        const int classes = std::max(back.classes, gt.classes);
        back.classes = classes;
        gt.classes = classes;
        sum += segmentation_metrics(back, gt).dice;
    }
    return sum / static_cast<double>(run.records.size());
}

}  // namespace sua
