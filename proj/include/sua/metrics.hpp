#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sua/image.hpp"

namespace sua {

struct Histogram {
    int bins = 0;
    std::vector<double> mass;  // normalized, sums to 1
};

// Uniform bins over [0,1]; the last bin is right-inclusive. Normalized by
// pixel count. An optional mask restricts counting to mask > 0.5 pixels.
Histogram histogram(const Image& img, int bins);
Histogram histogram(const Image& img, int bins, const Image& mask);

// D = sqrt(1 - (1/sqrt(mean1*mean2*N^2)) * sum_i sqrt(H1_i * H2_i)), the
// inner expression clamped to [0,1] before the outer root.
double bhattacharyya(const Histogram& h1, const Histogram& h2);

// Pearson correlation of bin masses. Zero-variance input is degenerate and
// yields nullopt rather than an arbitrary constant.
std::optional<double> correlation(const Histogram& h1, const Histogram& h2);

struct ClassMetrics {
    int cls = 0;
    long tp = 0, fp = 0, fn = 0, tn = 0;
    bool present = false;  // class occurs in pred or gt
    double dice = 0.0, iou = 0.0, acc = 0.0, sen = 0.0, spe = 0.0, fdr = 0.0;
    bool sen_defined = false;
    bool spe_defined = false;
};

struct MetricReport {
    // Distribution metrics (filled by evaluation when available).
    std::optional<double> d_bhat;
    std::optional<double> corr;
    // Segmentation metrics, mean over present foreground classes.
    double acc = 0.0, dice = 0.0, miou = 0.0, sen = 0.0, spe = 0.0, fdr = 0.0;
    std::vector<ClassMetrics> per_class;
};

// Per-class one-vs-rest confusion counts. Dice = 2TP/(2TP+FP+FN),
// IoU = TP/(TP+FP+FN), Sen = TP/(TP+FN), Spe = TN/(TN+FP),
// FDR = FP/(TP+FP) (0 when nothing is predicted), Acc = (TP+TN)/total.
// Means run over foreground classes present in pred or gt; a class absent
// from both is excluded. Sen/Spe enter the means only where defined.
MetricReport segmentation_metrics(const SegMask& pred, const SegMask& gt);

// JSON with key names matching the usual results-table columns.
std::string metric_report_to_json(const MetricReport& report);

}  // namespace sua
