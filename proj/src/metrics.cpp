#include "sua/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sua {

namespace {

Histogram histogram_impl(const Image& img, int bins, const Image* mask) {
    if (bins < 2) throw std::invalid_argument("histogram: bins must be >= 2");
    if (mask && !mask->same_dims(img)) throw std::invalid_argument("histogram: mask dims differ");
    Histogram h;
    h.bins = bins;
    h.mass.assign(bins, 0.0);
    long count = 0;
    for (size_t i = 0; i < img.size(); ++i) {
        if (mask && mask->data[i] <= 0.5) continue;
        const double v = img.data[i];
        int b = static_cast<int>(v * bins);
        if (b >= bins) b = bins - 1;  // v == 1 lands in the last bin
        if (b < 0) b = 0;
        h.mass[b] += 1.0;
        ++count;
    }
    if (count == 0) throw std::invalid_argument("histogram: no pixels selected");
    for (double& m : h.mass) m /= static_cast<double>(count);
    return h;
}

}  // namespace

Histogram histogram(const Image& img, int bins) { return histogram_impl(img, bins, nullptr); }

Histogram histogram(const Image& img, int bins, const Image& mask) {
    return histogram_impl(img, bins, &mask);
}

double bhattacharyya(const Histogram& h1, const Histogram& h2) {
    if (h1.bins != h2.bins) throw std::invalid_argument("bhattacharyya: bin counts differ");
    const int n = h1.bins;
    double m1 = 0.0, m2 = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        m1 += h1.mass[i];
        m2 += h2.mass[i];
        cross += std::sqrt(h1.mass[i] * h2.mass[i]);
    }
    m1 /= n;
    m2 /= n;
    double inner = 1.0 - cross / std::sqrt(m1 * m2 * static_cast<double>(n) * n);
    inner = std::min(1.0, std::max(0.0, inner));
    return std::sqrt(inner);
}

std::optional<double> correlation(const Histogram& h1, const Histogram& h2) {
    if (h1.bins != h2.bins) throw std::invalid_argument("correlation: bin counts differ");
    const int n = h1.bins;
    double mean1 = 0.0, mean2 = 0.0;
    for (int i = 0; i < n; ++i) {
        mean1 += h1.mass[i];
        mean2 += h2.mass[i];
    }
    mean1 /= n;
    mean2 /= n;
    double num = 0.0, d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = h1.mass[i] - mean1;
        const double b = h2.mass[i] - mean2;
        num += a * b;
        d1 += a * a;
        d2 += b * b;
    }
    if (d1 <= 0.0 || d2 <= 0.0) return std::nullopt;
    return num / std::sqrt(d1 * d2);
}

MetricReport segmentation_metrics(const SegMask& pred, const SegMask& gt) {
    if (pred.height != gt.height || pred.width != gt.width)
        throw std::invalid_argument("segmentation_metrics: dims differ");
    if (pred.classes != gt.classes)
        throw std::invalid_argument("segmentation_metrics: class counts differ");

    const int classes = gt.classes;
    const long total = static_cast<long>(gt.labels.size());
    MetricReport rep;
    rep.per_class.resize(classes);

    for (int cls = 0; cls < classes; ++cls) {
        auto& m = rep.per_class[cls];
        m.cls = cls;
        for (size_t i = 0; i < gt.labels.size(); ++i) {
            const bool p = pred.labels[i] == cls;
            const bool g = gt.labels[i] == cls;
            m.tp += p && g;
            m.fp += p && !g;
            m.fn += !p && g;
            m.tn += !p && !g;
        }
        m.present = (m.tp + m.fp + m.fn) > 0;
        const long dice_den = 2 * m.tp + m.fp + m.fn;
        m.dice = dice_den > 0 ? 2.0 * m.tp / dice_den : 0.0;
        const long iou_den = m.tp + m.fp + m.fn;
        m.iou = iou_den > 0 ? static_cast<double>(m.tp) / iou_den : 0.0;
        m.acc = static_cast<double>(m.tp + m.tn) / total;
        m.sen_defined = (m.tp + m.fn) > 0;
        m.sen = m.sen_defined ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
        m.spe_defined = (m.tn + m.fp) > 0;
        m.spe = m.spe_defined ? static_cast<double>(m.tn) / (m.tn + m.fp) : 0.0;
        m.fdr = (m.tp + m.fp) > 0 ? static_cast<double>(m.fp) / (m.tp + m.fp) : 0.0;
    }

    int n_fg = 0, n_sen = 0, n_spe = 0;
    for (int cls = 1; cls < classes; ++cls) {
        const auto& m = rep.per_class[cls];
        if (!m.present) continue;
        ++n_fg;
        rep.acc += m.acc;
        rep.dice += m.dice;
        rep.miou += m.iou;
        rep.fdr += m.fdr;
        if (m.sen_defined) {
            rep.sen += m.sen;
            ++n_sen;
        }
        if (m.spe_defined) {
            rep.spe += m.spe;
            ++n_spe;
        }
    }
    if (n_fg > 0) {
        rep.acc /= n_fg;
        rep.dice /= n_fg;
        rep.miou /= n_fg;
        rep.fdr /= n_fg;
    }
    if (n_sen > 0) rep.sen /= n_sen;
    if (n_spe > 0) rep.spe /= n_spe;
    return rep;
}

std::string metric_report_to_json(const MetricReport& report) {
    nlohmann::ordered_json j;
    j["D_Bhat"] = report.d_bhat ? nlohmann::ordered_json(*report.d_bhat)
                                : nlohmann::ordered_json(nullptr);
    j["Corr"] = report.corr ? nlohmann::ordered_json(*report.corr)
                            : nlohmann::ordered_json(nullptr);
    j["Acc"] = report.acc;
    j["Dice"] = report.dice;
    j["mIoU"] = report.miou;
    j["Sen"] = report.sen;
    j["Spe"] = report.spe;
    j["FDR"] = report.fdr;
    j["per_class"] = nlohmann::ordered_json::array();
    for (const auto& m : report.per_class) {
        j["per_class"].push_back({{"class", m.cls},
                                  {"present", m.present},
                                  {"Dice", m.dice},
                                  {"IoU", m.iou},
                                  {"Acc", m.acc},
                                  {"Sen", m.sen},
                                  {"Spe", m.spe},
                                  {"FDR", m.fdr}});
    }
    return j.dump(2) + "\n";
}

}  // namespace sua
