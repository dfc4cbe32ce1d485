#include "sua/config.hpp"

#include <json.hpp>

#include <stdexcept>

#include "sua/io.hpp"

namespace sua {

using json = nlohmann::ordered_json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

json potts_to_json(const PottsConfig& c) {
    return json{{"gamma", c.gamma},
                {"max_outer", c.max_outer},
                {"stop_decrease", c.stop_decrease},
                {"coupling_init", c.coupling_init},
                {"coupling_growth", c.coupling_growth},
                {"merge_eps", c.merge_eps}};
}

json admm_to_json(const AdmmConfig& c) {
    return json{{"order", c.order},
                {"lambda", c.lambda},
                {"rho", c.rho},
                {"max_iterations", c.max_iterations},
                {"tolerance", c.tolerance},
                {"padding", c.padding},
                {"scales", c.scales},
                {"step_cap", c.step_cap},
                {"max_steps_per_scale", c.max_steps_per_scale}};
}

}  // namespace

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["potts"] = potts_to_json(cfg.potts);
    j["structex"] = json{{"compose_sigma", cfg.structex.compose_sigma}};
    j["admm"] = admm_to_json(cfg.admm);
    j["render"] = json{{"width", cfg.render.width},
                       {"epochs", cfg.render.epochs},
                       {"decay_start", cfg.render.decay_start},
                       {"learning_rate", cfg.render.learning_rate},
                       {"lambda1", cfg.render.lambda1},
                       {"lambda2", cfg.render.lambda2},
                       {"batch_size", cfg.render.batch_size},
                       {"dropout", cfg.render.dropout}};
    j["segmenter"] = json{{"width", cfg.segmenter.width},
                          {"epochs", cfg.segmenter.epochs},
                          {"learning_rate", cfg.segmenter.learning_rate}};
    j["synth"] = json{{"size", cfg.synth.size},
                      {"count_source", cfg.synth.count_source},
                      {"count_target", cfg.synth.count_target},
                      {"family", cfg.synth.family},
                      {"object_count", cfg.synth.object_count},
                      {"warp_amplitude", cfg.synth.warp_amplitude},
                      {"remap_offset", cfg.synth.remap_offset},
                      {"remap_slope", cfg.synth.remap_slope},
                      {"noise", cfg.synth.noise}};
    j["metrics"] = json{{"bins", cfg.metrics.bins}};
    j["pipeline"] = json{{"pairing", cfg.pipeline.pairing},
                         {"potts_gamma", cfg.pipeline.potts_gamma},
                         {"admm_lambda", cfg.pipeline.admm_lambda},
                         {"render_epochs", cfg.pipeline.render_epochs},
                         {"render_decay_start", cfg.pipeline.render_decay_start},
                         {"render_dropout", cfg.pipeline.render_dropout},
                         {"segmenter_epochs", cfg.pipeline.segmenter_epochs}};
    j["paths"] = json{{"out", cfg.paths.out},
                      {"source_data", cfg.paths.source_data},
                      {"target_data", cfg.paths.target_data},
                      {"renderer", cfg.paths.renderer},
                      {"segmenter", cfg.paths.segmenter}};
    return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
    json j = json::parse(text);
    RunConfig cfg;
    get_if(j, "seed", cfg.seed);
    if (j.contains("potts")) {
        const auto& p = j.at("potts");
        get_if(p, "gamma", cfg.potts.gamma);
        get_if(p, "max_outer", cfg.potts.max_outer);
        get_if(p, "stop_decrease", cfg.potts.stop_decrease);
        get_if(p, "coupling_init", cfg.potts.coupling_init);
        get_if(p, "coupling_growth", cfg.potts.coupling_growth);
        get_if(p, "merge_eps", cfg.potts.merge_eps);
    }
    if (j.contains("structex")) get_if(j.at("structex"), "compose_sigma", cfg.structex.compose_sigma);
    if (j.contains("admm")) {
        const auto& a = j.at("admm");
        get_if(a, "order", cfg.admm.order);
        get_if(a, "lambda", cfg.admm.lambda);
        get_if(a, "rho", cfg.admm.rho);
        get_if(a, "max_iterations", cfg.admm.max_iterations);
        get_if(a, "tolerance", cfg.admm.tolerance);
        get_if(a, "padding", cfg.admm.padding);
        get_if(a, "scales", cfg.admm.scales);
        get_if(a, "step_cap", cfg.admm.step_cap);
        get_if(a, "max_steps_per_scale", cfg.admm.max_steps_per_scale);
    }
    if (j.contains("render")) {
        const auto& r = j.at("render");
        get_if(r, "width", cfg.render.width);
        get_if(r, "epochs", cfg.render.epochs);
        get_if(r, "decay_start", cfg.render.decay_start);
        get_if(r, "learning_rate", cfg.render.learning_rate);
        get_if(r, "lambda1", cfg.render.lambda1);
        get_if(r, "lambda2", cfg.render.lambda2);
        get_if(r, "batch_size", cfg.render.batch_size);
        get_if(r, "dropout", cfg.render.dropout);
    }
    if (j.contains("segmenter")) {
        const auto& s = j.at("segmenter");
        get_if(s, "width", cfg.segmenter.width);
        get_if(s, "epochs", cfg.segmenter.epochs);
        get_if(s, "learning_rate", cfg.segmenter.learning_rate);
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        get_if(s, "size", cfg.synth.size);
        get_if(s, "count_source", cfg.synth.count_source);
        get_if(s, "count_target", cfg.synth.count_target);
        get_if(s, "family", cfg.synth.family);
        get_if(s, "object_count", cfg.synth.object_count);
        get_if(s, "warp_amplitude", cfg.synth.warp_amplitude);
        get_if(s, "remap_offset", cfg.synth.remap_offset);
        get_if(s, "remap_slope", cfg.synth.remap_slope);
        get_if(s, "noise", cfg.synth.noise);
    }
    if (j.contains("metrics")) get_if(j.at("metrics"), "bins", cfg.metrics.bins);
    if (j.contains("pipeline")) {
        const auto& p = j.at("pipeline");
        get_if(p, "pairing", cfg.pipeline.pairing);
        get_if(p, "potts_gamma", cfg.pipeline.potts_gamma);
        get_if(p, "admm_lambda", cfg.pipeline.admm_lambda);
        get_if(p, "render_epochs", cfg.pipeline.render_epochs);
        get_if(p, "render_decay_start", cfg.pipeline.render_decay_start);
        get_if(p, "render_dropout", cfg.pipeline.render_dropout);
        get_if(p, "segmenter_epochs", cfg.pipeline.segmenter_epochs);
    }
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        get_if(p, "out", cfg.paths.out);
        get_if(p, "source_data", cfg.paths.source_data);
        get_if(p, "target_data", cfg.paths.target_data);
        get_if(p, "renderer", cfg.paths.renderer);
        get_if(p, "segmenter", cfg.paths.segmenter);
    }
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) { return config_from_json(read_text_file(path)); }

void validate(const RunConfig& cfg) {
    auto req = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(std::string("config: ") + msg);
    };
    req(cfg.potts.gamma >= 0.0, "potts.gamma must be >= 0");
    req(cfg.potts.max_outer >= 1, "potts.max_outer must be >= 1");
    req(cfg.structex.compose_sigma >= 0.0, "structex.compose_sigma must be >= 0");
    req(cfg.admm.order >= 1, "admm.order must be >= 1");
    req(cfg.admm.lambda > 0.0, "admm.lambda must be > 0");
    req(cfg.admm.rho > 0.0, "admm.rho must be > 0");
    req(cfg.admm.max_iterations >= 1, "admm.max_iterations must be >= 1");
    req(cfg.admm.tolerance >= 0.0, "admm.tolerance must be >= 0");
    req(cfg.admm.padding >= 0, "admm.padding must be >= 0");
    req(cfg.admm.scales >= 1, "admm.scales must be >= 1");
    req(cfg.admm.step_cap > 0.0, "admm.step_cap must be > 0");
    req(cfg.render.width >= 2, "render.width must be >= 2");
    req(cfg.render.epochs >= 1, "render.epochs must be >= 1");
    req(cfg.render.learning_rate > 0.0, "render.learning_rate must be > 0");
    req(cfg.render.batch_size >= 1, "render.batch_size must be >= 1");
    req(cfg.render.dropout >= 0.0 && cfg.render.dropout < 1.0, "render.dropout must be in [0,1)");
    req(cfg.metrics.bins >= 2, "metrics.bins must be >= 2");
    req(cfg.synth.size >= 8, "synth.size must be >= 8");
    req(cfg.pipeline.pairing == "per_image" || cfg.pipeline.pairing == "global",
        "pipeline.pairing must be per_image or global");
}

}  // namespace sua
