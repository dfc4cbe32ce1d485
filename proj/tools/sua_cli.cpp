#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "sua/config.hpp"
#include "sua/diffeo.hpp"
#include "sua/io.hpp"
#include "sua/pipeline.hpp"
#include "sua/plots.hpp"
#include "sua/potts.hpp"
#include "sua/renderer.hpp"
#include "sua/segmenter.hpp"
#include "sua/ssim.hpp"
#include "sua/structex.hpp"
#include "sua/synth.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out = "out";
    long long seed = -1;
    bool dump_config = false;
};

sua::RunConfig resolve_config(const GlobalArgs& g) {
    sua::RunConfig cfg;
    if (!g.config_path.empty()) cfg = sua::load_config(g.config_path);
    if (g.seed >= 0) cfg.seed = static_cast<uint64_t>(g.seed);
    if (g.out != "out" || cfg.paths.out.empty()) cfg.paths.out = g.out;
    return cfg;
}

sua::Renderer obtain_renderer(const sua::RunConfig& cfg, const std::string& path,
                              const sua::Dataset& tgt) {
    if (!path.empty()) return sua::Renderer::load(path);
    std::cerr << "[pipeline] training renderer (" << cfg.pipeline.render_epochs << " epochs)\n";
    auto trained = sua::train_renderer(tgt, sua::pipeline_render_config(cfg), cfg.seed,
                                       cfg.pipeline.potts_gamma);
    return std::move(trained.renderer);
}

sua::Segmenter obtain_segmenter(const sua::RunConfig& cfg, const std::string& path,
                                const sua::Dataset& tgt) {
    if (!path.empty()) return sua::Segmenter::load(path);
    std::cerr << "[pipeline] training segmenter (" << cfg.pipeline.segmenter_epochs
              << " epochs)\n";
    auto trained = sua::train_segmenter(tgt, sua::pipeline_segmenter_config(cfg), cfg.seed);
    std::cerr << "[pipeline] segmenter train dice " << trained.train_dice << "\n";
    return std::move(trained.segmenter);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure-unbiased adversarial translation pipeline"};
    app.require_subcommand(0, 1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--seed", g.seed, "Seed override");
    app.add_option("--out", g.out, "Output directory");
    app.add_flag("--dump-config", g.dump_config, "Print the default config JSON and exit");

    auto* synth = app.add_subcommand("synth", "Generate the synthetic two-domain benchmark");

    auto* potts = app.add_subcommand("potts", "Potts clustering of one image");
    std::string potts_image;
    potts->add_option("--image", potts_image, "Input image (png or raw)")->required();

    auto* reg = app.add_subcommand("register", "Register two images");
    std::string reg_src, reg_tgt;
    reg->add_option("--src", reg_src, "Moving image")->required();
    reg->add_option("--tgt", reg_tgt, "Fixed image")->required();

    auto* train_render = app.add_subcommand("train-render", "Train the rendering network");
    std::string tr_data;
    train_render->add_option("--data", tr_data, "Target dataset directory");

    auto* train_seg = app.add_subcommand("train-seg", "Train the segmentation network");
    std::string ts_data;
    train_seg->add_option("--data", ts_data, "Labeled target dataset directory");

    auto* translate = app.add_subcommand("translate", "Translate a source dataset");
    std::string t_src, t_tgt, t_renderer;
    translate->add_option("--src-data", t_src, "Source dataset directory");
    translate->add_option("--tgt-data", t_tgt, "Target dataset directory");
    translate->add_option("--renderer", t_renderer, "Renderer weights (.suaw)");

    auto* pipe = app.add_subcommand("pipeline", "Full translate+segment+warp-back pipeline");
    std::string p_src, p_tgt, p_renderer, p_segmenter;
    pipe->add_option("--src-data", p_src, "Source dataset directory");
    pipe->add_option("--tgt-data", p_tgt, "Target dataset directory");
    pipe->add_option("--renderer", p_renderer, "Renderer weights (.suaw)");
    pipe->add_option("--segmenter", p_segmenter, "Segmenter weights (.suaw)");

    auto* eval = app.add_subcommand("eval", "Evaluate persisted pipeline artifacts");
    std::string e_run, e_src, e_tgt;
    eval->add_option("--run", e_run, "Directory with pipeline artifacts");
    eval->add_option("--src-data", e_src, "Source dataset directory (with masks)");
    eval->add_option("--tgt-data", e_tgt, "Target dataset directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (g.dump_config) {
            std::cout << sua::config_to_json(sua::RunConfig{});
            return 0;
        }
        sua::RunConfig cfg = resolve_config(g);
        const std::string out = cfg.paths.out;
        fs::create_directories(out);

        if (synth->parsed()) {
            const auto res = sua::synth_generate(cfg.synth, cfg.seed);
            sua::save_dataset(res.source, out + "/source", &res.oracle.warps);
            sua::save_dataset(res.target, out + "/target");
            std::cout << "synth: wrote " << res.source.items.size() << " source and "
                      << res.target.items.size() << " target items under " << out << "\n";
            return 0;
        }

        if (potts->parsed()) {
            const sua::Image img = sua::load_image(potts_image);
            const auto cm = sua::potts_cluster(img, cfg.potts.gamma, cfg.potts);
            sua::SegMask labels(cm.height, cm.width, cm.region_count);
            for (size_t i = 0; i < cm.labels.size(); ++i)
                labels.labels[i] = static_cast<uint16_t>(cm.labels[i]);
            sua::save_mask(labels, out + "/labels.suat");
            sua::save_image(cm.reconstruction(), out + "/recon.png");
            sua::save_image(sua::edge_sketch(cm).as_image(), out + "/edges.png");
            sua::save_image(sua::structure_mask(cm), out + "/mask.png");
            std::cout << "potts: regions=" << cm.region_count << " energy=" << cm.energy << "\n";
            return 0;
        }

        if (reg->parsed()) {
            const sua::Image src = sua::load_image(reg_src);
            const sua::Image tgt = sua::load_image(reg_tgt);
            const auto r = sua::register_images(src, tgt, cfg.admm);
            sua::save_diffeo_pair(r.pair, out + "/phi_0.suat", out + "/phi_inv_0.suat",
                                  out + "/diffeo_0.json", cfg.admm);
            sua::save_image(sua::warp(src, r.pair.forward), out + "/warped.png");
            sua::save_image(sua::normalize_grid(sua::jacobian_determinant(r.pair.forward)),
                            out + "/jacobian.png");
            sua::save_image(sua::plot_deformation_grid(r.pair.forward),
                            out + "/deformation_grid.png");
            std::cout << "register: steps=" << r.pair.steps << " ssim " << r.ssim_initial
                      << " -> " << r.ssim_final << "\n";
            return 0;
        }

        if (train_render->parsed()) {
            const std::string dir = tr_data.empty() ? cfg.paths.target_data : tr_data;
            const sua::Dataset tgt = sua::load_dataset(dir);
            auto trained = sua::train_renderer(tgt, sua::pipeline_render_config(cfg), cfg.seed,
                                               cfg.pipeline.potts_gamma);
            trained.renderer.save(out + "/renderer.suaw");
            sua::write_text_file(out + "/loss_log.csv", sua::loss_log_csv(trained.log));
            std::cout << "train-render: " << trained.log.size() << " epochs, final L1 "
                      << trained.log.back().mean.l1 << "\n";
            return 0;
        }

        if (train_seg->parsed()) {
            const std::string dir = ts_data.empty() ? cfg.paths.target_data : ts_data;
            const sua::Dataset tgt = sua::load_dataset(dir);
            auto trained =
                sua::train_segmenter(tgt, sua::pipeline_segmenter_config(cfg), cfg.seed);
            trained.segmenter.save(out + "/segmenter.suaw");
            std::cout << "train-seg: train dice " << trained.train_dice << "\n";
            return 0;
        }

        if (translate->parsed()) {
            const sua::Dataset src =
                sua::load_dataset(t_src.empty() ? cfg.paths.source_data : t_src);
            const sua::Dataset tgt =
                sua::load_dataset(t_tgt.empty() ? cfg.paths.target_data : t_tgt);
            sua::Renderer renderer =
                obtain_renderer(cfg, t_renderer.empty() ? cfg.paths.renderer : t_renderer, tgt);
            sua::translate_dataset(src, tgt, renderer, cfg, out);
            std::cout << "translate: wrote " << src.items.size() << " rendered images under "
                      << out << "\n";
            return 0;
        }

        if (pipe->parsed()) {
            const sua::Dataset src =
                sua::load_dataset(p_src.empty() ? cfg.paths.source_data : p_src);
            const sua::Dataset tgt =
                sua::load_dataset(p_tgt.empty() ? cfg.paths.target_data : p_tgt);
            sua::Renderer renderer =
                obtain_renderer(cfg, p_renderer.empty() ? cfg.paths.renderer : p_renderer, tgt);
            sua::Segmenter segmenter = obtain_segmenter(
                cfg, p_segmenter.empty() ? cfg.paths.segmenter : p_segmenter, tgt);
            auto run = sua::run_pipeline(src, tgt, renderer, segmenter, cfg, out);
            const auto report = sua::evaluate(run, src, tgt, cfg, out);
            std::cout << "pipeline: Dice " << report.dice << " mIoU " << report.miou
                      << " D_Bhat " << (report.d_bhat ? *report.d_bhat : -1.0) << "\n";
            return 0;
        }

        if (eval->parsed()) {
            const sua::Dataset src =
                sua::load_dataset(e_src.empty() ? cfg.paths.source_data : e_src);
            const sua::Dataset tgt =
                sua::load_dataset(e_tgt.empty() ? cfg.paths.target_data : e_tgt);
            const std::string run_dir = e_run.empty() ? cfg.paths.out : e_run;
            auto run = sua::load_pipeline_run(run_dir, static_cast<int>(src.items.size()));
            const auto report = sua::evaluate(run, src, tgt, cfg, out);
            std::cout << "eval: Dice " << report.dice << " mIoU " << report.miou << " D_Bhat "
                      << (report.d_bhat ? *report.d_bhat : -1.0) << "\n";
            return 0;
        }

        std::cout << app.help();
        return 0;
    } catch (const std::exception& e) {
        const std::string stage =
            app.get_subcommands().empty() ? "global" : app.get_subcommands().front()->get_name();
        std::cerr << "[" << stage << "] error: " << e.what() << "\n";
        return 1;
    }
}
