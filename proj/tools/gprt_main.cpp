#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gprt/avatar.hpp"
#include "gprt/config.hpp"
#include "gprt/dataset.hpp"
#include "gprt/errors.hpp"
#include "gprt/fitting.hpp"
#include "gprt/parallel.hpp"
#include "gprt/synth.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool g_verbose = false;

void say(const std::string& msg) {
    if (g_verbose) std::cerr << msg << "\n";
}

void emit(const json& j) { std::cout << j.dump() << std::endl; }

gprt::Vec3 parse_vec3(const std::string& s, const char* what) {
    gprt::Vec3 v;
    char c1, c2;
    std::istringstream ss(s);
    if (!(ss >> v.x >> c1 >> v.y >> c2 >> v.z) || c1 != ',' || c2 != ',')
        throw gprt::InvalidInput(std::string(what) + ": expected x,y,z");
    return v;
}

// Environment input for rendering: .hdr/.pfm map or point-light JSON.
gprt::LightEnvironment load_light_input(const fs::path& path, int n_lights, int sh_order) {
    auto ext = path.extension().string();
    if (ext == ".hdr" || ext == ".pfm")
        return gprt::make_light_environment(gprt::load_envmap(path), n_lights, sh_order);
    if (ext == ".json")
        return gprt::make_light_environment(gprt::load_lights_json(path), sh_order);
    throw gprt::InvalidInput("light input must be .hdr, .pfm, or a point-light .json");
}

gprt::FitConfig fit_config_from(const gprt::Config& cfg, const gprt::FitConfig& defaults) {
    gprt::FitConfig c = defaults;
    c.learning_rate = cfg.get_double("fit.learning_rate", c.learning_rate);
    c.iterations = int(cfg.get_int("fit.iterations", c.iterations));
    c.seed = std::uint64_t(cfg.get_int("fit.seed", std::int64_t(c.seed)));
    c.beta1 = cfg.get_double("fit.beta1", c.beta1);
    c.beta2 = cfg.get_double("fit.beta2", c.beta2);
    c.epsilon = cfg.get_double("fit.epsilon", c.epsilon);
    c.project_nonneg = cfg.get_bool("fit.project_nonneg", c.project_nonneg);
    c.deterministic = cfg.get_bool("fit.deterministic", c.deterministic);
    c.batch_size = int(cfg.get_int("fit.batch_size", c.batch_size));
    c.light_init = cfg.get_double("fit.light_init", c.light_init);
    if (!c.valid()) throw gprt::InvalidInput("config: invalid fit settings");
    return c;
}

gprt::LossWeights weights_from(const gprt::Config& cfg) {
    gprt::LossWeights w;
    w.w_l1 = cfg.get_double("loss.w_l1", w.w_l1);
    w.w_ssim = cfg.get_double("loss.w_ssim", w.w_ssim);
    w.w_geom = cfg.get_double("loss.w_geom", w.w_geom);
    w.w_scale_reg = cfg.get_double("loss.w_scale_reg", w.w_scale_reg);
    w.w_negcolor = cfg.get_double("loss.w_negcolor", w.w_negcolor);
    w.w_alpha = cfg.get_double("loss.w_alpha", w.w_alpha);
    if (!w.valid()) throw gprt::InvalidInput("config: loss weights must be nonnegative");
    return w;
}

json config_echo(const gprt::FitConfig& c, const gprt::LossWeights& w) {
    return {{"learning_rate", c.learning_rate},
            {"iterations", c.iterations},
            {"seed", c.seed},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"project_nonneg", c.project_nonneg},
            {"deterministic", c.deterministic},
            {"batch_size", c.batch_size},
            {"light_init", c.light_init},
            {"weights",
             {{"w_l1", w.w_l1},
              {"w_ssim", w.w_ssim},
              {"w_geom", w.w_geom},
              {"w_scale_reg", w.w_scale_reg},
              {"w_negcolor", w.w_negcolor},
              {"w_alpha", w.w_alpha}}}};
}

void write_report(const json& report, const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw gprt::InvalidInput("cannot write report " + path.string());
    f << report.dump(2) << "\n";
}

struct SynthArgs {
    std::string out;
    int gaussians = 1000;
    std::uint64_t seed = 1;
    int olat = 0;
    int cameras = 2;
    int resolution = 128;
    bool five_light = false;
    double intensity = 0.25;
};

int cmd_synth(const SynthArgs& a) {
    fs::create_directories(a.out);
    gprt::Avatar avatar = gprt::make_toy_head(a.gaussians, a.seed);
    gprt::save_avatar(avatar, fs::path(a.out) / "avatar.json");
    say("wrote avatar with " + std::to_string(avatar.size()) + " gaussians");
    json out{{"avatar", (fs::path(a.out) / "avatar.json").string()},
             {"gaussians", avatar.size()}};
    if (a.olat > 0) {
        auto dirs = gprt::fibonacci_directions(a.olat);
        auto cams = gprt::default_cameras(a.cameras, a.resolution);
        gprt::OlatDataset data =
            gprt::make_olat_dataset(avatar, dirs, cams, a.intensity, a.five_light, a.seed);
        data.avatar_ref = "../avatar.json";
        gprt::save_olat_dataset(data, fs::path(a.out) / "dataset");
        out["dataset"] = (fs::path(a.out) / "dataset").string();
        out["frames"] = data.frames.size();
    }
    emit(out);
    return 0;
}

struct RenderArgs {
    std::string avatar, light, camera, out;
    std::string mode = "tiled";
    std::string neck, gaze_left, gaze_right;
    int n_lights = 512;
    bool schlick = false;
    bool nearest_light = false;
};

int cmd_render(const RenderArgs& a, bool env_only) {
    gprt::Avatar avatar = gprt::load_avatar(a.avatar);
    if (env_only) {
        auto ext = fs::path(a.light).extension().string();
        if (ext != ".hdr" && ext != ".pfm")
            throw gprt::InvalidInput("relight expects an environment map (.hdr/.pfm)");
    }
    gprt::LightEnvironment light = load_light_input(a.light, a.n_lights, avatar.sh_order);
    gprt::Camera cam = gprt::load_camera(a.camera);

    gprt::RigPose pose;
    pose.gaze_left = avatar.rig.rest_gaze_left;
    pose.gaze_right = avatar.rig.rest_gaze_right;
    if (!a.neck.empty()) pose.neck_rotation = parse_vec3(a.neck, "--neck");
    if (!a.gaze_left.empty()) pose.gaze_left = normalize(parse_vec3(a.gaze_left, "--gaze-left"));
    if (!a.gaze_right.empty())
        pose.gaze_right = normalize(parse_vec3(a.gaze_right, "--gaze-right"));

    gprt::RasterMode mode;
    if (a.mode == "tiled") mode = gprt::RasterMode::kTiled;
    else if (a.mode == "reference") mode = gprt::RasterMode::kReference;
    else throw gprt::InvalidInput("--mode must be tiled or reference");

    gprt::ShadingOptions opts;
    opts.schlick_visibility = a.schlick;
    opts.sg_nearest_light = a.nearest_light;

    auto t0 = std::chrono::steady_clock::now();
    gprt::RenderTarget rt = gprt::render_avatar(avatar, pose, light, cam, mode, opts);
    auto t1 = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    gprt::save_png(rt.color, a.out + ".png", &rt.alpha);
    gprt::save_pfm(rt.color, a.out + ".pfm");
    emit({{"ms", ms},
          {"gaussians", avatar.size()},
          {"width", cam.width},
          {"height", cam.height},
          {"outputs", {a.out + ".png", a.out + ".pfm"}}});
    return 0;
}

struct FitArgs {
    std::string dataset, config, out, avatar;
    int iterations = -1;  // override when >= 0
    bool deterministic = false;
};

gprt::Avatar fit_avatar(const FitArgs& a, const gprt::OlatDataset& data) {
    if (!a.avatar.empty()) return gprt::load_avatar(a.avatar);
    if (data.avatar_ref.empty())
        throw gprt::InvalidInput("dataset has no avatar reference; pass --avatar");
    return gprt::load_avatar(fs::path(a.dataset) / data.avatar_ref);
}

int cmd_fit_light(const FitArgs& a) {
    gprt::OlatDataset data = gprt::load_olat_dataset(a.dataset);
    gprt::Avatar avatar = fit_avatar(a, data);

    gprt::Config cfg =
        a.config.empty() ? gprt::Config() : gprt::Config::parse_file(a.config);
    gprt::FitConfig defaults;
    defaults.learning_rate = 0.01;
    defaults.iterations = 3000;
    gprt::FitConfig fit_cfg = fit_config_from(cfg, defaults);
    if (a.iterations >= 0) fit_cfg.iterations = a.iterations;
    if (a.deterministic) fit_cfg.deterministic = true;
    gprt::LossWeights weights = weights_from(cfg);
    int n_lights = int(cfg.get_int("fit.lights", 512));

    std::vector<gprt::FitView> views;
    for (const gprt::OlatFrame& f : data.frames) {
        gprt::FitView v;
        v.cam = data.cameras[f.camera];
        v.target = f.target;
        v.mask = f.mask;
        views.push_back(std::move(v));
    }
    gprt::RigPose rest;
    rest.gaze_left = avatar.rig.rest_gaze_left;
    rest.gaze_right = avatar.rig.rest_gaze_right;

    say("fitting " + std::to_string(n_lights) + " light intensities over " +
        std::to_string(views.size()) + " views");
    gprt::LightFitResult result = gprt::fit_lights(avatar, rest, views, n_lights, fit_cfg);

    fs::create_directories(a.out);
    gprt::save_lights_json(result.lights, fs::path(a.out) / "lights.json");

    json metrics;
    gprt::LightEnvironment env = gprt::make_light_environment(result.lights, avatar.sh_order);
    for (size_t i = 0; i < views.size(); ++i) {
        gprt::RenderTarget rt = gprt::render_avatar(avatar, rest, env, views[i].cam);
        metrics["psnr"].push_back(gprt::psnr(rt.color, views[i].target));
    }
    json report{{"command", "fit-light"},
                {"dataset", a.dataset},
                {"config", config_echo(fit_cfg, weights)},
                {"lights", n_lights},
                {"seed", result.report.seed},
                {"iterations", result.report.iterations},
                {"initial_loss", result.report.initial_loss},
                {"final_loss", result.report.final_loss},
                {"loss_history", result.report.loss_history},
                {"metrics", metrics},
                {"outputs", {{"lights", "lights.json"}}}};
    write_report(report, fs::path(a.out) / "report.json");
    emit({{"final_loss", result.report.final_loss},
          {"report", (fs::path(a.out) / "report.json").string()}});
    return 0;
}

int cmd_fit_transfer(const FitArgs& a) {
    gprt::OlatDataset data = gprt::load_olat_dataset(a.dataset);
    gprt::Avatar avatar = fit_avatar(a, data);

    gprt::Config cfg =
        a.config.empty() ? gprt::Config() : gprt::Config::parse_file(a.config);
    gprt::FitConfig defaults;
    defaults.learning_rate = 0.02;
    defaults.iterations = 2000;
    gprt::FitConfig fit_cfg = fit_config_from(cfg, defaults);
    if (a.iterations >= 0) fit_cfg.iterations = a.iterations;
    if (a.deterministic) fit_cfg.deterministic = true;
    gprt::LossWeights weights = weights_from(cfg);

    say("fitting transfer for " + std::to_string(avatar.size()) + " gaussians from " +
        std::to_string(data.frames.size()) + " frames");
    gprt::TransferFitResult result = gprt::fit_transfer(avatar, data, fit_cfg, weights);

    gprt::Avatar fitted = avatar;
    fitted.transfer = result.transfer;
    fs::create_directories(a.out);
    gprt::save_avatar(fitted, fs::path(a.out) / "avatar.json");

    json report{{"command", "fit-transfer"},
                {"dataset", a.dataset},
                {"config", config_echo(fit_cfg, weights)},
                {"seed", result.report.seed},
                {"iterations", result.report.iterations},
                {"initial_loss", result.report.initial_loss},
                {"final_loss", result.report.final_loss},
                {"loss_history", result.report.loss_history},
                {"ill_posed", result.report.ill_posed},
                {"outputs", {{"avatar", "avatar.json"}}}};
    write_report(report, fs::path(a.out) / "report.json");
    emit({{"final_loss", result.report.final_loss},
          {"ill_posed", result.report.ill_posed},
          {"report", (fs::path(a.out) / "report.json").string()}});
    return 0;
}

struct BenchArgs {
    std::string avatar, camera, out;
    int resolution = 0;
    int reps = 5;
    std::string modes = "tiled,reference";
};

int cmd_bench(const BenchArgs& a) {
    if (a.reps <= 0) throw gprt::InvalidInput("bench: repetitions must be >= 1");
    gprt::Avatar avatar = gprt::load_avatar(a.avatar);
    gprt::Camera cam = gprt::load_camera(a.camera);
    if (a.resolution > 0) {
        double scale = double(a.resolution) / cam.height;
        cam.fx *= scale;
        cam.fy *= scale;
        cam.width = cam.height = a.resolution;
        cam.cx = cam.cy = 0.5 * a.resolution;
    }
    gprt::LightEnvironment env = gprt::make_light_environment(
        gprt::EnvMap::constant(16, {1.0, 1.0, 1.0}), 512, avatar.sh_order);
    gprt::PosedAvatar posed{avatar.gaussians, avatar.normals};
    std::vector<gprt::Vec3> colors =
        gprt::shade_avatar(posed, avatar.transfer, env, cam);

    json modes_report;
    std::istringstream ms(a.modes);
    std::string mode_name;
    while (std::getline(ms, mode_name, ',')) {
        gprt::RasterMode mode;
        if (mode_name == "tiled") mode = gprt::RasterMode::kTiled;
        else if (mode_name == "reference") mode = gprt::RasterMode::kReference;
        else throw gprt::InvalidInput("bench: unknown mode " + mode_name);
        gprt::rasterize(posed.gaussians, colors, cam, mode);  // warm-up
        std::vector<double> times;
        for (int r = 0; r < a.reps; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            gprt::rasterize(posed.gaussians, colors, cam, mode);
            auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        double mean = 0.0;
        for (double t : times) mean += t;
        mean /= times.size();
        double var = 0.0;
        for (double t : times) var += (t - mean) * (t - mean);
        double stddev = std::sqrt(var / times.size());
        modes_report[mode_name] = {{"mean_ms", mean},
                                   {"std_ms", stddev},
                                   {"fps", mean > 0.0 ? 1000.0 / mean : 0.0}};
    }
    json report{{"command", "bench"},
                {"gaussians", avatar.size()},
                {"width", cam.width},
                {"height", cam.height},
                {"repetitions", a.reps},
                {"modes", modes_report}};
    if (!a.out.empty()) write_report(report, a.out);
    emit(report);
    return 0;
}

struct ConvertArgs {
    std::string in, out;
    int n_lights = 512;
    int sh_order = 3;
};

int cmd_convert(const ConvertArgs& a) {
    fs::path in(a.in), out(a.out);
    auto ie = in.extension().string(), oe = out.extension().string();
    bool in_env = ie == ".hdr" || ie == ".pfm";
    if (in_env && (oe == ".hdr" || oe == ".pfm")) {
        gprt::save_envmap(gprt::load_envmap(in), out);
    } else if (in_env && oe == ".json") {
        gprt::PointLightSet lights = gprt::envmap_to_pointlights(gprt::load_envmap(in), a.n_lights);
        gprt::save_lights_json(lights, out);
    } else if (ie == ".json" && oe == ".json") {
        gprt::PointLightSet lights = gprt::load_lights_json(in);
        gprt::save_sh_json(gprt::pointlights_to_sh(lights, a.sh_order), out);
    } else {
        throw gprt::InvalidInput("convert: unsupported conversion " + ie + " -> " + oe);
    }
    emit({{"in", a.in}, {"out", a.out}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relightable Gaussian avatar toolkit"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (default: GPRT_THREADS or hardware)");
    app.add_flag("--verbose", g_verbose, "human-readable progress on stderr");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic avatar (and OLAT data)");
    s->add_option("--out", synth.out)->required();
    s->add_option("--gaussians", synth.gaussians);
    s->add_option("--seed", synth.seed);
    s->add_option("--olat", synth.olat, "number of OLAT light directions (0 = none)");
    s->add_option("--cameras", synth.cameras);
    s->add_option("--resolution", synth.resolution);
    s->add_flag("--five-light", synth.five_light, "group lights in fives per frame");
    s->add_option("--intensity", synth.intensity);

    RenderArgs render;
    auto* r = app.add_subcommand("render", "render an avatar under a light");
    r->add_option("--avatar", render.avatar)->required();
    r->add_option("--light", render.light)->required();
    r->add_option("--camera", render.camera)->required();
    r->add_option("--out", render.out)->required();
    r->add_option("--mode", render.mode, "tiled|reference");
    r->add_option("--neck", render.neck, "axis-angle x,y,z");
    r->add_option("--gaze-left", render.gaze_left, "x,y,z");
    r->add_option("--gaze-right", render.gaze_right, "x,y,z");
    r->add_option("--lights-n", render.n_lights, "point lights sampled from an env map");
    r->add_flag("--schlick", render.schlick);
    r->add_flag("--nearest-light", render.nearest_light);

    RenderArgs relight;
    auto* rl = app.add_subcommand("relight", "render under an environment map");
    rl->add_option("--avatar", relight.avatar)->required();
    rl->add_option("--env", relight.light)->required();
    rl->add_option("--camera", relight.camera)->required();
    rl->add_option("--out", relight.out)->required();
    rl->add_option("--mode", relight.mode);
    rl->add_option("--lights-n", relight.n_lights);

    FitArgs fit_light;
    auto* fl = app.add_subcommand("fit-light", "fit environment light intensities");
    fl->add_option("--dataset", fit_light.dataset)->required();
    fl->add_option("--config", fit_light.config);
    fl->add_option("--out", fit_light.out)->required();
    fl->add_option("--avatar", fit_light.avatar);
    fl->add_option("--iterations", fit_light.iterations);
    fl->add_flag("--deterministic", fit_light.deterministic);

    FitArgs fit_transfer;
    auto* ft = app.add_subcommand("fit-transfer", "fit per-gaussian transfer parameters");
    ft->add_option("--dataset", fit_transfer.dataset)->required();
    ft->add_option("--config", fit_transfer.config);
    ft->add_option("--out", fit_transfer.out)->required();
    ft->add_option("--avatar", fit_transfer.avatar);
    ft->add_option("--iterations", fit_transfer.iterations);
    ft->add_flag("--deterministic", fit_transfer.deterministic);

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "rasterizer throughput");
    b->add_option("--avatar", bench.avatar)->required();
    b->add_option("--camera", bench.camera)->required();
    b->add_option("--resolution", bench.resolution);
    b->add_option("--reps", bench.reps);
    b->add_option("--modes", bench.modes);
    b->add_option("--out", bench.out, "optional report path");

    ConvertArgs convert;
    auto* c = app.add_subcommand("convert", "convert light/environment formats");
    c->add_option("--in", convert.in)->required();
    c->add_option("--out", convert.out)->required();
    c->add_option("--lights-n", convert.n_lights);
    c->add_option("--sh-order", convert.sh_order);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 2;
    }
    if (threads > 0) gprt::set_thread_count(threads);

    try {
        if (s->parsed()) return cmd_synth(synth);
        if (r->parsed()) return cmd_render(render, false);
        if (rl->parsed()) return cmd_render(relight, true);
        if (fl->parsed()) return cmd_fit_light(fit_light);
        if (ft->parsed()) return cmd_fit_transfer(fit_transfer);
        if (b->parsed()) return cmd_bench(bench);
        if (c->parsed()) return cmd_convert(convert);
    } catch (const gprt::InvalidInput& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 2;
    } catch (const gprt::Divergence& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 3;
    }
    return 2;
}
