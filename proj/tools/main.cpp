// Command-line interface: synthetic rendering, loss queries, lighting fits,
// loss landscapes, mask generation and full pose estimation against a photo.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ilreg/ilreg.hpp"
#include "ilreg/serialize.hpp"

namespace {

using namespace ilreg;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct PhotoWithMask {
    AttributeImage photo;
    MaskMode mode = MaskMode::model_silhouette;
};

// Photo masks come in as PGM files; foreground is any pixel at or above half
// intensity. Supplying a mask implies photo-mask statistics unless the mode
// was set explicitly.
PhotoWithMask load_photo(const std::string& photo_path, const std::string& mask_path,
                         const std::string& mode_str) {
    PhotoWithMask p;
    p.photo = read_pgm(photo_path);
    if (!mask_path.empty()) {
        const AttributeImage mask = read_pgm(mask_path);
        if (!mask.same_dims(p.photo)) throw ShapeError("mask dimensions do not match the photo");
        for (size_t i = 0; i < p.photo.mask.size(); ++i)
            p.photo.mask[i] = mask.data[i] >= 0.5 ? 1 : 0;
        p.mode = MaskMode::photo_mask;
    }
    if (!mode_str.empty()) p.mode = mask_mode_from_string(mode_str);
    if (p.mode == MaskMode::photo_mask && mask_path.empty())
        throw ConfigError("photo mask mode requires --mask");
    return p;
}

CameraConfig camera_for(const AttributeImage& photo) {
    CameraConfig cam;
    cam.width = photo.width;
    cam.height = photo.height;
    return cam;
}

void emit(const nlohmann::ordered_json& j) { std::cout << j.dump() << "\n"; }

int dispatch(CLI::App& app, int argc, char** argv) {
    std::string mesh_path, pose_path, light_path, photo_path, mask_path, init_path;
    std::string out_path, trace_path, mask_mode_str, params_str;
    double bg = 0.0, range = 0.2, margin = 1.2;
    int width = 800, height = 600, steps = 41, restarts = 3, depth = 8;
    bool freeze_ortho = false;

    app.require_subcommand(1);

    CLI::App* render = app.add_subcommand("render", "shade the model at a pose into a photo");
    render->add_option("--mesh", mesh_path)->required();
    render->add_option("--pose", pose_path)->required();
    render->add_option("--light", light_path)->required();
    render->add_option("--out", out_path)->required();
    render->add_option("--bg", bg, "background intensity");
    render->add_option("--width", width);
    render->add_option("--height", height);
    render->add_option("--depth", depth, "PGM bit depth: 8 or 16")
        ->check(CLI::IsMember({8, 16}));

    CLI::App* attributes =
        app.add_subcommand("attributes", "rasterize the 4-channel attribute image");
    attributes->add_option("--mesh", mesh_path)->required();
    attributes->add_option("--pose", pose_path)->required();
    attributes->add_option("--out", out_path)->required();
    attributes->add_option("--width", width);
    attributes->add_option("--height", height);

    CLI::App* loss = app.add_subcommand("loss", "invariant loss between a photo and a pose");
    loss->add_option("--photo", photo_path)->required();
    loss->add_option("--mesh", mesh_path)->required();
    loss->add_option("--pose", pose_path)->required();
    loss->add_option("--mask", mask_path);
    loss->add_option("--mask-mode", mask_mode_str)
        ->check(CLI::IsMember({"silhouette", "full", "photo"}));

    CLI::App* fit = app.add_subcommand("fit-light", "closed-form lighting fit at a pose");
    fit->add_option("--photo", photo_path)->required();
    fit->add_option("--mesh", mesh_path)->required();
    fit->add_option("--pose", pose_path)->required();

    CLI::App* landscape = app.add_subcommand("landscape", "loss grid over two pose parameters");
    landscape->add_option("--photo", photo_path)->required();
    landscape->add_option("--mesh", mesh_path)->required();
    landscape->add_option("--pose", pose_path)->required();
    landscape->add_option("--params", params_str, "i,j indices into the normalized pose (0..6)")
        ->required();
    landscape->add_option("--range", range);
    landscape->add_option("--steps", steps);
    landscape->add_option("--out", out_path)->required();
    landscape->add_option("--mask", mask_path);
    landscape->add_option("--mask-mode", mask_mode_str)
        ->check(CLI::IsMember({"silhouette", "full", "photo"}));

    CLI::App* estimate = app.add_subcommand("estimate", "optimize the pose against a photo");
    estimate->add_option("--photo", photo_path)->required();
    estimate->add_option("--mesh", mesh_path)->required();
    estimate->add_option("--init", init_path)->required();
    estimate->add_option("--restarts", restarts);
    estimate->add_option("--mask", mask_path);
    estimate->add_option("--mask-mode", mask_mode_str)
        ->check(CLI::IsMember({"silhouette", "full", "photo"}));
    estimate->add_option("--out", out_path)->required();
    estimate->add_option("--trace", trace_path, "per-iteration CSV: iter,loss,diameter");
    estimate->add_flag("--freeze-ortho", freeze_ortho,
                       "keep an orthographic init orthographic (optimize 6 parameters)");

    CLI::App* genmask =
        app.add_subcommand("genmask", "silhouette-margin background-exclusion mask");
    genmask->add_option("--mesh", mesh_path)->required();
    genmask->add_option("--pose", pose_path)->required();
    genmask->add_option("--margin", margin);
    genmask->add_option("--out", out_path)->required();
    genmask->add_option("--width", width);
    genmask->add_option("--height", height);

    app.parse(argc, argv);

    // ---- execution ----

    if (render->parsed()) {
        const Mesh mesh = load_mesh(mesh_path);
        const Pose pose = pose_from_json(load_json_file(pose_path));
        const Lighting light = lighting_from_json(load_json_file(light_path));
        CameraConfig cam;
        cam.width = width;
        cam.height = height;
        const AttributeImage photo =
            shade(rasterize_attributes(mesh, pose, cam), light, {bg, true});
        write_pgm(photo, out_path, depth == 16 ? 65535 : 255);
        return kExitOk;
    }

    if (attributes->parsed()) {
        const Mesh mesh = load_mesh(mesh_path);
        const Pose pose = pose_from_json(load_json_file(pose_path));
        CameraConfig cam;
        cam.width = width;
        cam.height = height;
        write_aimg(rasterize_attributes(mesh, pose, cam), out_path);
        return kExitOk;
    }

    if (loss->parsed() || fit->parsed()) {
        const PhotoWithMask p = load_photo(photo_path, mask_path, mask_mode_str);
        const Mesh mesh = load_mesh(mesh_path);
        const Pose pose = pose_from_json(load_json_file(pose_path));
        const CameraConfig cam = camera_for(p.photo);
        const AttributeImage proj = rasterize_attributes(mesh, pose, cam);
        const CovStats stats = covariance_stats(p.photo, proj, p.mode);
        const Lighting fitted = fit_lighting(stats);
        if (fit->parsed()) {
            emit(lighting_to_json(fitted));
        } else {
            nlohmann::ordered_json j;
            j["loss"] = invariant_loss(stats);
            j["A"] = fitted.A;
            j["b"] = fitted.b;
            j["pixels"] = stats.count;
            emit(j);
        }
        return kExitOk;
    }

    if (landscape->parsed()) {
        const PhotoWithMask p = load_photo(photo_path, mask_path, mask_mode_str);
        const Mesh mesh = load_mesh(mesh_path);
        const Pose pose = pose_from_json(load_json_file(pose_path));
        LandscapeSpec spec;
        if (std::sscanf(params_str.c_str(), "%d,%d", &spec.param_i, &spec.param_j) != 2)
            throw ConfigError("--params expects two comma-separated indices, e.g. 0,1");
        spec.range = range;
        spec.steps = steps;
        const auto cells =
            run_landscape(p.photo, mesh, pose, spec, camera_for(p.photo), {p.mode, 100});
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot open " + out_path + " for writing");
        write_landscape_csv(cells, out);
        return kExitOk;
    }

    if (estimate->parsed()) {
        const PhotoWithMask p = load_photo(photo_path, mask_path, mask_mode_str);
        const Mesh mesh = load_mesh(mesh_path);
        const Pose init = pose_from_json(load_json_file(init_path));
        SimplexConfig cfg;
        cfg.restarts = restarts;
        const EstimateResult result = estimate_pose(p.photo, mesh, init, camera_for(p.photo), cfg,
                                                    {p.mode, 100}, freeze_ortho);
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot open " + out_path + " for writing");
        out << estimate_to_json(result).dump() << "\n";
        if (!trace_path.empty()) {
            std::ofstream trace(trace_path);
            if (!trace) throw IoError("cannot open " + trace_path + " for writing");
            char buf[96];
            for (const auto& row : result.trace) {
                std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", row.iter, row.loss,
                              row.diameter);
                trace << buf;
            }
        }
        emit(estimate_to_json(result));
        return kExitOk;
    }

    if (genmask->parsed()) {
        const Mesh mesh = load_mesh(mesh_path);
        const Pose pose = pose_from_json(load_json_file(pose_path));
        CameraConfig cam;
        cam.width = width;
        cam.height = height;
        write_pgm(generate_mask(mesh, pose, cam, {margin}), out_path);
        return kExitOk;
    }

    return kExitConfig;  // unreachable: a subcommand is required
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D-3D pose registration with an illumination-invariant loss"};
    try {
        return dispatch(app, argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
