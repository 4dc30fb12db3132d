// sasc: degrade / restore / eval / dump-filters / oracle-cg / replay

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sasc/io.hpp"
#include "sasc/noise.hpp"
#include "sasc/sasc.hpp"

namespace {

using json = nlohmann::json;
using namespace sasc;

constexpr const char* tool_version = "sasc 1.0";

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// flat key=value config files

std::map<std::string, std::string> read_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw Failure("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(f, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Failure(path + ":" + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t n = 0;
        const double d = std::stod(v, &n);
        if (n != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw Failure("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v)
{
    const double d = to_double(key, v);
    if (d != std::floor(d)) throw Failure("config: '" + key + "' expects an integer, got '" + v + "'");
    return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw Failure("config: '" + key + "' expects a boolean, got '" + v + "'");
}

// ---------------------------------------------------------------------------
// manifests

void write_manifest(const std::string& path, const json& j)
{
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Failure("cannot write manifest '" + path + "'");
    f << j.dump(2) << "\n";
}

std::string manifest_path(const std::string& explicit_path, const std::string& out)
{
    return explicit_path.empty() ? out + ".json" : explicit_path;
}

json base_manifest(const std::string& command, const std::vector<std::string>& argv)
{
    return json{{"tool", tool_version},
                {"command", command},
                {"argv", argv},
                {"cwd", std::filesystem::current_path().string()}};
}

// ---------------------------------------------------------------------------
// degradation specs shared by degrade / restore / oracle-cg

struct DegradeSpec {
    std::string kind = "noise"; // noise | blur | gauss-down | bicubic-down
    std::string kernel_file;
    double blur_sigma = 1.6;
    int scale = 1;
};

Kernel load_or_make_kernel(const DegradeSpec& d)
{
    if (!d.kernel_file.empty()) return decode_kernel(binary::read_file(d.kernel_file));
    return make_gaussian_kernel(d.blur_sigma);
}

DegradationOp make_operator(const DegradeSpec& d, Shape input)
{
    if (d.kind == "noise") return DegradationOp::identity(input);
    if (d.kind == "blur") return DegradationOp::blur(load_or_make_kernel(d), input);
    if (d.kind == "gauss-down") return DegradationOp::gaussian_downsample(load_or_make_kernel(d), d.scale, input);
    if (d.kind == "bicubic-down") return DegradationOp::bicubic_downsample(d.scale, input);
    throw Failure("unknown degradation kind '" + d.kind + "'");
}

json describe(const DegradeSpec& d)
{
    return json{{"kind", d.kind}, {"kernel", d.kernel_file}, {"blur_sigma", d.blur_sigma}, {"scale", d.scale}};
}

void add_degrade_options(CLI::App* app, DegradeSpec& d)
{
    app->add_option("--kernel", d.kernel_file, "Blur kernel file (SASCFBK1 with one filter)");
    app->add_option("--blur-sigma", d.blur_sigma, "Gaussian blur std (pixels) when no kernel file is given")->capture_default_str();
}

// ---------------------------------------------------------------------------
// degrade

struct DegradeArgs {
    std::string in, out, manifest;
    DegradeSpec spec;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

int cmd_degrade(const DegradeArgs& a, const std::vector<std::string>& argv)
{
    if (a.sigma < 0.0) throw Failure("--sigma must be >= 0");
    if (a.spec.kind == "noise" || a.spec.kind == "blur") {
        if (a.spec.scale != 1) throw Failure("--scale only applies to gauss-down and bicubic-down");
    } else if (a.spec.scale < 2) {
        throw Failure("--scale must be >= 2 for downsampling kinds");
    }
    const Image x = io::read_image(a.in);
    const DegradationOp op = make_operator(a.spec, {x.height(), x.width()});
    GaussianNoise noise(a.seed);
    const Image y = noise.add_to(apply_h(op, x), a.sigma / 255.0);
    io::write_image(a.out, y);

    json m = base_manifest("degrade", argv);
    m["inputs"] = {a.in};
    m["outputs"] = {a.out};
    m["degradation"] = describe(a.spec);
    m["sigma_255"] = a.sigma;
    m["seed"] = a.seed;
    m["noise_generator"] = GaussianNoise::algorithm;
    m["metrics"] = {{"psnr_vs_input", op.downsamples() ? json(nullptr) : json(psnr(x, y))}};
    write_manifest(manifest_path(a.manifest, a.out), m);
    std::cout << "wrote " << a.out << " (" << y.height() << "x" << y.width() << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// restore

struct RestoreArgs {
    std::string in, out, manifest, mode = "denoise", weights, stages, config, reference, bank_file;
    std::string sr_kind = "bicubic";
    DegradeSpec spec;
    std::optional<std::string> prior;
    std::optional<double> sigma;
    std::optional<int> filter_side;
    std::optional<double> lambda, eta, step, mix, h;
    std::optional<int> iters, patch_side, stride, group_size, window;
    bool freeze_prior = false;
};

struct ResolvedRestore {
    SolverConfig cfg;
    int filter_side = 5;
};

ResolvedRestore resolve_config(const RestoreArgs& a)
{
    std::map<std::string, std::string> kv;
    if (!a.config.empty()) kv = read_config(a.config);
    double sigma = 25.0;
    if (kv.count("sigma")) sigma = to_double("sigma", kv["sigma"]);
    if (a.sigma) sigma = *a.sigma;
    if (sigma < 0.0) throw Failure("sigma must be >= 0");
    // Defaults derive from sigma; the file then overrides them, and flags override the file.
    ResolvedRestore r{default_config(std::max(sigma, 1.0) / 255.0), 5};
    auto& c = r.cfg;

    static const std::vector<std::string> known = {"sigma", "eta", "lambda", "step", "mix", "iters", "prior", "patch_side",
                                                   "stride", "group_size", "window", "h", "freeze_prior",
                                                   "reweight_groups", "filter_side", "power_iterations"};
    for (const auto& [k, v] : kv) {
        if (std::find(known.begin(), known.end(), k) == known.end()) throw Failure("config: unknown key '" + k + "'");
        if (k == "eta") c.eta = to_double(k, v);
        else if (k == "lambda") c.lambda = to_double(k, v);
        else if (k == "step") c.step = to_double(k, v);
        else if (k == "mix") c.mix = to_double(k, v);
        else if (k == "iters") c.iterations = to_int(k, v);
        else if (k == "prior") c.prior = parse_prior_mode(v);
        else if (k == "patch_side") c.nonlocal.patch_side = to_int(k, v);
        else if (k == "stride") c.nonlocal.stride = to_int(k, v);
        else if (k == "group_size") c.nonlocal.group_size = to_int(k, v);
        else if (k == "window") c.nonlocal.window = to_int(k, v);
        else if (k == "h") c.nonlocal.bandwidth = to_double(k, v);
        else if (k == "freeze_prior") c.freeze_prior = to_bool(k, v);
        else if (k == "reweight_groups") c.reweight_groups = to_bool(k, v);
        else if (k == "filter_side") r.filter_side = to_int(k, v);
        else if (k == "power_iterations") c.power_iterations = to_int(k, v);
    }
    if (a.prior) c.prior = parse_prior_mode(*a.prior);
    if (a.filter_side) r.filter_side = *a.filter_side;
    return r;
}

json describe(const SolverConfig& c, int filter_side)
{
    return json{{"eta", c.eta},
                {"lambda", c.lambda},
                {"step", c.step},
                {"mix", c.mix},
                {"iters", c.iterations},
                {"prior", to_string(c.prior)},
                {"patch_side", c.nonlocal.patch_side},
                {"stride", c.nonlocal.stride},
                {"group_size", c.nonlocal.group_size},
                {"window", c.nonlocal.window},
                {"h", c.nonlocal.bandwidth},
                {"freeze_prior", c.freeze_prior},
                {"reweight_groups", c.reweight_groups},
                {"filter_side", filter_side},
                {"power_iterations", c.power_iterations}};
}

DegradeSpec restore_degradation(const RestoreArgs& a)
{
    DegradeSpec d = a.spec;
    if (a.mode == "denoise") {
        if (d.scale != 1) throw Failure("--scale is only valid with --mode sr");
        d.kind = "noise";
    } else if (a.mode == "deblur") {
        if (d.scale != 1) throw Failure("--scale is only valid with --mode sr");
        d.kind = "blur";
    } else if (a.mode == "sr") {
        if (d.scale < 2) throw Failure("--mode sr needs --scale >= 2");
        if (a.sr_kind == "bicubic") d.kind = "bicubic-down";
        else if (a.sr_kind == "gauss") d.kind = "gauss-down";
        else throw Failure("--sr-kind must be bicubic or gauss");
    } else {
        throw Failure("--mode must be denoise, deblur or sr");
    }
    return d;
}

int cmd_restore(const RestoreArgs& a, const std::vector<std::string>& argv)
{
    const DegradeSpec d = restore_degradation(a);
    auto [cfg, filter_side] = resolve_config(a);
    if (a.lambda) cfg.lambda = *a.lambda;
    if (a.eta) cfg.eta = *a.eta;
    if (a.step) cfg.step = *a.step;
    if (a.mix) cfg.mix = *a.mix;
    if (a.iters) cfg.iterations = *a.iters;
    if (a.h) cfg.nonlocal.bandwidth = *a.h;
    if (a.patch_side) cfg.nonlocal.patch_side = *a.patch_side;
    if (a.stride) cfg.nonlocal.stride = *a.stride;
    if (a.group_size) cfg.nonlocal.group_size = *a.group_size;
    if (a.window) cfg.nonlocal.window = *a.window;
    if (a.freeze_prior) cfg.freeze_prior = true;
    cfg.validate();

    std::optional<PriorNetWeights> net;
    if (uses_external(cfg.prior)) {
        if (a.weights.empty()) throw Failure("--prior " + to_string(cfg.prior) + " requires --weights FILE");
        net = load_weights(binary::read_file(a.weights));
    }

    const Image y = io::read_image(a.in);
    const Shape hr{y.height() * d.scale, y.width() * d.scale};
    const DegradationOp op = make_operator(d, hr);

    Image x;
    json m = base_manifest("restore", argv);
    if (!a.stages.empty()) {
        const StageParams stages = decode_stages(binary::read_file(a.stages));
        StagedOptions opt;
        opt.prior = cfg.prior;
        opt.mix = cfg.mix;
        opt.nonlocal = cfg.nonlocal;
        opt.freeze_prior = cfg.freeze_prior;
        opt.reweight_groups = cfg.reweight_groups;
        x = restore_staged(y, op, stages, net ? &*net : nullptr, opt);
        m["stages"] = {{"file", a.stages}, {"count", stages.size()}};
    } else {
        const FilterBank bank = a.bank_file.empty() ? make_dct_bank(filter_side)
                                                    : decode_filter_bank(binary::read_file(a.bank_file));
        if (cfg.step == 0.0) cfg.step = auto_step(op, bank, cfg.eta, cfg.power_iterations);
        x = restore(y, op, bank, cfg, net ? &*net : nullptr);
    }
    io::write_image(a.out, x);

    m["inputs"] = {a.in};
    m["outputs"] = {a.out};
    m["mode"] = a.mode;
    m["degradation"] = describe(d);
    m["config"] = describe(cfg, filter_side);
    m["weights"] = a.weights;
    m["bank"] = a.bank_file;
    if (!a.reference.empty()) {
        const Image ref = io::read_image(a.reference);
        const double p = psnr(ref, x), s = ssim(ref, x);
        char line[128];
        std::snprintf(line, sizeof line, "PSNR %.4f dB  SSIM %.6f", p, s);
        std::cout << line << "\n";
        m["metrics"] = {{"reference", a.reference}, {"psnr_db", p}, {"ssim", s}};
    }
    write_manifest(manifest_path(a.manifest, a.out), m);
    std::cout << "wrote " << a.out << " (" << x.height() << "x" << x.width() << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::vector<std::string> files;
    std::string csv;
};

int cmd_eval(const EvalArgs& a)
{
    if (a.files.empty() || a.files.size() % 2 != 0) throw Failure("eval expects pairs: REF TEST [REF TEST ...]");
    struct Row {
        std::string name;
        std::string psnr, ssim;
        double p = 0, s = 0;
    };
    std::vector<Row> rows;
    std::vector<std::string> failures;
    for (std::size_t i = 0; i < a.files.size(); i += 2) {
        const std::string name = a.files[i] + " | " + a.files[i + 1];
        try {
            const Image ref = io::read_image(a.files[i]);
            const Image test = io::read_image(a.files[i + 1]);
            if (!ref.same_shape(test))
                throw error("shape mismatch " + std::to_string(ref.height()) + "x" + std::to_string(ref.width()) + " vs " +
                            std::to_string(test.height()) + "x" + std::to_string(test.width()));
            Row r{name, "", "", psnr(ref, test), ssim(ref, test)};
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.4f", r.p);
            r.psnr = buf;
            std::snprintf(buf, sizeof buf, "%.6f", r.s);
            r.ssim = buf;
            rows.push_back(std::move(r));
        } catch (const std::exception& e) {
            failures.push_back(name + ": " + e.what());
        }
    }

    double sp = 0, ss = 0;
    for (const auto& r : rows) {
        sp += r.p;
        ss += r.s;
    }
    const double n = static_cast<double>(std::max<std::size_t>(rows.size(), 1));
    char avg_p[64], avg_s[64];
    std::snprintf(avg_p, sizeof avg_p, "%.4f", sp / n);
    std::snprintf(avg_s, sizeof avg_s, "%.6f", ss / n);

    std::size_t width = 7;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
    std::cout << pad("pair") << "  " << "PSNR(dB)" << "  " << "SSIM" << "\n";
    for (const auto& r : rows) std::cout << pad(r.name) << "  " << r.psnr << "  " << r.ssim << "\n";
    if (!rows.empty()) std::cout << pad("average") << "  " << avg_p << "  " << avg_s << "\n";
    for (const auto& f : failures) std::cerr << "error: " << f << "\n";

    if (!a.csv.empty()) {
        std::ofstream f(a.csv, std::ios::trunc);
        if (!f) throw Failure("cannot write '" + a.csv + "'");
        f << "reference,test,psnr_db,ssim\n";
        for (std::size_t i = 0, k = 0; i < a.files.size(); i += 2) {
            const std::string name = a.files[i] + " | " + a.files[i + 1];
            if (k < rows.size() && rows[k].name == name) {
                f << a.files[i] << "," << a.files[i + 1] << "," << rows[k].psnr << "," << rows[k].ssim << "\n";
                ++k;
            }
        }
        if (!rows.empty()) f << "average,," << avg_p << "," << avg_s << "\n";
    }
    return failures.empty() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// dump-filters

struct DumpArgs {
    std::string bank, stages, out, manifest;
    int stage = 0;
    int dct = 0;
};

int cmd_dump_filters(const DumpArgs& a, const std::vector<std::string>& argv)
{
    const int sources = !a.bank.empty() + !a.stages.empty() + (a.dct > 0);
    if (sources != 1) throw Failure("dump-filters needs exactly one of --bank, --stages, --dct");
    FilterBank bank;
    if (!a.bank.empty()) bank = decode_filter_bank(binary::read_file(a.bank));
    else if (a.dct > 0) bank = make_dct_bank(a.dct);
    else {
        const auto p = decode_stages(binary::read_file(a.stages));
        if (a.stage < 0 || a.stage >= p.size()) throw Failure("--stage out of range");
        bank = p.stages[static_cast<std::size_t>(a.stage)].analysis;
    }

    const int k = bank.count(), f = bank.side();
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
    const int rows = (k + cols - 1) / cols;
    Image mosaic(rows * f, cols * f, 0.5);
    std::vector<double> scales;
    for (int i = 0; i < k; ++i) {
        const auto& w = bank[i];
        double peak = 0.0;
        for (double t : w.taps) peak = std::max(peak, std::abs(t));
        const double scale = 2.0 * peak; // tap = (pixel - 0.5) * scale
        scales.push_back(scale);
        const int r0 = (i / cols) * f, c0 = (i % cols) * f;
        for (int r = 0; r < f; ++r)
            for (int c = 0; c < f; ++c) mosaic(r0 + r, c0 + c) = scale > 0.0 ? 0.5 + w(r, c) / scale : 0.5;
    }
    io::write_image(a.out, mosaic);

    json m = base_manifest("dump-filters", argv);
    m["inputs"] = {a.bank.empty() ? (a.stages.empty() ? "dct:" + std::to_string(a.dct) : a.stages) : a.bank};
    m["outputs"] = {a.out};
    m["layout"] = {{"filters", k}, {"side", f}, {"grid_rows", rows}, {"grid_cols", cols}};
    m["normalization"] = {{"rule", "pixel = 0.5 + tap / scale; zero filters render 0.5"}, {"scales", scales}};
    write_manifest(manifest_path(a.manifest, a.out), m);
    std::cout << "wrote " << a.out << " (" << k << " filters, " << rows << "x" << cols << " tiles)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// oracle-cg

struct OracleArgs {
    RestoreArgs r;
    double tol = 1e-8;
    int max_iter = 500;
};

int cmd_oracle_cg(const OracleArgs& a, const std::vector<std::string>& argv)
{
    const DegradeSpec d = restore_degradation(a.r);
    auto [cfg, filter_side] = resolve_config(a.r);
    if (a.r.lambda) cfg.lambda = *a.r.lambda;
    if (a.r.eta) cfg.eta = *a.r.eta;
    const Image y = io::read_image(a.r.in);
    const DegradationOp op = make_operator(d, {y.height() * d.scale, y.width() * d.scale});
    const FilterBank bank = a.r.bank_file.empty() ? make_dct_bank(filter_side) : decode_filter_bank(binary::read_file(a.r.bank_file));
    // z from shrinking the analysis responses of the initial estimate toward zero
    const Image x0 = initial_estimate(y, op, nullptr, PriorMode::none);
    const FeatureMaps z = update_features(conv(bank, x0), FeatureMaps(bank.count(), x0.height(), x0.width()), cfg.lambda);
    const CgResult res = solve_x_exact(y, op, bank, z, cfg.eta, a.tol, a.max_iter);
    io::write_image(a.r.out, res.x);
    std::cout << "cg " << (res.converged ? "converged" : "stopped at max_iter") << " after " << res.iterations
              << " iterations, relative residual " << res.relative_residual << "\n";

    json m = base_manifest("oracle-cg", argv);
    m["inputs"] = {a.r.in};
    m["outputs"] = {a.r.out};
    m["degradation"] = describe(d);
    m["config"] = describe(cfg, filter_side);
    m["cg"] = {{"converged", res.converged}, {"iterations", res.iterations}, {"relative_residual", res.relative_residual}};
    write_manifest(manifest_path(a.r.manifest, a.r.out), m);
    return 0;
}

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& argv, bool allow_replay = true);

int cmd_replay(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw Failure("cannot open manifest '" + path + "'");
    json m;
    try {
        f >> m;
    } catch (const json::exception& e) {
        throw Failure("manifest is not valid JSON: " + std::string(e.what()));
    }
    if (!m.contains("argv") || !m["argv"].is_array()) throw Failure("manifest has no argv");
    if (m.contains("cwd") && m["cwd"].is_string()) std::filesystem::current_path(m["cwd"].get<std::string>());
    return run(m["argv"].get<std::vector<std::string>>(), false);
}

int run(const std::vector<std::string>& argv, bool allow_replay)
{
    CLI::App app{"Structured analysis sparse coding image restoration"};
    app.require_subcommand(1);

    DegradeArgs dg;
    auto* degrade = app.add_subcommand("degrade", "Apply a degradation operator and seeded Gaussian noise");
    degrade->add_option("--in", dg.in, "Input image (.pgm or SASCF32)")->required();
    degrade->add_option("--out", dg.out, "Output image (.pgm writes 8-bit, anything else SASCF32)")->required();
    degrade->add_option("--kind", dg.spec.kind, "noise | blur | gauss-down | bicubic-down")
        ->check(CLI::IsMember({"noise", "blur", "gauss-down", "bicubic-down"}))
        ->capture_default_str();
    degrade->add_option("--sigma", dg.sigma, "Noise std on the 0-255 scale")->capture_default_str();
    degrade->add_option("--scale", dg.spec.scale, "Downsampling factor")->capture_default_str();
    degrade->add_option("--seed", dg.seed, "Noise seed")->capture_default_str();
    degrade->add_option("--manifest", dg.manifest, "Run manifest path (default OUT.json)");
    add_degrade_options(degrade, dg.spec);

    RestoreArgs rs;
    auto add_restore_options = [](CLI::App* sub, RestoreArgs& r) {
        sub->add_option("--in", r.in, "Degraded observation")->required();
        sub->add_option("--out", r.out, "Restored image")->required();
        sub->add_option("--mode", r.mode, "denoise | deblur | sr")->capture_default_str();
        sub->add_option("--sigma", r.sigma, "Noise level on the 0-255 scale (sets default lambda and h; default 25)");
        sub->add_option("--scale", r.spec.scale, "Super-resolution factor (sr only)");
        sub->add_option("--sr-kind", r.sr_kind, "bicubic | gauss")->capture_default_str();
        sub->add_option("--config", r.config, "key=value config file; flags override it");
        sub->add_option("--lambda", r.lambda, "Sparsity weight");
        sub->add_option("--eta", r.eta, "Prior weight");
        sub->add_option("--filter-side", r.filter_side, "DCT analysis filter side (default 5)");
        sub->add_option("--bank", r.bank_file, "Analysis filter bank file (SASCFBK1)");
        sub->add_option("--manifest", r.manifest, "Run manifest path (default OUT.json)");
        add_degrade_options(sub, r.spec);
    };
    auto* restore_cmd = app.add_subcommand("restore", "Restore an image");
    add_restore_options(restore_cmd, rs);
    restore_cmd->add_option("--prior", rs.prior, "none | internal | external | hybrid")
        ->check(CLI::IsMember({"none", "internal", "external", "hybrid"}));
    restore_cmd->add_option("--weights", rs.weights, "Prior network weights (SASCPRN1)");
    restore_cmd->add_option("--stages", rs.stages, "Run the unrolled solver with these stage parameters (SASCSTG1)");
    restore_cmd->add_option("--reference", rs.reference, "Ground truth for PSNR/SSIM");
    restore_cmd->add_option("--step", rs.step, "Gradient step (default 0.9/lambda_max)");
    restore_cmd->add_option("--mix", rs.mix, "Weight of the external prior in [0,1]");
    restore_cmd->add_option("--iters", rs.iters, "Outer iterations");
    restore_cmd->add_option("--bandwidth", rs.h, "Nonlocal weight bandwidth h");
    restore_cmd->add_option("--patch-side", rs.patch_side);
    restore_cmd->add_option("--stride", rs.stride);
    restore_cmd->add_option("--group-size", rs.group_size);
    restore_cmd->add_option("--window", rs.window);
    restore_cmd->add_flag("--freeze-prior", rs.freeze_prior, "Keep mu from the initial estimate");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "PSNR/SSIM table for REF TEST pairs");
    eval->add_option("pairs", ev.files, "REF TEST [REF TEST ...]")->required();
    eval->add_option("--csv", ev.csv, "Also write the table as CSV");

    DumpArgs dp;
    auto* dump = app.add_subcommand("dump-filters", "Tile a filter bank into a mosaic image");
    dump->add_option("--bank", dp.bank, "Filter bank file (SASCFBK1)");
    dump->add_option("--stages", dp.stages, "Stage parameter file (SASCSTG1)");
    dump->add_option("--stage", dp.stage, "Stage index for --stages")->capture_default_str();
    dump->add_option("--dct", dp.dct, "Built-in DCT bank of this side");
    dump->add_option("--out", dp.out, "Mosaic image")->required();
    dump->add_option("--manifest", dp.manifest, "Run manifest path (default OUT.json)");

    OracleArgs oc;
    auto* oracle = app.add_subcommand("oracle-cg", "Exact x-subproblem solve by conjugate gradients");
    add_restore_options(oracle, oc.r);
    oracle->add_option("--tol", oc.tol)->capture_default_str();
    oracle->add_option("--max-iter", oc.max_iter)->capture_default_str();

    std::string replay_path;
    CLI::App* replay = nullptr;
    if (allow_replay) {
        replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
        replay->add_option("manifest", replay_path)->required();
    }

    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (degrade->parsed()) return cmd_degrade(dg, argv);
    if (restore_cmd->parsed()) return cmd_restore(rs, argv);
    if (eval->parsed()) return cmd_eval(ev);
    if (dump->parsed()) return cmd_dump_filters(dp, argv);
    if (oracle->parsed()) return cmd_oracle_cg(oc, argv);
    if (replay && replay->parsed()) return cmd_replay(replay_path);
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(std::vector<std::string>(argv + 1, argv + argc));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
