#include "evdiv/cli.hpp"

#include "evdiv/contrast.hpp"
#include "evdiv/error.hpp"
#include "evdiv/evaluation.hpp"
#include "evdiv/events.hpp"
#include "evdiv/simulator.hpp"
#include "evdiv/solver.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <optional>
#include <ostream>
#include <regex>

namespace evdiv {

namespace {

/// Bad flags or unusable inputs: reported with exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

std::string read_text(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw UsageError("no such file: " + path);
    const auto bytes = read_file_bytes(path);
    return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

SensorGeometry parse_size(const std::string& text) {
    static const std::regex pattern(R"((\d+)[xX](\d+))");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) throw UsageError("--resize expects <W>x<H>, got '" + text + "'");
    SensorGeometry g{std::stoi(m[1]), std::stoi(m[2])};
    if (g.width < 1 || g.height < 1) throw UsageError("--resize dimensions must be >= 1");
    return g;
}

struct EstimateOptions {
    std::string input;
    std::string output;
    std::string resize;
    std::string dump_images;
    double tau = 0.5;
    double gamma = 0.025;
    double epsilon = kDefaultEpsilon;
    long max_iterations = 1'000'000;
    double sample = 1.0;
    double hot_pixel_k = 0.0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool no_timing = false;
};

int cmd_estimate(const EstimateOptions& opt, std::ostream& out, std::ostream& err) {
    SolverParams params;
    params.tau = opt.tau;
    params.gamma = opt.gamma;
    params.epsilon = opt.epsilon;
    params.max_iterations = opt.max_iterations;
    try {
        params.validate();
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
    if (!(opt.sample > 0.0 && opt.sample <= 1.0)) throw UsageError("--sample must lie in (0, 1]");
    if (opt.hot_pixel_k < 0.0) throw UsageError("--hot-pixel-k must be >= 0");
    std::optional<SensorGeometry> target;
    if (!opt.resize.empty()) target = parse_size(opt.resize);
    if (!std::filesystem::is_regular_file(opt.input)) throw UsageError("no such file: " + opt.input);

    EventStream stream = load_event_file(opt.input);
    if (opt.hot_pixel_k > 0.0) stream = remove_hot_pixels(stream, opt.hot_pixel_k);
    if (target) stream = rescale_events(stream, *target);
    if (opt.sample < 1.0) stream = subsample_events(stream, opt.sample, opt.seed);

    const auto batches = batch_stream(stream, params.tau);
    const auto samples = estimate_stream_divergence(batches, params, opt.threads);
    for (const auto& s : samples) {
        if (!s.ok()) fmt::print(err, "warning: batch ending at {} s: {}\n", s.t, s.error);
    }

    if (!opt.dump_images.empty()) {
        std::filesystem::create_directories(opt.dump_images);
        std::size_t k = 0;
        for (const auto& batch : batches) {
            if (batch.empty()) continue;
            const auto& s = samples[k++];
            if (!std::isfinite(s.nu)) continue;
            const auto path = std::filesystem::path(opt.dump_images) / fmt::format("batch_{:06d}.pgm", k - 1);
            write_file_text(path.string(), to_pgm(accumulate_image(batch, s.nu)));
        }
    }

    const std::string csv = write_estimates_csv(samples, !opt.no_timing);
    if (opt.output.empty()) {
        out << csv;
    } else {
        write_file_text(opt.output, csv);
    }
    return kExitOk;
}

struct SimulateOptions {
    SimConfig config;
    std::string output;
    std::string ground_truth;
    int width = 160;
    int height = 90;
};

int cmd_simulate(SimulateOptions opt, std::ostream& out) {
    opt.config.geometry = {opt.width, opt.height};
    SimulationResult sim;
    try {
        sim = generate_landing_events(opt.config);
    } catch (const ConfigError& e) {
        throw UsageError(std::string("config error: ") + e.what());
    }
    save_event_file(opt.output, sim.stream);
    if (!opt.ground_truth.empty()) {
        write_file_text(opt.ground_truth, write_ground_truth_csv(sim.ground_truth.samples));
    }
    fmt::print(out, "wrote {} events ({} trajectory, {} clutter) to {}\n", sim.stream.events.size(),
               sim.trajectory_events, sim.clutter_events, opt.output);
    return kExitOk;
}

int cmd_evaluate(const std::string& estimates_path, const std::string& gt_path, const std::string& output,
                 std::ostream& out) {
    const auto estimates = parse_estimates_csv(read_text(estimates_path));
    const auto gt = parse_ground_truth_csv(read_text(gt_path));
    EvaluationReport report;
    try {
        report = divergence_error(estimates, gt);
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
    out << format_report(report);
    if (!output.empty()) write_file_text(output, write_report_csv(report));
    return kExitOk;
}

int cmd_of2div(const std::string& input, std::ostream& out, std::ostream& err) {
    const FlowField field = parse_flow_csv(read_text(input));
    const FlowDivergence d = of_to_divergence(field);
    if (d.skipped > 0) fmt::print(err, "warning: skipped {} zero-radius flow vectors\n", d.skipped);
    fmt::print(out, "{}\n", d.divergence);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-based divergence estimation by exact contrast maximisation", "evdiv"};
    app.require_subcommand(1);

    EstimateOptions est;
    auto* estimate = app.add_subcommand("estimate", "Estimate divergence for every batch of an event file");
    estimate->add_option("--input,-i", est.input, "Event file (.csv or .bin)")->required();
    estimate->add_option("--output,-o", est.output, "Output CSV (stdout when omitted)");
    estimate->add_option("--tau", est.tau, "Batch duration in seconds")->capture_default_str();
    estimate->add_option("--gamma", est.gamma, "Convergence threshold")->capture_default_str();
    estimate->add_option("--epsilon", est.epsilon, "Velocity domain guard")->capture_default_str();
    estimate->add_option("--max-iterations", est.max_iterations, "Branch-and-bound iteration cap")
        ->capture_default_str();
    estimate->add_option("--resize", est.resize, "Rescale coordinates to <W>x<H>");
    estimate->add_option("--sample", est.sample, "Fraction of events kept by random sampling")
        ->capture_default_str();
    estimate->add_option("--seed", est.seed, "Seed for random sampling")->capture_default_str();
    estimate->add_option("--hot-pixel-k", est.hot_pixel_k, "Remove hot pixels above median + k*MAD (0 = off)")
        ->capture_default_str();
    estimate->add_option("--threads", est.threads, "Worker threads over batches (0 = all cores)")
        ->capture_default_str();
    estimate->add_option("--dump-images", est.dump_images, "Directory for PGM images at the estimates");
    estimate->add_flag("--no-timing", est.no_timing, "Write 0 in the runtime column");

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic ventral-landing event stream");
    simulate->add_option("--nu", sim.config.nu, "Vertical velocity (<= 0)")->required();
    simulate->add_option("--z0", sim.config.z0, "Initial depth")->capture_default_str();
    simulate->add_option("--duration", sim.config.duration, "Run length in seconds")->capture_default_str();
    simulate->add_option("--focal", sim.config.focal_length, "Focal length in pixels")->capture_default_str();
    simulate->add_option("--width", sim.width, "Sensor width")->capture_default_str();
    simulate->add_option("--height", sim.height, "Sensor height")->capture_default_str();
    simulate->add_option("--points", sim.config.n_points, "Scene point count")->capture_default_str();
    simulate->add_option("--spacing", sim.config.event_spacing_px, "Radial pixels between events")
        ->capture_default_str();
    simulate->add_option("--noise-px", sim.config.noise_px, "Gaussian pixel jitter")->capture_default_str();
    simulate->add_option("--clutter", sim.config.noise_event_fraction, "Uniform clutter fraction")
        ->capture_default_str();
    simulate->add_option("--seed", sim.config.seed, "Random seed")->capture_default_str();
    simulate->add_option("--output,-o", sim.output, "Event file to write (.csv or .bin)")->required();
    simulate->add_option("--gt", sim.ground_truth, "Ground-truth divergence CSV to write");

    std::string eval_estimates, eval_gt, eval_output;
    auto* evaluate = app.add_subcommand("evaluate", "Compare estimates with ground-truth divergence");
    evaluate->add_option("--estimates,-e", eval_estimates, "Estimate CSV")->required();
    evaluate->add_option("--ground-truth,-g", eval_gt, "Ground-truth CSV")->required();
    evaluate->add_option("--output,-o", eval_output, "Per-batch error CSV");

    std::string flow_input;
    auto* of2div = app.add_subcommand("of2div", "Divergence of an optic-flow field");
    of2div->add_option("--input,-i", flow_input, "Flow CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*estimate) return cmd_estimate(est, out, err);
        if (*simulate) return cmd_simulate(sim, out);
        if (*evaluate) return cmd_evaluate(eval_estimates, eval_gt, eval_output, out);
        if (*of2div) return cmd_of2div(flow_input, out, err);
    } catch (const UsageError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace evdiv
