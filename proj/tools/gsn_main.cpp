// gsn: seeded attention-competition experiments, overlap metrics, guidance
// losses with gradient checking, and trajectory analysis.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsn/gradcheck.hpp"
#include "gsn/harness.hpp"
#include "gsn/io.hpp"
#include "gsn/svg.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

void print_diagnostic(const std::string& kind, const std::string& detail) {
    nlohmann::json doc;
    doc["error"] = kind;
    doc["detail"] = detail;
    std::cerr << doc.dump() << "\n";
}

gsn::ExperimentConfig load_config(const std::string& path) {
    return gsn::parse_config(gsn::read_text_file(path));
}

std::vector<int> parse_entity_list(const std::string& text) {
    std::vector<int> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        out.push_back(std::stoi(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (out.empty()) throw gsn::ValidationError("entity list is empty");
    return out;
}

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct RunArgs {
    std::string config_path;
    std::string out_override;
    std::string loss_override;
    int threads = default_threads();
};

int run_batch(const RunArgs& args, bool nurse_mode) {
    gsn::ExperimentConfig cfg = load_config(args.config_path);
    if (!args.out_override.empty()) cfg.out_dir = args.out_override;

    if (!nurse_mode) {
        cfg.nurse.reset();
    } else if (!args.loss_override.empty()) {
        if (args.loss_override == "none") {
            cfg.nurse.reset();
        } else {
            gsn::NurseConfig nc;
            if (cfg.nurse) {
                nc = *cfg.nurse;
            } else {
                nc.cutoff = std::min(nc.cutoff, cfg.steps);  // default recipe, clamped to short runs
            }
            nc.loss = gsn::LossKind::parse(args.loss_override);
            if (nc.cutoff > cfg.steps) throw gsn::ValidationError("nurse.cutoff must be <= steps");
            cfg.nurse = nc;
        }
    } else if (!cfg.nurse) {
        throw gsn::ValidationError("nurse: config has no nurse block and no --loss was given");
    }

    const auto result = gsn::run_experiment(cfg, args.threads);
    std::cout << "trials=" << result.trials << " successes=" << result.successes
              << " success_rate=" << gsn::format_double(result.success_rate) << "\n";
    return 0;
}

int cmd_metrics(const std::string& stack_path, const std::string& entities_text) {
    const gsn::AttentionStack stack = gsn::read_atnm(stack_path);
    std::vector<int> entities;
    if (entities_text.empty()) {
        entities.resize(stack.n);
        std::iota(entities.begin(), entities.end(), 0);
    } else {
        entities = parse_entity_list(entities_text);
    }
    std::cout << gsn::metrics_csv({gsn::compute_metrics(stack, entities)});
    return 0;
}

int cmd_gradcheck(const std::string& kinds_text, int seeds) {
    std::vector<gsn::LossKind> kinds;
    if (kinds_text == "all") {
        kinds = gsn::canonical_loss_kinds();
    } else {
        size_t pos = 0;
        while (pos < kinds_text.size()) {
            size_t next = kinds_text.find(',', pos);
            if (next == std::string::npos) next = kinds_text.size();
            kinds.push_back(gsn::LossKind::parse(kinds_text.substr(pos, next - pos)));
            pos = next + 1;
        }
    }
    gsn::GradCheckOptions opt;
    opt.seeds = seeds;
    const auto report = gsn::run_gradient_suite(kinds, opt);
    std::cout << "gradcheck: " << report.comparisons << " comparisons, worst relative error "
              << gsn::format_double(report.worst_rel) << ", " << report.issues.size() << " failures\n";
    for (size_t k = 0; k < report.issues.size() && k < 10; ++k) {
        const auto& issue = report.issues[k];
        std::cout << "  FAIL " << issue.kind << " seed=" << issue.seed << " stage=" << issue.stage
                  << " coord=" << issue.coordinate << " analytic=" << gsn::format_double(issue.analytic)
                  << " numeric=" << gsn::format_double(issue.numeric) << "\n";
    }
    if (!report.ok()) {
        print_diagnostic("GradCheckFailure", std::to_string(report.issues.size()) + " gradient comparisons failed");
        return kExitNumeric;
    }
    return 0;
}

int cmd_analyze(const std::string& out_dir, const std::string& agg_name) {
    const auto matrix = gsn::analyze_output_dir(out_dir, gsn::parse_aggregate(agg_name));
    std::cout << gsn::corr_csv(matrix);
    return 0;
}

int cmd_render_stack(const std::string& stack_path, const std::string& out_dir, const std::string& label,
                     const std::string& entities_text) {
    const gsn::AttentionStack stack = gsn::read_atnm(stack_path);
    std::vector<int> entities;
    if (entities_text.empty()) {
        entities.resize(stack.n);
        std::iota(entities.begin(), entities.end(), 0);
    } else {
        entities = parse_entity_list(entities_text);
    }
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/maps_t" + label + ".svg";
    gsn::write_text_file(path, gsn::render_maps_svg(stack, entities, "attention maps (step " + label + ")"));
    std::cout << path << "\n";
    return 0;
}

int cmd_render_corr(const std::string& corr_path, const std::string& out_dir) {
    const auto matrix = gsn::parse_corr_csv(gsn::read_text_file(corr_path));
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/corr.svg";
    gsn::write_text_file(path, gsn::render_corr_svg(matrix));
    std::cout << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attention-competition testbed: overlap metrics, guidance losses, nursing"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* simulate = app.add_subcommand("simulate", "run a trial batch without nursing");
    simulate->add_option("--config", run_args.config_path, "experiment config JSON")->required();
    simulate->add_option("--out", run_args.out_override, "override the config output directory");
    simulate->add_option("--threads", run_args.threads, "worker threads (never affects results)");

    auto* nurse = app.add_subcommand("nurse", "run a trial batch with latent nursing");
    nurse->add_option("--config", run_args.config_path, "experiment config JSON")->required();
    nurse->add_option("--out", run_args.out_override, "override the config output directory");
    nurse->add_option("--threads", run_args.threads, "worker threads (never affects results)");
    nurse->add_option("--loss", run_args.loss_override,
                      "loss kind (iou|com|kl|cc|ae|db|pd|<base>+int:L|<base>+var:L|none)");

    std::string stack_path, entities_text;
    auto* metrics = app.add_subcommand("metrics", "print the metric row of a stored attention stack");
    metrics->add_option("--stack", stack_path, "ATNM v1 file")->required();
    metrics->add_option("--entities", entities_text, "comma-separated token indices (default: all)");

    std::string kinds_text = "all";
    int gradcheck_seeds = 50;
    auto* gradcheck = app.add_subcommand("gradcheck", "verify analytic gradients against central differences");
    gradcheck->add_option("--kinds", kinds_text, "'all' or comma-separated loss kinds");
    gradcheck->add_option("--seeds", gradcheck_seeds, "random stacks per kind")->check(CLI::PositiveNumber);

    std::string analyze_dir, agg_name = "mean";
    auto* analyze = app.add_subcommand("analyze", "summarize trials and write the correlation matrix");
    analyze->add_option("--out", analyze_dir, "experiment output directory")->required();
    analyze->add_option("--agg", agg_name, "trajectory aggregate: mean|final|min|max");

    std::string render_stack, render_corr_path, render_out = ".", render_label = "final", render_entities;
    auto* render = app.add_subcommand("render", "emit SVG heatmaps");
    render->add_option("--stack", render_stack, "ATNM v1 file to render as per-entity heatmaps");
    render->add_option("--corr", render_corr_path, "corr.csv to render as a matrix heatmap");
    render->add_option("--out", render_out, "output directory");
    render->add_option("--label", render_label, "step label for maps_t<label>.svg");
    render->add_option("--entities", render_entities, "comma-separated token indices (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) print_diagnostic("UsageError", e.what());
        return app.exit(e) == 0 ? 0 : kExitValidation;
    }

    try {
        if (simulate->parsed()) return run_batch(run_args, false);
        if (nurse->parsed()) return run_batch(run_args, true);
        if (metrics->parsed()) return cmd_metrics(stack_path, entities_text);
        if (gradcheck->parsed()) return cmd_gradcheck(kinds_text, gradcheck_seeds);
        if (analyze->parsed()) return cmd_analyze(analyze_dir, agg_name);
        if (render->parsed()) {
            if (render_stack.empty() && render_corr_path.empty())
                throw gsn::ValidationError("render: pass --stack and/or --corr");
            int rc = 0;
            if (!render_stack.empty()) rc = cmd_render_stack(render_stack, render_out, render_label, render_entities);
            if (rc == 0 && !render_corr_path.empty()) rc = cmd_render_corr(render_corr_path, render_out);
            return rc;
        }
    } catch (const gsn::NonFiniteGradient& e) {
        print_diagnostic(e.kind(), e.what());
        return kExitNumeric;
    } catch (const gsn::Error& e) {
        print_diagnostic(e.kind(), e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        print_diagnostic("InternalError", e.what());
        return kExitValidation;
    }
    return 0;
}
