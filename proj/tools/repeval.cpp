// Command-line front end: synthesizes benchmark tasks, estimates loss-data
// curves, derives measures with certificates, and renders reports.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "repeval/curve.hpp"
#include "repeval/dataset.hpp"
#include "repeval/errors.hpp"
#include "repeval/measures.hpp"
#include "repeval/parallel.hpp"
#include "repeval/probe.hpp"
#include "repeval/report.hpp"
#include "repeval/stub.hpp"
#include "repeval/synth.hpp"
#include "repeval/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace repeval;

namespace {

// ---------- small utilities ----------

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw IoError("write failure on " + path.string());
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for reading");
    std::string out((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
    if (f.bad()) throw IoError("read failure on " + path);
    return out;
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return p;
}

double parse_double_str(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string("cannot parse ") + what + " from '" + s + "'");
    }
}

std::size_t parse_size_str(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size() || v < 0) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ValidationError(std::string("cannot parse ") + what + " from '" + s + "'");
    }
}

std::vector<std::string> split_str(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, json options,
                    std::vector<std::string> outputs, json extra = json::object()) {
    json doc;
    doc["toolkit_version"] = kVersion;
    doc["command"] = command;
    doc["options"] = std::move(options);
    doc["outputs"] = std::move(outputs);
    for (auto& [key, value] : extra.items()) doc[key] = value;
    write_text_file(dir / "manifest.json", doc.dump(2) + "\n");
}

// ---------- shared option bundles ----------

struct ProbeOptions {
    std::size_t hidden = 512;
    double lr = 1e-4;
    std::size_t steps = 4000;
    std::size_t batch = 32;
    double init_scale = 1.0;
    std::string seed_tag = "probe";

    void attach(CLI::App* cmd) {
        cmd->add_option("--hidden", hidden, "Hidden width of the mlp2 probe");
        cmd->add_option("--lr", lr, "Adam learning rate");
        cmd->add_option("--steps", steps, "Optimizer steps");
        cmd->add_option("--batch", batch, "Minibatch size");
        cmd->add_option("--init-scale", init_scale, "Initialization scale");
        cmd->add_option("--seed-tag", seed_tag, "Random-stream tag for the probe");
    }

    ProbeSpec spec(ProbeArch arch) const {
        ProbeSpec s;
        s.architecture = arch;
        s.hidden_width = hidden;
        s.learning_rate = lr;
        s.steps = steps;
        s.batch_size = batch;
        s.init_scale = init_scale;
        s.seed_tag = seed_tag;
        return s;
    }
};

/// Algorithm factory. Accepts: linear | mlp2 | gf2 | constant | identity |
/// stub:const:A | stub:inverse:A | stub:step:A:B:N0, each stub optionally
/// followed by :uniform:AMPLITUDE or :bernoulli.
std::unique_ptr<LearningAlgorithm> make_algorithm(const std::string& spec,
                                                  const ProbeOptions& probe,
                                                  double smoothing, double bound) {
    if (spec == "linear") {
        return std::make_unique<ProbeAlgorithm>(probe.spec(ProbeArch::linear));
    }
    if (spec == "mlp2") {
        return std::make_unique<ProbeAlgorithm>(probe.spec(ProbeArch::mlp2));
    }
    if (spec == "gf2") return std::make_unique<Gf2ParityAlgorithm>(smoothing);
    if (spec == "constant") return std::make_unique<ConstantMarginalAlgorithm>();
    if (spec == "identity") return std::make_unique<IdentityBitAlgorithm>();

    const auto tok = split_str(spec, ':');
    if (!tok.empty() && tok[0] == "stub") {
        if (tok.size() < 3) {
            throw ValidationError("stub spec needs a shape and a level, e.g. "
                                  "stub:const:0.5");
        }
        StubSpec s;
        s.bound = bound;
        std::size_t next;
        if (tok[1] == "const" || tok[1] == "constant") {
            s.shape = StubShape::constant;
            s.a = parse_double_str(tok[2], "stub level");
            next = 3;
        } else if (tok[1] == "inverse") {
            s.shape = StubShape::inverse;
            s.a = parse_double_str(tok[2], "stub level");
            next = 3;
        } else if (tok[1] == "step") {
            if (tok.size() < 5) {
                throw ValidationError("stub step spec is stub:step:A:B:N0");
            }
            s.shape = StubShape::step;
            s.a = parse_double_str(tok[2], "stub level a");
            s.b = parse_double_str(tok[3], "stub level b");
            s.n0 = parse_size_str(tok[4], "stub threshold");
            next = 5;
        } else {
            throw ValidationError("unknown stub shape '" + tok[1] + "'");
        }
        if (next < tok.size()) {
            const std::string& noise = tok[next];
            if (noise == "uniform") {
                if (next + 1 >= tok.size()) {
                    throw ValidationError("uniform stub noise needs an amplitude");
                }
                s.noise = StubNoiseKind::uniform;
                s.amplitude = parse_double_str(tok[next + 1], "noise amplitude");
                next += 2;
            } else if (noise == "bernoulli") {
                s.noise = StubNoiseKind::bernoulli;
                next += 1;
            } else if (noise == "none") {
                next += 1;
            } else {
                throw ValidationError("unknown stub noise '" + noise + "'");
            }
        }
        if (next != tok.size()) {
            throw ValidationError("trailing tokens in stub spec '" + spec + "'");
        }
        return std::make_unique<StubAlgorithm>(s);
    }
    throw ValidationError("unknown algorithm '" + spec +
                          "' (use linear, mlp2, gf2, constant, identity, or stub:...)");
}

std::vector<std::size_t> parse_sizes(const std::string& spec) {
    if (spec.rfind("log:", 0) == 0) {
        const auto tok = split_str(spec, ':');
        if (tok.size() != 4) {
            throw ValidationError("log grid spec is log:MIN:MAX:COUNT");
        }
        return make_grid(parse_size_str(tok[1], "grid minimum"),
                         parse_size_str(tok[2], "grid maximum"),
                         parse_size_str(tok[3], "grid count"));
    }
    std::string body = spec;
    if (body.rfind("list:", 0) == 0) body = body.substr(5);
    std::vector<std::size_t> sizes;
    for (const auto& t : split_str(body, ',')) {
        if (t.empty()) continue;
        sizes.push_back(parse_size_str(t, "grid size"));
    }
    if (sizes.empty()) throw ValidationError("size grid '" + spec + "' is empty");
    return sizes;
}

Dataset load_with_format(const std::string& path, const std::string& format) {
    DatasetFormat f;
    if (format == "auto") {
        f = format_from_path(path);
    } else if (format == "binary") {
        f = DatasetFormat::binary;
    } else if (format == "csv") {
        f = DatasetFormat::csv;
    } else {
        throw ValidationError("unknown dataset format '" + format + "'");
    }
    return load_dataset(path, f);
}

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (char c : name) {
        out += (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' ||
                c == '_' || c == '.')
                   ? c
                   : '-';
    }
    return out.empty() ? "curve" : out;
}

// ---------- command payloads ----------

struct SynthCommon {
    std::string out;
    std::uint64_t seed = 0;
    std::size_t n = 10000;
};

int run_synth(const std::string& task, const SynthCommon& common, Dataset ds) {
    save_dataset(ds, common.out);
    json options;
    options["task"] = task;
    options["n"] = ds.n;
    options["seed"] = common.seed;
    json extra;
    extra["fingerprints"] = {{"dataset", dataset_fingerprint(ds)}};
    const fs::path out_path(common.out);
    json doc;
    doc["toolkit_version"] = kVersion;
    doc["command"] = "synth";
    doc["options"] = options;
    doc["outputs"] = {out_path.filename().string()};
    doc["fingerprints"] = {{"dataset", dataset_fingerprint(ds)}};
    write_text_file(common.out + ".manifest.json", doc.dump(2) + "\n");

    std::printf("dataset: %s\n", ds.name.c_str());
    std::printf("  n=%zu  d=%zu  classes=%u\n", ds.n, ds.d, ds.num_classes);
    if (ds.oracle_loss) {
        std::printf("  oracle loss: %.6f nats\n", *ds.oracle_loss);
    }
    std::printf("  fingerprint: %s\n", dataset_fingerprint(ds).c_str());
    std::printf("wrote %s\n", common.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loss-data curve estimation and representation-quality measures"};
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "Read options from an INI file");
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark task");
    synth->require_subcommand(1);
    SynthCommon sc;

    auto* parity = synth->add_subcommand("parity", "Noisy-parity task");
    std::size_t parity_d = 16;
    double parity_alpha = 0.1;
    std::string parity_repr = "raw";
    std::string parity_secret;
    parity->add_option("--d", parity_d, "Input bits");
    parity->add_option("--alpha", parity_alpha, "Label-noise bias of the noisy representation");
    parity->add_option("--repr", parity_repr, "Representation: raw or noisy")
        ->check(CLI::IsMember({"raw", "noisy"}));
    parity->add_option("--secret", parity_secret, "Fixed parity support as a 0/1 string");
    parity->add_option("--n", sc.n, "Examples to generate");
    parity->add_option("--seed", sc.seed, "Master seed");
    parity->add_option("--out", sc.out, "Output dataset path")->required();

    auto* gauss = synth->add_subcommand("gaussian", "Two-class Gaussian task");
    std::size_t gauss_d = 2;
    double gauss_mu = 1.0;
    gauss->add_option("--d", gauss_d, "Feature dimension");
    gauss->add_option("--mu", gauss_mu, "Class-mean separation along the first axis");
    gauss->add_option("--n", sc.n, "Examples to generate");
    gauss->add_option("--seed", sc.seed, "Master seed");
    gauss->add_option("--out", sc.out, "Output dataset path")->required();

    auto* constant = synth->add_subcommand("constant", "All-class-zero fixture task");
    std::size_t const_d = 1;
    std::uint32_t const_k = 2;
    constant->add_option("--d", const_d, "Feature dimension");
    constant->add_option("--k", const_k, "Class count");
    constant->add_option("--n", sc.n, "Examples to generate");
    constant->add_option("--seed", sc.seed, "Master seed (unused, recorded)");
    constant->add_option("--out", sc.out, "Output dataset path")->required();

    // ---- curve ----
    auto* curve_cmd = app.add_subcommand("curve", "Estimate a loss-data curve");
    std::string cv_data, cv_format = "auto", cv_alg = "mlp2", cv_sizes = "log:10:50000:20";
    std::string cv_metric = "nll", cv_out;
    std::size_t cv_replicates = 8;
    std::uint64_t cv_seed = 0;
    double cv_holdout = 0.2, cv_cap = 0.0, cv_smoothing = 1e-3;
    bool cv_no_normalize = false;
    unsigned cv_workers = 0;
    ProbeOptions cv_probe;
    curve_cmd->add_option("--data", cv_data, "Dataset path")->required();
    curve_cmd->add_option("--format", cv_format, "Dataset format: auto, binary, csv");
    curve_cmd->add_option("--alg", cv_alg, "Learning algorithm spec");
    curve_cmd->add_option("--sizes", cv_sizes, "Grid: log:MIN:MAX:COUNT or comma list");
    curve_cmd->add_option("--replicates", cv_replicates, "Bootstrap replicates per size");
    curve_cmd->add_option("--seed", cv_seed, "Master seed");
    curve_cmd->add_option("--holdout-frac", cv_holdout, "Holdout fraction");
    curve_cmd->add_flag("--no-normalize", cv_no_normalize,
                        "Skip per-replicate feature normalization");
    curve_cmd->add_option("--metric", cv_metric, "Loss metric: nll or zero_one");
    curve_cmd->add_option("--cap", cv_cap,
                          "Per-example loss cap (0 = ln(classes) + 5)");
    curve_cmd->add_option("--smoothing", cv_smoothing, "gf2 probability smoothing");
    curve_cmd->add_option("--workers", cv_workers,
                          "Worker threads (default: REPEVAL_WORKERS or 1)");
    cv_probe.attach(curve_cmd);
    curve_cmd->add_option("--out", cv_out, "Output directory")->required();

    // ---- measure ----
    auto* measure_cmd =
        app.add_subcommand("measure", "Compute measures from saved curves");
    std::vector<std::string> ms_curves;
    std::vector<std::size_t> ms_ns;
    std::vector<double> ms_eps;
    std::string ms_out;
    measure_cmd->add_option("--curve", ms_curves, "Curve JSON file (repeatable)")
        ->required();
    measure_cmd->add_option("--n", ms_ns, "Sizes for VA and MDL (repeatable)");
    measure_cmd->add_option("--eps", ms_eps, "Thresholds for SDL and eSC (repeatable)");
    measure_cmd->add_option("--out", ms_out, "Output directory")->required();

    // ---- esc-refine ----
    auto* esc_cmd = app.add_subcommand(
        "esc-refine", "Recursive grid search for the epsilon sample complexity");
    std::string er_data, er_format = "auto", er_alg = "mlp2", er_metric = "nll", er_out;
    double er_eps = 0.1, er_delta = 0.05, er_holdout = 0.2, er_cap = 0.0,
           er_smoothing = 1e-3;
    std::size_t er_limit = 1000, er_rounds = 1, er_budget = 1000000;
    std::uint64_t er_seed = 0;
    bool er_no_normalize = false, er_yes = false;
    unsigned er_workers = 0;
    ProbeOptions er_probe;
    esc_cmd->add_option("--data", er_data, "Dataset path")->required();
    esc_cmd->add_option("--format", er_format, "Dataset format: auto, binary, csv");
    esc_cmd->add_option("--alg", er_alg, "Learning algorithm spec");
    esc_cmd->add_option("--eps", er_eps, "Loss threshold")->required();
    esc_cmd->add_option("--delta", er_delta, "Failure probability");
    esc_cmd->add_option("--limit", er_limit, "Largest size searched");
    esc_cmd->add_option("--rounds", er_rounds, "Grid refinement rounds");
    esc_cmd->add_option("--seed", er_seed, "Master seed");
    esc_cmd->add_option("--holdout-frac", er_holdout, "Holdout fraction");
    esc_cmd->add_flag("--no-normalize", er_no_normalize,
                      "Skip per-replicate feature normalization");
    esc_cmd->add_option("--metric", er_metric, "Loss metric: nll or zero_one");
    esc_cmd->add_option("--cap", er_cap, "Loss bound B (0 = ln(classes) + 5)");
    esc_cmd->add_option("--smoothing", er_smoothing, "gf2 probability smoothing");
    esc_cmd->add_option("--budget", er_budget, "Refuse above this many replicates per size");
    esc_cmd->add_flag("--yes", er_yes, "Skip the budget confirmation prompt");
    esc_cmd->add_option("--workers", er_workers,
                        "Worker threads (default: REPEVAL_WORKERS or 1)");
    er_probe.attach(esc_cmd);
    esc_cmd->add_option("--out", er_out, "Output directory")->required();

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "Render plots and CSV exports");
    std::vector<std::string> rp_curves;
    std::vector<std::string> rp_names;
    std::string rp_out;
    double rp_eps = 0.0;
    bool rp_has_eps = false;
    report_cmd->add_option("--curve", rp_curves, "Curve JSON file (repeatable)")
        ->required();
    report_cmd->add_option("--names", rp_names, "Legend names (repeatable)");
    auto* eps_opt = report_cmd->add_option("--eps", rp_eps, "Dashed threshold line");
    report_cmd->add_option("--out", rp_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    rp_has_eps = eps_opt->count() > 0;

    try {
        if (synth->parsed()) {
            if (parity->parsed()) {
                ParitySpec spec;
                spec.d = parity_d;
                spec.alpha = parity_alpha;
                spec.repr_kind =
                    parity_repr == "noisy" ? ParityRepr::noisy_label : ParityRepr::raw;
                for (char c : parity_secret) {
                    if (c != '0' && c != '1') {
                        throw ValidationError("--secret must be a string of 0s and 1s");
                    }
                    spec.secret.push_back(c == '1' ? 1 : 0);
                }
                return run_synth("parity", sc,
                                 gen_parity(spec, sc.n, RngStream(sc.seed, "synth-parity")));
            }
            if (gauss->parsed()) {
                return run_synth("gaussian", sc,
                                 gen_gaussian_task(gauss_d, gauss_mu, sc.n,
                                                   RngStream(sc.seed, "synth-gaussian")));
            }
            return run_synth("constant", sc, gen_constant_task(sc.n, const_d, const_k));
        }

        if (curve_cmd->parsed()) {
            const unsigned workers = cv_workers > 0 ? cv_workers : default_workers();
            const Dataset ds = load_with_format(cv_data, cv_format);
            const auto alg = make_algorithm(
                cv_alg, cv_probe, cv_smoothing,
                cv_cap > 0.0 ? cv_cap
                             : std::log(static_cast<double>(ds.num_classes)) + 5.0);
            EvalPlan plan;
            plan.grid = parse_sizes(cv_sizes);
            plan.replicates = cv_replicates;
            plan.loss_cap = cv_cap;
            plan.holdout_fraction = cv_holdout;
            plan.normalize = !cv_no_normalize;
            plan.metric = metric_from_name(cv_metric);
            plan.master_seed = cv_seed;

            const LossDataCurve curve = estimate_curve(*alg, ds, plan, workers);

            for (const auto& w : curve.warnings) {
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            }
            std::printf("algorithm: %s\n", alg->describe().c_str());
            for (const auto& p : curve.points) {
                std::printf("n=%-8zu mean=%-12.6f stderr=%.6f\n", p.n, p.mean_loss,
                            p.std_error);
            }

            const fs::path dir = ensure_out_dir(cv_out);
            write_text_file(dir / "curve.json", curve_to_json(curve));
            json options;
            options["data"] = cv_data;
            options["alg"] = cv_alg;
            options["sizes"] = plan.grid;
            options["replicates"] = plan.replicates;
            options["loss_cap"] = curve.plan.loss_cap;
            options["holdout_fraction"] = plan.holdout_fraction;
            options["normalize"] = plan.normalize;
            options["metric"] = metric_name(plan.metric);
            options["seed"] = plan.master_seed;
            options["workers"] = workers;
            write_manifest(dir, "curve", options, {"curve.json"},
                           {{"fingerprints",
                             {{"dataset", curve.dataset_fingerprint},
                              {"algorithm", curve.algorithm_fingerprint},
                              {"curve", curve_fingerprint(curve)}}}});
            std::printf("wrote %s\n", (dir / "curve.json").string().c_str());
            return 0;
        }

        if (measure_cmd->parsed()) {
            if (ms_ns.empty() && ms_eps.empty()) {
                throw ValidationError("measure needs at least one --n or --eps");
            }
            std::vector<LossDataCurve> curves;
            for (const auto& path : ms_curves) {
                curves.push_back(curve_from_json(read_text_file(path)));
            }
            for (std::size_t i = 1; i < curves.size(); ++i) {
                if (curves[i].plan.loss_cap != curves[0].plan.loss_cap) {
                    throw ValidationError("mismatched loss caps across curves (" +
                                          fmt_g(curves[i].plan.loss_cap) + " vs " +
                                          fmt_g(curves[0].plan.loss_cap) + ")");
                }
                if (curves[i].plan.metric != curves[0].plan.metric) {
                    throw ValidationError("mismatched loss metrics across curves");
                }
                if (curves[i].num_classes != curves[0].num_classes) {
                    throw ValidationError("mismatched class counts across curves");
                }
            }

            ComparisonTable table;
            for (std::size_t i = 0; i < curves.size(); ++i) {
                std::string name = curves[i].dataset_name.empty()
                                       ? "curve-" + std::to_string(i + 1)
                                       : curves[i].dataset_name;
                for (std::size_t j = 0; j < table.columns.size(); ++j) {
                    if (table.columns[j] == name) {
                        name += " (" + std::to_string(i + 1) + ")";
                        break;
                    }
                }
                table.columns.push_back(name);
            }

            auto add_row = [&](const std::string& label,
                               auto&& compute) {
                ComparisonTable::Row row;
                row.label = label;
                for (const auto& c : curves) {
                    try {
                        row.cells.push_back(compute(c));
                    } catch (const ValidationError& e) {
                        std::fprintf(stderr, "note: %s: %s\n", label.c_str(), e.what());
                        row.cells.push_back(std::nullopt);
                    }
                }
                table.rows.push_back(std::move(row));
            };

            for (std::size_t n : ms_ns) {
                add_row("VA @ n=" + std::to_string(n),
                        [&](const LossDataCurve& c) { return va_at(c, n); });
                add_row("MDL @ n=" + std::to_string(n), [&](const LossDataCurve& c) {
                    return mdl_at(c, n, c.num_classes);
                });
            }
            for (double eps : ms_eps) {
                add_row("SDL (eps=" + fmt_g(eps) + ")",
                        [&](const LossDataCurve& c) { return sdl_from_curve(c, eps); });
                add_row("eSC (eps=" + fmt_g(eps) + ")",
                        [&](const LossDataCurve& c) { return esc_from_curve(c, eps); });
            }

            const std::string markdown = table_markdown(table);
            std::fputs(markdown.c_str(), stdout);

            json measures = json::array();
            for (const auto& row : table.rows) {
                for (std::size_t c = 0; c < row.cells.size(); ++c) {
                    if (!row.cells[c]) continue;
                    json obj = json::parse(measure_to_json(*row.cells[c]));
                    obj["row"] = row.label;
                    obj["column"] = table.columns[c];
                    measures.push_back(std::move(obj));
                }
            }

            const fs::path dir = ensure_out_dir(ms_out);
            write_text_file(dir / "measures.json", measures.dump(2) + "\n");
            write_text_file(dir / "table.md", markdown);
            json options;
            options["curves"] = ms_curves;
            options["n"] = ms_ns;
            options["eps"] = ms_eps;
            write_manifest(dir, "measure", options, {"measures.json", "table.md"});
            std::printf("wrote %s and %s\n", (dir / "measures.json").string().c_str(),
                        (dir / "table.md").string().c_str());
            return 0;
        }

        if (esc_cmd->parsed()) {
            const unsigned workers = er_workers > 0 ? er_workers : default_workers();
            const Dataset ds = load_with_format(er_data, er_format);
            EscSearchConfig config;
            config.epsilon = er_eps;
            config.delta = er_delta;
            config.search_limit = er_limit;
            config.rounds = er_rounds;
            config.loss_cap =
                er_cap > 0.0 ? er_cap
                             : std::log(static_cast<double>(ds.num_classes)) + 5.0;
            config.holdout_fraction = er_holdout;
            config.normalize = !er_no_normalize;
            config.metric = metric_from_name(er_metric);
            config.master_seed = er_seed;
            config.max_replicates = er_budget;
            const auto alg =
                make_algorithm(er_alg, er_probe, er_smoothing, config.loss_cap);

            const std::size_t s = esc_search_replicates(config);
            std::printf("search plan: S=%zu replicate evaluations per grid edge, up to "
                        "10 x %zu x %zu = %zu training runs\n",
                        s, er_rounds, s, 10 * er_rounds * s);
            if (s > config.max_replicates) {
                throw BudgetError("sample-complexity search needs " + std::to_string(s) +
                                  " replicates per evaluated size, above the budget of " +
                                  std::to_string(config.max_replicates));
            }
            if (!er_yes) {
                std::printf("proceed? [y/N] ");
                std::fflush(stdout);
                std::string line;
                std::getline(std::cin, line);
                if (line != "y" && line != "Y" && line != "yes") {
                    std::fprintf(stderr, "declined; rerun with --yes to skip the prompt\n");
                    return 3;
                }
            }

            const MeasureResult result = esc_search(*alg, ds, config, workers);
            std::printf("eSC(eps=%s) = %s\n", fmt_g(er_eps).c_str(),
                        format_measure_value(result).c_str());
            if (!result.annotation.empty()) {
                std::printf("note: %s\n", result.annotation.c_str());
            }

            const fs::path dir = ensure_out_dir(er_out);
            write_text_file(dir / "esc.json", measure_to_json(result));
            json options;
            options["data"] = er_data;
            options["alg"] = er_alg;
            options["eps"] = er_eps;
            options["delta"] = er_delta;
            options["limit"] = er_limit;
            options["rounds"] = er_rounds;
            options["replicates_per_size"] = s;
            options["loss_cap"] = config.loss_cap;
            options["metric"] = metric_name(config.metric);
            options["seed"] = config.master_seed;
            options["workers"] = workers;
            write_manifest(dir, "esc-refine", options, {"esc.json"});
            std::printf("wrote %s\n", (dir / "esc.json").string().c_str());
            return 0;
        }

        if (report_cmd->parsed()) {
            std::vector<LossDataCurve> curves;
            for (const auto& path : rp_curves) {
                curves.push_back(curve_from_json(read_text_file(path)));
            }
            const std::optional<double> eps =
                rp_has_eps ? std::optional<double>(rp_eps) : std::nullopt;
            const std::string svg = plot_svg(curves, eps, rp_names);

            const fs::path dir = ensure_out_dir(rp_out);
            write_text_file(dir / "plot.svg", svg);
            std::vector<std::string> outputs = {"plot.svg"};
            for (std::size_t i = 0; i < curves.size(); ++i) {
                std::string base = !rp_names.empty() && i < rp_names.size()
                                       ? rp_names[i]
                                       : curves[i].dataset_name;
                if (base.empty()) base = "curve-" + std::to_string(i + 1);
                std::string file = sanitize_name(base) + ".csv";
                for (std::size_t suffix = 2;
                     std::find(outputs.begin(), outputs.end(), file) != outputs.end();
                     ++suffix) {
                    file = sanitize_name(base) + "-" + std::to_string(suffix) + ".csv";
                }
                write_text_file(dir / file, curve_to_csv(curves[i]));
                outputs.push_back(file);
            }
            json options;
            options["curves"] = rp_curves;
            if (eps) options["eps"] = *eps;
            write_manifest(dir, "report", options, outputs);
            for (const auto& f : outputs) {
                std::printf("wrote %s\n", (dir / f).string().c_str());
            }
            return 0;
        }
    } catch (const BudgetError& e) {
        std::fprintf(stderr, "budget error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
