// Command-line front end: fit, predict, evaluate, active, benchmark.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "ccr/active.hpp"
#include "ccr/benchmarks.hpp"
#include "ccr/experiments.hpp"
#include "ccr/pipeline.hpp"
#include "ccr/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ccr::DataError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ccr::Error("cannot write " + path.string());
    out << text;
}

// Same digest git uses for blobs: sha1("blob <size>\0" + content).
std::string git_blob_sha1(const std::string& content) {
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, header.data(), header.size());
    EVP_DigestUpdate(ctx, content.data(), content.size());
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

std::string timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

/// Resolved output locations: a directory with fixed names, or an explicit
/// file for the primary output whose siblings go next to it.
struct OutputPaths {
    fs::path dir;
    std::optional<fs::path> primary;

    fs::path file(const std::string& name) const { return dir / name; }
};

OutputPaths resolve_out(const std::string& out, const std::string& primary_ext) {
    OutputPaths p;
    fs::path path(out);
    if (!primary_ext.empty() && path.extension() == primary_ext) {
        p.dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
        p.primary = path;
    } else {
        p.dir = path;
    }
    fs::create_directories(p.dir);
    return p;
}

class Manifest {
public:
    Manifest(std::string command, std::vector<std::string> argv) : started_(timestamp()) {
        doc_["command"] = std::move(command);
        doc_["argv"] = std::move(argv);
        doc_["inputs"] = json::array();
        doc_["outputs"] = json::array();
    }

    void input(const std::string& path) {
        if (path.empty()) return;
        doc_["inputs"].push_back({{"path", path}, {"sha1", git_blob_sha1(read_file(path))}});
    }
    void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }
    void set(const std::string& key, json value) { doc_[key] = std::move(value); }

    void write(const fs::path& dir) {
        doc_["started_at"] = started_;
        doc_["finished_at"] = timestamp();
        write_file(dir / "manifest.json", doc_.dump(2) + "\n");
    }

private:
    std::string started_;
    json doc_;
};

/// Flags shared by every command that fits a model.
struct FitFlags {
    std::optional<int> clusters;
    std::string classifier;
    std::string regressor;
    std::optional<double> amplification;
    std::optional<int> elbow_max;
    std::uint64_t seed = 0;
    int threads = 0;
    json ccr_overrides;

    void add_to(CLI::App* app) {
        app->add_option("--clusters", clusters, "Number of clusters L (default: elbow selection)");
        app->add_option("--classifier", classifier, "Classifier kind")->check(CLI::IsMember({"mlp", "forest"}));
        app->add_option("--regressor", regressor, "Regressor kind")->check(CLI::IsMember({"mlp", "forest"}));
        app->add_option("--amplification", amplification, "Output amplification C (default 10 d)");
        app->add_option("--elbow-max", elbow_max, "Largest L tried by the elbow rule");
        app->add_option("--seed", seed, "Random seed");
        app->add_option("--threads", threads, "Worker threads (default: CCR_THREADS or hardware)");
    }

    ccr::CcrConfig config(ccr::CcrConfig base = {}) const {
        if (!ccr_overrides.is_null()) base = ccr::ccr_config_from_json(ccr_overrides, base);
        if (clusters) {
            if (*clusters < 1) throw UsageError("--clusters must be at least 1");
            base.clusters = *clusters;
        }
        if (!classifier.empty()) base.classifier_kind = ccr::parse_learner_kind(classifier);
        if (!regressor.empty()) base.regressor_kind = ccr::parse_learner_kind(regressor);
        if (amplification) base.amplification_cluster = *amplification;
        if (elbow_max) base.elbow_max = *elbow_max;
        base.seed = seed;
        base.threads = threads;
        base.validate();
        return base;
    }

    json snapshot(const ccr::CcrConfig& cfg) const { return ccr::to_json(cfg); }
};

/// Applies a JSON object of option values to options that were not given on
/// the command line. The key "ccr" carries a full model configuration.
void apply_config_file(CLI::App* app, const std::string& path, FitFlags* fit) {
    if (path.empty()) return;
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw UsageError("config file " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "ccr") {
            if (!fit) throw UsageError("config key 'ccr' is not valid for " + app->get_name());
            fit->ccr_overrides = value;
            continue;
        }
        CLI::Option* opt = app->get_option_no_throw("--" + key);
        if (!opt || key == "config") throw UsageError("unknown config key '" + key + "'");
        if (opt->count() > 0) continue;
        std::string text;
        if (value.is_string()) text = value.get<std::string>();
        else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
        else if (value.is_number()) text = value.dump();
        else throw UsageError("config key '" + key + "' must be a scalar");
        opt->add_result(text);
        opt->run_callback();
    }
}

ccr::Dataset load_data(const std::string& path) {
    ccr::Dataset d = ccr::load_dataset(path, ccr::format_from_extension(path));
    if (d.empty()) throw ccr::DataError(path + " holds no rows");
    return d;
}

std::string predictions_csv(const ccr::Vector& y_true, const ccr::Vector& y_pred, const ccr::Labels& labels) {
    std::ostringstream os;
    os << "y_true,y_pred,class\n";
    for (Eigen::Index i = 0; i < y_true.size(); ++i) {
        os << format_number(y_true(i)) << ',' << format_number(y_pred(i)) << ',' << labels[static_cast<std::size_t>(i)]
           << '\n';
    }
    return os.str();
}

std::string residuals_csv(const ccr::Vector& y_true, const ccr::Vector& y_pred, int bins = 50) {
    const ccr::Vector r = y_pred - y_true;
    double lo = r.minCoeff(), hi = r.maxCoeff();
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    std::vector<long> counts(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        auto b = static_cast<int>(std::floor((r(i) - lo) / width));
        counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))]++;
    }
    std::ostringstream os;
    os << "bin_lo,bin_hi,count\n";
    for (int b = 0; b < bins; ++b) {
        os << format_number(lo + b * width) << ',' << format_number(lo + (b + 1) * width) << ','
           << counts[static_cast<std::size_t>(b)] << '\n';
    }
    return os.str();
}

ccr::ElbowReport elbow_for(const ccr::CcrModel& model, const ccr::Dataset& data) {
    if (model.elbow) return *model.elbow;
    ccr::KMeansOptions km = model.config.kmeans;
    km.seed = model.config.seed;
    const int l_max = static_cast<int>(std::min<Eigen::Index>(model.config.elbow_max, data.size()));
    return ccr::elbow_select(model.scaler.joint(data), std::max(l_max, 3), km);
}

/// Writes metrics.json, predictions.csv and residuals.csv for a scored model.
void write_scores(const OutputPaths& out, Manifest& manifest, const ccr::Metrics& m, const ccr::Vector& y_true,
                  const ccr::Vector& y_pred, const ccr::Labels& labels) {
    write_file(out.file("metrics.json"), ccr::to_json(m).dump(2) + "\n");
    write_file(out.file("predictions.csv"), predictions_csv(y_true, y_pred, labels));
    write_file(out.file("residuals.csv"), residuals_csv(y_true, y_pred));
    for (const char* name : {"metrics.json", "predictions.csv", "residuals.csv"}) manifest.output(out.file(name));
}

struct Context {
    std::vector<std::string> argv;
};

int cmd_fit(const Context& ctx, const std::string& data_path, const FitFlags& flags, const std::string& out) {
    const ccr::Dataset data = load_data(data_path);
    const ccr::CcrConfig cfg = flags.config();
    const OutputPaths paths = resolve_out(out, ".json");
    Manifest manifest("fit", ctx.argv);
    manifest.input(data_path);
    manifest.set("seed", cfg.seed);
    manifest.set("config", flags.snapshot(cfg));

    const ccr::CcrModel model = ccr::ccr_fit(data, cfg);
    const fs::path model_path = paths.primary.value_or(paths.file("model.json"));
    ccr::save_model(model, model_path);
    manifest.output(model_path);
    const ccr::ElbowReport elbow = elbow_for(model, data);
    write_file(paths.file("elbow.csv"), ccr::elbow_csv(elbow));
    manifest.output(paths.file("elbow.csv"));
    manifest.set("clusters", model.num_classes());
    manifest.write(paths.dir);
    std::cout << "fitted " << model.num_classes() << " classes on " << data.size() << " rows -> "
              << model_path.string() << '\n';
    return 0;
}

int cmd_predict(const Context& ctx, const std::string& model_path, const std::string& data_path,
                const std::string& out) {
    const ccr::CcrModel model = ccr::load_model(model_path);
    const ccr::Matrix x = ccr::load_inputs(data_path, model.dim());
    if (x.rows() == 0) throw ccr::DataError(data_path + " holds no rows");
    const OutputPaths paths = resolve_out(out, ".csv");
    Manifest manifest("predict", ctx.argv);
    manifest.input(model_path);
    manifest.input(data_path);
    const ccr::Labels labels = model.classify(x);
    const ccr::Vector y = model.predict_with_labels(x, labels);
    std::ostringstream os;
    for (Eigen::Index j = 0; j < x.cols(); ++j) os << 'x' << j + 1 << ',';
    os << "prediction,class\n";
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) os << format_number(x(i, j)) << ',';
        os << format_number(y(i)) << ',' << labels[static_cast<std::size_t>(i)] << '\n';
    }
    const fs::path target = paths.primary.value_or(paths.file("predictions.csv"));
    write_file(target, os.str());
    manifest.output(target);
    manifest.write(paths.dir);
    return 0;
}

int cmd_evaluate(const Context& ctx, const std::string& model_path, const std::string& data_path,
                 const std::string& out) {
    const ccr::CcrModel model = ccr::load_model(model_path);
    const ccr::Dataset test = load_data(data_path);
    const ccr::Labels labels = model.classify(test.inputs());
    const ccr::Vector y = model.predict_with_labels(test.inputs(), labels);
    const ccr::Metrics m = ccr::evaluate(model, test);
    std::cout << ccr::to_json(m).dump(2) << '\n' << ccr::metrics_table(fs::path(data_path).stem().string(), m);
    if (!out.empty()) {
        const OutputPaths paths = resolve_out(out, "");
        Manifest manifest("evaluate", ctx.argv);
        manifest.input(model_path);
        manifest.input(data_path);
        write_scores(paths, manifest, m, test.outputs(), y, labels);
        manifest.write(paths.dir);
    }
    return 0;
}

struct ActiveFlags {
    std::string data;
    std::string strategy = "reservoir";
    std::string score = "uncertainty";
    int budget = 0;
    int refit_every = 10;
    std::string reservoir;
    std::optional<int> example;
    std::string test;
    int neighbors = 5;
    std::string kernel = "gaussian";
    double width = 0.05;
    int samples = 10;
    int starts = 8;
    std::string out;
};

int cmd_active(const Context& ctx, const ActiveFlags& a, const FitFlags& flags) {
    ccr::ActiveConfig cfg;
    cfg.strategy = ccr::parse_strategy(a.strategy);
    cfg.score = ccr::parse_score_kind(a.score);
    cfg.kernel.kind = ccr::parse_perturb_kind(a.kernel);
    cfg.kernel.width = a.width;
    cfg.kernel.samples_per_center = a.samples;
    cfg.neighbors = a.neighbors;
    cfg.hull.starts = a.starts;
    cfg.ccr = flags.config();
    cfg.seed = flags.seed;
    if (a.budget < 0) throw UsageError("--budget must be non-negative");
    if (a.refit_every < 1) throw UsageError("--refit-every must be at least 1");

    const ccr::Dataset initial = load_data(a.data);
    Manifest manifest("active", ctx.argv);
    manifest.input(a.data);
    manifest.set("seed", flags.seed);
    manifest.set("config", flags.snapshot(cfg.ccr));

    // Oracle: a benchmark function, or the labels stored with the reservoir.
    ccr::Oracle oracle;
    if (a.example) {
        const ccr::BenchmarkProblem& problem = ccr::benchmark_problem(*a.example);
        if (problem.dim != initial.dim()) throw UsageError("--example dimension does not match the data");
        oracle = [&problem](const ccr::Vector& x) { return problem.evaluate(x); };
    }
    if (!a.reservoir.empty()) {
        manifest.input(a.reservoir);
        const ccr::Matrix pool = ccr::load_inputs(a.reservoir, initial.dim());
        cfg.reservoir = pool;
        if (!oracle) {
            const ccr::Dataset labelled = load_data(a.reservoir);
            if (labelled.dim() != initial.dim()) throw UsageError("reservoir file has no label column and no --example");
            oracle = [labelled](const ccr::Vector& x) {
                for (Eigen::Index i = 0; i < labelled.size(); ++i) {
                    if (labelled.inputs().row(i).transpose() == x) return labelled.outputs()(i);
                }
                throw ccr::DataError("point is not in the reservoir");
            };
        }
    }
    if (cfg.strategy == ccr::Strategy::reservoir && a.reservoir.empty()) {
        throw UsageError("the reservoir strategy needs --reservoir");
    }
    if (!oracle) throw UsageError("no oracle: pass --example or a labelled --reservoir");
    if (!a.test.empty()) {
        cfg.test = load_data(a.test);
        manifest.input(a.test);
    }

    const OutputPaths paths = resolve_out(a.out, "");
    const ccr::ActiveResult result = ccr::active_loop(oracle, initial, cfg, a.budget, a.refit_every);
    write_file(paths.file("history.jsonl"), ccr::history_jsonl(result.history));
    ccr::save_model(result.model, paths.file("model.json"));
    const ccr::Dataset& eval = cfg.test ? *cfg.test : result.train;
    const ccr::Labels labels = result.model.classify(eval.inputs());
    write_scores(paths, manifest, ccr::evaluate(result.model, eval), eval.outputs(),
                 result.model.predict_with_labels(eval.inputs(), labels), labels);
    for (const char* name : {"history.jsonl", "model.json"}) manifest.output(paths.file(name));
    manifest.set("oracle_failures", result.oracle_failures);
    manifest.set("labelled", result.train.size());
    manifest.write(paths.dir);
    std::cout << ccr::history_jsonl(result.history);
    return 0;
}

void append_row(const fs::path& path, const std::string& header, const std::string& row) {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw ccr::Error("cannot write " + path.string());
    if (fresh) out << header << '\n';
    out << row << '\n';
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

int cmd_benchmark(const Context& ctx, std::optional<int> example, bool active_vs_passive, bool direct, std::uint64_t seed,
                  const std::string& out) {
    if (example.has_value() == active_vs_passive) throw UsageError("pass exactly one of --example and --active-vs-passive");
    const OutputPaths paths = resolve_out(out, "");
    Manifest manifest("benchmark", ctx.argv);
    manifest.set("seed", seed);
    if (active_vs_passive) {
        const ccr::ActivePassiveRun run = ccr::run_active_vs_passive(seed);
        write_file(paths.file("history.jsonl"), ccr::history_jsonl(run.history));
        manifest.output(paths.file("history.jsonl"));
        json metrics = {{"active_rmse", run.active_rmse},
                        {"attained_rmse", run.attained_rmse},
                        {"active_labelled", run.active_labeled},
                        {"passive_rmse", run.passive_rmse},
                        {"passive_labelled", run.passive_labeled}};
        write_file(paths.file("metrics.json"), metrics.dump(2) + "\n");
        manifest.output(paths.file("metrics.json"));
        append_row(paths.file("active_vs_passive.csv"), "seed,active_n,active_rmse,attained_rmse,passive_n,passive_rmse",
                   std::to_string(seed) + ',' + std::to_string(run.active_labeled) + ',' +
                       format_number(run.active_rmse) + ',' + format_number(run.attained_rmse) + ',' + std::to_string(run.passive_labeled) + ',' +
                       format_number(run.passive_rmse));
        manifest.output(paths.file("active_vs_passive.csv"));
        manifest.set("seconds", run.seconds);
        manifest.write(paths.dir);
        std::cout << "active  N=" << run.active_labeled << "  RMSE=" << format_number(run.active_rmse)
                  << "  attained=" << format_number(run.attained_rmse) << '\n'
                  << "passive N=" << run.passive_labeled << "  RMSE=" << format_number(run.passive_rmse) << '\n';
        return 0;
    }

    const ccr::BenchmarkProblem& problem = ccr::benchmark_problem(*example);
    const ccr::ExampleRun run = ccr::run_example(*example, seed, direct);
    manifest.set("config", ccr::to_json(run.model.config));
    const ccr::Labels labels = run.model.classify(run.test.inputs());
    write_scores(paths, manifest, run.metrics, run.test.outputs(),
                 run.model.predict_with_labels(run.test.inputs(), labels), labels);
    ccr::save_model(run.model, paths.file("model.json"));
    write_file(paths.file("elbow.csv"), ccr::elbow_csv(elbow_for(run.model, run.train)));
    for (const char* name : {"model.json", "elbow.csv"}) manifest.output(paths.file(name));
    append_row(paths.file("results.csv"), "example,name,seed,n_train,n_eval,L,l2,r2,rmse,direct_l2,direct_r2",
               std::to_string(*example) + ',' + problem.name + ',' + std::to_string(seed) + ',' +
                   std::to_string(run.train.size()) + ',' + std::to_string(run.test.size()) + ',' +
                   std::to_string(run.model.num_classes()) + ',' + opt_cell(run.metrics.l2) + ',' +
                   opt_cell(run.metrics.r2) + ',' + format_number(run.metrics.rmse) + ',' +
                   (run.direct_metrics ? opt_cell(run.direct_metrics->l2) : "") + ',' +
                   (run.direct_metrics ? opt_cell(run.direct_metrics->r2) : ""));
    manifest.output(paths.file("results.csv"));
    manifest.set("seconds", run.seconds);
    manifest.write(paths.dir);
    std::cout << ccr::metrics_table(problem.name, run.metrics);
    if (run.direct_metrics) std::cout << ccr::metrics_table("direct-mlp", *run.direct_metrics);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster-classify-regress surrogate models"};
    app.require_subcommand(1);
    Context ctx;
    ctx.argv.assign(argv, argv + argc);

    std::string config_path;
    std::string data, model, out;

    FitFlags fit_flags;
    auto* fit = app.add_subcommand("fit", "Fit a CCR model");
    fit->add_option("--data", data, "Training data (.csv or .json)")->required();
    fit->add_option("--out", out, "Output directory, or model path ending in .json")->required();
    fit->add_option("--config", config_path, "JSON file with option values");
    fit_flags.add_to(fit);

    auto* predict = app.add_subcommand("predict", "Predict with a saved model");
    predict->add_option("--model", model, "Model JSON")->required();
    predict->add_option("--data", data, "Inputs (d or d+1 columns)")->required();
    predict->add_option("--out", out, "Output directory, or CSV path")->required();
    predict->add_option("--config", config_path, "JSON file with option values");

    auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on labelled data");
    evaluate->add_option("--model", model, "Model JSON")->required();
    evaluate->add_option("--data", data, "Labelled test data")->required();
    evaluate->add_option("--out", out, "Directory for metrics and plot data");
    evaluate->add_option("--config", config_path, "JSON file with option values");

    ActiveFlags active_flags;
    FitFlags active_fit;
    auto* active = app.add_subcommand("active", "Active learning from an initial data set");
    active->add_option("--data", active_flags.data, "Initial labelled data")->required();
    active->add_option("--strategy", active_flags.strategy, "reservoir, hull, boundary or perturb");
    active->add_option("--score", active_flags.score, "uncertainty, entropy or margin");
    active->add_option("--budget", active_flags.budget, "Number of points to acquire")->required();
    active->add_option("--refit-every", active_flags.refit_every, "Acquisitions between refits");
    active->add_option("--reservoir", active_flags.reservoir, "Candidate pool (labels optional)");
    active->add_option("--example", active_flags.example, "Use benchmark example N as the oracle");
    active->add_option("--test", active_flags.test, "Fixed evaluation set for the history");
    active->add_option("--neighbors", active_flags.neighbors, "k for boundary pairs");
    active->add_option("--kernel", active_flags.kernel, "uniform_box, gaussian or local_covariance");
    active->add_option("--width", active_flags.width, "Perturbation width");
    active->add_option("--samples", active_flags.samples, "Perturbation draws per center");
    active->add_option("--starts", active_flags.starts, "Starts of the hull search");
    active->add_option("--out", active_flags.out, "Output directory")->required();
    active->add_option("--config", config_path, "JSON file with option values");
    active_fit.add_to(active);

    std::optional<int> example;
    bool active_vs_passive = false, direct = false;
    std::uint64_t bench_seed = 0;
    std::string bench_out = ".";
    auto* bench = app.add_subcommand("benchmark", "Reproduce a benchmark run");
    bench->add_option("--example", example, "Example 1..5")->check(CLI::Range(1, 5));
    bench->add_flag("--active-vs-passive", active_vs_passive, "Active versus passive comparison on f2");
    bench->add_flag("--direct", direct, "Also fit a single MLP regressor");
    bench->add_option("--seed", bench_seed, "Random seed");
    bench->add_option("--out", bench_out, "Output directory (results.csv is appended)");
    bench->add_option("--config", config_path, "JSON file with option values");

    CLI::App* chosen = nullptr;
    try {
        app.parse(argc, argv);
        for (CLI::App* sub : {fit, predict, evaluate, active, bench}) {
            if (sub->parsed()) chosen = sub;
        }
        FitFlags* flags = chosen == fit ? &fit_flags : chosen == active ? &active_fit : nullptr;
        apply_config_file(chosen, config_path, flags);

        if (chosen == fit) return cmd_fit(ctx, data, fit_flags, out);
        if (chosen == predict) return cmd_predict(ctx, model, data, out);
        if (chosen == evaluate) return cmd_evaluate(ctx, model, data, out);
        if (chosen == active) return cmd_active(ctx, active_flags, active_fit);
        return cmd_benchmark(ctx, example, active_vs_passive, direct, bench_seed, bench_out);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        CLI::App* help_for = &app;
        for (CLI::App* sub : {fit, predict, evaluate, active, bench}) {
            if (sub->parsed()) help_for = sub;
        }
        std::cerr << help_for->help();
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (chosen) std::cerr << '\n' << chosen->help();
        return 2;
    } catch (const ccr::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ccr::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
