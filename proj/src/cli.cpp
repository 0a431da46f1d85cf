#include "mvne/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mvne/config.hpp"
#include "mvne/error.hpp"
#include "mvne/evaluation.hpp"
#include "mvne/graph.hpp"
#include "mvne/synthetic.hpp"
#include "mvne/trainer.hpp"

namespace mvne::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string compact_stamp() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%dT%H%M%S");
    return os.str();
}

/// Content hashes of every regular file under `p` (or of `p` itself).
json hash_inputs(const fs::path& p) {
    json h = json::object();
    if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(p))
            if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) h[f.filename().string()] = file_hash(f);
    } else {
        h[p.filename().string()] = file_hash(p);
    }
    return h;
}

struct RunDirOptions {
    std::string root = "runs";
    std::string exact;
};

void add_run_dir_options(CLI::App* cmd, RunDirOptions& o) {
    cmd->add_option("--out", o.root, "Parent directory for the timestamped run directory")->capture_default_str();
    cmd->add_option("--run-dir", o.exact, "Use exactly this run directory (resumes ablations)");
}

/// `<root>/<timestamp>-<hash>` unless an exact directory was requested.
fs::path make_run_dir(const RunDirOptions& o, const std::string& command, const json& identity) {
    fs::path dir;
    if (!o.exact.empty()) {
        dir = o.exact;
    } else {
        const std::string h = hex64(fnv1a64(command + identity.dump())).substr(0, 8);
        dir = fs::path(o.root) / (compact_stamp() + "-" + h);
        for (int k = 1; fs::exists(dir); ++k) dir = fs::path(o.root) / (compact_stamp() + "-" + h + "." + std::to_string(k));
    }
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const fs::path& dir, const json& m) {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << m.dump(2) << '\n';
}

json read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) return json::object();
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError((dir / "manifest.json").string() + ": " + e.what());
    }
}

json kv_to_json(const KeyValues& kv) {
    json j = json::object();
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
}

void write_matrix(const fs::path& path, const Tensor& t) { write_embeddings(path, t); }

// ---------------------------------------------------------------------------
// Shared training options

struct TrainFlags {
    std::string config_file;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string encoder;
    std::string aggregator;
    bool no_infomin = false;
    std::optional<std::size_t> epochs;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--config", f.config_file, "key=value configuration file");
    cmd->add_option("--set", f.sets, "Override one configuration key (key=value); repeatable");
    cmd->add_option("--seed", f.seed, "Random seed (trainer.seed)");
    cmd->add_option("--encoder", f.encoder, "View encoder operator")->check(CLI::IsMember({"attention", "mean", "max"}));
    cmd->add_option("--aggregator", f.aggregator, "Multi-view aggregator operator")
        ->check(CLI::IsMember({"attention", "mean", "max"}));
    cmd->add_flag("--no-infomin", f.no_infomin, "Drop the inter-view negatives from the objective");
    cmd->add_option("--epochs", f.epochs, "Maximum training epochs (trainer.epochs)");
}

/// defaults < config file < --set < dedicated flags. Also returns the keys that fell back to defaults.
TrainConfig resolve_config(const TrainFlags& f, std::vector<std::string>& defaulted) {
    KeyValues kv;
    if (!f.config_file.empty()) kv = read_key_values(f.config_file);
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (f.seed) kv["trainer.seed"] = std::to_string(*f.seed);
    if (!f.encoder.empty()) kv["encoder.variant"] = f.encoder;
    if (!f.aggregator.empty()) kv["aggregator.variant"] = f.aggregator;
    if (f.no_infomin) kv["objective.infomin"] = "false";
    if (f.epochs) kv["trainer.epochs"] = std::to_string(*f.epochs);
    for (const auto& [k, v] : to_key_values(TrainConfig{}))
        if (!kv.contains(k)) defaulted.push_back(k);
    return train_config_from(kv);
}

void write_loss_log(const fs::path& path, const std::vector<double>& losses) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# epoch\tloss\n";
    for (std::size_t e = 0; e < losses.size(); ++e) out << e << '\t' << format_real(losses[e]) << '\n';
}

void write_embedding_set(const fs::path& dir, const MultiViewGraph& g, const EmbeddingSet& emb) {
    write_embeddings(dir / "embeddings.txt", emb.fused);
    for (std::size_t r = 0; r < emb.views.size(); ++r)
        write_embeddings(dir / ("embeddings_" + g.views[r].name() + ".txt"), emb.views[r]);
}

// ---------------------------------------------------------------------------
// Ablation grid

struct Cell {
    EncoderVariant encoder = EncoderVariant::attention;
    AggregatorVariant aggregator = AggregatorVariant::attention;
    bool infomin = true;

    std::string id() const {
        return "enc-" + to_string(encoder) + "_agg-" + to_string(aggregator) + "_infomin-" + (infomin ? "on" : "off");
    }
    std::string label() const {
        const bool ea = encoder == EncoderVariant::attention;
        const bool aa = aggregator == AggregatorVariant::attention;
        if (ea && aa) return infomin ? "CREME" : "CRE_C-ori";
        if (infomin && !ea && aa) return "CRE_V-" + to_string(encoder);
        if (infomin && ea && !aa) return "CRE_M-" + to_string(aggregator);
        return "enc=" + to_string(encoder) + ",agg=" + to_string(aggregator) + ",infomin=" + (infomin ? "on" : "off");
    }
};

std::vector<Cell> table3_cells() {
    using E = EncoderVariant;
    using A = AggregatorVariant;
    return {{E::mean, A::attention, true}, {E::max, A::attention, true},    {E::attention, A::mean, true},
            {E::attention, A::max, true},  {E::attention, A::attention, false}, {E::attention, A::attention, true}};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<Cell> parse_grid(const KeyValues& kv) {
    for (const auto& [k, v] : kv)
        if (k != "preset" && k != "encoders" && k != "aggregators" && k != "infomin")
            throw ConfigError("unknown grid key '" + k + "'");
    const std::string preset = kv_string(kv, "preset", "full");
    if (preset == "table3") return table3_cells();
    if (preset != "full") throw ConfigError("unknown grid preset '" + preset + "' (expected full|table3)");
    std::vector<EncoderVariant> encs;
    std::vector<AggregatorVariant> aggs;
    std::vector<bool> infos;
    for (const auto& s : split_list(kv_string(kv, "encoders", "attention,mean,max")))
        encs.push_back(parse_encoder_variant(s));
    for (const auto& s : split_list(kv_string(kv, "aggregators", "attention,mean,max")))
        aggs.push_back(parse_aggregator_variant(s));
    for (const auto& s : split_list(kv_string(kv, "infomin", "on,off"))) {
        if (s == "on") infos.push_back(true);
        else if (s == "off") infos.push_back(false);
        else throw ConfigError("grid infomin values must be on|off, got '" + s + "'");
    }
    std::vector<Cell> cells;
    for (auto e : encs)
        for (auto a : aggs)
            for (bool i : infos) cells.push_back({e, a, i});
    if (cells.empty()) throw ConfigError("empty ablation grid");
    return cells;
}

std::string format_ablation_table(const std::vector<Cell>& cells, const std::vector<KeyValues>& results) {
    std::ostringstream os;
    std::size_t w = 8;
    for (const auto& c : cells) w = std::max(w, c.label().size());
    os << std::left << std::setw(static_cast<int>(w + 2)) << "Variant" << std::setw(8) << "MaF1" << std::setw(8)
       << "MiF1" << "NMI" << '\n';
    for (std::size_t k = 0; k < cells.size(); ++k) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-8.4f%-8.4f%.4f", kv_real(results[k], "macro_f1", 0.0),
                      kv_real(results[k], "micro_f1", 0.0), kv_real(results[k], "nmi", 0.0));
        os << std::left << std::setw(static_cast<int>(w + 2)) << cells[k].label() << buf << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gen(const std::string& spec_file, std::optional<std::uint64_t> seed, const RunDirOptions& rd,
            std::ostream& out) {
    KeyValues kv = read_key_values(spec_file);
    if (seed) kv["seed"] = std::to_string(*seed);
    const SynthSpec spec = synth_spec_from(kv);
    const KeyValues full = to_key_values(spec);
    const std::string started = utc_now();
    const fs::path dir = make_run_dir(rd, "gen", kv_to_json(full));
    const MultiViewGraph g = generate(spec);
    auto files = save_synthetic(g, spec, dir);
    json m;
    m["command"] = "gen";
    m["spec"] = kv_to_json(full);
    m["seed"] = spec.seed;
    m["inputs"] = hash_inputs(spec_file);
    m["started"] = started;
    m["finished"] = utc_now();
    m["outputs"] = hash_inputs(dir);
    m["summary"] = {{"nodes", g.num_nodes}, {"views", g.num_views()}, {"attributes", g.num_attributes()},
                    {"classes", g.num_classes()}};
    write_manifest(dir, m);
    out << dir.string() << '\n';
    return ok;
}

int cmd_train(const std::string& dataset, const TrainFlags& flags, bool dump_weights, const RunDirOptions& rd,
              std::ostream& out, std::ostream& err) {
    std::vector<std::string> defaulted;
    const TrainConfig cfg = resolve_config(flags, defaulted);
    const MultiViewGraph g = load_dataset_dir(dataset);
    const json inputs = hash_inputs(dataset);
    const std::string started = utc_now();
    const fs::path dir = make_run_dir(rd, "train", json{{"config", kv_to_json(to_key_values(cfg))}, {"inputs", inputs}});

    json m;
    m["command"] = "train";
    m["dataset"] = fs::absolute(dataset).string();
    m["config"] = kv_to_json(to_key_values(cfg));
    m["config_hash"] = config_hash(cfg);
    m["defaults_applied"] = defaulted;
    m["seed"] = cfg.seed;
    m["inputs"] = inputs;
    m["started"] = started;

    TrainResult res;
    try {
        res = train(g, cfg);
    } catch (const NumericalError& e) {
        m["finished"] = utc_now();
        m["error"] = e.what();
        write_manifest(dir, m);
        throw;
    }
    save_checkpoint(dir / "checkpoint.mvne", res.params, cfg);
    write_embedding_set(dir, g, res.embeddings);
    write_loss_log(dir / "loss.log", res.loss_history);
    write_key_values(dir / "config.txt", to_key_values(cfg));
    if (dump_weights) {
        if (res.embeddings.view_weights.empty())
            err << "note: --dump-view-weights ignored; view weights exist only for the attention aggregator\n";
        else
            write_matrix(dir / "view_weights.txt", res.embeddings.view_weights);
    }
    m["finished"] = utc_now();
    m["outputs"] = hash_inputs(dir);
    m["summary"] = {{"epochs_run", res.loss_history.size()},
                    {"best_epoch", res.best_epoch},
                    {"best_loss", res.best_loss},
                    {"initial_loss", res.loss_history.front()},
                    {"stopped_early", res.stopped_early},
                    {"embedding_rows", res.embeddings.fused.rows()},
                    {"embedding_cols", res.embeddings.fused.cols()}};
    write_manifest(dir, m);
    out << dir.string() << '\n';
    return ok;
}

int cmd_eval(const std::string& emb_file, const std::string& label_file, const EvalOptions& opt,
             const RunDirOptions& rd, std::ostream& out) {
    if (label_file.empty())
        throw ConfigError("eval needs a reference label file (use --nmi-only with labels for clustering-only mode)");
    const Tensor z = read_embeddings(emb_file);
    const std::vector<int> labels = read_label_file(label_file, z.rows());
    json inputs = hash_inputs(emb_file);
    inputs.update(hash_inputs(label_file));
    const std::string started = utc_now();
    const json params = {{"runs", opt.runs}, {"train_ratio", opt.train_ratio}, {"base_seed", opt.base_seed},
                         {"classification", opt.classification}};
    const fs::path dir = make_run_dir(rd, "eval", json{{"params", params}, {"inputs", inputs}});
    const EvalReport rep = evaluate(z, labels, opt);
    {
        std::ofstream f(dir / "report.txt");
        f << format_report_table(rep);
    }
    {
        std::ofstream f(dir / "report.kv");
        f << format_report_records(rep);
    }
    json m;
    m["command"] = "eval";
    m["params"] = params;
    m["seed"] = opt.base_seed;
    m["inputs"] = inputs;
    m["started"] = started;
    m["finished"] = utc_now();
    m["outputs"] = hash_inputs(dir);
    m["summary"] = {{"nmi", rep.mean_nmi}};
    if (opt.classification) {
        m["summary"]["macro_f1"] = rep.mean_macro_f1;
        m["summary"]["micro_f1"] = rep.mean_micro_f1;
    }
    write_manifest(dir, m);
    out << format_report_table(rep) << dir.string() << '\n';
    return ok;
}

int cmd_ablate(const std::string& dataset, const std::string& grid_file, const TrainFlags& flags,
               const EvalOptions& eval_opt, std::size_t jobs, const RunDirOptions& rd, std::ostream& out,
               std::ostream& err) {
    std::vector<std::string> defaulted;
    const TrainConfig base = resolve_config(flags, defaulted);
    const KeyValues grid_kv = grid_file.empty() ? KeyValues{} : read_key_values(grid_file);
    const std::vector<Cell> cells = parse_grid(grid_kv);
    const MultiViewGraph g = load_dataset_dir(dataset);
    if (!g.labels) throw ConfigError("ablation needs a labelled dataset (labels.txt)");
    const json inputs = hash_inputs(dataset);
    const json identity = {{"config", kv_to_json(to_key_values(base))}, {"grid", kv_to_json(grid_kv)}, {"inputs", inputs}};
    const fs::path dir = make_run_dir(rd, "ablate", identity);

    json m = read_manifest(dir);
    if (m.contains("inputs") && m["inputs"] != inputs)
        throw ConfigError("run directory " + dir.string() + " belongs to a different dataset; refusing to resume");
    m["command"] = "ablate";
    m["dataset"] = fs::absolute(dataset).string();
    m["config"] = kv_to_json(to_key_values(base));
    m["grid"] = kv_to_json(grid_kv);
    m["seed"] = base.seed;
    m["inputs"] = inputs;
    m["eval"] = {{"runs", eval_opt.runs}, {"train_ratio", eval_opt.train_ratio}, {"base_seed", eval_opt.base_seed}};
    if (!m.contains("started")) m["started"] = utc_now();
    if (!m.contains("finished_cells")) m["finished_cells"] = json::array();
    write_manifest(dir, m);

    std::vector<KeyValues> results(cells.size());
    std::vector<std::size_t> pending;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const fs::path rfile = dir / "cells" / cells[k].id() / "result.kv";
        const bool done = std::find(m["finished_cells"].begin(), m["finished_cells"].end(), cells[k].id()) !=
                          m["finished_cells"].end();
        if (done && fs::exists(rfile)) {
            results[k] = read_key_values(rfile);
            err << "skip " << cells[k].id() << " (finished)\n";
        } else {
            pending.push_back(k);
        }
    }

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= pending.size()) return;
            const std::size_t k = pending[slot];
            try {
                TrainConfig cfg = base;
                cfg.model.encoder = cells[k].encoder;
                cfg.model.aggregator = cells[k].aggregator;
                cfg.model.objective.infomin_enabled = cells[k].infomin;
                const TrainResult res = train(g, cfg);
                const EvalReport rep = evaluate(res.embeddings.fused, *g.labels, eval_opt);
                const fs::path cdir = dir / "cells" / cells[k].id();
                fs::create_directories(cdir);
                write_embeddings(cdir / "embeddings.txt", res.embeddings.fused);
                write_key_values(cdir / "config.txt", to_key_values(cfg));
                KeyValues r = {{"variant", cells[k].label()},
                               {"macro_f1", format_real(rep.mean_macro_f1)},
                               {"micro_f1", format_real(rep.mean_micro_f1)},
                               {"nmi", format_real(rep.mean_nmi)},
                               {"best_loss", format_real(res.best_loss)},
                               {"epochs_run", std::to_string(res.loss_history.size())}};
                write_key_values(cdir / "result.kv", r);
                std::lock_guard lock(mu);
                results[k] = std::move(r);
                m["finished_cells"].push_back(cells[k].id());
                write_manifest(dir, m);
                err << "done " << cells[k].id() << '\n';
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next = pending.size();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < std::max<std::size_t>(jobs, 1); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    const std::string table = format_ablation_table(cells, results);
    {
        std::ofstream f(dir / "ablation.txt");
        f << table;
    }
    m["finished"] = utc_now();
    write_manifest(dir, m);
    out << table << dir.string() << '\n';
    return ok;
}

int cmd_export(const std::string& ckpt_file, const std::string& dataset, const std::string& out_file,
               const std::string& weights_file, bool all_views, bool allow_mismatch, std::ostream& out) {
    const Checkpoint ck = load_checkpoint(ckpt_file, allow_mismatch);
    const MultiViewGraph g = load_dataset_dir(dataset);
    ModelParams params = init_params(g, ck.config);
    restore_params(params, ck);
    const EmbeddingSet emb = embed(g, params, ck.config.model);
    write_embeddings(out_file, emb.fused);
    if (all_views) {
        const fs::path base(out_file);
        for (std::size_t r = 0; r < emb.views.size(); ++r) {
            fs::path p = base;
            p.replace_filename(base.stem().string() + "_" + g.views[r].name() + base.extension().string());
            write_embeddings(p, emb.views[r]);
        }
    }
    if (!weights_file.empty()) {
        if (emb.view_weights.empty()) throw ConfigError("view weights exist only for the attention aggregator");
        write_matrix(weights_file, emb.view_weights);
    }
    out << out_file << '\n';
    return ok;
}

}  // namespace

std::vector<std::string> table3_variant_names() {
    std::vector<std::string> names;
    for (const auto& c : table3_cells()) names.push_back(c.label());
    return names;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-view network embedding with node-to-node contrastive learning", "mvne"};
    app.require_subcommand(1);

    RunDirOptions rd;

    auto* gen = app.add_subcommand("gen", "Generate a synthetic multi-view SBM dataset from a key=value spec");
    std::string spec_file;
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("spec", spec_file, "Spec file (n, c, views, p_in, p_out, complementary, attr_dim, attr_noise, seed)")
        ->required();
    gen->add_option("--seed", gen_seed, "Override the spec seed");
    add_run_dir_options(gen, rd);

    auto* trn = app.add_subcommand("train", "Train embeddings on a dataset directory");
    std::string dataset;
    TrainFlags tflags;
    bool dump_weights = false;
    trn->add_option("dataset", dataset, "Dataset directory (*.edges, attributes.txt, labels.txt)")->required();
    add_train_flags(trn, tflags);
    trn->add_flag("--dump-view-weights", dump_weights, "Write the per-node view weight matrix");
    add_run_dir_options(trn, rd);

    auto* evl = app.add_subcommand("eval", "Evaluate embeddings with logistic regression and k-means");
    std::string emb_file, label_file;
    EvalOptions eopt;
    bool nmi_only = false;
    evl->add_option("embeddings", emb_file, "Embedding file ('N d' header, N rows)")->required();
    evl->add_option("labels", label_file, "Label file (node_id<TAB>label)");
    evl->add_option("--runs", eopt.runs, "Number of evaluation runs")->capture_default_str();
    evl->add_option("--train-ratio", eopt.train_ratio, "Training fraction per class")->capture_default_str();
    evl->add_option("--seed", eopt.base_seed, "Base seed; run r uses seed+r")->capture_default_str();
    evl->add_flag("--nmi-only", nmi_only, "Clustering only (NMI against the reference labels)");
    add_run_dir_options(evl, rd);

    auto* abl = app.add_subcommand("ablate", "Train and evaluate a grid of model variants");
    std::string ablate_dataset, grid_file;
    TrainFlags aflags;
    EvalOptions aeval;
    std::size_t jobs = 1;
    abl->add_option("dataset", ablate_dataset, "Labelled dataset directory")->required();
    abl->add_option("--grid", grid_file, "Grid file: preset=full|table3, encoders=, aggregators=, infomin=");
    add_train_flags(abl, aflags);
    abl->add_option("--runs", aeval.runs, "Evaluation runs per cell")->capture_default_str();
    abl->add_option("--train-ratio", aeval.train_ratio, "Training fraction per class")->capture_default_str();
    abl->add_option("--eval-seed", aeval.base_seed, "Base evaluation seed")->capture_default_str();
    abl->add_option("--jobs", jobs, "Parallel workers")->capture_default_str();
    add_run_dir_options(abl, rd);

    auto* exp = app.add_subcommand("export", "Recompute embeddings from a checkpoint");
    std::string ckpt_file, exp_dataset, exp_out = "embeddings.txt", weights_out;
    bool exp_views = false, allow_mismatch = false;
    exp->add_option("checkpoint", ckpt_file, "Checkpoint file")->required();
    exp->add_option("dataset", exp_dataset, "Dataset directory")->required();
    exp->add_option("-o,--output", exp_out, "Fused embedding output file")->capture_default_str();
    exp->add_flag("--views", exp_views, "Also write one file per view");
    exp->add_option("--dump-view-weights", weights_out, "Write the view weight matrix to this file");
    exp->add_flag("--allow-config-mismatch", allow_mismatch, "Proceed when the stored config hash disagrees");

    std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(argv_rest.begin(), argv_rest.end());
    try {
        app.parse(argv_rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    }

    try {
        if (*gen) return cmd_gen(spec_file, gen_seed, rd, out);
        if (*trn) return cmd_train(dataset, tflags, dump_weights, rd, out, err);
        if (*evl) {
            eopt.classification = !nmi_only;
            return cmd_eval(emb_file, label_file, eopt, rd, out);
        }
        if (*abl) return cmd_ablate(ablate_dataset, grid_file, aflags, aeval, jobs, rd, out, err);
        if (*exp) return cmd_export(ckpt_file, exp_dataset, exp_out, weights_out, exp_views, allow_mismatch, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    } catch (const Error& e) {
        err << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return data_error;
    }
    return usage_error;
}

}  // namespace mvne::cli
