#include "shearop/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shearop/config.hpp"
#include "shearop/error.hpp"
#include "shearop/metrics.hpp"
#include "shearop/network.hpp"
#include "shearop/parallel.hpp"
#include "shearop/pde.hpp"
#include "shearop/report.hpp"
#include "shearop/shearlet.hpp"
#include "shearop/train.hpp"

namespace shearop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> bench;
    std::optional<int> n, scales, shears, modes, width, epochs, patience, batch;
    std::optional<std::string> arch, mixing, layout, out, name;
    std::optional<double> lr;
    std::optional<std::uint64_t> seed;
    bool resume = false;
    std::string checkpoint_sno, checkpoint_fno, image;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

RunConfig build_config(const Options& o) {
    json j = json::object();
    if (!o.config_path.empty()) {
        if (!fs::exists(o.config_path)) throw MissingInputError(o.config_path);
        std::ifstream is(o.config_path);
        try {
            j = json::parse(is);
        } catch (const json::exception& e) {
            throw ConfigError(o.config_path + ": " + e.what());
        }
        if (!j.is_object()) throw ConfigError(o.config_path + ": expected a JSON object");
    }
    if (!o.bench.empty()) {
        if (o.bench.size() == 1 && o.bench[0] == "all")
            j["benchmarks"] = "all";
        else
            j["benchmarks"] = o.bench;
    }
    if (o.arch) {
        if (*o.arch == "both")
            j["archs"] = {"sno", "fno"};
        else
            j["archs"] = {*o.arch};
    }
    if (o.n) j["n"] = *o.n;
    if (o.out) j["out"] = *o.out;
    if (o.name) j["name"] = *o.name;
    if (o.seed) j["seed"] = *o.seed;
    if (o.scales) j["sno"]["scales"] = *o.scales;
    if (o.shears) j["sno"]["shears"] = *o.shears;
    if (o.mixing) j["sno"]["mixing_mode"] = *o.mixing;
    if (o.layout) j["sno"]["angular_layout"] = *o.layout;
    if (o.modes) {
        j["fno"]["modes_x"] = *o.modes;
        j["fno"]["modes_y"] = *o.modes;
    }
    if (o.width) {
        j["sno"]["width"] = *o.width;
        j["fno"]["width"] = *o.width;
    }
    if (o.epochs) j["train"]["max_epochs"] = *o.epochs;
    if (o.patience) j["train"]["patience"] = *o.patience;
    if (o.batch) j["train"]["batch"] = *o.batch;
    if (o.lr) j["train"]["lr"] = *o.lr;
    return RunConfig::from_json(j);
}

void write_config(const RunConfig& cfg) {
    fs::create_directories(cfg.run_dir());
    const fs::path p = fs::path(cfg.run_dir()) / "config.json";
    std::ofstream os(p);
    if (!os) throw IoError("cannot write " + p.string());
    os << cfg.to_json().dump(2) << "\n";
}

Dataset require_dataset(const std::string& path) {
    if (!fs::exists(path)) throw MissingInputError(path);
    return load_dataset(path);
}

LoadedCheckpoint require_checkpoint(const std::string& path) {
    if (!fs::exists(path)) throw MissingInputError(path);
    return load_checkpoint(path);
}

std::vector<EpochRecord> curve_from(const json& extra) {
    std::vector<EpochRecord> curve;
    if (extra.is_object() && extra.contains("curve"))
        for (const auto& r : extra.at("curve")) curve.push_back({r.at(0), r.at(1), r.at(2)});
    return curve;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
    write_config(cfg);
    fs::create_directories(cfg.data_dir());
    for (BenchmarkId id : cfg.benchmarks) {
        const BenchmarkSpec spec = default_spec(id, cfg.n, cfg.seed);
        const Dataset d = generate_dataset(spec);
        const std::string path = cfg.dataset_path(id);
        save_dataset(d, path);
        out << "generated " << to_string(id) << " (" << d.frames.size() << " frames, " << cfg.n << "x" << cfg.n
            << ") -> " << path << "\n";
    }
    return exit_ok;
}

int cmd_train(const RunConfig& cfg, bool resume, std::ostream& out, std::ostream& err) {
    write_config(cfg);
    fs::create_directories(cfg.checkpoint_dir());
    int status = exit_ok;
    for (BenchmarkId id : cfg.benchmarks) {
        const Dataset d = require_dataset(cfg.dataset_path(id));
        const Split split = chronological_split(d, cfg.train.split);
        for (Arch arch : cfg.archs) {
            const ModelConfig& model = cfg.model(arch);
            const ParamCount pc = param_count(model);
            out << "== " << to_string(id) << " / " << to_string(arch) << "\n" << pc.table();

            const std::string state_path = cfg.state_path(id, arch);
            TrainState state;
            if (resume && fs::exists(state_path)) {
                state = load_train_state(state_path);
                if (!(state.params.config == model))
                    throw ConfigError(state_path + ": checkpoint model config differs from the run config");
                out << "resuming from epoch " << state.epoch << "\n";
            } else {
                state = start_training(model, cfg.train);
            }
            auto on_epoch = [&](const TrainState& s) {
                save_train_state(state_path, s);
                const auto& r = s.curve.back();
                if (r.epoch == 1 || r.epoch % 25 == 0 || r.epoch == cfg.train.max_epochs)
                    out << "epoch " << r.epoch << " train_mse " << fmt("%.4e", r.train_mse) << " val_mse "
                        << fmt("%.4e", r.val_mse) << "\n"
                        << std::flush;
            };
            const TrainResult res = continue_training(d, state, cfg.train, on_epoch);

            const json extra = {{"dataset", to_string(id)},
                                {"arch", to_string(arch)},
                                {"n", cfg.n},
                                {"best_epoch", res.best_epoch},
                                {"best_val", std::isfinite(res.best_val) ? json(res.best_val) : json()},
                                {"train", cfg.train.to_json()},
                                {"curve", [&] {
                                     json c = json::array();
                                     for (const auto& r : res.curve) c.push_back({r.epoch, r.train_mse, r.val_mse});
                                     return c;
                                 }()}};
            const std::string ck = cfg.checkpoint_path(id, arch);
            save_checkpoint(ck, res.best, extra);
            write_loss_curve(fs::path(ck).replace_extension(".loss.csv").string(), res.curve);

            if (res.diverged) {
                err << "error: " << to_string(id) << "/" << to_string(arch) << " " << res.message
                    << "; best checkpoint (epoch " << res.best_epoch << ") kept at " << ck << "\n";
                status = exit_numerical;
                continue;
            }
            auto ev = std::make_shared<const Evaluator>(res.best, d.grid);
            const MetricsRecord vm = evaluate_predictions(d, split.val, predict_pairs(*ev, d, split.val));
            out << "best epoch " << res.best_epoch << " of " << state.epoch << (res.early_stopped ? " (early stop)" : "")
                << "; validation rel_l2 " << fmt("%.4f", vm.rel_l2) << " mse " << fmt("%.4e", vm.mse) << " mae "
                << fmt("%.4e", vm.mae) << " ssim " << fmt("%.4f", vm.ssim) << "\n"
                << "checkpoint -> " << ck << "\n";
        }
    }
    return status;
}

MetricsRecord test_metrics(const Dataset& d, const Split& split, const ModelParams& params, const std::string& arch,
                           std::uint64_t seed, std::vector<ScalarField>* preds = nullptr) {
    auto ev = std::make_shared<const Evaluator>(params, d.grid);
    std::vector<ScalarField> p = predict_pairs(*ev, d, split.test);
    MetricsRecord r = evaluate_predictions(d, split.test, p);
    r.arch = arch;
    r.seed = seed;
    if (preds) *preds = std::move(p);
    return r;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    std::vector<MetricsRecord> records;
    for (BenchmarkId id : cfg.benchmarks) {
        const Dataset d = require_dataset(cfg.dataset_path(id));
        const Split split = chronological_split(d, cfg.train.split);
        for (Arch arch : cfg.archs) {
            const LoadedCheckpoint ck = require_checkpoint(cfg.checkpoint_path(id, arch));
            const MetricsRecord r = test_metrics(d, split, ck.params, to_string(arch), cfg.seed);
            out << to_string(id) << " " << to_string(arch) << " test frames " << r.n_test_frames << ": rel_l2 "
                << fmt("%.4f", r.rel_l2) << " mse " << fmt("%.4e", r.mse) << " mae " << fmt("%.4e", r.mae)
                << " ssim " << fmt("%.4f", r.ssim) << "\n";
            records.push_back(r);
        }
    }
    fs::create_directories(cfg.evaluation_dir());
    const fs::path csv = fs::path(cfg.evaluation_dir()) / "metrics.csv";
    std::ofstream f(csv, std::ios::binary);
    f << metrics_csv(records);
    if (!f) throw IoError("cannot write " + csv.string());
    out << "metrics -> " << csv.string() << "\n";
    return exit_ok;
}

int cmd_compare(const RunConfig& cfg, const Options& o, std::ostream& out) {
    if ((!o.checkpoint_sno.empty() || !o.checkpoint_fno.empty()) && cfg.benchmarks.size() != 1)
        throw ConfigError("--checkpoint-sno/--checkpoint-fno need exactly one --bench");
    std::vector<DatasetComparison> rows;
    for (BenchmarkId id : cfg.benchmarks) {
        const Dataset d = require_dataset(cfg.dataset_path(id));
        const Split split = chronological_split(d, cfg.train.split);
        const std::string ps = o.checkpoint_sno.empty() ? cfg.checkpoint_path(id, Arch::sno) : o.checkpoint_sno;
        const std::string pf = o.checkpoint_fno.empty() ? cfg.checkpoint_path(id, Arch::fno) : o.checkpoint_fno;
        const LoadedCheckpoint cs = require_checkpoint(ps);
        const LoadedCheckpoint cf = require_checkpoint(pf);
        DatasetComparison c;
        c.dataset = to_string(id);
        std::vector<ScalarField> sp, fp;
        c.sno = test_metrics(d, split, cs.params, "sno", cfg.seed, &sp);
        c.fno = test_metrics(d, split, cf.params, "fno", cfg.seed, &fp);
        c.truth = d.target(split.test.front());
        c.sno_pred = sp.front();
        c.fno_pred = fp.front();
        c.sno_curve = curve_from(cs.extra_header);
        c.fno_curve = curve_from(cf.extra_header);
        rows.push_back(std::move(c));
    }
    write_comparison(cfg.report_dir(), rows);
    out << markdown_table(rows) << "reports -> " << cfg.report_dir() << "\n";
    return exit_ok;
}

int cmd_inspect(const RunConfig& cfg, const Options& o, std::ostream& out) {
    const Grid2D grid = Grid2D::square(cfg.n, 0.0, 1.0);
    const WindowBank bank = build_windows(grid, cfg.sno.frame);
    out << "grid " << cfg.n << "x" << cfg.n << ", J = " << cfg.sno.frame.n_scales << ", S = " << cfg.sno.frame.n_shears
        << "\n"
        << "M = " << bank.count() << " windows\n";
    std::vector<int> per_scale(bank.scale_count(), 0);
    std::vector<std::size_t> support(bank.scale_count(), 0);
    for (int m = 0; m < bank.count(); ++m) {
        ++per_scale[bank.scale_of(m)];
        if (!bank.window_entries(m).empty()) ++support[bank.scale_of(m)];
    }
    for (int j = 0; j < bank.scale_count(); ++j)
        out << "scale " << j << (j == 0 ? " (low-pass)" : "") << ": " << per_scale[j] << " bands, " << support[j]
            << " with support on this grid\n";
    out << "nonzero window entries " << bank.nonzeros() << "\n"
        << "frame-sum max deviation " << fmt("%.3e", bank.frame_deviation()) << "\n";
    std::string image = o.image;
    if (image.empty())
        image = (fs::path(cfg.run_dir()) / "frames" /
                 ("tiling_J" + std::to_string(cfg.sno.frame.n_scales) + "_S" + std::to_string(cfg.sno.frame.n_shears) +
                  "_n" + std::to_string(cfg.n) + ".png"))
                    .string();
    if (fs::path(image).has_parent_path()) fs::create_directories(fs::path(image).parent_path());
    export_tiling(bank, image);
    out << "tiling -> " << image << "\n";
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    init_threads();
    CLI::App app{"Shearlet and Fourier neural operators on synthetic PDE benchmarks", "shearop"};
    app.require_subcommand(1);
    Options o;

    auto* gen = app.add_subcommand("generate", "Generate benchmark datasets");
    auto* train = app.add_subcommand("train", "Train models on generated datasets");
    auto* eval = app.add_subcommand("evaluate", "Evaluate trained checkpoints on the test split");
    auto* cmp = app.add_subcommand("compare", "Compare SNO and FNO: metrics, tables, error panels");
    auto* insp = app.add_subcommand("inspect-frame", "Build a frequency tiling and report its statistics");

    for (auto* sub : {gen, train, eval, cmp, insp}) {
        sub->add_option("--config", o.config_path, "JSON run config; flags override it");
        sub->add_option("--bench", o.bench, "Benchmark id(s), comma separated, or 'all'")->delimiter(',');
        sub->add_option("--n", o.n, "Grid size N (N x N)");
        sub->add_option("--arch", o.arch, "sno, fno or both");
        sub->add_option("--scales", o.scales, "Shearlet scales J");
        sub->add_option("--shears", o.shears, "Directions per scale S");
        sub->add_option("--mixing", o.mixing, "SNO channel mixing: full, diagonal or scalar");
        sub->add_option("--layout", o.layout, "Angular layout: uniform or cone_adapted");
        sub->add_option("--modes", o.modes, "FNO retained modes per axis");
        sub->add_option("--width", o.width, "Channel width");
        sub->add_option("--epochs", o.epochs, "Maximum epochs");
        sub->add_option("--patience", o.patience, "Early stopping patience");
        sub->add_option("--batch", o.batch, "Mini-batch size");
        sub->add_option("--lr", o.lr, "Learning rate");
        sub->add_option("--seed", o.seed, "Seed for data noise, initialization and shuffling");
        sub->add_option("--out", o.out, "Root directory for runs");
        sub->add_option("--name", o.name, "Run name (directory under --out)");
    }
    train->add_flag("--resume", o.resume, "Continue from the saved training state");
    cmp->add_option("--checkpoint-sno", o.checkpoint_sno, "SNO checkpoint to compare");
    cmp->add_option("--checkpoint-fno", o.checkpoint_fno, "FNO checkpoint to compare");
    insp->add_option("--image", o.image, "Output path of the tiling PNG");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }

    try {
        const RunConfig cfg = build_config(o);
        if (gen->parsed()) return cmd_generate(cfg, out);
        if (train->parsed()) return cmd_train(cfg, o.resume, out, err);
        if (eval->parsed()) return cmd_evaluate(cfg, out);
        if (cmp->parsed()) return cmd_compare(cfg, o, out);
        return cmd_inspect(cfg, o, out);
    } catch (const MissingInputError& e) {
        err << "error: " << e.what() << "\n";
        return exit_missing_input;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const NumericalError& e) {
        err << "error: numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const StructuralError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
}

}  // namespace shearop
