// Copyright 2026 The mipt-decoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// mipt: simulate monitored-circuit datasets, train and evaluate phase classifiers.

#include "CLI11.hpp"
#include "mipt/eval/oracle.hpp"
#include "mipt/io/dataset_file.hpp"
#include "mipt/io/report.hpp"
#include "mipt/model/checkpoint.hpp"
#include "mipt/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using namespace mipt;

namespace {

unsigned resolve_threads(int requested) { return requested > 0 ? unsigned(requested) : default_thread_count(); }

struct Gammas {
    double x = NAN, zz = NAN, zxz = NAN;
    std::string vertex;

    void add_options(CLI::App* app) {
        app->add_option("--gx", x, "X measurement strength");
        app->add_option("--gzz", zz, "ZZ measurement strength");
        app->add_option("--gzxz", zxz, "ZXZ measurement strength");
        app->add_option("--vertex", vertex, "preset point: trivial, lr, spt, or inset (0.3, 0.4, 0.3)")
            ->check(CLI::IsMember({"trivial", "lr", "spt", "inset"}));
    }

    /// Fills the triple from the preset or checks the explicit values, then
    /// renormalises to sum exactly 1.
    void resolve() {
        if (!vertex.empty()) {
            const std::map<std::string, std::array<double, 3>> presets = {{"trivial", {0.85, 0.075, 0.075}},
                                                                          {"lr", {0.075, 0.85, 0.075}},
                                                                          {"spt", {0.075, 0.075, 0.85}},
                                                                          {"inset", {0.3, 0.4, 0.3}}};
            const auto& g = presets.at(vertex);
            x = g[0];
            zz = g[1];
            zxz = g[2];
        }
        if (std::isnan(x) || std::isnan(zz) || std::isnan(zxz)) {
            throw DomainError("give --gx, --gzz and --gzxz, or --vertex");
        }
        if (x < 0 || zz < 0 || zxz < 0) throw DomainError("measurement strengths must be nonnegative");
        const double s = x + zz + zxz;
        if (std::abs(s - 1.0) > 1e-9) throw DomainError("gamma_x + gamma_zz + gamma_zxz = " + io::fmt(s, 12) + ", not 1");
        x /= s;
        zz /= s;
        zxz /= s;
    }
};

std::string shape2(int r, int c) { return "[" + std::to_string(r) + ", " + std::to_string(c) + "]"; }

// ---------------------------------------------------------------------------

void setup_simulate(CLI::App& root) {
    struct Opts {
        int L = 12, T = 72, threads = 0;
        std::size_t M = 10000;
        std::uint64_t seed = 0;
        std::string out, point_id;
        Gammas g;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = root.add_subcommand("simulate", "simulate M trajectories at one point and write a dataset file");
    cmd->add_option("--L", o->L, "number of qubits")->capture_default_str();
    cmd->add_option("--T", o->T, "circuit depth")->capture_default_str();
    cmd->add_option("--M", o->M, "trajectories")->capture_default_str();
    cmd->add_option("--seed", o->seed, "master seed")->capture_default_str();
    cmd->add_option("--point-id", o->point_id, "seed-stream label (default from the coordinates)");
    cmd->add_option("--out", o->out, "output dataset file")->required();
    cmd->add_option("--threads", o->threads, "worker threads (default MIPT_THREADS or all cores)");
    o->g.add_options(cmd);
    cmd->callback([o] {
        io::RunManifest man;
        man.command = "simulate";
        o->g.resolve();
        GridPoint p{o->g.x, o->g.zz, o->g.zxz, "grid", o->point_id};
        if (p.id.empty()) p.id = point_id_for(p.gamma_x, p.gamma_zz, p.gamma_zxz);
        const CircuitConfig cfg = p.config(o->L, o->T, o->seed);
        cfg.validate();
        const Dataset ds = generate_dataset(cfg, o->M, resolve_threads(o->threads));
        const std::string bytes = io::encode_dataset(ds);
        io::write_file_atomic(o->out, bytes);
        const TrajectoryRecord shape(o->T, o->L);
        std::cout << "records: X " << shape2(shape.x.rows, shape.x.cols) << ", ZZ " << shape2(shape.zz.rows, shape.zz.cols)
                  << ", ZXZ " << shape2(shape.zxz.rows, shape.zxz.cols) << "\n"
                  << "outcomes per record: " << outcome_count(o->T, o->L) << ", bytes per record: "
                  << io::record_bytes(o->T, o->L) << "\n"
                  << "wrote " << o->out << " (" << ds.M() << " records, " << bytes.size() << " bytes)\n";
        man.config = {{"L", o->L},         {"T", o->T},           {"M", o->M},           {"gamma_x", p.gamma_x},
                      {"gamma_zz", p.gamma_zz}, {"gamma_zxz", p.gamma_zxz}, {"point_id", p.id}};
        man.seeds = {{"master_seed", o->seed}};
        man.outputs = {o->out};
        man.write();
    });
}

// ---------------------------------------------------------------------------

struct DataPrep {
    int crop_T = 0, crop_L = 0;
    std::size_t take_M = 0;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--crop-T", crop_T, "keep the first T steps of every record");
        cmd->add_option("--crop-L", crop_L, "keep the central window of this many qubits");
        cmd->add_option("--take-M", take_M, "keep the first M trajectories");
    }

    Dataset apply(Dataset ds) const {
        if (take_M) ds = take_first(ds, take_M);
        if (crop_T) ds = crop_time(ds, crop_T);
        if (crop_L) ds = crop_spatial(ds, crop_L);
        return ds;
    }
};

void setup_train(CLI::App& root) {
    struct Opts {
        std::vector<std::string> data;
        std::string arch = "cnn_attn", out, log, channels = "x,zz,zxz", aggregation = "attention";
        int h1 = 8, h2 = 5, h = 64, epochs = 30, n_step = 150, threads = 0;
        double lr = 2e-5, dropout = 0.2;
        std::size_t N = 25;
        std::uint64_t seed = 0;
        bool resample = false;
        DataPrep prep;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = root.add_subcommand("train", "train one classifier on three vertex datasets");
    cmd->add_option("--data", o->data, "the three vertex dataset files")->required()->expected(3);
    cmd->add_option("--arch", o->arch, "cnn_attn or mlp")->check(CLI::IsMember({"cnn_attn", "mlp"}))->capture_default_str();
    cmd->add_option("--h1", o->h1, "conv output channels")->capture_default_str();
    cmd->add_option("--h2", o->h2, "fusion hidden width")->capture_default_str();
    cmd->add_option("--hidden", o->h, "MLP hidden width")->capture_default_str();
    cmd->add_option("--channels", o->channels, "input channels, e.g. x,zz")->capture_default_str();
    cmd->add_option("--aggregation", o->aggregation, "attention or mean")
        ->check(CLI::IsMember({"attention", "mean"}))
        ->capture_default_str();
    cmd->add_option("--dropout", o->dropout, "fusion dropout probability")->capture_default_str();
    cmd->add_option("--lr", o->lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--epochs", o->epochs, "epochs")->capture_default_str();
    cmd->add_option("--N", o->N, "trajectories per set")->capture_default_str();
    cmd->add_option("--seed", o->seed, "seed for initialisation and data order")->capture_default_str();
    cmd->add_flag("--resample", o->resample, "draw sets with replacement instead of epoch partitions");
    cmd->add_option("--n-step", o->n_step, "resampling iterations per epoch")->capture_default_str();
    cmd->add_option("--out", o->out, "checkpoint file")->required();
    cmd->add_option("--log", o->log, "training log CSV (default <out>.log.csv)");
    cmd->add_option("--threads", o->threads, "worker threads")->capture_default_str();
    o->prep.add_options(cmd);
    cmd->callback([o] {
        io::RunManifest man;
        man.command = "train";
        std::vector<Dataset> sets;
        for (const auto& path : o->data) sets.push_back(o->prep.apply(io::load_dataset(path)));
        const LabeledPool pool = build_pool(std::move(sets));
        std::unique_ptr<PhaseModel> model;
        if (o->arch == "mlp") {
            model = std::make_unique<MlpModel>(o->h, pool.T(), pool.L(), member_init_seed(o->seed, 0));
        } else {
            ArchHyper h;
            h.h1 = o->h1;
            h.h2 = o->h2;
            h.T = pool.T();
            h.L = pool.L();
            h.channels = channel_mask_from_string(o->channels);
            h.aggregation = aggregation_from_string(o->aggregation);
            h.dropout = o->dropout;
            model = std::make_unique<CnnAttnModel>(h, member_init_seed(o->seed, 0));
        }
        TrainConfig cfg;
        cfg.lr = o->lr;
        cfg.epochs = o->epochs;
        cfg.N = o->N;
        cfg.n_step = o->n_step;
        cfg.seed = member_train_seed(o->seed, 0);
        std::cout << model->arch() << ": " << model->parameter_count() << " parameters, pool " << pool.size()
                  << " trajectories (T=" << pool.T() << ", L=" << pool.L() << ")\n";
        io::CsvWriter log({"epoch", "mean_loss", "wall_ms"});
        auto on_epoch = [&](const EpochLog& e) {
            std::cout << "epoch " << e.epoch << ": loss " << io::fmt(e.mean_loss) << " (" << e.steps << " steps, "
                      << io::fmt(e.wall_ms, 4) << " ms)\n";
            log.row({std::to_string(e.epoch), io::fmt(e.mean_loss, 10), io::fmt(e.wall_ms, 6)});
        };
        const TrainReport rep = o->resample ? train_resampled(*model, pool, cfg, on_epoch) : train(*model, pool, cfg, on_epoch);
        if (rep.dropped_per_epoch) {
            std::cout << "note: " << rep.dropped_per_epoch << " trajectories per epoch do not fill a set of N and are skipped\n";
        }
        const std::string log_path = o->log.empty() ? o->out + ".log.csv" : o->log;
        save_checkpoint(*model, o->out);
        log.save(log_path);
        std::cout << "wrote " << o->out << " and " << log_path << "\n";
        man.config = {{"arch", model->arch()}, {"hyper", model->hyper()}, {"lr", cfg.lr},     {"epochs", cfg.epochs},
                      {"N", cfg.N},            {"resample", o->resample}, {"n_step", cfg.n_step}, {"data", o->data},
                      {"crop_T", o->prep.crop_T}, {"crop_L", o->prep.crop_L}, {"take_M", o->prep.take_M}};
        man.seeds = {{"seed", o->seed}, {"init_seed", member_init_seed(o->seed, 0)}, {"train_seed", cfg.seed}};
        man.outputs = {o->out, log_path};
        man.write();
    });
}

// ---------------------------------------------------------------------------

std::optional<LabeledPoint> find_label(const std::vector<LabeledPoint>& labels, const CircuitConfig& c) {
    for (const auto& lp : labels) {
        if (std::abs(lp.point.gamma_x - c.gamma_x) < 1e-6 && std::abs(lp.point.gamma_zz - c.gamma_zz) < 1e-6 &&
            std::abs(lp.point.gamma_zxz - c.gamma_zxz) < 1e-6)
            return lp;
    }
    return std::nullopt;
}

std::vector<std::shared_ptr<const PhaseModel>> load_models(const std::vector<std::string>& paths) {
    Ensemble models;
    for (const auto& p : paths) models.push_back(std::shared_ptr<const PhaseModel>(load_checkpoint(p)));
    return models;
}

void setup_eval(CLI::App& root) {
    struct Opts {
        std::vector<std::string> models, data;
        std::string labels, out = "accuracy.csv", votes_out;
        std::size_t N = 25, R = 1;
        int threads = 0;
        DataPrep prep;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = root.add_subcommand("eval", "ensemble-majority accuracy over labeled test points");
    cmd->add_option("--models", o->models, "checkpoint files, split into R consecutive groups")->required();
    cmd->add_option("--data", o->data, "test-point dataset files")->required();
    cmd->add_option("--labels", o->labels, "ground-truth labels CSV")->required();
    cmd->add_option("--N", o->N, "trajectories per set at test time")->capture_default_str();
    cmd->add_option("--R", o->R, "repetitions (independent ensembles)")->capture_default_str();
    cmd->add_option("--out", o->out, "accuracy CSV")->capture_default_str();
    cmd->add_option("--votes-out", o->votes_out, "per-point vote CSV");
    cmd->add_option("--threads", o->threads, "worker threads");
    o->prep.add_options(cmd);
    cmd->callback([o] {
        io::RunManifest man;
        man.command = "eval";
        const unsigned threads = resolve_threads(o->threads);
        if (o->R < 1 || o->models.size() % o->R != 0) {
            throw DomainError(std::to_string(o->models.size()) + " models cannot be split into R = " +
                              std::to_string(o->R) + " equal ensembles");
        }
        const auto models = load_models(o->models);
        const std::size_t k = models.size() / o->R;
        const auto labels = load_labels(o->labels);

        io::CsvWriter votes({"point_id", "role", "repetition", "votes", "majority", "agreement", "truth"});
        std::vector<std::string> header = {"point_id", "role"};
        for (std::size_t r = 0; r < o->R; ++r) header.push_back("P_" + std::to_string(r + 1));
        header.insert(header.end(), {"P_mean", "SE"});
        io::CsvWriter acc(header);
        // role -> per repetition (hits, total)
        std::map<std::string, std::vector<std::pair<int, int>>> by_role;
        auto summary_row = [&](const std::string& id, const std::string& role, const std::vector<double>& P) {
            std::vector<std::string> row = {id, role};
            double mean = 0;
            for (double p : P) {
                row.push_back(io::fmt(p, 8));
                mean += p / double(P.size());
            }
            row.push_back(io::fmt(mean, 8));
            row.push_back(P.size() >= 2 ? io::fmt(accuracy_report(P).se, 8) : "");
            acc.row(row);
        };
        for (const auto& path : o->data) {
            const Dataset ds = o->prep.apply(io::load_dataset(path));
            const auto lp = find_label(labels, ds.config);
            if (!lp) {
                std::cerr << "warning: no label for " << ds.config.point_id << " (" << path << "), skipped\n";
                continue;
            }
            std::vector<double> P;
            auto& tally = by_role[lp->point.role];
            tally.resize(o->R);
            for (std::size_t r = 0; r < o->R; ++r) {
                const Ensemble group(models.begin() + std::ptrdiff_t(r * k), models.begin() + std::ptrdiff_t((r + 1) * k));
                const VoteRecord v = ensemble_majority(group, ds, o->N, threads);
                const bool hit = v.majority == lp->label;
                P.push_back(hit ? 1.0 : 0.0);
                tally[r].first += hit;
                tally[r].second += 1;
                std::string vs;
                for (auto c : v.votes) vs += std::to_string(c + 1);
                votes.row({lp->point.id, lp->point.role, std::to_string(r + 1), vs, std::to_string(v.majority + 1),
                           io::fmt(v.agreement, 6), std::to_string(lp->label + 1)});
                std::cout << lp->point.id << " (" << lp->point.role << ") rep " << r + 1 << ": votes " << vs
                          << " majority " << v.majority + 1 << " truth " << lp->label + 1 << "\n";
            }
            summary_row(lp->point.id, lp->point.role, P);
        }
        for (const auto& [role, tally] : by_role) {
            std::vector<double> P;
            for (const auto& [hits, total] : tally) P.push_back(double(hits) / double(total));
            summary_row("ALL", role, P);
            const double mean = std::accumulate(P.begin(), P.end(), 0.0) / double(P.size());
            std::cout << role << ": P = " << io::fmt(mean, 4)
                      << (P.size() >= 2 ? " +- " + io::fmt(accuracy_report(P).se, 3) : std::string()) << "\n";
        }
        acc.save(o->out);
        man.outputs = {o->out};
        if (!o->votes_out.empty()) {
            votes.save(o->votes_out);
            man.outputs.push_back(o->votes_out);
        }
        man.config = {{"models", o->models}, {"data", o->data}, {"labels", o->labels}, {"N", o->N}, {"R", o->R}};
        man.write();
    });
}

// ---------------------------------------------------------------------------

void setup_phase_diagram(CLI::App& root) {
    struct Opts {
        std::vector<std::string> models;
        std::string data_dir, grid_out = "phase_diagram.csv", svg;
        bool generate = false;
        int L = 12, T = 72, threads = 0;
        std::size_t M = 10000, N = 25;
        std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = root.add_subcommand("phase-diagram", "ensemble majority over the 55-point simplex grid");
    cmd->add_option("--models", o->models, "checkpoint files of the ensemble")->required();
    cmd->add_option("--data-dir", o->data_dir, "directory holding <point_id>.mipt grid datasets");
    cmd->add_flag("--generate", o->generate, "simulate missing grid datasets (and store them in --data-dir)");
    cmd->add_option("--L", o->L, "qubits for generated datasets")->capture_default_str();
    cmd->add_option("--T", o->T, "depth for generated datasets")->capture_default_str();
    cmd->add_option("--M", o->M, "trajectories for generated datasets")->capture_default_str();
    cmd->add_option("--seed", o->seed, "master seed for generated datasets")->capture_default_str();
    cmd->add_option("--N", o->N, "trajectories per set")->capture_default_str();
    cmd->add_option("--grid-out", o->grid_out, "phase diagram CSV")->capture_default_str();
    cmd->add_option("--svg", o->svg, "ternary SVG");
    cmd->add_option("--threads", o->threads, "worker threads");
    cmd->callback([o] {
        io::RunManifest man;
        man.command = "phase-diagram";
        const unsigned threads = resolve_threads(o->threads);
        const auto models = load_models(o->models);
        const auto grid = sample_grid();
        DatasetSource source = [&](const GridPoint& p) -> std::optional<Dataset> {
            try {
                const fs::path file = fs::path(o->data_dir.empty() ? "." : o->data_dir) / (p.id + ".mipt");
                if (fs::exists(file)) return io::load_dataset(file);
                if (!o->generate) {
                    std::cerr << "warning: " << file.string() << " missing, point left empty\n";
                    return std::nullopt;
                }
                Dataset ds = simulate_point(p, o->L, o->T, o->M, o->seed, threads);
                if (!o->data_dir.empty()) io::save_dataset(ds, file);
                return ds;
            } catch (const std::exception& e) {
                std::cerr << "warning: " << p.id << ": " << e.what() << ", point left empty\n";
                return std::nullopt;
            }
        };
        std::vector<DiagramEntry> entries;
        for (const auto& p : grid) {
            try {
                auto part = reconstruct_phase_diagram(models, {p}, source, o->N, threads);
                entries.push_back(part[0]);
            } catch (const std::exception& e) {
                std::cerr << "warning: " << p.id << ": " << e.what() << ", point left empty\n";
                entries.push_back({p, std::nullopt, 0.0, {}});
            }
        }
        io::CsvWriter csv({"gamma_x", "gamma_zz", "gamma_zxz", "label", "agreement"});
        for (const auto& e : entries) {
            csv.row({io::fmt(e.point.gamma_x, 6), io::fmt(e.point.gamma_zz, 6), io::fmt(e.point.gamma_zxz, 6),
                     e.label ? std::to_string(*e.label + 1) : "", e.label ? io::fmt(e.agreement, 6) : ""});
        }
        csv.save(o->grid_out);
        man.outputs = {o->grid_out};
        if (!o->svg.empty()) {
            io::write_file_atomic(o->svg, io::ternary_svg(entries, "majority phase, opacity = agreement"));
            man.outputs.push_back(o->svg);
        }
        std::size_t holes = 0;
        for (const auto& e : entries) holes += !e.label;
        std::cout << "phase diagram: " << entries.size() << " points, " << holes << " without data\n";
        man.config = {{"models", o->models}, {"N", o->N}, {"L", o->L}, {"T", o->T}, {"M", o->M}};
        man.seeds = {{"master_seed", o->seed}};
        man.write();
    });
}

// ---------------------------------------------------------------------------

void setup_diagnostics(CLI::App& root) {
    struct Opts {
        int L = 8, T = 0, n_traj = 200, threads = 0;
        std::vector<int> times;
        std::uint64_t seed = 0;
        std::string out = "entropy.csv", svg;
        Gammas g;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = root.add_subcommand("diagnostics", "trajectory-averaged entanglement entropy, mutual information, TEE");
    o->g.add_options(cmd);
    cmd->add_option("--L", o->L, "qubits")->capture_default_str();
    cmd->add_option("--T", o->T, "depth (default 4 L)");
    cmd->add_option("--times", o->times, "sample times (default 0..T)");
    cmd->add_option("--n-traj", o->n_traj, "trajectories")->capture_default_str();
    cmd->add_option("--seed", o->seed, "master seed")->capture_default_str();
    cmd->add_option("--out", o->out, "CSV output")->capture_default_str();
    cmd->add_option("--svg", o->svg, "S(t) plot");
    cmd->add_option("--threads", o->threads, "worker threads");
    cmd->callback([o] {
        io::RunManifest man;
        man.command = "diagnostics";
        o->g.resolve();
        const int T = o->T > 0 ? o->T : 4 * o->L;
        std::vector<int> times = o->times;
        if (times.empty())
            for (int t = 0; t <= T; ++t) times.push_back(t);
        const GridPoint p = make_point(o->g.x, o->g.zz, o->g.zxz, "grid");
        const EntropyReport rep = entropy_curve(p.config(o->L, T, o->seed), times, o->n_traj, resolve_threads(o->threads));
        io::CsvWriter csv({"quantity", "t", "mean", "se"});
        for (std::size_t k = 0; k < rep.times.size(); ++k)
            csv.row({"s_half", std::to_string(rep.times[k]), io::fmt(rep.s_half[k], 10), io::fmt(rep.s_half_se[k], 10)});
        csv.row({"mi", std::to_string(T), io::fmt(rep.mi, 10), io::fmt(rep.mi_se, 10)});
        if (o->L % 4 == 0) csv.row({"s_topo", std::to_string(T), io::fmt(rep.s_topo, 10), io::fmt(rep.s_topo_se, 10)});
        csv.save(o->out);
        man.outputs = {o->out};
        if (!o->svg.empty()) {
            io::write_file_atomic(o->svg, io::entropy_svg(rep, "half-chain entropy at " + p.id));
            man.outputs.push_back(o->svg);
        }
        std::cout << p.id << ", L=" << o->L << ", T=" << T << ", " << o->n_traj << " trajectories\n"
                  << "  S_half(T) = " << io::fmt(rep.s_half.back(), 5) << " +- " << io::fmt(rep.s_half_se.back(), 3)
                  << "\n  MI(end to end) = " << io::fmt(rep.mi, 5) << " +- " << io::fmt(rep.mi_se, 3) << "\n";
        if (o->L % 4 == 0)
            std::cout << "  S_topo = " << io::fmt(rep.s_topo, 5) << " +- " << io::fmt(rep.s_topo_se, 3) << "\n";
        man.config = {{"point", p.id}, {"L", o->L}, {"T", T}, {"n_traj", o->n_traj}};
        man.seeds = {{"master_seed", o->seed}};
        man.write();
    });
}

// ---------------------------------------------------------------------------

void setup_labels(CLI::App& root) {
    struct Opts {
        int L = 8, T = 48, n_traj = 200, threads = 0;
        std::uint64_t seed = 1;
        std::string out = "labels.csv", oracle_out;
        OracleThresholds th;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = root.add_subcommand("labels", "ground-truth labels from exact entanglement diagnostics");
    cmd->add_option("--L", o->L, "qubits (multiple of 4)")->capture_default_str();
    cmd->add_option("--T", o->T, "depth")->capture_default_str();
    cmd->add_option("--n-traj", o->n_traj, "trajectories per point")->capture_default_str();
    cmd->add_option("--seed", o->seed, "master seed")->capture_default_str();
    cmd->add_option("--topo-threshold", o->th.topo_bits, "S_topo at or above this is SPT")->capture_default_str();
    cmd->add_option("--mi-threshold", o->th.mi_bits, "otherwise MI at or above this is LR")->capture_default_str();
    cmd->add_option("--out", o->out, "labels CSV")->capture_default_str();
    cmd->add_option("--oracle-out", o->oracle_out, "CSV of the underlying diagnostics");
    cmd->add_option("--threads", o->threads, "worker threads");
    cmd->callback([o] {
        io::RunManifest man;
        man.command = "labels";
        const unsigned threads = resolve_threads(o->threads);
        std::vector<GridPoint> pts = vertex_points();
        for (const auto& p : default_inner_points()) pts.push_back(p);
        for (const auto& p : sample_grid()) pts.push_back(p);
        std::vector<PhaseSignature> sigs;
        for (const auto& p : pts) {
            sigs.push_back(phase_signature(p, o->L, o->T, o->n_traj, o->seed, threads, o->th));
            std::cerr << p.id << " -> " << phase_name(sigs.back().label) << "\n";
        }
        std::vector<LabeledPoint> grid;
        for (const auto& s : sigs)
            if (s.point.role == "grid") grid.push_back({s.point, s.label});
        std::map<std::string, bool> outer;
        for (const auto& p : boundary_points(grid)) outer[p.id] = true;
        std::vector<LabeledPoint> rows;
        for (auto& s : sigs) {
            if (s.point.role == "grid" && outer.count(s.point.id)) s.point.role = "outer";
            rows.push_back({s.point, s.label});
        }
        io::write_file_atomic(o->out, labels_csv(rows));
        man.outputs = {o->out};
        if (!o->oracle_out.empty()) {
            io::CsvWriter csv({"point_id", "gamma_x", "gamma_zz", "gamma_zxz", "role", "s_half", "s_half_se", "mi",
                               "mi_se", "s_topo", "s_topo_se", "label", "n_traj"});
            for (const auto& s : sigs) {
                const auto& r = s.report;
                csv.row({s.point.id, io::fmt(s.point.gamma_x), io::fmt(s.point.gamma_zz), io::fmt(s.point.gamma_zxz),
                         s.point.role, io::fmt(r.s_half[0], 10), io::fmt(r.s_half_se[0], 10), io::fmt(r.mi, 10),
                         io::fmt(r.mi_se, 10), io::fmt(r.s_topo, 10), io::fmt(r.s_topo_se, 10),
                         std::to_string(s.label + 1), std::to_string(r.n_traj)});
            }
            csv.save(o->oracle_out);
            man.outputs.push_back(o->oracle_out);
        }
        std::cout << "labeled " << rows.size() << " points (" << outer.size() << " outer), wrote " << o->out << "\n";
        man.config = {{"L", o->L}, {"T", o->T}, {"n_traj", o->n_traj}, {"topo_threshold", o->th.topo_bits},
                      {"mi_threshold", o->th.mi_bits}};
        man.seeds = {{"master_seed", o->seed}};
        man.write();
    });
}

// ---------------------------------------------------------------------------

void setup_sweep(CLI::App& root) {
    struct Opts {
        std::string param, labels, out = "sweep.csv", channels = "x,zz,zxz", aggregation = "attention";
        std::vector<double> values;
        int L = 6, T = 36, h1 = 4, h2 = 4, epochs = 10, threads = 0;
        std::size_t M = 1000, N = 25, models = 5, test_M = 0;
        double lr = 1e-3;
        std::uint64_t seed = 0;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = root.add_subcommand("sweep", "train and evaluate ensembles across one parameter");
    cmd->add_option("--param", o->param, "h1, h2, M, N, T or LA")
        ->required()
        ->check(CLI::IsMember({"h1", "h2", "M", "N", "T", "LA"}));
    cmd->add_option("--values", o->values, "values of the swept parameter")->required();
    cmd->add_option("--labels", o->labels, "ground-truth labels CSV (inner and outer rows are tested)")->required();
    cmd->add_option("--L", o->L, "qubits")->capture_default_str();
    cmd->add_option("--T", o->T, "depth")->capture_default_str();
    cmd->add_option("--M", o->M, "trajectories per vertex")->capture_default_str();
    cmd->add_option("--test-M", o->test_M, "trajectories per test point (default M)");
    cmd->add_option("--N", o->N, "set size")->capture_default_str();
    cmd->add_option("--h1", o->h1, "conv channels")->capture_default_str();
    cmd->add_option("--h2", o->h2, "fusion width")->capture_default_str();
    cmd->add_option("--channels", o->channels, "input channels")->capture_default_str();
    cmd->add_option("--aggregation", o->aggregation, "attention or mean")->capture_default_str();
    cmd->add_option("--epochs", o->epochs, "epochs")->capture_default_str();
    cmd->add_option("--lr", o->lr, "learning rate")->capture_default_str();
    cmd->add_option("--models", o->models, "models per value")->capture_default_str();
    cmd->add_option("--seed", o->seed, "base seed")->capture_default_str();
    cmd->add_option("--out", o->out, "sweep CSV")->capture_default_str();
    cmd->add_option("--threads", o->threads, "worker threads");
    cmd->callback([o] {
        io::RunManifest man;
        man.command = "sweep";
        const unsigned threads = resolve_threads(o->threads);
        const std::string& param = o->param;
        auto max_of = [&](double base) {
            double m = base;
            for (double v : o->values) m = std::max(m, v);
            return m;
        };
        // Simulate once at the largest geometry; each value crops from it.
        const int T_sim = param == "T" ? int(max_of(o->T)) : o->T;
        const std::size_t M_sim = param == "M" ? std::size_t(max_of(double(o->M))) : o->M;
        const std::size_t test_M = o->test_M ? o->test_M : M_sim;
        const LabeledPool full_pool = vertex_pool(o->L, T_sim, M_sim, o->seed, threads);
        std::vector<LabeledPoint> tests;
        for (const auto& lp : load_labels(o->labels))
            if (lp.point.role == "inner" || lp.point.role == "outer") tests.push_back(lp);
        const auto full_tests = simulate_test_points(tests, o->L, T_sim, test_M, o->seed + 1, threads);

        io::CsvWriter csv({"param", "value", "role", "P_mean", "SE", "n_models", "error"});
        for (double value : o->values) {
            try {
                ArchHyper h;
                h.h1 = o->h1;
                h.h2 = o->h2;
                h.T = o->T;
                h.L = o->L;
                h.channels = channel_mask_from_string(o->channels);
                h.aggregation = aggregation_from_string(o->aggregation);
                TrainConfig cfg;
                cfg.lr = o->lr;
                cfg.epochs = o->epochs;
                cfg.N = o->N;
                std::function<Dataset(const Dataset&, bool)> prep = [](const Dataset& d, bool) { return d; };
                const int iv = int(std::lround(value));
                if (param == "h1") h.h1 = iv;
                if (param == "h2") h.h2 = iv;
                if (param == "N") cfg.N = std::size_t(iv);
                if (param == "M") prep = [iv](const Dataset& d, bool) { return take_first(d, std::min<std::size_t>(iv, d.M())); };
                if (param == "T") {
                    h.T = iv;
                    prep = [iv](const Dataset& d, bool) { return crop_time(d, iv); };
                }
                if (param == "LA") {
                    h.L = iv;
                    if (iv < 3) h.channels.zxz = false;
                    prep = [iv](const Dataset& d, bool) { return crop_spatial(d, iv); };
                }
                LabeledPool pool;
                for (std::size_t c = 0; c < 3; ++c) pool.classes[c] = prep(full_pool.classes[c], true);
                std::vector<TestPoint> tp;
                for (const auto& t : full_tests) tp.push_back({t.truth, prep(t.data, false)});
                const Ensemble ens = train_ensemble(cnn_factory(h), pool, cfg, o->models, mix64(o->seed, iv, 3), threads);
                for (const std::string role : {"inner", "outer"}) {
                    std::vector<TestPoint> subset;
                    for (const auto& t : tp)
                        if (t.truth.point.role == role) subset.push_back(t);
                    if (subset.empty()) continue;
                    const auto P = member_accuracies(ens, subset, cfg.N, threads);
                    const double mean = std::accumulate(P.begin(), P.end(), 0.0) / double(P.size());
                    const std::string se = P.size() >= 2 ? io::fmt(accuracy_report(P).se, 6) : "";
                    csv.row({param, io::fmt(value), role, io::fmt(mean, 6), se, std::to_string(P.size()), ""});
                    std::cout << param << " = " << io::fmt(value) << " " << role << ": P = " << io::fmt(mean, 4)
                              << (se.empty() ? "" : " +- " + se) << "\n";
                }
            } catch (const std::exception& e) {
                std::cerr << "warning: " << param << " = " << value << " failed: " << e.what() << "\n";
                csv.row({param, io::fmt(value), "", "", "", "0", e.what()});
            }
        }
        csv.save(o->out);
        man.outputs = {o->out};
        man.config = {{"param", param}, {"values", o->values}, {"L", o->L}, {"T", o->T}, {"M", o->M},
                      {"N", o->N},      {"h1", o->h1},         {"h2", o->h2}, {"epochs", o->epochs},
                      {"lr", o->lr},    {"models", o->models}, {"labels", o->labels}};
        man.seeds = {{"seed", o->seed}};
        man.write();
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mipt: monitored-circuit phase classification"};
    app.require_subcommand(1);
    setup_simulate(app);
    setup_train(app);
    setup_eval(app);
    setup_phase_diagram(app);
    setup_diagnostics(app);
    setup_sweep(app);
    setup_labels(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
