// nhnn: generate, train, evaluate, analyze, verify and benchmark in one tool.
//
// Exit codes: 0 success, 2 bad arguments, 3 verification failure,
// 4 runtime error. Failures print one machine-parseable line on stderr:
//   NHNN_ERROR category=<token> message=<text>

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "nhnn/csv.hpp"
#include "nhnn/dataset.hpp"
#include "nhnn/gradcheck.hpp"
#include "nhnn/params_io.hpp"
#include "nhnn/train.hpp"

namespace fs = std::filesystem;
using namespace nhnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitVerifyFail = 3;
constexpr int kExitRuntime = 4;

enum class Dtype { F32, F64 };

Dtype dtype_from_env() {
    const char* v = std::getenv("NHNN_DTYPE");
    if (!v || std::string(v) == "f64") return Dtype::F64;
    if (std::string(v) == "f32") return Dtype::F32;
    throw DegenerateSpec("NHNN_DTYPE must be f32 or f64, got '" + std::string(v) + "'");
}

// Everything configurable per run, merged from an optional JSON config file
// and command-line flags (flags win).
struct RunOptions {
    std::string dataset_path;
    std::string config_path;
    std::string out_dir = ".";
    ModelConfig model;
    TrainConfig train;
    double train_ratio = -1.0;  // <0 keeps the dataset's own masks
    std::string variant = "full";
};

void apply_config_file(RunOptions& opt) {
    if (opt.config_path.empty()) return;
    std::ifstream is(opt.config_path);
    if (!is) throw MalformedFile("cannot open config '" + opt.config_path + "'");
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw MalformedFile("config parse error in '" + opt.config_path + "'");
    if (j.contains("variant")) opt.variant = j["variant"].get<std::string>();
    if (j.contains("layers")) opt.model.layers = j["layers"].get<int>();
    if (j.contains("factors")) opt.model.factors = j["factors"].get<int>();
    if (j.contains("hidden")) opt.model.hidden = j["hidden"].get<int>();
    if (j.contains("beta")) opt.model.beta = j["beta"].get<double>();
    if (j.contains("dropout")) opt.model.dropout = j["dropout"].get<double>();
    if (j.contains("lambda")) opt.model.lambda = j["lambda"].get<double>();
    if (j.contains("learning_rate")) opt.train.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("weight_decay")) opt.train.weight_decay = j["weight_decay"].get<double>();
    if (j.contains("max_epochs")) opt.train.max_epochs = j["max_epochs"].get<int>();
    if (j.contains("patience")) opt.train.patience = j["patience"].get<int>();
    if (j.contains("batch_size")) opt.train.batch_size = j["batch_size"].get<int>();
    if (j.contains("seed")) opt.train.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("train_ratio")) opt.train_ratio = j["train_ratio"].get<double>();
}

Dataset load_with_split(const RunOptions& opt) {
    Dataset ds = load_dataset(opt.dataset_path);
    if (opt.train_ratio > 0.0) {
        const double rest = (1.0 - opt.train_ratio) / 2.0;
        ds = split_dataset(ds, opt.train_ratio, rest, rest, opt.train.seed);
    }
    return ds;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

// One completed training run. The header is versioned so downstream scripts
// can detect schema drift.
struct LedgerRow {
    std::string run_id, dataset, variant;
    int factors = 0, hidden = 0, layers = 0;
    double lambda = 0, beta = 0, lr = 0;
    std::uint64_t seed = 0;
    double train_ratio = -1.0;
    EvalMetrics test;
    double factor_auc = -1.0, factor_ari = -2.0;  // sentinels when not planted
    double wall_seconds = 0.0;
};

constexpr const char* kLedgerHeader =
    "ledger_v1:run_id,dataset,variant,factors,hidden,layers,lambda,beta,lr,seed,"
    "train_ratio,test_accuracy,test_macro_f1,test_micro_f1,factor_auc,factor_ari,"
    "wall_seconds";

std::mutex g_ledger_mutex;

void append_ledger(const std::string& path, const LedgerRow& r) {
    // Exclusive lock: sweep workers share one ledger file within the process.
    std::lock_guard<std::mutex> lock(g_ledger_mutex);
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    std::ofstream os(path, std::ios::app);
    if (!os) throw MalformedFile("cannot open ledger '" + path + "'");
    if (fresh) os << kLedgerHeader << "\n";
    os << std::setprecision(12) << csv_quote(r.run_id) << ',' << csv_quote(r.dataset) << ','
       << r.variant << ',' << r.factors << ',' << r.hidden << ',' << r.layers << ','
       << r.lambda << ',' << r.beta << ',' << r.lr << ',' << r.seed << ',' << r.train_ratio
       << ',' << r.test.accuracy << ',' << r.test.macro_f1 << ',' << r.test.micro_f1 << ',';
    if (r.factor_auc >= 0.0) os << r.factor_auc;
    os << ',';
    if (r.factor_ari >= -1.0) os << r.factor_ari;
    os << ',' << r.wall_seconds << "\n";
}

template <class S>
LedgerRow run_one(const Dataset& ds, const RunOptions& opt, const std::string& run_id,
                  const std::string& out_dir) {
    ModelConfig mc = opt.model;
    mc.variant = variant_from_name(opt.variant);
    auto [run, params] = train<S>(ds, mc, opt.train);

    fs::create_directories(out_dir);
    MatD curves(static_cast<Eigen::Index>(run.train_loss_curve.size()), 2);
    for (size_t e = 0; e < run.train_loss_curve.size(); ++e) {
        curves(static_cast<Eigen::Index>(e), 0) = run.train_loss_curve[e];
        curves(static_cast<Eigen::Index>(e), 1) = run.val_metric_curve[e];
    }
    write_matrix_csv(curves, out_dir + "/" + run_id + "_curves.csv", "curve");
    if (run.final_alpha.size() > 0)
        write_matrix_csv(run.final_alpha, out_dir + "/" + run_id + "_alpha.csv", "factor");
    save_params(params, mc, ds.feature_dim(), ds.num_classes,
                out_dir + "/" + run_id + "_params.nhnp");

    LedgerRow row;
    row.run_id = run_id;
    row.dataset = opt.dataset_path;
    row.variant = opt.variant;
    row.factors = mc.factors;
    row.hidden = mc.hidden;
    row.layers = mc.layers;
    row.lambda = mc.lambda;
    row.beta = mc.beta;
    row.lr = opt.train.learning_rate;
    row.seed = opt.train.seed;
    row.train_ratio = opt.train_ratio;
    row.test = run.test;
    row.wall_seconds = run.wall_seconds;
    if (ds.has_planted && run.final_alpha.size() > 0) {
        FactorRecovery rec =
            factor_recovery_score(run.final_alpha, ds.planted_factors, opt.train.seed);
        row.factor_auc = rec.auc;
        row.factor_ari = rec.ari;
    }
    return row;
}

int cmd_gen(const SyntheticSpec& spec, const std::string& out) {
    Dataset ds = generate_planted(spec);
    ds = split_dataset(ds, 0.5, 0.25, 0.25, spec.seed);
    save_dataset(ds, out);
    std::cout << "wrote " << out << " (N=" << ds.topology.num_nodes()
              << " M=" << ds.topology.num_edges() << " d0=" << ds.feature_dim()
              << " classes=" << ds.num_classes << ")\n";
    return kExitOk;
}

template <class S>
int cmd_train(RunOptions opt) {
    apply_config_file(opt);
    Dataset ds = load_with_split(opt);
    std::ostringstream id;
    id << opt.variant << "-k" << opt.model.factors << "-s" << opt.train.seed;
    if (opt.train_ratio > 0.0) id << "-r" << opt.train_ratio;
    LedgerRow row = run_one<S>(ds, opt, id.str(), opt.out_dir);
    append_ledger(opt.out_dir + "/ledger.csv", row);
    std::cout << "run " << row.run_id << ": test accuracy " << row.test.accuracy
              << ", macro-F1 " << row.test.macro_f1;
    if (row.factor_auc >= 0.0) std::cout << ", factor AUC " << row.factor_auc;
    std::cout << "\n";
    return kExitOk;
}

template <class S>
int cmd_eval(const std::string& params_path, const std::string& dataset_path,
             const std::string& split) {
    auto [params, cfg, d_in, num_classes] = load_params<S>(params_path);
    Dataset ds = load_dataset(dataset_path);
    if (ds.feature_dim() != d_in || ds.num_classes != num_classes)
        throw ShapeMismatch("params trained for d_in=" + std::to_string(d_in) + ", C=" +
                            std::to_string(num_classes) + "; dataset disagrees");
    const std::vector<std::uint8_t>* mask = &ds.test_mask;
    if (split == "train") mask = &ds.train_mask;
    else if (split == "val") mask = &ds.val_mask;
    else if (split != "test") throw DegenerateSpec("split must be train, val or test");
    EvalResult<S> res = evaluate(ds, params, cfg, *mask);
    std::cout << "split=" << split << " accuracy=" << res.metrics.accuracy
              << " macro_f1=" << res.metrics.macro_f1 << " micro_f1=" << res.metrics.micro_f1
              << " loss=" << res.metrics.loss << "\n";
    return kExitOk;
}

std::vector<int> read_int_column(const std::string& path) {
    MatD m = read_matrix_csv(path);
    if (m.cols() != 1) throw MalformedFile("'" + path + "' must have exactly one column");
    std::vector<int> out(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = static_cast<int>(std::lround(m(i, 0)));
    return out;
}

int cmd_analyze(const std::string& alpha_path, const std::string& planted_path,
                const std::string& clusters_path, const std::string& out_dir) {
    MatD alpha = read_matrix_csv(alpha_path);
    if (alpha.size() == 0) throw MalformedFile("empty alpha matrix in '" + alpha_path + "'");
    fs::create_directories(out_dir);

    bool degenerate = false;
    MatD pearson = pearson_factor_correlation(alpha, &degenerate);
    write_matrix_csv(pearson, out_dir + "/pearson.csv", "factor");
    if (degenerate)
        std::cout << "note: at least one zero-variance factor column (correlation set to 0)\n";

    MatD pair_sim(alpha.rows(), alpha.rows());
    for (Eigen::Index i = 0; i < alpha.rows(); ++i)
        for (Eigen::Index j = 0; j < alpha.rows(); ++j)
            pair_sim(i, j) =
                relevance_similarity(alpha.row(i).transpose(), alpha.row(j).transpose());
    write_matrix_csv(pair_sim, out_dir + "/relevance_similarity.csv", "edge");

    if (!clusters_path.empty()) {
        std::vector<int> assign = read_int_column(clusters_path);
        if (static_cast<Eigen::Index>(assign.size()) != alpha.rows())
            throw ShapeMismatch("cluster file row count does not match alpha");
        const int c = 1 + *std::max_element(assign.begin(), assign.end());
        std::vector<std::vector<int>> clusters(c);
        for (size_t i = 0; i < assign.size(); ++i) clusters[assign[i]].push_back(static_cast<int>(i));
        write_matrix_csv(cluster_similarity(clusters, alpha), out_dir + "/cluster_similarity.csv",
                         "cluster");
    }

    if (!planted_path.empty()) {
        std::vector<int> planted = read_int_column(planted_path);
        if (static_cast<Eigen::Index>(planted.size()) != alpha.rows())
            throw ShapeMismatch("planted-id file row count does not match alpha");
        FactorRecovery rec = factor_recovery_score(alpha, planted);
        std::cout << "factor recovery: auc=" << rec.auc << " ari=" << rec.ari
                  << " chosen_column=" << rec.chosen_column << "\n";
        MatD scores(1, 2);
        scores << rec.auc, rec.ari;
        write_matrix_csv(scores, out_dir + "/factor_recovery.csv", "score");
    }
    std::cout << "analysis written to " << out_dir << "\n";
    return kExitOk;
}

// End-to-end gradient check of the combined loss on a small instance, f64
// regardless of NHNN_DTYPE (the finite-difference oracle needs the headroom).
int cmd_gradcheck(int nodes, int edges, int factors, int hidden, int num_seeds) {
    std::mt19937_64 topo_rng(424242);
    double worst = 0.0;
    for (int seed = 0; seed < num_seeds; ++seed) {
        SyntheticSpec spec;
        spec.num_nodes = nodes;
        spec.num_edges = edges;
        spec.num_factors = factors;
        spec.mean_degree = 3.0;
        spec.feature_dim = std::max(4, hidden / 2);
        spec.num_classes = 2;
        spec.seed = static_cast<std::uint64_t>(seed) + 1;
        Dataset ds = generate_planted(spec);

        ModelConfig cfg;
        cfg.layers = 2;
        cfg.factors = factors;
        cfg.hidden = hidden;
        cfg.dropout = 0.0;
        cfg.lambda = 0.01;
        std::mt19937_64 rng(1000 + seed);
        ModelParams<double> params =
            init_params<double>(cfg, ds.feature_dim(), ds.num_classes, cfg.hidden, rng);
        MatD features = ds.features.cast<double>();
        std::vector<std::uint8_t> mask(ds.labels.size(), 1);

        auto loss_value = [&](ModelParams<double>& p) {
            Tape<double> tape;
            std::mt19937_64 r(0);
            auto fwd = model_forward(tape, features, ds.topology, p, cfg, ds.task, r, false);
            auto [loss, report] = combined_loss(tape, fwd, ds.labels, mask, cfg);
            return loss.value()(0, 0);
        };

        Tape<double> tape;
        std::mt19937_64 r(0);
        ModelParams<double> p = params;
        auto fwd = model_forward(tape, features, ds.topology, p, cfg, ds.task, r, false);
        auto [loss, report] = combined_loss(tape, fwd, ds.labels, mask, cfg);
        tape.backward(loss.id);

        auto flat = p.flat();
        for (size_t i = 0; i < flat.size(); ++i) {
            auto f = [&](const MatD& candidate) {
                ModelParams<double> probe = params;
                *probe.flat()[i] = candidate;
                return loss_value(probe);
            };
            MatD fd = finite_difference_gradient(f, *flat[i], 1e-5);
            worst = std::max(worst, max_relative_error(fwd.leaves[i].grad(), fd, 1e-5));
        }
        (void)report;
    }
    std::cout << "gradcheck: max relative error " << worst << " over " << num_seeds
              << " seeds (threshold 1e-4)\n";
    if (worst >= 1e-4) {
        std::cerr << "NHNN_ERROR category=GradcheckFailure message=max relative error "
                  << worst << " exceeds 1e-4\n";
        return kExitVerifyFail;
    }
    return kExitOk;
}

template <class S>
int cmd_bench(const std::string& out, int trials, std::uint64_t seed) {
    // Three size points doubling the incidence count by doubling the edge
    // count with N, d and the mean degree fixed. The degree is large enough
    // that per-incidence work dominates the fixed per-node dense costs.
    std::vector<BenchRow> rows;
    for (int num_edges : {128, 256, 512}) {
        SyntheticSpec spec;
        spec.num_nodes = 512;
        spec.num_edges = num_edges;
        spec.num_factors = 2;
        spec.mean_degree = 32.0;
        spec.feature_dim = 32;
        spec.seed = seed;
        Dataset ds = generate_planted(spec);
        ModelConfig cfg;
        cfg.layers = 2;
        cfg.factors = 2;
        cfg.hidden = 32;
        cfg.dropout = 0.0;
        BenchRow row;
        row.num_nodes = spec.num_nodes;
        row.num_edges = spec.num_edges;
        row.incidences = ds.topology.num_incidences();
        row.hidden = cfg.hidden;
        row.median_ms = time_forward_backward<S>(ds, cfg, trials, seed);
        rows.push_back(row);
        std::cout << "E=" << row.incidences << " median " << row.median_ms << " ms\n";
    }
    MatD table(static_cast<Eigen::Index>(rows.size()), 5);
    for (size_t i = 0; i < rows.size(); ++i) {
        table(static_cast<Eigen::Index>(i), 0) = rows[i].num_nodes;
        table(static_cast<Eigen::Index>(i), 1) = rows[i].num_edges;
        table(static_cast<Eigen::Index>(i), 2) = static_cast<double>(rows[i].incidences);
        table(static_cast<Eigen::Index>(i), 3) = rows[i].hidden;
        table(static_cast<Eigen::Index>(i), 4) = rows[i].median_ms;
    }
    write_matrix_csv(table, out, "bench");
    return kExitOk;
}

template <class S>
int cmd_sweep(RunOptions opt, const std::string& mode, int num_seeds, int jobs) {
    apply_config_file(opt);
    struct Job {
        double ratio;
        int factors;
        std::string variant;
        std::uint64_t seed;
    };
    std::vector<Job> grid;
    if (mode == "ratio") {
        for (double ratio : {0.5, 0.4, 0.3, 0.2, 0.1})
            for (const char* v : {"full", "hgnn"})
                for (int s = 0; s < num_seeds; ++s)
                    grid.push_back({ratio, opt.model.factors, v, static_cast<std::uint64_t>(s)});
    } else if (mode == "factors") {
        for (int k : {2, 3, 4})
            for (int s = 0; s < num_seeds; ++s)
                grid.push_back({opt.train_ratio, k, opt.variant, static_cast<std::uint64_t>(s)});
    } else {
        throw DegenerateSpec("sweep mode must be ratio or factors");
    }

    Dataset base = load_dataset(opt.dataset_path);
    fs::create_directories(opt.out_dir);
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1)) {
            if (failed.load()) return;
            const Job& job = grid[i];
            try {
                RunOptions local = opt;
                local.variant = job.variant;
                local.model.factors = job.factors;
                // hidden must stay divisible by the factor count
                local.model.hidden =
                    ((opt.model.hidden + job.factors - 1) / job.factors) * job.factors;
                local.train.seed = job.seed;
                local.train_ratio = job.ratio;
                Dataset ds = base;
                if (job.ratio > 0.0) {
                    const double rest = (1.0 - job.ratio) / 2.0;
                    ds = split_dataset(base, job.ratio, rest, rest, job.seed);
                }
                std::ostringstream id;
                id << job.variant << "-k" << job.factors << "-s" << job.seed;
                if (job.ratio > 0.0) id << "-r" << job.ratio;
                LedgerRow row = run_one<S>(ds, local, id.str(), opt.out_dir);
                append_ledger(opt.out_dir + "/ledger.csv", row);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) first_error = e.what();
            }
        }
    };
    const int nthreads = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw DivergenceDetected("sweep worker failed: " + first_error);
    std::cout << "sweep complete: " << grid.size() << " runs appended to " << opt.out_dir
              << "/ledger.csv\n";
    return kExitOk;
}

template <class F32, class F64>
int dispatch(Dtype dt, F32&& f32, F64&& f64) {
    return dt == Dtype::F32 ? f32() : f64();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Natural-HNN hypergraph toolkit"};
    app.require_subcommand(1);

    // gen
    SyntheticSpec spec;
    std::string gen_out, gen_task = "node";
    auto* gen = app.add_subcommand("gen", "generate a planted-factor synthetic dataset");
    gen->add_option("--out", gen_out, "output dataset path")->required();
    gen->add_option("--nodes", spec.num_nodes, "number of nodes");
    gen->add_option("--edges", spec.num_edges, "number of hyperedges");
    gen->add_option("--factors", spec.num_factors, "number of planted factors");
    gen->add_option("--mean-degree", spec.mean_degree, "mean hyperedge degree");
    gen->add_option("--dim", spec.feature_dim, "feature dimension");
    gen->add_option("--noise", spec.noise_std, "feature noise std");
    gen->add_option("--label-noise", spec.label_noise_std,
                    "label-block noise std (negative = same as --noise)");
    gen->add_option("--classes", spec.num_classes, "number of classes");
    gen->add_option("--samples", spec.num_samples, "samples (hypergraph task)");
    gen->add_option("--task", gen_task, "node | hypergraph")
        ->check(CLI::IsMember({"node", "hypergraph"}));
    gen->add_option("--seed", spec.seed, "generator seed");

    // train
    RunOptions train_opt;
    auto* tr = app.add_subcommand("train", "train a model and append to the run ledger");
    tr->add_option("--dataset", train_opt.dataset_path, "dataset path")->required();
    tr->add_option("--config", train_opt.config_path, "JSON run config");
    tr->add_option("--out", train_opt.out_dir, "output directory");
    tr->add_option("--seed", train_opt.train.seed, "run seed");
    tr->add_option("--variant", train_opt.variant, "full | ablation | alt-branch | hgnn")
        ->check(CLI::IsMember({"full", "ablation", "alt-branch", "hgnn"}));
    tr->add_option("--factors", train_opt.model.factors, "factor count K");
    tr->add_option("--hidden", train_opt.model.hidden, "hidden dimension d");
    tr->add_option("--layers", train_opt.model.layers, "layer count L");
    tr->add_option("--lambda", train_opt.model.lambda, "discrimination loss weight");
    tr->add_option("--beta", train_opt.model.beta, "self-information ratio");
    tr->add_option("--dropout", train_opt.model.dropout, "dropout probability");
    tr->add_option("--lr", train_opt.train.learning_rate, "learning rate");
    tr->add_option("--epochs", train_opt.train.max_epochs, "max epochs");
    tr->add_option("--patience", train_opt.train.patience, "early-stopping patience");
    tr->add_option("--train-ratio", train_opt.train_ratio, "re-split with this train ratio");

    // eval
    std::string eval_params, eval_dataset, eval_split = "test";
    auto* ev = app.add_subcommand("eval", "evaluate saved parameters on a dataset split");
    ev->add_option("--params", eval_params, "parameters file (.nhnp)")->required();
    ev->add_option("--dataset", eval_dataset, "dataset path")->required();
    ev->add_option("--split", eval_split, "train | val | test");

    // analyze
    std::string an_alpha, an_planted, an_clusters, an_out = ".";
    auto* an = app.add_subcommand("analyze", "correlation and similarity analysis of an alpha CSV");
    an->add_option("--alpha", an_alpha, "relevance matrix CSV (rows = hyperedges)")->required();
    an->add_option("--planted", an_planted, "one-column CSV of planted factor ids");
    an->add_option("--clusters", an_clusters, "one-column CSV of hyperedge cluster ids");
    an->add_option("--out", an_out, "output directory");

    // gradcheck
    int gc_nodes = 6, gc_edges = 3, gc_factors = 2, gc_hidden = 8, gc_seeds = 10;
    auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the full loss");
    gc->add_option("--nodes", gc_nodes, "instance node count");
    gc->add_option("--edges", gc_edges, "instance hyperedge count");
    gc->add_option("--factors", gc_factors, "factor count");
    gc->add_option("--hidden", gc_hidden, "hidden dimension");
    gc->add_option("--seeds", gc_seeds, "number of random seeds");

    // bench
    std::string bench_out = "bench.csv";
    int bench_trials = 5;
    std::uint64_t bench_seed = 0;
    auto* be = app.add_subcommand("bench", "forward+backward scaling benchmark");
    be->add_option("--out", bench_out, "timing CSV path");
    be->add_option("--trials", bench_trials, "trials per size point");
    be->add_option("--seed", bench_seed, "benchmark seed");

    // sweep
    RunOptions sweep_opt;
    std::string sweep_mode = "ratio";
    int sweep_seeds = 10, sweep_jobs = 1;
    auto* sw = app.add_subcommand("sweep", "training-ratio or factor-count sweep");
    sw->add_option("--dataset", sweep_opt.dataset_path, "dataset path")->required();
    sw->add_option("--config", sweep_opt.config_path, "JSON run config");
    sw->add_option("--out", sweep_opt.out_dir, "output directory");
    sw->add_option("--mode", sweep_mode, "ratio | factors")
        ->check(CLI::IsMember({"ratio", "factors"}));
    sw->add_option("--variant", sweep_opt.variant, "variant for the factors sweep");
    sw->add_option("--factors", sweep_opt.model.factors, "factor count for the ratio sweep");
    sw->add_option("--hidden", sweep_opt.model.hidden, "hidden dimension d");
    sw->add_option("--layers", sweep_opt.model.layers, "layer count L");
    sw->add_option("--lambda", sweep_opt.model.lambda, "discrimination loss weight");
    sw->add_option("--train-ratio", sweep_opt.train_ratio, "ratio for the factors sweep");
    sw->add_option("--seeds", sweep_seeds, "seeds per grid point");
    sw->add_option("--jobs", sweep_jobs, "parallel workers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "NHNN_ERROR category=BadArguments message=" << e.what() << "\n";
        return kExitBadArgs;
    }

    try {
        const Dtype dt = dtype_from_env();
        if (*gen) {
            spec.task = gen_task == "hypergraph" ? Task::HypergraphClassification
                                                 : Task::NodeClassification;
            return cmd_gen(spec, gen_out);
        }
        if (*tr)
            return dispatch(dt, [&] { return cmd_train<float>(train_opt); },
                            [&] { return cmd_train<double>(train_opt); });
        if (*ev)
            return dispatch(dt,
                            [&] { return cmd_eval<float>(eval_params, eval_dataset, eval_split); },
                            [&] { return cmd_eval<double>(eval_params, eval_dataset, eval_split); });
        if (*an) return cmd_analyze(an_alpha, an_planted, an_clusters, an_out);
        if (*gc) return cmd_gradcheck(gc_nodes, gc_edges, gc_factors, gc_hidden, gc_seeds);
        if (*be)
            return dispatch(dt, [&] { return cmd_bench<float>(bench_out, bench_trials, bench_seed); },
                            [&] { return cmd_bench<double>(bench_out, bench_trials, bench_seed); });
        if (*sw)
            return dispatch(
                dt, [&] { return cmd_sweep<float>(sweep_opt, sweep_mode, sweep_seeds, sweep_jobs); },
                [&] { return cmd_sweep<double>(sweep_opt, sweep_mode, sweep_seeds, sweep_jobs); });
        std::cerr << "NHNN_ERROR category=BadArguments message=no subcommand\n";
        return kExitBadArgs;
    } catch (const Error& e) {
        std::cerr << "NHNN_ERROR category=" << e.category << " message=" << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "NHNN_ERROR category=Unknown message=" << e.what() << "\n";
        return kExitRuntime;
    }
}
