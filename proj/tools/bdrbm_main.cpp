// bdrbm: command-line driver for basis-dependent RBM tomography.
//
// Exit codes: 0 success, 1 runtime/data error, 2 usage error, 3 capability
// error (operation undefined for the given inputs).

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bdrbm/errors.hpp"
#include "bdrbm/eval.hpp"
#include "bdrbm/io.hpp"
#include "bdrbm/pipeline.hpp"
#include "bdrbm/quantum.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using bdrbm::io::json;

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

bdrbm::LocalBasis parse_basis_string(const std::string& text) {
    bdrbm::LocalBasis basis;
    std::stringstream ss(text);
    std::string axis;
    while (std::getline(ss, axis, ';')) {
        std::stringstream as(axis);
        std::string part;
        std::vector<double> coords;
        while (std::getline(as, part, ',')) coords.push_back(std::stod(part));
        if (coords.size() != 3)
            throw bdrbm::ValidationError("basis axis must have exactly 3 coordinates");
        basis.axes.emplace_back(coords[0], coords[1], coords[2]);
    }
    basis.validate();
    return basis;
}

bdrbm::Boundary parse_boundary(const std::string& name) {
    if (name == "open") return bdrbm::Boundary::open;
    if (name == "periodic") return bdrbm::Boundary::periodic;
    throw bdrbm::ValidationError("boundary must be 'open' or 'periodic'");
}

json report_from(const bdrbm::FidelityReport& r) {
    return {{"mean", r.mean},
            {"std", r.stddev},
            {"n", r.fidelities.size()},
            {"per_basis", r.fidelities}};
}

struct FourReports {
    bdrbm::FidelityReport train_meas, val_meas;
    std::optional<bdrbm::FidelityReport> train_target, val_target;
};

FourReports evaluate(const bdrbm::BdrbmModel& model,
                     const bdrbm::TrainingDataset& dataset,
                     const bdrbm::PureState* target) {
    using bdrbm::CompareKind;
    using bdrbm::Split;
    FourReports out;
    out.train_meas = bdrbm::fidelity_report(model, dataset, CompareKind::vs_empirical,
                                            Split::train);
    out.val_meas = bdrbm::fidelity_report(model, dataset, CompareKind::vs_empirical,
                                          Split::validation);
    if (target != nullptr) {
        out.train_target = bdrbm::fidelity_report(
            model, dataset, CompareKind::vs_exact_target, Split::train, target);
        out.val_target = bdrbm::fidelity_report(
            model, dataset, CompareKind::vs_exact_target, Split::validation, target);
    }
    return out;
}

json metrics_json(const FourReports& reports, double regression_loss) {
    json m;
    m["regression_loss"] = regression_loss;
    m["fidelity"] = json::object();
    m["fidelity"]["train_vs_measurement"] = report_from(reports.train_meas);
    m["fidelity"]["val_vs_measurement"] = report_from(reports.val_meas);
    if (reports.train_target) {
        m["fidelity"]["train_vs_target"] = report_from(*reports.train_target);
        m["fidelity"]["val_vs_target"] = report_from(*reports.val_target);
    }
    return m;
}

// --- subcommand configs -----------------------------------------------------

struct GenStateArgs {
    int sites = 6;
    double jz = 1.0, jx = 1.0;
    std::string boundary = "open";
    double tol = 1e-8;
    std::string out;
};

struct MeasureArgs {
    std::string state_path;
    int bases = 200;
    std::uint64_t shots = 8192;
    std::uint64_t seed = 0;
    std::string out;
};

struct TrainArgs {
    std::string data_path;
    double val_frac = 0.2;
    int hidden = 0;
    bool pca = false;
    int pca_k = 0;
    int fine_tune_rounds = 12;
    std::uint64_t seed = 0;
    std::string out_model;
    std::string report_path;
    std::string target_state_path;
    int rbm_epochs = 2000;
    double rbm_lr = 0.05;
    double rbm_l2 = 1e-4;
    int reg_epochs = 4000;
    double reg_lr = 1e-3;
    double l1 = 1e-4;
    std::vector<int> ffnn_hidden;
};

struct PredictArgs {
    std::string model_path;
    std::string basis_string;
    std::string basis_file;
    int samples = 0;
    std::uint64_t seed = 0;
    std::string out;
};

struct SweepFidelityArgs {
    int sites = 6;
    std::vector<double> jx_list{0.0, 0.4, 0.8, 1.0, 1.5, 3.0};
    int bases = 200;
    std::uint64_t shots = 8192;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::string out_csv;
    TrainArgs train;  // shared hyperparameters
};

struct SweepScalingArgs {
    std::vector<int> sites_list{2, 4, 6, 8, 10};
    std::vector<int> bases_list{25, 50, 100, 200, 400};
    double jx = 1.0;
    std::uint64_t shots = 8192;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::string out_csv;
    TrainArgs train;
};

bdrbm::TomographyConfig make_config(const TrainArgs& args, int n_bases,
                                    std::uint64_t shots, std::uint64_t seed) {
    bdrbm::TomographyConfig config;
    config.n_bases = n_bases;
    config.shots = shots;
    config.val_fraction = args.val_frac;
    config.fine_tune_rounds = args.fine_tune_rounds;
    config.n_hidden = args.hidden;
    config.pca.enabled = args.pca;
    config.pca.k = args.pca_k;
    config.ffnn_hidden_layers = args.ffnn_hidden;
    config.rng_seed = seed;
    config.rbm.epochs = args.rbm_epochs;
    config.rbm.learning_rate = args.rbm_lr;
    config.rbm.l2_coeff = args.rbm_l2;
    config.regression.epochs = args.reg_epochs;
    config.regression.lr = args.reg_lr;
    config.regression.l1_coeff = args.l1;
    return config;
}

// --- subcommand bodies -------------------------------------------------------

int run_gen_state(const GenStateArgs& args) {
    bdrbm::TfimParams params{args.sites, args.jz, args.jx, parse_boundary(args.boundary)};
    const bdrbm::PureState state = bdrbm::tfim_ground_state(params, args.tol);
    const double energy = bdrbm::tfim_ground_energy(params, args.tol);
    bdrbm::io::StateFile file;
    file.state = state;
    file.energy = energy;
    file.metadata = {{"model", "tfim"},
                     {"n_sites", args.sites},
                     {"j_z", args.jz},
                     {"j_x", args.jx},
                     {"boundary", args.boundary},
                     {"tol", args.tol}};
    bdrbm::io::save_state(args.out, file);
    std::cout << "ground energy: " << format_double(energy) << '\n';
    return 0;
}

int run_measure(const MeasureArgs& args) {
    const auto state_file = bdrbm::io::load_state(args.state_path);
    bdrbm::io::MeasurementFile out;
    out.n_qubits = state_file.state.n_qubits;
    out.records =
        bdrbm::collect_simulated(state_file.state, args.bases, args.shots, args.seed);
    out.provenance = {{"source", "simulated"},
                      {"seed", args.seed},
                      {"state", state_file.metadata}};
    bdrbm::io::save_measurements(args.out, out);
    std::cout << "wrote " << out.records.size() << " records x " << args.shots
              << " shots\n";
    return 0;
}

int run_train(const TrainArgs& args) {
    const auto data = bdrbm::io::load_measurements(args.data_path);
    const auto config = make_config(args, static_cast<int>(data.records.size()),
                                    data.records.empty() ? 0 : data.records[0].shots,
                                    args.seed);
    auto result = bdrbm::run_tomography(data.records, config);

    std::optional<bdrbm::PureState> target;
    if (!args.target_state_path.empty())
        target = bdrbm::io::load_state(args.target_state_path).state;
    const auto reports =
        evaluate(result.model, result.dataset, target ? &*target : nullptr);
    const json metrics = metrics_json(reports, result.regression_loss);

    if (!args.out_model.empty())
        bdrbm::io::save_model(args.out_model, {result.model, metrics});
    if (!args.report_path.empty()) {
        json report = metrics;
        report["fine_tuning_applied"] = config.fine_tune_rounds > 0;
        std::ofstream out(args.report_path);
        out << report.dump(2) << '\n';
    }
    std::cout << "regression loss: " << format_double(result.regression_loss) << '\n'
              << "val-vs-measurement mean fidelity: "
              << format_double(reports.val_meas.mean) << '\n';
    if (reports.val_target)
        std::cout << "val-vs-target mean fidelity: "
                  << format_double(reports.val_target->mean) << '\n';
    return 0;
}

int run_predict(const PredictArgs& args) {
    const auto model_file = bdrbm::io::load_model(args.model_path);
    std::vector<bdrbm::LocalBasis> bases;
    if (!args.basis_string.empty()) {
        bases.push_back(parse_basis_string(args.basis_string));
    } else if (!args.basis_file.empty()) {
        std::ifstream in(args.basis_file);
        if (!in) throw bdrbm::ValidationError("cannot open " + args.basis_file);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty()) bases.push_back(parse_basis_string(line));
        }
    }
    if (bases.empty()) throw CLI::ValidationError("--basis or --basis-file required");

    json out = json::array();
    for (const auto& basis : bases) {
        json entry;
        json axes = json::array();
        for (const auto& axis : basis.axes) axes.push_back({axis.x(), axis.y(), axis.z()});
        entry["basis"] = std::move(axes);
        if (model_file.model.n_qubits <= 16) {
            const auto dist = bdrbm::predict_distribution(model_file.model, basis);
            json probs = json::object();
            for (Eigen::Index i = 0; i < dist.probs.size(); ++i) {
                probs[bdrbm::index_to_bitstring(i, model_file.model.n_qubits)] =
                    dist.probs[i];
            }
            entry["distribution"] = std::move(probs);
        }
        if (args.samples > 0) {
            const auto samples = bdrbm::predict_samples(model_file.model, basis,
                                                        args.samples, args.seed);
            json sample_list = json::array();
            for (const auto& v : samples) {
                std::string bits(v.size(), '0');
                for (int i = 0; i < v.size(); ++i)
                    if (v[i] > 0.5) bits[i] = '1';
                sample_list.push_back(std::move(bits));
            }
            entry["samples"] = std::move(sample_list);
        }
        out.push_back(std::move(entry));
    }
    if (!args.out.empty()) {
        std::ofstream f(args.out);
        f << out.dump(2) << '\n';
    } else {
        std::cout << out.dump(2) << '\n';
    }
    return 0;
}

int run_sweep_fidelity(const SweepFidelityArgs& args) {
    std::vector<std::string> rows;
    for (double jx : args.jx_list) {
        bdrbm::TfimParams params{args.sites, 1.0, jx, bdrbm::Boundary::open};
        const auto state = bdrbm::tfim_ground_state(params);
        for (std::uint64_t seed : args.seeds) {
            const auto records =
                bdrbm::collect_simulated(state, args.bases, args.shots, seed);
            const auto config = make_config(args.train, args.bases, args.shots, seed);
            const auto result = bdrbm::run_tomography(records, config);
            const auto reports = evaluate(result.model, result.dataset, &state);
            auto emit = [&](const char* split, const char* kind,
                            const bdrbm::FidelityReport& report) {
                std::ostringstream row;
                row << format_double(jx) << ',' << seed << ',' << split << ',' << kind
                    << ',' << format_double(report.mean) << ','
                    << format_double(report.stddev);
                rows.push_back(row.str());
            };
            emit("train", "vs_measurement", reports.train_meas);
            emit("train", "vs_target", *reports.train_target);
            emit("val", "vs_measurement", reports.val_meas);
            emit("val", "vs_target", *reports.val_target);
            std::cout << "jx=" << jx << " seed=" << seed
                      << " val/target=" << reports.val_target->mean << '\n';
        }
    }
    bdrbm::io::write_csv(args.out_csv, "jx,seed,split,kind,mean_fc,std_fc", rows);
    return 0;
}

int run_sweep_scaling(const SweepScalingArgs& args) {
    std::vector<std::string> rows;
    for (int sites : args.sites_list) {
        bdrbm::TfimParams params{sites, 1.0, args.jx, bdrbm::Boundary::open};
        const auto state = bdrbm::tfim_ground_state(params);
        for (int bases : args.bases_list) {
            for (std::uint64_t seed : args.seeds) {
                const auto records =
                    bdrbm::collect_simulated(state, bases, args.shots, seed);
                const auto config = make_config(args.train, bases, args.shots, seed);
                const auto result = bdrbm::run_tomography(records, config);
                const auto recon = bdrbm::fidelity_report(
                    result.model, result.dataset, bdrbm::CompareKind::vs_exact_target,
                    bdrbm::Split::train, &state);
                const auto pred = bdrbm::fidelity_report(
                    result.model, result.dataset, bdrbm::CompareKind::vs_exact_target,
                    bdrbm::Split::validation, &state);
                std::ostringstream row;
                row << sites << ',' << bases << ',' << seed << ','
                    << format_double(recon.mean) << ',' << format_double(recon.stddev)
                    << ',' << format_double(pred.mean) << ','
                    << format_double(pred.stddev) << ','
                    << format_double(bdrbm::overfit_gap(recon, pred));
                rows.push_back(row.str());
                std::cout << "sites=" << sites << " bases=" << bases
                          << " seed=" << seed << " predictive=" << pred.mean << '\n';
            }
        }
    }
    bdrbm::io::write_csv(args.out_csv,
                         "sites,bases,seed,recon_mean,recon_std,pred_mean,pred_std,gap",
                         rows);
    return 0;
}

int run_filters(const std::string& model_path, const std::string& out_csv) {
    const auto model_file = bdrbm::io::load_model(model_path);
    const auto report = bdrbm::filter_report(model_file.model);

    const int n_v = report.n_qubits;
    const int n_h = report.n_hidden;
    auto block_of = [&](int param) {
        if (param < n_v) return "visible_bias";
        if (param < n_v + n_h) return "hidden_bias";
        return "weight";
    };
    const char* coord_names = "xyz";
    std::vector<std::string> rows;
    for (int p = 0; p < report.filter.rows(); ++p) {
        for (int c = 0; c < report.filter.cols(); ++c) {
            std::ostringstream row;
            row << p << ',' << block_of(p) << ',' << c / 3 << ',' << coord_names[c % 3]
                << ',' << format_double(report.filter(p, c));
            rows.push_back(row.str());
        }
    }
    bdrbm::io::write_csv(out_csv, "param_index,param_block,qubit,coord,value", rows);
    std::cout << "visible_bias_mass," << format_double(report.visible_bias_mass) << '\n'
              << "hidden_bias_mass," << format_double(report.hidden_bias_mass) << '\n'
              << "weight_mass," << format_double(report.weight_mass) << '\n'
              << "visible_x_mass," << format_double(report.visible_x_mass) << '\n'
              << "visible_y_mass," << format_double(report.visible_y_mass) << '\n'
              << "visible_z_mass," << format_double(report.visible_z_mass) << '\n';
    return 0;
}

void add_train_options(CLI::App* cmd, TrainArgs& args) {
    cmd->add_option("--val-frac", args.val_frac, "validation fraction");
    cmd->add_option("--hidden", args.hidden, "RBM hidden units (0 = n_qubits)");
    cmd->add_flag("--pca", args.pca, "enable PCA preprocessing");
    cmd->add_option("--pca-k", args.pca_k, "PCA components (0 = 99% variance rule)");
    cmd->add_option("--fine-tune-rounds", args.fine_tune_rounds);
    cmd->add_option("--seed", args.seed, "master rng seed");
    cmd->add_option("--rbm-epochs", args.rbm_epochs);
    cmd->add_option("--rbm-lr", args.rbm_lr);
    cmd->add_option("--rbm-l2", args.rbm_l2);
    cmd->add_option("--reg-epochs", args.reg_epochs);
    cmd->add_option("--reg-lr", args.reg_lr);
    cmd->add_option("--l1", args.l1, "FFNN weight L1 coefficient");
    cmd->add_option("--ffnn-hidden", args.ffnn_hidden,
                    "hidden layer widths (default: linear model)");
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    if (const char* threads = std::getenv("BDRBM_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) omp_set_num_threads(n);
    }
#endif

    CLI::App app{"Basis-dependent RBM tomography"};
    app.require_subcommand(1);

    GenStateArgs gen_args;
    auto* gen = app.add_subcommand("gen-state", "compute a TFIM ground state");
    gen->add_option("--sites", gen_args.sites)->required();
    gen->add_option("--jz", gen_args.jz);
    gen->add_option("--jx", gen_args.jx);
    gen->add_option("--boundary", gen_args.boundary)
        ->check(CLI::IsMember({"open", "periodic"}));
    gen->add_option("--tol", gen_args.tol);
    gen->add_option("--out", gen_args.out)->required();

    MeasureArgs measure_args;
    auto* measure = app.add_subcommand("measure", "simulate random-basis measurements");
    measure->add_option("--state", measure_args.state_path)->required();
    measure->add_option("--bases", measure_args.bases);
    measure->add_option("--shots", measure_args.shots);
    measure->add_option("--seed", measure_args.seed);
    measure->add_option("--out", measure_args.out)->required();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "train a BDRBM on measurement data");
    train->add_option("--data", train_args.data_path)->required();
    train->add_option("--out-model", train_args.out_model);
    train->add_option("--report", train_args.report_path);
    train->add_option("--target-state", train_args.target_state_path,
                      "state file for vs-target fidelity series");
    add_train_options(train, train_args);

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "predict outcomes in a basis");
    predict->add_option("--model", predict_args.model_path)->required();
    predict->add_option("--basis", predict_args.basis_string,
                        "axes as 'x,y,z;x,y,z;...'");
    predict->add_option("--basis-file", predict_args.basis_file,
                        "file with one basis string per line");
    predict->add_option("--samples", predict_args.samples);
    predict->add_option("--seed", predict_args.seed);
    predict->add_option("--out", predict_args.out);

    SweepFidelityArgs sweep_fid_args;
    auto* sweep_fid =
        app.add_subcommand("sweep-fidelity", "fidelity vs transverse field sweep");
    sweep_fid->add_option("--sites", sweep_fid_args.sites);
    sweep_fid->add_option("--jx-list", sweep_fid_args.jx_list)->delimiter(',');
    sweep_fid->add_option("--bases", sweep_fid_args.bases);
    sweep_fid->add_option("--shots", sweep_fid_args.shots);
    sweep_fid->add_option("--seeds", sweep_fid_args.seeds)->delimiter(',');
    sweep_fid->add_option("--out-csv", sweep_fid_args.out_csv)->required();
    add_train_options(sweep_fid, sweep_fid_args.train);

    SweepScalingArgs sweep_scale_args;
    auto* sweep_scale =
        app.add_subcommand("sweep-scaling", "fidelity vs measurement-count grid");
    sweep_scale->add_option("--sites-list", sweep_scale_args.sites_list)->delimiter(',');
    sweep_scale->add_option("--bases-list", sweep_scale_args.bases_list)->delimiter(',');
    sweep_scale->add_option("--jx", sweep_scale_args.jx);
    sweep_scale->add_option("--shots", sweep_scale_args.shots);
    sweep_scale->add_option("--seeds", sweep_scale_args.seeds)->delimiter(',');
    sweep_scale->add_option("--out-csv", sweep_scale_args.out_csv)->required();
    add_train_options(sweep_scale, sweep_scale_args.train);

    std::string filters_model, filters_out;
    auto* filters = app.add_subcommand("filters", "linear-filter analysis of a model");
    filters->add_option("--model", filters_model)->required();
    filters->add_option("--out-csv", filters_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return run_gen_state(gen_args);
        if (measure->parsed()) return run_measure(measure_args);
        if (train->parsed()) return run_train(train_args);
        if (predict->parsed()) return run_predict(predict_args);
        if (sweep_fid->parsed()) return run_sweep_fidelity(sweep_fid_args);
        if (sweep_scale->parsed()) return run_sweep_scaling(sweep_scale_args);
        if (filters->parsed()) return run_filters(filters_model, filters_out);
    } catch (const CLI::ValidationError&) {
        std::cerr << "usage error: missing or malformed arguments\n";
        return 2;
    } catch (const bdrbm::CapabilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
