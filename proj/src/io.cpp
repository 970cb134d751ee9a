#include "bdrbm/io.hpp"

#include <fstream>

#include "bdrbm/errors.hpp"

namespace bdrbm::io {

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows[0].size();
    Eigen::MatrixXd m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
    return m;
}

json load_versioned(const std::string& path, const std::string& kind) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != kSchemaVersion)
        throw ValidationError(path + ": missing or unsupported schema_version");
    if (!j.contains("kind") || j["kind"].get<std::string>() != kind)
        throw ValidationError(path + ": expected kind '" + kind + "'");
    return j;
}

void dump(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace

json config_to_json(const TomographyConfig& c) {
    json j;
    j["n_bases"] = c.n_bases;
    j["shots"] = c.shots;
    j["val_fraction"] = c.val_fraction;
    j["fine_tune_rounds"] = c.fine_tune_rounds;
    j["rbm"] = {{"learning_rate", c.rbm.learning_rate},
                {"epochs", c.rbm.epochs},
                {"minibatch_size", c.rbm.minibatch_size},
                {"l2_coeff", c.rbm.l2_coeff},
                {"cd_steps", c.rbm.cd_steps}};
    j["regression"] = {{"lr", c.regression.lr},
                       {"beta1", c.regression.beta1},
                       {"beta2", c.regression.beta2},
                       {"eps", c.regression.eps},
                       {"l1_coeff", c.regression.l1_coeff},
                       {"epochs", c.regression.epochs},
                       {"minibatch_size", c.regression.minibatch_size}};
    j["pca"] = {{"enabled", c.pca.enabled},
                {"k", c.pca.k},
                {"variance_target", c.pca.variance_target}};
    j["n_hidden"] = c.n_hidden;
    j["ffnn_hidden_layers"] = c.ffnn_hidden_layers;
    j["rng_seed"] = c.rng_seed;
    return j;
}

TomographyConfig config_from_json(const json& j) {
    TomographyConfig c;
    c.n_bases = j.at("n_bases").get<int>();
    c.shots = j.at("shots").get<std::uint64_t>();
    c.val_fraction = j.at("val_fraction").get<double>();
    c.fine_tune_rounds = j.at("fine_tune_rounds").get<int>();
    const auto& r = j.at("rbm");
    c.rbm.learning_rate = r.at("learning_rate").get<double>();
    c.rbm.epochs = r.at("epochs").get<int>();
    c.rbm.minibatch_size = r.at("minibatch_size").get<int>();
    c.rbm.l2_coeff = r.at("l2_coeff").get<double>();
    c.rbm.cd_steps = r.at("cd_steps").get<int>();
    const auto& g = j.at("regression");
    c.regression.lr = g.at("lr").get<double>();
    c.regression.beta1 = g.at("beta1").get<double>();
    c.regression.beta2 = g.at("beta2").get<double>();
    c.regression.eps = g.at("eps").get<double>();
    c.regression.l1_coeff = g.at("l1_coeff").get<double>();
    c.regression.epochs = g.at("epochs").get<int>();
    c.regression.minibatch_size = g.at("minibatch_size").get<int>();
    const auto& p = j.at("pca");
    c.pca.enabled = p.at("enabled").get<bool>();
    c.pca.k = p.at("k").get<int>();
    c.pca.variance_target = p.at("variance_target").get<double>();
    c.n_hidden = j.at("n_hidden").get<int>();
    c.ffnn_hidden_layers = j.at("ffnn_hidden_layers").get<std::vector<int>>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return c;
}

void save_state(const std::string& path, const StateFile& file) {
    file.state.validate();
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "state";
    j["n_qubits"] = file.state.n_qubits;
    j["energy"] = file.energy;
    j["metadata"] = file.metadata;
    json amps = json::array();
    for (Eigen::Index i = 0; i < file.state.amplitudes.size(); ++i) {
        amps.push_back({file.state.amplitudes[i].real(), file.state.amplitudes[i].imag()});
    }
    j["amplitudes"] = std::move(amps);
    dump(path, j);
}

StateFile load_state(const std::string& path) {
    const json j = load_versioned(path, "state");
    StateFile file;
    file.state.n_qubits = j.at("n_qubits").get<int>();
    file.energy = j.at("energy").get<double>();
    file.metadata = j.value("metadata", json::object());
    const auto& amps = j.at("amplitudes");
    file.state.amplitudes = Eigen::VectorXcd(amps.size());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        file.state.amplitudes[i] = {amps[i][0].get<double>(), amps[i][1].get<double>()};
    }
    file.state.validate();
    return file;
}

void save_measurements(const std::string& path, const MeasurementFile& file) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "measurements";
    j["n_qubits"] = file.n_qubits;
    j["provenance"] = file.provenance;
    json records = json::array();
    for (const auto& record : file.records) {
        json axes = json::array();
        for (const auto& axis : record.basis.axes)
            axes.push_back({axis.x(), axis.y(), axis.z()});
        json counts = json::object();  // std::map iterates sorted, canonical
        for (const auto& [bits, count] : record.counts) counts[bits] = count;
        records.push_back(
            {{"basis", std::move(axes)}, {"shots", record.shots}, {"counts", std::move(counts)}});
    }
    j["records"] = std::move(records);
    dump(path, j);
}

MeasurementFile load_measurements(const std::string& path) {
    const json j = load_versioned(path, "measurements");
    MeasurementFile file;
    file.n_qubits = j.at("n_qubits").get<int>();
    file.provenance = j.value("provenance", json::object());
    for (const auto& rj : j.at("records")) {
        MeasurementRecord record;
        for (const auto& axis : rj.at("basis")) {
            record.basis.axes.emplace_back(axis[0].get<double>(), axis[1].get<double>(),
                                           axis[2].get<double>());
        }
        if (record.basis.n_qubits() != file.n_qubits)
            throw ValidationError(path + ": record basis size != n_qubits");
        record.shots = rj.at("shots").get<std::uint64_t>();
        std::uint64_t total = 0;
        for (const auto& [bits, count] : rj.at("counts").items()) {
            if (static_cast<int>(bits.size()) != file.n_qubits)
                throw ValidationError(path + ": bitstring length != n_qubits");
            record.counts[bits] = count.get<std::uint64_t>();
            total += record.counts[bits];
        }
        if (total != record.shots)
            throw ValidationError(path + ": counts do not sum to shots");
        file.records.push_back(std::move(record));
    }
    return file;
}

namespace {

json ffnn_to_json(const FfnnModel& model) {
    json layers = json::array();
    for (const auto& layer : model.layers) {
        layers.push_back(
            {{"weights", matrix_to_json(layer.weights)},
             {"bias", vector_to_json(layer.bias)},
             {"activation",
              layer.activation == Activation::leaky_relu ? "leaky_relu" : "identity"}});
    }
    return {{"layers", std::move(layers)},
            {"output_weights", matrix_to_json(model.output_weights)},
            {"output_offset", vector_to_json(model.output_offset)}};
}

FfnnModel ffnn_from_json(const json& j) {
    FfnnModel model;
    for (const auto& lj : j.at("layers")) {
        FfnnLayer layer;
        layer.weights = matrix_from_json(lj.at("weights"));
        layer.bias = vector_from_json(lj.at("bias"));
        layer.activation = lj.at("activation").get<std::string>() == "identity"
                               ? Activation::identity
                               : Activation::leaky_relu;
        model.layers.push_back(std::move(layer));
    }
    model.output_weights = matrix_from_json(j.at("output_weights"));
    model.output_offset = vector_from_json(j.at("output_offset"));
    return model;
}

}  // namespace

void save_model(const std::string& path, const ModelFile& file) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "model";
    j["n_qubits"] = file.model.n_qubits;
    j["n_hidden"] = file.model.n_hidden;
    j["config"] = config_to_json(file.model.config);
    j["ffnn"] = ffnn_to_json(file.model.ffnn);
    if (file.model.pca) {
        j["pca"] = {{"mean", vector_to_json(file.model.pca->mean)},
                    {"components", matrix_to_json(file.model.pca->components)},
                    {"explained_variance",
                     vector_to_json(file.model.pca->explained_variance)}};
    } else {
        j["pca"] = nullptr;
    }
    j["metrics"] = file.metrics;
    dump(path, j);
}

ModelFile load_model(const std::string& path) {
    const json j = load_versioned(path, "model");
    ModelFile file;
    file.model.n_qubits = j.at("n_qubits").get<int>();
    file.model.n_hidden = j.at("n_hidden").get<int>();
    file.model.config = config_from_json(j.at("config"));
    file.model.ffnn = ffnn_from_json(j.at("ffnn"));
    if (!j.at("pca").is_null()) {
        PcaTransform pca;
        pca.mean = vector_from_json(j["pca"].at("mean"));
        pca.components = matrix_from_json(j["pca"].at("components"));
        pca.explained_variance = vector_from_json(j["pca"].at("explained_variance"));
        file.model.pca = std::move(pca);
    }
    file.metrics = j.value("metrics", json::object());
    return file;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << header << '\n';
    for (const auto& row : rows) out << row << '\n';
}

}  // namespace bdrbm::io
