#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bdrbm/pipeline.hpp"
#include "bdrbm/quantum.hpp"

namespace bdrbm::io {

using json = nlohmann::ordered_json;

// All files are schema-versioned JSON with canonical (insertion-order) keys;
// doubles serialize with shortest round-trip precision so save -> load ->
// save is byte-identical.
inline constexpr int kSchemaVersion = 1;

json config_to_json(const TomographyConfig& config);
TomographyConfig config_from_json(const json& j);

struct StateFile {
    PureState state;
    double energy = 0.0;
    json metadata;  // generation parameters, free-form
};

void save_state(const std::string& path, const StateFile& file);
StateFile load_state(const std::string& path);

struct MeasurementFile {
    int n_qubits = 0;
    std::vector<MeasurementRecord> records;
    json provenance;  // source: simulated|external, seed, state description
};

void save_measurements(const std::string& path, const MeasurementFile& file);
MeasurementFile load_measurements(const std::string& path);

struct ModelFile {
    BdrbmModel model;
    json metrics;  // final losses, fidelity summaries
};

void save_model(const std::string& path, const ModelFile& file);
ModelFile load_model(const std::string& path);

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows);

}  // namespace bdrbm::io
