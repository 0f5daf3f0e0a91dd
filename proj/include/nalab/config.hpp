// Experiment configuration: a JSON document with the sections
// domain, driver, linear_part, nonlinearity, integrator, experiment, output.
// Every field has a default; unknown keys are rejected.
#pragma once

#include "nalab/attractor.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nalab {

/// Validation or parse failure. `field` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field(std::move(field)) {}
    std::string field;
};

struct DomainConfig {
    std::string bc = "dirichlet";  ///< dirichlet | neumann | robin
    double alpha = 0.0;
    int N = 64;
    int M = 256;
};

/// Serialized as {kind, terms[], window_form, params, class_hint}.
/// trig_poly: terms are the signal, params.mean its mean.
/// geometric_limit_periodic: params.K, amp_ratio, freq_ratio.
/// synthetic_window: window_form.type is power or dip_train.
/// For the last two kinds, terms are an added zero-mean perturbation k(t).
struct DriverConfig {
    std::string kind = "trig_poly";
    std::vector<TrigTerm> terms{{0.5, 1.0, 0.0}};
    double mean = 0.0;
    int K = 6;
    double amp_ratio = 0.5;
    double freq_ratio = 0.25;
    std::string form = "none";  ///< none | power | dip_train
    PowerForm power;
    double period = 60.0;
    double half_width = 15.0;
    double depth0 = 6.0;
    double depth_growth = 1.0;
    int j_min = -80;
    int j_max = 80;
    double baseline = 0.2;
    double baseline_scale = 400.0;
    std::string class_hint;
};

struct LinearConfig {
    std::string mode = "homogeneous";  ///< homogeneous | perturbed
    double epsilon = 0.0;
    std::vector<TrigTerm> chi{{1.0, 1.4142135623730951, 0.3}};
};

struct ExperimentParams {
    std::string name = "lyapunov_zero";
    double offset = 0.0;
    double T = 1000.0;
    double dt_sample = 0.5;
    Window window;
    Thresholds thresholds;
    PullbackParams pullback{0.0, 5.0, 1e-6, 400};  ///< r = 0 means max(absorbing radius, 4)
    double anchor_every = 0.0;
    std::vector<double> offsets;
    std::vector<double> bounds{1.0, 2.0, 4.0, 8.0, 16.0};
    int sample_k = 3;
    double lambda1 = 0.2;
    double lambda2 = 0.9;
    int samples = 200;
    std::uint64_t seed = 1;
    int threads = 0;
};

struct OutputConfig {
    std::string directory = "runs";
    bool csv = true;
    bool svg = false;
};

struct ExperimentConfig {
    DomainConfig domain;
    DriverConfig driver;
    LinearConfig linear;
    Nonlinearity nonlinearity;
    IntegratorSettings integrator;
    ExperimentParams experiment;
    OutputConfig output;
};

/// Names accepted by experiment.name.
[[nodiscard]] const std::vector<std::string>& experiment_names();

[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);
/// Canonical text: every field, fixed key order, two-space indent, trailing newline.
/// parse_config(dump_config(c)) reproduces c and dump_config of it is byte-identical.
[[nodiscard]] std::string dump_config(const ExperimentConfig& config);
/// Range checks; throws ConfigError naming the field.
void validate(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical text.
[[nodiscard]] std::uint64_t fnv1a64(const std::string& bytes);
[[nodiscard]] std::uint64_t config_hash(const ExperimentConfig& config);
[[nodiscard]] std::string hex64(std::uint64_t v);

[[nodiscard]] Driver build_driver(const DriverConfig& d);
[[nodiscard]] ProblemSpec build_spec(const ExperimentConfig& config);
/// experiment.pullback with r resolved against the spec.
[[nodiscard]] PullbackParams resolved_pullback(const ExperimentConfig& config, const ProblemSpec& spec);

}  // namespace nalab
