#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ldp/model.hpp"
#include "ldp/path.hpp"

namespace ldp {

inline constexpr const char* kLdpVersion = "0.1.0";

// Target path of an experiment: a CSV file, a named construction, or a
// straight line of given slope from the model's start point.
struct PhiSpec {
  enum class Kind { kFile, kFluid, kPoissonFloor, kLine };
  Kind kind = Kind::kFluid;
  std::string file;           // as written in the config (manifest copy)
  std::string resolved_file;  // joined with the config directory
  double slope = 0.0;
};

struct RateBlock {
  PhiSpec phi;
  double T = 1.0;
  double dt = 1e-3;
};

struct FluidBlock {
  double T = 1.0;
  double dt = 1e-3;
};

struct SimulateBlock {
  double n = 1.0;
  double T = 1.0;
  double dt = 1e-2;
  std::int64_t paths = 1;
};

struct EstimateBlock {
  PhiSpec phi;
  double n = 1.0;
  double T = 1.0;
  double dt = 1e-2;
  std::int64_t M = 1000;
  double delta = 0.25;
  double gamma = 0.5;  // filled with 2 * delta when the key is absent
  double lambda_cap = 50.0;
  std::string method = "tilted";
};

struct DiagnoseBlock {
  PhiSpec phi;  // defaults to the fluid limit
  double T = 1.0;
  double dt = 1e-2;
  std::vector<double> n_list{4.0, 16.0};
  std::int64_t M = 200;
  std::vector<double> c_grid{1.0, 2.0, 4.0};
  std::vector<double> window_grid{0.05, 0.1};
  double eta = 0.5;
  double delta = 0.25;  // probe tube radius for the degeneracy scan
  double gamma = 0.05;  // jump-size threshold for the degeneracy scan
  std::vector<double> levels{1.0, 2.0, 4.0, 8.0, 16.0};
};

struct LdpCheckBlock {
  PhiSpec phi;
  double T = 1.0;
  double dt = 1e-2;
  std::vector<double> n_list{16.0, 64.0, 256.0};
  std::int64_t M = 1000;
  double delta = 0.25;
  double gamma = 0.5;  // filled with 2 * delta when the key is absent
  double lambda_cap = 50.0;
  double crude_n = 0.0;  // > 0: also run the crude estimator at this n
  bool has_tube_rate = false;
  double tube_rate = 0.0;  // analytic tube infimum when known
};

struct ExperimentConfig {
  std::string command;  // rate | fluid | simulate | estimate | diagnose | ldp-check
  std::string model_name;
  std::map<std::string, double> model_params;
  bool has_x0 = false;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  int threads = 0;  // never recorded in the manifest

  RateBlock rate;
  FluidBlock fluid;
  SimulateBlock simulate;
  EstimateBlock estimate;
  DiagnoseBlock diagnose;
  LdpCheckBlock ldp_check;
};

// Strict parse: unknown keys anywhere are rejected, numeric ranges enforced,
// referenced files must exist.  `base_dir` anchors relative phi files.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& base_dir);
ExperimentConfig load_experiment_config(const std::string& file);

CoefficientModel build_config_model(const ExperimentConfig& cfg);
Path resolve_phi(const PhiSpec& spec, const CoefficientModel& m, double T,
                 double dt);

// Executes the configured command and writes manifest.json, results.json and
// the command's CSV sidecars into `outdir` (created if missing).  Outputs
// are bit-identical across thread counts for a fixed manifest.
void run_experiment(const ExperimentConfig& cfg, const std::string& outdir);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace ldp
