#pragma once

#include <string>
#include <vector>

namespace mtsim {

/*
 * Resolved parameters of one CLI run. Defaults reproduce the headline
 * single-qubit device: E_J = 1 ueV at E_J/E_C = 200, junction tunneling
 * w = 3 ueV, sweet-spot chains with t = |Delta| = w_F = 12 ueV, white
 * charge noise alpha = 0.03 / ueV.
 *
 * Config files are flat `key = value` lines with `#` comments; every field
 * below is addressable by its exact name. t_hop and delta_abs follow w_f
 * unless set explicitly. Times are in the natural unit hbar/ueV.
 */
struct RunConfig {
    std::string experiment = "rabi";

    // device energies, ueV (n_g dimensionless)
    double e_c = 0.005;
    double e_j = 1.0;
    double n_g = 0.0;
    double w = 3.0;
    double w_f = 12.0;
    double mu = 0.0;
    double t_hop = 12.0;
    double delta_abs = 12.0;
    int length = 2;

    // grid cutoffs: charge grids are half-integer with twice_cutoff odd
    int twice_cutoff = 5;
    int leakage_twice_cutoff = 19;
    int bands_integer_cutoff = 60;

    // time window; t_end = 0 lets the experiment pick its natural window
    double t_end = 0.0;
    int n_points = 401;

    // white-noise strength, 1/ueV; 0 skips the noisy curve
    double alpha = 0.03;

    // convergence diagnostics in the manifest (cutoff reruns, RK4 halving)
    bool convergence_check = true;

    // bands
    int n_kappa = 101;

    // junction-spectrum
    int theta_points = 201;
    double theta_max_over_pi = 4.0;

    // gate
    double angle_over_pi = 0.5;
    double gate_amplitude = 3.0;

    // leakage: chains take t = |Delta| = w_f at each listed detuning mu
    std::string leakage_mu = "0,6,12";
    std::vector<double> leakage_mu_values;  // parsed form of leakage_mu
    int length_min = 2;
    int length_max = 12;
    int f_max = 12;
    double shell_threshold = 1e-6;
    int initial = 0;

    // two-qubit
    double w12 = 3.0;
    double two_qubit_theta_over_pi = 0.25;
    bool two_qubit_full = false;

    std::string out_dir = "out";
};

/*
 * Build a run configuration from defaults, an optional config file, and
 * CLI overrides, in that order of precedence. Throws ConfigError naming the
 * file line or key on any malformed or out-of-range entry. experiment and
 * out_override are skipped when empty.
 */
RunConfig make_run_config(const std::string& experiment, const std::string& config_path,
                          const std::vector<std::string>& overrides,
                          const std::string& out_override);

}  // namespace mtsim
