"""Constants and configuration values for the backscatter mode-selection toolkit.

This module centralizes all magic numbers, default values, and configuration
constants used throughout the application, including the bundled
``paper-sec4`` preset.
"""

# Action Encoding
ACTION_HARVEST = 0
ACTION_BACKSCATTER = 1

ACTION_NAMES = {
    ACTION_HARVEST: "harvest",
    ACTION_BACKSCATTER: "backscatter",
}

# Numerical Tolerances
STOCHASTIC_TOLERANCE = 1e-12  # row-sum tolerance for transition kernels
STATIONARY_TOLERANCE = 1e-10  # residual bound for stationary distributions
POWER_ITERATION_CAP = 100_000
BRUTE_FORCE_MAX_STATES = 12

# Solver Defaults
DEFAULT_GAMMA = 0.9
DEFAULT_THETA = 1e-9  # bits, discounted units
DEFAULT_MAX_ITERATIONS = 100_000

# Q-learning Defaults
DEFAULT_ALPHA = 0.1
DEFAULT_EPS0 = 0.2
DEFAULT_MAX_STEPS = 100_000
DEFAULT_QL_SEED = 7

# Simulation Defaults
DEFAULT_N_SLOTS = 10_000
DEFAULT_WINDOW = 1_000  # slots per rolling-average window
DEFAULT_E_INITIAL = 0  # battery units
DEFAULT_SIM_SEED = 2024
DEFAULT_CURVE_STRIDE = 100  # keep every n-th rolling-average point in CSVs
DEFAULT_SWEEP_POWERS = [1.0, 1.5, 2.0, 2.5]  # watts
DEFAULT_STUDY_H_VALUES = [2e-5, 5e-5]

# Detector Defaults
DEFAULT_DETECTOR_BITS = 100_000
DEFAULT_DETECTOR_SEED = 11
DEFAULT_CHUNK_SAMPLES = 2 ** 20  # complex samples generated per block
MIN_DETECTOR_BITS = 1_000
AMBIENT_GAUSSIAN = "gaussian"
AMBIENT_CONSTANT = "constant"
AMBIENT_MODELS = (AMBIENT_GAUSSIAN, AMBIENT_CONSTANT)

# Methods
METHOD_VI = "vi"
METHOD_QL = "ql"
METHOD_GREEDY = "greedy"
METHODS = (METHOD_VI, METHOD_QL, METHOD_GREEDY)

# Random Streams
GENERATOR_NAME = "PCG64"
STREAM_SCHEME_VERSION = 1
STREAM_CHANNEL = 0
STREAM_TRAINING = 1
STREAM_DETECTOR = 2

# Logging Configuration
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Environment Variables
ENV_LOG_LEVEL = "BACKSCATTER_LOG_LEVEL"
ENV_OUTPUT_DIR = "BACKSCATTER_OUTPUT_DIR"

# Output Configuration
DEFAULT_OUTPUT_DIR = "results"
MANIFEST_FILE = "manifest.yaml"
FLOAT_FORMAT = ".15g"  # at least 12 significant digits in every CSV

CSV_POLICY = ["state_index", "battery_units", "gain_index", "value", "action"]
CSV_QTABLE = [
    "state_index", "battery_units", "gain_index",
    "q_harvest", "q_backscatter", "chosen_action",
]
CSV_LEARNING_CURVE = ["step", "rolling_avg_bits"]
CSV_SWEEP = ["p_t", "method", "mean_throughput_bits_per_slot"]
CSV_SWEEP_ANALYTIC = ["p_t", "method", "long_run_average_bits_per_slot"]
CSV_BATTERY_HIST = ["method", "level", "probability"]
CSV_TRACE = ["slot", "gain_index", "battery_units", "action", "rate_bits"]
CSV_SUMMARY = [
    "method", "mean_throughput_bits_per_slot", "harvest_slots",
    "backscatter_slots", "long_run_average_bits_per_slot",
]
CSV_REPORT = ["metric", "value"]
CSV_DETECTOR = [
    "g", "h", "p_t", "mu", "n_s", "bits", "ber_mc", "stderr",
    "ber_formula", "z_mean_0", "z_mean_1",
]

# Presets
PRESET_DEFAULT = "paper-sec4"

DEFAULT_CHANNEL_MATRIX = [
    [0.40, 0.30, 0.15, 0.10, 0.05],
    [0.05, 0.40, 0.30, 0.15, 0.10],
    [0.10, 0.05, 0.40, 0.30, 0.15],
    [0.15, 0.10, 0.05, 0.40, 0.30],
    [0.30, 0.15, 0.10, 0.05, 0.40],
]

# mu, n_s and delta1_sq are not given numerically in the reference
# setup; absolute throughput numbers depend on these three.
DEFAULT_SETUP = {
    "system": {
        "eta": 0.8,
        "p_t": 2.0,
        "t0": 1.0,
        "r_b": 1e4,
        "mu": 0.5,
        "n_s": 100,
        "delta0_sq": 1e-10,
        "delta1_sq": 1e-10,
        "h": 5e-5,
        "gains": [1.5e-5, 3e-5, 4.5e-5, 6e-5, 7.5e-5],
        "e0": None,
        "b_c": 9,
        "j_cost": 1,
        "k_cost": 3,
        "gamma": DEFAULT_GAMMA,
        "backscatter_pays_j": True,
    },
    "channel": {"matrix": DEFAULT_CHANNEL_MATRIX},
    "solver": {
        "gamma": None,  # inherits system.gamma
        "theta": DEFAULT_THETA,
        "max_iterations": DEFAULT_MAX_ITERATIONS,
    },
    "ql": {
        "alpha": DEFAULT_ALPHA,
        "eps0": DEFAULT_EPS0,
        "max_steps": DEFAULT_MAX_STEPS,
        "gamma": None,
        "seed": DEFAULT_QL_SEED,
    },
    "sim": {
        "n_slots": DEFAULT_N_SLOTS,
        "window": DEFAULT_WINDOW,
        "e_initial": DEFAULT_E_INITIAL,
        "initial_gain": None,
        "seed": DEFAULT_SIM_SEED,
        "curve_stride": DEFAULT_CURVE_STRIDE,
    },
    "sweep": {
        "powers": DEFAULT_SWEEP_POWERS,
        "methods": list(METHODS),
        "workers": 1,
    },
    "detector": {
        "bits": DEFAULT_DETECTOR_BITS,
        "gain_values": None,
        "ambient": AMBIENT_GAUSSIAN,
        "tag_phase": 0.0,
        "chunk_samples": DEFAULT_CHUNK_SAMPLES,
        "seed": DEFAULT_DETECTOR_SEED,
    },
    "battery_study": {
        "h_values": DEFAULT_STUDY_H_VALUES,
        "methods": list(METHODS),
    },
    "output": DEFAULT_OUTPUT_DIR,
}

PRESETS = {PRESET_DEFAULT: DEFAULT_SETUP}
