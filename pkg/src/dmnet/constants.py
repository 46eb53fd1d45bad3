"""Recipe constants and default configurations."""

import math

SAMPLE_RATE = 16000
SPEED_OF_SOUND = 343.0  # m/s

# Data recipe ranges
SNR_RANGE_DB = (0.0, 20.0)
ROOM_LENGTH_RANGE_M = (5.0, 10.0)  # also width
ROOM_HEIGHT_RANGE_M = (2.0, 6.0)
RT60_RANGE_S = (0.3, 0.9)
CUTOFF_RANGE_HZ = (2000.0, 4000.0)
WALL_CLEARANCE_M = 0.3
DRY_ROOM_ABSORPTION = 0.99

# Speakers routed to the validation split
VALIDATION_SPEAKERS = frozenset({"p258", "p287"})

# Filter designs per family
BUTTERWORTH_ORDER = 8
BESSEL_ORDER = 8
CHEBYSHEV1_ORDER = 8
CHEBYSHEV1_RIPPLE_DB = 0.5
ELLIPTIC_ORDER = 6
ELLIPTIC_RIPPLE_DB = 0.5
ELLIPTIC_STOPBAND_DB = 50.0

# Room impulse responses
RIR_TRUNCATION_DB = 75.0
RT60_TOLERANCE = 0.2

# Mixing
ACTIVE_LEVEL_FRAME = 320  # 20 ms
ACTIVE_LEVEL_FLOOR_DB = 40.0
SNR_TOLERANCE_DB = 0.1
BANDWIDTH_TOLERANCE = 0.1

# Spectral defaults
DEFAULT_N_FFT = 400
DEFAULT_HOP = 100
DEFAULT_WIN_LENGTH = 400
DEFAULT_COMPRESS_EXPONENT = 0.3

# Model
LSIGMOID_BETA = 2.0
DEFAULT_OMEGA = 0.5
DEFAULT_ALPHA_INIT = 0.5

# Training
DEFAULT_LEARNING_RATE = 5e-4
DEFAULT_LOSS_WEIGHTS = {
    "magnitude": 0.9,
    "phase": 0.3,
    "complex": 0.1,
    "time": 0.2,
    "consistency": 0.1,
}
GRAD_CLIP_NORM = 5.0

# Metrics
LSD_N_FFT = 2048
LSD_HOP = 512
LSD_EPS = 1e-10
SI_SDR_CAP_DB = 60.0
TWO_PI = 2.0 * math.pi
