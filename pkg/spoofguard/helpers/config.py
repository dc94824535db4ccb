"""Centralized configuration module for managing constants used across the project.

These configurations aim to improve modularity and readability by consolidating settings
into a single location. Dataclass defaults and CLI flag defaults are read from here.
"""

# Audio.
PCM16_SCALE = 32768.0                   # PCM16 sample s maps to s / PCM16_SCALE.

# Front-end (Mel-spectrogram extraction).
N_FFT = 2048                            # FFT window size in samples.
HOP_LENGTH = 512                        # Samples between successive frames.
N_MELS = 128                            # Number of Mel bands.
FMIN_HZ = 0.0                           # Lowest filterbank frequency.
OUT_HEIGHT = 224                        # Rows of the resized feature map.
OUT_WIDTH = 224                         # Columns of the resized feature map.
DB_FLOOR = -80.0                        # Decibel clamp below the per-utterance peak.
POWER_EPS = 1e-10                       # Power floor before taking the logarithm.

# Network.
RESNET34_BLOCKS = (3, 4, 6, 3)          # Residual blocks per stage.
RESNET34_BASE_CHANNELS = 64             # Channels of the first stage.
RESNET34_INPUT_HW = 224                 # Spatial input size.
TINY_BLOCKS = (1, 1, 1, 1)
TINY_BASE_CHANNELS = 8
TINY_INPUT_HW = 64
NUM_CLASSES = 2                         # 0 = spoof, 1 = bonafide.
BN_EPS = 1e-5
BN_MOMENTUM = 0.1

# Optimizer and training run.
LEARNING_RATE = 1e-3                    # From-scratch default.
FINETUNE_LEARNING_RATE = 1e-6           # Fine-tuning preset for external weights.
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
EPOCHS = 8
BATCH_SIZE = 64
SEED = 0

# t-DCF cost model. These come from the ASVspoof 2019 evaluation plan, not from
# the countermeasure itself.
TDCF_PRIOR_TARGET = 0.9405
TDCF_PRIOR_NONTARGET = 0.0095
TDCF_PRIOR_SPOOF = 0.05
TDCF_CMISS_ASV = 1.0
TDCF_CFA_ASV = 10.0
TDCF_CMISS_CM = 1.0
TDCF_CFA_CM = 10.0

# Synthetic corpus.
SYNTH_SAMPLE_RATE_HZ = 16000
SYNTH_MIN_DURATION_S = 2.0
SYNTH_MAX_DURATION_S = 4.0
SYNTH_F0_RANGE_HZ = (100.0, 300.0)
SYNTH_HARMONICS = 8
SYNTH_NOISE_FLOOR_DB = -40.0            # Relative to the voiced signal RMS.
SYNTH_PEAK = 0.9                        # Peak level of every generated utterance.
REPLAY_BAND_HZ = (300.0, 3400.0)        # Loudspeaker/telephone band of the replay path.
REPLAY_FILTER_ORDER = 10
REPLAY_DECAY_S = 0.3                    # Time for the impulse response to fall 60 dB.
REPLAY_BITS = 12                        # Requantization depth of the replay recorder.
EVAL_REPLAY_DECAY_S = 0.6               # Unseen replay conditions of the eval split.
EVAL_REPLAY_BITS = 10
DEV_FRACTION = 0.4
SPEAKERS_PER_SPLIT = 10

# Files and directories.
TRAIN_PROTOCOL = "train.txt"
DEV_PROTOCOL = "dev.txt"
EVAL_PROTOCOL = "eval.txt"
WAV_FOLDER = "wav"
MELS_SUFFIX = ".mels"
PGM_SUFFIX = ".pgm"
RUN_LOG = "runs.log"                    # Append-only run manifests.

# Environment.
THREADS_ENV_VAR = "SPOOFGUARD_THREADS"
DEFAULT_MAX_WORKERS = 4

# Exit codes.
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
