"""spoofguard: detect replayed and synthesized speech from Mel-spectrograms.

Modules:
    - audio: WAV decoding and encoding into mono buffers.
    - features: the Mel-spectrogram front-end and the MELS file format.
    - neuralnet: autograd tensors, the residual CNN, Adam and training.
    - metrics: DET curves, EER and the tandem detection cost function.
    - data: trial protocols, score files and the synthetic corpus.
    - cli: the command-line workflow.
"""

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "audio",
    "cli",
    "data",
    "errors",
    "features",
    "helpers",
    "metrics",
    "neuralnet",
]
