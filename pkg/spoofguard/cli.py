"""Command-line front end: synth -> featurize -> train -> score -> evaluate.

Example usage:
    python3 main.py synth --seed 7 --bonafide 50 --spoof 50 --out corpus
    python3 main.py featurize --protocol corpus/train.txt corpus/dev.txt --out feats
    python3 main.py train --protocol corpus/train.txt --features feats --weights model.sgw
    python3 main.py score --protocol corpus/dev.txt --features feats --weights model.sgw --out dev.scores
    python3 main.py evaluate --protocol corpus/dev.txt --scores dev.scores

Every subcommand accepts `--config <file>` with `key=value` lines named after its
flags; flags given on the command line win over the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Callable

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from spoofguard import __version__
from spoofguard.audio import read_wav
from spoofguard.data.corpus import build_corpus, corpus_outputs
from spoofguard.data.protocol import Trial, label_counts, parse_protocol
from spoofguard.data.scores import (
    MISSING_POLICIES,
    fuse_scores,
    join_scores,
    read_asv_scores,
    read_scores,
    write_scores,
)
from spoofguard.data.synth import SynthConfig
from spoofguard.errors import ConfigurationError, DatasetError, ShapeMismatchError, SpoofGuardError
from spoofguard.features.extraction import extract_mel_spectrogram
from spoofguard.features.image import export_pgm
from spoofguard.features.mels_file import load_mels, save_mels
from spoofguard.features.types import FrontEndConfig, MelSpectrogram
from spoofguard.helpers import config
from spoofguard.helpers.file_utils import (
    read_file,
    read_key_value_file,
    remove_partial_outputs,
    write_on_run_log,
    write_text_atomic,
)
from spoofguard.helpers.general_utils import create_output_directory, resolve_max_workers
from spoofguard.helpers.managers.live_manager import initialize_managers
from spoofguard.metrics import (
    TdcfCosts,
    TdcfParameters,
    asv_error_rates,
    det_curve,
    format_det_points,
    format_report,
    parse_report,
    pearson_correlation,
    per_attack_breakdown,
    summarize,
)
from spoofguard.neuralnet.model import (
    PRESETS,
    NetworkConfig,
    ResNet,
    build_network,
    score_batch,
    spectrogram_input,
)
from spoofguard.neuralnet.optim import AdamState
from spoofguard.neuralnet.training import (
    BONAFIDE_LABEL,
    SPOOF_LABEL,
    FeatureDataset,
    TrainRunConfig,
    train,
)
from spoofguard.neuralnet.weights import load_weights, save_weights

if TYPE_CHECKING:
    from spoofguard.helpers.managers.live_manager import LiveManager

TRUE_VALUES = ("1", "true", "yes", "on")
FALSE_VALUES = ("0", "false", "no", "off")


@dataclass
class RunContext:
    """What a command read and wrote; outputs are removed again if the command fails."""

    args: argparse.Namespace
    live_manager: LiveManager | None = None
    inputs: list[Path] = field(default_factory=list)
    outputs: list[Path] = field(default_factory=list)
    manifest_dir: Path | None = None

    def log(self, event: str, details: str) -> None:
        """Report an event on the live display when there is one."""
        logging.info("%s: %s", event, details)
        if self.live_manager is not None:
            self.live_manager.update_log(event, details)

    def fail(self, details: str) -> None:
        """Report a failure; the live display shows it as an error row."""
        logging.error(details)
        if self.live_manager is not None:
            self.live_manager.update_log("Error", details, level="error")


@dataclass(frozen=True)
class RunManifest:
    """One append-only record per command run."""

    command: str
    configuration: dict[str, str]
    seed: int | None
    inputs: list[str]
    outputs: list[str]
    version: str
    duration_s: float
    status: str


# Argument parsing


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="File of key=value flag settings.")
    parser.add_argument(
        "--no-live",
        dest="live",
        action="store_false",
        help="Disable the live progress display.",
    )


def _add_front_end_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-fft", type=int, default=config.N_FFT, help="FFT window size.")
    parser.add_argument("--hop", type=int, default=config.HOP_LENGTH, help="Hop length in samples.")
    parser.add_argument("--n-mels", type=int, default=config.N_MELS, help="Number of Mel bands.")
    parser.add_argument("--fmin", type=float, default=config.FMIN_HZ, help="Lowest band edge in Hz.")
    parser.add_argument("--fmax", type=float, default=None, help="Highest band edge in Hz (Nyquist if unset).")
    parser.add_argument("--height", type=int, default=config.OUT_HEIGHT, help="Rows of the resized grid.")
    parser.add_argument("--width", type=int, default=config.OUT_WIDTH, help="Columns of the resized grid.")
    parser.add_argument("--db-floor", type=float, default=config.DB_FLOOR, help="dB floor below the peak.")
    parser.add_argument("--pgm", action="store_true", help="Also export grayscale PGM images.")


def _add_subcommand(
    subparsers: argparse._SubParsersAction,
    name: str,
    description: str,
) -> argparse.ArgumentParser:
    subparser = subparsers.add_parser(
        name,
        help=description,
        description=description,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _add_common_arguments(subparser)
    return subparser


def setup_parser() -> argparse.ArgumentParser:
    """Set up and return the argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="spoofguard",
        description="Audio anti-spoofing: features, residual CNN training and EER/t-DCF scoring.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")

    synth = _add_subcommand(subparsers, "synth", "Generate the synthetic bona fide / replay corpus.")
    synth.add_argument("--out", type=Path, required=True, help="Corpus output directory.")
    synth.add_argument("--seed", type=int, default=config.SEED, help="Corpus seed.")
    synth.add_argument("--bonafide", type=int, default=50, help="Bona fide utterances (train + dev).")
    synth.add_argument("--spoof", type=int, default=50, help="Spoofed utterances (train + dev).")
    synth.add_argument("--dev-fraction", type=float, default=config.DEV_FRACTION, help="Share of each class in dev.")
    synth.add_argument("--sample-rate", type=int, default=config.SYNTH_SAMPLE_RATE_HZ, help="Sample rate in Hz.")
    synth.add_argument("--min-duration", type=float, default=config.SYNTH_MIN_DURATION_S, help="Shortest utterance (s).")
    synth.add_argument("--max-duration", type=float, default=config.SYNTH_MAX_DURATION_S, help="Longest utterance (s).")
    synth.add_argument("--decay", type=float, default=config.REPLAY_DECAY_S, help="Replay room decay time (s).")
    synth.add_argument("--bits", type=int, default=config.REPLAY_BITS, help="Replay requantization bits.")
    synth.add_argument("--eval-bonafide", type=int, default=0, help="Bona fide utterances of the eval split.")
    synth.add_argument("--eval-spoof", type=int, default=0, help="Spoofed utterances of the eval split.")
    synth.add_argument("--eval-decay", type=float, default=config.EVAL_REPLAY_DECAY_S, help="Eval replay decay (s).")
    synth.add_argument("--eval-bits", type=int, default=config.EVAL_REPLAY_BITS, help="Eval replay bits.")

    featurize = _add_subcommand(subparsers, "featurize", "Extract MELS feature files for protocol utterances.")
    featurize.add_argument("--protocol", type=Path, nargs="+", required=True, help="Protocol file(s).")
    featurize.add_argument("--audio-dir", type=Path, default=None, help="WAV directory (default: <protocol dir>/wav).")
    featurize.add_argument("--out", type=Path, required=True, help="Feature output directory.")
    _add_front_end_arguments(featurize)

    train_parser = _add_subcommand(subparsers, "train", "Train the residual CNN classifier.")
    train_parser.add_argument("--protocol", type=Path, required=True, help="Training protocol.")
    train_parser.add_argument("--features", type=Path, required=True, help="Feature directory.")
    train_parser.add_argument("--weights", type=Path, required=True, help="Output SGW1 weight file.")
    train_parser.add_argument("--dev-protocol", type=Path, default=None, help="Protocol validated after each epoch.")
    train_parser.add_argument("--preset", choices=sorted(PRESETS), default="resnet34", help="Network preset.")
    train_parser.add_argument("--in-channels", type=int, choices=(1, 3), default=1, help="Input planes.")
    train_parser.add_argument("--epochs", type=int, default=config.EPOCHS, help="Training epochs.")
    train_parser.add_argument("--batch", type=int, default=config.BATCH_SIZE, help="Mini-batch size.")
    train_parser.add_argument("--lr", type=float, default=None, help="Learning rate (1e-3, or 1e-6 with --finetune).")
    train_parser.add_argument("--seed", type=int, default=config.SEED, help="Initialization and shuffling seed.")
    train_parser.add_argument("--init-weights", type=Path, default=None, help="SGW1 weights to start from.")
    train_parser.add_argument("--finetune", action="store_true", help="Use the fine-tuning learning rate.")
    train_parser.add_argument("--freeze-backbone", action="store_true", help="Train the classifier layer only.")

    score = _add_subcommand(subparsers, "score", "Score protocol utterances with trained weights.")
    score.add_argument("--protocol", type=Path, required=True, help="Protocol to score.")
    score.add_argument("--features", type=Path, required=True, help="Feature directory.")
    score.add_argument("--weights", type=Path, required=True, help="SGW1 weight file.")
    score.add_argument("--out", type=Path, required=True, help="Output score file.")
    score.add_argument("--preset", choices=sorted(PRESETS), default=None, help="Expected preset (checked).")
    score.add_argument("--batch", type=int, default=config.BATCH_SIZE, help="Scoring batch size.")

    evaluate = _add_subcommand(subparsers, "evaluate", "Compute EER and min t-DCF of a score file.")
    evaluate.add_argument("--protocol", type=Path, required=True, help="Protocol with the trial keys.")
    evaluate.add_argument("--scores", type=Path, required=True, help="Score file.")
    evaluate.add_argument("--out", type=Path, default=None, help="Also write the report here.")
    evaluate.add_argument("--missing", choices=MISSING_POLICIES, default="error", help="Trials without a score.")
    evaluate.add_argument("--c1", type=float, default=None, help="t-DCF C1 (needs --c2).")
    evaluate.add_argument("--c2", type=float, default=None, help="t-DCF C2 (needs --c1).")
    evaluate.add_argument("--asv-scores", type=Path, default=None, help="ASV scores deriving C1/C2.")
    evaluate.add_argument("--pmiss-asv", type=float, default=0.0, help="ASV miss rate.")
    evaluate.add_argument("--pfa-asv", type=float, default=0.0, help="ASV false alarm rate.")
    evaluate.add_argument("--pmiss-spoof-asv", type=float, default=0.0, help="ASV miss rate on spoofs.")
    evaluate.add_argument("--per-attack", action="store_true", help="Add one line per attack.")
    evaluate.add_argument("--det-out", type=Path, default=None, help="Write raw DET operating points.")

    fuse = _add_subcommand(subparsers, "fuse", "Average the scores of several systems.")
    fuse.add_argument("--scores", type=Path, nargs="+", required=True, help="Score files to fuse.")
    fuse.add_argument("--out", type=Path, required=True, help="Fused score file.")

    correlate = _add_subcommand(subparsers, "correlate", "Correlate EER and min t-DCF across reports.")
    correlate.add_argument("--reports", type=Path, nargs="+", required=True, help="Evaluation reports.")

    return parser


def _subparsers(parser: argparse.ArgumentParser) -> dict[str, argparse.ArgumentParser]:
    for action in parser._actions:  # noqa: SLF001
        if isinstance(action, argparse._SubParsersAction):  # noqa: SLF001
            return dict(action.choices)
    return {}


def _convert_setting(action: argparse.Action, key: str, raw: str) -> object:
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):  # noqa: SLF001
        lowered = raw.lower()
        if lowered not in TRUE_VALUES + FALSE_VALUES:
            message = f"expected a boolean for {key}, got {raw!r}"
            raise ConfigurationError(message)
        enabled = lowered in TRUE_VALUES
        # `no_live=true` names the flag, `live=false` names the stored value.
        return enabled if key == action.dest else not enabled

    convert = action.type or str
    values = [convert(item) for item in raw.split()] if action.nargs in ("+", "*") else convert(raw)
    if action.choices is not None and values not in action.choices:
        message = f"{action.dest}={raw!r} is not one of {sorted(action.choices)}"
        raise ConfigurationError(message)
    return values


def _apply_config_file(subparser: argparse.ArgumentParser, config_path: Path) -> None:
    """Turn a key=value file into subparser defaults; flags on the command line still win."""
    actions = {action.dest: action for action in subparser._actions}  # noqa: SLF001
    settings = read_key_value_file(config_path)
    defaults = {}
    for key, raw in settings.items():
        # `--no-live` stores into `live`.
        action = actions.get(key) or actions.get(key.removeprefix("no_"))
        if action is None or key in ("config", "help"):
            message = f"{config_path}: unknown setting {key!r}"
            raise ConfigurationError(message)
        try:
            defaults[action.dest] = _convert_setting(action, key, raw)
        except ValueError as error:
            message = f"{config_path}: bad value for {key!r} ({error})"
            raise ConfigurationError(message) from error
        action.required = False

    subparser.set_defaults(**defaults)


def parse_arguments(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Parse flags, folding in a `--config` file when one is given."""
    subparsers = _subparsers(parser)
    command = next((token for token in argv if token in subparsers), None)
    if command is not None and "--config" in argv:
        pre_parser = argparse.ArgumentParser(add_help=False)
        pre_parser.add_argument("--config", type=Path)
        known, _ = pre_parser.parse_known_args(argv)
        try:
            _apply_config_file(subparsers[command], known.config)
        except (ConfigurationError, OSError, ValueError) as error:
            subparsers[command].error(str(error))

    return parser.parse_args(argv)


def setup_logging(level: int = logging.INFO) -> None:
    """Route diagnostics through a rich handler on stderr."""
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


# Shared helpers


def _feature_path(feature_dir: Path, utt_id: str) -> Path:
    return feature_dir / f"{utt_id}{config.MELS_SUFFIX}"


def _run_parallel(function: Callable, items: list, ctx: RunContext, label: str) -> list:
    """Map `function` over items with a thread pool, results in input order."""
    if ctx.live_manager is not None:
        ctx.live_manager.start_stage(label, len(items))
    results = []
    with ThreadPoolExecutor(max_workers=resolve_max_workers()) as executor:
        for result in executor.map(function, items):
            results.append(result)
            if ctx.live_manager is not None:
                ctx.live_manager.advance_stage()

    return results


def load_protocol_features(trials: list[Trial], feature_dir: Path, ctx: RunContext) -> list[MelSpectrogram]:
    """MELS features of every trial, in protocol order."""
    missing = [trial.utt_id for trial in trials if not _feature_path(feature_dir, trial.utt_id).is_file()]
    if missing:
        message = f"{len(missing)} protocol trials have no features in {feature_dir}, first {missing[0]!r}"
        raise DatasetError(message)

    return _run_parallel(lambda trial: load_mels(_feature_path(feature_dir, trial.utt_id)), trials, ctx, "Loading")


def _check_input_size(spectrograms: list[MelSpectrogram], network: NetworkConfig) -> None:
    expected = (network.input_hw, network.input_hw)
    for spectrogram in spectrograms:
        if spectrogram.shape != expected:
            message = (
                f"features of {spectrogram.source_id!r} are {spectrogram.shape}, the {network.preset} "
                f"network expects {expected}; featurize with --height/--width {network.input_hw}"
            )
            raise ShapeMismatchError(message)


def build_dataset(
    trials: list[Trial],
    feature_dir: Path,
    network: NetworkConfig,
    ctx: RunContext,
) -> FeatureDataset:
    """Network-ready inputs and labels for a protocol."""
    spectrograms = load_protocol_features(trials, feature_dir, ctx)
    _check_input_size(spectrograms, network)
    labels = np.array([BONAFIDE_LABEL if t.is_bonafide else SPOOF_LABEL for t in trials], dtype=np.int64)
    return FeatureDataset(spectrogram_input(spectrograms, network.in_channels), labels)


# Commands


def cmd_synth(ctx: RunContext) -> None:
    """Write the synthetic corpus."""
    args = ctx.args
    ctx.manifest_dir = create_output_directory(args.out)
    cfg = SynthConfig(
        seed=args.seed,
        n_bonafide=args.bonafide,
        n_spoof=args.spoof,
        sample_rate_hz=args.sample_rate,
        min_duration_s=args.min_duration,
        max_duration_s=args.max_duration,
        replay_decay_s=args.decay,
        replay_bits=args.bits,
        dev_fraction=args.dev_fraction,
        n_eval_bonafide=args.eval_bonafide,
        n_eval_spoof=args.eval_spoof,
        eval_replay_decay_s=args.eval_decay,
        eval_replay_bits=args.eval_bits,
    )
    ctx.outputs.extend(corpus_outputs(cfg, args.out))

    protocols = build_corpus(cfg, args.out, ctx.live_manager)
    for split, trials in protocols.items():
        counts = label_counts(trials)
        ctx.log("Split written", f"{split}: {counts['bonafide']} bonafide / {counts['spoof']} spoof")


def _front_end_config(args: argparse.Namespace) -> FrontEndConfig:
    return FrontEndConfig(
        n_fft=args.n_fft,
        hop=args.hop,
        n_mels=args.n_mels,
        fmin_hz=args.fmin,
        fmax_hz=args.fmax,
        out_height=args.height,
        out_width=args.width,
        db_floor=args.db_floor,
    )


def cmd_featurize(ctx: RunContext) -> None:
    """Write one MELS file (and optionally a PGM image) per protocol utterance."""
    args = ctx.args
    out_dir = create_output_directory(args.out)
    ctx.manifest_dir = out_dir
    cfg = _front_end_config(args)

    jobs = []
    for protocol_path in args.protocol:
        ctx.inputs.append(protocol_path)
        audio_dir = args.audio_dir or protocol_path.parent / config.WAV_FOLDER
        jobs.extend((trial, audio_dir / f"{trial.utt_id}.wav") for trial in parse_protocol(protocol_path))

    for trial, _ in jobs:
        ctx.outputs.append(_feature_path(out_dir, trial.utt_id))
        if args.pgm:
            ctx.outputs.append(out_dir / f"{trial.utt_id}{config.PGM_SUFFIX}")

    def featurize_one(job: tuple[Trial, Path]) -> None:
        trial, wav_path = job
        spectrogram = extract_mel_spectrogram(read_wav(wav_path), cfg)
        save_mels(spectrogram, _feature_path(out_dir, trial.utt_id))
        if args.pgm:
            export_pgm(spectrogram, out_dir / f"{trial.utt_id}{config.PGM_SUFFIX}")

    _run_parallel(featurize_one, jobs, ctx, "Extracting")
    ctx.log("Features written", f"{len(jobs)} utterances at {cfg.out_height}x{cfg.out_width} in {out_dir}")


def _loss_log_path(weights_path: Path) -> Path:
    return weights_path.with_name(weights_path.name + ".losses")


def cmd_train(ctx: RunContext) -> None:
    """Train a network and write its weights plus the per-epoch loss log."""
    args = ctx.args
    weights_path = args.weights
    ctx.manifest_dir = create_output_directory(weights_path.parent)
    network = NetworkConfig.from_preset(args.preset, args.in_channels)
    ctx.inputs.extend([args.protocol, args.features])
    ctx.outputs.extend([weights_path, _loss_log_path(weights_path)])

    trials = parse_protocol(args.protocol)
    dataset = build_dataset(trials, args.features, network, ctx)
    dev_dataset = None
    if args.dev_protocol is not None:
        ctx.inputs.append(args.dev_protocol)
        dev_dataset = build_dataset(parse_protocol(args.dev_protocol), args.features, network, ctx)

    if args.init_weights is not None:
        ctx.inputs.append(args.init_weights)
        model = load_weights(args.init_weights, network)
        ctx.log("Weights loaded", f"starting from {args.init_weights}")
    else:
        model = build_network(network, seed=args.seed)
    if args.freeze_backbone:
        model.freeze_backbone()

    optimizer = AdamState.finetune() if args.finetune else AdamState()
    if args.lr is not None:
        optimizer = AdamState(lr=args.lr)

    counts = label_counts(trials)
    ctx.log(
        "Training started",
        f"{args.preset}, {counts['bonafide']} bonafide / {counts['spoof']} spoof, "
        f"epochs={args.epochs} batch={args.batch} lr={optimizer.lr:g}",
    )
    run = TrainRunConfig(epochs=args.epochs, batch_size=args.batch, seed=args.seed, checkpoint_path=weights_path)
    model, history = train(model, dataset, run, optimizer, dev_dataset, ctx.live_manager)
    save_weights(model, weights_path)

    lines = []
    for epoch, loss in enumerate(history.losses, start=1):
        line = f"epoch={epoch} loss={loss:.6f}"
        if history.dev_eers:
            line += f" dev_eer={100 * history.dev_eers[epoch - 1]:.4f}"
        lines.append(line + "\n")
    write_text_atomic(_loss_log_path(weights_path), "".join(lines))


def score_trials(
    model: ResNet,
    trials: list[Trial],
    features: Path,
    batch: int,
    ctx: RunContext,
) -> list[tuple[str, float]]:
    """Detection score of every trial, in protocol order."""
    spectrograms = load_protocol_features(trials, features, ctx)
    _check_input_size(spectrograms, model.config)
    inputs = spectrogram_input(spectrograms, model.config.in_channels)
    scores = np.concatenate(
        [score_batch(model, inputs[start:start + batch]) for start in range(0, len(trials), batch)],
    )
    return [(trial.utt_id, float(score)) for trial, score in zip(trials, scores)]


def cmd_score(ctx: RunContext) -> None:
    """Write `<utt_id> <score>` for every protocol utterance."""
    args = ctx.args
    ctx.manifest_dir = create_output_directory(args.out.parent)
    if args.batch < 1:
        message = f"--batch must be positive, got {args.batch}"
        raise ConfigurationError(message)

    ctx.inputs.extend([args.protocol, args.features, args.weights])
    ctx.outputs.append(args.out)

    model = load_weights(args.weights)
    if args.preset is not None and model.config.preset != args.preset:
        message = f"{args.weights} holds a {model.config.preset} network, not {args.preset}"
        raise ConfigurationError(message)

    trials = parse_protocol(args.protocol)
    if not trials:
        message = f"{args.protocol} has no trials"
        raise DatasetError(message)

    write_scores(score_trials(model, trials, args.features, args.batch, ctx), args.out)
    ctx.log("Scores written", f"{len(trials)} trials to {args.out}")


def resolve_costs(args: argparse.Namespace) -> TdcfCosts:
    """C1/C2 from explicit values, external ASV scores or ASV error-rate flags."""
    if (args.c1 is None) != (args.c2 is None):
        message = "--c1 and --c2 must be given together"
        raise ConfigurationError(message)
    if args.c1 is not None:
        return TdcfCosts(args.c1, args.c2)

    if args.asv_scores is not None:
        asv = read_asv_scores(args.asv_scores)
        pmiss, pfa, pmiss_spoof = asv_error_rates(asv["target"], asv["nontarget"], asv["spoof"])
        return TdcfCosts.from_parameters(TdcfParameters(pmiss_asv=pmiss, pfa_asv=pfa, pmiss_spoof_asv=pmiss_spoof))

    return TdcfCosts.from_parameters(
        TdcfParameters(
            pmiss_asv=args.pmiss_asv,
            pfa_asv=args.pfa_asv,
            pmiss_spoof_asv=args.pmiss_spoof_asv,
        ),
    )


def cmd_evaluate(ctx: RunContext) -> None:
    """Print (and optionally write) the EER / min t-DCF report."""
    args = ctx.args
    ctx.manifest_dir = create_output_directory(args.out.parent) if args.out else args.scores.parent
    ctx.inputs.extend([args.protocol, args.scores])
    ctx.outputs.extend(path for path in (args.out, args.det_out) if path is not None)

    joined = join_scores(parse_protocol(args.protocol), read_scores(args.scores), args.missing)
    costs = resolve_costs(args)
    score_set = joined.score_set
    summary = summarize(score_set, costs)
    per_attack = None
    if args.per_attack:
        per_attack = per_attack_breakdown(score_set.bonafide_scores, joined.spoof_scores_by_attack(), costs)

    report = format_report(summary, per_attack)
    if args.out is not None:
        write_text_atomic(args.out, report)
    if args.det_out is not None:
        write_text_atomic(args.det_out, format_det_points(det_curve(score_set)))

    sys.stdout.write(report)
    ctx.log("Evaluation", f"EER {100 * summary.eer:.4f}%, min t-DCF {summary.min_tdcf:.6f}")


def cmd_fuse(ctx: RunContext) -> None:
    """Average several score files into one."""
    args = ctx.args
    ctx.manifest_dir = create_output_directory(args.out.parent)
    ctx.inputs.extend(args.scores)
    ctx.outputs.append(args.out)

    fused = fuse_scores([read_scores(path) for path in args.scores])
    write_scores(fused, args.out)
    ctx.log("Scores fused", f"{len(args.scores)} systems, {len(fused)} trials")


def cmd_correlate(ctx: RunContext) -> None:
    """Print the Pearson correlation between EER and min t-DCF over several reports."""
    args = ctx.args
    ctx.manifest_dir = args.reports[0].parent
    ctx.inputs.extend(args.reports)

    eers, tdcfs = [], []
    for path in args.reports:
        values = parse_report("\n".join(read_file(path)), source=str(path))
        if "eer" not in values or "min_tdcf" not in values:
            message = f"{path} is not an evaluation report"
            raise ConfigurationError(message)
        eers.append(values["eer"])
        tdcfs.append(values["min_tdcf"])

    correlation = pearson_correlation(eers, tdcfs)
    sys.stdout.write(f"reports={len(args.reports)}\npearson={correlation:.6f}\n")


COMMANDS: dict[str, tuple[Callable[[RunContext], None], str, str]] = {
    "synth": (cmd_synth, "Synthesis", "Utterance"),
    "featurize": (cmd_featurize, "Features", "Utterance"),
    "train": (cmd_train, "Training", "Epoch"),
    "score": (cmd_score, "Scoring", "Utterance"),
    "evaluate": (cmd_evaluate, "Evaluation", "Report"),
    "fuse": (cmd_fuse, "Fusion", "File"),
    "correlate": (cmd_correlate, "Correlation", "Report"),
}


def _write_manifest(ctx: RunContext, duration_s: float, status: str) -> None:
    if ctx.manifest_dir is None or not ctx.manifest_dir.is_dir():
        return

    args = vars(ctx.args)
    manifest = RunManifest(
        command=args["command"],
        configuration={key: str(value) for key, value in sorted(args.items()) if key != "command"},
        seed=args.get("seed"),
        inputs=[str(path) for path in ctx.inputs],
        outputs=[str(path) for path in ctx.outputs] if status == "ok" else [],
        version=__version__,
        duration_s=round(duration_s, 3),
        status=status,
    )
    write_on_run_log(ctx.manifest_dir, asdict(manifest))


def run_command(args: argparse.Namespace) -> int:
    """Run a parsed command; returns the process exit code."""
    function, stage_name, unit_name = COMMANDS[args.command]
    live_manager = initialize_managers(stage_name, unit_name) if args.live else None
    ctx = RunContext(args=args, live_manager=live_manager)
    start = time.time()
    status = "failed"

    with live_manager.live if live_manager else nullcontext():
        try:
            function(ctx)
            status = "ok"
        except (SpoofGuardError, OSError) as error:
            ctx.fail(f"{args.command} failed: {error}")
        except KeyboardInterrupt:
            ctx.fail(f"{args.command} interrupted")

        if live_manager is not None:
            live_manager.stop(status)

    if status != "ok":
        remove_partial_outputs(ctx.outputs)
    _write_manifest(ctx, time.time() - start, status)
    return config.EXIT_OK if status == "ok" else config.EXIT_FAILURE


def main(argv: list[str] | None = None) -> int:
    """Parse the command line and run the requested command."""
    parser = setup_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_arguments(parser, argv)
    except SystemExit as exit_request:
        return config.EXIT_OK if exit_request.code in (0, None) else config.EXIT_USAGE

    setup_logging()
    return run_command(args)


if __name__ == "__main__":
    sys.exit(main())
