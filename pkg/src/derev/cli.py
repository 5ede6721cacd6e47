"""Command-line front end.

Subcommands: ``dereverb`` (full pipeline on one file), ``simulate``
(image-method RIRs and reverberant test material), ``evaluate`` (quality
metrics against a clean reference) and ``benchmark`` (corpus sweep over
reverberation times; room conditions are local defaults, not calibrated
against any external benchmark).
"""

import argparse
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from .audio import PIPELINE_RATE, AudioSignal, apply_rir, read_wav, write_wav
from .cnmf import SolverConfig
from .errors import (
    DerevError,
    InvalidGeometryError,
    NumericalFailureError,
    SampleRateMismatchError,
)
from .metrics import evaluate_pair
from .reconstruct import METHODS, reconstruct
from .rir import RoomSpec, image_method_rir
from .solver import dump_cost_history, run
from .stft import StftConfig, analyze, dump_spectrogram, power

DEFAULT_ROOM = "4x3x2.5"
DEFAULT_SRC = "1.2,1.1,1.3"
DEFAULT_MIC = "2.9,1.9,1.5"


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on bad arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


@dataclass
class RunManifest:
    """Everything needed to reproduce one pipeline run, plus timings."""

    entries: dict = field(default_factory=dict)

    def set(self, key, value):
        self.entries[key] = value

    def write(self, path):
        with open(path, "w") as fh:
            for key, value in self.entries.items():
                fh.write(f"{key}={value}\n")


def _parse_bool(text):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_SOLVER_FIELDS = {
    "lambda_h": float,
    "lambda_s": float,
    "p": float,
    "n_h": int,
    "max_iter": int,
    "delta_factor": float,
    "rescale": _parse_bool,
    "eps_floor": float,
}
_STFT_FIELDS = {"window_len": int, "hop": int}
_OTHER_FIELDS = {"method": str, "seed": int}


def read_config_file(path):
    """Plain key = value file; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def _resolve(args, known_fields):
    """CLI flag if given, else config-file entry, else dataclass default."""
    file_values = {}
    if getattr(args, "config", None):
        file_values = read_config_file(args.config)
        for key in file_values:
            if key not in known_fields:
                raise ValueError(f"unknown config key {key!r}")
    resolved = {}
    for key, conv in known_fields.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            resolved[key] = cli_value
        elif key in file_values:
            resolved[key] = conv(file_values[key])
    return resolved


def resolve_configs(args):
    all_fields = {**_SOLVER_FIELDS, **_STFT_FIELDS, **_OTHER_FIELDS}
    resolved = _resolve(args, all_fields)
    solver = SolverConfig(**{k: v for k, v in resolved.items() if k in _SOLVER_FIELDS})
    stft = StftConfig(
        **{k: v for k, v in resolved.items() if k in _STFT_FIELDS}
    )
    method = resolved.get("method", "magnitude_replace")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    seed = resolved.get("seed", 0)
    return stft, solver, method, seed


def _add_solver_flags(sub):
    sub.add_argument("--lambda-h", dest="lambda_h", type=float, default=None)
    sub.add_argument("--lambda-s", dest="lambda_s", type=float, default=None)
    sub.add_argument("--p", dest="p", type=float, default=None)
    sub.add_argument("--nh", dest="n_h", type=int, default=None)
    sub.add_argument("--win", dest="window_len", type=int, default=None)
    sub.add_argument("--hop", dest="hop", type=int, default=None)
    sub.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    sub.add_argument("--delta-factor", dest="delta_factor", type=float, default=None)
    sub.add_argument(
        "--no-rescale", dest="rescale", action="store_const", const=False, default=None
    )
    sub.add_argument("--method", dest="method", choices=METHODS, default=None)
    sub.add_argument("--seed", dest="seed", type=int, default=None)
    sub.add_argument("--config", default=None, help="key = value config file")


# The sparsity weight is an absolute quantity, so the solver stage runs at
# 16-bit integer sample scale (the convention its default is calibrated
# for) regardless of the float input level. Power spectrograms scale as
# amplitude squared. For lambda_s = 0 the solve is exactly scale covariant,
# so this changes nothing in that case.
SOLVER_STAGE_GAIN = 32768.0


def dereverb_signal(signal, stft_config, solver_config, method):
    """analyze -> power -> solve -> reconstruct, trimmed to the input length.

    Returns (output AudioSignal, SolverState, observed ComplexSpectrogram,
    stage timings dict). The state's matrices and cost history are at the
    solver stage's integer scale.
    """
    t0 = time.perf_counter()
    spec = analyze(signal, stft_config)
    obs = power(spec)
    t1 = time.perf_counter()
    state = run(obs.data * SOLVER_STAGE_GAIN**2, solver_config)
    s_est = state.S / SOLVER_STAGE_GAIN**2
    t2 = time.perf_counter()
    out = reconstruct(obs.like(s_est), spec, method=method)
    trimmed = AudioSignal(out.samples[: len(signal)], out.sample_rate)
    t3 = time.perf_counter()
    timings = {
        "time_stft_s": t1 - t0,
        "time_solve_s": t2 - t1,
        "time_reconstruct_s": t3 - t2,
    }
    return trimmed, state, spec, timings


def cmd_dereverb(args):
    try:
        stft_config, solver_config, method, seed = resolve_configs(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    manifest = RunManifest()
    manifest.set("input", args.input)
    manifest.set("output", args.output)
    manifest.set("format", args.format)
    manifest.set("method", method)
    manifest.set("seed", seed)
    manifest.set("window_len", stft_config.window_len)
    manifest.set("hop", stft_config.hop)
    manifest.set("window_kind", stft_config.window_kind)
    for name in _SOLVER_FIELDS:
        manifest.set(name, getattr(solver_config, name))
    manifest.set("backend", kernels.BACKEND)

    try:
        t0 = time.perf_counter()
        signal = read_wav(args.input)
        t1 = time.perf_counter()
    except (OSError, DerevError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if signal.sample_rate != PIPELINE_RATE:
        print(
            f"warning: {args.input} is at {signal.sample_rate} Hz; the supported "
            f"pipeline rate is {PIPELINE_RATE} Hz",
            file=sys.stderr,
        )

    try:
        out, state, spec, timings = dereverb_signal(
            signal, stft_config, solver_config, method
        )
        t2 = time.perf_counter()
    except NumericalFailureError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3
    except DerevError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        write_wav(out, args.output, fmt=args.format)
        if args.dump_cost:
            dump_cost_history(state, args.dump_cost)
        if args.dump_spec:
            est = state.S / SOLVER_STAGE_GAIN**2
            dump_spectrogram(power(spec).like(est), args.dump_spec)
        t3 = time.perf_counter()
        manifest.set("iterations", state.iteration)
        manifest.set("converged", str(state.converged).lower())
        manifest.set("time_read_s", f"{t1 - t0:.6f}")
        for key, value in timings.items():
            manifest.set(key, f"{value:.6f}")
        manifest.set("time_write_s", f"{t3 - t2:.6f}")
        manifest.write(args.output + ".manifest")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _parse_vec(text, name, sep=","):
    parts = text.replace("x", sep).split(sep) if sep != "," else text.split(sep)
    if len(parts) != 3:
        raise ValueError(f"{name} must have three components, got {text!r}")
    return tuple(float(v) for v in parts)


def cmd_simulate(args):
    if args.out is None and args.rev_out is None:
        print("error: need --out and/or --rev-out", file=sys.stderr)
        return 1
    if args.rev_out and not args.dry:
        print("error: --rev-out requires --dry", file=sys.stderr)
        return 1
    try:
        room_dims = _parse_vec(args.room, "--room", sep="x")
        src = _parse_vec(args.src, "--src")
        mic = _parse_vec(args.mic, "--mic")
        room = RoomSpec(
            dimensions=room_dims,
            source=src,
            mic=mic,
            t60=args.t60,
            reflection_coeff=args.reflection,
            max_order=args.order,
            sample_rate=args.fs,
        )
        length_s = args.length_s
        if length_s is None:
            length_s = max(1.0, 1.5 * args.t60) if args.t60 else 1.0
        rir = image_method_rir(room, int(round(length_s * args.fs)))
    except (InvalidGeometryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.out:
            write_wav(rir, args.out, fmt="float32")
        if args.rev_out:
            dry = read_wav(args.dry)
            rev = apply_rir(dry, rir)
            peak = np.max(np.abs(rev.samples))
            if peak > 0:
                rev = AudioSignal(rev.samples * (0.9 / peak), rev.sample_rate)
            write_wav(rev, args.rev_out, fmt=args.format)
    except (OSError, DerevError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def cmd_evaluate(args):
    try:
        clean = read_wav(args.clean)
        test = read_wav(args.test)
    except (OSError, DerevError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = evaluate_pair(clean, test)
    except SampleRateMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DerevError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for line in report.lines():
        print(line)
    if args.csv:
        header_needed = not os.path.exists(args.csv)
        with open(args.csv, "a") as fh:
            if header_needed:
                fh.write("file,fwssnr_db,cepstral_distance,frames_used\n")
            fh.write(report.csv_row(args.test) + "\n")
    return 0


def _rms_match(reference, test):
    """Scale ``test`` to the reference's RMS (metrics are gain sensitive)."""
    ref_rms = np.sqrt(np.mean(reference.samples**2))
    test_rms = np.sqrt(np.mean(test.samples**2))
    if test_rms == 0:
        return test
    return AudioSignal(test.samples * (ref_rms / test_rms), test.sample_rate)


def _aligned_pair(dry, rir):
    """Reverberate ``dry`` and undo the direct-path delay."""
    rev = apply_rir(dry, rir)
    shift = int(np.argmax(np.abs(rir.samples)))
    samples = rev.samples[shift : shift + len(dry)]
    if len(samples) < len(dry):
        samples = np.concatenate([samples, np.zeros(len(dry) - len(samples))])
    return AudioSignal(samples, dry.sample_rate), shift


def cmd_benchmark(args):
    try:
        stft_config, solver_config, method, seed = resolve_configs(args)
        t60s = sorted(float(v) for v in args.t60s.split(","))
        room_dims = _parse_vec(args.room, "--room", sep="x")
        src = _parse_vec(args.src, "--src")
        mic = _parse_vec(args.mic, "--mic")
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    wavs = sorted(
        os.path.join(args.corpus, name)
        for name in os.listdir(args.corpus)
        if name.lower().endswith(".wav")
    )
    if not wavs:
        print(f"error: no WAV files in {args.corpus}", file=sys.stderr)
        return 1

    rows = []
    failures = 0
    attempts = 0
    for t60 in t60s:
        try:
            room = RoomSpec(
                dimensions=room_dims, source=src, mic=mic, t60=t60, sample_rate=args.fs
            )
            rir = image_method_rir(room, int(round(1.5 * t60 * args.fs)))
        except (InvalidGeometryError, ValueError) as exc:
            print(f"error: condition t60={t60}: {exc}", file=sys.stderr)
            failures += len(wavs)
            attempts += len(wavs)
            continue
        scores = {"snr_rev": [], "snr_der": [], "cd_rev": [], "cd_der": []}
        for path in wavs:
            attempts += 1
            try:
                dry = read_wav(path)
                rev_aligned, _ = _aligned_pair(dry, rir)
                peak = np.max(np.abs(rev_aligned.samples))
                if peak > 0:
                    rev_aligned = AudioSignal(
                        rev_aligned.samples * (0.9 / peak), rev_aligned.sample_rate
                    )
                der, _, _, _ = dereverb_signal(
                    rev_aligned, stft_config, solver_config, method
                )
                rev_rep = evaluate_pair(dry, _rms_match(dry, rev_aligned))
                der_rep = evaluate_pair(dry, _rms_match(dry, der))
            except (OSError, DerevError, ValueError) as exc:
                failures += 1
                print(f"warning: {path} @ t60={t60}: {exc}", file=sys.stderr)
                continue
            scores["snr_rev"].append(rev_rep.fwssnr_db)
            scores["snr_der"].append(der_rep.fwssnr_db)
            scores["cd_rev"].append(rev_rep.cepstral_distance)
            scores["cd_der"].append(der_rep.cepstral_distance)
        n = len(scores["snr_rev"])
        if n == 0:
            continue
        row = [f"{t60:g}"]
        for key in ("snr_rev", "snr_der", "cd_rev", "cd_der"):
            vals = np.asarray(scores[key])
            row.append(f"{vals.mean():.6f}")
            row.append(f"{vals.std():.6f}")
        # Column order groups reverberant before dereverberated per metric.
        t60_col, sr_m, sr_s, sd_m, sd_s, cr_m, cr_s, cd_m, cd_s = row
        rows.append(
            f"{t60_col},{sr_m},{sr_s},{sd_m},{sd_s},{cr_m},{cr_s},{cd_m},{cd_s},{n}"
        )

    header = (
        "t60,fwssnr_rev_mean,fwssnr_rev_std,fwssnr_der_mean,fwssnr_der_std,"
        "cd_rev_mean,cd_rev_std,cd_der_mean,cd_der_std,n"
    )
    with open(args.out, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")
    if failures:
        print(f"{failures} of {attempts} runs failed", file=sys.stderr)
    return 0 if failures < attempts else 1


def build_parser():
    parser = _Parser(prog="derev", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_der = sub.add_parser("dereverb", help="dereverberate a WAV file")
    p_der.add_argument("input")
    p_der.add_argument("-o", "--output", required=True)
    p_der.add_argument("--format", choices=("float32", "pcm16"), default="float32")
    p_der.add_argument("--dump-cost", default=None, help="write cost history CSV")
    p_der.add_argument("--dump-spec", default=None, help="write estimated spectrogram")
    _add_solver_flags(p_der)
    p_der.set_defaults(func=cmd_dereverb)

    p_sim = sub.add_parser("simulate", help="synthesize RIRs / reverberant audio")
    p_sim.add_argument("--t60", type=float, default=None)
    p_sim.add_argument("--reflection", type=float, default=None)
    p_sim.add_argument("--room", default=DEFAULT_ROOM, help="WxDxH in meters")
    p_sim.add_argument("--src", default=DEFAULT_SRC, help="x,y,z in meters")
    p_sim.add_argument("--mic", default=DEFAULT_MIC, help="x,y,z in meters")
    p_sim.add_argument("--order", type=int, default=None)
    p_sim.add_argument("--fs", type=int, default=PIPELINE_RATE)
    p_sim.add_argument("--length-s", type=float, default=None)
    p_sim.add_argument("--out", default=None, help="RIR output WAV")
    p_sim.add_argument("--dry", default=None, help="dry input to reverberate")
    p_sim.add_argument("--rev-out", default=None, help="reverberant output WAV")
    p_sim.add_argument("--format", choices=("float32", "pcm16"), default="float32")
    p_sim.set_defaults(func=cmd_simulate)

    p_eval = sub.add_parser("evaluate", help="quality metrics vs a clean reference")
    p_eval.add_argument("clean")
    p_eval.add_argument("test")
    p_eval.add_argument("--csv", default=None, help="append a CSV row here")
    p_eval.set_defaults(func=cmd_evaluate)

    p_bench = sub.add_parser("benchmark", help="sweep a corpus over T60 conditions")
    p_bench.add_argument("--corpus", required=True, help="directory of dry WAVs")
    p_bench.add_argument("--out", required=True, help="summary CSV path")
    p_bench.add_argument("--t60s", default="0.3,0.45,0.6,0.75")
    p_bench.add_argument("--room", default=DEFAULT_ROOM)
    p_bench.add_argument("--src", default=DEFAULT_SRC)
    p_bench.add_argument("--mic", default=DEFAULT_MIC)
    p_bench.add_argument("--fs", type=int, default=PIPELINE_RATE)
    _add_solver_flags(p_bench)
    p_bench.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
