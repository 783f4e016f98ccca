"""Command-line interface.

Subcommands:
    mix       decimate, equalize, and sum two sources into a mixture
    train     fit the separation network on the training span of two sources
    separate  run a trained model on a mixture WAV
    eval      SDR/SIR/SAR of two estimate WAVs against two reference WAVs
    ibm       ideal-binary-mask oracle separation plus metrics
    curve     train while tracking separation quality per epoch

All commands exit 0 only after their outputs are written; any failure prints
a single `error: ...` line on stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from specsep.audio_io import (
    AudioClip,
    SampleRateMismatchError,
    decimate,
    read_wav,
    write_wav,
    equalize_and_mix,
)
from specsep.bss_eval import SeparationMetrics, evaluate_separation
from specsep.config import RunConfig
from specsep.dataset import WindowGeometry, extract_windows, split_normalize
from specsep.mlp import Mlp, load_model, save_model, train_sgd
from specsep.oracle import apply_mask, ideal_binary_mask
from specsep.resynth import SeparationParams, separate
from specsep.stft import StftConfig, istft_overlap_add, stft_forward

log = logging.getLogger(__name__)


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "eval_every", None) is not None:
        if args.eval_every < 1:
            raise ValueError(f"--eval-every must be >= 1, got {args.eval_every}")
        cfg.eval_every = args.eval_every
    return cfg


def _read_at_rate(path: str, rate: int) -> AudioClip:
    return decimate(read_wav(path), rate)


def _span(clip: AudioClip, start_s: float, duration_s: float, label: str) -> AudioClip:
    start = int(round(start_s * clip.sample_rate))
    count = int(round(duration_s * clip.sample_rate))
    seg = clip.samples[start : start + count]
    if seg.size == 0:
        raise ValueError(
            f"{label} span starting at {start_s} s is past the end of the "
            f"audio ({len(clip)} samples at {clip.sample_rate} Hz)"
        )
    return AudioClip(seg.copy(), clip.sample_rate)


def _trimmed(clip: AudioClip, count: int) -> AudioClip:
    return AudioClip(clip.samples[:count].copy(), clip.sample_rate)


def _training_setup(cfg: RunConfig, mix: AudioClip, src1: AudioClip, src2: AudioClip):
    """STFT + normalization + window extraction; returns (pairs, model meta)."""
    stft_cfg = cfg.stft_config
    grid_mix = split_normalize(stft_forward(mix, stft_cfg))
    grid_1 = split_normalize(stft_forward(src1, stft_cfg))
    grid_2 = split_normalize(stft_forward(src2, stft_cfg))
    pairs = extract_windows(grid_mix, (grid_1, grid_2), cfg.window_geometry)
    log.info("extracted %d training pairs (seed %d)", len(pairs), cfg.seed)
    meta = {
        "mixture_scale": grid_mix.mag_scale,
        "source1_scale": grid_1.mag_scale,
        "source2_scale": grid_2.mag_scale,
        "sample_rate": cfg.sample_rate,
        "stft_window_size": cfg.stft_window_size,
        "stft_hop": cfg.stft_hop,
        "window_width": cfg.window_width,
        "train_window_hop": cfg.train_window_hop,
        "training_pairs": len(pairs),
    }
    return pairs, meta


def _params_from_meta(meta: dict, model: Mlp, adapt: bool) -> tuple[SeparationParams, int]:
    needed = (
        "mixture_scale",
        "source1_scale",
        "source2_scale",
        "sample_rate",
        "stft_window_size",
        "stft_hop",
        "window_width",
    )
    missing = [key for key in needed if key not in meta]
    if missing:
        raise ValueError(f"model metadata is missing {', '.join(missing)}")
    stft_cfg = StftConfig(
        window_size=int(meta["stft_window_size"]), hop=int(meta["stft_hop"])
    )
    width = int(meta["window_width"])
    geom = WindowGeometry(
        width=width, train_hop=int(meta.get("train_window_hop", 1))
    )
    expected_in = 2 * stft_cfg.bins * width
    if model.geometry[0] != expected_in or model.geometry[-1] != 2 * expected_in:
        raise ValueError(
            f"model geometry {model.geometry} does not match its metadata: "
            f"{stft_cfg.bins} bins x {width} frames needs "
            f"{expected_in} -> {2 * expected_in}"
        )
    params = SeparationParams(
        stft=stft_cfg,
        geometry=geom,
        mixture_scale=float(meta["mixture_scale"]),
        source1_scale=float(meta["source1_scale"]),
        source2_scale=float(meta["source2_scale"]),
        adapt=adapt,
    )
    return params, int(meta["sample_rate"])


def _report_metrics(result: SeparationMetrics, json_path: str | None) -> None:
    print(f"{'':<10}{'SDR':>9}{'SIR':>9}{'SAR':>9}")
    rows = (
        ("source1", result.source1),
        ("source2", result.source2),
        ("average", result.average),
    )
    for name, entry in rows:
        print(f"{name:<10}{entry.sdr:>9.2f}{entry.sir:>9.2f}{entry.sar:>9.2f}")
    blob = json.dumps(result.as_dict(), sort_keys=True)
    print(blob)
    if json_path:
        Path(json_path).write_text(blob + "\n")


def _aligned(clips: list[AudioClip], tolerance: int = 1) -> list[AudioClip]:
    rates = {c.sample_rate for c in clips}
    if len(rates) > 1:
        raise SampleRateMismatchError(f"sample rates differ: {sorted(rates)} Hz")
    lengths = [len(c) for c in clips]
    if max(lengths) - min(lengths) > tolerance:
        raise ValueError(
            f"lengths differ by more than {tolerance} sample(s): {lengths}"
        )
    shortest = min(lengths)
    return [_trimmed(c, shortest) for c in clips]


def cmd_mix(args) -> int:
    cfg = _load_config(args)
    a = _read_at_rate(args.source1, cfg.sample_rate)
    b = _read_at_rate(args.source2, cfg.sample_rate)
    mixture, a_scaled, b_scaled = equalize_and_mix(a, b)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_wav(mixture, out_dir / "mixture.wav")
    write_wav(a_scaled, out_dir / "reference1.wav")
    write_wav(b_scaled, out_dir / "reference2.wav")
    log.info(
        "wrote mixture and references: %d samples at %d Hz",
        len(mixture),
        mixture.sample_rate,
    )
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    mix, s1, s2 = equalize_and_mix(
        _read_at_rate(args.source1, cfg.sample_rate),
        _read_at_rate(args.source2, cfg.sample_rate),
    )
    train_mix = _span(mix, cfg.train_start_s, cfg.train_duration_s, "training")
    train_1 = _span(s1, cfg.train_start_s, cfg.train_duration_s, "training")
    train_2 = _span(s2, cfg.train_start_s, cfg.train_duration_s, "training")
    pairs, meta = _training_setup(cfg, train_mix, train_1, train_2)

    model = Mlp.init(cfg.mlp_geometry, cfg.seed)
    loss_rows = []

    def note(epoch: int, mean_loss: float) -> None:
        loss_rows.append((epoch, mean_loss))
        log.info("epoch %d/%d: mean loss %.8f", epoch, cfg.epochs, mean_loss)

    train_sgd(model, pairs, cfg.train_config, note)

    model_out = Path(args.model_out)
    if model_out.parent != Path(""):
        model_out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model_out, model, meta)
    loss_path = (
        Path(args.loss_csv) if args.loss_csv else model_out.with_suffix(".loss.csv")
    )
    with open(loss_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "loss"])
        for epoch, loss in loss_rows:
            writer.writerow([epoch, f"{loss:.10g}"])
    log.info("wrote %s and %s", model_out, loss_path)
    return 0


def cmd_separate(args) -> int:
    cfg = _load_config(args)
    model, meta = load_model(args.model)
    adapt = cfg.gain_adaptation and not args.no_adapt
    params, model_rate = _params_from_meta(meta, model, adapt)
    mixture = read_wav(args.mixture)
    if mixture.sample_rate != model_rate:
        raise SampleRateMismatchError(
            f"mixture is at {mixture.sample_rate} Hz but the model was "
            f"trained at {model_rate} Hz"
        )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    clip1, clip2, spectra1, spectra2 = separate(model, mixture, params)
    write_wav(clip1, out_dir / "source1.wav")
    write_wav(clip2, out_dir / "source2.wav")
    if args.dump_spectra:
        for idx, spectra in ((1, spectra1), (2, spectra2)):
            grids = (
                ("mag", spectra.mag),
                ("phase", spectra.phase),
                ("resultant", spectra.resultant_len),
            )
            for name, grid in grids:
                np.savetxt(
                    out_dir / f"source{idx}_{name}.csv",
                    grid.T,
                    delimiter=",",
                    fmt="%.8g",
                )
    log.info("wrote separated sources to %s (adaptation %s)",
             out_dir, "on" if adapt else "off")
    return 0


def cmd_eval(args) -> int:
    clips = [
        read_wav(p)
        for p in (args.estimate1, args.estimate2, args.reference1, args.reference2)
    ]
    est1, est2, ref1, ref2 = _aligned(clips)
    result = evaluate_separation(est1, est2, ref1, ref2)
    _report_metrics(result, args.json_out)
    return 0


def cmd_ibm(args) -> int:
    cfg = _load_config(args)
    clips = [read_wav(p) for p in (args.source1, args.source2, args.mixture)]
    src1, src2, mixture = _aligned(clips)
    stft_cfg = cfg.stft_config
    spec1 = stft_forward(src1, stft_cfg)
    spec2 = stft_forward(src2, stft_cfg)
    spec_mix = stft_forward(mixture, stft_cfg)
    mask1, mask2 = ideal_binary_mask(spec1, spec2)
    clip1 = istft_overlap_add(apply_mask(spec_mix, mask1))
    clip2 = istft_overlap_add(apply_mask(spec_mix, mask2))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_wav(clip1, out_dir / "ibm_source1.wav")
    write_wav(clip2, out_dir / "ibm_source2.wav")
    n = len(clip1)
    result = evaluate_separation(clip1, clip2, _trimmed(src1, n), _trimmed(src2, n))
    _report_metrics(result, args.json_out)
    return 0


def cmd_curve(args) -> int:
    cfg = _load_config(args)
    mix, s1, s2 = equalize_and_mix(
        _read_at_rate(args.source1, cfg.sample_rate),
        _read_at_rate(args.source2, cfg.sample_rate),
    )
    train_mix = _span(mix, cfg.train_start_s, cfg.train_duration_s, "training")
    train_1 = _span(s1, cfg.train_start_s, cfg.train_duration_s, "training")
    train_2 = _span(s2, cfg.train_start_s, cfg.train_duration_s, "training")
    test_start = cfg.train_start_s + cfg.train_duration_s
    test_mix = _span(mix, test_start, cfg.test_duration_s, "test")
    test_1 = _span(s1, test_start, cfg.test_duration_s, "test")
    test_2 = _span(s2, test_start, cfg.test_duration_s, "test")

    pairs, meta = _training_setup(cfg, train_mix, train_1, train_2)
    params = SeparationParams(
        stft=cfg.stft_config,
        geometry=cfg.window_geometry,
        mixture_scale=meta["mixture_scale"],
        source1_scale=meta["source1_scale"],
        source2_scale=meta["source2_scale"],
        adapt=cfg.gain_adaptation,
    )
    model = Mlp.init(cfg.mlp_geometry, cfg.seed)
    rows = []

    def evaluate(epoch: int, mean_loss: float) -> None:
        if epoch % cfg.eval_every != 0 and epoch != cfg.epochs:
            return
        est1, est2, _, _ = separate(model, test_mix, params)
        n = len(est1)
        result = evaluate_separation(
            est1, est2, _trimmed(test_1, n), _trimmed(test_2, n)
        )
        avg = result.average
        rows.append((epoch, avg.sdr, avg.sir, avg.sar))
        log.info(
            "epoch %d/%d: loss %.8f, SDR %.2f, SIR %.2f, SAR %.2f dB",
            epoch, cfg.epochs, mean_loss, avg.sdr, avg.sir, avg.sar,
        )

    train_sgd(model, pairs, cfg.train_config, evaluate)

    out_csv = Path(args.out_csv)
    if out_csv.parent != Path(""):
        out_csv.parent.mkdir(parents=True, exist_ok=True)
    with open(out_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "sdr", "sir", "sar"])
        for epoch, sdr, sir, sar in rows:
            writer.writerow([epoch, f"{sdr:.6f}", f"{sir:.6f}", f"{sar:.6f}"])
    if args.model_out:
        save_model(args.model_out, model, meta)
        log.info("wrote %s and %s", out_csv, args.model_out)
    else:
        log.info("wrote %s", out_csv)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specsep",
        description="Monaural two-speaker source separation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file; defaults apply if omitted")
        sp.add_argument("--seed", type=int, help="override the config seed")

    p = sub.add_parser("mix", help="decimate, equalize, and sum two sources")
    p.add_argument("source1")
    p.add_argument("source2")
    p.add_argument("out_dir")
    common(p)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("train", help="train the separation network")
    p.add_argument("source1")
    p.add_argument("source2")
    p.add_argument("--model-out", required=True, help="where to write the model file")
    p.add_argument("--loss-csv", help="loss trace path (default: model path + .loss.csv)")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("separate", help="apply a trained model to a mixture")
    p.add_argument("model")
    p.add_argument("mixture")
    p.add_argument("out_dir")
    p.add_argument("--no-adapt", action="store_true",
                   help="disable output gain adaptation")
    p.add_argument("--dump-spectra", action="store_true",
                   help="also write aggregated spectra as CSV")
    common(p)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("eval", help="score two estimates against two references")
    p.add_argument("estimate1")
    p.add_argument("estimate2")
    p.add_argument("reference1")
    p.add_argument("reference2")
    p.add_argument("--json", dest="json_out", help="also write metrics as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ibm", help="ideal-binary-mask oracle separation")
    p.add_argument("source1")
    p.add_argument("source2")
    p.add_argument("mixture")
    p.add_argument("out_dir")
    p.add_argument("--json", dest="json_out", help="also write metrics as JSON")
    common(p)
    p.set_defaults(func=cmd_ibm)

    p = sub.add_parser("curve", help="train and log separation quality per epoch")
    p.add_argument("source1")
    p.add_argument("source2")
    p.add_argument("out_csv")
    p.add_argument("--eval-every", type=int,
                   help="override how often (in epochs) to evaluate")
    p.add_argument("--model-out", help="also save the final model")
    common(p)
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        message = " ".join(str(exc).split()) or exc.__class__.__name__
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
