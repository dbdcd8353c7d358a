"""Command-line driver: ``run``, ``gen-synthetic`` and ``report``.

Settings resolve as command-line flag > JSON config file (``--config``) >
built-in default.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .compositor import CompositeConfig, PipelineError, check_layer_weights, run_pipeline
from .imaging import load_frame, save_frame
from .matting import PsoConfig, save_matte
from .metrics import MetricsRecord, emit_report, mse, read_report, rgb_probe
from .synthetic import SceneSpec, bundled_suite, generate_scene, write_scene
from .trimap import load_trimap

FRAME_SUFFIXES = (".png", ".ppm")
RUN_MODES = ("baseline", "proposed", "both")
TIMING = ("wall", "off")


@dataclass
class RunConfig:
    source_dir: Path
    target_dir: Path
    trimap: Path
    output_dir: Path
    reference_dir: Path | None = None
    mode: str = "both"
    probe: tuple | None = None
    seed: int = 42
    k: float = 1.0
    layer_alpha: float = 0.5
    layer_beta: float | None = None
    source_form: str = "multiplicative"
    matte_alpha: float = 1.0
    swarm_size: int = 20
    iterations: int = 40
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    window_radius: int = 5
    max_vertices: int = 256
    smooth_radius: int = 2
    sigma_c: float = 0.1
    eps_a: float = 0.05
    max_per_side: int = 16
    timing: str = "wall"
    save_mattes: bool = False
    extra: dict = field(default_factory=dict, repr=False)

    def composite(self, mode: str) -> CompositeConfig:
        return CompositeConfig(
            mode=mode, layer_alpha=self.layer_alpha, layer_beta=self.layer_beta,
            k=self.k, source_form=self.source_form, matte_alpha=self.matte_alpha,
            pso=PsoConfig(self.swarm_size, self.iterations, self.inertia,
                          self.cognitive, self.social, self.seed),
            window_radius=self.window_radius, max_vertices=self.max_vertices,
            smooth_radius=self.smooth_radius, sigma_c=self.sigma_c,
            eps_a=self.eps_a, max_per_side=self.max_per_side,
        )

    @property
    def modes(self) -> tuple:
        return ("baseline", "proposed") if self.mode == "both" else (self.mode,)


_RUN_KEYS = {f.name for f in fields(RunConfig)} - {"extra"}
_PATH_KEYS = {"source_dir", "target_dir", "trimap", "output_dir", "reference_dir"}
_REQUIRED = ("source_dir", "target_dir", "trimap", "output_dir")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    # every default is None so that "flag given" can be told apart from "unset"
    S = argparse.SUPPRESS
    p.add_argument("--config", type=Path, help="JSON file with any of the settings below")
    p.add_argument("--source-dir", type=Path, default=S, help="directory of source frames")
    p.add_argument("--target-dir", type=Path, default=S, help="directory of target frames")
    p.add_argument("--trimap", type=Path, default=S, help="frame-0 trimap (0=B, 255=F, other=U)")
    p.add_argument("--output-dir", type=Path, default=S, help="where frames and reports go")
    p.add_argument("--reference-dir", type=Path, default=S,
                   help="ground-truth frames for MSE (default: the target frames)")
    p.add_argument("--mode", choices=RUN_MODES, default=S, help="pipeline mode (default both)")
    p.add_argument("--probe", type=int, nargs=2, metavar=("X", "Y"), default=S,
                   help="RGB probe pixel (default: centroid of the frame-0 Foreground)")
    p.add_argument("--seed", type=int, default=S, help="swarm seed (default 42)")
    p.add_argument("--k", type=float, default=S, help="clone coefficient in [0, 1] (default 1)")
    p.add_argument("--layer-alpha", type=float, default=S, help="weight of the clone layer (default 0.5)")
    p.add_argument("--layer-beta", type=float, default=S,
                   help="weight of the matte layer (default 1 - layer alpha)")
    p.add_argument("--source-form", choices=("multiplicative", "additive"), default=S,
                   help="how the mixing weight enters the clone (default multiplicative)")
    p.add_argument("--matte-alpha", type=float, default=S,
                   help="constant alpha of the baseline matte (default 1)")
    p.add_argument("--swarm-size", type=int, default=S, help="particles per swarm (default 20)")
    p.add_argument("--iterations", type=int, default=S, help="swarm iterations (default 40)")
    p.add_argument("--inertia", type=float, default=S, help="swarm inertia (default 0.729)")
    p.add_argument("--cognitive", type=float, default=S, help="cognitive coefficient (default 1.49445)")
    p.add_argument("--social", type=float, default=S, help="social coefficient (default 1.49445)")
    p.add_argument("--window-radius", type=int, default=S, help="trimap search radius (default 5)")
    p.add_argument("--max-vertices", type=int, default=S, help="contour vertices kept (default 256)")
    p.add_argument("--smooth-radius", type=int, default=S, help="matte smoothing radius (default 2)")
    p.add_argument("--sigma-c", type=float, default=S, help="smoothing colour scale (default 0.1)")
    p.add_argument("--eps-a", type=float, default=S, help="candidate suppression radius (default 0.05)")
    p.add_argument("--max-per-side", type=int, default=S, help="candidates per side (default 16)")
    p.add_argument("--timing", choices=TIMING, default=S,
                   help="'off' leaves time_s empty so reports are reproducible (default wall)")
    p.add_argument("--save-mattes", action="store_true", default=S, help="also write matte images")


def _check_keys(d: dict, origin: str) -> None:
    unknown = set(d) - _RUN_KEYS
    if unknown:
        raise ValueError(f"unknown setting(s) in {origin}: {', '.join(sorted(unknown))}")


def parse_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, an optional JSON config file and explicit flags."""
    values = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        try:
            loaded = json.loads(Path(cfg_path).read_text())
        except FileNotFoundError:
            raise ValueError(f"config file not found: {cfg_path}") from None
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {cfg_path} must hold a JSON object")
        _check_keys(loaded, str(cfg_path))
        values.update(loaded)
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "command", "func")}
    _check_keys(flags, "command line")
    values.update(flags)

    missing = [k for k in _REQUIRED if values.get(k) is None]
    if missing:
        raise ValueError("missing required setting(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    for key in _PATH_KEYS:
        if values.get(key) is not None:
            values[key] = Path(values[key])
    if values.get("probe") is not None:
        values["probe"] = tuple(int(v) for v in values["probe"])
    mode = values.get("mode", "both")
    if mode not in RUN_MODES:
        raise ValueError(f"mode must be one of {RUN_MODES}, got {mode!r}")
    if values.get("timing", "wall") not in TIMING:
        raise ValueError(f"timing must be one of {TIMING}")
    alpha = float(values.get("layer_alpha", 0.5))
    beta = values.get("layer_beta")
    values["layer_beta"] = 1.0 - alpha if beta is None else float(beta)
    check_layer_weights(alpha, values["layer_beta"])
    cfg = RunConfig(**values)
    cfg.composite("proposed")  # validates the remaining tunables
    return cfg


def list_frames(directory: Path) -> list:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"frame directory not found: {directory}")
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in FRAME_SUFFIXES)
    if not files:
        raise ValueError(f"no .png/.ppm frames in {directory}")
    return files


def default_probe(trimap) -> tuple:
    ys, xs = np.nonzero(trimap.foreground)
    return int(round(xs.mean())), int(round(ys.mean()))


def run(cfg: RunConfig) -> int:
    """Run the configured modes and write frames plus ``report.csv``/``summary.json``."""
    src_files = list_frames(cfg.source_dir)
    tgt_files = list_frames(cfg.target_dir)
    if len(src_files) != len(tgt_files):
        raise ValueError(f"{len(src_files)} source frames but {len(tgt_files)} target frames")
    sources = [load_frame(p, "source") for p in src_files]
    targets = [load_frame(p, "target") for p in tgt_files]
    if not Path(cfg.trimap).is_file():
        raise FileNotFoundError(f"trimap file not found: {cfg.trimap}")
    trimap0 = load_trimap(cfg.trimap, sources[0].shape)
    if cfg.reference_dir is not None:
        ref_files = list_frames(cfg.reference_dir)
        if len(ref_files) != len(src_files):
            raise ValueError(f"{len(ref_files)} reference frames for {len(src_files)} source frames")
        references = [load_frame(p, "reference") for p in ref_files]
    else:
        references = targets
    probe = cfg.probe if cfg.probe is not None else default_probe(trimap0)

    records = {}
    for mode in cfg.modes:
        result = run_pipeline(sources, targets, trimap0, cfg.composite(mode))
        out = Path(cfg.output_dir) / mode
        out.mkdir(parents=True, exist_ok=True)
        recs = []
        for n, frame in enumerate(result.frames):
            save_frame(frame, out / f"frame_{n:04d}.png")
            if cfg.save_mattes:
                save_matte(result.mattes[n], out / f"matte_{n:04d}.png")
            # score the frame as written, so reports match the files on disk
            written = load_frame(out / f"frame_{n:04d}.png")
            recs.append(MetricsRecord(
                n, mse(written, references[n]), rgb_probe(written, *probe),
                result.timings[n].seconds if cfg.timing == "wall" else None,
            ))
        records[mode] = recs
    emit_report(records, cfg.output_dir)
    return 0


def _cmd_run(args) -> int:
    cfg = parse_config(args)
    return run(cfg)


def _cmd_gen(args) -> int:
    if args.suite:
        for i, spec in enumerate(bundled_suite(args.suite)):
            write_scene(generate_scene(spec), Path(args.output_dir) / f"scene_{i:02d}")
        return 0
    spec = SceneSpec(
        width=args.width, height=args.height, radius=args.radius, band=args.band,
        translation=tuple(args.translation), frames=args.frames,
        illumination=args.illumination, noise=args.noise, seed=args.seed,
    )
    write_scene(generate_scene(spec), args.output_dir)
    return 0


def _cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    refs = [load_frame(p, "reference") for p in list_frames(args.reference_dir)]
    old = read_report(run_dir / "report.csv") if (run_dir / "report.csv").is_file() else {}
    probe = tuple(args.probe) if args.probe else None
    records = {}
    frames_by_mode = {}
    for mode in ("baseline", "proposed"):
        if not (run_dir / mode).is_dir():
            continue
        files = sorted((run_dir / mode).glob("frame_*.png"))
        frames = [load_frame(p) for p in files]
        if len(frames) != len(refs):
            raise ValueError(f"{mode}: {len(frames)} frames but {len(refs)} reference frames")
        frames_by_mode[mode] = frames
        if probe is None:
            h, w = frames[0].shape[:2]
            probe = (w // 2, h // 2)
        times = {r.frame_index: r.time_seconds for r in old.get(mode, [])}
        records[mode] = [
            MetricsRecord(n, mse(f, refs[n]), rgb_probe(f, *probe), times.get(n))
            for n, f in enumerate(frames)
        ]
    if not records:
        raise ValueError(f"no baseline/ or proposed/ frames under {run_dir}")
    emit_report(records, args.output or run_dir)
    if len(frames_by_mode) == 2:
        pair = zip(frames_by_mode["baseline"], frames_by_mode["proposed"])
        for n, (a, b) in enumerate(pair):
            print(f"frame {n:4d}  mse(baseline, proposed) = {mse(a, b):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradient-weave",
        description="Illumination-aware video compositing with MVC cloning and sampled matting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="composite a source sequence into a target sequence")
    _add_run_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_gen = sub.add_parser("gen-synthetic", help="write a synthetic scene with ground truth")
    p_gen.add_argument("output_dir", type=Path)
    p_gen.add_argument("--width", type=int, default=96)
    p_gen.add_argument("--height", type=int, default=96)
    p_gen.add_argument("--radius", type=float, default=20.0, help="disc (hand) radius")
    p_gen.add_argument("--band", type=float, default=5.0, help="width of the Unknown band")
    p_gen.add_argument("--translation", type=int, nargs=2, default=(1, 0), metavar=("DX", "DY"))
    p_gen.add_argument("--frames", type=int, default=10)
    p_gen.add_argument("--illumination", type=float, default=1.5, help="target brightness factor")
    p_gen.add_argument("--noise", type=float, default=0.01, help="per-frame noise std")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--suite", type=int, default=0, metavar="N",
                       help="write the first N bundled suite scenes instead")
    p_gen.set_defaults(func=_cmd_gen)

    p_rep = sub.add_parser("report", help="re-score the frames of an earlier run")
    p_rep.add_argument("run_dir", type=Path, help="output directory of a previous run")
    p_rep.add_argument("--reference-dir", type=Path, required=True)
    p_rep.add_argument("--probe", type=int, nargs=2, metavar=("X", "Y"))
    p_rep.add_argument("--output", type=Path, help="write reports here instead of run_dir")
    p_rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"gradient-weave: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"gradient-weave: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
