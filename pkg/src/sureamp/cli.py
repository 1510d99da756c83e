"""Command-line entry point.

Subcommands: mask, recon, heatmap, eval, selftest. Every run is a pure
function of the resolved configuration and input files, so reruns with the
same seed produce byte-identical outputs. All products land under --out
together with a manifest.json listing files and the config hash.

Exit codes: 0 success, 2 usage/config error, 3 numerical failure.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .amp import amp_run
from .colored import vd_recon_approx
from .denoisers import WaveletThresholdDenoiser
from .grids import sample_gaussian_grid
from .io import load_pgm, read_grid, write_grid
from .metrics import psnr
from .noise import White
from .operators import make_gaussian_operator, make_vd_mask
from .phantoms import blocks_phantom
from .plugin_client import PluginDenoiser, PluginError
from .rng import SeededRng
from .uncertainty import (SureConfig, divergence_field, gsure_heatmap,
                          heatmap_discrepancy, mse_heatmap, probe_eps,
                          sure_heatmap, write_heatmap_csv)
from .wavelets import WaveletSpec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _config_hash(config: dict) -> str:
    return hashlib.sha256(_canonical_json(config).encode()).hexdigest()


def _write_manifest(out: Path, command: str, config: dict, files: dict):
    # the output location is not part of the run's semantics: the same
    # config written to two directories must produce identical bytes
    config = {k: v for k, v in config.items() if k != "out"}
    manifest = {
        "command": command,
        "config": config,
        "config_hash": _config_hash(config),
        "files": files,
        "version": __version__,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _load_image(spec: str) -> np.ndarray:
    if spec.startswith("phantom:"):
        dims = spec.split(":", 1)[1]
        h, _, w = dims.partition("x")
        w = w or h
        return blocks_phantom(int(h), int(w))
    path = Path(spec)
    if not path.exists():
        raise ValueError(f"image {spec!r} not found")
    if path.suffix == ".grd":
        return read_grid(path)
    return load_pgm(path)


def _make_denoiser(spec: str, c: float):
    if spec in ("soft", "subband"):
        return WaveletThresholdDenoiser(c=c, mode="fixed")
    if spec == "sure-shrink":
        return WaveletThresholdDenoiser(mode="sure")
    if spec.startswith("plugin:"):
        return PluginDenoiser(spec.split(":", 1)[1])
    raise ValueError(
        f"unknown denoiser {spec!r}; expected soft|subband|sure-shrink|plugin:<cmd>")


def _resolve(args, defaults: dict) -> dict:
    """Layer config file values and explicit flags over the defaults."""
    config = dict(defaults)
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text())
        unknown = set(loaded) - set(defaults)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def _maybe_print_config(args, config: dict) -> bool:
    if getattr(args, "print_config", False):
        print(_canonical_json(config))
        return True
    return False


# ---------------------------------------------------------------- mask --

_MASK_DEFAULTS = dict(seed=0, height=320, width=320, rate=0.25, degree=6,
                      center_fraction=0.02, out="out")


def cmd_mask(args) -> int:
    config = _resolve(args, _MASK_DEFAULTS)
    if _maybe_print_config(args, config):
        return EXIT_OK
    op = make_vd_mask(SeededRng(config["seed"], 10), config["height"],
                      config["width"], config["rate"], config["degree"],
                      config["center_fraction"])
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_grid(out / "mask.grd", op.mask.astype(np.float64))
    write_grid(out / "prob.grd", op.prob)
    _write_manifest(out, "mask", config,
                    {"mask": "mask.grd", "prob": "prob.grd"})
    print(f"selected {op.m} of {op.h * op.w} k-space locations "
          f"({op.m / (op.h * op.w):.4f})")
    return EXIT_OK


# --------------------------------------------------------------- recon --

_RECON_DEFAULTS = dict(seed=0, image="phantom:64x64", measure="gaussian",
                       rate=0.4, snr_db=30.0, denoiser="soft",
                       threshold_c=3.0, T=12, K=1, degree=6,
                       center_fraction=0.02, out="out")


def _measurement_noise(rng, y0, snr_db, complex):
    power = float(np.sum(np.abs(y0) ** 2))
    target = power * 10 ** (-snr_db / 10.0)
    sigma = np.sqrt(target / y0.size)
    noise = sample_gaussian_grid(rng, 1, y0.size, sigma, complex=complex)
    return y0 + noise.ravel()


def cmd_recon(args) -> int:
    config = _resolve(args, _RECON_DEFAULTS)
    if _maybe_print_config(args, config):
        return EXIT_OK
    rng = SeededRng(config["seed"])
    x_true = _load_image(config["image"])
    h, w = x_true.shape
    if not 0 < config["rate"] < 1:
        raise ValueError(f"rate must lie in (0,1), got {config['rate']}")
    denoiser = _make_denoiser(config["denoiser"], config["threshold_c"])
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    sidecar = {"measure": config["measure"], "denoiser": config["denoiser"],
               "threshold_c": config["threshold_c"], "seed": config["seed"],
               "snr_db": config["snr_db"], "rate": config["rate"],
               "h": h, "w": w}

    if config["measure"] == "gaussian":
        x_true = np.real(x_true)
        m = int(round(config["rate"] * h * w))
        op = make_gaussian_operator(rng.substream(0), m, (h, w))
        y = _measurement_noise(rng.substream(1), op.forward(x_true),
                               config["snr_db"], complex=False)
        result = amp_run(op, y, denoiser, T=config["T"],
                         rng=rng.substream(2), x_true=x_true, K=config["K"])
        sidecar["sigma_hat"] = result.sigma_hat
        baseline = psnr(op.adjoint(y), x_true)
    elif config["measure"] == "fourier":
        try:
            WaveletSpec().check_dims(h, w)
        except ValueError as exc:
            raise ValueError(
                f"{exc}; crop or pad the image so both dims are multiples of 16"
            ) from exc
        op = make_vd_mask(rng.substream(0), h, w, config["rate"],
                          config["degree"], config["center_fraction"])
        x_true = x_true.astype(np.complex128)
        y = _measurement_noise(rng.substream(1), op.forward(x_true),
                               config["snr_db"], complex=True)
        result = vd_recon_approx(op, y, denoiser, T=config["T"],
                                 rng=rng.substream(2), x_true=x_true)
        sidecar["tau"] = [float(t) for t in result.tau]
        sidecar["approximate_loop"] = True
        baseline = psnr(op.adjoint(y), x_true)
        write_grid(out / "mask.grd", op.mask.astype(np.float64))
        write_grid(out / "prob.grd", op.prob)
        files.update({"mask": "mask.grd", "prob": "prob.grd"})
    else:
        raise ValueError(f"unknown measurement kind {config['measure']!r}")

    write_grid(out / "xhat.grd", result.x)
    write_grid(out / "r.grd", result.r)
    write_grid(out / "truth.grd", x_true)
    (out / "recon.json").write_text(json.dumps(sidecar, sort_keys=True,
                                               indent=2) + "\n")
    files.update({"xhat": "xhat.grd", "r": "r.grd", "truth": "truth.grd",
                  "sidecar": "recon.json"})
    if config["measure"] == "gaussian":
        result.report.to_csv(out / "report.csv")
        files["report"] = "report.csv"
    else:
        with open(out / "report.csv", "w") as fh:
            fh.write("iteration,pred_noise_energy,psnr\n")
            for row in result.history:
                fh.write(f"{row[0]},{row[1]!r},{row[2]!r}\n")
        files["report"] = "report.csv"
    _write_manifest(out, "recon", config, files)
    final = psnr(result.x, x_true)
    print(f"reconstruction PSNR {final:.2f} dB (adjoint baseline "
          f"{baseline:.2f} dB); outputs in {out}")
    return EXIT_OK


# ------------------------------------------------------------- heatmap --

_HEATMAP_DEFAULTS = dict(recon_dir="out", patch=48, stride=None, K=2, seed=0,
                         export_clamped=False, out="out")


def _read_recon_dir(recon_dir: Path):
    sidecar_path = recon_dir / "recon.json"
    if not sidecar_path.exists():
        raise ValueError(
            f"missing sidecar {sidecar_path}; run `sureamp recon` first")
    sidecar = json.loads(sidecar_path.read_text())
    r = read_grid(recon_dir / "r.grd")
    xhat = read_grid(recon_dir / "xhat.grd")
    return sidecar, r, xhat


def cmd_heatmap(args) -> int:
    config = _resolve(args, _HEATMAP_DEFAULTS)
    if _maybe_print_config(args, config):
        return EXIT_OK
    recon_dir = Path(config["recon_dir"])
    sidecar, r, xhat = _read_recon_dir(recon_dir)
    patch = min(config["patch"], min(r.shape))
    cfg = SureConfig(patch=patch, stride=config["stride"], K=config["K"])
    denoiser = _make_denoiser(sidecar["denoiser"],
                              sidecar.get("threshold_c", 3.0))
    rng = SeededRng(config["seed"], 20)
    if "sigma_hat" in sidecar:
        field = divergence_field(denoiser, r, White(sidecar["sigma_hat"]),
                                 K=cfg.K, eps=probe_eps(r, cfg.eps_floor),
                                 rng=rng)
        hm = sure_heatmap(r, xhat, field, sidecar["sigma_hat"], cfg)
    elif "tau" in sidecar:
        hm = gsure_heatmap(r, xhat, denoiser,
                           np.asarray(sidecar["tau"]), rng, cfg=cfg)
    else:
        raise ValueError("sidecar has neither sigma_hat nor tau")
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_grid(out / "heatmap.grd", hm.values)
    write_grid(out / "coverage.grd", hm.coverage.astype(np.float64))
    write_heatmap_csv(out / "heatmap.csv", hm)
    files = {"heatmap": "heatmap.grd", "coverage": "coverage.grd",
             "heatmap_csv": "heatmap.csv"}
    if config["export_clamped"]:
        write_grid(out / "heatmap_clamped.grd", np.maximum(hm.values, 0.0))
        files["heatmap_clamped"] = "heatmap_clamped.grd"
    _write_manifest(out, "heatmap", config, files)
    print(f"heatmap mean {float(np.mean(hm.values)):.6g} "
          f"(patch {cfg.patch}, stride {cfg.resolved_stride()}, K {cfg.K})")
    return EXIT_OK


# ---------------------------------------------------------------- eval --

_EVAL_DEFAULTS = dict(recon_dir="out", truth=None, metric="normalized-abs",
                      seed=0, out="out")

_EVAL_PATCHES = (8, 16, 32, 48)
_EVAL_SAMPLES = (1, 2, 3)


def cmd_eval(args) -> int:
    config = _resolve(args, _EVAL_DEFAULTS)
    if _maybe_print_config(args, config):
        return EXIT_OK
    recon_dir = Path(config["recon_dir"])
    sidecar, r, xhat = _read_recon_dir(recon_dir)
    if config["truth"]:
        x_true = _load_image(config["truth"])
    elif (recon_dir / "truth.grd").exists():
        x_true = read_grid(recon_dir / "truth.grd")
    else:
        raise ValueError("ground truth needed: pass --truth")
    denoiser = _make_denoiser(sidecar["denoiser"],
                              sidecar.get("threshold_c", 3.0))
    rng = SeededRng(config["seed"], 21)
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for patch in _EVAL_PATCHES:
        if patch > min(r.shape):
            continue
        for K in _EVAL_SAMPLES:
            cfg = SureConfig(patch=patch, K=K)
            if "sigma_hat" in sidecar:
                field = divergence_field(denoiser, r, White(sidecar["sigma_hat"]),
                                         K=K, eps=probe_eps(r, cfg.eps_floor),
                                         rng=rng)
                hm = sure_heatmap(r, xhat, field, sidecar["sigma_hat"], cfg)
            else:
                hm = gsure_heatmap(r, xhat, denoiser,
                                   np.asarray(sidecar["tau"]), rng, cfg=cfg)
            truth_hm = mse_heatmap(xhat, x_true, cfg)
            rows.append((patch, K,
                         heatmap_discrepancy(hm, truth_hm, config["metric"])))
    path = out / "discrepancy.csv"
    with open(path, "w") as fh:
        fh.write("patch,K,discrepancy\n")
        for patch, K, value in rows:
            fh.write(f"{patch},{K},{value!r}\n")
    _write_manifest(out, "eval", config, {"discrepancy": "discrepancy.csv"})
    print(f"wrote {len(rows)} sweep rows to {path}")
    return EXIT_OK


# ------------------------------------------------------------ selftest --

def _selftest_checks():
    from .wavelets import dwt2, idwt2
    rng = SeededRng(7)
    x = rng.substream(1).standard_normal((64, 64))

    coeffs = dwt2(x)
    yield "wavelet perfect reconstruction", \
        float(np.max(np.abs(idwt2(coeffs) - x))) < 1e-10
    yield "wavelet Parseval", \
        abs(np.sum(coeffs ** 2) - np.sum(x ** 2)) < 1e-10 * np.sum(x ** 2)

    op = make_gaussian_operator(rng.substream(2), 128, (16, 16))
    u = rng.substream(3).standard_normal((16, 16))
    v = rng.substream(4).standard_normal(128)
    lhs = np.dot(op.forward(u), v)
    rhs = np.sum(u * op.adjoint(v))
    yield "dense adjoint dot-test", abs(lhs - rhs) <= 1e-12 * abs(lhs)

    fop = make_vd_mask(rng.substream(5), 64, 64, 0.3)
    uc = rng.substream(6).standard_normal((64, 64)) \
        + 1j * rng.substream(7).standard_normal((64, 64))
    vc = rng.substream(8).standard_normal(fop.m) \
        + 1j * rng.substream(9).standard_normal(fop.m)
    lhs = np.vdot(vc, fop.forward(uc))
    rhs = np.vdot(fop.adjoint(vc), uc)
    yield "fourier adjoint dot-test", abs(lhs - rhs) <= 1e-10 * abs(lhs)
    yield "mask popcount exact", fop.m == round(0.3 * 64 * 64)

    again = make_vd_mask(rng.substream(5), 64, 64, 0.3)
    yield "mask determinism", bool(np.array_equal(fop.mask, again.mask))

    sigma = 0.2
    noisy = x + sample_gaussian_grid(rng.substream(10), 64, 64, sigma)
    identity = lambda grid, noise: grid
    field = divergence_field(identity, noisy, White(sigma), K=2,
                             rng=rng.substream(11))
    from .uncertainty import sure_global
    s = sure_global(noisy, identity(noisy, None), field, sigma)
    yield "identity-denoiser SURE equals sigma^2", \
        abs(s - sigma ** 2) <= 1e-9 * sigma ** 2

    den = WaveletThresholdDenoiser(c=2.0)
    xhat = den.denoise(noisy, White(sigma))
    white_hm = sure_heatmap(noisy, xhat, divergence_field(
        den, noisy, White(sigma), K=2, rng=rng.substream(12)), sigma,
        SureConfig(patch=32))
    tau = np.full(13, sigma ** 2)
    colored_hm = gsure_heatmap(noisy, xhat, den, tau, rng.substream(12),
                               cfg=SureConfig(patch=32))
    diff = float(np.max(np.abs(white_hm.values - colored_hm.values)))
    yield "white/colored reduction", diff < 1e-10

    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        p = Path(tmp) / "grid.grd"
        write_grid(p, x)
        blob = p.read_bytes()
        write_grid(p, read_grid(p))
        yield "grid file round-trip", p.read_bytes() == blob


def cmd_selftest(args) -> int:
    failed = 0
    for name, ok in _selftest_checks():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failed += 0 if ok else 1
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


# ---------------------------------------------------------------- main --

def _add_common(parser):
    parser.add_argument("--config", help="JSON config file (flags override)")
    parser.add_argument("--print-config", action="store_true",
                        help="print the fully-resolved config and exit")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sureamp",
        description="compressive-sensing reconstruction with SURE/GSURE "
                    "uncertainty heatmaps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mask", help="generate a variable-density Fourier mask")
    _add_common(p)
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--rate", type=float)
    p.add_argument("--degree", type=int)
    p.add_argument("--center-fraction", dest="center_fraction", type=float)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("recon", help="reconstruct an image from measurements")
    _add_common(p)
    p.add_argument("--image", help="PGM/GRD path or phantom:HxW")
    p.add_argument("--measure", choices=["gaussian", "fourier"])
    p.add_argument("--rate", type=float)
    p.add_argument("--snr-db", dest="snr_db", type=float)
    p.add_argument("--denoiser",
                   help="soft|subband|sure-shrink|plugin:<command>")
    p.add_argument("--threshold-c", dest="threshold_c", type=float)
    p.add_argument("--T", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--center-fraction", dest="center_fraction", type=float)
    p.set_defaults(func=cmd_recon)

    p = sub.add_parser("heatmap", help="risk heatmap for a recon directory")
    _add_common(p)
    p.add_argument("--recon-dir", dest="recon_dir")
    p.add_argument("--patch", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--export-clamped", dest="export_clamped",
                   action="store_true", default=None)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("eval", help="patch/K accuracy sweep against true MSE")
    _add_common(p)
    p.add_argument("--recon-dir", dest="recon_dir")
    p.add_argument("--truth", help="ground-truth image (defaults to the "
                                   "truth.grd saved by recon)")
    p.add_argument("--metric", choices=["normalized-abs", "squared"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("selftest", help="run the built-in invariant suite")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, PluginError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
