"""Command-line entry point.

Exit codes: 0 success, 1 verification or training failure, 2 usage or data error.
``ADEQNN_THREADS`` caps evaluation threads (default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from adeqnn import circuit, datasets, metrics, qcore, verify
from adeqnn.circuit import NullPostSelection
from adeqnn.train import RunRecord, ShotSchedule

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class TrainingFailure(Exception):
    pass


def _train(fn, *a, **kw):
    """Run a training call; numerical failures become exit status 1."""
    try:
        return fn(*a, **kw)
    except (NullPostSelection, FloatingPointError, ValueError, np.linalg.LinAlgError) as exc:
        raise TrainingFailure(f"{type(exc).__name__}: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- serialisation


def fmt(v: float) -> str:
    return f"{float(v):.17g}"


def params_json(values, extra: dict | None = None) -> str:
    """Checkpoint text with every value written to 17 significant digits."""
    arr = np.atleast_2d(np.asarray(values, dtype=float))
    rows = ",\n    ".join("[" + ", ".join(fmt(v) for v in row) + "]" for row in arr)
    head = {
        "layout_version": circuit.LAYOUT_VERSION,
        "layout": [[name, n] for name, n in circuit.LAYOUT],
        **(extra or {}),
    }
    body = json.dumps(head, indent=2)[:-2]
    return body + ',\n  "values": [\n    ' + rows + "\n  ]\n}\n"


def load_params(path: str | Path) -> tuple[dict, np.ndarray]:
    d = json.loads(Path(path).read_text())
    if d.get("layout_version") != circuit.LAYOUT_VERSION:
        raise ValueError(f"{path}: layout version {d.get('layout_version')!r} is not {circuit.LAYOUT_VERSION}")
    return d, np.asarray(d["values"], dtype=float)


def history_csv(record: RunRecord, prefix: dict | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = list(prefix or {})
    w.writerow(cols + ["iteration", "cost", "shots", "metric"])
    for h in record.history:
        w.writerow([prefix[c] for c in cols] + [h.iteration, fmt(h.cost), h.shots, fmt(h.metric)])
    return buf.getvalue()


def rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (int, np.integer, str)) else fmt(v) for v in row])
    return buf.getvalue()


def pgm_bytes(image: np.ndarray) -> bytes:
    """8-bit binary PGM (P5) of an 8x8 image with pixel values in ``[0, 1]``."""
    pix = np.clip(np.round(np.asarray(image, dtype=float).reshape(8, 8) * 255), 0, 255).astype(np.uint8)
    return b"P5\n8 8\n255\n" + pix.tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    head, w, h, maxval, rest = data.split(maxsplit=4)
    if head != b"P5":
        raise ValueError("not a binary PGM")
    return np.frombuffer(rest, dtype=np.uint8).reshape(int(h), int(w)) / int(maxval)


class RunDirectory:
    """Writes a run's files; the directory is created on the first write."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def write(self, name: str, content: str | bytes) -> Path:
        target = self.path / name
        target.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, bytes):
            target.write_bytes(content)
        else:
            target.write_text(content, encoding="utf-8", newline="\n")
        return target

    def write_json(self, name: str, obj) -> Path:
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _out_dir(path: str) -> RunDirectory:
    p = Path(path)
    if p.exists() and not p.is_dir():
        raise UsageError(f"--out {path} exists and is not a directory")
    return RunDirectory(p)


def threads() -> int:
    raw = os.environ.get("ADEQNN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"ADEQNN_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"ADEQNN_THREADS must be a positive integer, got {raw!r}")
    return n


def _config(args: argparse.Namespace) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    d["layout_version"] = circuit.LAYOUT_VERSION
    return d


def _timing(record: RunRecord) -> str:
    return rows_csv(["iteration", "seconds"], [(h.iteration, t) for h, t in zip(record.history, record.wall_times)])


# ---------------------------------------------------------------- classify


def cmd_classify(args) -> int:
    from adeqnn.tasks.classification import ClassifyHyper, load_task, run_classification, task_config

    workers = threads()
    if args.epochs is not None and args.epochs < 0:
        raise UsageError("--epochs must be >= 0")
    if args.batch_size is not None and args.batch_size < 1:
        raise UsageError("--batch-size must be >= 1")
    if args.shots_s0 < 1 or args.shots_doublings < 0:
        raise UsageError("--shots-s0 must be >= 1 and --shots-doublings >= 0")
    if args.dataset == "glass" and args.data is not None and not Path(args.data).is_file():
        raise FileNotFoundError(f"glass data file not found: {args.data}")
    out = _out_dir(args.out)
    data = load_task(args.dataset, args.seed, args.data)
    cfg = task_config(args.dataset, args.variant, args.mode)
    defaults = ClassifyHyper.for_task(args.dataset)
    hyper = ClassifyHyper.for_task(
        args.dataset,
        epochs=defaults.epochs if args.epochs is None else args.epochs,
        batch_size=defaults.batch_size if args.batch_size is None else args.batch_size,
        shots_s0=args.shots_s0,
        shots_doublings=args.shots_doublings,
    )
    res = _train(run_classification, args.dataset, cfg, hyper, args.seed, data=data, workers=workers)

    out.write_json("config.json", _config(args))
    out.write("params.json", params_json(res.record.final_params, {"variant": args.variant}))
    out.write("history.csv", history_csv(res.record))
    out.write("timing.csv", _timing(res.record))
    k = data[0].n_classes
    out.write_json(
        "metrics.json",
        {
            "train_accuracy": res.train_accuracy,
            "test_accuracy": res.test_accuracy,
            "confusion_matrix": res.confusion.tolist(),
            "iterations": len(res.record.history),
        },
    )
    out.write("exports/train.csv", data[0].to_csv())
    out.write("exports/test.csv", data[1].to_csv())
    out.write("exports/confusion.csv", rows_csv([f"pred{j}" for j in range(k)], res.confusion.tolist()))
    if res.grid is not None:
        header = ["x", "y"] + [f"score{j}" for j in range(k)] + ["pred"]
        rows = [list(r[:-1]) + [int(r[-1])] for r in res.grid]
        out.write("exports/boundary.csv", rows_csv(header, rows))
    print(f"train_accuracy {res.train_accuracy:.6f}")
    print(f"test_accuracy {res.test_accuracy:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------- qgan


def cmd_qgan(args) -> int:
    from adeqnn.tasks.qgan import QganHyper, train_qgan

    threads()
    if args.iters < 0 or args.batch < 1:
        raise UsageError("--iters must be >= 0 and --batch >= 1")
    path = args.data
    if path is not None and not Path(path).is_file():
        raise FileNotFoundError(f"digits file not found: {path}")
    out = _out_dir(args.out)
    hyper = QganHyper(iters=args.iters, batch=args.batch, exact=args.mode == "exact")
    res = _train(train_qgan, args.digit, hyper, args.seed, path)

    out.write_json("config.json", _config(args))
    out.write("params.json", params_json(np.reshape(res.record.final_params, (4, -1)), {"patches": 4}))
    out.write("history.csv", history_csv(res.record))
    rows = [
        (i, r.critic_loss, r.generator_loss, r.wasserstein_estimate, r.gradient_penalty, w)
        for i, (r, w) in enumerate(zip(res.reports, res.eval_wasserstein))
    ]
    header = ["iteration", "critic_loss", "generator_loss", "wasserstein_batch", "gradient_penalty", "wasserstein_eval"]
    out.write("exports/wasserstein.csv", rows_csv(header, rows))
    for it, imgs in res.snapshots.items():
        for k, img in enumerate(imgs):
            out.write(f"exports/sample_{it:04d}_{k}.pgm", pgm_bytes(img))
            out.write(f"exports/sample_{it:04d}_{k}.csv", rows_csv([f"c{j}" for j in range(8)], img.reshape(8, 8)))
    out.write("exports/prototype.pgm", pgm_bytes(res.prototype))
    w = res.eval_wasserstein
    m = {
        "ssim_vs_prototype": res.ssim_vs_prototype,
        "ssim_vs_nearest": res.ssim_vs_nearest,
        "iterations": len(res.record.history),
        "wasserstein_eval_iter10": w[9] if len(w) >= 10 else None,
        "wasserstein_eval_final": w[-1] if w else None,
    }
    out.write_json("metrics.json", m)
    print(f"ssim_vs_prototype {res.ssim_vs_prototype:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------- qgdm


def read_hamiltonian(path: str | Path) -> np.ndarray:
    """4x4 Hermitian matrix from CSV: four complex columns or eight interleaved re,im columns."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"hamiltonian file not found: {p}")
    rows = []
    for line in p.read_text().strip().splitlines():
        parts = [s.strip() for s in line.split(",")]
        if len(parts) == 8:
            rows.append([complex(float(parts[2 * k]), float(parts[2 * k + 1])) for k in range(4)])
        elif len(parts) == 4:
            rows.append([complex(s.replace("i", "j")) for s in parts])
        else:
            raise ValueError(f"{p}: expected 4 or 8 columns per row")
    h = np.array(rows, dtype=complex)
    if h.shape != (4, 4):
        raise ValueError(f"{p}: expected a 4x4 matrix, got {h.shape}")
    dev = np.max(np.abs(h - h.conj().T))
    if dev > 1e-9:
        raise ValueError(f"{p}: matrix is not Hermitian (deviation {dev:.3e})")
    return h


def cmd_qgdm(args) -> int:
    from adeqnn.tasks.qgdm import QgdmHyper, train_qgdm
    from adeqnn.tasks.tomography import density_to_csv

    threads()
    if args.steps < 1 or args.beta < 0 or args.iters < 0:
        raise UsageError("--steps must be >= 1, --beta >= 0, --iters >= 0")
    h = read_hamiltonian(args.hamiltonian) if args.hamiltonian else None
    out = _out_dir(args.out)
    target = datasets.gibbs_state(h, args.beta)
    exact = args.mode == "exact"
    hyper = QgdmHyper(
        iters=args.iters,
        exact=exact,
        shots=None if exact else ShotSchedule(args.shots_s0, args.shots_doublings, max(args.iters, 1)),
    )
    steps, final = _train(train_qgdm, target, args.steps, args.variant, args.seed, hyper)

    out.write_json("config.json", _config(args))
    out.write("params.json", params_json([s.params for s in steps], {"steps": [s.t for s in steps]}))
    parts = [history_csv(s.record, {"step": s.t}) for s in steps]
    out.write("history.csv", parts[0] + "".join(p.split("\n", 1)[1] for p in parts[1:]))
    traj = [target] + datasets.forward_diffuse(target, datasets.linear_schedule(args.steps))
    for t, rho in enumerate(traj):
        out.write(f"exports/forward_t{t}.csv", density_to_csv(rho))
    for s in steps:
        out.write(f"exports/denoised_t{s.t - 1}.csv", density_to_csv(s.output))
    out.write("exports/final.csv", density_to_csv(final))
    final_f = qcore.uhlmann_fidelity(final, target)
    out.write_json(
        "metrics.json",
        {
            "final_fidelity": final_f,
            "step_fidelity": [s.achieved_fidelity for s in steps],
            "target_fidelity": [s.target_fidelity for s in steps],
            "steps": [s.t for s in steps],
        },
    )
    for s in steps:
        print(f"step {s.t}: fidelity to step target {s.achieved_fidelity:.6f}, to Gibbs target {s.target_fidelity:.6f}")
    print(f"final_fidelity {final_f:.6f}")
    return EXIT_OK


# ---------------------------------------------------------------- gate-check


def cmd_gate_check(args) -> int:
    table = circuit.cccx_truth_table()
    fid = metrics.truth_table_fidelity(table, circuit.ideal_cccx_table())
    _, success = circuit.apply_mcry(qcore.basis_state(0), circuit.cccz_angles())
    labels = [format(b, "04b") for b in range(16)]
    text = rows_csv(["out\\in"] + labels, [[labels[r]] + list(table[r]) for r in range(16)])
    if args.out:
        out = _out_dir(args.out)
        out.write("exports/cccx_truth_table.csv", text)
        out.write_json("metrics.json", {"cccx_fidelity": fid, "cccz_success_probability": float(success)})
        out.write_json("config.json", _config(args))
    else:
        sys.stdout.write(text)
    print(f"{fid:.6f}")
    print(f"{float(success):.6f}")
    return EXIT_OK


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    return EXIT_OK if verify.run_all(args.inject_fault) else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="adeqnn", description="ADE-QNN simulator and experiments")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="train a classifier")
    c.add_argument("--dataset", choices=("circle", "spiral", "glass"), required=True)
    c.add_argument("--variant", choices=("ade", "baseline"), default="ade")
    c.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--epochs", type=int, default=None)
    c.add_argument("--batch-size", type=int, default=None)
    c.add_argument("--shots-s0", type=int, default=256)
    c.add_argument("--shots-doublings", type=int, default=5)
    c.add_argument("--data", default=None, help="glass.data path (default: bundled copy)")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_classify)

    g = sub.add_parser("qgan", help="train the patched quantum GAN")
    g.add_argument("--digit", type=int, choices=(0, 1), default=0)
    g.add_argument("--iters", type=int, default=300)
    g.add_argument("--batch", type=int, default=4)
    g.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--data", default=None, help="digits CSV path (default: bundled copy)")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_qgan)

    d = sub.add_parser("qgdm", help="train a diffusion denoiser chain for a Gibbs state")
    d.add_argument("--variant", choices=("ade", "baseline"), default="ade")
    d.add_argument("--steps", type=int, default=1)
    d.add_argument("--beta", type=float, default=1.0)
    d.add_argument("--hamiltonian", default=None, help="CSV file with a 4x4 Hermitian matrix")
    d.add_argument("--iters", type=int, default=300)
    d.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    d.add_argument("--shots-s0", type=int, default=256)
    d.add_argument("--shots-doublings", type=int, default=5)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_qgdm)

    k = sub.add_parser("gate-check", help="CCCX truth table and CCCZ success probability")
    k.add_argument("--out", default=None)
    k.set_defaults(func=cmd_gate_check)

    v = sub.add_parser("verify", help="run the fast invariant suite")
    v.add_argument("--inject-fault", choices=verify.FAULTS, default=None, help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingFailure as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
