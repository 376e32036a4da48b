"""Experiment harness: preset experiments, JSON configs, JSON + CSV reports.

Each subcommand runs one family of preset experiments (construct, decay,
gradstats, pgd, single, hemisphere, alpha, walk, coupled); `all` runs every
preset plus a rerun-reproducibility comparison. Passing --config PATH
replaces the presets with the experiment specs in a JSON file (a spec
object or list of them); specs whose kind does not belong to the chosen
subcommand are rejected, while `all` accepts any kind.

Every experiment writes one JSON report (no timestamps: byte-identical on
re-run) and, where tabular output makes sense, one CSV per seed. CSV
files start with a `# generated-at:` comment line, then a header row and
comma-separated rows with floats at 17 significant digits and LF line
endings; bodies below the comment line are byte-identical across re-runs
of the same spec. Configuration comes only from flags and config files,
never from environment variables.

Exit status: 0 when every asserted check passed, 1 when any failed, 2 on
usage or config errors.
"""

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import rng
from .backend import K, get_backend
from .hypercube import CubePoint, SubsetMask
from .objectives import (
    grad_norm_gaussian_stats,
    linear_loss,
    linear_loss_grad,
    net_from_flat,
    neuron_from_flat,
    squared_loss_single,
    squared_loss_single_grad,
)
from .pgd import PgdConfig, coupled_divergence, gaussian_walk, run_pgd
from .relu_nets import (
    build_exact_parity_net,
    build_weak_single_neuron,
    forward_on_cube,
    parameter_norm,
)
from .threshold_fourier import (
    arccos_coeff,
    gaussian_avg_sq_coeff,
    hemisphere_overlap,
    hemisphere_overlap_mc,
    relu_sum_parity_coeff,
)

KINDS = (
    "construct-verify",
    "decay-sweep",
    "grad-stats",
    "pgd-run",
    "pgd-sweep",
    "single-neuron",
    "hemisphere-check",
    "alpha-check",
    "walk-baseline",
    "coupled",
)

# parameter schema per kind: every key an experiment may set, with defaults
KIND_PARAMS = {
    "construct-verify": {"d_min": 2, "d_max": 8},
    "decay-sweep": {
        "d": 16,
        "sizes": [4, 8, 12, 16],
        "sigma": 1.0,
        "num_samples": 500,
        "include_bias": False,
    },
    "grad-stats": {
        "n": 8,
        "d": 12,
        "sizes": [2, 4, 6, 8, 10, 12],
        "sigma": 0.5,
        "num_samples": 200,
        "fd_points": 100,
        "fd_n": 3,
        "fd_d": 8,
        "fd_h": 1e-5,
        "identity_samples": 200,
        "identity_d_max": 12,
    },
    "pgd-run": {
        "loss": "linear-onehidden",
        "d": 14,
        "n": 16,
        "subset": None,
        "subset_size": None,
        "eta": 0.05,
        "sigma": 0.1,
        "T": 1000,
        "record_every": 50,
    },
    "pgd-sweep": {
        "loss": "linear-onehidden",
        "d": 14,
        "n": 16,
        "sizes": [2, 14],
        "eta": 0.05,
        "sigma": 0.1,
        "T": 1000,
        "record_every": 50,
    },
    "single-neuron": {"sizes": [4, 6, 8, 10, 12, 14, 16], "closed_form_max": 40},
    "hemisphere-check": {"dims": [5, 10, 20], "num_pairs": 50, "num_samples": 20000},
    "alpha-check": {
        "j_max": 200,
        "recon_terms": 60,
        "recon_points": [0.5, -0.5],
        "recon_tol": 1e-6,
    },
    "walk-baseline": {
        "d": 10,
        "n": 4,
        "eta": 0.05,
        "sigma": 0.3,
        "T": 50,
        "num_seeds": 200,
        "tolerance": 0.2,
    },
    "coupled": {
        "loss": "linear-onehidden",
        "d": 14,
        "n": 16,
        "subset_size": 14,
        "eta": 0.05,
        "sigma": 0.1,
        "T": 1000,
        "eps": "auto",
    },
}

COMMAND_KINDS = {
    "construct": ("construct-verify",),
    "decay": ("decay-sweep",),
    "gradstats": ("grad-stats",),
    "pgd": ("pgd-run", "pgd-sweep"),
    "single": ("single-neuron",),
    "hemisphere": ("hemisphere-check",),
    "alpha": ("alpha-check",),
    "walk": ("walk-baseline",),
    "coupled": ("coupled",),
    "all": KINDS,
}

# substream index blocks within STREAM_CLI (one stream, disjoint index ranges)
_IDX_FD = 0  # finite-difference parameter points (block of 100000)
_IDX_IDENTITY = 100000  # identity-check weight draws
_IDX_PAIRS = 200000  # hemisphere pair selection


class ConfigError(Exception):
    pass


@dataclass
class ExperimentSpec:
    """One experiment: what to run, with which parameters and seeds."""

    name: str
    kind: str
    parameters: dict
    seeds: list
    output_path: Optional[str] = None


@dataclass
class ExperimentResult:
    name: str
    passed: bool
    json_path: str
    csv_paths: list
    checks: list


def resolve_parameters(kind: str, given: dict) -> dict:
    """Overlay user parameters on the kind's defaults; reject unknown keys."""
    if kind not in KIND_PARAMS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    params = {k: (list(v) if isinstance(v, list) else v) for k, v in KIND_PARAMS[kind].items()}
    for key, value in given.items():
        if key not in params:
            raise ConfigError(f"unknown parameter {key!r} for kind {kind!r}")
        params[key] = value
    return params


_SPEC_KEYS = {"name", "kind", "parameters", "seeds", "output_path"}


def _spec_from_obj(obj) -> ExperimentSpec:
    if not isinstance(obj, dict):
        raise ConfigError(f"experiment spec must be an object, got {type(obj).__name__}")
    for key in obj:
        if key not in _SPEC_KEYS:
            raise ConfigError(f"unknown spec key {key!r}")
    if "name" not in obj or not isinstance(obj["name"], str) or not obj["name"]:
        raise ConfigError("spec needs a nonempty string 'name'")
    if "kind" not in obj:
        raise ConfigError(f"spec {obj['name']!r} needs a 'kind'")
    kind = obj["kind"]
    if kind not in KINDS:
        raise ConfigError(f"spec {obj['name']!r}: unknown kind {kind!r}")
    seeds = obj.get("seeds") or [0]
    if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
        raise ConfigError(f"spec {obj['name']!r}: seeds must be a list of ints")
    params = obj.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError(f"spec {obj['name']!r}: parameters must be an object")
    return ExperimentSpec(
        name=obj["name"],
        kind=kind,
        parameters=resolve_parameters(kind, params),
        seeds=list(seeds),
        output_path=obj.get("output_path"),
    )


def parse_config(path: str) -> list:
    """Load experiment specs from a JSON file (one object or a list)."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    objs = raw if isinstance(raw, list) else [raw]
    specs = [_spec_from_obj(o) for o in objs]
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ConfigError("experiment names must be unique within a config")
    return specs


# ---------------------------------------------------------------------------
# report plumbing


def _check(name, passed, detail="", informational=False):
    return {
        "name": name,
        "passed": bool(passed),
        "informational": bool(informational),
        "detail": detail,
    }


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# generated-at: {datetime.now(timezone.utc).isoformat()}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(v) for v in row) + "\n")


def _subset_from_params(params, d) -> SubsetMask:
    subset = params.get("subset")
    size = params.get("subset_size")
    if subset is not None and size is not None:
        raise ConfigError("give either 'subset' or 'subset_size', not both")
    if subset is not None:
        return SubsetMask.from_indices(subset, d)
    if size is None:
        size = d
    return SubsetMask.first_k(size, d)


# ---------------------------------------------------------------------------
# kind runners: each returns (results, checks, csvs) where csvs is a list of
# (suffix, header, rows)


def _run_construct(params, seeds):
    d_min, d_max = params["d_min"], params["d_max"]
    if not 1 <= d_min <= d_max:
        raise ConfigError(f"need 1 <= d_min <= d_max, got {d_min}..{d_max}")
    if d_max > 14:
        raise ConfigError(f"d_max {d_max} too large for exhaustive subsets")
    num = 0
    bad_forward, bad_norm, bad_loss = [], [], []
    per_d = {}
    for d in range(d_min, d_max + 1):
        for bits in range(1, 1 << d):
            s = SubsetMask(bits, d)
            net = build_exact_parity_net(d, s)
            num += 1
            if not np.array_equal(forward_on_cube(net), K.parity_table(bits, d)):
                bad_forward.append((d, bits))
            if not parameter_norm(net) <= 6.0 * s.size**1.5:
                bad_norm.append((d, bits))
            if linear_loss(net, s) != -1.0:
                bad_loss.append((d, bits))
        per_d[str(d)] = (1 << d) - 1
    results = {"num_nets": num, "subsets_per_d": per_d}
    checks = [
        _check(
            "forward-equals-parity-everywhere",
            not bad_forward,
            f"{num - len(bad_forward)}/{num} nets exact",
        ),
        _check(
            "parameter-norm-bound",
            not bad_norm,
            f"norm <= 6|S|^1.5 for {num - len(bad_norm)}/{num}",
        ),
        _check(
            "linear-loss-is-minus-one",
            not bad_loss,
            f"F_S = -1 exactly for {num - len(bad_loss)}/{num}",
        ),
    ]
    return results, checks, []


def _run_decay(params, seeds):
    d = params["d"]
    sizes = params["sizes"]
    if sorted(sizes) != sizes or len(set(sizes)) != len(sizes):
        raise ConfigError("sizes must be strictly increasing")
    results, checks, csvs = {}, [], []
    for seed in seeds:
        reports = []
        rows = []
        for k in sizes:
            rep = gaussian_avg_sq_coeff(
                d,
                SubsetMask.first_k(k, d),
                params["sigma"],
                params["include_bias"],
                params["num_samples"],
                seed,
            )
            reports.append(rep)
            rows.append(
                (k, rep.estimate, rep.std_error, rep.bound_value, rep.bound_satisfied)
            )
            checks.append(
                _check(
                    f"decay-bound-seed{seed}-S{k}",
                    rep.estimate - 3.0 * rep.std_error <= rep.bound_value,
                    f"est {rep.estimate:.3e} (se {rep.std_error:.1e}) vs bound {rep.bound_value:.3e}",
                )
            )
        for a, b in zip(reports, reports[1:]):
            slack = 3.0 * math.hypot(a.std_error, b.std_error)
            checks.append(
                _check(
                    f"decay-monotone-seed{seed}-S{a.parameters['subset_size']}to{b.parameters['subset_size']}",
                    b.estimate - a.estimate <= slack,
                    f"{a.estimate:.3e} -> {b.estimate:.3e} (slack {slack:.1e})",
                )
            )
        results[f"seed{seed}"] = [r.to_json_dict() for r in reports]
        csvs.append(
            (
                f"seed{seed}",
                ("S_size", "estimate", "std_error", "bound_value", "satisfied"),
                rows,
            )
        )
    return results, checks, csvs


def _min_pre_activation_gap(W, b):
    gap = math.inf
    for j in range(W.shape[0]):
        gap = min(gap, float(np.min(np.abs(K.dot_table(W[j]) + b[j]))))
    return gap


def _central_diff(loss_of_flat, theta, h):
    fd = np.empty_like(theta)
    for i in range(theta.shape[0]):
        up = theta.copy()
        up[i] += h
        dn = theta.copy()
        dn[i] -= h
        fd[i] = (loss_of_flat(up) - loss_of_flat(dn)) / (2.0 * h)
    return fd


def _run_gradstats(params, seeds):
    n, d = params["n"], params["d"]
    h = params["fd_h"]
    fd_n, fd_d = params["fd_n"], params["fd_d"]
    results, checks, csvs = {}, [], []
    for seed in seeds:
        rows = []
        reports = []
        for k in params["sizes"]:
            rep = grad_norm_gaussian_stats(
                (n, d),
                SubsetMask.first_k(k, d),
                params["sigma"],
                params["num_samples"],
                seed,
            )
            reports.append(rep)
            rows.append((k, rep.estimate, rep.std_error, rep.bound_value))
            checks.append(
                _check(
                    f"gradnorm-bound-seed{seed}-S{k}",
                    rep.bound_satisfied,
                    f"E||grad|| {rep.estimate:.3e} vs exp(-|S|/9) {rep.bound_value:.3e}",
                    informational=True,
                )
            )
            checks.append(
                _check(
                    f"du-bound-seed{seed}-S{k}",
                    rep.parameters["du_bound_satisfied"],
                    f"E|dF/du| {rep.parameters['du_abs_mean']:.3e} vs "
                    f"5*d*sigma*exp(-|S|/8) {rep.parameters['du_bound_value']:.3e}",
                    informational=True,
                )
            )
        results[f"seed{seed}"] = [r.to_json_dict() for r in reports]
        csvs.append(
            (
                f"seed{seed}",
                ("S_size", "mean_grad_norm", "std_error", "bound_value"),
                rows,
            )
        )

        # finite-difference validation at generic points (no pre-activation
        # within 10h of a kink, where the losses are locally polynomial)
        s_fd = SubsetMask.first_k(min(4, fd_d), fd_d)
        worst_lin = 0.0
        worst_sq = 0.0
        accepted = 0
        attempt = 0
        while accepted < params["fd_points"]:
            if attempt >= 100 * params["fd_points"]:
                raise RuntimeError("generic-point rejection loop did not terminate")
            z = rng.substream(seed, rng.STREAM_CLI, _IDX_FD + attempt)
            attempt += 1
            theta = z.standard_normal(fd_n * (fd_d + 2))
            net = net_from_flat(theta, fd_n, fd_d)
            if _min_pre_activation_gap(net.W, net.b) <= 10.0 * h:
                continue
            theta1 = z.standard_normal(fd_d + 1)
            neuron = neuron_from_flat(theta1, 1)
            if _min_pre_activation_gap(neuron.w[None, :], np.array([neuron.b])) <= 10.0 * h:
                continue
            accepted += 1
            grad = linear_loss_grad(net, s_fd).flat()
            fd = _central_diff(
                lambda th: linear_loss(net_from_flat(th, fd_n, fd_d), s_fd), theta, h
            )
            worst_lin = max(worst_lin, float(np.max(np.abs(fd - grad))))

            grad1 = squared_loss_single_grad(neuron, s_fd).flat()
            fd1 = _central_diff(
                lambda th: squared_loss_single(neuron_from_flat(th, 1), s_fd), theta1, h
            )
            worst_sq = max(worst_sq, float(np.max(np.abs(fd1 - grad1))))
        checks.append(
            _check(
                f"fd-linear-seed{seed}",
                worst_lin <= 1e-6,
                f"max |fd - grad| = {worst_lin:.2e} over {accepted} generic points",
            )
        )
        checks.append(
            _check(
                f"fd-squared-seed{seed}",
                worst_sq <= 1e-6,
                f"max |fd - grad| = {worst_sq:.2e}",
            )
        )

        # E[[w.x]_+^2] = ||w||^2/2 identity
        worst_id = 0.0
        for i in range(params["identity_samples"]):
            di = 1 + i % params["identity_d_max"]
            w = rng.substream(seed, rng.STREAM_CLI, _IDX_IDENTITY + i).standard_normal(di)
            err = abs(K.relu_sq_mean(w, 0.0) - float(np.sum(w * w)) / 2.0)
            worst_id = max(worst_id, err)
        checks.append(
            _check(
                f"relu-square-identity-seed{seed}",
                worst_id <= 1e-10,
                f"max |E[[w.x]_+^2] - ||w||^2/2| = {worst_id:.2e}",
            )
        )
        results[f"seed{seed}-validation"] = {
            "fd_linear_max_err": worst_lin,
            "fd_squared_max_err": worst_sq,
            "identity_max_err": worst_id,
        }
    return results, checks, csvs


def _pgd_config(params, seed, s, n):
    return PgdConfig(
        eta=params["eta"],
        sigma=params["sigma"],
        T=params["T"],
        seed=seed,
        loss=params["loss"],
        s=s,
        n=n,
        record_every=params["record_every"],
    )


def _coerced_width(params):
    # squared-single is a one-neuron objective; record what actually ran
    if params["loss"] == "squared-single":
        params["n"] = 1
    return params["n"]


def _run_pgd_run(params, seeds):
    if params["loss"] not in ("linear-onehidden", "squared-single"):
        raise ConfigError(f"unknown loss {params['loss']!r}")
    d = params["d"]
    n = _coerced_width(params)
    s = _subset_from_params(params, d)
    results, checks, csvs = {}, [], []
    for seed in seeds:
        traj = run_pgd(_pgd_config(params, seed, s, n))
        ok = all(map(math.isfinite, traj.losses)) and all(
            map(math.isfinite, traj.grad_norms)
        )
        checks.append(
            _check(
                f"finite-trajectory-seed{seed}",
                ok,
                f"final loss {traj.losses[-1]:.6g}, final ||grad|| {traj.grad_norms[-1]:.3e}",
            )
        )
        results[f"seed{seed}"] = {
            "final_loss": traj.losses[-1],
            "final_grad_norm": traj.grad_norms[-1],
            "metadata": traj.metadata,
        }
        rows = list(zip(traj.steps, traj.losses, traj.grad_norms))
        csvs.append((f"seed{seed}", ("step", "loss", "grad_norm"), rows))
    return results, checks, csvs


def _run_pgd_sweep(params, seeds):
    loss_kind = params["loss"]
    if loss_kind not in ("linear-onehidden", "squared-single"):
        raise ConfigError(f"unknown loss {loss_kind!r}")
    d = params["d"]
    n = _coerced_width(params)
    sizes = params["sizes"]
    if len(sizes) < 2:
        raise ConfigError("pgd-sweep needs at least two subset sizes")
    results, checks, csvs = {}, [], []
    med_metric, med_grad = {}, {}
    # hardness metric per loss: linear uses |F(theta_T)| (the walk keeps it
    # near 0 when no signal reaches the gradient, and it blows up when one
    # does); squared uses the signed progress 1 - loss_T below the trivial
    # loss of the zero predictor (runs share noise across sizes, so the
    # comparison is paired)
    if loss_kind == "linear-onehidden":
        metric_of = abs
        metric_name = "median_abs_final_loss"
    else:
        metric_of = lambda v: 1.0 - v
        metric_name = "median_final_gap_from_one"
    for k in sizes:
        s = SubsetMask.first_k(k, d)
        metrics, all_grad_norms = [], []
        for seed in seeds:
            traj = run_pgd(_pgd_config(params, seed, s, n))
            metrics.append(metric_of(traj.losses[-1]))
            all_grad_norms.extend(traj.grad_norms)
            rows = list(zip(traj.steps, traj.losses, traj.grad_norms))
            csvs.append((f"S{k}_seed{seed}", ("step", "loss", "grad_norm"), rows))
        med_metric[k] = float(np.median(metrics))
        med_grad[k] = float(np.median(all_grad_norms))
        results[f"S{k}"] = {
            metric_name: med_metric[k],
            "median_grad_norm_along_runs": med_grad[k],
        }
    lo, hi = min(sizes), max(sizes)
    checks.append(
        _check(
            f"median-final-metric-S{hi}-le-S{lo}",
            med_metric[hi] <= med_metric[lo],
            f"{metric_name}: {med_metric[hi]:.3e} <= {med_metric[lo]:.3e}",
        )
    )
    checks.append(
        _check(
            f"median-grad-norm-S{hi}-le-S{lo}",
            med_grad[hi] <= med_grad[lo],
            f"{med_grad[hi]:.3e} <= {med_grad[lo]:.3e}",
            informational=loss_kind == "squared-single",
        )
    )
    return results, checks, csvs


def _run_single(params, seeds):
    checks = []
    results = {}
    for k in params["sizes"]:
        if k % 2 or k < 4:
            raise ConfigError(f"sizes must be even and >= 4, got {k}")
        s = SubsetMask.first_k(k, k)
        enum = K.relu_parity_mean(np.ones(k), 0.0, s.bits)
        closed = relu_sum_parity_coeff(k)
        checks.append(
            _check(
                f"relu-sum-coeff-closed-form-S{k}",
                abs(enum - closed) <= 1e-10,
                f"enum {enum:.12e} vs closed {closed:.12e}",
            )
        )
        neuron = build_weak_single_neuron(s)
        loss = squared_loss_single(neuron, s)
        bound = 1.0 - 1.0 / (8.0 * k * k)
        checks.append(
            _check(
                f"weak-loss-bound-S{k}",
                loss <= bound,
                f"loss {loss:.12f} <= {bound:.12f}",
            )
        )
        if k == 4:
            checks.append(
                _check(
                    "weak-loss-exact-S4",
                    loss == 1.0 - 3.0 / 128.0,
                    f"loss {loss!r} == 1 - 3/128",
                )
            )
        results[f"S{k}"] = {"coeff_enum": enum, "coeff_closed": closed, "loss": loss, "loss_bound": bound}
    bad_mag = [
        k
        for k in range(4, params["closed_form_max"] + 1, 2)
        if abs(relu_sum_parity_coeff(k)) < 1.0 / (4.0 * math.sqrt(k))
    ]
    checks.append(
        _check(
            "relu-sum-coeff-magnitude",
            not bad_mag,
            f"|coeff| >= 1/(4 sqrt(k)) for even k <= {params['closed_form_max']}",
        )
    )
    return results, checks, []


def _run_hemisphere(params, seeds):
    results, checks = {}, []
    pair_counter = 0
    for seed in seeds:
        worst_dev = 0.0
        failures = []
        for d in params["dims"]:
            x0 = CubePoint((1 << d) - 1, d)
            anti = CubePoint(0, d)
            if hemisphere_overlap(x0, x0) != 0.5:
                failures.append((d, "self"))
            if hemisphere_overlap(x0, anti) != 0.0:
                failures.append((d, "antipodal"))
            rep_anti = hemisphere_overlap_mc(x0, anti, params["num_samples"], seed)
            if rep_anti.estimate != 0.0:
                failures.append((d, "antipodal-mc"))
            for _ in range(params["num_pairs"]):
                g = rng.substream(seed, rng.STREAM_CLI, _IDX_PAIRS + pair_counter)
                x = CubePoint(int(g.integers(0, 1 << d)), d)
                y = CubePoint(int(g.integers(0, 1 << d)), d)
                rep = hemisphere_overlap_mc(
                    x, y, params["num_samples"], seed + pair_counter
                )
                pair_counter += 1
                dev = abs(rep.estimate - rep.bound_value)
                if rep.std_error > 0:
                    worst_dev = max(worst_dev, dev / rep.std_error)
                if not rep.bound_satisfied:
                    failures.append((d, x.bits, y.bits))
        checks.append(
            _check(
                f"hemisphere-4se-seed{seed}",
                not failures,
                f"worst |est-closed|/se = {worst_dev:.2f} over "
                f"{len(params['dims']) * params['num_pairs']} pairs; failures: {failures}",
            )
        )
        results[f"seed{seed}"] = {"worst_dev_se": worst_dev, "failures": failures}
    return results, checks, []


def _run_alpha(params, seeds):
    checks = []
    a1, a3, a5 = arccos_coeff(1), arccos_coeff(3), arccos_coeff(5)
    checks.append(
        _check(
            "alpha-frozen-values",
            a1 == 1.0 and abs(a3 - 1 / 6) <= 1e-12 and abs(a5 - 3 / 40) <= 1e-12,
            f"alpha_1={a1!r}, alpha_3={a3!r}, alpha_5={a5!r}",
        )
    )
    evens_zero = all(arccos_coeff(j) == 0.0 for j in range(2, params["j_max"] + 1, 2))
    checks.append(_check("alpha-even-zero", evens_zero, "alpha_j = 0 for even j"))
    worst = 0.0
    for u in params["recon_points"]:
        total = math.fsum(
            arccos_coeff(j) * u**j for j in range(1, 2 * params["recon_terms"], 2)
        )
        worst = max(worst, abs(math.pi / 2 - total - math.acos(u)))
    checks.append(
        _check(
            "alpha-reconstruction",
            worst <= params["recon_tol"],
            f"max |pi/2 - sum - arccos(u)| = {worst:.2e} with {params['recon_terms']} terms",
        )
    )
    bound_ok = all(
        arccos_coeff(j) < math.sqrt(2 / math.pi) * 2 * math.e / j**1.5
        for j in range(3, params["j_max"] + 1)
    )
    checks.append(
        _check(
            "alpha-tail-bound",
            bound_ok,
            f"alpha_j < sqrt(2/pi)*2e/j^1.5 for 3 <= j <= {params['j_max']}",
        )
    )
    results = {"alpha_1": a1, "alpha_3": a3, "alpha_5": a5, "recon_max_err": worst}
    return results, checks, []


def _run_walk(params, seeds):
    d, n = params["d"], params["n"]
    s = SubsetMask.first_k(d, d)
    target = (params["T"] + 1) * params["sigma"] ** 2
    results, checks, csvs = {}, [], []
    for base in seeds:
        finals = []
        first = None
        for i in range(params["num_seeds"]):
            cfg = PgdConfig(
                eta=params["eta"],
                sigma=params["sigma"],
                T=params["T"],
                seed=base + i,
                loss="linear-onehidden",
                s=s,
                n=n,
                record_every=max(1, params["T"]),
            )
            traj = gaussian_walk(cfg, damped=False)
            finals.append(traj.final_theta)
            if first is None:
                first = traj
        pooled = np.concatenate(finals)
        var = float(np.var(pooled, ddof=1))
        ratio = var / target
        checks.append(
            _check(
                f"walk-variance-seed{base}",
                abs(ratio - 1.0) <= params["tolerance"],
                f"pooled var {var:.4f} vs (T+1)sigma^2 = {target:.4f} "
                f"(ratio {ratio:.3f}, {pooled.size} values)",
            )
        )
        results[f"seed{base}"] = {
            "pooled_variance": var,
            "target": target,
            "ratio": ratio,
            "num_values": int(pooled.size),
            "final_loss_first_walk": first.losses[-1],
        }
        rows = list(zip(first.steps, first.losses, first.grad_norms))
        csvs.append((f"seed{base}", ("step", "loss", "grad_norm"), rows))
    return results, checks, csvs


def _run_coupled(params, seeds):
    if params["loss"] not in ("linear-onehidden", "squared-single"):
        raise ConfigError(f"unknown loss {params['loss']!r}")
    d = params["d"]
    n = _coerced_width(params)
    s = _subset_from_params(params, d)
    results, checks = {}, []
    for seed in seeds:
        cfg = _pgd_config({**params, "record_every": 1}, seed, s, n)
        rep0 = coupled_divergence(cfg, 0.0)
        checks.append(
            _check(
                f"coupled-eps0-identical-seed{seed}",
                rep0.max_param_dist == 0.0
                and rep0.final_param_dist == 0.0
                and rep0.final_loss_gap == 0.0,
                f"max dist {rep0.max_param_dist!r}, loss gap {rep0.final_loss_gap!r}",
            )
        )
        eps = params["eps"]
        if eps == "auto":
            eps = math.exp(-s.size / 18.0)
        rep = coupled_divergence(cfg, eps)
        again = coupled_divergence(cfg, eps)
        checks.append(
            _check(
                f"coupled-deterministic-seed{seed}",
                rep.final_loss_gap == again.final_loss_gap
                and rep.max_param_dist == again.max_param_dist,
                "re-run reproduces distances exactly",
            )
        )
        checks.append(
            _check(
                f"coupled-finite-seed{seed}",
                math.isfinite(rep.max_param_dist) and math.isfinite(rep.final_loss_gap),
                f"eps {eps:.4g}: max dist {rep.max_param_dist:.4e}, "
                f"final gap {rep.final_loss_gap:.4e}, tv proxy {rep.tv_proxy_bound:.4e}",
            )
        )
        results[f"seed{seed}"] = {"eps0": rep0.to_json_dict(), "eps": rep.to_json_dict()}
    return results, checks, []


KIND_RUNNERS = {
    "construct-verify": _run_construct,
    "decay-sweep": _run_decay,
    "grad-stats": _run_gradstats,
    "pgd-run": _run_pgd_run,
    "pgd-sweep": _run_pgd_sweep,
    "single-neuron": _run_single,
    "hemisphere-check": _run_hemisphere,
    "alpha-check": _run_alpha,
    "walk-baseline": _run_walk,
    "coupled": _run_coupled,
}


def run_experiment(spec: ExperimentSpec, out_dir: str, quiet: bool = False) -> ExperimentResult:
    """Run one experiment, write its JSON report and CSVs, return the outcome."""
    if spec.output_path:
        json_path = spec.output_path
        if not os.path.isabs(json_path):
            json_path = os.path.join(out_dir, json_path)
    else:
        json_path = os.path.join(out_dir, f"{spec.name}.json")
    os.makedirs(os.path.dirname(json_path) or ".", exist_ok=True)

    results, checks, csvs = KIND_RUNNERS[spec.kind](spec.parameters, spec.seeds)

    base, _ = os.path.splitext(json_path)
    csv_paths = []
    for suffix, header, rows in csvs:
        path = f"{base}_{suffix}.csv"
        _write_csv(path, header, rows)
        csv_paths.append(path)

    passed = all(c["passed"] for c in checks if not c["informational"])
    report = {
        "name": spec.name,
        "kind": spec.kind,
        "parameters": spec.parameters,
        "seeds": spec.seeds,
        "rng": rng.GENERATOR_NAME,
        "backend": get_backend(),
        "results": results,
        "checks": checks,
        "passed": passed,
        "csv_files": [os.path.basename(p) for p in csv_paths],
    }
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if not quiet:
        gating = [c for c in checks if not c["informational"]]
        n_ok = sum(c["passed"] for c in gating)
        print(
            f"{spec.name}: {'PASS' if passed else 'FAIL'} "
            f"({n_ok}/{len(gating)} checks) -> {json_path}"
        )
    if not passed:
        for c in checks:
            if not c["passed"] and not c["informational"]:
                print(f"  FAILED {c['name']}: {c['detail']}", file=sys.stderr)
    return ExperimentResult(
        name=spec.name,
        passed=passed,
        json_path=json_path,
        csv_paths=csv_paths,
        checks=checks,
    )


# ---------------------------------------------------------------------------
# presets


def build_presets() -> dict:
    def spec(name, kind, seeds=(0,), **params):
        return ExperimentSpec(
            name=name,
            kind=kind,
            parameters=resolve_parameters(kind, params),
            seeds=list(seeds),
        )

    return {
        "construct": [spec("construct", "construct-verify", d_min=2, d_max=12)],
        "decay": [
            spec(
                "decay-unbiased",
                "decay-sweep",
                d=20,
                sizes=[4, 8, 12, 16, 20],
                sigma=1.0,
                num_samples=2000,
                include_bias=False,
            ),
            spec(
                "decay-biased",
                "decay-sweep",
                d=20,
                sizes=[4, 8, 12, 16, 20],
                sigma=1.0,
                num_samples=2000,
                include_bias=True,
            ),
        ],
        "gradstats": [spec("gradstats", "grad-stats")],
        "pgd": [
            spec(
                "pgd-linear-sweep",
                "pgd-sweep",
                seeds=range(10),
                loss="linear-onehidden",
                d=14,
                n=16,
                sizes=[2, 14],
                eta=0.05,
                sigma=0.1,
                T=1000,
                record_every=50,
            ),
            spec(
                "pgd-single-sweep",
                "pgd-sweep",
                seeds=range(10),
                loss="squared-single",
                d=14,
                n=1,
                sizes=[2, 14],
                eta=0.05,
                sigma=0.1,
                T=1000,
                record_every=50,
            ),
        ],
        "single": [spec("single-neuron", "single-neuron")],
        "hemisphere": [spec("hemisphere", "hemisphere-check")],
        "alpha": [spec("alpha", "alpha-check")],
        "walk": [spec("walk-baseline", "walk-baseline")],
        "coupled": [spec("coupled", "coupled")],
    }


def _reproducibility_check(out_dir, quiet) -> ExperimentResult:
    """Run one sweep twice; CSV bodies under the timestamp line must match."""
    spec = ExperimentSpec(
        name="repro-decay",
        kind="decay-sweep",
        parameters=resolve_parameters(
            "decay-sweep", {"d": 10, "sizes": [2, 4], "num_samples": 50}
        ),
        seeds=[0],
    )
    res_a = run_experiment(spec, os.path.join(out_dir, "repro-a"), quiet=True)
    res_b = run_experiment(spec, os.path.join(out_dir, "repro-b"), quiet=True)
    identical = True
    for pa, pb in zip(res_a.csv_paths, res_b.csv_paths):
        with open(pa, "rb") as fh:
            body_a = fh.read().split(b"\n", 1)[1]
        with open(pb, "rb") as fh:
            body_b = fh.read().split(b"\n", 1)[1]
        identical = identical and body_a == body_b
    passed = identical and res_a.passed and res_b.passed
    if not quiet:
        print(f"csv-reproducibility: {'PASS' if passed else 'FAIL'} (byte-identical bodies)")
    return ExperimentResult(
        name="csv-reproducibility",
        passed=passed,
        json_path=res_a.json_path,
        csv_paths=res_a.csv_paths + res_b.csv_paths,
        checks=[_check("csv-bodies-byte-identical", identical)],
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="paritylab",
        description="Parity learning experiments: constructions, Fourier decay, "
        "gradient statistics, perturbed gradient descent.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment list replacing the presets")
    common.add_argument("--seed", type=int, metavar="N", help="override every spec's seed list with [N]")
    common.add_argument("--out", default="reports", metavar="DIR", help="output directory (default: reports)")
    common.add_argument("--quiet", action="store_true", help="suppress per-experiment summary lines")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "construct": "verify the exact parity networks exhaustively",
        "decay": "Gaussian-average squared-coefficient decay sweeps",
        "gradstats": "gradient norm statistics, finite-difference and identity checks",
        "pgd": "perturbed gradient descent runs and hardness sweeps",
        "single": "single-neuron weak learner and its closed-form coefficient",
        "hemisphere": "joint-hemisphere probabilities vs the closed form",
        "alpha": "arccos Taylor coefficients: values, reconstruction, tail bound",
        "walk": "gaussian random-walk baseline variance",
        "coupled": "coupled divergence of plain vs truncated-gradient runs",
        "all": "every preset plus a CSV reproducibility comparison",
    }
    for cmd in COMMAND_KINDS:
        sub.add_parser(cmd, parents=[common], help=helps[cmd])
    args = parser.parse_args(argv)

    try:
        if args.config:
            specs = parse_config(args.config)
            allowed = COMMAND_KINDS[args.command]
            bad = [s.name for s in specs if s.kind not in allowed]
            if bad:
                raise ConfigError(
                    f"specs {bad} have kinds outside subcommand {args.command!r} "
                    f"(allowed: {list(allowed)})"
                )
        else:
            presets = build_presets()
            if args.command == "all":
                specs = [s for cmd in presets for s in presets[cmd]]
            else:
                specs = presets[args.command]
        if args.seed is not None:
            specs = [dataclasses.replace(s, seeds=[args.seed]) for s in specs]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        outcomes = [run_experiment(s, args.out, args.quiet) for s in specs]
        if args.command == "all" and not args.config:
            outcomes.append(_reproducibility_check(args.out, args.quiet))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0 if all(o.passed for o in outcomes) else 1


if __name__ == "__main__":
    sys.exit(main())
