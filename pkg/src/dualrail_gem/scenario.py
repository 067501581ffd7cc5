"""Turn validated scenario configs into runs: one function per CLI command.

Each ``run_<command>`` returns ``(metrics, artifacts)`` where ``artifacts``
maps a file stem to ``(columns, rows)`` tables; the CLI serialises them.
"""
from dataclasses import replace

import numpy as np

from . import __version__
from .atoms import raman_line_positions
from .config import config_digest
from .dualrail import (DualRailConfig, NoiseModel, calibrate_beta, calibrate_trim, gaussian_pair,
                       offset_for_match, phase_noise_mc, predicted_visibility, rail_efficiency,
                       rail_program, rail_setup, run_dual_rail)
from .gem import absorption_spectrum, energy_ledger, run_storage_recall
from .io import SCHEMA_VERSION, TRACE_COLUMNS, trace_rows
from .polarisation import (H, PolarisationState, coherence_couplings, coupled_mode, effective_couplings,
                           ellipse_axes, neglected_lambda_od_ratio, overlap, projection)


def noise_model(cfg):
    n = cfg["magnetics"]["noise"]
    return NoiseModel(sigma_B=n["sigma_B_gauss"], mains_amp=n["mains_amp_gauss"],
                      mains_freq=n["mains_freq_Hz"], mains_triggered=n["mains_triggered"])


def _pair(value):
    return (value, value) if not isinstance(value, list) else (value[0], value[-1])


def dual_config(cfg):
    """Uncalibrated :class:`DualRailConfig` from a merged scenario config."""
    sig, mag, grid = cfg["signals"], cfg["magnetics"], cfg["grid"]
    offset = offset_for_match(sig["temporal_match"], sig["width_us"])
    pulses = gaussian_pair(mag["B0_gauss"], fwhm=sig["width_us"], centre=sig["centre_us"], offset=offset,
                           amplitudes=_pair(sig["amplitude"]), duration=sig["duration_us"], dt=grid["dt_us"])
    return DualRailConfig(
        B0=mag["B0_gauss"], delta=cfg["atoms"]["detuning_MHz"], gamma0=cfg["atoms"]["gamma0_per_us"],
        gradient=mag["gradient_MHz"], flip_time=mag["flip_time_us"], pulses=pulses,
        input_pol=PolarisationState.from_label(sig["polarisation"]),
        control_pol=PolarisationState.from_label(cfg["control"]["polarisation"]),
        mode=cfg["control"]["mode"], nz=grid["Nz"], dt=grid["dt_us"])


def calibrated_config(cfg):
    """Apply ``beta_per_rail`` or root-find against ``calibration_target``."""
    dc = dual_config(cfg)
    mag = cfg["magnetics"]
    if mag["beta_per_rail"] is not None:
        b1, b2 = _pair(mag["beta_per_rail"])
        return replace(dc, beta=float(b1), trim=(1.0, b2 / b1 if b1 else 1.0)), None
    target = mag["calibration_target"]
    t1, t2 = (target, None) if not isinstance(target, list) else (target[0], target[-1] if len(target) == 2 else None)
    dc = calibrate_beta(dc, t1)
    if t2 is not None:
        dc = calibrate_trim(dc, t2)
    return dc, {"targets": [t1, t2], "beta": dc.beta, "trim": list(dc.trim)}


def record(command, cfg, metrics, *, ledger=None, convergence=None, seed=None):
    """Schema-versioned metrics record; deterministic for a given config and seed."""
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config_digest": config_digest(cfg),
        "config": cfg,
        "seed": seed,
        "metrics": metrics,
        "ledger": ledger or {},
        "convergence": convergence or {},
        "versions": {"dualrail_gem": __version__, "numpy": np.__version__},
    }


def _dips(detunings, transmission):
    t = transmission
    idx = [i for i in range(1, t.size - 1) if t[i] < t[i - 1] and t[i] <= t[i + 1] and t[i] < 0.999]
    return [float(detunings[i]) for i in idx]


def run_spectrum(cfg):
    dc, cal = calibrated_config(cfg)
    B0, grad = dc.B0, dc.gradient
    d0 = dc.delta0
    sp = cfg["spectrum"]
    span = sp["span_MHz"] or (d0 + grad + 0.5)
    ladder = np.linspace(-span, span, sp["points"])
    g_rail = effective_couplings(1, dc.control_pol, dc.delta).g_cp ** 2
    gm, gp = coherence_couplings(0, dc.control_pol, dc.delta)
    w_centre = (abs(gm) ** 2 + abs(gp) ** 2) / g_rail
    tr = absorption_spectrum(B0, grad, dc.gem_params(dc.beta), ladder, linewidth=sp["linewidth_MHz"],
                             line_weights=(1.0, w_centre, 1.0))
    dips = _dips(ladder, tr)
    metrics = {"line_positions_MHz": raman_line_positions(B0).tolist(), "dips_MHz": dips, "n_dips": len(dips),
               "min_transmission": float(tr.min()), "beta": dc.beta, "centre_line_weight": w_centre}
    return metrics, {"spectrum": (("detuning_MHz", "transmission"), np.column_stack([ladder, tr]))}, cal


def run_store(cfg):
    dc, cal = calibrated_config(cfg)
    mode, _, beta = rail_setup(dc)[0]
    amp = mode.inner(dc.input_pol)
    pulse = dc.pulses[0].scaled(amp)
    res = run_storage_recall(dc.gem_params(beta), rail_program(dc, 1), pulse)
    ledger = energy_ledger(res)
    metrics = {"efficiency_coupled_mode": res.efficiency, "projection": abs(amp) ** 2,
               "efficiency": abs(amp) ** 2 * res.efficiency, "echo_centroid_us": res.echo_centroid(),
               "input_centroid_us": res.input_centroid(), "beta": beta, "flip_time_us": dc.flip_time}
    arts = {"input": (TRACE_COLUMNS, trace_rows(res.times, res.input)),
            "output": (TRACE_COLUMNS, trace_rows(res.times, res.output))}
    return metrics, arts, dict(ledger, calibration=cal)


def run_dual(cfg, seed):
    dc, cal = calibrated_config(cfg)
    rec = run_dual_rail(dc, noise_model(cfg), seed)
    ledgers = {f"rail{i + 1}": energy_ledger(r) for i, r in enumerate(rec.rails)}
    arts = {
        "beat": (("t_us", "intensity", "reference_intensity"), rec.beat_rows()),
        "echo_rail1": (TRACE_COLUMNS, trace_rows(rec.times, rec.echoes[0])),
        "echo_rail2": (TRACE_COLUMNS, trace_rows(rec.times, rec.echoes[1])),
    }
    return rec.metrics, arts, dict(ledgers, calibration=cal)


def run_sweep(cfg):
    sw = cfg["sweep"]
    values = [float(v) for v in sw["values"]]
    rows = []
    if sw["parameter"] == "beta":
        dc = dual_config(cfg)
        for b in values:
            c = replace(dc, beta=b)
            e1, e2 = rail_efficiency(c, 1), rail_efficiency(c, 2)
            rows.append([b, e1, e2, 0.5 * (e1 + e2), predicted_visibility(e1, e2, 1.0, 1.0)])
        cols = ("beta", "eta1", "eta2", "eta_mean", "balance_factor")
    else:
        ctrl = PolarisationState.from_label(cfg["control"]["polarisation"])
        for d in values:
            p1, g1 = coupled_mode(effective_couplings(1, ctrl, d))
            p2, _ = coupled_mode(effective_couplings(2, ctrl, d))
            rows.append([d, abs(p1.a_L), abs(p1.a_R), overlap(p1, p2), projection(H, p1),
                         neglected_lambda_od_ratio(d, ctrl), g1])
        cols = ("detuning_MHz", "rail1_aL", "rail1_aR", "overlap", "H_projection", "od_ratio", "g_cp")
    rows = np.asarray(rows)
    metrics = {"parameter": sw["parameter"], "values": values,
               "table": {c: rows[:, i].tolist() for i, c in enumerate(cols)}}
    return metrics, {"sweep": (cols, rows)}, None


def run_mc_phase(cfg, seed, trials):
    dc, cal = calibrated_config(cfg)
    noise = noise_model(cfg)
    mc = phase_noise_mc(dc, noise, trials, seed)
    metrics = {"mean_deg": mc["mean"], "std_deg": mc["std"], "closed_form_quasi_static_std_deg": mc["closed_form_std"],
               "storage_time_us": mc["storage_time"], "storage_phase_deg": mc["storage_phase"],
               "trials": trials, "mains_triggered": noise.mains_triggered}
    rows = np.column_stack([np.arange(trials), mc["samples"], mc["injected"]])
    return metrics, {"mc_samples": (("trial", "phase_deg", "injected_deg"), rows)}, {"calibration": cal}


def run_polarisation(cfg):
    d = cfg["atoms"]["detuning_MHz"]
    ctrl = PolarisationState.from_label(cfg["control"]["polarisation"])
    p_in = PolarisationState.from_label(cfg["signals"]["polarisation"])
    out = {"detuning_MHz": d, "control": cfg["control"]["polarisation"], "signal": cfg["signals"]["polarisation"]}
    modes = []
    for rail in (1, 2):
        pair = effective_couplings(rail, ctrl, d)
        mode, g = coupled_mode(pair)
        modes.append(mode)
        out[f"rail{rail}"] = {"g_minus": pair.g_minus, "g_plus": pair.g_plus, "g_cp": g,
                              "normalized": list(pair.normalized()), "mode_LR": [mode.a_L, mode.a_R],
                              "ellipse_axes": [float(x) for x in ellipse_axes(mode)],
                              "projection": projection(p_in, mode)}
    out["overlap"] = overlap(*modes)
    out["od_ratio_neglected"] = neglected_lambda_od_ratio(d, ctrl)
    return out, {}, None
