#!/usr/bin/env python3
"""Evaluates the shipped presets by hand to produce the constants frozen in the unit tests."""
import json
import math
import sys
from pathlib import Path

DATA = Path(__file__).resolve().parents[2] / "data" / "presets"
STAGES = ("E", "D", "C")
GPU_MEMORY = 48e9


def load(name):
    return json.loads((DATA / f"{name}.json").read_text())


def serial(prof, s, length):
    c = prof["stages"][s]
    t = c["overhead_s"] + c["time_coef"] * length ** c["time_exp"]
    return t * prof["denoise_steps"] if s == "D" else t


def timed(prof, s, length, k):
    c = prof["stages"][s]
    f = c["par_max"] * length / (length + c["par_half_len"])
    return serial(prof, s, length) * ((1 - f) + f / k)


def eff(prof, s, length, k):
    return serial(prof, s, length) / timed(prof, s, length, k) / k


def opt_k(prof, s, length):
    return max(k for k in (1, 2, 4, 8) if k == 1 or eff(prof, s, length, k) > 0.8)


def params(prof, stages):
    return sum(prof["stages"][s]["params_billion"] * 1e9 * prof["bytes_per_param"] for s in stages)


def tokens(preset, cls):
    w = preset["workload"]
    px = cls["width"] * cls["height"] / w["pixels_per_token"]
    fps = w.get("latent_fps", 0)
    secs = cls.get("seconds", 0)
    return round(px * fps * secs) if fps and secs else round(px)


def main():
    out = {}
    flux = load("flux")
    fp = flux["profile"]
    out["flux_D_4096tok_k8"] = timed(fp, "D", 4096, 8)
    out["flux_D_4096tok_k1"] = serial(fp, "D", 4096)
    l4096 = 4096 * 4096 / flux["workload"]["pixels_per_token"]
    out["flux_D_4096sq_k8"] = timed(fp, "D", l4096, 8)
    out["flux_C_4096sq_k8_over_k1"] = timed(fp, "C", l4096, 8) / serial(fp, "C", l4096)
    out["flux_residual_D"] = GPU_MEMORY - params(fp, "D")
    out["flux_residual_EDC"] = GPU_MEMORY - params(fp, "EDC")
    out["flux_C_act_4096sq"] = fp["stages"]["C"]["act_bytes_per_len"] * l4096
    l1024 = 1024 * 1024 / flux["workload"]["pixels_per_token"]
    l_e = 200
    lat = sum(timed(fp, s, l, opt_k(fp, s, l)) for s, l in (("E", l_e), ("D", l1024), ("C", l1024)))
    out["flux_1024sq_lE200_budget"] = 2.5 * lat
    out["opt_degrees_flux"] = {s: [opt_k(fp, s, l) for l in (64, 256, 1024, 4096, 16384, 65536)] for s in STAGES}
    for name in ("sd3", "flux", "cog", "hyv"):
        pr = load(name)
        prof = pr["profile"]
        classes = pr["workload"]["classes"]
        lens = sorted(tokens(pr, c) for c in classes)
        out[f"{name}_E_opt_500"] = opt_k(prof, "E", 500)
        out[f"{name}_D_opt_min_max"] = [opt_k(prof, "D", lens[0]), opt_k(prof, "D", lens[-1])]
        out[f"{name}_C_opt_max"] = opt_k(prof, "C", lens[-1])
        out[f"{name}_b1_degree"] = max(1, opt_k(prof, "D", lens[-1]) // 2)
    json.dump(out, sys.stdout, indent=1, sort_keys=True)
    print()


if __name__ == "__main__":
    main()
