#           Cp Surrogate
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; either version 2 of the License, or
#  (at your option) any later version.
#
#  This program is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with this program; if not, write to the Free Software
#  Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston,
#  MA 02110-1301, USA.

"""
Synthetic Cp(theta; Re, Ti) oracle. The closed forms below are invented:
they only reproduce the qualitative shape of measured distributions
(stagnation maximum, suction minimum at theta_m, recovery up to the
separation angle theta_s, flat wake) so that tests have a known ground
truth. They are not aerodynamic data.

Frozen forms, with x = log10(Re) + 0.1 * Ti (turbulence acting as extra
Reynolds number) and s = expit((x - 5.75) / 0.7) the regime weight. The
transition is wide enough that s moves over the whole Re and Ti window,
so both inputs shape every part of the curve past the stagnation point:

    theta_m  = 70 + 15 s            cp_min  = -1.1 - 1.0 s
    theta_s  = 90 + 45 s            cp_base = -1.0 + 0.7 s
    rms_base = 0.05 + 0.03 s + 0.012 Ti
    rms_peak = rms_base + 0.12 + 0.06 s

Mean Cp: cos^2 blend from 1 to cp_min over [0, theta_m], cubic smoothstep
from cp_min to cp_base over [theta_m, theta_s], cp_base beyond.

RMS Cp: sin^2 blend from 0.6 rms_base up to rms_peak over [0, theta_s],
cos^2 decay to rms_base over the next 40 degrees, rms_base beyond.
"""

import math
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

# local includes
from errors import DomainError, ParameterError
from seeding import derive_rng
from dataset import Dataset, TargetKind

RE_WINDOW = (1.0e4, 1.0e6)
TI_WINDOW = (0.0, 15.0)

TI_DECADES_PER_PERCENT = 0.1
CRITICAL_DECADE = 5.75
TRANSITION_WIDTH = 0.7
RMS_FRONT_RATIO = 0.6
RMS_DECAY_SPAN = 40.0


@dataclass(frozen = True)
class CurveParams:
    theta_m: float
    theta_s: float
    cp_min: float
    cp_base: float
    rms_peak: float
    rms_base: float

    def __post_init__(self):
        if not (0 < self.theta_m < self.theta_s < 180):
            raise ParameterError(f"Need 0 < theta_m < theta_s < 180. {self.theta_m}, {self.theta_s}")
        if not (self.cp_min < self.cp_base < 1):
            raise ParameterError(f"Need cp_min < cp_base < 1. {self.cp_min}, {self.cp_base}")
        if not (self.rms_peak > self.rms_base > 0):
            raise ParameterError(f"Need rms_peak > rms_base > 0. {self.rms_peak}, {self.rms_base}")


def _check_window(re: float, ti: float) -> None:
    if not (RE_WINDOW[0] <= re <= RE_WINDOW[1]):
        raise DomainError("re", re, f"oracle is valid for {RE_WINDOW[0]:g} <= re <= {RE_WINDOW[1]:g}")
    if not (TI_WINDOW[0] <= ti <= TI_WINDOW[1]):
        raise DomainError("ti", ti, f"oracle is valid for {TI_WINDOW[0]:g} <= ti <= {TI_WINDOW[1]:g}")


def _check_theta(theta: float) -> None:
    if not (0 <= theta <= 180):
        raise DomainError("theta", theta, "must be within 0-180 degrees")


def regime_weight(re: float, ti: float) -> float:
    """0 deep in the subcritical regime, 1 past the critical transition."""
    x = math.log10(re) + TI_DECADES_PER_PERCENT * ti
    return float(expit((x - CRITICAL_DECADE) / TRANSITION_WIDTH))


def curve_params(re: float, ti: float) -> CurveParams:
    _check_window(re, ti)
    s = regime_weight(re, ti)
    rms_base = 0.05 + 0.03 * s + 0.012 * ti
    return CurveParams(
        theta_m = 70.0 + 15.0 * s,
        theta_s = 90.0 + 45.0 * s,
        cp_min = -1.1 - 1.0 * s,
        cp_base = -1.0 + 0.7 * s,
        rms_peak = rms_base + 0.12 + 0.06 * s,
        rms_base = rms_base,
    )


def mean_cp_curve(p: CurveParams, theta: float) -> float:
    if theta <= p.theta_m:
        c = math.cos(math.pi * theta / (2.0 * p.theta_m))
        w = c * c
        return w * 1.0 + (1.0 - w) * p.cp_min
    if theta <= p.theta_s:
        t = (theta - p.theta_m) / (p.theta_s - p.theta_m)
        h = t * t * (3.0 - 2.0 * t)
        return (1.0 - h) * p.cp_min + h * p.cp_base
    return p.cp_base


def rms_cp_curve(p: CurveParams, theta: float) -> float:
    if theta <= p.theta_s:
        sn = math.sin(math.pi * theta / (2.0 * p.theta_s))
        w = sn * sn
        return (1.0 - w) * RMS_FRONT_RATIO * p.rms_base + w * p.rms_peak
    if theta - p.theta_s < RMS_DECAY_SPAN:
        c = math.cos(math.pi * (theta - p.theta_s) / (2.0 * RMS_DECAY_SPAN))
        w = c * c
        return w * p.rms_peak + (1.0 - w) * p.rms_base
    return p.rms_base


def reference_mean_cp(re: float, ti: float, theta: float) -> float:
    _check_theta(theta)
    return mean_cp_curve(curve_params(re, ti), theta)


def reference_rms_cp(re: float, ti: float, theta: float) -> float:
    _check_theta(theta)
    return rms_cp_curve(curve_params(re, ti), theta)


def reference_cp(target_kind: TargetKind, re: float, ti: float, theta: float) -> float:
    if TargetKind(target_kind) == TargetKind.MEAN_CP:
        return reference_mean_cp(re, ti, theta)
    return reference_rms_cp(re, ti, theta)


def generate_dataset(n: int, re_range: tuple = RE_WINDOW, ti_range: tuple = TI_WINDOW,
                     noise_sd: float = 0.0, target_kind: TargetKind = TargetKind.MEAN_CP,
                     seed: int = 0) -> Dataset:
    """
    n samples with log-uniform Re, uniform Ti and uniform theta over [0, 180],
    target = reference curve + N(0, noise_sd^2). Draw order (Re, Ti, theta,
    noise) is fixed so a seed always yields the same dataset.
    """

    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 0:
        raise ParameterError(f"n must be a non-negative integer. {n!r}")
    re_lo, re_hi = (float(v) for v in re_range)
    ti_lo, ti_hi = (float(v) for v in ti_range)
    if not (RE_WINDOW[0] <= re_lo <= re_hi <= RE_WINDOW[1]):
        raise ParameterError(f"re_range must lie within {RE_WINDOW}. {re_range}")
    if not (TI_WINDOW[0] <= ti_lo <= ti_hi <= TI_WINDOW[1]):
        raise ParameterError(f"ti_range must lie within {TI_WINDOW}. {ti_range}")
    if not (math.isfinite(noise_sd) and noise_sd >= 0):
        raise ParameterError(f"noise_sd must be finite and >= 0. {noise_sd}")
    target_kind = TargetKind(target_kind)

    rng = derive_rng(seed, "synth")
    log_re = rng.uniform(math.log10(re_lo), math.log10(re_hi), n)
    re = np.clip(10.0 ** log_re, re_lo, re_hi)
    ti = rng.uniform(ti_lo, ti_hi, n)
    theta = rng.uniform(0.0, 180.0, n)
    noise = rng.normal(0.0, noise_sd, n) if noise_sd > 0 else np.zeros(n)
    clean = np.array([reference_cp(target_kind, float(a), float(b), float(c))
                      for a, b, c in zip(re, ti, theta)], dtype = np.float64)
    logging.debug(f"Generated {n} {target_kind.value} samples, noise sd {noise_sd}")
    return Dataset(target_kind, re, ti, theta, clean + noise)
