"""Energy ledgers, read-bias sensitivity, and variation sweeps.

Sensitivity exploits that recall currents are exactly linear in the read
bias and nothing else in a run depends on it: one recorded trajectory
(training continued past recall) is enough to predict the epoch count for
any rescaled bias against the fixed threshold. A test pins this shortcut to
a genuine rerun.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._io import write_csv, write_json
from .crossbar import ArrayGeometry, build_array
from .device import DeviceParams, VariationSpec
from .errors import ParameterError, ProtocolError
from .hopfield import (
    MISSING_PIXEL_ONE,
    PATTERN_ONE,
    NetworkConfig,
    Pattern,
    run_learning,
)

__all__ = [
    "EnergyLedger",
    "SensitivityResult",
    "DEFAULT_PERTURBATION_GRID",
    "read_voltage_sensitivity",
    "variation_sweep",
    "write_sweep_csv",
    "write_sensitivity_json",
    "SWEEP_COLUMNS",
]

# relative bias perturbations scanned for the flip point: 1% .. 50%
DEFAULT_PERTURBATION_GRID = tuple(round(k / 100.0, 2) for k in range(1, 51))

SWEEP_COLUMNS = ("cv", "median_epochs", "median_energy_joules", "n_seeds", "n_nonconverged")


@dataclass(frozen=True)
class EnergyLedger:
    """Energy bookkeeping for one run.

    Programming energy is always the event count times the per-pulse energy,
    an exact integer-times-float identity, so totals never drift from the
    pulse record.
    """

    program_event_count: int
    e_prog: float
    read_energy: float
    pcm_energy_fraction: float

    @classmethod
    def from_trace(cls, trace, params: DeviceParams) -> "EnergyLedger":
        return cls(
            program_event_count=trace.program_event_count,
            e_prog=params.e_prog,
            read_energy=trace.read_energy,
            pcm_energy_fraction=params.pcm_energy_fraction,
        )

    @property
    def program_energy(self) -> float:
        return self.program_event_count * self.e_prog

    @property
    def total_energy(self) -> float:
        return self.program_energy + self.read_energy

    @property
    def pcm_program_energy(self) -> float:
        """Share dissipated in the cells themselves; the rest heats the access transistors."""
        return self.pcm_energy_fraction * self.program_energy

    @property
    def transistor_program_energy(self) -> float:
        return self.program_energy - self.pcm_program_energy


@dataclass(frozen=True)
class SensitivityResult:
    """Smallest relative read-bias change that alters the epochs-to-recall."""

    cv: float
    seed: int
    v_read: float
    threshold: float
    base_epochs: int
    grid: tuple[float, ...]
    min_relative_perturbation: float | None
    flip_direction: str | None  # "up", "down", or "both"

    @property
    def flipped(self) -> bool:
        return self.min_relative_perturbation is not None

    def to_dict(self) -> dict:
        return {
            "cv": self.cv,
            "seed": self.seed,
            "v_read": self.v_read,
            "threshold_amps": self.threshold,
            "base_epochs": self.base_epochs,
            "grid": list(self.grid),
            "min_relative_perturbation": self.min_relative_perturbation,
            "flip_direction": self.flip_direction,
            "flipped": self.flipped,
        }


def _first_crossing(currents, threshold) -> int | None:
    for epoch, current in enumerate(currents, start=1):
        if current > threshold:
            return epoch
    return None


def read_voltage_sensitivity(
    params: DeviceParams,
    variation: VariationSpec,
    network: NetworkConfig,
    seed: int,
    *,
    grid: tuple[float, ...] = DEFAULT_PERTURBATION_GRID,
    geometry: ArrayGeometry | None = None,
    pattern: Pattern = PATTERN_ONE,
    missing_pixel: int = MISSING_PIXEL_ONE,
) -> SensitivityResult:
    """Scan bias perturbations for the smallest one that changes the outcome.

    Builds the array for ``seed``, trains through the full epoch budget, and
    replays the recorded current trajectory scaled by (1 +/- delta) against
    the unchanged threshold. Returns the sentinel (None) when no grid entry
    flips. Raises ProtocolError when the unperturbed run never recalls,
    since there is no baseline to compare against.
    """
    last = 0.0
    for d in grid:
        if not 0.0 < d < 1.0 or d <= last:
            raise ParameterError("perturbation grid must be ascending within (0, 1)")
        last = d
    arr = build_array(geometry or ArrayGeometry(), params, variation, seed)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    trace = run_learning(
        arr,
        pattern,
        missing_pixel,
        network,
        rng,
        record_maps=False,
        continue_after_recall=True,
    )
    if not trace.converged:
        raise ProtocolError(
            f"baseline run (cv={variation.cv}, seed={seed}) never recalled; "
            "sensitivity is undefined without a baseline"
        )
    currents = [ep.recall_currents[missing_pixel] for ep in trace.epochs]
    threshold = trace.threshold
    base = trace.epochs_to_recall
    min_delta = None
    direction = None
    for d in grid:
        up = _first_crossing([(1.0 + d) * i for i in currents], threshold)
        down = _first_crossing([(1.0 - d) * i for i in currents], threshold)
        up_flip = up != base
        down_flip = down != base
        if up_flip or down_flip:
            min_delta = d
            direction = "both" if (up_flip and down_flip) else ("up" if up_flip else "down")
            break
    return SensitivityResult(
        cv=variation.cv,
        seed=seed,
        v_read=network.v_read,
        threshold=threshold,
        base_epochs=base,
        grid=tuple(grid),
        min_relative_perturbation=min_delta,
        flip_direction=direction,
    )


def variation_sweep(
    cvs,
    seeds,
    params: DeviceParams,
    network: NetworkConfig,
    *,
    device_share: float = 0.8,
    geometry: ArrayGeometry | None = None,
    pattern: Pattern = PATTERN_ONE,
    missing_pixel: int = MISSING_PIXEL_ONE,
) -> list[dict]:
    """Median epochs and energy per variation level, widest distribution first.

    ``seeds`` is either a count (runs seeds 0..n-1) or an explicit iterable.
    Medians are taken over converged runs; non-converged ones are counted
    separately, never silently dropped.
    """
    seed_list = list(range(seeds)) if isinstance(seeds, int) else [int(s) for s in seeds]
    if not seed_list:
        raise ParameterError("sweep needs at least one seed")
    rows = []
    for cv in sorted(set(float(c) for c in cvs), reverse=True):
        variation = VariationSpec(cv=cv, device_share=device_share)
        epochs, energies, nonconverged = [], [], 0
        for seed in seed_list:
            arr = build_array(geometry or ArrayGeometry(), params, variation, seed)
            rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
            trace = run_learning(
                arr, pattern, missing_pixel, network, rng, record_maps=False
            )
            if trace.converged:
                epochs.append(trace.epochs_to_recall)
                energies.append(trace.total_energy)
            else:
                nonconverged += 1
        rows.append(
            {
                "cv": cv,
                "median_epochs": float(np.median(epochs)) if epochs else None,
                "median_energy_joules": float(np.median(energies)) if energies else None,
                "n_seeds": len(seed_list),
                "n_nonconverged": nonconverged,
            }
        )
    return rows


def write_sweep_csv(rows, path, provenance: dict | None = None) -> None:
    data = [[row[col] for col in SWEEP_COLUMNS] for row in rows]
    write_csv(path, SWEEP_COLUMNS, data, provenance=provenance)


def write_sensitivity_json(result: SensitivityResult, path, provenance: dict | None = None) -> None:
    write_json(path, result.to_dict(), provenance=provenance)
