"""Per-step training log: loss, decorrelation, and singular spectra."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import PreconditionError, ShapeError


@dataclass
class TrajectoryRecord:
    """Append-only log. Spectra must share one length across records
    (possibly zero, when the projector has no recordable spectrum)."""

    steps: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    decorrelations: list = field(default_factory=list)
    spectra: list = field(default_factory=list)
    weights: list = field(default_factory=list)  # optional Wp snapshots

    def append(self, step: int, loss: float, decorrelation: float,
               spectrum=None, weight=None) -> None:
        if self.steps and step <= self.steps[-1]:
            raise PreconditionError(
                f"step {step} not after previous step {self.steps[-1]}"
            )
        spectrum = np.asarray([] if spectrum is None else spectrum, dtype=np.float64)
        if self.spectra and spectrum.size != self.spectra[0].size:
            raise ShapeError(
                f"spectrum length {spectrum.size} != established {self.spectra[0].size}"
            )
        self.steps.append(int(step))
        self.losses.append(float(loss))
        self.decorrelations.append(float(decorrelation))
        self.spectra.append(spectrum)
        if weight is not None:
            self.weights.append(np.array(weight))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def spectrum_size(self) -> int:
        return self.spectra[0].size if self.spectra else 0

    def to_csv(self) -> str:
        header = ["step", "loss", "decorrelation"]
        header += [f"sigma_{i}" for i in range(self.spectrum_size)]
        lines = [",".join(header)]
        for i, step in enumerate(self.steps):
            row = [str(step), f"{self.losses[i]:.17g}", f"{self.decorrelations[i]:.17g}"]
            row += [f"{v:.17g}" for v in self.spectra[i]]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def save_csv(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
