"""Per-replicate results and their aggregation into means and standard deviations."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from enum import Enum

import numpy as np


class Branch(str, Enum):
    GIVEN_PI = "GivenPi"
    GIVEN_P = "GivenP"
    BOTH = "Both"

    def members(self) -> list[Branch]:
        """The single branches this choice runs."""
        if self is Branch.BOTH:
            return [Branch.GIVEN_PI, Branch.GIVEN_P]
        return [self]


class ReplicateStatus(str, Enum):
    OK = "Ok"
    MINOR_OUTBREAK = "MinorOutbreak"
    ESTIMATION_FAILED = "EstimationFailed"


@dataclass(frozen=True, slots=True)
class ReplicateRow:
    """Outcome of one simulated epidemic.

    Estimates are None unless ``status`` is Ok; ``reason`` names the error
    of an EstimationFailed replicate.
    """
    index: int
    seed: int
    status: ReplicateStatus
    reason: str = ""
    rho_hat: float | None = None
    z_r_hat: float | None = None
    pi_survey: float | None = None
    p_survey: float | None = None
    p_hat_givenpi: float | None = None
    beta_hat_givenpi: float | None = None
    pi_hat_givenp: float | None = None
    beta_hat_givenp: float | None = None

    @property
    def is_ok(self) -> bool:
        return self.status is ReplicateStatus.OK

    @property
    def status_label(self) -> str:
        if self.status is ReplicateStatus.ESTIMATION_FAILED:
            return f"{self.status.value}({self.reason})"
        return self.status.value

    @classmethod
    def parse_status(cls, label: str) -> tuple[ReplicateStatus, str]:
        """Inverse of :attr:`status_label`."""
        if label.endswith(")") and "(" in label:
            name, reason = label[:-1].split("(", 1)
            return ReplicateStatus(name), reason
        return ReplicateStatus(label), ""

    def estimate_columns(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)[4:]}

    def to_dict(self) -> dict:
        values = asdict(self)
        values["status"] = self.status.value
        return values


# estimated quantity -> ReplicateRow attribute, per branch
BRANCH_COLUMNS = {
    Branch.GIVEN_PI: {"p": "p_hat_givenpi", "pi": "pi_survey", "beta_star": "beta_hat_givenpi"},
    Branch.GIVEN_P: {"p": "p_survey", "pi": "pi_hat_givenp", "beta_star": "beta_hat_givenp"},
}
SUMMARY_COLUMNS = {"rho_hat": "rho_hat", "z_r_hat": "z_r_hat"}


@dataclass(frozen=True, slots=True)
class Aggregate:
    """Mean and sample standard deviation (k - 1 denominator) over k values."""
    mean: float | None
    sd: float | None
    count: int

    @classmethod
    def of(cls, values) -> Aggregate:
        values = np.asarray(values, dtype=float)
        count = len(values)
        mean = float(np.mean(values)) if count else None
        sd = float(np.std(values, ddof=1)) if count > 1 else None
        return cls(mean=mean, sd=sd, count=count)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "sd": self.sd, "count": self.count}


def _aggregate_columns(rows, columns: dict) -> dict[str, Aggregate]:
    ok = [row for row in rows if row.is_ok]
    return {name: Aggregate.of([getattr(row, attr) for row in ok]) for name, attr in columns.items()}


def aggregate_rows(rows, branch: Branch) -> dict[str, Aggregate]:
    """Means and sds of p, pi and beta* over the Ok rows, for one branch."""
    branch = Branch(branch)
    if branch is Branch.BOTH:
        raise ValueError("aggregate one branch at a time")
    return _aggregate_columns(rows, BRANCH_COLUMNS[branch])


def aggregate_summaries(rows) -> dict[str, Aggregate]:
    """Means and sds of rho_hat and z_r_hat over the Ok rows."""
    return _aggregate_columns(rows, SUMMARY_COLUMNS)
