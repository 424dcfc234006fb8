"""Experiment configuration: JSON ingestion and validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ValidationError
from .process import DriverSpec, Kernel, ProcessModel

MAX_TRACE_POWER = 5


def parse_driver(spec: dict) -> DriverSpec:
    family = spec.get("family")
    max_order = int(spec.get("max_order", 10))
    if family == "gaussian":
        return DriverSpec.gaussian(float(spec.get("variance", 1.0)), max_order)
    if family == "rademacher":
        return DriverSpec.rademacher(max_order)
    if family == "uniform":
        return DriverSpec.uniform(float(spec.get("half_width", math.sqrt(3.0))), max_order)
    if family == "centered-exponential":
        return DriverSpec.centered_exponential(max_order)
    if family == "custom":
        return DriverSpec.custom(spec["cumulants"])
    raise ValidationError([f"unknown driver family {family!r}"])


def parse_model(spec: dict) -> ProcessModel:
    try:
        kernel = Kernel.from_pairs(spec["kernel"])
        driver = parse_driver(spec["driver"])
    except KeyError as exc:
        raise ValidationError([f"model spec missing key {exc}"]) from exc
    return ProcessModel(kernel=kernel, driver=driver)


def driver_to_dict(driver: DriverSpec) -> dict:
    out: dict = {"family": driver.family, "max_order": driver.max_order}
    if driver.family == "gaussian":
        out["variance"] = driver.cumulant(2)
    elif driver.family == "uniform":
        out["half_width"] = driver.scale
    elif driver.family == "custom":
        out["cumulants"] = list(driver.cumulants)
    return out


def model_to_dict(model: ProcessModel) -> dict:
    return {
        "kernel": [[o, c] for o, c in zip(model.kernel.offsets, model.kernel.coefficients)],
        "driver": driver_to_dict(model.driver),
    }


@dataclass
class ExperimentConfig:
    """Everything one experiment needs; mirrors the JSON config keys."""

    model: ProcessModel
    schedule: tuple[tuple[int, int, int], ...]  # (p, n, b) triples
    k_list: tuple[int, ...]
    replicas: int
    seed: int
    bins: int = 40
    out_dir: str = "reports"
    workers: int = 1
    eigen_replicas: int | None = None  # None: eigenvalues for every replica
    trend_checks: bool | None = None  # None: on exactly when schedule has > 1 size
    oracle_orders: tuple[tuple[int, ...], ...] = ((1,), (2,), (1, 1), (2, 1))
    reference_grid: int = 100_000
    jacobi_tol: float = 1e-10

    @property
    def trends_enabled(self) -> bool:
        if self.trend_checks is None:
            return len(self.schedule) > 1
        return self.trend_checks

    def validate(self, *, min_bandwidth: int = 1) -> None:
        """Check the invariants; the bandwidth floor drops to 0 for the exact
        oracle cross-check, which is not tied to the growing-band regime."""
        problems = []
        if not self.schedule:
            problems.append("schedule must contain at least one (p, n, b) triple")
        for p, n, b in self.schedule:
            if p < 1:
                problems.append(f"p={p} must be at least 1")
            if n < 1:
                problems.append(f"n={n} must be at least 1 (size p={p})")
            if not min_bandwidth <= b <= p:
                problems.append(
                    f"bandwidth b={b} must satisfy {min_bandwidth} <= b <= p={p}"
                )
        if not self.k_list:
            problems.append("k_list must be non-empty")
        for k in self.k_list:
            if not 1 <= k <= MAX_TRACE_POWER:
                problems.append(f"trace power k={k} outside 1..{MAX_TRACE_POWER}")
        if self.replicas < 1:
            problems.append("replicas must be at least 1")
        if self.workers < 1:
            problems.append("workers must be at least 1")
        if self.bins < 1:
            problems.append("bins must be at least 1")
        if not 0 <= self.seed < 2**64:
            problems.append("seed must fit in 64 bits")
        if self.eigen_replicas is not None and self.eigen_replicas < 0:
            problems.append("eigen_replicas must be non-negative")
        if self.reference_grid < 1000:
            problems.append("reference_grid must be at least 1000")
        if self.trends_enabled and len(self.schedule) > 1:
            ps = [p for p, _, _ in self.schedule]
            if any(b <= a for a, b in zip(ps, ps[1:])):
                problems.append("schedule must be strictly increasing in p for trend checks")
        for order in self.oracle_orders:
            if not order or any(s < 1 for s in order):
                problems.append(f"oracle order {order} must be positive block sizes")
            if len(order) > 2:
                problems.append(f"oracle order {order}: the harness reports at most pairs")
        if problems:
            raise ValidationError(problems)

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        try:
            model = parse_model(data["model"])
            schedule = tuple(tuple(int(v) for v in triple) for triple in data["schedule"])
            k_list = tuple(int(k) for k in data["k_list"])
            replicas = int(data["replicas"])
            seed = int(data["seed"])
        except KeyError as exc:
            raise ValidationError([f"config missing key {exc}"]) from exc
        eigen = data.get("eigen_replicas")
        return ExperimentConfig(
            model=model,
            schedule=schedule,
            k_list=k_list,
            replicas=replicas,
            seed=seed,
            bins=int(data.get("bins", 40)),
            out_dir=str(data.get("out_dir", "reports")),
            workers=int(data.get("workers", 1)),
            eigen_replicas=None if eigen is None else int(eigen),
            trend_checks=data.get("trend_checks"),
            oracle_orders=tuple(
                tuple(int(s) for s in order)
                for order in data.get("oracle_orders", [[1], [2], [1, 1], [2, 1]])
            ),
            reference_grid=int(data.get("reference_grid", 100_000)),
            jacobi_tol=float(data.get("jacobi_tol", 1e-10)),
        )

    @staticmethod
    def from_json_file(path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError([f"config file {path} is not valid JSON: {exc}"]) from exc
        return ExperimentConfig.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "model": model_to_dict(self.model),
            "schedule": [list(t) for t in self.schedule],
            "k_list": list(self.k_list),
            "replicas": self.replicas,
            "seed": self.seed,
            "bins": self.bins,
            "out_dir": self.out_dir,
            "workers": self.workers,
            "eigen_replicas": self.eigen_replicas,
            "trend_checks": self.trend_checks,
            "oracle_orders": [list(o) for o in self.oracle_orders],
            "reference_grid": self.reference_grid,
            "jacobi_tol": self.jacobi_tol,
        }
