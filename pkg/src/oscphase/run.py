"""Configuration, result records, single runs and parameter sweeps."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, TextIO

import numpy as np

from . import mathieu, phase
from .classical import (
    Commensurability, ForceSpectrum, HomogeneousBasis, OscillatorParams, ParticularSolution,
    commensurability,
)
from .errors import ConfigError, OscPhaseError
from .wavefunction import EigenState, Representation, Superposition, quasi_periodicity_check

MODES = ("sho", "driven", "mathieu")
METHODS = ("closed", "quadrature", "perturbative", "numeric", "both")
SIG_DIGITS = 12

CSV_COLUMNS = (
    "mode", "status", "n", "C", "beta", "D", "phi", "M", "w", "hbar", "a", "eps", "period",
    "geometric_closed_form", "geometric_quadrature", "geometric_perturbative",
    "geometric_series", "geometric_numeric", "geometric_mod2pi",
    "dynamical_closed_form", "dynamical_quadrature", "total",
    "discrepancy", "relative_discrepancy", "message",
)
_PRIMARY_ORDER = ("closed_form", "perturbative", "quadrature", "numeric", "series")


def _round(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, float):
        return float(f"{x:.{SIG_DIGITS}g}") if math.isfinite(x) else x
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


@dataclass
class RunConfig:
    mode: str
    C: float = 1.0
    beta: float = 0.0
    D: float = 0.0
    phi: float = 0.0
    n: int = 0
    M: float = 1.0
    w: float = 1.0
    hbar: float = 1.0
    half_period: bool = False
    spectrum: ForceSpectrum | None = None
    B: tuple[complex, ...] | None = None
    a: float = 2.0
    eps: float = 0.01
    method: str = "both"

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        for name in ("C", "beta", "D", "phi", "M", "w", "hbar", "a", "eps"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"--{name} must be a finite number, got {value!r}")
        if int(self.n) != self.n or self.n < 0:
            raise ConfigError(f"--n must be a non-negative integer, got {self.n!r}")
        self.n = int(self.n)
        for name in ("M", "w", "hbar"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"--{name} must be positive")
        if self.mode == "driven" and self.spectrum is None:
            raise ConfigError("driven mode needs a force spectrum (--force-spec <path> or --spectrum <json>)")
        if self.mode == "mathieu" and self.a <= 0:
            raise ConfigError("--a must be positive")
        if self.half_period and self.mode != "sho":
            raise ConfigError("--half-period applies to mode sho only")
        if self.B is not None:
            norm = sum(abs(b) ** 2 for b in self.B)
            if abs(norm - 1) > 1e-9:
                raise ConfigError(f"superposition coefficients must satisfy sum |B_n|^2 = 1 (got {norm:.12g})")
        return self

    @property
    def params(self) -> OscillatorParams:
        return OscillatorParams(self.M, self.w, self.hbar)

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Path | None = None) -> "RunConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        spec = data.pop("force_spec", None)
        if spec is not None:
            data["spectrum"] = load_spectrum(spec, base_dir)
        elif isinstance(data.get("spectrum"), dict):
            data["spectrum"] = ForceSpectrum.from_dict(data["spectrum"])
        if data.get("B") is not None:
            data["B"] = tuple(complex(b) for b in data["B"])
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration fields: {sorted(unknown)}")
        if "mode" not in data:
            raise ConfigError("configuration needs a 'mode'")
        return cls(**data).validate()

    def inputs(self) -> dict[str, Any]:
        out: dict[str, Any] = {"n": self.n, "M": self.M, "hbar": self.hbar}
        if self.mode == "mathieu":
            out.update(a=self.a, eps=self.eps)
        else:
            out.update(C=self.C, beta=self.beta, D=self.D, phi=self.phi, w=self.w)
        if self.half_period:
            out["half_period"] = True
        if self.spectrum is not None:
            out["spectrum"] = json.loads(self.spectrum.to_json())
        if self.B is not None:
            out["B"] = [[b.real, b.imag] for b in self.B]
        out["method"] = self.method
        return out


def load_spectrum(source, base_dir: Path | None = None) -> ForceSpectrum:
    """Spectrum from an inline mapping, a JSON string, or a path to a JSON file."""
    try:
        if isinstance(source, dict):
            return ForceSpectrum.from_dict(source)
        text = str(source).strip()
        if text.startswith("{"):
            return ForceSpectrum.from_json(text)
        path = Path(text)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return ForceSpectrum.from_json(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read force spectrum {source!r}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed force spectrum {source!r}: {exc}") from exc


@dataclass
class ResultRecord:
    mode: str
    status: str
    inputs: dict[str, Any]
    period: float | None = None
    geometric: dict[str, float] = field(default_factory=dict)
    dynamical: dict[str, float] = field(default_factory=dict)
    total: float | None = None
    discrepancy: float | None = None
    relative_discrepancy: float | None = None
    details: dict[str, Any] = field(default_factory=dict)
    message: str = ""

    def __post_init__(self):
        values = list(self.geometric.values())
        if len(values) >= 2 and self.discrepancy is None:
            self.discrepancy = max(values) - min(values)
            scale = max(abs(v) for v in values)
            self.relative_discrepancy = self.discrepancy / scale if scale else 0.0
        for f in dataclasses.fields(self):
            setattr(self, f.name, _round(getattr(self, f.name)))

    @property
    def primary_geometric(self) -> float | None:
        for tag in _PRIMARY_ORDER:
            if tag in self.geometric:
                return self.geometric[tag]
        return None

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["geometric_mod2pi"] = {k: _round(phase.wrap_phase(v)) for k, v in self.geometric.items()}
        out["dynamical_mod2pi"] = {k: _round(phase.wrap_phase(v)) for k, v in self.dynamical.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ResultRecord":
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def csv_row(self) -> dict[str, Any]:
        row: dict[str, Any] = {c: "" for c in CSV_COLUMNS}
        row.update(mode=self.mode, status=self.status, message=self.message)
        for key in ("n", "C", "beta", "D", "phi", "M", "w", "hbar", "a", "eps"):
            if key in self.inputs:
                row[key] = self.inputs[key]
        for tag, v in self.geometric.items():
            row[f"geometric_{tag}"] = v
        for tag, v in self.dynamical.items():
            row[f"dynamical_{tag}"] = v
        primary = self.primary_geometric
        if primary is not None:
            row["geometric_mod2pi"] = _round(phase.wrap_phase(primary))
        for key in ("period", "total", "discrepancy", "relative_discrepancy"):
            value = getattr(self, key)
            row[key] = "" if value is None else value
        return row


# -- dispatch -----------------------------------------------------------------

def _wants(method: str, *tags: str) -> bool:
    return method == "both" or method in tags


def _run_sho(cfg: RunConfig) -> ResultRecord:
    params = cfg.params
    basis = HomogeneousBasis(cfg.C, cfg.beta, params)
    xp = ParticularSolution(params, None, cfg.D, cfg.phi)
    inputs = cfg.inputs()
    if cfg.B is not None:
        rep = Representation(params, basis, xp)
        value = phase.superposition_phase(Superposition(rep, cfg.B), params)
        return ResultRecord("sho", "ok", inputs, params.tau0, {"closed_form": value},
                            details={"formula": "superposition"})
    geometric: dict[str, float] = {}
    dynamical: dict[str, float] = {}
    details: dict[str, Any] = {}
    if cfg.half_period:
        period = 0.5 * params.tau0
        if _wants(cfg.method, "closed"):
            geometric["closed_form"] = phase.half_period_phase(basis, cfg.n, cfg.D)
        if cfg.D != 0:
            raise phase.FictitiousSolutionPresent("half-period phase needs D = 0")
    else:
        period = params.tau0
        if _wants(cfg.method, "closed"):
            width, center = phase.decomposition(basis, cfg.D, params, cfg.n)
            geometric["closed_form"] = width + center
            details.update(width_term=width, center_term=center)
    state = None
    if basis.omega > 0:
        state = EigenState(Representation(params, basis, xp), cfg.n)
    elif _wants(cfg.method, "quadrature"):
        details["note"] = "Omega < 0: eigenfunctions not normalizable, quadrature skipped"
    if state is not None and _wants(cfg.method, "quadrature"):
        geometric["quadrature"] = phase.geometric_phase_integral(state, period)
        dynamical["quadrature"] = phase.dynamical_phase(state, period, "quadrature")
    if not cfg.half_period and _wants(cfg.method, "closed"):
        if state is not None:
            dynamical["closed_form"] = phase.dynamical_phase(state, period, "closed_form")
    total = None
    if state is not None:
        factor = quasi_periodicity_check(state, period)
        total = math.atan2(factor.imag, factor.real)
    return ResultRecord("sho", "ok", inputs, period, geometric, dynamical, total, details=details)


def _run_driven(cfg: RunConfig) -> ResultRecord:
    params = cfg.params
    spectrum = cfg.spectrum
    basis = HomogeneousBasis(cfg.C, cfg.beta, params)
    xp = ParticularSolution(params, spectrum, cfg.D, cfg.phi)
    inputs = cfg.inputs()
    comm = commensurability(params, spectrum.w_f)
    details: dict[str, Any] = {}
    if comm:
        details.update(N=comm.N, p=comm.p)
    special = cfg.C == 1 and cfg.beta == 0 and cfg.D == 0
    geometric: dict[str, float] = {}
    if special:
        period = spectrum.tau_f
        details["formula"] = "special representation, tau_f-evolution"
        if _wants(cfg.method, "closed"):
            geometric["closed_form"] = phase.closed_form_special_rep(spectrum, params)
    elif isinstance(comm, Commensurability):
        period = comm.N * params.tau0
        details["formula"] = "N tau0-evolution"
        if _wants(cfg.method, "closed"):
            geometric["closed_form"] = phase.closed_form_full(basis, xp, comm, cfg.n)
    else:
        raise phase.PhaseUndefined(
            f"tau_f/tau0 = {params.w / spectrum.w_f!r} is not rational within the denominator cap; "
            "no finite period makes both rho and x_p repeat"
        )
    if _wants(cfg.method, "quadrature"):
        state = EigenState(Representation(params, basis, xp), cfg.n)
        geometric["quadrature"] = phase.geometric_phase_integral(state, period)
    return ResultRecord("driven", "ok", inputs, period, geometric, details=details)


def _run_mathieu(cfg: RunConfig) -> ResultRecord:
    mp = mathieu.MathieuParams(cfg.a, cfg.eps, cfg.M, cfg.hbar)
    inputs = cfg.inputs()
    floquet = mathieu.stability_probe(mp)
    details: dict[str, Any] = {"floquet_trace": floquet.trace, "stability": floquet.classification}
    geometric: dict[str, float] = {}
    if _wants(cfg.method, "perturbative", "closed"):
        geometric["perturbative"] = mathieu.mathieu_phase_perturbative(mp, cfg.n)
        geometric["series"] = mathieu.mathieu_phase_series(mp, cfg.n, order=mathieu._max_safe_order(cfg.a))
    if _wants(cfg.method, "numeric", "quadrature"):
        geometric["numeric"] = mathieu.mathieu_phase_numeric(mp, cfg.n)
    record = ResultRecord("mathieu", "ok", inputs, mathieu.PERIOD, geometric, details=details)
    if "perturbative" in geometric and "numeric" in geometric:
        diff = abs(geometric["perturbative"] - geometric["numeric"])
        scale = abs(geometric["numeric"]) or 1.0
        record.discrepancy, record.relative_discrepancy = _round(diff), _round(diff / scale)
    return record


_DISPATCH = {"sho": _run_sho, "driven": _run_driven, "mathieu": _run_mathieu}


def run(config: RunConfig) -> list[ResultRecord]:
    """Run one configuration.  Domain failures become a record status, not an exception."""
    config.validate()
    try:
        return [_DISPATCH[config.mode](config)]
    except OscPhaseError as exc:
        if isinstance(exc, ConfigError):
            raise
        return [ResultRecord(config.mode, exc.status, config.inputs(), message=str(exc))]


# -- sweeps -------------------------------------------------------------------

SWEEPABLE = ("C", "beta", "D", "phi", "n", "M", "w", "hbar", "a", "eps")


def sweep_values(start: float, stop: float, steps: int, spacing: str = "linear") -> list[float]:
    if steps < 1:
        raise ConfigError("--steps must be >= 1")
    if spacing == "linear":
        return [float(v) for v in np.linspace(start, stop, steps)]
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log spacing needs positive bounds")
        return [float(v) for v in np.geomspace(start, stop, steps)]
    raise ConfigError(f"spacing must be 'linear' or 'log', got {spacing!r}")


def sweep(config: RunConfig, param: str, values: Iterable[float]) -> Iterator[ResultRecord]:
    """One record per grid point, in grid order.  Point failures are recorded, not raised."""
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param!r}; choose one of {SWEEPABLE}")
    config.validate()
    for value in values:
        point = dataclasses.replace(config, **{param: int(round(value)) if param == "n" else value})
        try:
            yield from run(point)
        except ConfigError as exc:
            yield ResultRecord(config.mode, exc.status, {param: value}, message=str(exc))


class RecordWriter:
    """Streams records as CSV rows or as a JSON array, flushing after each record."""

    def __init__(self, stream: TextIO, fmt: str = "json"):
        if fmt not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {fmt!r}")
        self.stream, self.fmt, self.count = stream, fmt, 0
        if fmt == "csv":
            self._csv = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
            self._csv.writeheader()
        else:
            stream.write("[")

    def write(self, record: ResultRecord):
        if self.fmt == "csv":
            self._csv.writerow(record.csv_row())
        else:
            self.stream.write(("," if self.count else "") + "\n" + record.to_json())
        self.count += 1
        self.stream.flush()

    def close(self):
        if self.fmt == "json":
            self.stream.write("\n]\n")
        self.stream.flush()


def render(records: Iterable[ResultRecord], fmt: str = "json") -> str:
    buf = io.StringIO()
    writer = RecordWriter(buf, fmt)
    for r in records:
        writer.write(r)
    writer.close()
    return buf.getvalue()
