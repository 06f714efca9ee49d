"""JSON profile/scattering files and CSV tables with a provenance comment line.

Profile JSON takes one of three shapes:

    {"L": 60, "n": 2048, "u0": [...]}                         samples on [-L, L)
    {"family": "sech2", "A": 0.1, "w": 4.0, "L": 60, "n": 2048}
    {"family": "solitons", "poles": [0.3], "constants": [1.0], "L": 60, "n": 2048}

Scattering JSON: {"K_max", "k", "r_re", "r_im", "poles", "c", "a_half_i"}.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import __version__
from .errors import MissingData
from .forward_scattering import ScatteringData
from .potential_model import PotentialProfile, SpatialGrid, build_profile
from .soliton_rh import DiscreteSpectrum, sample_solution

PathLike = Union[str, Path]


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=float)
    return hashlib.sha256(blob.encode()).hexdigest()


def provenance_line(config: Optional[dict] = None) -> str:
    return f"# chlab {__version__} config={config_hash(config or {})}"


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence], config: Optional[dict] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(provenance_line(config) + "\n")
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def read_csv(path: PathLike) -> Tuple[List[str], List[List[str]]]:
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise MissingData(f"{path} has no header row")
    return rows[0], rows[1:]


def read_columns(path: PathLike, names: Sequence[str]) -> List[np.ndarray]:
    header, rows = read_csv(path)
    out = []
    for name in names:
        if name not in header:
            raise MissingData(f"{path} lacks column {name!r}")
        j = header.index(name)
        out.append(np.array([float(r[j]) for r in rows]))
    return out


def load_json(source: Union[PathLike, dict]) -> dict:
    if isinstance(source, dict):
        return source
    with Path(source).open() as fh:
        return json.load(fh)


def spectrum_from_config(cfg: dict) -> Optional[DiscreteSpectrum]:
    if cfg.get("family") != "solitons":
        return None
    return DiscreteSpectrum(poles=tuple(cfg.get("poles", ())), constants=tuple(cfg.get("constants", ())))


def field_on(cfg: dict, x: np.ndarray, t: float = 0.0) -> np.ndarray:
    """Evaluate the profile described by `cfg` at arbitrary nodes x."""
    fam = cfg.get("family", "samples")
    x = np.asarray(x, dtype=float)
    if fam == "sech2":
        return cfg["A"] / np.cosh((x - cfg.get("x0", 0.0)) / cfg["w"]) ** 2
    if fam == "solitons":
        spec = spectrum_from_config(cfg)
        if spec.N == 0:
            return np.zeros_like(x)
        sol = sample_solution(spec, t, (x[0] - 20.0, x[-1] + 20.0), n_samples=max(2001, x.size), x_grid=x)
        return sol.u_on_x
    if fam == "samples":
        if "u0" not in cfg:
            raise MissingData("profile has no u0 samples")
        grid = SpatialGrid.uniform(float(cfg["L"]), len(cfg["u0"]))
        return np.interp(x, grid.nodes, np.asarray(cfg["u0"], float), left=0.0, right=0.0)
    raise MissingData(f"unknown profile family {fam!r}")


def load_profile(source: Union[PathLike, dict]) -> PotentialProfile:
    cfg = load_json(source)
    L = float(cfg.get("L", 60.0))
    if "u0" in cfg and cfg.get("family", "samples") == "samples":
        n = len(cfg["u0"])
    else:
        n = int(cfg.get("n", 2048))
    grid = SpatialGrid.uniform(L, n)
    if cfg.get("family", "samples") == "samples":
        u0 = np.asarray(cfg["u0"], float)
    else:
        u0 = field_on(cfg, grid.nodes)
    return build_profile(u0, grid)


def save_scattering(data: ScatteringData, path: PathLike) -> Path:
    doc = {
        "K_max": float(data.K_max),
        "k": [float(v) for v in data.k_grid],
        "r_re": [float(v) for v in np.real(data.r_values)],
        "r_im": [float(v) for v in np.imag(data.r_values)],
        "poles": [float(v) for v in data.poles],
        "c": [float(v) for v in data.norming],
        "a_half_i": float(data.a_half_i),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1))
    return path


def load_scattering(source: Union[PathLike, dict]) -> ScatteringData:
    doc = load_json(source)
    for key in ("K_max", "k", "r_re", "r_im", "poles", "c", "a_half_i"):
        if key not in doc:
            raise MissingData(f"scattering file lacks {key!r}")
    r = np.asarray(doc["r_re"], float) + 1j * np.asarray(doc["r_im"], float)
    return ScatteringData(K_max=float(doc["K_max"]), k_grid=np.asarray(doc["k"], float), r_values=r,
                          poles=[float(v) for v in doc["poles"]], norming=[float(v) for v in doc["c"]],
                          a_half_i=float(doc["a_half_i"]))


def spectrum_to_scattering(spec: DiscreteSpectrum, K_max: float = 8.0, nk: int = 1024) -> ScatteringData:
    """Reflectionless scattering record for given poles and constants."""
    from .forward_scattering import symmetric_k_grid

    k = symmetric_k_grid(K_max, nk)
    return ScatteringData(K_max=K_max, k_grid=k, r_values=np.zeros(k.size, complex), poles=list(spec.poles),
                          norming=list(spec.constants), a_half_i=spec.a_half())
