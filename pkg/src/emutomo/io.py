"""JSON file formats: measurement sets, counts, states, simulation specs.

Complex numbers are written as ``[re, im]`` pairs; matrices as row-major
nested lists of such pairs. Python's float repr is the shortest string that
round-trips, so serialized matrices reload bit-identically.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .measurements import MeasurementSet, pauli_measurement_set, white_measurement_set
from .simulation import NOISE_MODELS, SimulationSpec, nominal_bell_state
from .solver import CountData

AMPLITUDE_NORM_TOL = 1e-6
CIRCULAR_CONVENTION = "R=(1,-i)/sqrt2, L=(1,+i)/sqrt2"
NAMED_SETS = {
    "white": white_measurement_set,
    "pauli1": lambda: pauli_measurement_set(1),
    "pauli2": lambda: pauli_measurement_set(2),
}


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def complex_to_json(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def vector_to_json(v) -> list[list[float]]:
    return [complex_to_json(z) for z in np.asarray(v).ravel()]


def matrix_to_json(m) -> list[list[list[float]]]:
    return [vector_to_json(row) for row in np.asarray(m)]


def _complex(pair, where):
    if isinstance(pair, (int, float)):
        return complex(pair)
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise InputError(f"{where}: expected [re, im], got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def vector_from_json(data, where="vector") -> np.ndarray:
    return np.array([_complex(z, f"{where}[{i}]") for i, z in enumerate(data)], dtype=complex)


def matrix_from_json(data, where="matrix") -> np.ndarray:
    rows = [vector_from_json(row, f"{where}[{i}]") for i, row in enumerate(data)]
    if not rows or any(len(r) != len(rows) for r in rows):
        raise InputError(f"{where}: expected a square matrix of [re, im] pairs")
    return np.array(rows)


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON ({e.msg} at line {e.lineno})") from None


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def file_digest(path) -> dict:
    data = Path(path).read_bytes()
    return {"path": str(path), "sha256": hashlib.sha256(data).hexdigest()}


# measurement sets


def measurement_set_to_json(mset: MeasurementSet) -> dict:
    return {
        "dimension": mset.dimension,
        "circular_convention": CIRCULAR_CONVENTION,
        "projectors": [
            {"label": p.label, "amplitudes": vector_to_json(p.ket)} for p in mset
        ],
    }


def measurement_set_from_json(obj, where="measurement set") -> MeasurementSet:
    if isinstance(obj, str):
        try:
            return NAMED_SETS[obj]()
        except KeyError:
            raise InputError(f"{where}: unknown named set {obj!r}; known: {sorted(NAMED_SETS)}") from None
    try:
        dim = int(obj["dimension"])
        entries = obj["projectors"]
    except (KeyError, TypeError):
        raise InputError(f"{where}: needs 'dimension' and 'projectors' keys") from None
    labels, kets = [], []
    for i, entry in enumerate(entries):
        try:
            label, amps = str(entry["label"]), entry["amplitudes"]
        except (KeyError, TypeError):
            raise InputError(f"{where}: projector {i} needs 'label' and 'amplitudes'") from None
        ket = vector_from_json(amps, f"{where}: projector {label!r}")
        if ket.size != dim:
            raise InputError(f"{where}: projector {label!r} has {ket.size} amplitudes, dimension is {dim}")
        norm = np.linalg.norm(ket)
        if abs(norm - 1.0) > AMPLITUDE_NORM_TOL:
            raise InputError(f"{where}: projector {label!r} has norm {norm:.9f}, expected 1")
        labels.append(label)
        # leave kets that are already unit-norm untouched so files round-trip exactly
        kets.append(ket if abs(norm - 1.0) <= 1e-12 else ket / norm)
    try:
        return MeasurementSet.from_kets(labels, kets)
    except ValueError as e:
        raise InputError(f"{where}: {e}") from None


def load_measurement_set(path) -> MeasurementSet:
    return measurement_set_from_json(read_json(path), str(path))


# counts


def counts_to_json(data: CountData) -> dict:
    if data.labels is None:
        raise ValueError("count data needs labels to be serialized")
    return {"counts": [{"label": lab, "n": float(n)} for lab, n in zip(data.labels, data.counts)]}


def counts_from_json(obj, where="counts") -> CountData:
    try:
        entries = obj["counts"]
        labels = [str(e["label"]) for e in entries]
        values = [float(e["n"]) for e in entries]
    except (KeyError, TypeError, ValueError):
        raise InputError(f"{where}: expected {{'counts': [{{'label': str, 'n': number}}, ...]}}") from None
    dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
    if dupes:
        raise InputError(f"{where}: duplicate count label {dupes[0]!r}")
    try:
        return CountData(np.array(values), tuple(labels))
    except ValueError as e:
        raise InputError(f"{where}: {e}") from None


def load_counts(path) -> CountData:
    return counts_from_json(read_json(path), str(path))


def align_counts(data: CountData, mset: MeasurementSet, where="counts") -> CountData:
    try:
        return data.aligned_to(mset)
    except ValueError as e:
        raise InputError(f"{where}: {e}") from None


# states


def state_to_json(rho) -> dict:
    return {"matrix": matrix_to_json(rho)}


def state_from_json(obj, where="state") -> np.ndarray:
    if isinstance(obj, dict) and "bell" in obj:
        bell = obj["bell"]
        return nominal_bell_state(float(bell.get("mixing", 0.0)), tuple(bell.get("rotation_angles", (0.0, 0.0))))
    if isinstance(obj, dict) and "matrix" in obj:
        obj = obj["matrix"]
    return matrix_from_json(obj, where)


def load_state(path) -> np.ndarray:
    return state_from_json(read_json(path), str(path))


# simulation specs


def simulation_spec_to_json(spec: SimulationSpec) -> dict:
    return {
        "true_state": matrix_to_json(spec.true_state),
        "measurement_set": measurement_set_to_json(spec.measurement_set),
        "shots": float(spec.shots),
        "noise_model": spec.noise_model,
        "misalignment": [float(a) for a in spec.misalignment],
        "seed": int(spec.seed),
    }


def simulation_spec_from_json(obj, where="simulation spec", base_dir=None) -> SimulationSpec:
    problems = []
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected a JSON object")
    for key in ("true_state", "measurement_set", "shots"):
        if key not in obj:
            problems.append(f"missing '{key}'")
    shots = obj.get("shots", 1)
    if not isinstance(shots, (int, float)) or isinstance(shots, bool) or not shots >= 1:
        problems.append(f"'shots' must be a number >= 1, got {shots!r}")
    if obj.get("noise_model", "poisson") not in NOISE_MODELS:
        problems.append(f"'noise_model' must be one of {list(NOISE_MODELS)}, got {obj['noise_model']!r}")
    mis = obj.get("misalignment", [0.0, 0.0])
    if not (isinstance(mis, (list, tuple)) and len(mis) == 2):
        problems.append("'misalignment' must be a pair of angles in radians")
    seed = obj.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        problems.append(f"'seed' must be an integer in [0, 2**64), got {seed!r}")
    if problems:
        raise InputError(f"{where}: " + "; ".join(problems))
    mobj = obj["measurement_set"]
    if isinstance(mobj, dict) and "path" in mobj:
        mpath = Path(mobj["path"])
        if base_dir is not None and not mpath.is_absolute():
            mpath = Path(base_dir) / mpath
        mset = load_measurement_set(mpath)
    else:
        mset = measurement_set_from_json(mobj, f"{where}: measurement_set")
    try:
        rho = state_from_json(obj["true_state"], f"{where}: true_state")
        return SimulationSpec(
            true_state=rho,
            measurement_set=mset,
            shots=float(obj["shots"]),
            noise_model=obj.get("noise_model", "poisson"),
            misalignment=tuple(float(a) for a in obj.get("misalignment", (0.0, 0.0))),
            seed=int(obj.get("seed", 0)),
        )
    except (ValueError, TypeError) as e:
        raise InputError(f"{where}: {e}") from None


def load_simulation_spec(path) -> SimulationSpec:
    return simulation_spec_from_json(read_json(path), str(path), base_dir=Path(path).parent)
