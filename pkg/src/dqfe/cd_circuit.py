"""Single-step counterdiabatic impulse circuits and OpenQASM 3 export.

The quench circuit for an encoded Hamiltonian applies the first-order
gauge-potential rotation in one digitized step: a Y rotation per field
term and a YZ+ZY rotation pair per coupling, with every coefficient
folded into one global impulse strength theta.  All rotation gates follow
the convention

    gate(angle) = exp(-i * angle/2 * P)

for their Pauli string P, matching the OpenQASM stdgates semantics of
``ry``/``rx``; ``rzz`` and ``ryz`` extend it to two-qubit strings.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .encoder import IsingHamiltonian

GATE_KINDS = ("ry", "rx", "h", "rzz", "ryz")
_ONE_QUBIT = ("ry", "rx", "h")


class QasmError(ValueError):
    """Emitted text does not conform to the exported subset grammar."""


@dataclass(frozen=True)
class Gate:
    """A gate application; ``ryz`` puts Y on qubits[0] and Z on qubits[1]."""

    kind: str
    qubits: tuple
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        q = tuple(int(x) for x in self.qubits)
        want = 1 if self.kind in _ONE_QUBIT else 2
        if len(q) != want:
            raise ValueError(f"{self.kind} takes {want} qubit(s), got {q}")
        if len(set(q)) != len(q):
            raise ValueError(f"{self.kind} qubits must be distinct")
        if any(x < 0 for x in q):
            raise ValueError("qubit indices must be non-negative")
        if self.kind == "h":
            if self.angle is not None:
                raise ValueError("h takes no angle")
        else:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        object.__setattr__(self, "qubits", q)

    @property
    def max_qubit(self) -> int:
        return max(self.qubits)


@dataclass
class QuantumCircuit:
    n: int
    gates: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("circuit needs at least one qubit")
        for g in self.gates:
            if g.max_qubit >= self.n:
                raise ValueError(f"gate {g} outside qubit range 0..{self.n - 1}")

    def add(self, gate: Gate) -> None:
        if gate.max_qubit >= self.n:
            raise ValueError(f"gate {gate} outside qubit range 0..{self.n - 1}")
        self.gates.append(gate)


@dataclass(frozen=True)
class ImpulseParams:
    """Impulse strength in radians per unit coefficient, plus the nominal
    schedule evaluation point (recorded for provenance; in a single-step
    impulse only the integrated angle matters, so it does not enter the
    gate angles)."""

    theta: float = 0.5
    lambda_eval: float = 0.5

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if not (0.0 < self.lambda_eval < 1.0):
            raise ValueError("lambda_eval must lie in (0, 1)")


def build_cd_circuit(
    h: IsingHamiltonian, params: ImpulseParams = ImpulseParams(), sample_id=None
) -> QuantumCircuit:
    """One digitized impulse step for the encoded Hamiltonian.

    Per field h_i: exp(-i theta h_i Y_i); per coupling m_ij: exp(-i theta
    m_ij Y_i Z_j) then exp(-i theta m_ij Z_i Y_j).  One-body rotations come
    first in ascending qubit order, then coupling terms in edge-list order.
    """
    gates = []
    for q in range(h.n):
        gates.append(Gate("ry", (q,), 2.0 * params.theta * float(h.fields[q])))
    for i, j, m in h.couplings:
        angle = 2.0 * params.theta * m
        gates.append(Gate("ryz", (i, j), angle))
        gates.append(Gate("ryz", (j, i), angle))
    meta = {"theta": params.theta, "lambda_eval": params.lambda_eval}
    if sample_id is not None:
        meta["sample_id"] = sample_id
    return QuantumCircuit(h.n, gates, meta)


def decompose_two_body(gate: Gate) -> list:
    """Rewrite a YZ rotation as basis-change RX, RZZ, inverse RX.

    RX(pi/2) maps the Y axis of the first qubit onto Z, so the sandwich
    reproduces exp(-i angle/2 Y (x) Z) exactly (dense-oracle checked).
    """
    if gate.kind != "ryz":
        raise ValueError(f"can only decompose ryz gates, got {gate.kind!r}")
    a, b = gate.qubits
    half_pi = math.pi / 2.0
    return [
        Gate("rx", (a,), half_pi),
        Gate("rzz", (a, b), gate.angle),
        Gate("rx", (a,), -half_pi),
    ]


_PI_FORMS = (
    (0.0, "0"),
    (math.pi, "pi"),
    (-math.pi, "-pi"),
    (math.pi / 2.0, "pi/2"),
    (-math.pi / 2.0, "-pi/2"),
    (math.pi / 4.0, "pi/4"),
    (-math.pi / 4.0, "-pi/4"),
)


def _format_angle(angle: float) -> str:
    for val, text in _PI_FORMS:
        if angle == val:
            return text
    return repr(angle)


def _parse_angle(token: str) -> float:
    for val, text in _PI_FORMS:
        if token == text:
            return val
    try:
        return float(token)
    except ValueError:
        raise QasmError(f"cannot parse angle token {token!r}") from None


def export_qasm(circuit: QuantumCircuit) -> str:
    """OpenQASM 3 text for the circuit, with terminal Z-basis measurement.

    ``ryz`` gates are emitted through :func:`decompose_two_body`; ``rzz``
    is defined in the prologue since stdgates does not ship it.  Classical
    bit i records qubit i.
    """
    lines = [
        "OPENQASM 3.0;",
        'include "stdgates.inc";',
        "gate rzz(theta) a, b { cx a, b; rz(theta) b; cx a, b; }",
        f"qubit[{circuit.n}] q;",
        f"bit[{circuit.n}] c;",
    ]
    flat = []
    for g in circuit.gates:
        flat.extend(decompose_two_body(g) if g.kind == "ryz" else [g])
    for g in flat:
        if g.kind == "h":
            lines.append(f"h q[{g.qubits[0]}];")
        elif g.kind in ("ry", "rx"):
            lines.append(f"{g.kind}({_format_angle(g.angle)}) q[{g.qubits[0]}];")
        else:  # rzz
            i, j = g.qubits
            lines.append(f"rzz({_format_angle(g.angle)}) q[{i}], q[{j}];")
    for q in range(circuit.n):
        lines.append(f"c[{q}] = measure q[{q}];")
    return "\n".join(lines) + "\n"


_QASM_GATE_RE = re.compile(
    r"^(?P<name>h|rx|ry|rzz)\s*(?:\((?P<angle>[^)]+)\))?\s*"
    r"q\[(?P<q0>\d+)\]\s*(?:,\s*q\[(?P<q1>\d+)\])?;$"
)
_QASM_MEASURE_RE = re.compile(r"^c\[(?P<c>\d+)\]\s*=\s*measure\s+q\[(?P<q>\d+)\];$")


def parse_qasm(text: str) -> QuantumCircuit:
    """Strict parser for the exported subset; the round-trip check for
    :func:`export_qasm`.  Returns a circuit of h/rx/ry/rzz gates; the
    measurement count is recorded under metadata["measurements"]."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 5:
        raise QasmError("truncated program")
    if lines[0] != "OPENQASM 3.0;":
        raise QasmError(f"bad version line: {lines[0]!r}")
    if lines[1] != 'include "stdgates.inc";':
        raise QasmError(f"bad include line: {lines[1]!r}")
    if not lines[2].startswith("gate rzz(theta)"):
        raise QasmError("missing rzz definition")
    m = re.match(r"^qubit\[(\d+)\] q;$", lines[3])
    if not m:
        raise QasmError(f"bad qubit declaration: {lines[3]!r}")
    n = int(m.group(1))
    if not re.match(rf"^bit\[{n}\] c;$", lines[4]):
        raise QasmError(f"bad bit declaration: {lines[4]!r}")
    gates, measured = [], []
    for ln in lines[5:]:
        gm = _QASM_GATE_RE.match(ln)
        if gm:
            if measured:
                raise QasmError(f"gate after measurement: {ln!r}")
            name = gm.group("name")
            if name == "h":
                if gm.group("angle") is not None or gm.group("q1") is not None:
                    raise QasmError(f"malformed h line: {ln!r}")
                gates.append(Gate("h", (int(gm.group("q0")),)))
            elif name in ("rx", "ry"):
                if gm.group("angle") is None or gm.group("q1") is not None:
                    raise QasmError(f"malformed {name} line: {ln!r}")
                gates.append(
                    Gate(name, (int(gm.group("q0")),), _parse_angle(gm.group("angle")))
                )
            else:
                if gm.group("angle") is None or gm.group("q1") is None:
                    raise QasmError(f"malformed rzz line: {ln!r}")
                gates.append(
                    Gate(
                        "rzz",
                        (int(gm.group("q0")), int(gm.group("q1"))),
                        _parse_angle(gm.group("angle")),
                    )
                )
            continue
        mm = _QASM_MEASURE_RE.match(ln)
        if mm:
            if int(mm.group("c")) != int(mm.group("q")):
                raise QasmError(f"bit/qubit mismatch in measurement: {ln!r}")
            measured.append(int(mm.group("q")))
            continue
        raise QasmError(f"unrecognized line: {ln!r}")
    if measured != list(range(n)):
        raise QasmError(f"expected measurements of all {n} qubits in order")
    return QuantumCircuit(n, gates, {"measurements": len(measured)})
