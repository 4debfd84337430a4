"""Built-in quantum protocols for d = 3, 4, 5.

d=3 is built from closed-form amplitudes (thirds, cube roots of unity,
1/sqrt(7)) and is exact to rounding.  d=4 and d=5 come from decimal tables
with 4 and 5 digits; they are orthonormal only to about 1e-4, so they carry
``tol = PRINTED_TOL``.

The decimal tables are kept exactly as typed, row labels included.  Label
repairs are applied afterwards by :func:`_assemble`, one named mapping per
table, so each correction is visible on its own.
"""

from __future__ import annotations

import numpy as np

from .linalg import PRINTED_TOL, TOL, orthonormal_completion
from .quantum import Measurement, QuantumProtocol

SUPPORTED = (3, 4, 5)


def _protocol_d3() -> QuantumProtocol:
    w = np.exp(2j * np.pi / 3)
    e0, e1, e2 = np.eye(3, dtype=complex)
    psi = {
        "21": e0,
        "12": e1,
        "00": e2,
        "01": (2 * e0 + e1 - 2 * e2) / 3,
        "10": (e0 + 2 * e1 + 2 * e2) / 3,
        "22": (2 * e0 - 2 * e1 + e2) / 3,
        "02": (w**2 * e0 + 2 * w * e1 + 2 * e2) / 3,
        "20": (2 * w**2 * e0 + w * e1 - 2 * e2) / 3,
        "11": (2 * w**2 * e0 - 2 * w * e1 + e2) / 3,
    }
    p1 = np.exp(1j * np.pi / 3)
    p2 = np.exp(2j * np.pi / 3)
    r7 = np.sqrt(7)
    first = [
        (psi["00"] - psi["01"] + psi["02"]) / r7,
        (psi["12"] + psi["10"] + p1 * psi["11"]) / r7,
        (psi["21"] + psi["22"] + p2 * psi["20"]) / r7,
    ]
    second = [
        (psi["00"] + psi["10"] - psi["20"]) / r7,
        (psi["21"] + psi["01"] + p2 * psi["11"]) / r7,
        (-psi["12"] + psi["22"] + p1 * psi["02"]) / r7,
    ]
    states = {(int(k[0]), int(k[1])): v for k, v in psi.items()}
    return QuantumProtocol(
        3, 3, states, (Measurement.from_vectors(first), Measurement.from_vectors(second)), TOL
    )


# fmt: off
_D4_STATES = [
    ("00", [0, 0, 0, 1]),
    ("31", [0, 0, 1, 0]),
    ("13", [0, 1, 0, 0]),
    ("22", [1, 0, 0, 0]),
    ("01", [-0.1345 + 0.0225j, -0.2539 - 0.3035j, 0.5839 + 0.0576j, 0.6933]),
    ("10", [0.1283 - 0.0404j, 0.3662 + 0.4578j, -0.3931 - 0.0344j, 0.6947]),
    ("32", [-0.6624 + 0.2077j, -0.2564 - 0.3007j, -0.5853 - 0.0330j, 0.1349]),
    ("23", [-0.6843 + 0.1143j, 0.3204 + 0.4909j, 0.3862 + 0.0849j, -0.1366]),
    ("20", [-0.6194 + 0.2157j, 0.2488 + 0.2796j, 0.0007 - 0.0001j, 0.6556]),
    ("02", [-0.6191 + 0.2154j, 0.0004 + 0.0002j, -0.3737 - 0.0291j, -0.6556]),
    ("11", [-0.3285 + 0.1796j, -0.5105 - 0.4114j, 0.6532 - 0.0575j, -0.0010]),
    ("33", [0.0005 + 0.0000j, 0.4360 + 0.4899j, 0.6534 + 0.0510j, -0.3747]),
    ("30", [0.3702 - 0.1379j, -0.0719 - 0.1161j, 0.6935 + 0.0054j, -0.5868]),
    ("03", [0.3780 - 0.1122j, -0.4163 - 0.5556j, 0.1361 - 0.0021j, 0.5865]),
    ("12", [0.5494 - 0.2050j, 0.4360 + 0.5393j, 0.1361 - 0.0159j, 0.3954]),
    ("21", [-0.5627 + 0.1673j, 0.0751 + 0.1129j, 0.6935 + 0.0271j, 0.3941]),
]
_D4_FIRST = [
    ("E0", [-0.2490 + 0.0899j, 0.1973 + 0.2519j, -0.3188 - 0.0254j, -0.8516]),
    ("E1", [0.3019 - 0.1035j, 0.5355 + 0.6622j, -0.2626 - 0.0386j, 0.3202]),
    ("E2", [-0.8013 + 0.2896j, 0.2154 + 0.2354j, 0.3198 + 0.0008j, 0.2646]),
    ("E4", [-0.3024 + 0.1035j, -0.1890 - 0.1869j, -0.8509 - 0.0298j, 0.3197]),
]
_D4_SECOND = [
    ("F0", [0.2496 - 0.0892j, -0.2004 - 0.2484j, 0.3187 + 0.0114j, -0.8522]),
    ("F1", [-0.3082 + 0.0849j, -0.1800 - 0.1951j, 0.8493 + 0.0679j, 0.3186]),
    ("F2", [-0.8022 + 0.2868j, -0.2041 - 0.2454j, -0.3195 - 0.0067j, -0.2650]),
    ("F3", [0.3076 - 0.0847j, -0.5244 - 0.6714j, -0.2618 - 0.0427j, 0.3195]),
]

_D5_STATES = [
    ("00", [0, 0, 0, 0, 1]),
    ("41", [0, 0, 0, 1, 0]),
    ("14", [0, 0, 1, 0, 0]),
    ("32", [0, 1, 0, 0, 0]),
    ("23", [1, 0, 0, 0, 0]),
    ("10", [0.23497 - 0.07340j, 0.16411 - 0.10914j, 0.42583 + 0.50168j, -0.19303 + 0.15607j, -0.63712]),
    ("01", [-0.18462 + 0.06593j, -0.20731 + 0.12870j, -0.16285 - 0.18055j, 0.51463 - 0.38890j, -0.65332]),
    ("42", [-0.24112 + 0.08538j, -0.56454 + 0.30980j, -0.12652 - 0.15098j, -0.52601 + 0.37747j, -0.24885]),
    ("24", [-0.60757 + 0.21215j, -0.21817 + 0.12492j, 0.41531 + 0.49038j, 0.16960 - 0.12466j, 0.25570]),
    ("33", [0.62265 - 0.18358j, -0.57837 + 0.29870j, 0.13628 + 0.19373j, 0.19499 - 0.14425j, 0.19985]),
    ("20", [-0.37409 + 0.52632j, -0.24065 - 0.01880j, 0.09926 - 0.17359j, -0.07590 - 0.25674j, 0.64274]),
    ("02", [0.13977 - 0.20058j, 0.64176 + 0.05606j, -0.12928 + 0.21553j, 0.06055 + 0.19160j, 0.64938]),
    ("42", [-0.37619 + 0.53274j, 0.18936 + 0.01847j, -0.12115 + 0.20752j, 0.19401 + 0.62175j, -0.23774]),
    ("24", [0.11346 - 0.15816j, -0.65018 - 0.05766j, -0.33344 + 0.55217j, 0.07480 + 0.22713j, 0.25061]),
    ("33", [0.14855 - 0.19490j, -0.25265 - 0.02560j, 0.34980 - 0.54834j, 0.17203 + 0.61397j, 0.21416]),
    ("30", [-0.00534 - 0.24987j, 0.47253 + 0.43074j, 0.24297 + 0.07217j, -0.20191 + 0.01868j, -0.65066]),
    ("03", [0.02569 + 0.64638j, -0.18296 - 0.16861j, -0.19043 - 0.04582j, 0.25060 + 0.00014j, -0.64689]),
    ("12", [-0.01010 - 0.19929j, -0.49199 - 0.42851j, 0.63332 + 0.13808j, -0.24023 + 0.00154j, -0.23796]),
    ("21", [0.04174 + 0.64483j, 0.15569 + 0.12225j, 0.24257 + 0.04356j, -0.65035 + 0.01444j, 0.24365]),
    ("44", [0.00276 + 0.24838j, 0.16596 + 0.19200j, 0.61595 + 0.19261j, 0.64285 + 0.04428j, 0.20539]),
    ("40", [0.12419 + 0.15209j, -0.04125 - 0.23659j, -0.02914 - 0.24743j, 0.20620 - 0.62431j, 0.63986]),
    ("04", [-0.15096 - 0.18341j, 0.03763 + 0.20009j, 0.06565 + 0.64204j, -0.07449 + 0.23344j, 0.65234]),
    ("31", [-0.39083 - 0.51585j, 0.05268 + 0.25138j, -0.05547 - 0.64174j, -0.06555 + 0.18659j, 0.24731]),
    ("13", [-0.14877 - 0.19642j, 0.14476 + 0.63049j, 0.01710 + 0.20906j, 0.19415 - 0.61023j, -0.25833]),
    ("22", [-0.40081 - 0.51459j, -0.13601 - 0.63082j, 0.03136 + 0.24802j, 0.08812 - 0.22522j, -0.19270]),
]
_D5_FIRST = [
    ("E0", [-0.03309 + 0.25670j, -0.25437 - 0.07003j, -0.06867 - 0.25502j, 0.18550 - 0.19008j, -0.85036]),
    ("E1", [0.25000 + 0.08268j, 0.03584 - 0.27017j, 0.42688 + 0.73497j, -0.24068 - 0.09143j, -0.26020]),
    ("E2", [0.36296 - 0.76531j, 0.17253 - 0.20234j, -0.26009 + 0.03026j, 0.21365 + 0.17299j, -0.26023]),
    ("E3", [-0.22262 - 0.15015j, 0.71573 + 0.45450j, 0.25044 - 0.09303j, -0.15832 - 0.19830j, -0.27073]),
    ("E4", [-0.22262 - 0.15015j, 0.71573 + 0.45450j, 0.25044 - 0.09303j, -0.15832 - 0.19830j, -0.27073]),
]
_D5_SECOND = [
    ("F0", [-0.11375 + 0.23729j, -0.21967 - 0.13607j, -0.14148 - 0.23461j, 0.12307 - 0.24902j, 0.84366]),
    ("F1", [0.22685 + 0.13877j, 0.09381 - 0.24781j, 0.26314 - 0.04382j, -0.57053 + 0.62201j, 0.27479]),
    ("F2", [0.26939 - 0.00519j, 0.81916 + 0.21292j, -0.24642 + 0.11038j, 0.24692 + 0.08601j, 0.26415]),
    ("F3", [0.11939 - 0.84029j, -0.03406 + 0.26824j, 0.19925 - 0.16385j, -0.21871 - 0.15566j, 0.26064]),
    ("F4", [-0.25062 - 0.06551j, -0.17506 + 0.20714j, 0.21985 + 0.81608j, 0.16329 + 0.20819j, 0.27390]),
]
# fmt: on

# Row position -> corrected label, for rows whose typed label is wrong.
# Rows 12-14 repeat labels 42, 24, 33 from the previous class although the
# class they sit in is P_2 = {02, 20, 11, 34, 43}.  Assigning them by the
# outcome each state is actually decoded to gives 43, 34, 11, and the same
# test shows rows 22/23 (typed 31, 13) are swapped within P_4.
D5_RELABEL = {12: "43", 13: "34", 14: "11", 22: "13", 23: "31"}

# The naive positional reading 42->11, 24->34, 33->43 without the P_4 swap.
# Kept for comparison only; it evaluates to about 0.6143.
D5_POSITIONAL_RELABEL = {12: "11", 13: "34", 14: "43"}


def _assemble(d, rows, relabel, first, second) -> QuantumProtocol:
    states = {}
    for pos, (label, vec) in enumerate(rows):
        label = relabel.get(pos, label)
        x = (int(label[0]), int(label[1]))
        if x in states:
            raise ValueError(f"label {label} assigned twice")
        states[x] = np.array(vec, dtype=complex)
    return QuantumProtocol(
        d, d, states, (Measurement.from_vectors(first), Measurement.from_vectors(second)), PRINTED_TOL
    )


def _protocol_d4() -> QuantumProtocol:
    # The fourth first-measurement row is labelled E4; it is outcome 3.
    first = [np.array(v, dtype=complex) for _, v in _D4_FIRST]
    second = [np.array(v, dtype=complex) for _, v in _D4_SECOND]
    return _assemble(4, _D4_STATES, {}, first, second)


def _protocol_d5(relabel=None) -> QuantumProtocol:
    # Rows E3 and E4 are identical; keep one as outcome 3 and rebuild
    # outcome 4 as the unit vector orthogonal to the other four.
    first = [np.array(v, dtype=complex) for _, v in _D5_FIRST[:4]]
    first += orthonormal_completion(first, 5)
    second = [np.array(v, dtype=complex) for _, v in _D5_SECOND]
    return _assemble(5, _D5_STATES, D5_RELABEL if relabel is None else relabel, first, second)


def builtin_protocol(d: int) -> QuantumProtocol:
    """The reference protocol for ``d`` in (3, 4, 5)."""
    if d == 3:
        return _protocol_d3()
    if d == 4:
        return _protocol_d4()
    if d == 5:
        return _protocol_d5()
    raise ValueError(f"no built-in protocol for d={d}; available: {', '.join(map(str, SUPPORTED))}")


def positional_d5_protocol() -> QuantumProtocol:
    """d=5 protocol under the naive positional relabelling (see D5_POSITIONAL_RELABEL)."""
    return _protocol_d5(D5_POSITIONAL_RELABEL)
