"""Reference matrices used by tests, the CLI and the benchmark."""

import numpy as np

SQ2 = np.sqrt(0.5)

# 2x2 operator whose middle isotrace slice is a disk of radius 1/4
EX21 = np.array([[1 + 0.5j, 0.5j],
                 [0.5j, 0.5j]])

EX22_B1 = np.array([[1.0, 0, 1], [0, 2, 1], [1, 1, 3]])
EX22_B2 = np.diag([1.0, 1.0, 0.0])
EX22 = EX22_B1 + 1j * EX22_B2

_P = np.zeros((5, 5))
_P[1, 3] = _P[3, 1] = _P[2, 4] = _P[4, 2] = 1
_Q = np.zeros((5, 5))
_Q[0, 3] = _Q[3, 0] = _Q[1, 4] = _Q[4, 1] = 1
EX23 = _P + 1j * _Q

# reducible / irreducible pair sharing one spectral scale
EX24_C1 = np.array([[1 + 1j, 0, 0],
                    [0, 1 + 2j, 1],
                    [0, 1, 1]])
EX24_C2 = np.array([[1, SQ2, 0],
                    [SQ2, 1 + 1j, SQ2],
                    [0, SQ2, 1 + 2j]])

DIAG01I = np.diag([0, 1, 1j])
JORDAN2 = np.array([[0, 1], [0, 0]], dtype=complex)

ALL = {
    "ex21": EX21,
    "ex22": EX22,
    "ex23": EX23,
    "ex24_c1": EX24_C1,
    "ex24_c2": EX24_C2,
    "diag01i": DIAG01I,
    "jordan2": JORDAN2,
}
