"""Pauli-quaternion algebra on 2x2 complex matrices.

Decompose a matrix, multiply in quaternion form, and check the results
against ordinary matrix algebra.
"""

import numpy as np

from paulistab import PauliQuaternion, decompose, eigenvalues, q_inverse, q_mul, recompose, semi_norm_sq

rng = np.random.default_rng(0)
A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
B = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))

a, b = decompose(A), decompose(B)
print("components of A:", [complex(c) for c in a])
print("product error:  ", np.abs(recompose(q_mul(a, b)) - A @ B).max())
print("semi-norm^2 vs det:", complex(semi_norm_sq(a)), np.linalg.det(A))
print("inverse error:  ", np.abs(recompose(q_inverse(a)) - np.linalg.inv(A)).max())
print("eigenvalues:    ", [complex(v) for v in eigenvalues(a)], np.linalg.eigvals(A))

# the unit elements: J and K anticommute and JK is the third one
J, K = PauliQuaternion(0, 0, 1, 0), PauliQuaternion(0, 0, 0, 1)
print("J K =", recompose(q_mul(J, K)).tolist(), " K J =", recompose(q_mul(K, J)).tolist())
