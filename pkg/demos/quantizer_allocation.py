"""
Splitting a fronthaul budget across eigenmodes
==============================================

An AP forwards a K-dimensional signal over a link of ``C_F`` bits per
channel use. After whitening, the signal splits into independent modes with
SNRs ``gamma_k``. The optimized quantizer spends the budget unevenly: strong
modes get fine quantization, weak modes may get none at all.
"""

import numpy as np

from radiostripes.inp import constraint_bits, objective_bits, solve_quantizer
from radiostripes.verification import grid_search_quantizer

gamma = np.array([20.0, 6.0, 1.5, 0.2])

###############################################################################
# Levels and bits per mode as the budget grows. ``a_k = 0`` means the mode
# is dropped; its share of the link goes to the stronger modes.

print(" C_F   lambda   bits per mode                 info (bits)")
for C_F in (1.0, 2.0, 4.0, 8.0, 16.0):
    a, lam = solve_quantizer(gamma, C_F)
    bits = np.log2(1 + a * (gamma + 1))
    print(f"{C_F:4.0f}  {lam:7.4f}   {np.array2string(bits, precision=2):28s}  "
          f"{objective_bits(a, gamma):6.3f}")

###############################################################################
# The budget is always used in full, and the information approaches
# ``sum log2(1 + gamma)`` (no quantization) as ``C_F`` grows.

a, _ = solve_quantizer(gamma, 60.0)
print("\nbudget used at C_F=60:", round(constraint_bits(a, gamma), 12))
print("info at C_F=60:", objective_bits(a, gamma), "limit:", np.log2(1 + gamma).sum())

###############################################################################
# A brute-force check on two modes: try every split of 3 bits on a 1e-3
# grid and keep the best.

g2 = np.array([7.0, 1.0])
a2, _ = solve_quantizer(g2, 3.0)
best, _ = grid_search_quantizer(g2, 3.0)
print(f"\nclosed form {objective_bits(a2, g2):.6f} bits, grid search {best:.6f} bits")
