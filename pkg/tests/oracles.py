"""Independent scalar-loop references for the channel expressions.

Deliberately written with plain Python loops over math/cmath so they share
no code path with the vectorized implementations they check.
"""

import cmath
import math


def scatter_channel_loop(scenario):
    out = []
    for m in range(scenario.config.M):
        vx, vy = scenario.bs_elements[m]
        acc = 0j
        for n in range(scenario.config.N):
            ux, uy = scenario.scatter_dirs[n]
            acc += complex(scenario.scatter_gains[n]) * cmath.exp(
                2j * math.pi * (ux * vx + uy * vy))
        out.append(acc)
    return out


def ris_channel_loop(scenario, weights):
    cfg = scenario.config
    out = []
    for m in range(cfg.M):
        vx, vy = scenario.bs_elements[m]
        acc = 0j
        for k, ris in enumerate(scenario.ris_list):
            ax, ay = ris.bs_dir
            bx, by = ris.ue_dir
            inner = 0j
            for p in range(cfg.P):
                cx, cy = ris.element_offsets[p]
                phi = 2 * math.pi * ((ax * vx + ay * vy) + (ax * cx + ay * cy))
                psi = 2 * math.pi * (bx * cx + by * cy)
                inner += complex(weights[k][p]) * cmath.exp(1j * (phi + psi))
            acc += complex(ris.gain) / cfg.P * inner
        out.append(acc)
    return out


def nearfield_loop(elements, point):
    out = []
    for ex, ey in elements:
        d = math.hypot(point[0] - ex, point[1] - ey)
        out.append(cmath.exp(2j * math.pi * d) / (4 * math.pi * d))
    return out


def received_power_loop(row, b, chi):
    acc = 0j
    for r, w in zip(row, b):
        acc += complex(r) * complex(w)
    return abs(acc) ** 2 * chi
