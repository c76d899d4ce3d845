"""Independent brute-force oracles used by the unit and acceptance tests.

Everything here is written from first principles on purpose: plain nested
loops, dense matrices and high-order Gauss quadrature, sharing no code with
the vectorized assembly under test.
"""
import numpy as np

from sdfem.stabilization import DeltaVariant


def dense_sdfem_matrix(mesh, problem, variant, c_star, quad_order=10):
    """Dense stiffness matrix of the stabilized bilinear form by per-cell
    tensor Gauss quadrature over all interior basis pairs."""
    N = mesh.N
    eps = problem.epsilon
    # cell geometry from the mesh's exact representation: absolute node
    # differences lose ~1e-8 relative accuracy in the layer for small eps
    left_x, width_x = mesh.x_axis.cell_left, mesh.x_axis.cell_width
    left_y, width_y = mesh.y_axis.cell_left, mesh.y_axis.cell_width
    x_s, x_t, H_x = mesh.x_s, mesh.x_t, mesh.x_axis.H
    y_s, y_t, H_y = mesh.y_s, mesh.y_t, mesh.y_axis.H
    p1, w1 = np.polynomial.legendre.leggauss(quad_order)

    def delta_at(i, j, x, y):
        if not (i < N // 2 and j < N // 2):
            return 0.0
        base = c_star / N
        if variant is DeltaVariant.STANDARD:
            return base
        xi = 1.0 if x <= x_s else (x_t - x) / H_x
        eta = 1.0 if y <= y_s else (y_t - y) / H_y
        return base * xi * eta

    ndofs = (N - 1) ** 2
    A = np.zeros((ndofs, ndofs))
    corners = ((0, 0), (1, 0), (1, 1), (0, 1))
    for j in range(N):
        for i in range(N):
            x0, y0 = left_x[i], left_y[j]
            wx, wy = width_x[i], width_y[j]
            loc = np.zeros((4, 4))
            for a in range(quad_order):
                for b in range(quad_order):
                    x = x0 + 0.5 * (1.0 + p1[a]) * wx
                    y = y0 + 0.5 * (1.0 + p1[b]) * wy
                    wq = w1[a] * w1[b] * wx * wy / 4.0
                    ta = 0.5 * (1.0 + p1[a])
                    tb = 0.5 * (1.0 + p1[b])
                    nx = (1.0 - ta, ta)
                    ny = (1.0 - tb, tb)
                    dnx = (-1.0 / wx, 1.0 / wx)
                    dny = (-1.0 / wy, 1.0 / wy)
                    b1v = float(problem.b1(x, y))
                    b2v = float(problem.b2(x, y))
                    cv = float(problem.c(x, y))
                    dv = delta_at(i, j, x, y)
                    phi = [nx[di] * ny[dj] for di, dj in corners]
                    gx = [dnx[di] * ny[dj] for di, dj in corners]
                    gy = [nx[di] * dny[dj] for di, dj in corners]
                    for k in range(4):
                        conv_k = b1v * gx[k] + b2v * gy[k]
                        for l in range(4):
                            conv_l = b1v * gx[l] + b2v * gy[l]
                            resid_l = conv_l + cv * phi[l]
                            loc[k, l] += wq * (
                                eps * (gx[l] * gx[k] + gy[l] * gy[k])
                                + resid_l * phi[k]
                                + resid_l * dv * conv_k
                            )
            for k, (di, dj) in enumerate(corners):
                ik, jk = i + di, j + dj
                if not (1 <= ik <= N - 1 and 1 <= jk <= N - 1):
                    continue
                for l, (dl, dm) in enumerate(corners):
                    il, jl = i + dl, j + dm
                    if not (1 <= il <= N - 1 and 1 <= jl <= N - 1):
                        continue
                    A[(jk - 1) * (N - 1) + (ik - 1), (jl - 1) * (N - 1) + (il - 1)] += loc[k, l]
    return A
