"""Explicit time stepping for the semi-discrete system.

The default is an eight-stage, fourth-order low-storage (2N) Runge-Kutta
scheme with an enlarged stability region.  Classical RK4 is provided as a
fallback that needs more registers.
"""

from dataclasses import dataclass

import numpy as np

from .acoustic_dg import NonFiniteStateError


@dataclass(frozen=True)
class LowStorageScheme:
    """2N-storage Runge-Kutta: ``dU = A_i dU + dt f(U)``, ``U += B_i dU``."""

    name: str
    A: tuple
    B: tuple
    C: tuple
    order: int

    @property
    def stages(self):
        return len(self.B)

    def butcher(self):
        """Equivalent Butcher tableau ``(a, b, c)`` for order-condition checks."""
        s = self.stages
        # stage i sees U_{i} = U_0 + sum_j a_ij k_j with k_j = dt f(U_j)
        a = np.zeros((s, s))
        b = np.zeros(s)
        coeff = np.zeros(s)  # register dU as a combination of k_j
        acc = np.zeros(s)    # accumulated U - U_0
        for i in range(s):
            a[i] = acc
            coeff = self.A[i] * coeff
            coeff[i] += 1.0
            acc = acc + self.B[i] * coeff
        b[:] = acc
        return a, b, a.sum(axis=1)


RKC84 = LowStorageScheme(
    "rkc84",
    A=(0.0, -0.7212962482279240, -0.01077336571612980, -0.5162584698930970,
       -1.730100286632201, -5.200129304403076, 0.7837058945416420, -0.5445836094332190),
    B=(0.2165936736758085, 0.1773950826411583, 0.01802538611623290, 0.08473476372541490,
       0.8129106974622483, 1.903416030422760, 0.1314841743399048, 0.2082583170674149),
    C=(0.0, 0.2165936736758085, 0.2660343487538170, 0.2840056122522720,
       0.3251266843788570, 0.4555149599187530, 0.7713219317101170, 0.9199028964538660),
    order=4,
)


@dataclass(frozen=True)
class ClassicalScheme:
    name: str = "rk4"
    order: int = 4
    stages: int = 4


RK4 = ClassicalScheme()
SCHEMES = {"rkc84": RKC84, "rk4": RK4}


def get_scheme(name):
    try:
        return SCHEMES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown time integrator {name!r}; choose from {sorted(SCHEMES)}") from None


def cfl_timestep(mesh, degree, courant=0.2):
    """``dt = Cr / k^1.5 * h_min / c_max``."""
    if courant <= 0:
        raise ValueError("Courant number must be positive")
    return courant / degree ** 1.5 * mesh.h_min() / mesh.c_max()


def _check(y, n_blocks, step, stage):
    if not np.all(np.isfinite(y)):
        bad = np.flatnonzero(~np.isfinite(y))[0]
        per = y.size // 3 // n_blocks
        raise NonFiniteStateError(int(bad % (y.size // 3)) // per, step, stage)


def step_low_storage(f, t, y, dt, scheme=RKC84, step=None, n_elements=1):
    """One step of a 2N low-storage scheme; returns the new state."""
    y = y.copy()
    dy = np.zeros_like(y)
    for i in range(scheme.stages):
        dy *= scheme.A[i]
        dy += dt * f(t + scheme.C[i] * dt, y)
        y += scheme.B[i] * dy
        _check(y, n_elements, step, i)
    return y


def step_rk4(f, t, y, dt, step=None, n_elements=1):
    k1 = f(t, y)
    k2 = f(t + dt / 2, y + dt / 2 * k1)
    k3 = f(t + dt / 2, y + dt / 2 * k2)
    k4 = f(t + dt, y + dt * k3)
    y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    _check(y, n_elements, step, 3)
    return y


def advance(f, t, y, dt, scheme=RKC84, step=None, n_elements=1):
    if isinstance(scheme, str):
        scheme = get_scheme(scheme)
    if isinstance(scheme, LowStorageScheme):
        return step_low_storage(f, t, y, dt, scheme, step, n_elements)
    return step_rk4(f, t, y, dt, step, n_elements)


def integrate(f, y0, t0, t_end, dt, scheme=RKC84, callback=None, every=1, n_elements=1):
    """March ``y' = f(t, y)`` from ``t0`` to ``t_end``.

    The final step is shortened so the end time is hit exactly.  ``callback``
    is called as ``callback(step, t, y)`` at the start, every ``every`` steps,
    and at the end.  Returns ``(t_end, y, n_steps)``.
    """
    if dt <= 0:
        raise ValueError("time step must be positive")
    if t_end < t0:
        raise ValueError("end time precedes start time")
    n_steps = int(np.ceil((t_end - t0) / dt - 1e-9))
    y = np.array(y0, dtype=float)
    t = t0
    if callback is not None:
        callback(0, t, y)
    # overflow shows up as a non-finite state, which is reported explicitly
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            h = min(dt, t_end - t) if step == n_steps else dt
            y = advance(f, t, y, h, scheme, step, n_elements)
            t = t_end if step == n_steps else t0 + step * dt
            if callback is not None and (step % every == 0 or step == n_steps):
                callback(step, t, y)
    return t, y, n_steps


def integrate_discretization(disc, state, t_end, dt=None, courant=0.2, scheme=RKC84,
                             callback=None, every=1):
    """Time-march a :class:`Discretization` from ``state`` to ``t_end``."""
    from .acoustic_dg import FieldState

    if dt is None:
        dt = cfl_timestep(disc.mesh, disc.degree, courant)
    t, y, n = integrate(disc.rhs, state.to_vector(), state.t, t_end, dt, scheme, callback,
                        every, disc.n_elements)
    return FieldState.from_vector(y, disc.n_elements, disc.n_nodes, t), n
