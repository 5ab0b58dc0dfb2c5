"""Pure-numpy integration kernels (fallback backend).

Both backends expose the same two plan classes with identical constructor
and ``run`` signatures; the compiled backend in ``_core.pyx`` is the
performance twin of this module.  A plan owns everything that is constant
across steps (tableau products, per-mode stage resolvents, Parseval weights),
so ``run`` is a tight loop over steps.

Field runs keep the state as rfft spectra with the Nyquist bin structurally
zero (see :mod:`kgphase.spectral` on band closure) and materialize physical
samples once per step for observables.

Stage solve: the stage system K_i = f(y + dt*sum_j a_ij K_j) is fixed-point
iterated with the stiff linear part handled exactly — for each Fourier mode
the s x s resolvent (I - dt^2 d_k A^2)^{-1} is precomputed and only the
cubic term is re-evaluated per sweep.  The iteration's fixed point is the
exact implicit stage solution; the preconditioning only changes the path to
it, which plain sweeps cannot traverse once dt*|c|*k exceeds O(1).
"""
from __future__ import annotations

import math

import numpy as np

NAME = "pure"

# status codes shared by all kernels
COMPLETED = 0
CROSSED = 1
STAGE_DIVERGED = 2
BLEW_UP = 3

_SCALE_FLOOR = 1e-300


class PdePlan:
    """Reusable stepping plan for one (grid, tableau, dt, params) combination."""

    def __init__(self, n, factor, dt, a, b, c_sq, mu, stage_tol, max_stage_iters,
                 blowup_limit):
        self.n = int(n)
        self.factor = int(factor)
        self.dt = float(dt)
        self.a = np.array(a, dtype=float)
        self.b = np.array(b, dtype=float)
        self.s = len(self.b)
        self.c_sq = float(c_sq)
        self.mu = float(mu)
        self.stage_tol = float(stage_tol)
        self.max_stage_iters = int(max_stage_iters)
        self.blowup_limit = float(blowup_limit)

        n = self.n
        nm = n // 2 + 1
        k = np.arange(nm)
        d = -self.c_sq * (2.0 * np.pi * k) ** 2
        d[n // 2] = 0.0
        self.d = d
        self.c_nodes = self.a.sum(axis=1)
        AA = self.a @ self.a
        eye = np.eye(self.s)
        # per-mode stage resolvent (I - dt^2 d_k A^2)^{-1}
        self.minv = np.empty((nm, self.s, self.s))
        for i in range(nm):
            self.minv[i] = np.linalg.inv(eye - self.dt * self.dt * d[i] * AA)
        # Parseval weights for grid means of squares: mean(f^2) = sum w_k |fh_k|^2
        w = np.full(nm, 2.0 / n**2)
        w[0] = 1.0 / n**2
        w[n // 2] = 0.0  # Nyquist bin structurally zero
        self.w_kin = 0.5 * w
        self.w_grad = 0.5 * self.c_sq * w * (2.0 * np.pi * k) ** 2

    # -- pieces -----------------------------------------------------------

    def _cube_hat(self, yuh):
        """Band-limited cube of stage fields given as spectra, batched over stages.

        Returns (cubed spectra, max |stage field| on the refined grid).
        """
        n, f = self.n, self.factor
        m = f * n
        pad = np.zeros((yuh.shape[0], m // 2 + 1), dtype=complex)
        pad[:, : n // 2] = yuh[:, : n // 2] * f
        fine = np.fft.irfft(pad, m, axis=1)
        peak = float(np.max(np.abs(fine)))
        G = np.fft.rfft(fine * fine * fine, axis=1)
        out = np.zeros_like(yuh)
        out[:, : n // 2] = G[:, : n // 2] * (1.0 / f)
        return out, peak

    def _nonlin_hat(self, yuh):
        """Spectra of -cube(u) + mu*u per stage; also returns the stage peak."""
        cubed, peak = self._cube_hat(yuh)
        return self.mu * yuh - cubed, peak

    def rhs_hat(self, uh, vh):
        """Spectral right-hand side (du_hat, dv_hat); used by the rk4 oracle."""
        nl, _ = self._nonlin_hat(uh[None, :])
        return vh.copy(), self.d * uh + nl[0]

    def energy(self, uh, u_phys, vh):
        """Grid-mean energy from spectra (quadratic terms) + samples (potential)."""
        kin = float(np.sum(self.w_kin * (vh.real**2 + vh.imag**2)))
        grad = float(np.sum(self.w_grad * (uh.real**2 + uh.imag**2)))
        u2 = u_phys * u_phys
        pot = float(np.mean(0.25 * u2 * u2 - 0.5 * self.mu * u2))
        return kin + grad + pot

    def _solve_stages(self, uh, vh, scale):
        """Iterate the stage equations; returns (P_hat, Q_hat, status)."""
        s, dt, a = self.s, self.dt, self.a
        base = self.d[None, :] * (uh[None, :] + dt * self.c_nodes[:, None] * vh[None, :])
        nl0, peak = self._nonlin_hat(uh[None, :])
        if not (peak <= self.blowup_limit):
            return None, None, BLEW_UP
        qh = np.tile(self.d * uh + nl0[0], (s, 1))
        ph = np.tile(vh, (s, 1))
        tol = self.stage_tol * scale
        inv_n = 1.0 / self.n
        for _ in range(self.max_stage_iters):
            yuh = uh[None, :] + dt * (a @ ph)
            nl, peak = self._nonlin_hat(yuh)
            if not (peak <= self.blowup_limit):
                return None, None, BLEW_UP
            qh_new = np.einsum("kij,jk->ik", self.minv, base + nl)
            ph_new = vh[None, :] + dt * (a @ qh_new)
            inc = max(
                float(np.max(np.abs(ph_new - ph))),
                float(np.max(np.abs(qh_new - qh))),
            ) * inv_n
            ph, qh = ph_new, qh_new
            if inc <= tol:
                return ph, qh, COMPLETED
        return None, None, STAGE_DIVERGED

    # -- main loop --------------------------------------------------------

    def run(self, uh, vh, t0, n_steps, check_crossing=False, sample_every=0,
            e0=None, drift0=0.0):
        """Advance ``n_steps`` steps from spectra (uh, vh) at time t0.

        Returns ``(uh, vh, steps_done, status, t_cross, max_drift, e0, samples)``
        where samples is a list of ``(t, min_u, max_u, mean_u, energy, drift)``
        rows taken after every ``sample_every``-th step (0 disables sampling).
        """
        uh = uh.copy()
        vh = vh.copy()
        n, dt, b = self.n, self.dt, self.b
        u_phys = np.fft.irfft(uh, n)
        v_phys = np.fft.irfft(vh, n)
        if e0 is None:
            e0 = self.energy(uh, u_phys, vh)
        denom = max(abs(e0), _SCALE_FLOOR)
        max_drift = float(drift0)
        samples = []
        status = COMPLETED
        t_cross = None
        steps_done = 0
        for step in range(int(n_steps)):
            scale = max(
                float(np.max(np.abs(u_phys))),
                float(np.max(np.abs(v_phys))),
                _SCALE_FLOOR,
            )
            ph, qh, st = self._solve_stages(uh, vh, scale)
            if st != COMPLETED:
                status = st
                break
            uh = uh + dt * (b @ ph)
            vh = vh + dt * (b @ qh)
            steps_done = step + 1
            t = t0 + steps_done * dt
            u_phys = np.fft.irfft(uh, n)
            v_phys = np.fft.irfft(vh, n)
            if not (float(np.max(np.abs(u_phys))) <= self.blowup_limit):
                status = BLEW_UP
                break
            e = self.energy(uh, u_phys, vh)
            drift = abs(e - e0) / denom
            if drift > max_drift:
                max_drift = drift
            crossed = check_crossing and float(np.min(u_phys)) < 0.0
            if sample_every and (steps_done % sample_every == 0 or crossed):
                samples.append((t, float(np.min(u_phys)), float(np.max(u_phys)),
                                float(np.mean(u_phys)), e, drift))
            if crossed:
                status = CROSSED
                t_cross = t
                break
        return uh, vh, steps_done, status, t_cross, max_drift, e0, samples


class OdePlan:
    """Scalar twin of :class:`PdePlan` for the reduced point model."""

    def __init__(self, dt, a, b, mu, stage_tol, max_stage_iters, blowup_limit):
        self.dt = float(dt)
        self.a = np.array(a, dtype=float)
        self.b = np.array(b, dtype=float)
        self.s = len(self.b)
        self.mu = float(mu)
        self.stage_tol = float(stage_tol)
        self.max_stage_iters = int(max_stage_iters)
        self.blowup_limit = float(blowup_limit)

    def _force(self, u):
        return -u * (u * u - self.mu)

    def energy(self, u, v):
        return 0.5 * v * v + 0.25 * u**4 - 0.5 * self.mu * u * u

    def _solve_stages(self, u, v, scale):
        s, dt, a = self.s, self.dt, self.a
        if not (abs(u) <= self.blowup_limit):
            return None, None, BLEW_UP
        q = np.full(s, self._force(u))
        p = np.full(s, v)
        tol = self.stage_tol * scale
        for _ in range(self.max_stage_iters):
            yu = u + dt * (a @ p)
            if not (float(np.max(np.abs(yu))) <= self.blowup_limit):
                return None, None, BLEW_UP
            q_new = self._force(yu)
            p_new = v + dt * (a @ q_new)
            inc = max(float(np.max(np.abs(p_new - p))),
                      float(np.max(np.abs(q_new - q))))
            p, q = p_new, q_new
            if inc <= tol:
                return p, q, COMPLETED
        return None, None, STAGE_DIVERGED

    def run(self, u, v, t0, n_steps, check_crossing=False, sample_every=0,
            e0=None, drift0=0.0):
        """Advance the scalar state; same return shape as :meth:`PdePlan.run`
        with min = max = mean = u in the sample rows."""
        u = float(u)
        v = float(v)
        dt, b = self.dt, self.b
        if e0 is None:
            e0 = self.energy(u, v)
        denom = max(abs(e0), _SCALE_FLOOR)
        max_drift = float(drift0)
        samples = []
        status = COMPLETED
        t_cross = None
        steps_done = 0
        for step in range(int(n_steps)):
            scale = max(abs(u), abs(v), _SCALE_FLOOR)
            p, q, st = self._solve_stages(u, v, scale)
            if st != COMPLETED:
                status = st
                break
            u = u + dt * float(b @ p)
            v = v + dt * float(b @ q)
            steps_done = step + 1
            t = t0 + steps_done * dt
            if not (abs(u) <= self.blowup_limit):
                status = BLEW_UP
                break
            e = self.energy(u, v)
            drift = abs(e - e0) / denom
            if drift > max_drift:
                max_drift = drift
            crossed = check_crossing and u < 0.0
            if sample_every and (steps_done % sample_every == 0 or crossed):
                samples.append((t, u, u, u, e, drift))
            if crossed:
                status = CROSSED
                t_cross = t
                break
        return u, v, steps_done, status, t_cross, max_drift, e0, samples
