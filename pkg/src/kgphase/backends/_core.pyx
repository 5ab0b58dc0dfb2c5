# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# cython: initializedcheck=False
"""Compiled integration kernels: the performance twin of ``pure``.

Same plan classes, same constructor and ``run`` signatures, same iteration
(per-mode resolvent preconditioning, cubic re-evaluated per sweep), so the
two backends are interchangeable and cross-checked in the test suite.

Transforms are an in-place iterative radix-2 FFT with precomputed twiddle
and bit-reversal tables; the real fields ride pairwise in one complex
transform (stage pair per sweep, (u, v) per step), which halves the
transform count.  Grid sizes must therefore stay powers of two — including
``factor * n`` — which the default grids are; other refinement factors are
served by the pure backend.

Compiled without fast-math: the kernels must honor IEEE semantics (NaN
guards, reproducible journals), and the FFT tables already carry the
performance win.
"""

import numpy as np

from libc.math cimport cos, fabs, sin, sqrt
from libc.string cimport memset

NAME = "compiled"

COMPLETED = 0
CROSSED = 1
STAGE_DIVERGED = 2
BLEW_UP = 3

cdef double SCALE_FLOOR = 1e-300
cdef double PI = 3.141592653589793238462643383279502884

ctypedef double complex cplx


cdef inline bint _is_pow2(int v):
    return v >= 2 and (v & (v - 1)) == 0


cdef class _Fft:
    """Radix-2 complex FFT of one fixed size with owned tables."""

    cdef int m
    cdef int[::1] rev
    cdef cplx[::1] wf      # forward twiddles e^{-2 pi i k / m}, k < m/2
    cdef cplx[::1] wb      # backward twiddles (conjugate)

    def __cinit__(self, int m):
        cdef int i, j, bit, half = m // 2
        if not _is_pow2(m):
            raise ValueError(f"FFT size must be a power of two, got {m}")
        self.m = m
        self.rev = np.zeros(m, dtype=np.intc)
        self.wf = np.zeros(half, dtype=np.complex128)
        self.wb = np.zeros(half, dtype=np.complex128)
        j = 0
        for i in range(1, m):
            bit = m >> 1
            while j & bit:
                j ^= bit
                bit >>= 1
            j |= bit
            self.rev[i] = j
        cdef double ang
        for i in range(half):
            ang = -2.0 * PI * i / m
            self.wf[i] = cos(ang) + 1j * sin(ang)
            self.wb[i] = cos(ang) - 1j * sin(ang)

    cdef void _core(self, cplx* z, cplx* w):
        cdef int m = self.m
        cdef int i, j, blk, half, step, tw
        cdef cplx t
        for i in range(m):
            j = self.rev[i]
            if j > i:
                t = z[i]
                z[i] = z[j]
                z[j] = t
        blk = 2
        while blk <= m:
            half = blk >> 1
            step = m // blk
            i = 0
            while i < m:
                tw = 0
                for j in range(half):
                    t = w[tw] * z[i + j + half]
                    z[i + j + half] = z[i + j] - t
                    z[i + j] = z[i + j] + t
                    tw += step
                i += blk
            blk <<= 1

    cdef void forward(self, cplx* z):
        self._core(z, &self.wf[0])

    cdef void backward(self, cplx* z):
        """Inverse transform including the 1/m scaling."""
        cdef int i
        cdef double s = 1.0 / self.m
        self._core(z, &self.wb[0])
        for i in range(self.m):
            z[i] = z[i] * s


cdef class PdePlan:
    """Compiled stepping plan; see ``pure.PdePlan`` for the contract."""

    cdef readonly int n, factor, s
    cdef readonly double dt, c_sq, mu, stage_tol, blowup_limit
    cdef readonly int max_stage_iters
    cdef int nm, nh, m
    cdef _Fft fft_m, fft_n
    cdef double[:, ::1] a
    cdef double[::1] b, c_nodes, d, w_kin, w_grad
    cdef double[:, :, ::1] minv
    # step workspaces (complex spectra are length nm with Nyquist kept zero)
    cdef cplx[::1] uh, vh, zbuf
    cdef cplx[:, ::1] ph, qh, ph_new, qh_new, yuh, nl, base
    cdef double[::1] u_phys, v_phys

    def __cinit__(self, n, factor, dt, a, b, c_sq, mu, stage_tol,
                  max_stage_iters, blowup_limit):
        self.n = int(n)
        self.factor = int(factor)
        self.dt = float(dt)
        self.c_sq = float(c_sq)
        self.mu = float(mu)
        self.stage_tol = float(stage_tol)
        self.max_stage_iters = int(max_stage_iters)
        self.blowup_limit = float(blowup_limit)
        a_arr = np.ascontiguousarray(a, dtype=float)
        b_arr = np.ascontiguousarray(b, dtype=float)
        self.s = b_arr.shape[0]
        self.a = a_arr
        self.b = b_arr
        self.c_nodes = np.ascontiguousarray(a_arr.sum(axis=1))

        cdef int nn = self.n
        if not _is_pow2(nn) or not _is_pow2(self.factor * nn):
            raise ValueError(
                "compiled backend needs power-of-two n and factor*n "
                f"(got n={nn}, factor={self.factor}); use the pure backend")
        self.nm = nn // 2 + 1
        self.nh = nn // 2
        self.m = self.factor * nn
        self.fft_m = _Fft(self.m)
        self.fft_n = _Fft(nn)

        k = np.arange(self.nm)
        d = -self.c_sq * (2.0 * np.pi * k) ** 2
        d[nn // 2] = 0.0
        self.d = np.ascontiguousarray(d)
        AA = a_arr @ a_arr
        eye = np.eye(self.s)
        minv = np.empty((self.nm, self.s, self.s))
        for i in range(self.nm):
            minv[i] = np.linalg.inv(eye - self.dt * self.dt * d[i] * AA)
        self.minv = np.ascontiguousarray(minv)
        w = np.full(self.nm, 2.0 / nn**2)
        w[0] = 1.0 / nn**2
        w[nn // 2] = 0.0
        self.w_kin = np.ascontiguousarray(0.5 * w)
        self.w_grad = np.ascontiguousarray(0.5 * self.c_sq * w * (2.0 * np.pi * k) ** 2)

        cdef int s = self.s
        self.uh = np.zeros(self.nm, dtype=np.complex128)
        self.vh = np.zeros(self.nm, dtype=np.complex128)
        self.zbuf = np.zeros(self.m, dtype=np.complex128)
        self.ph = np.zeros((s, self.nm), dtype=np.complex128)
        self.qh = np.zeros((s, self.nm), dtype=np.complex128)
        self.ph_new = np.zeros((s, self.nm), dtype=np.complex128)
        self.qh_new = np.zeros((s, self.nm), dtype=np.complex128)
        self.yuh = np.zeros((s, self.nm), dtype=np.complex128)
        self.nl = np.zeros((s, self.nm), dtype=np.complex128)
        self.base = np.zeros((s, self.nm), dtype=np.complex128)
        self.u_phys = np.zeros(nn, dtype=float)
        self.v_phys = np.zeros(nn, dtype=float)

    # -- transforms ---------------------------------------------------------

    cdef double _cube_pair(self, cplx[::1] xh, cplx[::1] yh,
                           cplx[::1] gx, cplx[::1] gy):
        """Band-limited cubes of two fields given as n-grid half-spectra.

        Both ride one complex transform of size m = factor*n; returns the
        max |field value| seen on the refined grid.  ``yh`` may be None to
        process a single field.
        """
        cdef cplx* z = &self.zbuf[0]
        cdef int m = self.m, nh = self.nh, k, j
        cdef double f = <double> self.factor
        cdef double inv_f = 1.0 / f
        cdef bint pair = yh is not None
        cdef cplx xk, yk
        cdef double xr, yr, peak = 0.0
        memset(<void*> z, 0, m * sizeof(cplx))
        z[0] = f * (xh[0].real + 1j * (yh[0].real if pair else 0.0))
        for k in range(1, nh):
            xk = f * xh[k]
            yk = f * yh[k] if pair else 0.0
            z[k] = xk + 1j * yk
            z[m - k] = xk.conjugate() + 1j * yk.conjugate()
        self.fft_m.backward(z)
        for j in range(m):
            xr = z[j].real
            yr = z[j].imag
            if fabs(xr) > peak:
                peak = fabs(xr)
            if pair and fabs(yr) > peak:
                peak = fabs(yr)
            z[j] = xr * xr * xr + 1j * (yr * yr * yr)
        self.fft_m.forward(z)
        gx[0] = z[0].real * inv_f
        if pair:
            gy[0] = z[0].imag * inv_f
        for k in range(1, nh):
            xk = 0.5 * (z[k] + z[m - k].conjugate())
            gx[k] = xk * inv_f
            if pair:
                yk = -0.5j * (z[k] - z[m - k].conjugate())
                gy[k] = yk * inv_f
        gx[nh] = 0.0
        if pair:
            gy[nh] = 0.0
        return peak

    cdef double _cube_stages(self):
        """yuh -> nl = mu*yuh - cube(yuh) for all stages; returns stage peak."""
        cdef int i, k, s = self.s
        cdef double peak = 0.0, p
        i = 0
        while i < s:
            if i + 1 < s:
                p = self._cube_pair(self.yuh[i], self.yuh[i + 1],
                                    self.nl[i], self.nl[i + 1])
            else:
                p = self._cube_pair(self.yuh[i], None, self.nl[i], self.nl[i])
            if p > peak:
                peak = p
            i += 2
        for i in range(s):
            for k in range(self.nm):
                self.nl[i, k] = self.mu * self.yuh[i, k] - self.nl[i, k]
        return peak

    cdef void _materialize(self):
        """(uh, vh) -> physical samples via one packed inverse transform."""
        cdef cplx* z = &self.zbuf[0]
        cdef int n = self.n, nh = self.nh, k, j
        cdef cplx uk, vk
        memset(<void*> z, 0, n * sizeof(cplx))
        z[0] = self.uh[0].real + 1j * self.vh[0].real
        for k in range(1, nh):
            uk = self.uh[k]
            vk = self.vh[k]
            z[k] = uk + 1j * vk
            z[n - k] = uk.conjugate() + 1j * vk.conjugate()
        self.fft_n.backward(z)
        for j in range(n):
            self.u_phys[j] = z[j].real
            self.v_phys[j] = z[j].imag

    # -- observables --------------------------------------------------------

    cdef double _energy(self):
        """Same functional as the pure backend: Parseval quadratic terms plus
        the grid-mean potential."""
        cdef double kin = 0.0, grad = 0.0, pot = 0.0, u2
        cdef int k, j
        cdef cplx uk, vk
        for k in range(self.nm):
            uk = self.uh[k]
            vk = self.vh[k]
            kin += self.w_kin[k] * (vk.real * vk.real + vk.imag * vk.imag)
            grad += self.w_grad[k] * (uk.real * uk.real + uk.imag * uk.imag)
        for j in range(self.n):
            u2 = self.u_phys[j] * self.u_phys[j]
            pot += 0.25 * u2 * u2 - 0.5 * self.mu * u2
        return kin + grad + pot / self.n

    def energy(self, uh, u_phys, vh):
        """Diagnostic entry point with the same signature as pure; computed
        from the arguments, leaving plan state untouched."""
        cdef cplx[::1] uh_in = np.ascontiguousarray(uh, dtype=np.complex128)
        cdef cplx[::1] vh_in = np.ascontiguousarray(vh, dtype=np.complex128)
        cdef double[::1] u_in = np.ascontiguousarray(u_phys, dtype=float)
        cdef double kin = 0.0, grad = 0.0, pot = 0.0, u2
        cdef int k, j
        cdef cplx uk, vk
        for k in range(self.nm):
            uk = uh_in[k]
            vk = vh_in[k]
            kin += self.w_kin[k] * (vk.real * vk.real + vk.imag * vk.imag)
            grad += self.w_grad[k] * (uk.real * uk.real + uk.imag * uk.imag)
        for j in range(self.n):
            u2 = u_in[j] * u_in[j]
            pot += 0.25 * u2 * u2 - 0.5 * self.mu * u2
        return kin + grad + pot / self.n

    # -- stage solve ---------------------------------------------------------

    cdef int _solve_stages(self, double scale):
        """Fill ph, qh with converged stage slopes; returns a status code."""
        cdef int s = self.s, nm = self.nm
        cdef int i, j, k, it
        cdef double dt = self.dt
        cdef double peak, inc, diff, tol = self.stage_tol * scale
        cdef double inv_n = 1.0 / self.n
        cdef cplx acc, q0
        cdef double re, im

        for k in range(nm):
            for i in range(s):
                self.base[i, k] = self.d[k] * (
                    self.uh[k] + dt * self.c_nodes[i] * self.vh[k])

        # initial guess: slopes of the step's starting point (nl[0] briefly
        # holds the raw cube of u; it is rewritten every sweep below)
        for k in range(nm):
            self.yuh[0, k] = self.uh[k]
        peak = self._cube_pair(self.yuh[0], None, self.nl[0], self.nl[0])
        if not (peak <= self.blowup_limit):
            return BLEW_UP
        for k in range(nm):
            q0 = self.d[k] * self.uh[k] + (
                self.mu * self.uh[k] - self.nl[0, k])
            for i in range(s):
                self.qh[i, k] = q0
                self.ph[i, k] = self.vh[k]

        for it in range(self.max_stage_iters):
            for i in range(s):
                for k in range(nm):
                    acc = 0.0
                    for j in range(s):
                        acc = acc + self.a[i, j] * self.ph[j, k]
                    self.yuh[i, k] = self.uh[k] + dt * acc
            peak = self._cube_stages()
            if not (peak <= self.blowup_limit):
                return BLEW_UP
            inc = 0.0
            for k in range(nm):
                for i in range(s):
                    acc = 0.0
                    for j in range(s):
                        acc = acc + self.minv[k, i, j] * (
                            self.base[j, k] + self.nl[j, k])
                    self.qh_new[i, k] = acc
            for i in range(s):
                for k in range(nm):
                    acc = 0.0
                    for j in range(s):
                        acc = acc + self.a[i, j] * self.qh_new[j, k]
                    self.ph_new[i, k] = self.vh[k] + dt * acc
            for i in range(s):
                for k in range(nm):
                    re = self.ph_new[i, k].real - self.ph[i, k].real
                    im = self.ph_new[i, k].imag - self.ph[i, k].imag
                    diff = sqrt(re * re + im * im)
                    if diff > inc:
                        inc = diff
                    re = self.qh_new[i, k].real - self.qh[i, k].real
                    im = self.qh_new[i, k].imag - self.qh[i, k].imag
                    diff = sqrt(re * re + im * im)
                    if diff > inc:
                        inc = diff
                    self.ph[i, k] = self.ph_new[i, k]
                    self.qh[i, k] = self.qh_new[i, k]
            if inc * inv_n <= tol:
                return COMPLETED
        return STAGE_DIVERGED

    # -- main loop -----------------------------------------------------------

    def run(self, uh, vh, double t0, n_steps, bint check_crossing=False,
            long sample_every=0, e0=None, double drift0=0.0):
        """Identical contract to ``pure.PdePlan.run``."""
        cdef cplx[::1] uh_in = np.ascontiguousarray(uh, dtype=np.complex128)
        cdef cplx[::1] vh_in = np.ascontiguousarray(vh, dtype=np.complex128)
        cdef int k, i, j
        cdef long step, steps_done = 0, total = int(n_steps)
        cdef int status = COMPLETED
        cdef double dt = self.dt
        cdef double e_first, denom, max_drift = drift0
        cdef double scale, e, drift, t = t0
        cdef double umin, umax, usum, uabs, vabs
        cdef cplx acc
        cdef bint crossed
        cdef object t_cross = None
        samples = []

        if uh_in.shape[0] != self.nm or vh_in.shape[0] != self.nm:
            raise ValueError(f"spectra must have length {self.nm}")
        for k in range(self.nm):
            self.uh[k] = uh_in[k]
            self.vh[k] = vh_in[k]
        self._materialize()
        if e0 is None:
            e_first = self._energy()
        else:
            e_first = float(e0)
        denom = fabs(e_first)
        if denom < SCALE_FLOOR:
            denom = SCALE_FLOOR

        for step in range(total):
            scale = SCALE_FLOOR
            for j in range(self.n):
                uabs = fabs(self.u_phys[j])
                vabs = fabs(self.v_phys[j])
                if uabs > scale:
                    scale = uabs
                if vabs > scale:
                    scale = vabs
            status = self._solve_stages(scale)
            if status != COMPLETED:
                break
            for k in range(self.nm):
                acc = 0.0
                for i in range(self.s):
                    acc = acc + self.b[i] * self.ph[i, k]
                self.uh[k] = self.uh[k] + dt * acc
                acc = 0.0
                for i in range(self.s):
                    acc = acc + self.b[i] * self.qh[i, k]
                self.vh[k] = self.vh[k] + dt * acc
            steps_done = step + 1
            t = t0 + steps_done * dt
            self._materialize()
            umin = self.u_phys[0]
            umax = self.u_phys[0]
            usum = 0.0
            for j in range(self.n):
                if self.u_phys[j] < umin:
                    umin = self.u_phys[j]
                if self.u_phys[j] > umax:
                    umax = self.u_phys[j]
                usum += self.u_phys[j]
            # usum == usum is the NaN sentinel: min/max scans skip interior
            # NaNs, the running sum does not
            if not (fabs(umin) <= self.blowup_limit and
                    fabs(umax) <= self.blowup_limit and usum == usum):
                status = BLEW_UP
                break
            e = self._energy()
            drift = fabs(e - e_first) / denom
            if drift > max_drift:
                max_drift = drift
            crossed = check_crossing and umin < 0.0
            if sample_every > 0 and (steps_done % sample_every == 0 or crossed):
                samples.append((t, umin, umax, usum / self.n, e, drift))
            if crossed:
                status = CROSSED
                t_cross = t
                break

        uh_out = np.empty(self.nm, dtype=np.complex128)
        vh_out = np.empty(self.nm, dtype=np.complex128)
        cdef cplx[::1] uo = uh_out, vo = vh_out
        for k in range(self.nm):
            uo[k] = self.uh[k]
            vo[k] = self.vh[k]
        return (uh_out, vh_out, steps_done, status, t_cross, max_drift,
                e_first, samples)


cdef class OdePlan:
    """Compiled scalar twin; see ``pure.OdePlan`` for the contract."""

    cdef readonly int s, max_stage_iters
    cdef readonly double dt, mu, stage_tol, blowup_limit
    cdef double[:, ::1] a
    cdef double[::1] b

    def __cinit__(self, dt, a, b, mu, stage_tol, max_stage_iters, blowup_limit):
        self.dt = float(dt)
        a_arr = np.ascontiguousarray(a, dtype=float)
        b_arr = np.ascontiguousarray(b, dtype=float)
        self.a = a_arr
        self.b = b_arr
        self.s = b_arr.shape[0]
        if self.s > 3:
            raise ValueError(f"at most 3 stages supported, got {self.s}")
        self.mu = float(mu)
        self.stage_tol = float(stage_tol)
        self.max_stage_iters = int(max_stage_iters)
        self.blowup_limit = float(blowup_limit)

    cdef inline double _force(self, double u):
        return -u * (u * u - self.mu)

    def energy(self, double u, double v):
        return 0.5 * v * v + 0.25 * u * u * u * u - 0.5 * self.mu * u * u

    cdef int _solve_stages(self, double u, double v, double scale,
                           double* p, double* q):
        cdef int s = self.s, i, j, it
        cdef double dt = self.dt
        cdef double tol = self.stage_tol * scale
        cdef double yu, acc, inc, diff
        cdef double p_new[3]
        cdef double q_new[3]
        if not (fabs(u) <= self.blowup_limit):
            return BLEW_UP
        for i in range(s):
            q[i] = self._force(u)
            p[i] = v
        for it in range(self.max_stage_iters):
            inc = 0.0
            for i in range(s):
                acc = 0.0
                for j in range(s):
                    acc += self.a[i, j] * p[j]
                yu = u + dt * acc
                if not (fabs(yu) <= self.blowup_limit):
                    return BLEW_UP
                q_new[i] = self._force(yu)
            for i in range(s):
                acc = 0.0
                for j in range(s):
                    acc += self.a[i, j] * q_new[j]
                p_new[i] = v + dt * acc
            for i in range(s):
                diff = fabs(p_new[i] - p[i])
                if diff > inc:
                    inc = diff
                diff = fabs(q_new[i] - q[i])
                if diff > inc:
                    inc = diff
                p[i] = p_new[i]
                q[i] = q_new[i]
            if inc <= tol:
                return COMPLETED
        return STAGE_DIVERGED

    def run(self, double u, double v, double t0, n_steps,
            bint check_crossing=False, long sample_every=0, e0=None,
            double drift0=0.0):
        """Identical contract to ``pure.OdePlan.run``."""
        cdef long step, steps_done = 0, total = int(n_steps)
        cdef int status = COMPLETED, i
        cdef double dt = self.dt
        cdef double e_first, denom, max_drift = drift0
        cdef double scale, e, drift, acc, t = t0
        cdef double p[3]
        cdef double q[3]
        cdef bint crossed
        cdef object t_cross = None
        samples = []

        if e0 is None:
            e_first = self.energy(u, v)
        else:
            e_first = float(e0)
        denom = fabs(e_first)
        if denom < SCALE_FLOOR:
            denom = SCALE_FLOOR

        for step in range(total):
            scale = fabs(u)
            if fabs(v) > scale:
                scale = fabs(v)
            if scale < SCALE_FLOOR:
                scale = SCALE_FLOOR
            status = self._solve_stages(u, v, scale, p, q)
            if status != COMPLETED:
                break
            acc = 0.0
            for i in range(self.s):
                acc += self.b[i] * p[i]
            u = u + dt * acc
            acc = 0.0
            for i in range(self.s):
                acc += self.b[i] * q[i]
            v = v + dt * acc
            steps_done = step + 1
            t = t0 + steps_done * dt
            if not (fabs(u) <= self.blowup_limit):
                status = BLEW_UP
                break
            e = self.energy(u, v)
            drift = fabs(e - e_first) / denom
            if drift > max_drift:
                max_drift = drift
            crossed = check_crossing and u < 0.0
            if sample_every > 0 and (steps_done % sample_every == 0 or crossed):
                samples.append((t, u, u, u, e, drift))
            if crossed:
                status = CROSSED
                t_cross = t
                break
        return (u, v, steps_done, status, t_cross, max_drift, e_first, samples)
