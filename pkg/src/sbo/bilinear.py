"""Weighted bilinear forms on a discrete (tau, xi) lattice.

Two weights are implemented.  ``phi`` belongs to the estimate for
``d_x(u1 conj(u2))`` in the Benjamin-Ono space and ``psi`` to the estimate
for ``u v`` in the Schrodinger space:

    Phi = i xi <xi>^{s'} <sigma>^{c'-1} / (<xi2>^s <sigma2>^b <xi1>^s <sigma1>^b)
          sigma = tau + nu|xi|xi,  sigma1 = tau1 - xi1^2,  sigma2 = tau2 + xi2^2
    Psi = <xi>^s <sigma>^{c-1} / (<xi2>^s <sigma2>^b <xi1>^{s'} <sigma1>^{b'})
          sigma = tau + xi^2,  sigma1 = tau1 + nu|xi1|xi1,  sigma2 = tau2 + xi2^2

with ``(tau2, xi2) = (tau - tau1, xi - xi1)``.  The form sends ``(f, g)`` to
``F(tau, xi) = sum W(tau, xi, tau1, xi1) f(tau2, xi2) g(tau1, xi1) dA`` over
the lattice, ``dA`` being the cell area.

Boxes are sets ``{|xi - xi0| < w, |tau + p(xi)| < h}`` with
``p(xi) = c2 xi^2 + c1 xi + cabs |xi| xi``.  Membership is decided per
lattice column from the exact tau bounds, never by rasterizing a curve.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import GridMismatchError, NodeBudgetError, ParameterError
from .fitting import ProbeReport, require_geometric
from .gateaux import max_workers, sgn
from .norms import SpaceTimeField, SpaceTimeGrid, bracket, check_same_lattice

NODE_BUDGET = 1 << 14
SLOPE_TOLERANCE = 0.15
BILINEAR_CASES = ("T42i", "T42ii", "T42iii", "T43")
IDENTITY_RTOL = 1e-9


@dataclass(frozen=True)
class BilinearWeights:
    kind: str
    s: float
    s_prime: float
    nu: float
    b: float = 0.55
    b_prime: float = 0.55
    c: float = 0.6
    c_prime: float = 0.6

    def __post_init__(self):
        if self.kind not in ("phi", "psi"):
            raise ParameterError(f"weight kind must be 'phi' or 'psi', got {self.kind!r}")


def _check_identity(lhs, rhs, scale, what):
    err = np.abs(lhs - rhs)
    bad = err > IDENTITY_RTOL * (1.0 + scale)
    if np.any(bad):
        raise AssertionError(f"{what} algebraic relation violated by {float(np.max(err)):.3e}")


def phi_weight(tau, xi, tau1, xi1, w: BilinearWeights):
    if w.kind != "phi":
        raise ParameterError("phi_weight needs kind='phi'")
    tau, xi, tau1, xi1 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (tau, xi, tau1, xi1)))
    tau2, xi2 = tau - tau1, xi - xi1
    sig = tau + w.nu * np.abs(xi) * xi
    sig1 = tau1 - xi1 ** 2
    sig2 = tau2 + xi2 ** 2
    _check_identity(sig - sig1 - sig2, 2 * xi * xi1 - (1 - w.nu * sgn(xi)) * xi ** 2,
                    np.abs(tau) + np.abs(tau1) + xi ** 2 + xi1 ** 2, "phi")
    num = 1j * xi * bracket(xi) ** w.s_prime * bracket(sig) ** (w.c_prime - 1)
    den = bracket(xi2) ** w.s * bracket(sig2) ** w.b * bracket(xi1) ** w.s * bracket(sig1) ** w.b
    return num / den


def psi_weight(tau, xi, tau1, xi1, w: BilinearWeights):
    if w.kind != "psi":
        raise ParameterError("psi_weight needs kind='psi'")
    tau, xi, tau1, xi1 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (tau, xi, tau1, xi1)))
    tau2, xi2 = tau - tau1, xi - xi1
    sig = tau + xi ** 2
    sig1 = tau1 + w.nu * np.abs(xi1) * xi1
    sig2 = tau2 + xi2 ** 2
    _check_identity(sig - sig1 - sig2, 2 * xi * xi1 - (1 + w.nu * sgn(xi1)) * xi1 ** 2,
                    np.abs(tau) + np.abs(tau1) + xi ** 2 + xi1 ** 2, "psi")
    num = bracket(xi) ** w.s * bracket(sig) ** (w.c - 1)
    den = bracket(xi2) ** w.s * bracket(sig2) ** w.b * bracket(xi1) ** w.s_prime * bracket(sig1) ** w.b_prime
    return (num / den).astype(np.complex128)


def weight(tau, xi, tau1, xi1, w: BilinearWeights):
    return phi_weight(tau, xi, tau1, xi1, w) if w.kind == "phi" else psi_weight(tau, xi, tau1, xi1, w)


def _check_budget(field: SpaceTimeField, name: str, budget: int):
    count = int(np.count_nonzero(field.values))
    if count > budget:
        raise NodeBudgetError(f"{name} has {count} nonzero nodes, budget is {budget}")


def _output_grid(f: SpaceTimeField, g: SpaceTimeField) -> SpaceTimeGrid:
    gf, gg = f.grid, g.grid
    return SpaceTimeGrid(gf.dtau, gf.dxi, gf.tau_start + gg.tau_start, gf.xi_start + gg.xi_start,
                         gf.n_tau + gg.n_tau - 1, gf.n_xi + gg.n_xi - 1)


def bilinear_form(f: SpaceTimeField, g: SpaceTimeField, w: BilinearWeights,
                  budget: int = NODE_BUDGET, chunk: int = 1 << 20) -> SpaceTimeField:
    """Scatter every nonzero pair ``(f at node 2, g at node 1)`` into node ``1 + 2``.

    The output rectangle is the Minkowski sum of the two input rectangles.
    """
    check_same_lattice(f.grid, g.grid)
    _check_budget(f, "f", budget)
    _check_budget(g, "g", budget)
    out_grid = _output_grid(f, g)
    out = np.zeros(out_grid.n_tau * out_grid.n_xi, dtype=np.complex128)
    fi, fj = np.nonzero(f.values)
    gi, gj = np.nonzero(g.values)
    if fi.size == 0 or gi.size == 0:
        return SpaceTimeField(out_grid, out.reshape(out_grid.shape))
    fv, gv = f.values[fi, fj], g.values[gi, gj]
    dtau, dxi = f.grid.dtau, f.grid.dxi
    tau1_all = (g.grid.tau_start + gi) * dtau
    xi1_all = (g.grid.xi_start + gj) * dxi
    per = max(1, chunk // fi.size)
    for lo in range(0, gi.size, per):
        sl = slice(lo, lo + per)
        oi = gi[sl, None] + fi[None, :]
        oj = gj[sl, None] + fj[None, :]
        tau = (out_grid.tau_start + oi) * dtau
        xi = (out_grid.xi_start + oj) * dxi
        tau1 = np.broadcast_to(tau1_all[sl, None], tau.shape)
        xi1 = np.broadcast_to(xi1_all[sl, None], xi.shape)
        vals = weight(tau, xi, tau1, xi1, w) * (gv[sl, None] * fv[None, :])
        flat = (oi * out_grid.n_xi + oj).ravel()
        vals = vals.ravel()
        out += np.bincount(flat, weights=vals.real, minlength=out.size)
        out += 1j * np.bincount(flat, weights=vals.imag, minlength=out.size)
    out *= f.grid.cell_area
    return SpaceTimeField(out_grid, out.reshape(out_grid.shape))


def bilinear_form_dense(f: SpaceTimeField, g: SpaceTimeField, w: BilinearWeights) -> SpaceTimeField:
    """Reference double loop: every output node times every ``g`` node."""
    check_same_lattice(f.grid, g.grid)
    out_grid = _output_grid(f, g)
    out = np.zeros(out_grid.shape, dtype=np.complex128)
    dtau, dxi = f.grid.dtau, f.grid.dxi
    for oi in range(out_grid.n_tau):
        for oj in range(out_grid.n_xi):
            I = out_grid.tau_start + oi
            J = out_grid.xi_start + oj
            acc = 0j
            for gi in range(g.grid.n_tau):
                for gj in range(g.grid.n_xi):
                    I1 = g.grid.tau_start + gi
                    J1 = g.grid.xi_start + gj
                    fi = I - I1 - f.grid.tau_start
                    fj = J - J1 - f.grid.xi_start
                    if not (0 <= fi < f.grid.n_tau and 0 <= fj < f.grid.n_xi):
                        continue
                    val = f.values[fi, fj] * g.values[gi, gj]
                    if val == 0:
                        continue
                    acc += complex(weight(I * dtau, J * dxi, I1 * dtau, J1 * dxi, w)) * val
            out[oi, oj] = acc * f.grid.cell_area
    return SpaceTimeField(out_grid, out)


@dataclass(frozen=True)
class Box:
    """``{|xi - xi_center| < xi_half_width, |tau + p(xi)| < height}``."""

    xi_center: float
    xi_half_width: float
    height: float
    c2: float = 0.0
    c1: float = 0.0
    cabs: float = 0.0

    def p(self, xi):
        return self.c2 * xi ** 2 + self.c1 * xi + self.cabs * np.abs(xi) * xi

    def contains(self, tau, xi):
        return (np.abs(xi - self.xi_center) < self.xi_half_width) & (np.abs(tau + self.p(xi)) < self.height)

    def nodes(self, dtau: float, dxi: float):
        """Integer lattice labels ``(I, J)`` of all nodes inside the box."""
        j0 = math.floor((self.xi_center - self.xi_half_width) / dxi)
        j1 = math.ceil((self.xi_center + self.xi_half_width) / dxi)
        J = np.arange(j0, j1 + 1)
        J = J[np.abs(J * dxi - self.xi_center) < self.xi_half_width]
        Is, Js = [], []
        for j in J:
            mid = -float(self.p(j * dxi))
            lo = math.floor((mid - self.height) / dtau)
            hi = math.ceil((mid + self.height) / dtau)
            i = np.arange(lo, hi + 1)
            i = i[np.abs(i * dtau - mid) < self.height]
            Is.append(i)
            Js.append(np.full(i.size, j))
        if not Is:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        return np.concatenate(Is).astype(np.int64), np.concatenate(Js).astype(np.int64)

    def indicator(self, dtau: float, dxi: float) -> SpaceTimeField:
        I, J = self.nodes(dtau, dxi)
        if I.size == 0:
            raise ParameterError("box contains no lattice node; refine the lattice")
        grid = SpaceTimeGrid(dtau, dxi, int(I.min()), int(J.min()),
                             int(I.max() - I.min() + 1), int(J.max() - J.min() + 1))
        vals = np.zeros(grid.shape, dtype=np.complex128)
        vals[I - grid.tau_start, J - grid.xi_start] = 1.0
        return SpaceTimeField(grid, vals)


@dataclass(frozen=True)
class BoxSpec2D:
    """Box triple ``(A, B, R)`` for a failure case at scale ``N``.

    ``A`` holds ``(tau1, xi1)`` (argument ``g``), ``B`` holds
    ``(tau2, xi2)`` (argument ``f``), ``R`` is the output witness.
    """

    case: str
    N: float
    nu: float

    def __post_init__(self):
        if self.case not in BILINEAR_CASES:
            raise ParameterError(f"unknown box case {self.case!r}; expected one of {BILINEAR_CASES}")
        if not self.N >= 1:
            raise ParameterError(f"N must be >= 1, got {self.N}")
        if self.case == "T42iii" and self.nu != 0:
            raise ParameterError("T42iii requires nu = 0")
        if self.case == "T43" and abs(self.nu) != 1:
            raise ParameterError("T43 requires |nu| = 1")
        if self.case in ("T42i", "T42ii") and abs(self.nu) == 1:
            raise ParameterError(f"{self.case} requires |nu| != 1")

    @property
    def kind(self) -> str:
        return "phi" if self.case == "T42i" else "psi"

    @property
    def sgn_nu(self) -> float:
        return 1.0 if self.nu >= 0 else -1.0

    def boxes(self):
        N, s, nu = self.N, self.sgn_nu, self.nu
        if self.case == "T42i":
            A = Box(N, 1 / N, 6.0, c2=-1.0)
            B = Box(0.0, 1 / (2 * N), 1.0, c2=1.0)
            R = Box(N, 1 / (2 * N), 1.0, c2=1.0, c1=-2 * N)
        elif self.case == "T42ii":
            a = abs(nu) - 1
            A = Box(s * N, 1 / N, 7 * (1 + abs(nu)), cabs=nu)
            B = Box(0.0, 1 / (2 * N), 1.0, c2=1.0)
            R = Box(s * N, 1 / (2 * N), 1.0, c2=1.0, c1=a * s * N)
        elif self.case == "T42iii":
            A = Box(N, 1.0, 3.0)
            B = Box(0.0, 0.5, 1.0, c2=1.0)
            R = Box(N, 0.5, 1.0)
        else:
            A = Box(-s * N, 0.5, 1.0, cabs=nu)
            B = Box(s * N, 0.25, 1 / 3, c2=1.0)
            R = Box(0.0, 0.25, 1 / 3, c2=1.0, c1=2 * s * N)
        return A, B, R

    def sigma1_bound(self) -> float:
        """Upper bound on ``|sigma1|`` over ``R - B`` from the case's sigma identity."""
        N, nu = self.N, abs(self.nu)
        A, B, R = self.boxes()
        hB, hR = B.height, R.height
        if self.case == "T42i":
            # sigma1 = [tau + xi^2 - 2 N xi] - sigma2 - 2 xi (xi - N) + 2 xi xi2
            return hR + hB + 2 * (N + 1 / (2 * N)) / (2 * N) * 2
        if self.case == "T42ii":
            # sigma1 + sigma2 = [tau + xi^2 + a sN xi] + (1+|nu|) xi1 (xi1 - xi) + a (xi1 - sN) xi
            a = nu - 1
            return (hR + (1 + nu) * (N + 1 / N) / (2 * N)
                    + abs(a) * (1 / N) * (N + 1 / (2 * N)) + hB)
        if self.case == "T42iii":
            # sigma1 + sigma2 = tau + xi2^2
            return hR + B.xi_half_width ** 2 + hB
        # sigma1 + sigma2 = [sigma + 2 sN xi] - 2 xi (xi1 + sN)
        return hR + hB + 2 * R.xi_half_width * (R.xi_half_width + B.xi_half_width)

    def inclusion_holds(self) -> bool:
        A, B, R = self.boxes()
        xi_ok = abs(R.xi_center - B.xi_center - A.xi_center) + R.xi_half_width + B.xi_half_width \
            <= A.xi_half_width * (1 + 1e-12)
        return bool(xi_ok and self.sigma1_bound() <= A.height)

    def lattice(self, resolution: int = 8):
        """Shared steps: ``1/resolution`` of the thinnest half-width and height.

        For T43 the output concentrates on the resonant strip ``|xi| <~ 1/N``
        (there ``<sigma>`` stays O(1)), so ``dxi`` also resolves ``8/N``.
        """
        boxes = self.boxes()
        scale = min(b.xi_half_width for b in boxes)
        if self.case == "T43":
            scale = min(scale, 8.0 / self.N)
        dxi = scale / resolution
        dtau = min(b.height for b in boxes) / resolution
        return dtau, dxi

    def as_dict(self):
        A, B, R = self.boxes()
        return {"case": self.case, "N": self.N, "nu": self.nu, "kind": self.kind,
                "sigma1_bound": self.sigma1_bound(),
                "A": asdict(A), "B": asdict(B), "R": asdict(R)}


def predicted_failure_exponent(case: str, s, s_prime, c, c_prime) -> float:
    if case == "T42i":
        return s_prime - s + 2 * c_prime - 1.5
    if case == "T42ii":
        return s - s_prime + 2 * c - 2.5
    if case == "T42iii":
        return s - s_prime + 2 * c - 2
    if case == "T43":
        return c - 0.5
    raise ParameterError(f"unknown box case {case!r}")


@dataclass(frozen=True)
class BoxResult:
    N: float
    lhs_norm: float
    rhs_norm: float

    @property
    def ratio(self):
        return self.lhs_norm / self.rhs_norm if self.rhs_norm > 0 else float("nan")


def failure_point(spec: BoxSpec2D, w: BilinearWeights, resolution: int = 8) -> BoxResult:
    if not spec.inclusion_holds():
        raise ParameterError(f"{spec.case}: R - B is not contained in A at N={spec.N}")
    dtau, dxi = spec.lattice(resolution)
    A, B, _ = spec.boxes()
    g = A.indicator(dtau, dxi)
    f = B.indicator(dtau, dxi)
    out = bilinear_form(f, g, w)
    return BoxResult(spec.N, out.l2_norm(), g.l2_norm() * f.l2_norm())


def _weights_for(kind, params, nu) -> BilinearWeights:
    return BilinearWeights(kind, params.get("s", 0.0), params.get("s_prime", 0.0), nu,
                           b=params.get("b", 0.55), b_prime=params.get("b_prime", 0.55),
                           c=params.get("c", 0.6), c_prime=params.get("c_prime", 0.6))


def default_nu(case: str) -> float:
    return {"T42iii": 0.0, "T43": 1.0}.get(case, 0.5)


def failure_probe(case: str, params: dict, N_list, resolution: int = 8,
                  tolerance: float = SLOPE_TOLERANCE) -> ProbeReport:
    """``||B(1_B, 1_A)|| / (||1_A|| ||1_B||)`` against ``N`` for one failure case.

    ``params`` may hold ``s, s_prime, b, b_prime, c, c_prime, nu``.
    """
    require_geometric(N_list)
    nu = params.get("nu", default_nu(case))
    specs = [BoxSpec2D(case, N, nu) for N in N_list]
    w = _weights_for(specs[0].kind, params, nu)
    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        results = list(pool.map(lambda sp: failure_point(sp, w, resolution), specs))
    pred = predicted_failure_exponent(case, w.s, w.s_prime, w.c, w.c_prime)
    return ProbeReport(
        case=case, params={**asdict(w)}, N=[r.N for r in results], ratios=[r.ratio for r in results],
        predicted_exponent=pred, tolerance=tolerance,
        columns={"lhs_norm": [r.lhs_norm for r in results], "rhs_norm": [r.rhs_norm for r in results]})


def hypothesis_violations(s, s_prime, nu, b, b_prime, c, c_prime):
    """Violated hypotheses of the two positive estimates, as ``(kind, reason)`` pairs."""
    out = []
    if abs(nu) == 1:
        out += [("phi", "|nu| = 1"), ("psi", "|nu| = 1")]
    if s < 0:
        out += [("phi", "s < 0"), ("psi", "s < 0")]
    if not s_prime <= 2 * s - 0.5:
        out.append(("phi", "s' <= 2s - 1/2 fails"))
    if not s_prime < s + 0.5:
        out.append(("phi", "s' < s + 1/2 fails"))
    if not b > max(0.5, (s_prime - s) / 2 + 0.5):
        out.append(("phi", "b > max(1/2, (s'-s)/2 + 1/2) fails"))
    if not c_prime < min(0.75 - (s_prime - s) / 2, 0.75):
        out.append(("phi", "c' < min(3/4 - (s'-s)/2, 3/4) fails"))
    if not s_prime >= -0.5:
        out.append(("psi", "s' >= -1/2 fails"))
    if not s - 1 < s_prime:
        out.append(("psi", "s - 1 < s' fails"))
    if not (b > 0.5 and b_prime > 0.5):
        out.append(("psi", "b, b' > 1/2 fails"))
    if not 0.5 < c < min(0.75, (s_prime - s) / 2 + 1):
        out.append(("psi", "1/2 < c < min(3/4, (s'-s)/2 + 1) fails"))
    return out


def _random_field(rng, center_xi, N, dtau, dxi, sigma_shape, amp_rng=True) -> SpaceTimeField:
    box = Box(center_xi, 1 / (2 * N), 1.0, **sigma_shape)
    ind = box.indicator(dtau, dxi)
    vals = ind.values.copy()
    nz = vals != 0
    vals[nz] = rng.standard_normal(nz.sum()) + 1j * rng.standard_normal(nz.sum())
    return SpaceTimeField(ind.grid, vals)


def _random_ratio(rng, kind, N, w: BilinearWeights, resolution):
    """One random trial: Gaussian amplitudes on thin modulation-bounded boxes."""
    dxi = 1 / (2 * N) / resolution
    dtau = 1.0 / resolution
    centers = [N, -N, 0.0]
    cg, cf = rng.choice(centers), rng.choice(centers)
    if kind == "phi":
        g_shape, f_shape = {"c2": -1.0}, {"c2": 1.0}
    else:
        g_shape, f_shape = {"cabs": w.nu}, {"c2": 1.0}
    g = _random_field(rng, cg, N, dtau, dxi, g_shape)
    f = _random_field(rng, cf, N, dtau, dxi, f_shape)
    den = g.l2_norm() * f.l2_norm()
    if den == 0:
        return None
    return bilinear_form(f, g, w).l2_norm() / den


def boundedness_sweep(s, s_prime, nu, b, b_prime, c, c_prime, N_list, trials: int = 4, seed: int = 0,
                      resolution: int = 8, tolerance: float = 0.1):
    """Max ratio over adversarial boxes and random data at each ``N``.

    Returns one upper-bound :class:`ProbeReport` per weight kind whose
    hypotheses were checked; violated hypotheses are listed in
    ``notes`` and the sweep still runs.
    """
    require_geometric(N_list)
    violations = hypothesis_violations(s, s_prime, nu, b, b_prime, c, c_prime)
    params = {"s": s, "s_prime": s_prime, "b": b, "b_prime": b_prime, "c": c, "c_prime": c_prime}
    reports = []
    for kind, case in (("phi", "T42i"), ("psi", "T42ii")):
        w = _weights_for(kind, params, nu)
        rng = np.random.default_rng(seed)
        ratios = []
        adv_col, rnd_col = [], []
        for N in N_list:
            adv = float("nan")
            if abs(nu) != 1:
                adv = failure_point(BoxSpec2D(case, N, nu), w, resolution).ratio
            rnd = [r for r in (_random_ratio(rng, kind, N, w, resolution) for _ in range(trials))
                   if r is not None]
            vals = [x for x in [adv, *rnd] if np.isfinite(x)]
            if not vals:
                raise ParameterError("no admissible data at N=%g" % N)
            ratios.append(max(vals))
            adv_col.append(adv)
            rnd_col.append(max(rnd) if rnd else float("nan"))
        notes = [f"hypothesis violated: {reason}" for k, reason in violations if k == kind]
        reports.append(ProbeReport(
            case=f"bounded_{kind}", params={**asdict(w)}, N=list(N_list), ratios=ratios,
            predicted_exponent=0.0, tolerance=tolerance, bound="upper",
            columns={"adversarial": adv_col, "random": rnd_col}, notes=notes))
    return reports


def box_convolution_lower_bound_check(spec: BoxSpec2D, resolution: int = 8):
    """Lattice check of ``||1_R|| ||1_B||_{L1} <= ||1_A * 1_B||_{L2}``.

    Also verifies node by node that every ``R`` node minus every ``B``
    node is an ``A`` node.  Returns ``(lhs, rhs, holds)``.
    """
    dtau, dxi = spec.lattice(resolution)
    A, B, R = spec.boxes()
    Ai, Aj = A.nodes(dtau, dxi)
    Bi, Bj = B.nodes(dtau, dxi)
    Ri, Rj = R.nodes(dtau, dxi)
    key = lambda i, j: i.astype(np.int64) * (1 << 31) + j.astype(np.int64)
    akeys = np.unique(key(Ai, Aj))
    diff = key((Ri[:, None] - Bi[None, :]).ravel(), (Rj[:, None] - Bj[None, :]).ravel())
    if not np.all(np.isin(diff, akeys)):
        raise AssertionError(f"{spec.case}: lattice R - B not inside A at N={spec.N}")
    area = dtau * dxi
    # 1_A * 1_B evaluated by counting pairs per sum node
    sums = key((Ai[:, None] + Bi[None, :]).ravel(), (Aj[:, None] + Bj[None, :]).ravel())
    _, counts = np.unique(sums, return_counts=True)
    rhs = math.sqrt(np.sum((counts * area) ** 2) * area)
    lhs = math.sqrt(Ri.size * area) * (Bi.size * area)
    return lhs, rhs, lhs <= rhs * (1 + 1e-12)
