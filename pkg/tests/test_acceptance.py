"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line
and asserting at its stated tolerance.

Criteria 5 and 9 carry sub-checks that do not hold numerically for the
pinned problems (see README "Install and test"); their tolerances are kept
as stated rather than loosened, and the failure messages carry the measured
values and the structural reason.
"""

import math
import random
from fractions import Fraction

from renormrec.cases import (BoundaryLayer, HtrCubic, HtrDomainWall,
                             Illustration, Reduction, VanDerPol,
                             reduction_pipeline)
from renormrec.cli import EXIT_OK, main as cli_main
from renormrec.newton import (difference_table, newton_reconstruct,
                              partial_delta_m)
from renormrec.renorm import residual_scan, run_pipeline
from renormrec.scalars import QQi, to_complex
from renormrec.seqalg import make_term, zero_seq
from renormrec.verify import (envelope_deviation, iterate_exact,
                              manifold_distance, order_fit, write_atomic)


def _report(num: int, description: str, checks):
    ok = all(good for _, good, _ in checks)
    status = "PASS" if ok else "FAIL"
    detail = "; ".join(f"{lbl}: {det}" for lbl, good, det in checks
                       if det and not good)
    print(f"[{status}] criterion {num:2d}: {description}"
          + (f" -- {detail}" if detail else ""))
    assert ok, f"criterion {num} failed -- {detail}"


def _poly_family(rng, count):
    for _ in range(count):
        deg = rng.randint(0, 8)
        coeffs = [rng.randint(-20, 20) for _ in range(deg + 1)]
        m = rng.randint(-10, 10)
        yield coeffs, m


def _poly(coeffs):
    return lambda n: sum(c * n ** k for k, c in enumerate(coeffs))


def test_criterion_01_newton_exactness():
    rng = random.Random(20260801)
    bad = 0
    for coeffs, m in _poly_family(rng, 200):
        y = _poly(coeffs)
        table = difference_table(y, m, 8)
        for n in range(-10, 21):
            if newton_reconstruct(table, n) != y(n):
                bad += 1
    _report(1, "truncated Newton-series reconstruction exact on 200 random "
               "integer polynomials (deg <= 8, exact arithmetic)",
            [("exact reconstruction", bad == 0, f"{bad} mismatches")])


def test_criterion_02_envelope_identity():
    rng = random.Random(20260802)
    exact_bad = 0
    float_bad = 0
    for coeffs, m in _poly_family(rng, 200):
        y = _poly(coeffs)
        n = rng.randint(-10, 20)
        if partial_delta_m(y, m, n, 8) != 0:
            exact_bad += 1
        yf = _poly([float(c) for c in coeffs])
        mag = abs(newton_reconstruct(difference_table(yf, m, 8), n))
        if abs(partial_delta_m(yf, m, n, 8)) > 1e-9 * (1 + mag):
            float_bad += 1
    _report(2, "anchor-difference of the truncated reconstruction vanishes "
               "(exactly in exact mode, residual <= 1e-9 in float mode)",
            [("exact mode", exact_bad == 0, f"{exact_bad} nonzero"),
             ("float mode", float_bad == 0, f"{float_bad} above tolerance")])


def _random_seq(rng, anchor, max_terms=3, max_degree=3):
    s = zero_seq(anchor)
    for _ in range(rng.randint(1, max_terms)):
        c = QQi(Fraction(rng.randint(-6, 6), rng.randint(1, 4)),
                Fraction(rng.randint(-6, 6), rng.randint(1, 4)))
        r = QQi(Fraction(rng.randint(-4, 4), rng.randint(1, 3)),
                Fraction(rng.randint(-4, 4), rng.randint(1, 3)))
        if r.is_zero:
            r = QQi(1, 1)
        s = s + make_term(c, r, anchor, rng.randint(0, max_degree))
    return s


def test_criterion_03_algebra_suite():
    rng = random.Random(20260803)
    product_bad = ladder_bad = telescope_bad = pointwise_bad = 0
    for i in range(500):
        anchor = rng.randint(-3, 3)
        f = _random_seq(rng, anchor)
        g = _random_seq(rng, anchor)
        if f.product(g).delta() != g.shift(1).product(f.delta()) \
                + f.product(g.delta()):
            product_bad += 1
        k = rng.randint(1, 5)
        if make_term(1, 1, anchor, k).delta() != make_term(1, 1, anchor, k - 1):
            ladder_bad += 1
        N = rng.randint(0, 10)
        d = f.delta()
        total = QQi(0)
        for n in range(N):
            total = total + d.eval(n)
        if total != f.eval(N) - f.eval(0):
            telescope_bad += 1
        n = rng.randint(-5, 20)
        j = rng.randint(-2, 3)
        if (f + g).eval(n) != f.eval(n) + g.eval(n) \
                or f.product(g).eval(n) != f.eval(n) * g.eval(n) \
                or f.shift(j).eval(n) != f.eval(n + j):
            pointwise_bad += 1
    _report(3, "sequence-algebra suite exact on 500 randomized instances "
               "(product rule, binomial ladder, telescoping, pointwise "
               "oracle)",
            [("product rule", product_bad == 0, f"{product_bad} bad"),
             ("binomial ladder", ladder_bad == 0, f"{ladder_bad} bad"),
             ("telescoping", telescope_bad == 0, f"{telescope_bad} bad"),
             ("pointwise oracle", pointwise_bad == 0, f"{pointwise_bad} bad")])


def test_criterion_04_oscillator_regression_and_ladder():
    worst = 0.0
    ladder = []
    for eps in (Fraction(1, 10), Fraction(1, 20), Fraction(1, 40)):
        case = Illustration(epsilon=eps)
        gs = run_pipeline(case, form="exp").global_solution
        pub = case.published_answer("exp")
        for n in range(case.window() + 1):
            worst = max(worst, abs(to_complex(gs.evaluate(n))
                                   - complex(pub.evaluate(n))))
        exact = iterate_exact(case, case.window())
        sup = max(abs(exact[n] - gs.evaluate_real(n))
                  for n in range(case.window() + 1))
        ladder.append((float(eps), sup))
    slope = order_fit(ladder)
    _report(4, "oscillator regression: engine output matches the trig "
               "closed form to 1e-9; sup-error ladder order in [1.7, 2.3]",
            [("pointwise regression", worst <= 1e-9, f"worst {worst:.3e}"),
             ("ladder order", 1.7 <= slope <= 2.3,
              f"slope {slope:.3f} on {[(e, f'{s:.3e}') for e, s in ladder]}")])


def test_criterion_05_boundary_layer():
    case = BoundaryLayer()   # a=2, b=1, N=20, alpha=1, beta=1/2
    gs = run_pipeline(case).global_solution
    bc_exact = (gs.evaluate(0) == QQi(case.alpha)
                and gs.evaluate(case.N) == QQi(case.beta))
    ladder = []
    for eps in (Fraction(1, 25), Fraction(1, 50), Fraction(1, 100)):
        c = BoundaryLayer(epsilon=eps)
        g = run_pipeline(c).global_solution
        exact = c.exact_trajectory()
        sup = max(abs(exact[n] - g.evaluate_real(n)) for n in range(c.N + 1))
        ladder.append((float(eps), sup))
    slope = order_fit(ladder)
    # diagnostic: the same ladder with far-boundary data reachable by the
    # slow modes shows the expected second-order behaviour
    compat = []
    for eps in (Fraction(1, 25), Fraction(1, 50), Fraction(1, 100)):
        base = BoundaryLayer(epsilon=eps)
        growth = 1 + eps * Fraction(base.b) / Fraction(base.a) ** 2
        beta = Fraction(base.alpha) \
            * (-Fraction(base.b) / Fraction(base.a)) ** base.N \
            * growth ** base.N
        c = BoundaryLayer(epsilon=eps, beta=beta)
        g = run_pipeline(c).global_solution
        exact = c.exact_trajectory()
        sup = max(abs(exact[n] - g.evaluate_real(n)) for n in range(c.N + 1))
        compat.append((float(eps), sup))
    print(f"        [diagnostic] slow-compatible far boundary: ladder "
          f"{[(e, f'{s:.3e}') for e, s in compat]} -> "
          f"order {order_fit(compat):.3f}")
    _report(5, "two-point layer: boundary values exact; sup-error ladder "
               "order in [1.7, 2.3] at the pinned parameters",
            [("boundary values exact", bc_exact, "mismatch"),
             ("ladder order", 1.7 <= slope <= 2.3,
              f"slope {slope:.3f} on {[(e, f'{s:.3e}') for e, s in ladder]}; "
              "beta=1/2 is not reachable by the slow modes (the exact "
              "solution meets it through the fast root at n=N), so the "
              "closed two-mode answer is off by O(1e4) in the interior at "
              "every epsilon")])


def test_criterion_06_van_der_pol_envelope_and_equilibria():
    case = VanDerPol()   # theta=pi/5, eps=0.01, amplitude 0.005
    exact = iterate_exact(case, 100)
    period = math.ceil(2 * math.pi / case.theta)
    dev = envelope_deviation(exact, period, case.envelope_target())

    def settle(b0, steps=5000, eps=0.01, k=1.0):
        b = b0
        for _ in range(steps):
            b = b + eps * b * (1 - k * b * b)
        return b

    conv_small = abs(settle(0.1) - 1.0) <= 1e-3
    conv_large = abs(settle(2.0) - 1.0) <= 1e-3
    stay_zero = settle(0.0) == 0.0
    _report(6, "oscillator envelope within 10% of the exponential growth "
               "law for n <= 100; cubic-saturation update settles on the "
               "unit amplitude",
            [("envelope", dev <= 0.10, f"max rel dev {dev:.4f}"),
             ("settles from 0.1", conv_small, f"{settle(0.1):.6f}"),
             ("settles from 2.0", conv_large, f"{settle(2.0):.6f}"),
             ("stays at 0", stay_zero, "moved")])


def test_criterion_07_reduction_manifold():
    case = Reduction(epsilon=Fraction(1, 50))
    mr = reduction_pipeline(case, n_max=50)
    dist = manifold_distance(mr)
    d_ok = max(dist[:51]) <= 5 * 0.02 ** 2
    drift = max(abs(mr.full[n][0] - mr.slow[n]) for n in range(51))
    x_ok = drift <= 5 * 0.02
    ladder = []
    for eps in (Fraction(1, 25), Fraction(1, 50), Fraction(1, 100)):
        c = Reduction(epsilon=eps)
        m = reduction_pipeline(c, n_max=c.window())
        ladder.append((float(eps), max(manifold_distance(m))))
    slope = order_fit(ladder)
    _report(7, "fast-slow reduction: on-manifold distance <= 5 eps^2 and "
               "slow-map drift <= 5 eps for n <= 50; distance ladder order "
               ">= 1.7",
            [("manifold distance", d_ok, f"max {max(dist[:51]):.3e}"),
             ("slow drift", x_ok, f"max {drift:.3e}"),
             ("distance order", slope >= 1.7, f"slope {slope:.3f}")])


def test_criterion_08_cubic_growth_accuracy():
    case = HtrCubic()   # eta=0.01, B0=0.1
    gs = run_pipeline(case).global_solution
    exact = iterate_exact(case, 100)
    worst = max(abs(exact[n] - gs.evaluate_real(n)) / gs.evaluate_real(n)
                for n in range(101))
    _report(8, "homotopy cubic growth: relative error of the assembled "
               "geometric solution <= 5% for n <= 100",
            [("relative error", worst <= 0.05, f"max {worst:.4f}")])


def test_criterion_09_domain_wall(tmp_path):
    checks = []
    for lam in (0.1, 0.2, 0.4):
        case = HtrDomainWall(lam=lam)
        gs = run_pipeline(case).global_solution
        y0_exact = to_complex(gs.evaluate(0)) == 1.0
        tail_n = int(math.ceil(20 / lam))
        tail_ok = all(gs.evaluate_real(n) < 1e-6
                      for n in range(tail_n, tail_n + 10))
        window = case.window()
        residuals, sup = residual_scan(gs, case, range(window + 1))
        curve = "\n".join(f"{n},{r!r}" for n, r in enumerate(residuals))
        path = tmp_path / f"domain-wall-residual-lam{lam}.csv"
        write_atomic(str(path), "n,residual\n" + curve + "\n")
        checks.append((f"front values (lam={lam})", y0_exact and tail_ok,
                       "boundary/tail violated"))
        checks.append((
            f"sup residual (lam={lam})", sup <= 1.5 * lam * lam,
            f"measured {sup:.4f} > bound {1.5 * lam * lam:.4f}; the "
            f"second-difference part is O(lam^2) but the reaction term "
            f"y - y^3 reaches ~0.385 across the front (curve at {path})"))
    _report(9, "domain wall: front value 1 at n=0, tail < 1e-6 beyond "
               "20/lam, sup residual <= 1.5 lam^2 with the curve emitted",
            checks)


def test_criterion_10_determinism(tmp_path):
    configs = [
        ("illustration-json", ["run", "--case", "illustration",
                               "--epsilon", "0.05"]),
        ("boundary-csv", ["run", "--case", "boundary-layer",
                          "--output", "csv"]),
        ("ladder", ["run", "--case", "reduction",
                    "--ladder", "0.04,0.02,0.01"]),
        ("dump", ["run", "--case", "htr-domain-wall", "--lambda", "0.2",
                  "--dump-solution"]),
    ]
    all_same = []
    for label, argv in configs:
        paths = []
        for rep in ("a", "b"):
            ext = "csv" if "--output" in argv else "json"
            out = tmp_path / f"{label}-{rep}.{ext}"
            code = cli_main(argv + ["--out-path", str(out)])
            assert code == EXIT_OK
            blob = out.read_bytes()
            if "--dump-solution" in argv:
                with open(str(out)[:-len(".json")] + ".solution.json",
                          "rb") as fh:
                    blob += fh.read()
            paths.append(blob)
        all_same.append((label, paths[0] == paths[1]))
    _report(10, "repeated acceptance runs produce byte-identical report "
                "files",
            [(label, same, "differs") for label, same in all_same])
