"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Heavy Monte Carlo batches are shared across criteria through module-scoped
fixtures; every batch is seeded, so the whole suite is reproducible."""

import json
import time

import numpy as np
import pytest
from scipy import integrate, stats

import flowercell as fc
from flowercell.cli import main as cli_main

DISK_SPEC = {"kind": "smooth", "model": "disk", "params": {"radius": 1.0}}
SQUARE_SPEC = {"kind": "polygon",
               "vertices": [[1, -1], [1, 1], [-1, 1], [-1, -1]]}

G23 = fc.GAMMA_2_3


def _report(number, label, passed, detail):
    status = "PASS" if passed else "FAIL"
    print(f"\nACCEPTANCE {number:>2} [{label}]: {status} - {detail}")
    assert passed, f"criterion {number} ({label}): {detail}"


def _run(model, body, lam, reps, seed, *, checks=(), radius_factor=1.3,
         ks_theta=0.0):
    cfg = fc.ExperimentConfig(model=model, lambdas=[lam], replicates=reps,
                              seed=seed, body=body, checks=list(checks),
                              radius_factor=radius_factor, ks_theta=ks_theta)
    return fc.run_experiment_full(cfg)


# ---------------- shared heavy batches ----------------

@pytest.fixture(scope="module")
def disk_voronoi_1e3():
    return _run("voronoi", DISK_SPEC, 1e3, 3000, seed=101,
                radius_factor=1.3)


@pytest.fixture(scope="module")
def disk_voronoi_1e4():
    return _run("voronoi", DISK_SPEC, 1e4, 3000, seed=102,
                checks=["density-ks"], radius_factor=1.2)


@pytest.fixture(scope="module")
def square_voronoi_batches():
    out = {}
    for lam, seed in ((1e3, 111), (1e4, 112), (1e5, 113)):
        out[lam] = _run("voronoi", SQUARE_SPEC, lam, 320, seed=seed,
                        radius_factor=1.15)
    return out


def criterion_1_geometry():
    t0 = time.time()
    sq = fc.square_body(1.0)
    err_sq = abs(fc.flower_area(sq) - (np.pi + 2))
    errs_disk = [abs(fc.flower_area(fc.ConvexBody.disk(r)) - np.pi * r * r)
                 for r in (0.5, 1.0, 2.0)]
    from flowercell.shape import _monotone_chain_indices
    rng = np.random.default_rng(7)
    st_err, done = 0.0, 0
    while done < 50:
        c = rng.uniform(-0.15, 0.15, 2)
        half = rng.uniform(0.6, 1.4, (5, 1)) * np.stack(
            [np.cos(a := rng.uniform(0, np.pi, 5)), np.sin(a)], axis=1)
        pts = np.vstack([half, -half])
        hull = pts[_monotone_chain_indices(pts)] + c
        try:
            body = fc.ConvexBody.polygon(hull)
        except fc.ValidationError:
            continue
        st_err = max(st_err, float(np.max(np.abs(fc.steiner_point(body) - c))))
        done += 1
    elapsed = time.time() - t0
    ok = (err_sq <= 1e-9 and max(errs_disk) <= 1e-12 and st_err <= 1e-9
          and elapsed < 1.0)
    return ok, (f"flower(square) err={err_sq:.1e}, disk err"
                f"={max(errs_disk):.1e}, steiner err={st_err:.1e}, "
                f"{elapsed:.2f}s")


def test_criterion_1_deterministic_geometry():
    ok, detail = criterion_1_geometry()
    _report(1, "deterministic geometry", ok, detail)


def test_criterion_2_increment_convergence():
    t0 = time.time()
    disk = fc.ConvexBody.disk(1.0)
    sq = fc.square_body(1.0)
    bands = {1e-2: 0.1, 1e-3: 0.03, 1e-4: 0.01}
    disk_ratios = {}
    for h, band in bands.items():
        ex = fc.increment_area_exact(fc.IncrementQuery(disk, (1 + h, 0.0)))
        asym = fc.increment_area_smooth_asymptotic(disk, 0.0, h)
        disk_ratios[h] = ex / asym
    sq_ratios = {}
    for alpha, band in ((1e-2, 0.05), (1e-3, 0.01)):
        x = fc.edge_frame_point(sq, 0, 1.0, alpha)
        ex = fc.increment_area_exact(fc.IncrementQuery(sq, x))
        asym = fc.increment_area_polygon_asymptotic(sq, 0, 1.0, alpha)
        sq_ratios[alpha] = ex / asym
    elapsed = time.time() - t0
    ok = all(abs(disk_ratios[h] - 1) <= band for h, band in bands.items())
    ok &= abs(sq_ratios[1e-2] - 1) <= 0.05 and abs(sq_ratios[1e-3] - 1) <= 0.01
    ok &= elapsed < 5.0
    detail = (f"disk ratios {[f'{disk_ratios[h]:.5f}' for h in bands]}, "
              f"square {[f'{v:.5f}' for v in sq_ratios.values()]}, "
              f"{elapsed:.2f}s")
    _report(2, "flower-increment convergence", ok, detail)


def test_criterion_3_exact_efron_identity():
    rows = []
    ok = True
    for body, tag in ((DISK_SPEC, "disk"), (SQUARE_SPEC, "square")):
        for lam, seed in ((50.0, 301), (200.0, 302)):
            res = _run("voronoi", body, lam, 5000, seed=seed,
                       checks=["efron"], radius_factor=2.0)
            by = {r.name: r for r in res.reports}
            lhs = by["voronoi.efron.vertices"]
            rhs = by["voronoi.efron.flower_defect"]
            gap = abs(lhs.mean - rhs.mean)
            budget = 3.0 * np.hypot(lhs.std_error, rhs.std_error)
            ok &= gap <= budget
            rows.append(f"{tag}@{lam:g}: |{lhs.mean:.3f}-{rhs.mean:.3f}|"
                        f"={gap:.3f}<= {budget:.3f}")
    _report(3, "exact Efron identity", ok, "; ".join(rows))


def _rescaled_gap(res, functional, lam):
    rep = next(r for r in res.reports
               if r.name == f"voronoi.{functional}.rescaled")
    rel = abs(rep.mean - rep.theory_value) / abs(rep.theory_value)
    return rep, rel


def test_criterion_4_smooth_theorem(disk_voronoi_1e3, disk_voronoi_1e4):
    ok = True
    notes = []
    for functional in ("defect_area", "defect_perimeter", "vertices"):
        r3, rel3 = _rescaled_gap(disk_voronoi_1e3, functional, 1e3)
        r4, rel4 = _rescaled_gap(disk_voronoi_1e4, functional, 1e4)
        ok &= rel3 <= 0.15 and rel4 <= 0.08
        # the measured gap must shrink, up to Monte Carlo noise
        gap3 = abs(r3.mean - r3.theory_value)
        gap4 = abs(r4.mean - r4.theory_value)
        noise = 3.0 * np.hypot(r3.std_error, r4.std_error)
        ok &= gap4 <= gap3 + noise
        notes.append(f"{functional}: rel {rel3:.2%}->{rel4:.2%}")
    _report(4, "smooth Voronoi constants", ok, "; ".join(notes))


def test_criterion_5_polygon_theorem(square_voronoi_batches):
    lams = [1e3, 1e4, 1e5]
    means_n, ses_n = [], []
    for lam in lams:
        rep = next(r for r in square_voronoi_batches[lam].reports
                   if r.name == "voronoi.vertices.rescaled")
        # undo the symbolic rescale to recover the raw mean vertex count
        means_n.append(rep.mean * fc.Rate.LOG.factor(lam))
        ses_n.append(rep.std_error * fc.Rate.LOG.factor(lam))
    slope = np.polyfit(np.log(lams), means_n, 1)[0]
    slope_ok = abs(slope - 8 / 3) / (8 / 3) <= 0.12
    rep_a = next(r for r in square_voronoi_batches[1e4].reports
                 if r.name == "voronoi.defect_area.rescaled")
    rel_a = abs(rep_a.mean - rep_a.theory_value) / rep_a.theory_value
    area_ok = rel_a <= 0.10
    _report(5, "polygonal Voronoi constants", slope_ok and area_ok,
            f"N-vs-log slope {slope:.3f} vs {8 / 3:.3f}; "
            f"sqrt-rescaled area rel {rel_a:.2%}")


def test_criterion_6_densities(disk_voronoi_1e4):
    disk = fc.ConvexBody.disk(1.0)
    sq = fc.square_body(1.0)
    n_fs, _ = integrate.dblquad(lambda y, x: fc.density_f_s(disk, 0.0, x, y),
                                -7, 7, 0, 7, epsabs=1e-9)

    def f_i_total():
        def marg(a):
            v, _ = integrate.quad(
                lambda s: fc.density_f_i(sq, 0, s / a ** 2, a) / a ** 2,
                0, 60, limit=200)
            return v
        v, _ = integrate.quad(marg, 1, np.inf, limit=200)
        return v

    n_fi = f_i_total()
    n_gi = {}
    for tau in (0.0, 0.5):
        v, _ = integrate.dblquad(
            lambda a, r: fc.density_g_i(sq, 0, r, a, tau),
            0, 2, tau, np.inf, epsabs=1e-9)
        n_gi[tau] = v
    marg_sigma = fc.sigma_s_marginal(disk, 0.0)
    integrand = 4 * 3 ** (-4 / 3) * G23  # theorem (iii) integrand at r=h=1
    sigma_ok = abs(marg_sigma - integrand) <= 1e-6

    ys = 1e4 ** (2 / 3) * np.asarray(disk_voronoi_1e4.raw[1e4]["ks_y"])
    grid, cdf = fc.laws.f_s_y_cdf_grid(disk, 0.0)
    ks = stats.ks_1samp(ys, lambda y: np.interp(y, grid, cdf))

    ok = (abs(n_fs - 1) <= 1e-6 and abs(n_fi - 1) <= 1e-6
          and all(abs(v - 1) <= 1e-6 for v in n_gi.values())
          and sigma_ok and ks.pvalue > 0.01 and len(ys) >= 3000)
    _report(6, "limit densities", ok,
            f"norms f_s={n_fs:.8f} f_i={n_fi:.8f} "
            f"g_i={[f'{v:.8f}' for v in n_gi.values()]}; "
            f"sigma marginal err={abs(marg_sigma - integrand):.1e}; "
            f"KS D={ks.statistic:.4f} p={ks.pvalue:.4f} n={len(ys)}")


def test_criterion_7_steiner_nucleus():
    disk = fc.ConvexBody.disk(1.0)
    lam = 1e4
    z, trace = fc.sample_nucleus(lam, disk, 2000, seed=701,
                                 return_trace=True)
    ratio_ok = bool(np.all(trace[:, 2] <= 1.0 + 1e-12))
    scaled = np.sqrt(lam) * z
    var = scaled.var(ddof=1)
    rel = abs(var - fc.NUCLEUS_COORD_VARIANCE) / fc.NUCLEUS_COORD_VARIANCE
    se = scaled.std(ddof=1) / np.sqrt(scaled.size)
    mean_ok = abs(scaled.mean()) <= 3 * se
    ok = ratio_ok and rel <= 0.15 and mean_ok and len(z) == 2000
    _report(7, "Steiner nucleus Gaussian", ok,
            f"var {var:.5f} vs {fc.NUCLEUS_COORD_VARIANCE:.5f} "
            f"(rel {rel:.2%}); mean |{scaled.mean():.5f}| <= {3 * se:.5f}; "
            f"max ratio {trace[:, 2].max():.6f} over {len(trace)} proposals")


def test_criterion_8_limit_shape():
    domain = fc.StarlikeDomain.disk(1.0, (0.3, 0.0))
    curve = fc.antiorthotomic(domain)
    pts = curve.points
    focal = np.hypot(pts[:, 0], pts[:, 1]) + np.hypot(pts[:, 0] - 0.3,
                                                      pts[:, 1])
    eq_err = float(np.max(np.abs(focal - 1.0)))

    excl = fc.domain_exclusion(domain)
    radius = 2.5 * excl.r_max
    dh3, dh4, mono = [], [], True
    for rep in range(40):
        big = fc.sample_conditioned_points(1e4, None, radius=radius,
                                           seed=801, stream=("accept8", rep),
                                           exclusion=excl)
        small = fc.thin_sample(big, 1e3)
        d4 = fc.hausdorff_support(fc.voronoi_zero_cell(big), curve)
        d3 = fc.hausdorff_support(fc.voronoi_zero_cell(small), curve)
        mono &= d4 <= d3 + 1e-12  # nested coupling: cells shrink with lam
        dh3.append(d3)
        dh4.append(d4)
    m3, m4 = float(np.mean(dh3)), float(np.mean(dh4))
    ok = eq_err <= 1e-6 and m4 < 0.05 and m4 < m3 and mono
    _report(8, "limit shape (antiorthotomic)", ok,
            f"equidistance err {eq_err:.1e}; mean d_H {m4:.4f} @1e4 "
            f"< {m3:.4f} @1e3, coupled-monotone={mono}")


def test_criterion_9_crofton():
    small = fc.ConvexBody.disk(0.05)
    counts = [len(fc.sample_conditioned_lines(5.0, small, radius=10.0,
                                              seed=s)) for s in range(200)]
    expected = 5.0 * 2 * np.pi * 9.95
    se_c = np.std(counts, ddof=1) / np.sqrt(len(counts))
    count_ok = abs(np.mean(counts) - expected) <= 3 * se_c

    res = _run("crofton", DISK_SPEC, 200.0, 5000, seed=901,
               checks=["efron"], radius_factor=2.0)
    by = {r.name: r for r in res.reports}
    lhs = by["crofton.efron.vertices"]
    rhs = by["crofton.efron.perimeter_defect"]
    gap = abs(lhs.mean - rhs.mean)
    budget = 3.0 * np.hypot(lhs.std_error, rhs.std_error)
    efron_ok = gap <= budget

    res4 = _run("crofton", DISK_SPEC, 1e4, 200, seed=902, radius_factor=1.3)
    rep = next(r for r in res4.reports if r.name == "crofton.vertices.rescaled")
    rel = abs(rep.mean - rep.theory_value) / rep.theory_value
    vert_ok = rel <= 0.10

    ok = count_ok and efron_ok and vert_ok
    _report(9, "Crofton model", ok,
            f"line count {np.mean(counts):.1f} vs {expected:.1f} "
            f"(3SE {3 * se_c:.1f}); Efron gap {gap:.3f} <= {budget:.3f}; "
            f"vertex const rel {rel:.2%}")


def test_criterion_10_determinism(tmp_path):
    cfg = dict(model="voronoi", lambdas=[120.0], replicates=40, seed=424,
               body=DISK_SPEC, checks=["efron", "theorem-constant"],
               tolerances={"theorem-constant": 0.5})
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    outs = []
    for k in (1, 2):
        out = tmp_path / f"run{k}"
        code = cli_main(["estimate", "--config", str(cfg_path),
                         "--out", str(out)])
        assert code == 0
        outs.append((out / "reports.csv").read_bytes())
    bitwise_ok = outs[0] == outs[1]

    import os
    config = fc.ExperimentConfig(**cfg)
    serial = fc.run_experiment(config)
    os.environ["FLOWERCELL_THREADS"] = "4"
    try:
        parallel = fc.run_experiment(config)
    finally:
        del os.environ["FLOWERCELL_THREADS"]
    parallel_ok = serial == parallel
    _report(10, "determinism", bitwise_ok and parallel_ok,
            f"bitwise CSV identical={bitwise_ok}, "
            f"parallel==serial={parallel_ok}")
