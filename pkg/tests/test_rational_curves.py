import gzip
import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from murmurlab.rational_curves import (
    AP_PRIMES, BadReductionError, CurveRecord, ValidationError, adjoint_feature, adjusted_correlation,
    ap_count, computed_ap, convert_cremona, discriminant, fit_decay, grouped_cv, hecke_coefficients,
    ingest, l_value, parse_allbsd_line, record_from_dict, sign_flip_deciles, truncation_point,
    write_jsonl,
)
from murmurlab.rational_curves import stats

E11A1 = (0, -1, 1, -10, -20)
E37A1 = (0, 0, 1, -1, 0)


def brute_ap(ainvs, p):
    a1, a2, a3, a4, a6 = ainvs
    n = 1 + sum((y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0
                for x in range(p) for y in range(p))
    return p + 1 - n


def test_discriminant_known():
    assert discriminant(E11A1) == -161051
    assert discriminant(E37A1) == 37


@pytest.mark.parametrize("p", [2, 3, 5, 7, 13, 29, 97])
def test_ap_count_brute_force(p):
    for E in (E11A1, E37A1, (1, 0, 1, 4, -6), (1, -1, 0, -3, 3)):
        if discriminant(E) % p:
            assert ap_count(E, p) == brute_ap(E, p)


def test_ap_known_values():
    # 11a1: a_2 = -2, a_3 = -1, a_5 = 1, a_7 = -2 (the q-expansion of eta(q)^2 eta(q^11)^2)
    assert [ap_count(E11A1, p, allow_bad=True) for p in (2, 3, 5, 7, 11, 13)] == [-2, -1, 1, -2, 1, 4]


def test_ap_bad_prime_guard():
    with pytest.raises(BadReductionError):
        ap_count(E11A1, 11)
    with pytest.raises(ValueError):
        ap_count(E11A1, 15)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=5, max_size=5), st.sampled_from(AP_PRIMES[:40]))
def test_hasse_bound(ainvs, p):
    assume(discriminant(ainvs) % p != 0)
    assert ap_count(ainvs, p) ** 2 <= 4 * p


def test_hecke_multiplicativity():
    ap = dict(zip(AP_PRIMES, computed_ap(E11A1, 11)))
    a = hecke_coefficients(ap, 11, 400)
    for m in range(1, 20):
        for n in range(1, 20):
            if math.gcd(m, n) == 1 and m * n <= 400:
                assert a[m * n] == a[m] * a[n]
    # a_{p^2} = a_p^2 - p for good p, a_{11^k} = a_11^k
    assert a[4] == ap[2] ** 2 - 2
    assert a[121] == ap[11] ** 2
    with pytest.raises(ValueError):
        hecke_coefficients({2: 1}, 11, 10)


def test_l_value_11a1():
    ap = dict(zip(AP_PRIMES, computed_ap(E11A1, 11)))
    assert l_value(ap, 11) == pytest.approx(0.2538418608559106843377589, abs=1e-13)


def test_truncation_point_monotone():
    assert truncation_point(10_000, 1e-12) == 600  # the 6 sqrt(N) floor dominates here
    assert truncation_point(10_000, 1e-25) > truncation_point(10_000, 1e-20) > 600


def test_adjoint_feature():
    assert adjoint_feature(3, 0) == pytest.approx(-2 * 3 * 16 / 256)
    v = adjoint_feature(5, np.array([-2, 2]))
    assert v[0] == v[1]
    with pytest.raises(ZeroDivisionError):
        adjoint_feature(3, 4)


# ---------------------------------------------------------------------------
# records


def good_dict(**kw):
    d = {"label": "11.x", "conductor": 11, "ainvs": list(E11A1), "rank": 0,
         "ap": computed_ap(E11A1, 11)[:30], "omega": 1.26920930427955, "tamagawa_product": 5,
         "sha": 1, "torsion": 5, "l1": 0.253841860855911}
    d.update(kw)
    return d


def test_record_roundtrip(tmp_path):
    r = record_from_dict(good_dict())
    path = tmp_path / "r.jsonl.gz"
    write_jsonl([r, r], path)
    back = ingest(path)
    assert len(back) == 2 and back.records[0] == r


@pytest.mark.parametrize("bad", [
    {"conductor": 0}, {"omega": -1.0}, {"sha": 0}, {"l1": float("nan")},
    {"ap": [40] + [0] * 10}, {"ainvs": [1, 2, 3]}, {"ap": "x"},
])
def test_record_validation(bad):
    with pytest.raises(ValidationError):
        record_from_dict(good_dict(**bad))


def test_bad_prime_ap_range():
    ap = computed_ap(E11A1, 11)[:10]
    ap[4] = 2  # p = 11 divides N
    with pytest.raises(ValidationError):
        record_from_dict(good_dict(ap=ap))


def test_ingest_reports_bad_rows(tmp_path, caplog):
    path = tmp_path / "mixed.jsonl"
    path.write_text(json.dumps(good_dict()) + "\n{not json\n" + json.dumps(good_dict(sha=0)) + "\n")
    rep = ingest(path)
    assert len(rep) == 1 and [e[0] for e in rep.errors] == [2, 3]
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert len(ingest(empty)) == 0
    with pytest.raises(OSError):
        ingest(tmp_path / "missing.jsonl")


def test_cremona_allbsd_conversion(tmp_path):
    line = "11 a 1 [0,-1,1,-10,-20] 0 5 5 1.26920930427955 0.253841860855911 1 1"
    d = parse_allbsd_line(line)
    assert d["label"] == "11a1" and d["tamagawa_product"] == 5 and d["sha"] == 1
    path = tmp_path / "allbsd.0-99"
    path.write_text("# header\n" + line + "\n37 a 1 [0,0,1,-1,0] 1 1 1 5.98691729246392 0.305999773834052 0.0511114082399688 1\ngarbage\n")
    rep = convert_cremona(path)
    assert [r.label for r in rep] == ["11a1", "37a1"]
    assert rep.records[0].ap[2] == -2 and rep.records[1].l1 == 0.0
    assert len(rep.errors) == 1
    with pytest.raises(ValidationError):
        parse_allbsd_line("not a row")


def test_fixture_internal_consistency(fixture_records):
    recs = fixture_records
    assert len(recs) >= 10_000
    assert len({r.label for r in recs}) == len(recs)
    r0 = [r for r in recs if r.rank == 0]
    dev = max(abs(r.l1 - r.omega * r.tamagawa_product * r.sha / r.torsion**2) for r in r0)
    assert dev < 1e-6
    rng = np.random.default_rng(7)
    for i in rng.choice(len(r0), 60, replace=False):
        r = r0[i]
        assert computed_ap(r.ainvs, r.conductor, AP_PRIMES[:60]) == [r.ap[p] for p in AP_PRIMES[:60]]
        assert l_value(r.ap, r.conductor) == pytest.approx(r.l1, abs=1e-9)


def test_rank1_records_load(rank1_path):
    rep = ingest(rank1_path)
    assert len(rep) > 50 and not rep.errors
    assert all(r.rank == 1 and r.l1 == 0.0 for r in rep)


# ---------------------------------------------------------------------------
# statistics on synthetic data with a planted effect


def synthetic(n=3000, beta=0.3, seed=0, p=3):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        a = int(rng.integers(-3, 4))
        L = float(rng.uniform(0.1, 3.0))
        om = float(math.exp(beta * a / 3 + 0.2 * L + rng.normal(0, 0.5)))
        ap = {q: int(rng.integers(-2, 3)) for q in AP_PRIMES[:30]}
        ap[p] = a
        N = int(rng.integers(100, 80_000)) * 3 + 1  # never divisible by 3
        c = int(rng.integers(1, 5))
        t = int(rng.choice([1, 1, 1, 2, 3]))
        out.append(CurveRecord(f"{N}.t{i}", N, (0, 0, 1, -1, 0), 0, ap, om, c, 1, t, om * c / t**2))
    return out


def test_adjusted_correlation_detects_planted_signal():
    r = adjusted_correlation(synthetic(beta=0.5), 3)
    assert r.correlation > 0 and r.z() > 3
    null = adjusted_correlation(synthetic(beta=0.0, seed=1), 3)
    assert abs(null.z()) < 4


def test_adjusted_correlation_errors():
    recs = synthetic(n=20)
    with pytest.raises(ValueError):
        adjusted_correlation(recs, 3)
    flat = [CurveRecord(r.label, r.conductor, r.ainvs, 0, r.ap, r.omega, 1, 1, 1, 1.0) for r in synthetic(100)]
    with pytest.raises(ValueError, match="degenerate"):
        adjusted_correlation(flat, 3)


def test_fit_decay_exact():
    ps = [3, 5, 7, 11, 13]
    fit = fit_decay(ps, [0.2 / math.sqrt(p) for p in ps])
    assert fit.C == pytest.approx(0.2) and max(map(abs, fit.residuals)) < 1e-12


def test_equal_count_bins_deterministic():
    vals = np.array([1.0, 1.0, 0.5, 2.0, 1.0, 3.0])
    labels = ["b", "a", "c", "d", "e", "f"]
    bins = stats.equal_count_bins(vals, labels, 3)
    assert [list(b) for b in bins] == [[2, 1], [0, 4], [3, 5]]


def test_sign_flip_table_shape():
    recs = synthetic(2000)
    rows = sign_flip_deciles(recs, 3)
    assert len(rows) == 10 and sum(r["n"] for r in rows) == sum(r.torsion == 1 for r in recs)
    assert all(-1 <= r["corr_omega"] <= 1 for r in rows)


def test_grouped_cv_never_splits_groups():
    from sklearn.model_selection import GroupKFold

    recs = synthetic(600)
    groups = np.array([r.conductor % 50 for r in recs])
    for train, test in GroupKFold(5).split(np.zeros(len(recs)), groups=groups):
        assert not set(groups[train]) & set(groups[test])
    res = grouped_cv(recs, "log_tamagawa")
    assert res.n == 600 and math.isfinite(res.delta_r2)
    with pytest.raises(ValueError):
        grouped_cv(recs, "nonsense")


def test_grouped_cv_finds_adjoint_signal():
    rng = np.random.default_rng(3)
    recs = synthetic(1500)
    out = []
    for r in recs:
        x = sum(adjoint_feature(p, r.ap[p]) for p in AP_PRIMES[:25])
        c = max(1, int(round(math.exp(-3 * x + rng.normal(0, 0.1)))))
        out.append(CurveRecord(r.label, r.conductor, r.ainvs, 0, r.ap, r.omega, c, 1, 1, r.omega * c))
    res = grouped_cv(out, "log_tamagawa", quadratic=False)
    assert res.delta_r2 > 0


def test_controls_suite_runs():
    out = stats.controls_suite(synthetic(3000, beta=0.5))
    assert out["baseline"].correlation > 0
    assert "r2_increase" in out["afe_regressor"].extra
    assert out["placebo"]["max_abs_z"] < 5
