"""End-to-end acceptance runs, one test per criterion.

Each test prints one [PRIMARY k] PASS/FAIL line before asserting, so a
plain `pytest tests/test_acceptance.py -v -s` shows the full scorecard.
Two criteria state targets that the dependent-vector data genuinely miss
at finite level; those tests print FAIL and fail honestly rather than
weaken the claim.
"""

import random
import subprocess
import sys

from megs.chains import ChainStore, quotient
from megs.checks import SUITE_DATA, run_check
from megs.datum import NumericalDatum, classify
from megs.words import ExceedsCap, GroupWord, evaluate, is_trivial, order, parse_word

GS = NumericalDatum.from_text("p = 3; E1 = (1, 2)")
S22 = NumericalDatum.from_text("p = 3; E1 = (2, 2)")
DEP = NumericalDatum.from_text("p = 3; E1 = (1, 2); E2 = (1, 2)")
PAIRREV = NumericalDatum.from_text("p = 3; E1 = (1, 2); E2 = (2, 1)")
CONST = NumericalDatum.from_text("p = 3; E1 = (1, 1); E2 = (1, 1)")
P5E = NumericalDatum.from_text("p = 5; E1 = (1, 0, 0, 1); E2 = (0, 1, 1, 0)")

STORE = ChainStore()


def report(number, ok, detail):
    print(f"[PRIMARY {number}] {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def random_word(rng, datum, syllables):
    w = GroupWord.identity(datum.p)
    for _ in range(syllables):
        if rng.random() < 0.4:
            w = w * GroupWord.rooted(datum.p, rng.randint(1, datum.p - 1))
        else:
            j = rng.choice(datum.nonempty_families)
            i = rng.randint(1, len(datum.family(j)))
            w = w * GroupWord.generator(datum, j, i, rng.randint(1, datum.p - 1))
    return w


def test_primary_1_quotient_orders():
    level_one = quotient(CONST, 1, store=STORE).order()
    level_two = quotient(CONST, 2, store=STORE).order()
    q4 = quotient(CONST, 4, store=STORE)
    index_exp = q4.order_exponent() - q4.kernel_derived(1).order_exponent()
    ok = level_one == 3 and level_two == 81 and index_exp == 7
    report(
        1,
        ok,
        f"constant-pair orders: |Q1|={level_one}, |Q2|={level_two}, "
        f"|Q4 : St(1)'|=3^{index_exp} (want 3, 81, 3^7)",
    )
    assert ok


def test_primary_2_abelianization_all_suite_data():
    misses = []
    for name, text in SUITE_DATA:
        datum = NumericalDatum.from_text(text)
        r = run_check("abelianization-index", datum, level=3, store=STORE)
        measured = r.certificates["measured-exponent"]
        want = 1 + datum.total_generators
        if measured != want:
            misses.append(f"{name} p^{measured} (want p^{want})")
    ok = not misses
    detail = f"all {len(SUITE_DATA)} suite data have |Q3/Q3'| = p^(1+r)"
    if misses:
        detail = (
            "dependent-vector data collapse the abelianization at every finite "
            "level: " + "; ".join(misses)
        )
    report(2, ok, detail)
    assert ok, detail


def test_primary_3_classification_sweep():
    symmetric = {(1, 1), (2, 2)}
    mismatches = []
    for x in range(3):
        for y in range(3):
            if (x, y) == (0, 0):
                continue
            datum = NumericalDatum.from_text(f"p = 3; E1 = ({x}, {y})")
            flag = classify(datum).branch_over_derived
            verdict = run_check("branch-over-derived", datum, level=3, store=STORE).verdict
            if (verdict == "Verified") != flag:
                mismatches.append((x, y))
            if ((x, y) in symmetric) != (verdict == "RefutedByWitness"):
                mismatches.append((x, y))
    ok = not mismatches
    report(3, ok, f"8-vector sweep, classifier vs level-3 check: mismatches {mismatches}")
    assert ok


def test_primary_4_csp_positive_levels():
    r_gs = run_check("csp-positive", GS, level=4, store=STORE)
    r_s22 = run_check("csp-positive", S22, level=6, store=STORE)
    ok = r_gs.verdict == "Verified" and r_s22.verdict == "Verified"
    report(
        4,
        ok,
        f"single-12 kernel(2) in derived(Q4): {r_gs.verdict}; "
        f"single-22 kernel(5) in gamma3(Q6): {r_s22.verdict}",
    )
    assert ok


def test_primary_5a_dependent_witness():
    r = run_check("csp-witness-dependent", DEP, level=3, aux_level=5, store=STORE)
    certs = r.certificates
    built = certs["agrees-to-level"] and certs["classes-differ"]
    in_kernel = certs["defect-in-level-kernel"]
    outside_derived = not certs["defect-in-derived"]
    ok = built and in_kernel and outside_derived
    detail = (
        f"t3 agrees with target to depth 3: {certs['agrees-to-level']}; "
        f"abelianization defect nonzero: {certs['classes-differ']}; "
        f"defect in level-3 kernel of Q5: {in_kernel}; "
        f"defect outside derived(Q5): {outside_derived}"
    )
    if not outside_derived:
        detail += (
            " (the quotient's abelianization already collapses the two families, "
            "so the defect lands inside derived(Q5) at every finite level)"
        )
    report("5a", ok, detail)
    assert ok, detail


def test_primary_5b_exceptional_witness():
    r = run_check("csp-witness-exceptional", P5E, level=2, aux_level=4, store=STORE)
    certs = r.certificates
    ok = (
        r.verdict == "Verified"
        and certs["t-in-level-stabilizer"]
        and certs["consistent"]
    )
    level_found = certs["escape-level"]
    report(
        "5b",
        ok,
        f"t2 in level-2 stabilizer: {certs['t-in-level-stabilizer']}; "
        f"escape level found: {level_found}; "
        f"outside-gamma3 iff level found: {certs['consistent']}",
    )
    assert ok


def test_primary_6_torsion_order_suite():
    rng = random.Random(20260817)
    checked = 0
    for datum in (GS, PAIRREV):
        for _ in range(50):
            w = random_word(rng, datum, rng.randint(1, 6))
            n = order(w, datum, cap=3**12)
            m = n
            while m % 3 == 0:
                m //= 3
            assert m == 1, f"order {n} is not a power of 3"
            assert is_trivial(w**n, datum)
            if n > 1:
                assert not is_trivial(w ** (n // 3), datum)
            for depth in range(1, 17):
                got = evaluate(w, datum, depth).order()
                assert n % got == 0
                if got == n:
                    break
            else:
                raise AssertionError("portrait order never reached the claimed value")
            checked += 1
    try:
        order(parse_word("a b[1,1]", CONST), CONST, cap=3**6)
        unbounded = False
    except ExceedsCap as info:
        unbounded = info.cap == 3**6
    ok = checked == 100 and unbounded
    report(
        6,
        ok,
        f"{checked} seeded words: p-power order, certified, matches portrait oracle; "
        f"constant-pair a*b exceeds cap 3^6: {unbounded}",
    )
    assert ok


def test_primary_7_fractality():
    failures = []
    for name, text in SUITE_DATA:
        datum = NumericalDatum.from_text(text)
        if classify(datum).in_G_class:
            continue
        r = run_check("fractality", datum, level=3, store=STORE)
        if r.verdict != "Verified":
            failures.append(name)
    r = run_check("fractality", CONST, level=4, store=STORE)
    defect = r.certificates.get("first-defect", {})
    refuted = (
        r.verdict == "RefutedByWitness"
        and defect.get("k") == 2
        and defect.get("full-exponent", 0) - defect.get("section-exponent", 0) == 1
    )
    ok = not failures and refuted
    report(
        7,
        ok,
        f"non-constant suite data verified at n=3 (failures: {failures or 'none'}); "
        f"constant-pair refuted at depth 2 with index-3 defect: {refuted}",
    )
    assert ok


def test_primary_8_constant_vector_structure():
    r = run_check("constant-vector", CONST, level=3, samples=20, store=STORE)
    certs = r.certificates
    ok = (
        r.verdict == "Verified"
        and certs["index-exponent"] == 1
        and certs["star-sample-count"] >= 20
        and certs["star-failures"] == 0
    )
    report(
        8,
        ok,
        f"|Q3 : K| = 3^{certs['index-exponent']}; "
        f"{certs['star-sample-count']} star products sift into the K_j' images "
        f"({certs['star-failures']} failures)",
    )
    assert ok


def test_primary_9_determinism(tmp_path):
    cache = tmp_path / "cache"

    def run_suite(extra):
        return subprocess.run(
            [sys.executable, "-m", "megs.cli", "suite", "--seed", "20260817"] + extra,
            capture_output=True,
            timeout=600,
        )

    first = run_suite(["--cache-dir", str(cache)])
    second = run_suite(["--cache-dir", str(cache)])
    uncached = run_suite([])
    byte_identical = first.stdout == second.stdout and first.stdout
    verdicts = [
        line
        for line in first.stdout.decode().splitlines()
        if "->" in line
    ]
    verdicts_uncached = [
        line
        for line in uncached.stdout.decode().splitlines()
        if "->" in line
    ]
    same_verdicts = verdicts == verdicts_uncached and verdicts
    codes_ok = first.returncode == second.returncode == uncached.returncode == 0
    ok = bool(byte_identical and same_verdicts and codes_ok)
    report(
        9,
        ok,
        f"two cached suite runs byte-identical: {bool(byte_identical)}; "
        f"cache on/off verdicts identical across {len(verdicts)} rows: "
        f"{bool(same_verdicts)}; exit codes all 0: {codes_ok}",
    )
    assert ok
