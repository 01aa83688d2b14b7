"""Finite-level verification of structural statements about the tree groups.

Every check here follows the same pattern: build congruence quotients of the
datum's group at a chosen tree depth, test a finite shadow of a statement
about the infinite group, and return a report with a verdict and
machine-checkable certificates.

Verdict semantics are asymmetric, as they must be for finite shadows:

- ``RefutedByWitness`` is rigorous: the recorded witness violates the finite
  shadow, and the shadow is a consequence of the infinite statement, so the
  infinite statement fails.
- ``Verified`` means the shadow holds at the tested level.  For embedding and
  containment statements this is evidence, not proof; deeper levels can still
  refute.
- ``GuardExceeded`` means a bounded search ended without an answer.

Each report also carries the verdict predicted by the datum's classification
at the tested level, so callers can tell "refuted, as the classification
predicts" apart from a genuine surprise.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field

from .chains import (
    ChainStore,
    DEFAULT_DEGREE_GUARD,
    FiniteQuotient,
    SubgroupChain,
    block_product_chain,
    derived_chain,
    embed_pivots,
    quotient,
    section_chain,
)
from .datum import (
    HAS_CSP,
    NumericalDatum,
    classify,
    dependency,
    exceptional_pair,
    is_constant,
)
from .portraits import Portrait
from .words import (
    BranchElement,
    GroupWord,
    abelianization,
    commutator_word,
    evaluate,
    evaluate_branch,
    first_level_sections,
    is_trivial,
    parse_word,
    word_to_text,
)

VERIFIED = "Verified"
REFUTED = "RefutedByWitness"
GUARD = "GuardExceeded"

DEFAULT_SEED = 20260817


class CheckError(ValueError):
    """A check was invoked on a datum or level outside its preconditions."""


# -- reports ---------------------------------------------------------------------


@dataclass
class CheckReport:
    """Outcome of one finite-level check, with certificates."""

    check: str
    datum_text: str
    level: int
    verdict: str
    expected: str | None = None
    aux_level: int | None = None
    certificates: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    seed: int | None = None

    @property
    def as_predicted(self) -> bool:
        return self.expected is None or self.verdict == self.expected

    def to_text(self) -> str:
        lines = [
            f"check: {self.check}",
            f"datum: {self.datum_text}",
            f"level: {self.level}",
        ]
        if self.aux_level is not None:
            lines.append(f"aux-level: {self.aux_level}")
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        lines.append(f"verdict: {self.verdict}")
        lines.append(f"expected: {self.expected or 'exploratory'}")
        lines.append(f"as-predicted: {'yes' if self.as_predicted else 'no'}")
        if self.certificates:
            lines.append("certificates:")
            for key in sorted(self.certificates):
                value = json.dumps(self.certificates[key], sort_keys=True)
                lines.append(f"  {key}: {value}")
        if self.notes:
            lines.append("notes:")
            for note in self.notes:
                lines.append(f"  - {note}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "datum": self.datum_text,
            "level": self.level,
            "aux_level": self.aux_level,
            "seed": self.seed,
            "verdict": self.verdict,
            "expected": self.expected,
            "as_predicted": self.as_predicted,
            "certificates": self.certificates,
            "notes": list(self.notes),
        }


# -- shared helpers --------------------------------------------------------------


def single_constant_family(datum: NumericalDatum) -> bool:
    """One nonempty family, a singleton with a constant vector."""
    fams = datum.nonempty_families
    return len(fams) == 1 and _all_constant_singletons(datum)


def _all_constant_singletons(datum: NumericalDatum) -> bool:
    return all(
        len(datum.family(j)) == 1 and is_constant(datum.family(j)[0])
        for j in datum.nonempty_families
    )


def _constant_type(datum: NumericalDatum) -> bool:
    """Every nonempty family is a constant singleton (one family or several)."""
    return bool(datum.nonempty_families) and _all_constant_singletons(datum)


def _witness_cert(certs: dict, key: str, g: Portrait) -> None:
    shown = g if g.depth <= 4 else g.truncate(4)
    certs[key] = shown.to_text()
    if g.depth > 4:
        certs[f"{key}-truncated-to-depth"] = 4


def _require_not_constant_class(datum: NumericalDatum, check: str) -> None:
    cls = classify(datum)
    if cls.in_G_class:
        raise CheckError(
            f"{check} does not apply to data whose families are all constant "
            "singletons across two or more families"
        )


def _embedding_check(
    check: str,
    datum: NumericalDatum,
    level: int,
    source: SubgroupChain,
    target: SubgroupChain,
    expected: str | None,
    notes: tuple[str, ...],
    extra_certs: dict | None = None,
) -> CheckReport:
    """Sift the pivots of `source`, embedded below the first vertex, into `target`."""
    pivots = embed_pivots(datum.p, level, (1,), source)
    failed = [g for g in pivots if not target.contains(g)]
    certs = {
        "source-order-exponent": source.order_exponent(),
        "target-order-exponent": target.order_exponent(),
        "pivot-count": len(pivots),
        "failed-pivot-count": len(failed),
    }
    if extra_certs:
        certs.update(extra_certs)
    if failed:
        _witness_cert(certs, "witness", failed[0])
    return CheckReport(
        check=check,
        datum_text=datum.canonical_line(),
        level=level,
        verdict=VERIFIED if not failed else REFUTED,
        expected=expected,
        certificates=certs,
        notes=notes,
    )


# -- abelianization --------------------------------------------------------------


def check_abelianization_index(
    datum: NumericalDatum,
    level: int = 3,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Index of the derived subgroup in the level-n quotient against p^(1+r).

    For jointly independent defining vectors the quotient modulo its derived
    subgroup has order exactly p^(1+r) from level r+1 on.  When the joint
    vectors are linearly dependent and the datum has a branch structure over
    the derived subgroup, the classes of the involved generators merge in
    every congruence quotient, so the measured index stays at p^(1+dim V) and
    the full-rank value is unattainable at any level.  Constant-class data
    keep the full rank despite their dependent vectors, because no branch
    containment forces the merge; the remaining dependent combinations are
    reported without a prediction.
    """
    datum.require_valid()
    if level < 2:
        raise CheckError("abelianization-index needs level >= 2")
    cls = classify(datum)
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    measured = q.order_exponent() - q.derived().order_exponent()
    r = datum.total_generators
    predicted = 1 + r
    reduced = 1 + cls.dimV
    dep = dependency(datum)
    certs = {
        "measured-exponent": measured,
        "predicted-exponent": predicted,
        "joint-span-dimension": cls.dimV,
        "reduced-exponent": reduced,
        "reduced-matches": measured == reduced,
    }
    notes: tuple[str, ...] = ()
    if dep is None:
        expected = VERIFIED
    elif cls.in_G_class:
        expected = VERIFIED
        certs["dependent-target-family"] = dep.family
    elif cls.branch_over_derived:
        expected = REFUTED
        certs["dependent-target-family"] = dep.family
        notes = (
            "the joint defining vectors are linearly dependent, so the involved "
            "generator classes coincide in every congruence abelianization and "
            "the full-rank index cannot appear at any level",
        )
    else:
        expected = None
        certs["dependent-target-family"] = dep.family
    return CheckReport(
        check="abelianization-index",
        datum_text=datum.canonical_line(),
        level=level,
        verdict=VERIFIED if measured == predicted else REFUTED,
        expected=expected,
        certificates=certs,
        notes=notes,
    )


# -- branch structure ------------------------------------------------------------


def check_branch_over_derived(
    datum: NumericalDatum,
    level: int = 3,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Derived subgroup below one vertex against the derived part of the stabilizer.

    Embeds the pivots of the derived subgroup of the level-(n-1) quotient at
    the first vertex and sifts them into the derived subgroup of the level-1
    kernel of the level-n quotient.  The classification predicts success
    exactly when some defining vector is non-symmetric or the joint span has
    dimension at least two.
    """
    datum.require_valid()
    if level < 2:
        raise CheckError("branch-over-derived needs level >= 2")
    cls = classify(datum)
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    small = quotient(datum, level - 1, degree_guard=degree_guard, store=store)
    return _embedding_check(
        "branch-over-derived",
        datum,
        level,
        small.derived(),
        q.kernel_derived(1),
        VERIFIED if cls.branch_over_derived else REFUTED,
        notes=(),
    )


def check_branch_over_gamma3(
    datum: NumericalDatum,
    level: int = 3,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Third lower-central term below one vertex against its stabilizer form.

    Embeds the pivots of the third lower-central term of the level-(n-1)
    quotient at the first vertex and sifts them into the third lower-central
    term of the level-1 kernel of the level-n quotient.
    """
    datum.require_valid()
    if level < 2:
        raise CheckError("branch-over-gamma3 needs level >= 2")
    _require_not_constant_class(datum, "branch-over-gamma3")
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    small = quotient(datum, level - 1, degree_guard=degree_guard, store=store)
    notes: tuple[str, ...] = ()
    if single_constant_family(datum):
        expected = VERIFIED if level <= 3 else REFUTED
        notes = (
            "a single constant singleton family embeds at levels up to 3 and "
            "fails from level 4 on; a failure is exact at the tested level",
        )
    else:
        expected = VERIFIED
    return _embedding_check(
        "branch-over-gamma3",
        datum,
        level,
        small.gamma3(),
        q.kernel_gamma3(1),
        expected,
        notes,
    )


def check_second_derived(
    datum: NumericalDatum,
    level: int = 3,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Third lower-central term below one vertex against the second derived subgroup."""
    datum.require_valid()
    if level < 2:
        raise CheckError("second-derived needs level >= 2")
    cls = classify(datum)
    if not cls.branch_over_derived:
        raise CheckError(
            "second-derived applies only to data with a non-symmetric vector "
            "or joint span of dimension at least two"
        )
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    small = quotient(datum, level - 1, degree_guard=degree_guard, store=store)
    return _embedding_check(
        "second-derived",
        datum,
        level,
        small.gamma3(),
        q.second_derived(),
        VERIFIED,
        notes=(),
    )


def check_st1_derived_in_gamma3(
    datum: NumericalDatum,
    level: int = 3,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Derived subgroup of the level-1 kernel inside the third lower-central term."""
    datum.require_valid()
    if level < 2:
        raise CheckError("st1-derived-in-gamma3 needs level >= 2")
    _require_not_constant_class(datum, "st1-derived-in-gamma3")
    cls = classify(datum)
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    sub = q.kernel_derived(1)
    target = q.gamma3()
    contained, bad = target.contains_chain(sub)
    certs = {
        "sub-order-exponent": sub.order_exponent(),
        "target-order-exponent": target.order_exponent(),
        "contained": contained,
    }
    if bad is not None:
        _witness_cert(certs, "witness", bad)
    notes: tuple[str, ...] = ()
    if cls.in_E_class:
        notes = (
            "for this datum the containment fails in the infinite group but "
            "the defect is not visible at levels up to 4; a non-containment "
            "here would be a rigorous refutation at the tested level",
        )
    return CheckReport(
        check="st1-derived-in-gamma3",
        datum_text=datum.canonical_line(),
        level=level,
        verdict=VERIFIED if contained else REFUTED,
        expected=VERIFIED,
        certificates=certs,
        notes=notes,
    )


def check_subdirect(
    datum: NumericalDatum,
    level: int = 3,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """First-level sections of a distinguished subgroup against the full quotient.

    For data with a non-symmetric vector or joint span of dimension at least
    two, the derived subgroup's section at every first-level vertex should be
    the whole smaller quotient; otherwise the third lower-central term is
    tested the same way.
    """
    datum.require_valid()
    if level < 2:
        raise CheckError("subdirect needs level >= 2")
    _require_not_constant_class(datum, "subdirect")
    cls = classify(datum)
    route = "derived" if cls.branch_over_derived else "gamma3"
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    chain = q.derived() if route == "derived" else q.gamma3()
    full = quotient(datum, level - 1, degree_guard=degree_guard, store=store)
    full_exp = full.order_exponent()
    section_exps = [
        section_chain(chain, (x,)).order_exponent() for x in range(1, datum.p + 1)
    ]
    bad = [x for x, e in enumerate(section_exps, start=1) if e != full_exp]
    notes: tuple[str, ...] = ()
    if single_constant_family(datum):
        expected = REFUTED
        notes = (
            "for a single constant singleton family the tested sections stay "
            "a fixed index below the full quotient at every level",
        )
    else:
        expected = VERIFIED
    certs = {
        "route": route,
        "full-order-exponent": full_exp,
        "section-order-exponents": section_exps,
        "deficient-coordinates": bad,
    }
    return CheckReport(
        check="subdirect",
        datum_text=datum.canonical_line(),
        level=level,
        verdict=VERIFIED if not bad else REFUTED,
        expected=expected,
        certificates=certs,
        notes=notes,
    )


# -- congruence subgroup property -------------------------------------------------


def default_csp_level(datum: NumericalDatum) -> int:
    """Default level for the positive congruence-kernel check."""
    cls = classify(datum)
    if cls.branch_over_derived:
        return datum.total_generators + 2
    return 6


def check_csp_positive(
    datum: NumericalDatum,
    level: int | None = None,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """A level kernel inside the predicted normal subgroup, for positive data.

    For data with full joint span and a branch structure over the derived
    subgroup, the level-(r+1) kernel should lie in the derived subgroup.  For
    the remaining positive data the level-5 kernel should lie in the third
    lower-central term, which needs level at least 6.
    """
    datum.require_valid()
    cls = classify(datum)
    if cls.csp != HAS_CSP:
        raise CheckError(
            "csp-positive applies only to data whose classification predicts "
            "that every finite-index subgroup is a congruence subgroup"
        )
    r = datum.total_generators
    if cls.branch_over_derived:
        route, k, min_level = "derived", r + 1, r + 2
    else:
        route, k, min_level = "gamma3", 5, 6
    if level is None:
        level = min_level
    if level < min_level:
        raise CheckError(f"csp-positive needs level >= {min_level} for this datum")
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    kern = q.kernel(k)
    target = q.derived() if route == "derived" else q.gamma3()
    contained, bad = target.contains_chain(kern)
    certs = {
        "route": route,
        "kernel-level": k,
        "kernel-order-exponent": kern.order_exponent(),
        "target-order-exponent": target.order_exponent(),
        "contained": contained,
    }
    if bad is not None:
        _witness_cert(certs, "witness", bad)
    return CheckReport(
        check="csp-positive",
        datum_text=datum.canonical_line(),
        level=level,
        verdict=VERIFIED if contained else REFUTED,
        expected=VERIFIED,
        certificates=certs,
    )


def dependent_witness(
    datum: NumericalDatum, level: int
) -> tuple[GroupWord, GroupWord, BranchElement]:
    """Words for the dependent-family defect and its level-n stabilizer twin.

    Returns (c, t1, tn): c is the target syllable, t1 the cross-family product
    congruent to it to depth 2, and tn the recursively built element that
    agrees with c to depth n while staying in the coset of t1 modulo the
    derived subgroup.
    """
    dep = dependency(datum)
    if dep is None:
        raise CheckError("the joint defining vectors are linearly independent")
    p = datum.p
    c_word = GroupWord.from_syllables(p, [("b", dep.family, dep.coefficients)])
    parts: list[tuple] = []
    for factor in dep.factors:
        m = factor.conjugator % p
        parts.append(("a", -m))
        parts.append(("b", factor.family, factor.coefficients))
        parts.append(("a", m))
    t1_word = GroupWord.from_syllables(p, parts)
    sections = first_level_sections(c_word, datum)
    slot = next(
        x for x in range(p) if any(syl[0] == "b" for syl in sections[x].syllables)
    )
    element = BranchElement.leaf(t1_word)
    for _ in range(level - 1):
        children: list[BranchElement] = []
        for x in range(p):
            if x == slot:
                children.append(element)
            else:
                children.append(BranchElement.leaf(sections[x]))
        element = BranchElement.node(p, 0, children)
    return c_word, t1_word, element


def check_csp_witness_dependent(
    datum: NumericalDatum,
    level: int = 3,
    aux_level: int = 5,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Constructive congruence defect for linearly dependent defining vectors.

    Builds an element tn that agrees with the target syllable c to depth n
    while lying in the coset of the cross-family product t1 modulo the derived
    subgroup.  Since c and t1 have different abelianization classes, c cannot
    be congruent to tn modulo the derived subgroup in the infinite group, yet
    the defect lies in every level kernel shadow tested here.
    """
    datum.require_valid()
    cls = classify(datum)
    if not cls.branch_over_derived:
        raise CheckError(
            "csp-witness-dependent needs a branch structure over the derived subgroup"
        )
    if aux_level <= level:
        raise CheckError("csp-witness-dependent needs aux level > level")
    c_word, t1_word, tn = dependent_witness(datum, level)
    c_small = evaluate(c_word, datum, level)
    tn_small = evaluate_branch(tn, datum, level)
    agrees = (~c_small * tn_small).is_identity()

    ab_c = abelianization(c_word, datum)
    ab_t1 = abelianization(t1_word, datum)

    q = quotient(datum, aux_level, degree_guard=degree_guard, store=store)
    c_img = evaluate(c_word, datum, aux_level)
    t1_img = evaluate(t1_word, datum, aux_level)
    tn_img = evaluate_branch(tn, datum, aux_level)
    defect = ~c_img * tn_img
    derived = q.derived()
    in_kernel = q.kernel(level).contains(defect)
    in_derived = derived.contains(defect)
    coset_ok = derived.contains(~t1_img * tn_img)

    certs = {
        "target-word": word_to_text(c_word, datum),
        "factor-word": word_to_text(t1_word, datum),
        "agrees-to-level": agrees,
        "abelianization-target": list(ab_c),
        "abelianization-factor": list(ab_t1),
        "classes-differ": ab_c != ab_t1,
        "factor-coset-in-derived": coset_ok,
        "defect-in-level-kernel": in_kernel,
        "defect-in-derived": in_derived,
    }
    ok = agrees and ab_c != ab_t1 and coset_ok and in_kernel
    notes = (
        "the defect lands inside the derived image at every finite level "
        "because the dependent generator classes already merge there; the "
        "non-congruence in the infinite group is witnessed by the different "
        "abelianization classes together with the coset certificate",
    )
    return CheckReport(
        check="csp-witness-dependent",
        datum_text=datum.canonical_line(),
        level=level,
        aux_level=aux_level,
        verdict=VERIFIED if ok else REFUTED,
        expected=VERIFIED,
        certificates=certs,
        notes=notes,
    )


def exceptional_witness(
    datum: NumericalDatum, level: int
) -> tuple[GroupWord, BranchElement]:
    """Commutator witness and its level-n stabilizer twin for exceptional pairs."""
    pair = exceptional_pair(datum)
    if pair is None:
        raise CheckError("the datum has no exceptional pair of families")
    j, k = pair
    p = datum.p
    bj = GroupWord.generator(datum, j, 1)
    bk = GroupWord.generator(datum, k, 1)
    w = commutator_word(bj, bk)
    t2 = commutator_word(bj.conj(GroupWord.rooted(p, (j - k) % p)), bk)
    element = BranchElement.leaf(t2)
    slot = (p - k) % p
    for _ in range(level - 2):
        children = [BranchElement.leaf(GroupWord.identity(p)) for _ in range(p)]
        children[slot] = element
        element = BranchElement.node(p, 0, children)
    return w, element


def check_csp_witness_exceptional(
    datum: NumericalDatum,
    level: int = 2,
    aux_level: int = 4,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Constructive congruence defect for the exceptional two-family data.

    The commutator w of the two involved generators admits, for every n, an
    element tn of the level-n stabilizer congruent to it modulo the third
    lower-central term.  If w escaped that term in some finite quotient the
    statement would be refuted there; the search over levels 2..m records the
    first escape level, or None when the term's congruence closure already
    holds w at every tested level.
    """
    datum.require_valid()
    if datum.p == 3:
        raise CheckError("the exceptional class is empty for p = 3")
    cls = classify(datum)
    if not cls.in_E_class:
        raise CheckError(
            "csp-witness-exceptional applies only to the exceptional "
            "two-family symmetric data"
        )
    if level < 2:
        raise CheckError("csp-witness-exceptional needs level >= 2")
    if aux_level <= level:
        raise CheckError("csp-witness-exceptional needs aux level > level")
    w, tn = exceptional_witness(datum, level)

    in_stab = evaluate_branch(tn, datum, level).is_identity()

    q = quotient(datum, aux_level, degree_guard=degree_guard, store=store)
    w_img = evaluate(w, datum, aux_level)
    tn_img = evaluate_branch(tn, datum, aux_level)
    coset_ok = q.gamma3().contains(tn_img * ~w_img)

    escape_level = None
    for m in range(2, aux_level + 1):
        qm = quotient(datum, m, degree_guard=degree_guard, store=store)
        if not qm.gamma3().contains(evaluate(w, datum, m)):
            escape_level = m
            break
    in_final = q.gamma3().contains(w_img)
    consistent = (escape_level is None) == in_final

    certs = {
        "witness-word": word_to_text(w, datum),
        "t-in-level-stabilizer": in_stab,
        "t-w-coset-in-gamma3": coset_ok,
        "escape-level": escape_level,
        "witness-in-gamma3-at-aux": in_final,
        "consistent": consistent,
    }
    notes = (
        "an escape level of None means the defect of the infinite statement "
        "is not visible at the tested levels: the congruence closure of the "
        "third lower-central term contains the witness in every tested "
        "quotient",
    )
    return CheckReport(
        check="csp-witness-exceptional",
        datum_text=datum.canonical_line(),
        level=level,
        aux_level=aux_level,
        verdict=VERIFIED if (in_stab and coset_ok and consistent) else REFUTED,
        expected=VERIFIED,
        certificates=certs,
        notes=notes,
    )


# -- fractality and closures -------------------------------------------------------


def check_fractality(
    datum: NumericalDatum,
    level: int = 3,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Sections of level stabilizers at every vertex against the full quotient.

    For each k below the level, the section of the level-k kernel at each
    depth-k vertex is compared with the full quotient at the remaining depth.
    Data whose families are all constant singletons are predicted to show an
    index-p defect at k = 2 once the level reaches 4; all other data are
    predicted to stay full at every tested vertex.
    """
    datum.require_valid()
    if level < 2:
        raise CheckError("fractality needs level >= 2")
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    per_level = []
    first_defect = None
    for k in range(1, level):
        kern = q.kernel(k)
        full_exp = quotient(
            datum, level - k, degree_guard=degree_guard, store=store
        ).order_exponent()
        defects = 0
        for vertex in itertools.product(range(1, datum.p + 1), repeat=k):
            exp = section_chain(kern, vertex).order_exponent()
            if exp != full_exp:
                defects += 1
                if first_defect is None:
                    first_defect = {
                        "k": k,
                        "vertex": list(vertex),
                        "section-exponent": exp,
                        "full-exponent": full_exp,
                    }
        per_level.append(
            {"k": k, "full-exponent": full_exp, "defect-count": defects}
        )
    notes: tuple[str, ...] = ()
    if _constant_type(datum):
        expected = VERIFIED if level <= 3 else REFUTED
        notes = (
            "for data whose families are all constant singletons the level-2 "
            "kernel sections drop to index p once the level reaches 4",
        )
    else:
        expected = VERIFIED
    certs: dict = {"levels": per_level}
    if first_defect is not None:
        certs["first-defect"] = first_defect
    return CheckReport(
        check="fractality",
        datum_text=datum.canonical_line(),
        level=level,
        verdict=VERIFIED if first_defect is None else REFUTED,
        expected=expected,
        certificates=certs,
        notes=notes,
    )


def check_full_section_vertex(
    datum: NumericalDatum,
    word: GroupWord | str,
    depth_bound: int = 2,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Search for a vertex where a normal closure has a full section.

    Takes a nontrivial word, forms its normal closure in the quotient two
    levels below the search bound, and scans vertices in breadth-first order
    for one whose section of the closure is the whole smaller quotient.
    """
    datum.require_valid()
    if isinstance(word, str):
        word = parse_word(word, datum)
    if is_trivial(word, datum):
        raise CheckError("the witness word evaluates to the identity")
    if depth_bound < 1:
        raise CheckError("full-section-vertex needs depth bound >= 1")
    level = depth_bound + 2
    cls = classify(datum)
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    closure = q.normal_closure([evaluate(word, datum, level)])
    found = None
    found_exp = None
    target_exp = None
    for d in range(1, depth_bound + 1):
        full_exp = quotient(
            datum, level - d, degree_guard=degree_guard, store=store
        ).order_exponent()
        for vertex in itertools.product(range(1, datum.p + 1), repeat=d):
            exp = section_chain(closure, vertex).order_exponent()
            if exp == full_exp:
                found, found_exp, target_exp = list(vertex), exp, full_exp
                break
        if found is not None:
            break
    certs = {
        "closure-order-exponent": closure.order_exponent(),
        "vertex": found,
        "section-order-exponent": found_exp,
        "target-order-exponent": target_exp,
    }
    notes: tuple[str, ...] = ()
    if found is None:
        notes = (
            "no vertex within the depth bound has a full section; a larger "
            "bound or level may still find one",
        )
    return CheckReport(
        check="full-section-vertex",
        datum_text=datum.canonical_line(),
        level=level,
        verdict=VERIFIED if found is not None else GUARD,
        expected=None if cls.in_G_class else VERIFIED,
        certificates=certs,
        notes=notes,
    )


def check_normal_closure_blocks(
    datum: NumericalDatum,
    word: GroupWord | str,
    level: int = 4,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Blocks of lower-central terms inside the normal closure of one element.

    For a nontrivial word, finds the first n such that the product of copies
    of the smaller quotient's third lower-central term over all depth-n
    vertices lies inside the closure; outside the exceptional class the same
    search is run with derived-subgroup blocks.
    """
    datum.require_valid()
    cls = classify(datum)
    if not cls.branch_over_derived:
        raise CheckError(
            "normal-closure-blocks needs a branch structure over the derived subgroup"
        )
    if isinstance(word, str):
        word = parse_word(word, datum)
    if is_trivial(word, datum):
        raise CheckError("the witness word evaluates to the identity")
    if level < 2:
        raise CheckError("normal-closure-blocks needs level >= 2")
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    closure = q.normal_closure([evaluate(word, datum, level)])

    def first_level(descriptor: str) -> int | None:
        for n in range(1, level):
            small = quotient(datum, level - n, degree_guard=degree_guard, store=store)
            sub = small.gamma3() if descriptor == "gamma3" else small.derived()
            blocks = block_product_chain(datum.p, level, n, sub)
            if closure.contains_chain(blocks)[0]:
                return n
        return None

    gamma3_level = first_level("gamma3")
    derived_level = None if cls.in_E_class else first_level("derived")
    certs = {
        "closure-order-exponent": closure.order_exponent(),
        "first-gamma3-block-level": gamma3_level,
        "first-derived-block-level": derived_level,
        "derived-route-applicable": not cls.in_E_class,
    }
    ok = gamma3_level is not None and (cls.in_E_class or derived_level is not None)
    notes: tuple[str, ...] = ()
    if not ok:
        notes = ("no block level found below the tested level; raise the level",)
    return CheckReport(
        check="normal-closure-blocks",
        datum_text=datum.canonical_line(),
        level=level,
        verdict=VERIFIED if ok else GUARD,
        expected=VERIFIED,
        certificates=certs,
        notes=notes,
    )


def check_weak_csp(
    datum: NumericalDatum,
    level: int = 1,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Derived blocks at depth n against the derived part of the level-n kernel.

    In the quotient two levels deeper, the product of derived-subgroup copies
    over all depth-n vertices should lie inside the image of the derived
    subgroup of the level-n stabilizer; the reverse containment holds for
    trivial reasons and is asserted as a sanity certificate.
    """
    datum.require_valid()
    if level < 1:
        raise CheckError("weak-csp needs level >= 1")
    _require_not_constant_class(datum, "weak-csp")
    cls = classify(datum)
    big = level + 2
    q = quotient(datum, big, degree_guard=degree_guard, store=store)
    stab_derived = q.kernel_derived(level)
    small = quotient(datum, big - level, degree_guard=degree_guard, store=store)
    blocks = block_product_chain(datum.p, big, level, small.derived())
    contained, bad = stab_derived.contains_chain(blocks)
    trivial_dir, _ = blocks.contains_chain(stab_derived)
    certs = {
        "stabilizer-derived-exponent": stab_derived.order_exponent(),
        "derived-blocks-exponent": blocks.order_exponent(),
        "blocks-inside-stabilizer-derived": contained,
        "stabilizer-derived-inside-blocks": trivial_dir,
        "equal": contained and trivial_dir,
    }
    if bad is not None:
        _witness_cert(certs, "witness", bad)
    return CheckReport(
        check="weak-csp",
        datum_text=datum.canonical_line(),
        level=level,
        aux_level=big,
        verdict=VERIFIED if contained else REFUTED,
        expected=VERIFIED if cls.branch_over_derived else None,
        certificates=certs,
    )


# -- constant-vector data ----------------------------------------------------------


def _index_p_subgroup(
    datum: NumericalDatum, q: FiniteQuotient, families: tuple[int, ...]
) -> SubgroupChain:
    words = []
    for j in families:
        for i in range(1, len(datum.family(j)) + 1):
            words.append(
                GroupWord.generator(datum, j, i) * ~GroupWord.rooted(datum.p, 1)
            )
    return q.normal_closure([evaluate(w, datum, q.level) for w in words])


def check_constant_vector(
    datum: NumericalDatum,
    level: int = 3,
    seed: int = DEFAULT_SEED,
    samples: int = 20,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Structure of the index-p subgroup for all-constant multi-family data.

    Certifies that the subgroup generated by the classes of b a^{-1} has index
    p and contains the derived subgroup, that its derived subgroup repeats one
    level down, that seeded star products from each single-family version land
    in that version's derived subgroup, and that at level 2 the derived
    subgroup meets each single-family version exactly in its derived subgroup.
    """
    datum.require_valid()
    cls = classify(datum)
    if not cls.in_G_class:
        raise CheckError(
            "constant-vector applies only to data with two or more families, "
            "all constant singletons"
        )
    if level < 2:
        raise CheckError("constant-vector needs level >= 2")
    p = datum.p
    fams = datum.nonempty_families
    q = quotient(datum, level, degree_guard=degree_guard, store=store)
    k_chain = _index_p_subgroup(datum, q, fams)
    index_exp = q.order_exponent() - k_chain.order_exponent()
    contains_derived = k_chain.contains_chain(q.derived())[0]

    small = quotient(datum, level - 1, degree_guard=degree_guard, store=store)
    k_small = _index_p_subgroup(datum, small, fams)
    k_small_derived = derived_chain(p, level - 1, tuple(k_small.pivots()))
    k_derived = derived_chain(p, level, tuple(k_chain.pivots()))
    embedded = embed_pivots(p, level, (1,), k_small_derived)
    block_fails = sum(1 for g in embedded if not k_derived.contains(g))

    rng = random.Random(seed)
    a_img = Portrait.rooted(p, level, 1)
    star_fails = 0
    star_runs = 0
    for j in fams:
        kj = _index_p_subgroup(datum, q, (j,))
        kj_derived = derived_chain(p, level, tuple(kj.pivots()))
        pivots = kj.pivots()
        for _ in range(samples):
            g = Portrait.identity(p, level)
            for _ in range(rng.randint(2, 5)):
                g = g * rng.choice(pivots) ** rng.randint(1, p - 1)
            star = Portrait.identity(p, level)
            twist = Portrait.identity(p, level)
            for _ in range(p):
                star = star * g.conj(twist)
                twist = twist * a_img
            star_runs += 1
            if not kj_derived.contains(star):
                star_fails += 1

    q2 = quotient(datum, 2, degree_guard=degree_guard, store=store)
    k2 = _index_p_subgroup(datum, q2, fams)
    k2_derived = derived_chain(p, 2, tuple(k2.pivots()))
    k2_derived_elems = k2_derived.elements()
    intersection_ok = []
    for j in fams:
        k2j = _index_p_subgroup(datum, q2, (j,))
        k2j_derived = derived_chain(p, 2, tuple(k2j.pivots()))
        meet = {g for g in k2_derived_elems if k2j.contains(g)}
        intersection_ok.append(meet == set(k2j_derived.elements()))

    certs = {
        "index-exponent": index_exp,
        "contains-derived": contains_derived,
        "derived-block-failures": block_fails,
        "star-sample-count": star_runs,
        "star-failures": star_fails,
        "level2-intersections-equal": intersection_ok,
    }
    ok = (
        index_exp == 1
        and contains_derived
        and block_fails == 0
        and star_fails == 0
        and all(intersection_ok)
    )
    return CheckReport(
        check="constant-vector",
        datum_text=datum.canonical_line(),
        level=level,
        verdict=VERIFIED if ok else REFUTED,
        expected=VERIFIED,
        certificates=certs,
        seed=seed,
    )


# -- dispatch and the default suite -------------------------------------------------


CHECK_NAMES = (
    "abelianization-index",
    "branch-over-derived",
    "branch-over-gamma3",
    "st1-derived-in-gamma3",
    "subdirect",
    "second-derived",
    "csp-positive",
    "csp-witness-dependent",
    "csp-witness-exceptional",
    "fractality",
    "full-section-vertex",
    "normal-closure-blocks",
    "weak-csp",
    "constant-vector",
)


def run_check(
    name: str,
    datum: NumericalDatum,
    level: int | None = None,
    aux_level: int | None = None,
    word: str | None = None,
    seed: int = DEFAULT_SEED,
    samples: int = 20,
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
) -> CheckReport:
    """Run one named check with defaults filled in."""
    if name not in CHECK_NAMES:
        raise CheckError(f"unknown check {name!r}; known: {', '.join(CHECK_NAMES)}")
    kw = {"store": store, "degree_guard": degree_guard}
    if name == "csp-positive":
        return check_csp_positive(datum, level, **kw)
    if name == "csp-witness-dependent":
        level = 3 if level is None else level
        aux = aux_level if aux_level is not None else level + 2
        return check_csp_witness_dependent(datum, level, aux, **kw)
    if name == "csp-witness-exceptional":
        level = 2 if level is None else level
        aux = aux_level if aux_level is not None else level + 2
        return check_csp_witness_exceptional(datum, level, aux, **kw)
    if name == "full-section-vertex":
        if word is None:
            raise CheckError("full-section-vertex needs a witness word")
        return check_full_section_vertex(datum, word, 2 if level is None else level, **kw)
    if name == "normal-closure-blocks":
        if word is None:
            raise CheckError("normal-closure-blocks needs a witness word")
        return check_normal_closure_blocks(datum, word, 4 if level is None else level, **kw)
    if name == "weak-csp":
        return check_weak_csp(datum, 1 if level is None else level, **kw)
    if name == "constant-vector":
        return check_constant_vector(
            datum, 3 if level is None else level, seed=seed, samples=samples, **kw
        )
    simple = {
        "abelianization-index": check_abelianization_index,
        "branch-over-derived": check_branch_over_derived,
        "branch-over-gamma3": check_branch_over_gamma3,
        "st1-derived-in-gamma3": check_st1_derived_in_gamma3,
        "subdirect": check_subdirect,
        "second-derived": check_second_derived,
        "fractality": check_fractality,
    }
    return simple[name](datum, 3 if level is None else level, **kw)


SUITE_DATA = (
    ("single-12", "p = 3; E1 = (1, 2)"),
    ("single-11", "p = 3; E1 = (1, 1)"),
    ("single-22", "p = 3; E1 = (2, 2)"),
    ("single-01", "p = 3; E1 = (0, 1)"),
    ("pair-dependent", "p = 3; E1 = (1, 2); E2 = (1, 2)"),
    ("pair-independent", "p = 3; E1 = (1, 2); E2 = (2, 2)"),
    ("pair-reversed", "p = 3; E1 = (1, 2); E2 = (2, 1)"),
    ("rank-two", "p = 3; E1 = (1, 0), (0, 1)"),
    ("constant-pair", "p = 3; E1 = (1, 1); E2 = (1, 1)"),
    ("p5-exceptional", "p = 5; E1 = (1, 0, 0, 1); E2 = (0, 1, 1, 0)"),
    ("p5-symmetric", "p = 5; E1 = (1, 0, 0, 1)"),
    ("p5-generic", "p = 5; E1 = (1, 2, 0, 0)"),
)

_SUITE_WITNESS_ROWS = {
    "single-12": (
        ("full-section-vertex", {"word": "a", "level": 2}),
        ("normal-closure-blocks", {"word": "a", "level": 4}),
        ("weak-csp", {"level": 1}),
    ),
}


def suite_plan() -> list[tuple[str, str, str, dict]]:
    """Deterministic (datum name, datum text, check name, kwargs) rows."""
    rows = []
    for name, text in SUITE_DATA:
        datum = NumericalDatum.from_text(text)
        cls = classify(datum)
        rows.append((name, text, "abelianization-index", {"level": 3}))
        rows.append((name, text, "branch-over-derived", {"level": 3}))
        if not cls.in_G_class:
            rows.append((name, text, "branch-over-gamma3", {"level": 3}))
            rows.append((name, text, "st1-derived-in-gamma3", {"level": 3}))
            rows.append((name, text, "subdirect", {"level": 3}))
        if cls.branch_over_derived:
            rows.append((name, text, "second-derived", {"level": 3}))
        if cls.csp == HAS_CSP and cls.branch_over_derived:
            rows.append((name, text, "csp-positive", {"level": None}))
        if cls.branch_over_derived and dependency(datum) is not None:
            rows.append(
                (name, text, "csp-witness-dependent", {"level": 3, "aux_level": 5})
            )
        if cls.in_E_class:
            rows.append(
                (name, text, "csp-witness-exceptional", {"level": 2, "aux_level": 4})
            )
        rows.append(
            (name, text, "fractality", {"level": 4 if cls.in_G_class else 3})
        )
        for check, kwargs in _SUITE_WITNESS_ROWS.get(name, ()):
            rows.append((name, text, check, dict(kwargs)))
        if cls.in_G_class:
            rows.append((name, text, "constant-vector", {"level": 3}))
    return rows


def run_suite(
    store: ChainStore | None = None,
    degree_guard: int = DEFAULT_DEGREE_GUARD,
    seed: int = DEFAULT_SEED,
) -> list[tuple[str, CheckReport]]:
    """Run every suite row sequentially with one shared store."""
    if store is None:
        store = ChainStore()
    out = []
    for name, text, check, kwargs in suite_plan():
        datum = NumericalDatum.from_text(text)
        report = run_check(
            check, datum, seed=seed, store=store, degree_guard=degree_guard, **kwargs
        )
        out.append((name, report))
    return out
