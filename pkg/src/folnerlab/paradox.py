"""Paradoxical-decomposition certificates and exact window verification.

A certificate is pure data: translator words plus piece classifiers, where a
classifier is a small expression tree over encoding predicates (first letter,
signed-power test, coordinate sign, residue, membership table) that can be
re-evaluated without code.  Verification restricts the covering equations to
a finite window and counts, per equation, how many window points are covered
exactly once.  A point whose preimages leave the window is a boundary
defect, never a violation: finite windows cannot witness an infinite
covering, and the report keeps that distinction explicit.

`search_small_paradox` looks for piece assignments on a window minimizing
the interior violations of the combined covering equation at each piece
count.  Its reports are one-sided: a positive minimum refutes zero-defect
assignments at that scale, a zero minimum claims nothing about the group.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .groups import FiniteWindow, FreeGroupModel, GroupElement, GroupModel
from .perturb import PerturbedAction

_VIOLATION_SAMPLES = 10


class ClassifierError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Classifier expressions
# ---------------------------------------------------------------------------


def _letter_code(model: FreeGroupModel, letter: str) -> int:
    g = model.parse(letter)
    if len(g.data) != 1:
        raise ClassifierError(f"{letter!r} is not a single letter")
    return g.data[0]


def evaluate_classifier(clf: dict, g: GroupElement) -> bool:
    """Evaluate an expression-tree classifier on a canonical element."""
    op = clf["op"]
    model = g.model
    if op == "true":
        return True
    if op == "identity":
        return g == model.identity()
    if op == "and":
        return all(evaluate_classifier(c, g) for c in clf["args"])
    if op == "or":
        return any(evaluate_classifier(c, g) for c in clf["args"])
    if op == "not":
        return not evaluate_classifier(clf["arg"], g)
    if op == "in":
        return model.format(g) in clf["elements"]
    if op == "first_letter":
        if not isinstance(model, FreeGroupModel):
            raise ClassifierError("first_letter needs a free-group model")
        code = _letter_code(model, clf["letter"])
        return bool(g.data) and g.data[0] == code
    if op == "power":
        # non-negative powers of the signed letter, identity included
        if not isinstance(model, FreeGroupModel):
            raise ClassifierError("power needs a free-group model")
        code = _letter_code(model, clf["letter"])
        return all(letter == code for letter in g.data)
    if op == "coord_sign":
        data = g.data if isinstance(g.data, tuple) else (g.data,)
        value = data[clf["index"]]
        sign = clf["sign"]
        if sign == "+":
            return value > 0
        if sign == "-":
            return value < 0
        if sign == "0":
            return value == 0
        raise ClassifierError(f"bad sign {sign!r}")
    if op == "residue":
        data = g.data if isinstance(g.data, tuple) else (g.data,)
        value = data[clf["index"]]
        if isinstance(value, Fraction) and value.denominator != 1:
            raise ClassifierError("residue classifier needs integer coordinates")
        return int(value) % clf["mod"] == clf["value"]
    raise ClassifierError(f"unknown classifier op {op!r}")


Word = tuple[GroupElement, ...]


def _parse_word(obj, model: GroupModel) -> Word:
    if isinstance(obj, str):
        obj = [obj]
    return tuple(model.parse(s) for s in obj)


def _format_word(word: Word, model: GroupModel) -> list[str]:
    return [model.format(g) for g in word]


@dataclass
class ParadoxCertificate:
    """Piece classifiers with translator words, in one of two shapes.

    `two_equation`: the A-pieces and B-pieces jointly partition the space,
    and each family's translates partition it again (the classical
    free-group shape).  `tarski`: each family partitions the space on its
    own and the combined translates partition it once more.
    """

    model: GroupModel
    form: str
    a_words: list[Word]
    a_pieces: list[dict]
    b_words: list[Word]
    b_pieces: list[dict]

    def __post_init__(self):
        if self.form not in ("two_equation", "tarski"):
            raise ValueError(f"unknown certificate form {self.form!r}")
        if len(self.a_words) != len(self.a_pieces) or len(self.b_words) != len(self.b_pieces):
            raise ValueError("translator and piece counts differ")

    def piece_count(self) -> int:
        return len(self.a_pieces) + len(self.b_pieces)

    def equations(self) -> list[tuple[str, list[tuple[Word, dict]]]]:
        e: Word = ()
        a_terms = list(zip(self.a_words, self.a_pieces))
        b_terms = list(zip(self.b_words, self.b_pieces))
        id_a = [((), clf) for _, clf in a_terms]
        id_b = [((), clf) for _, clf in b_terms]
        if self.form == "two_equation":
            return [
                ("pieces-partition", id_a + id_b),
                ("a-cover", a_terms),
                ("b-cover", b_terms),
            ]
        return [
            ("a-partition", id_a),
            ("b-partition", id_b),
            ("combined-cover", a_terms + b_terms),
        ]

    def to_json(self) -> dict:
        return {
            "form": self.form,
            "g": [_format_word(w, self.model) for w in self.a_words],
            "h": [_format_word(w, self.model) for w in self.b_words],
            "A": self.a_pieces,
            "B": self.b_pieces,
        }

    @classmethod
    def from_json(cls, obj: dict, model: GroupModel) -> "ParadoxCertificate":
        return cls(
            model=model,
            form=obj.get("form", "tarski"),
            a_words=[_parse_word(w, model) for w in obj["g"]],
            a_pieces=list(obj["A"]),
            b_words=[_parse_word(w, model) for w in obj["h"]],
            b_pieces=list(obj["B"]),
        )


def f2_standard_certificate(model: FreeGroupModel) -> ParadoxCertificate:
    """First-letter decomposition of the rank-2 free group.

    Pieces: words starting with the first generator together with all its
    inverse powers; the remaining words starting with that inverse; and the
    two half-spaces of the second generator.  Each family's translates tile
    the whole group.
    """
    if not isinstance(model, FreeGroupModel) or model.rank != 2:
        raise ValueError("the standard certificate lives on the rank-2 free group")
    a1 = {"op": "or", "args": [{"op": "first_letter", "letter": "a"}, {"op": "power", "letter": "A"}]}
    a2 = {"op": "and", "args": [{"op": "first_letter", "letter": "A"}, {"op": "not", "arg": {"op": "power", "letter": "A"}}]}
    b1 = {"op": "first_letter", "letter": "b"}
    b2 = {"op": "first_letter", "letter": "B"}
    return ParadoxCertificate(
        model=model,
        form="two_equation",
        a_words=[(), (model.parse("a"),)],
        a_pieces=[a1, a2],
        b_words=[(), (model.parse("b"),)],
        b_pieces=[b1, b2],
    )


# ---------------------------------------------------------------------------
# Window verification
# ---------------------------------------------------------------------------


@dataclass
class EquationReport:
    name: str
    window_size: int
    checkable: int
    exactly_once: int
    interior_violations: int
    boundary_defects: int
    samples: list[tuple[str, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "equation": self.name,
            "window_size": self.window_size,
            "checkable": self.checkable,
            "exactly_once": self.exactly_once,
            "interior_violations": self.interior_violations,
            "boundary_defects": self.boundary_defects,
            "samples": [{"element": s, "count": c} for s, c in self.samples],
        }


@dataclass
class WindowReport:
    equations: list[EquationReport]

    @property
    def interior_violations(self) -> int:
        return sum(e.interior_violations for e in self.equations)

    @property
    def boundary_defects(self) -> int:
        return sum(e.boundary_defects for e in self.equations)

    def to_json(self) -> dict:
        return {"equations": [e.to_json() for e in self.equations]}


class _DirectEvaluator:
    def __init__(self, model: GroupModel):
        self.model = model

    def preimage(self, word: Word, x: GroupElement) -> Optional[GroupElement]:
        y = x
        for g in reversed(word):
            y = self.model.mul(self.model.inv(g), y)
        return y


class _ActionEvaluator:
    """Pushforward of words through a perturbed-action table."""

    def __init__(self, action: PerturbedAction):
        self.action = action

    def preimage(self, word: Word, x: GroupElement) -> Optional[GroupElement]:
        y: Optional[GroupElement] = x
        for g in reversed(word):
            if y is None:
                return None
            y = self.action.apply_inverse(g, y)
        return y


def verify_on_window(
    cert: ParadoxCertificate,
    window: FiniteWindow,
    action: Optional[PerturbedAction] = None,
) -> WindowReport:
    """Count exact coverage of each certificate equation on a window.

    A window point is checkable for an equation when every translator
    preimage of it stays inside the window (for table actions: is defined
    and stays inside); checkable points covered other than exactly once are
    interior violations.
    """
    evaluator = _ActionEvaluator(action) if action is not None else _DirectEvaluator(cert.model)
    reports = []
    for name, terms in cert.equations():
        checkable = 0
        once = 0
        violations = 0
        boundary = 0
        samples: list[tuple[str, int]] = []
        for x in window:
            pres = []
            ok = True
            for word, _ in terms:
                y = evaluator.preimage(word, x)
                if y is None or y not in window:
                    ok = False
                    break
                pres.append(y)
            if not ok:
                boundary += 1
                continue
            checkable += 1
            count = sum(
                1 for (y, (_, clf)) in zip(pres, terms) if evaluate_classifier(clf, y)
            )
            if count == 1:
                once += 1
            else:
                violations += 1
                if len(samples) < _VIOLATION_SAMPLES:
                    samples.append((cert.model.format(x), count))
        reports.append(
            EquationReport(
                name=name,
                window_size=len(window),
                checkable=checkable,
                exactly_once=once,
                interior_violations=violations,
                boundary_defects=boundary,
                samples=samples,
            )
        )
    return WindowReport(equations=reports)


# ---------------------------------------------------------------------------
# Defect-minimizing search
# ---------------------------------------------------------------------------


@dataclass
class PieceCountReport:
    pieces: int
    best_defect: Optional[int]
    checkable: int
    certificate: Optional[ParadoxCertificate]
    exhausted: bool

    def to_json(self) -> dict:
        return {
            "pieces": self.pieces,
            "best_defect": self.best_defect,
            "checkable": self.checkable,
            "exhausted": self.exhausted,
            "certificate": self.certificate.to_json() if self.certificate else None,
        }


@dataclass
class ParadoxSearchReport:
    reports: list[PieceCountReport]
    nodes_used: int
    budget: int

    @property
    def exhausted(self) -> bool:
        return all(r.exhausted for r in self.reports)

    def best(self) -> Optional[PieceCountReport]:
        usable = [r for r in self.reports if r.best_defect is not None]
        if not usable:
            return None
        return min(usable, key=lambda r: (r.best_defect, r.pieces))

    def to_json(self) -> dict:
        return {
            "budget": self.budget,
            "nodes_used": self.nodes_used,
            "per_piece_count": [r.to_json() for r in self.reports],
        }


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self) -> bool:
        self.used += 1
        return self.used <= self.limit


def _sorted_multisets(items: Sequence[GroupElement], k: int, model) -> list[tuple[GroupElement, ...]]:
    items = sorted(items, key=model.sort_key)

    def rec(start: int, k: int):
        if k == 0:
            yield ()
            return
        for i in range(start, len(items)):
            for rest in rec(i, k - 1):
                yield (items[i],) + rest

    return list(rec(0, k))


class _BudgetExhausted(Exception):
    pass


class _AssignmentProblem:
    """Best piece labeling of a window for fixed translator families.

    Every element takes one label: the first m labels are pieces translated
    by the A-words, the rest pieces translated by the B-words.  Each cover
    equation scores its checkable targets once their last influencing
    preimage is labeled.  Three passes: an exact-cover style descent that
    only accepts zero-cost steps (settling the zero-defect case), a greedy
    incumbent, and a memoized dynamic program whose state is the labels
    still able to influence unscored targets, exact when the budget lasts.
    """

    def __init__(self, window: FiniteWindow, a_words, b_words, budget: _Budget):
        model = window.model
        self.n = len(window)
        self.m = len(a_words)
        self.p = len(a_words) + len(b_words)
        self.budget = budget
        self.choices = list(range(self.p))

        # targets: (side, window index); influencers: (source idx, label)
        self.targets: list[list[tuple[int, int]]] = []
        self.checkable = 0
        target_infl: list[list[tuple[int, int]]] = []
        for side, words, offset in ((0, a_words, 0), (1, b_words, self.m)):
            for t, y in enumerate(window):
                infl = []
                ok = True
                for piece, g in enumerate(words):
                    pre = model.mul(model.inv(g), y)
                    if pre not in window:
                        ok = False
                        break
                    infl.append((window.index(pre), offset + piece))
                if ok:
                    target_infl.append(infl)
                    self.checkable += 1

        self.finalize_at: list[list[list[tuple[int, int]]]] = [[] for _ in range(self.n)]
        self.live_until = [-1] * self.n
        for infl in target_infl:
            last = max(src for src, _ in infl)
            self.finalize_at[last].append(infl)
            for src, _ in infl:
                self.live_until[src] = max(self.live_until[src], last)

        self.labels = [0] * self.n
        live = 0
        peak = 0
        for k in range(self.n):
            live = sum(1 for src in range(k + 1) if self.live_until[src] > k)
            peak = max(peak, live)
        self.live_peak = peak

    def dp_tractable(self, state_cap: int = 300_000) -> bool:
        """Whether the memoized program's state space fits the cap."""
        states = 1
        for _ in range(self.live_peak):
            states *= self.p
            if states > state_cap:
                return False
        return True

    def _step_cost(self, k: int) -> int:
        cost = 0
        labels = self.labels
        for infl in self.finalize_at[k]:
            count = 0
            for src, piece in infl:
                count += labels[src] == piece
            cost += count - 1 if count >= 1 else 1
        return cost

    def _state(self, k: int):
        return tuple(
            self.labels[src] if self.live_until[src] >= k else -1
            for src in range(k)
            if self.live_until[src] >= k
        ), tuple(src for src in range(k) if self.live_until[src] >= k)

    def zero_search(self, cap: int) -> Optional[bool]:
        """Backtracking that accepts only zero-cost steps.

        True when a tiling (zero-defect labeling) is found; False when the
        full exploration proves none exists; None when the step cap ends
        the attempt first.
        """
        steps = 0
        k = 0
        iters: list[int] = [0]
        while 0 <= k < self.n:
            if not self.budget.spend():
                raise _BudgetExhausted
            steps += 1
            if steps > cap:
                return None
            label = iters[k]
            if label >= self.p:
                iters.pop()
                k -= 1
                if k >= 0:
                    iters[k] += 1
                continue
            self.labels[k] = label
            if self._step_cost(k) == 0:
                k += 1
                if k < self.n:
                    iters.append(0)
            else:
                iters[k] += 1
        return k == self.n

    def greedy(self) -> tuple[int, list[int]]:
        total = 0
        for k in range(self.n):
            best_cost, best_label = None, 0
            for label in self.choices:
                self.labels[k] = label
                cost = self._step_cost(k)
                if best_cost is None or cost < best_cost:
                    best_cost, best_label = cost, label
                if cost == 0:
                    break
            self.labels[k] = best_label
            total += best_cost
        return total, self.labels.copy()

    def exact(self) -> int:
        memo: dict = {}

        def solve(k: int) -> int:
            if k == self.n:
                return 0
            key = (k, self._state(k))
            cached = memo.get(key)
            if cached is not None:
                return cached
            if not self.budget.spend():
                raise _BudgetExhausted
            value = None
            for label in self.choices:
                self.labels[k] = label
                total = self._step_cost(k) + solve(k + 1)
                if value is None or total < value:
                    value = total
            memo[key] = value
            return value

        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 4 * self.n + 100))
        try:
            minimum = solve(0)
            target = minimum
            for k in range(self.n):
                for label in self.choices:
                    self.labels[k] = label
                    rest = solve(k + 1)
                    if self._step_cost(k) + rest == target:
                        target = rest
                        break
                else:
                    raise AssertionError("reconstruction failed")
            return minimum
        finally:
            sys.setrecursionlimit(old)


def _solve_combo(problem: _AssignmentProblem, zero_cap: int) -> tuple[int, list[int], bool]:
    """(defect, labels, exact) for one translator combination."""
    zero = problem.zero_search(zero_cap)
    if zero:
        return 0, problem.labels.copy(), True
    incumbent, labels = problem.greedy()
    if incumbent == 0:
        return 0, labels, True
    if zero is False and incumbent == 1:
        return 1, labels, True  # tilings exhaustively ruled out, so 1 is optimal
    if problem.dp_tractable():
        try:
            minimum = problem.exact()
            return minimum, problem.labels.copy(), True
        except _BudgetExhausted:
            pass
    return incumbent, labels, False


def search_small_paradox(
    window: FiniteWindow,
    pool: FiniteWindow,
    max_pieces: int,
    budget: int = 2_000_000,
    min_pieces: int = 4,
) -> ParadoxSearchReport:
    """Best (lowest interior defect) piece assignment per piece count.

    Piece counts run from four, the least any group paradox can use.  All
    translator multisets from the pool are tried; assignments are searched
    exactly, so with the budget intact each reported defect is the true
    minimum at that piece count.
    """
    model = window.model
    identity = model.identity()
    tracker = _Budget(budget)
    zero_cap = max(500, 25 * len(window))
    reports: list[PieceCountReport] = []
    for pieces in range(min_pieces, max_pieces + 1):
        combos = []
        for m in range(1, pieces // 2 + 1):
            nb = pieces - m  # families are interchangeable, so m <= nb
            a_options = _sorted_multisets(list(pool), m, model)
            b_options = _sorted_multisets(list(pool), nb, model)
            for ai, a_words in enumerate(a_options):
                for bi, b_words in enumerate(b_options):
                    if m == nb and bi < ai:
                        continue
                    combos.append((a_words, b_words))
        # identity-bearing families first: tilings almost always keep a piece
        # in place, and hitting one early settles the piece count at zero
        combos.sort(
            key=lambda ab: (identity not in ab[0]) + (identity not in ab[1])
        )

        best_defect: Optional[int] = None
        best_cert: Optional[ParadoxCertificate] = None
        best_checkable = 0
        exhausted = True
        try:
            for a_words, b_words in combos:
                problem = _AssignmentProblem(window, a_words, b_words, tracker)
                defect, labels, exact = _solve_combo(problem, zero_cap)
                if not exact:
                    exhausted = False
                if best_defect is None or defect < best_defect:
                    best_defect = defect
                    best_checkable = problem.checkable
                    best_cert = _table_certificate(window, a_words, b_words, labels)
                if best_defect == 0:
                    break  # zero is the floor; this piece count is settled
        except _BudgetExhausted:
            exhausted = False
        if best_defect == 0:
            exhausted = True
        reports.append(
            PieceCountReport(
                pieces=pieces,
                best_defect=best_defect,
                checkable=best_checkable,
                certificate=best_cert,
                exhausted=exhausted,
            )
        )
    return ParadoxSearchReport(reports=reports, nodes_used=tracker.used, budget=budget)


def _table_certificate(window, a_words, b_words, labels) -> ParadoxCertificate:
    model = window.model
    m = len(a_words)
    tables: list[list[str]] = [[] for _ in range(m + len(b_words))]
    for k, x in enumerate(window):
        tables[labels[k]].append(model.format(x))
    return ParadoxCertificate(
        model=model,
        form="two_equation",
        a_words=[(g,) for g in a_words],
        a_pieces=[{"op": "in", "elements": t} for t in tables[:m]],
        b_words=[(h,) for h in b_words],
        b_pieces=[{"op": "in", "elements": t} for t in tables[m:]],
    )
