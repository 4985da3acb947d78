"""Node profiling: alphabetical-authorship test, author contribution and
advisor-advisee detection from co-authorship timelines."""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Mapping

from .corpus import Corpus, write_jsonl

ALPHA_EXCLUSION_BIAS = 0.13
MAX_EXACT_FACTORIAL = 20
MAJOR_WEIGHTS = {1: 1.0, 2: 0.5, 3: 1.0 / 3.0}


# ---------------------------------------------------------------------------
# alphabetical authorship
# ---------------------------------------------------------------------------


def null_alpha_rate(paper_sizes: Mapping[int, int]) -> float:
    """Expected fraction of alphabetically ordered papers when author order is
    independent of names: sum_k (N_k / N) / k!.

    Sizes above 20 authors contribute zero.
    """
    total = sum(paper_sizes.values())
    if total <= 0:
        raise ValueError("null_alpha_rate needs at least one paper")
    rate = 0.0
    for k, n_k in sorted(paper_sizes.items()):
        if k < 1 or n_k < 0:
            raise ValueError(f"invalid size entry {k}: {n_k}")
        if k <= MAX_EXACT_FACTORIAL:
            rate += (n_k / total) / math.factorial(k)
    return rate


def split_name(name: str) -> tuple[str, str]:
    """``(surname, given)`` case-folded; the surname is the last token, or the
    part before a comma for ``"Surname, Given"``."""
    name = name.strip()
    if "," in name:
        surname, given = name.split(",", 1)
    else:
        parts = name.split()
        surname, given = (parts[-1], " ".join(parts[:-1])) if parts else ("", "")
    return surname.strip().casefold(), given.strip().casefold()


def is_alphabetical(names: list[str]) -> bool:
    keys = [split_name(n) for n in names]
    return all(a <= b for a, b in zip(keys, keys[1:]))


@dataclass
class AlphaTestResult:
    n_papers: int
    size_counts: dict[int, int]
    n_alphabetical: int
    observed_rate: float
    null_rate: float
    bias: float
    excluded: bool


def alpha_bias_from_counts(
    size_counts: Mapping[int, int], n_alphabetical: int, threshold: float = ALPHA_EXCLUSION_BIAS
) -> AlphaTestResult:
    n = sum(size_counts.values())
    null = null_alpha_rate(size_counts)
    observed = n_alphabetical / n
    bias = observed - null
    return AlphaTestResult(n, dict(sorted(size_counts.items())), n_alphabetical, observed, null, bias, bias > threshold)


def alpha_bias_test(
    corpus: Corpus,
    papers: Iterable[str],
    names: Mapping[str, str] | None = None,
    threshold: float = ALPHA_EXCLUSION_BIAS,
) -> AlphaTestResult:
    """Compare the observed alphabetical-order rate of ``papers`` with the
    rate expected when author order ignores names.

    Single-author papers count as alphabetical. A field is flagged
    ``excluded`` when the bias exceeds ``threshold``.
    """
    names = corpus.author_names if names is None else names
    if not names:
        raise ValueError("alpha_bias_test requires an author-name table")
    papers = list(papers)
    if not papers:
        raise ValueError("alpha_bias_test needs a non-empty paper set")
    sizes: Counter[int] = Counter()
    n_alpha = 0
    for pid in papers:
        authors = corpus.paper(pid).authors
        try:
            author_names = [names[a] for a in authors]
        except KeyError as e:
            raise ValueError(f"no name for author {e.args[0]!r}") from None
        sizes[len(authors)] += 1
        n_alpha += is_alphabetical(author_names)
    return alpha_bias_from_counts(sizes, n_alpha, threshold)


def scholar_alpha_rate(corpus: Corpus, scholar: str, names: Mapping[str, str] | None = None) -> AlphaTestResult:
    """Per-scholar variant over the scholar's own papers."""
    return alpha_bias_test(corpus, corpus.papers_of(scholar), names)


# ---------------------------------------------------------------------------
# advisor-advisee detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AAConfig:
    s_len: int = 2
    s_adr: float = 1.5
    boundary: float = 0.5
    mod_year_limit: float = 6.0
    mod_paper_limit: float = 10.0
    mod_decay: float = 0.5

    def __post_init__(self):
        if self.s_len < 1:
            raise ValueError("s_len must be >= 1")
        if self.s_adr <= 0:
            raise ValueError("s_adr must be > 0")
        if not 0.0 < self.boundary < 1.0:
            raise ValueError("boundary must lie in (0, 1)")
        if self.mod_decay < 0:
            raise ValueError("mod_decay must be >= 0")


@dataclass
class AAScore:
    advisor: str
    advisee: str
    year: int
    p_adr: float
    p_ade: float
    p_aa: float
    window: tuple[int, int] | None

    def to_json(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window) if self.window else []
        return d


def advisor_advisee_rate(p_adr: float, p_ade: float) -> float:
    if p_adr < 0 or p_ade < 0:
        raise ValueError("advisor and advisee rates must be nonnegative")
    return min(1.0, p_adr) * min(1.0, p_ade)


def _major_weight(rank: int) -> float:
    return MAJOR_WEIGHTS.get(rank, 0.0)


class _AuthorTimeline:
    """Per-author sorted paper years, ranks and yearly weighted majors."""

    __slots__ = ("years", "first_year", "last_year", "major_by_year")

    def __init__(self, corpus: Corpus, author: str):
        ids = corpus.papers_of(author)
        self.years = [corpus.papers[p].year for p in ids]
        self.first_year = self.years[0]
        self.last_year = self.years[-1]
        major: dict[int, float] = {}
        for p in ids:
            paper = corpus.papers[p]
            w = _major_weight(paper.author_rank(author))
            if w:
                major[paper.year] = major.get(paper.year, 0.0) + w
        self.major_by_year = major

    def count_until(self, t: int) -> int:
        return bisect_right(self.years, t)


class AADetector:
    """Scores ordered author pairs ``(advisor, advisee)`` at a year.

    Pair statistics are cached; scores are deterministic so independent
    detectors can be merged freely.
    """

    def __init__(self, corpus: Corpus, cfg: AAConfig | None = None):
        self.corpus = corpus
        self.cfg = cfg or AAConfig()
        self._timelines: dict[str, _AuthorTimeline] = {}
        self._joint: dict[tuple[str, str], tuple[list[int], dict[int, float]]] = {}
        self._scores: dict[tuple[str, str, int], AAScore] = {}

    def _timeline(self, author: str) -> _AuthorTimeline:
        tl = self._timelines.get(author)
        if tl is None:
            tl = self._timelines[author] = _AuthorTimeline(self.corpus, author)
        return tl

    def _advising(self, advisor: str, advisee: str) -> tuple[list[int], dict[int, float]]:
        """Years of advising papers and the advisee's weighted majors on them per year.

        An advising paper has the advisee among the top-3 authors and the
        advisor ranked after the advisee.
        """
        key = (advisor, advisee)
        if key in self._joint:
            return self._joint[key]
        if not self.corpus.has_author(advisor):
            raise KeyError(f"unknown author {advisor!r}")
        if not self.corpus.has_author(advisee):
            raise KeyError(f"unknown author {advisee!r}")
        small, other = sorted((advisor, advisee), key=lambda a: len(self.corpus.author_papers[a]))
        years: list[int] = []
        weighted: dict[int, float] = {}
        for pid in self.corpus.author_papers[small]:
            paper = self.corpus.papers[pid]
            r_adr = paper.author_rank(advisor)
            r_ade = paper.author_rank(advisee)
            if r_adr and r_ade and r_ade <= 3 and r_adr > r_ade:
                years.append(paper.year)
                weighted[paper.year] = weighted.get(paper.year, 0.0) + _major_weight(r_ade)
        years.sort()
        self._joint[key] = (years, weighted)
        return years, weighted

    def advisor_competency(self, advisor: str, advisee: str, t: int) -> float:
        years, _ = self._advising(advisor, advisee)
        n_joint = bisect_right(years, t)
        if n_joint == 0:
            return 0.0
        n_adr = self._timeline(advisor).count_until(t)
        return (n_adr - n_joint) / n_joint

    def career_modifier(self, advisee: str, year: int) -> float:
        """1 early in the advisee's career, then exponential decay in the larger
        of the excess career years and excess weighted majors."""
        cfg = self.cfg
        tl = self._timeline(advisee)
        excess_years = max(0.0, (year - tl.first_year) - cfg.mod_year_limit)
        produced = sum(w for y, w in tl.major_by_year.items() if y < year)
        excess_papers = max(0.0, produced - cfg.mod_paper_limit)
        excess = max(excess_years, excess_papers)
        return math.exp(-cfg.mod_decay * excess) if excess > 0 else 1.0

    def advisee_prob(self, advisor: str, advisee: str, t: int) -> tuple[float, tuple[int, int] | None]:
        """Best supervised share of the advisee's weighted majors over windows
        ``[t0, t1]`` containing ``t`` inside the advisee's active span.

        Ties in the ratio are broken toward the widest window, then the earliest.
        """
        cfg = self.cfg
        _, joint = self._advising(advisor, advisee)
        if not joint:
            return 0.0, None
        tl = self._timeline(advisee)
        lo, hi = tl.first_year, tl.last_year
        if not lo <= t <= hi:
            return 0.0, None
        span = range(lo, hi + 1)
        num_pref = [0.0]
        den_pref = [0.0]
        for y in span:
            num_pref.append(num_pref[-1] + joint.get(y, 0.0) * self.career_modifier(advisee, y))
            den_pref.append(den_pref[-1] + tl.major_by_year.get(y, 0.0))
        best, best_window = 0.0, None
        for t0 in range(lo, t + 1):
            for t1 in range(max(t, t0 + cfg.s_len), hi + 1):
                i0, i1 = t0 - lo, t1 - lo + 1
                num = num_pref[i1] - num_pref[i0]
                if num < cfg.s_adr:
                    continue
                den = den_pref[i1] - den_pref[i0]
                ratio = num / den
                # ties go to the widest window, then the earliest
                if ratio > best or (ratio == best and best_window and t1 - t0 > best_window[1] - best_window[0]):
                    best, best_window = ratio, (t0, t1)
        return best, best_window

    def score(self, advisor: str, advisee: str, t: int) -> AAScore:
        key = (advisor, advisee, t)
        cached = self._scores.get(key)
        if cached is not None:
            return cached
        p_adr = self.advisor_competency(advisor, advisee, t)
        p_ade, window = self.advisee_prob(advisor, advisee, t)
        s = AAScore(advisor, advisee, t, p_adr, p_ade, advisor_advisee_rate(p_adr, p_ade), window)
        self._scores[key] = s
        return s

    def p_aa(self, advisor: str, advisee: str, t: int) -> float:
        return self.score(advisor, advisee, t).p_aa

    def is_pair(self, advisor: str, advisee: str, t: int) -> bool:
        return self.p_aa(advisor, advisee, t) >= self.cfg.boundary

    def merge(self, other: "AADetector") -> None:
        self._scores.update(other._scores)

    def scores(self) -> list[AAScore]:
        return list(self._scores.values())


def advisor_competency(corpus: Corpus, a_k: str, a_l: str, t: int) -> float:
    return AADetector(corpus).advisor_competency(a_k, a_l, t)


def advisee_prob(corpus: Corpus, a_k: str, a_l: str, t: int, cfg: AAConfig | None = None):
    return AADetector(corpus, cfg).advisee_prob(a_k, a_l, t)


AAProvider = Callable[[str, str, int], float]


def author_contribution(corpus: Corpus, paper_id: str, scholar: str, aa: AAProvider | AADetector) -> float:
    """Probability that ``scholar`` contributed significantly to the paper:
    the larger of the harmonic credit 1/k and, for every co-author at
    position l, p_AA(scholar advising them) / l."""
    paper = corpus.paper(paper_id)
    k = paper.author_rank(scholar)
    if not k:
        raise ValueError(f"{scholar!r} is not an author of {paper_id!r}")
    p_aa = aa.p_aa if isinstance(aa, AADetector) else aa
    best = 1.0 / k
    for l, other in enumerate(paper.authors, start=1):
        if other == scholar:
            continue
        # p_AA/l can only win when l < 1/best
        if l * best >= 1.0:
            break
        best = max(best, p_aa(scholar, other, paper.year) / l)
    return best


def evaluate_aa_labels(detector: AADetector, labels) -> dict:
    """Precision/recall/F1/accuracy of ``p_AA >= boundary`` against labels."""
    tp = fp = tn = fn = 0
    for lab in labels:
        pred = detector.is_pair(lab.advisor_id, lab.advisee_id, lab.year)
        if pred and lab.label:
            tp += 1
        elif pred:
            fp += 1
        elif lab.label:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    n = tp + fp + tn + fn
    return {
        "tp": tp, "fp": fp, "tn": tn, "fn": fn,
        "precision": precision, "recall": recall, "f1": f1,
        "accuracy": (tp + tn) / n if n else 0.0,
    }


def export_aa_scores(path, scores: Iterable[AAScore]) -> None:
    write_jsonl(path, (s.to_json() for s in scores))
