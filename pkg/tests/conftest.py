import pytest

from geneticflow.corpus import CitationRecord, Corpus, PaperRecord


def make_corpus(papers, citations=(), contexts=(), topics=(), names=None, strict=True):
    """``papers``: iterable of ``(paper_id, year, authors)`` or PaperRecords."""
    recs = []
    for p in papers:
        if isinstance(p, PaperRecord):
            recs.append(p)
        else:
            pid, year, authors = p[:3]
            recs.append(PaperRecord(pid, f"title {pid}", year, tuple(authors)))
    cits = [c if isinstance(c, CitationRecord) else CitationRecord(*c) for c in citations]
    return Corpus(recs, cits, contexts, topics, names, strict=strict)


@pytest.fixture(scope="session")
def synth_small():
    from geneticflow.harness.synth import SynthSpec, generate_synthetic_corpus

    return generate_synthetic_corpus(SynthSpec(n_scholars=60, n_aa_pairs=10, n_aa_negatives=30, n_external_papers=300, seed=11))


# -- acceptance reporting --------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion covered by the test")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, text = mark.args
    if call.when == "setup" and call.excinfo is not None and call.excinfo.errisinstance(pytest.skip.Exception):
        _CRITERIA[number] = ("SKIP", text)
    elif call.when == "call":
        if call.excinfo is None:
            _CRITERIA[number] = ("PASS", text)
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            _CRITERIA[number] = ("SKIP", text)
        else:
            _CRITERIA[number] = ("FAIL", text)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, text = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {text}")
