import pytest

from kgcite.kg_store import ConceptType, MentionRecord, build_kg

M, ME, P, D = ConceptType.MATERIAL, ConceptType.METHOD, ConceptType.PROCESS, ConceptType.DATA

TOY_PAPERS = [
    {"id": "a", "domain": "CS", "title": "Graphene nets"},
    {"id": "b", "domain": "CS"},
    {"id": "c", "domain": "Med"},
    {"id": "d", "domain": "MS"},
    {"id": "e", "domain": "Med"},
]

TOY_MENTIONS = [
    MentionRecord("a", "Graphene", M, "CS"),
    MentionRecord("a", "silicon", M, "CS"),
    MentionRecord("a", "ImageNet", D, "CS"),
    MentionRecord("a", "graphene ", M, "CS"),
    MentionRecord("b", "graphene", M, "CS"),
    MentionRecord("b", "Neural   Network", ME, "CS"),
    MentionRecord("b", "annealing", P, "CS"),
    MentionRecord("c", "neural network", ME, "Med"),
    MentionRecord("c", "MRI scans", D, "Med"),
    MentionRecord("d", "graphene", M, "MS"),
    MentionRecord("d", "annealing", P, "MS"),
    # e mentions nothing
]

TOY_CITATIONS = [("a", "b"), ("a", "c"), ("a", "d"), ("a", "e"), ("b", "a"),
                 ("c", "c"), ("c", "zz"), ("a", "b")]


@pytest.fixture
def toy_inputs():
    return TOY_PAPERS, TOY_MENTIONS, TOY_CITATIONS


@pytest.fixture
def toy_kg():
    return build_kg(TOY_PAPERS, TOY_MENTIONS, TOY_CITATIONS, "in-domain")


@pytest.fixture
def toy_kg_cross():
    return build_kg(TOY_PAPERS, TOY_MENTIONS, TOY_CITATIONS, "cross-domain")


# -- acceptance reporting ---------------------------------------------------------

_RESULTS = []


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion, then assert it."""

    def report(label, ok, detail=""):
        _RESULTS.append(("PASS" if ok else "FAIL", label, detail))
        assert ok, f"{label}: {detail}"

    def skip(label, reason):
        _RESULTS.append(("SKIP", label, reason))
        pytest.skip(reason)

    report.skip = skip
    return report


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for status, label, detail in sorted(_RESULTS, key=lambda r: r[1]):
        terminalreporter.write_line(f"{status}  {label}  {detail}")
