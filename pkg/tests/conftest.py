import numpy as np
import pytest

from polarbench.ingest import CATEGORICAL, NUMERIC, AttributeSchema, Dataset

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def make_dataset(columns, labels, class_names=None):
    """Build a Dataset from ``{name: (kind, values[, categories])}``; ``None`` means missing."""
    schema, cols = [], []
    for name, spec in columns.items():
        kind, values = spec[0], spec[1]
        if kind == NUMERIC:
            schema.append(AttributeSchema(name, NUMERIC))
            cols.append([np.nan if v is None else float(v) for v in values])
        else:
            cats = tuple(spec[2])
            schema.append(AttributeSchema(name, CATEGORICAL, cats))
            cols.append([np.nan if v is None else float(cats.index(v)) for v in values])
    labels = list(labels)
    if class_names is None:
        class_names = sorted(set(labels))
    y = [class_names.index(l) for l in labels]
    values = np.array(cols, dtype=float).T.reshape(len(y), len(schema))
    return Dataset(tuple(schema), values, np.array(y), tuple(class_names))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
