import sys

import pytest

from qwattack.graphs import ModelParams, generate_graph, is_connected


def small_graph_corpus():
    """Named small graphs plus connected model samples with n <= 8."""
    from _oracles import complete, cycle, path, star

    graphs = {
        "K2": complete(2),
        "K3": complete(3),
        "K4": complete(4),
        "C4": cycle(4),
        "C5": cycle(5),
        "C8": cycle(8),
        "S4": star(4),
        "P5": path(5),
    }
    for model in ("er", "ws", "ba"):
        params = ModelParams(model=model)
        for n in (5, 6, 7, 8):
            found = 0
            for seed in range(40):
                g = generate_graph(params, n, seed=seed)
                if is_connected(g):
                    graphs[f"{model}{n}/{seed}"] = g
                    found += 1
                    if found == 2:
                        break
    return graphs


@pytest.fixture(scope="session")
def corpus():
    return small_graph_corpus()


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    status = "PASS" if report.passed else ("FAIL" if report.failed else "SKIP")
    sys.stderr.write(f"[acceptance] {name}: {status}\n")
