import numpy as np
import pytest

from wavedr import simulation as sim

from conftest import ACCEPTANCE_SEED


def test_generate_deterministic_and_shape():
    a = sim.generate(2, 50, sim.replication_seed(1, 2, 3))
    b = sim.generate(2, 50, sim.replication_seed(1, 2, 3))
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert a.d == 5
    c = sim.generate(2, 50, sim.replication_seed(1, 2, 4))
    assert not np.array_equal(a.y, c.y)
    with pytest.raises(ValueError):
        sim.generate(1, 1, 0)
    with pytest.raises(ValueError):
        sim.get_model(4)


def test_model1_moments():
    s = sim.generate(1, 10**5, 123)
    assert abs(s.y.mean()) <= 0.03
    assert abs(s.y.var() - 5.0) <= 0.15


@pytest.mark.parametrize("model", [1, 2, 3])
def test_model_responses(model):
    spec = sim.get_model(model)
    x = np.array([[1.0, 2.0, 0.5, -1.0, 3.0]])
    e = np.array([0.25])
    y = spec.response(x, e)[0]
    want = {1: 1 + 2 + 0.5 - 1 + 0.25, 2: 1 * (1 + 2 + 1) + 0.25, 3: 1 / (0.5 + 3.5**2) + 0.25}[model]
    assert y == pytest.approx(want, abs=1e-14)


def test_parse_method():
    assert sim.parse_method("SIR") is sim.Method.SIR
    assert sim.parse_method(sim.Method.KERNEL) is sim.Method.KERNEL
    with pytest.raises(ValueError):
        sim.parse_method("lasso")


def test_replications_deterministic_across_threads():
    a = sim.run_replications(2, "wavelet-d", n=120, reps=6, master_seed=9, threads=1)
    b = sim.run_replications(2, "wavelet-d", n=120, reps=6, master_seed=9, threads=3)
    assert np.array_equal(a.r2_values, b.r2_values)
    assert np.array_equal(a.beta_means, b.beta_means)


def test_single_replication_has_zero_sd():
    s = sim.run_replications(3, "sir", n=100, reps=1, master_seed=0)
    assert np.all(s.r2_sds == 0.0) and np.all(s.beta_sds == 0.0)
    assert np.all((0.0 <= s.r2_values) & (s.r2_values <= 1.0))
    with pytest.raises(ValueError):
        sim.run_replications(3, "sir", n=100, reps=0)


def test_align():
    beta = np.array([1.0, 1.0, 0.0])
    got = sim.align(np.array([-0.5, -0.5, 0.1]), beta)
    assert got @ beta > 0
    assert np.linalg.norm(got) == pytest.approx(np.linalg.norm(beta))


def test_summarize_tables(tmp_path):
    assert sim.summarize_tables([]) == []
    one = sim.run_replications(1, "kernel", n=80, reps=3, master_seed=1)
    rows = sim.summarize_tables([one])
    assert len(rows) == 2 * 5 + 4 * 1
    assert set(rows[0]) == set(sim.RESULT_FIELDS)
    several = sim.run_study(n=60, reps=2, master_seed=1)
    rows = sim.summarize_tables(several, ("r2_mean", "r2_sd"))
    assert len({(r["model"], r["method"]) for r in rows}) == 12
    path = tmp_path / "r.csv"
    sim.write_results_csv(rows, path)
    back = sim.read_results_csv(path)
    assert [r["value"] for r in back] == [r["value"] for r in rows]
    assert [r["component"] for r in back] == [r["component"] for r in rows]


def test_boxplot_and_script(tmp_path):
    s = sim.run_replications(2, "sir", n=60, reps=3, master_seed=1)
    sim.write_boxplot_csv([s], tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == ",".join(sim.BOXPLOT_FIELDS) and len(lines) == 1 + 3 * 2
    sim.write_plot_script(tmp_path / "plot.py", "b.csv")
    compile((tmp_path / "plot.py").read_text(), "plot.py", "exec")


def test_first_direction_accurate_everywhere(study):
    for key, s in study.items():
        assert s.r2_means[0] >= 0.9, key


def test_table1_sds_plausible(study):
    # replication SDs of the beta_1 components of Model 1, within a factor 2 of ~0.045
    for m in sim.METHODS:
        sds = study[(1, m.value)].beta_sds[:4, 0]
        assert np.all((sds >= 0.02) & (sds <= 0.1)), m
    assert ACCEPTANCE_SEED == 42
