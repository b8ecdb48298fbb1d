import json

import pytest

from xorcurrents import cli
from xorcurrents.errors import ConfigError


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_config_strict(tmp_path):
    path = _write(tmp_path, "a.cfg", """
# comment
size = 3            # trailing comment
beta = critical
sizes = 8, 16, 32
ratio = 0.5
""")
    cfg = cli.parse_config(path)
    assert cfg == {"size": 3, "beta": "critical",
                   "sizes": [8, 16, 32], "ratio": 0.5}
    with pytest.raises(ConfigError):
        cli.parse_config(_write(tmp_path, "b.cfg", "just a line\n"))
    with pytest.raises(ConfigError):
        cli.parse_config(_write(tmp_path, "c.cfg", "a = 1\na = 2\n"))
    with pytest.raises(ConfigError):
        cli.parse_config(str(tmp_path / "missing.cfg"))


def test_unknown_key_is_config_error(tmp_path):
    cfg = _write(tmp_path, "d.cfg", "size = 2\nseed = 1\nbogus = 7\n")
    code = cli.main(["sample-coupling", "--config", cfg,
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_CONFIG


def test_missing_required_key(tmp_path):
    cfg = _write(tmp_path, "e.cfg", "size = 2\n")  # no seed
    code = cli.main(["sample-coupling", "--config", cfg,
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_CONFIG


def test_bad_command_exits_config(tmp_path):
    cfg = _write(tmp_path, "f.cfg", "size = 2\nseed = 1\n")
    code = cli.main(["no-such-command", "--config", cfg,
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_CONFIG


def test_capacity_exit_code(tmp_path):
    cfg = _write(tmp_path, "g.cfg", "size = 6\nbc = free\n")
    code = cli.main(["oracle-enumerate", "--config", cfg,
                     "--out", str(tmp_path / "out")])
    assert code == cli.EXIT_CAPACITY


def test_sample_coupling_run_and_manifest(tmp_path):
    cfg = _write(tmp_path, "h.cfg", "size = 3\nseed = 11\nsamples = 20\n")
    out = tmp_path / "run1"
    assert cli.main(["sample-coupling", "--config", cfg,
                     "--out", str(out)]) == cli.EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "sample-coupling"
    assert set(manifest["artifacts"]) == {"sample.json",
                                          "batch_summary.json"}
    assert len(manifest["config_sha256"]) == 64
    sample = json.loads((out / "sample.json").read_text())
    assert sample["seed"] == 11


def test_reruns_are_byte_identical(tmp_path):
    cfg = _write(tmp_path, "i.cfg", "size = 3\nseed = 5\n")
    outs = []
    for name in ("runA", "runB"):
        out = tmp_path / name
        assert cli.main(["decompose", "--config", cfg,
                         "--out", str(out)]) == cli.EXIT_OK
        outs.append({p.name: p.read_bytes()
                     for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert "clusters.csv" in outs[0]


def test_oracle_enumerate_probabilities(tmp_path):
    cfg = _write(tmp_path, "j.cfg", "size = 2\nbc = free\n")
    out = tmp_path / "enum"
    assert cli.main(["oracle-enumerate", "--config", cfg,
                     "--out", str(out)]) == cli.EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert abs(summary["total"] - 1.0) < 1e-9
    header = (out / "trace_distribution.csv").read_text().splitlines()[0]
    assert header == "odd_mask_hex,occupied_mask_hex,probability"


def test_verify_switching_command(tmp_path):
    cfg = _write(tmp_path, "k.cfg",
                 "size = 3\nseed = 2\nsamples = 5000\nvertices = 5, 6\n")
    out = tmp_path / "sw"
    assert cli.main(["verify-switching", "--config", cfg,
                     "--out", str(out)]) == cli.EXIT_OK
    rep = json.loads((out / "switching.json").read_text())
    assert rep["pass"]


def test_continuum_inequalities_command(tmp_path):
    cfg = _write(tmp_path, "l.cfg", """
pairs = 200
alpha_grid = 0.5, 1.0
u_grid = 0.0, 0.785
seed = 3
hyperbolic_triples = 200
hyperbolic_alpha_grid = 0.5, 1.0
""")
    out = tmp_path / "cont"
    assert cli.main(["continuum-inequalities", "--config", cfg,
                     "--out", str(out)]) == cli.EXIT_OK
    rep = json.loads((out / "kernel_inequalities.json").read_text())
    assert rep["violations"] == 0
    hyp = json.loads((out / "hyperbolic.json").read_text())
    assert hyp["violations"] == 0


def test_gff_chaos_command(tmp_path):
    cfg = _write(tmp_path, "m.cfg", """
grid = 8
x = 3, 3
y = 4, 5
mode = sin-sin
samples = 20000
seed = 4
pairs = 100
alpha_grid = 0.5, 1.0
u_grid = 0.0
""")
    out = tmp_path / "gff"
    assert cli.main(["gff-chaos", "--config", cfg,
                     "--out", str(out)]) == cli.EXIT_OK
    rep = json.loads((out / "chaos.json").read_text())
    assert rep["pass"]


def test_loewner_sweep_command(tmp_path):
    cfg = _write(tmp_path, "n.cfg", """
triples = 5
alpha_grid = 0.5, 1.0
seed = 6
t_max = 0.3
""")
    out = tmp_path / "loew"
    assert cli.main(["loewner-sweep", "--config", cfg,
                     "--out", str(out)]) == cli.EXIT_OK
    rep = json.loads((out / "sweep_summary.json").read_text())
    assert rep["max_dC"] <= 1e-9
    assert rep["min_dS_alpha_le_1"] >= -1e-9
